//! Fully enumerated finite groups.
//!
//! Every group indexes its elements `0..order` with the identity at index 0.
//! Groups up to [`GroupCaps::table_max`] elements carry a flat multiplication
//! table; larger ones multiply through their natural representation (matrix
//! product, permutation composition, or componentwise for products).

mod census;
mod cosets;
mod hom;
mod marked;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Perm, Result};

pub use census::{
    orbit_type_census, orbits, subgroup_class_key, OrbitCensus, OrbitInfo, SubgroupClass,
    CENSUS_MAX_ORDER,
};
pub use cosets::{is_subgroup, left_coset_reps};
pub use hom::{GroupHom, MarkedHom, PermAction};
pub use marked::{Letter, MarkedGroup, MarkedMap, Word};

/// Size limits applied while building groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCaps {
    /// Largest order any constructor will enumerate.
    pub max_order: usize,
    /// Largest order for which a full multiplication table is stored.
    pub table_max: usize,
}

impl Default for GroupCaps {
    fn default() -> Self {
        GroupCaps {
            max_order: 1 << 20,
            table_max: 4096,
        }
    }
}

#[derive(Debug)]
struct Sl2Data {
    modulus: u32,
    mats: Vec<[u32; 4]>,
    lookup: MatLookup,
}

#[derive(Debug)]
enum MatLookup {
    Dense(Vec<u32>),
    Sparse(HashMap<[u32; 4], u32>),
}

impl Sl2Data {
    fn key(&self, m: [u32; 4]) -> usize {
        let n = self.modulus as usize;
        ((m[0] as usize * n + m[1] as usize) * n + m[2] as usize) * n + m[3] as usize
    }

    fn index_of(&self, m: [u32; 4]) -> Option<u32> {
        match &self.lookup {
            MatLookup::Dense(v) => {
                let i = v[self.key(m)];
                (i != u32::MAX).then_some(i)
            }
            MatLookup::Sparse(h) => h.get(&m).copied(),
        }
    }

    fn mat_mul(&self, a: [u32; 4], b: [u32; 4]) -> [u32; 4] {
        let n = self.modulus as u64;
        let [a0, a1, a2, a3] = a.map(u64::from);
        let [b0, b1, b2, b3] = b.map(u64::from);
        [
            ((a0 * b0 + a1 * b2) % n) as u32,
            ((a0 * b1 + a1 * b3) % n) as u32,
            ((a2 * b0 + a3 * b2) % n) as u32,
            ((a2 * b1 + a3 * b3) % n) as u32,
        ]
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let m = self.mat_mul(self.mats[a as usize], self.mats[b as usize]);
        self.index_of(m).expect("SL2 closed under multiplication")
    }
}

#[derive(Debug)]
struct PermData {
    elements: Vec<Perm>,
    lookup: HashMap<Perm, u32>,
}

#[derive(Debug)]
struct SubData {
    parent: Arc<FinGroup>,
    elements: Vec<u32>,
    lookup: HashMap<u32, u32>,
}

#[derive(Debug)]
enum Kind {
    Abstract,
    Cyclic,
    Sl2(Sl2Data),
    Perms(PermData),
    Product(Arc<FinGroup>, Arc<FinGroup>),
    Sub(SubData),
}

/// A finite group with elements `0..order`, identity `0`, and a recorded
/// generating set.
#[derive(Debug)]
pub struct FinGroup {
    order: usize,
    kind: Kind,
    table: Option<Vec<u32>>,
    inv: Vec<u32>,
    generators: Vec<u32>,
    name: String,
}

impl fmt::Display for FinGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {})", self.name, self.order)
    }
}

/// `|SL_2(Z/nZ)| = n^3 ∏_{p | n} (1 - 1/p^2)`.
pub fn sl2_order(n: u64) -> u64 {
    let mut order = n * n * n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            order = order / (p * p) * (p * p - 1);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        order = order / (m * m) * (m * m - 1);
    }
    order
}

impl FinGroup {
    fn finish(mut self, caps: &GroupCaps) -> Self {
        if self.table.is_none() && self.order <= caps.table_max {
            let n = self.order;
            let mut table = vec![0u32; n * n];
            for a in 0..n {
                for b in 0..n {
                    table[a * n + b] = self.mul_raw(a as u32, b as u32);
                }
            }
            self.table = Some(table);
        }
        self
    }

    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        match &self.kind {
            Kind::Abstract => {
                let t = self.table.as_ref().expect("abstract groups carry a table");
                t[a as usize * self.order + b as usize]
            }
            Kind::Cyclic => ((a as u64 + b as u64) % self.order as u64) as u32,
            Kind::Sl2(d) => d.mul(a, b),
            Kind::Perms(d) => {
                let p = d.elements[a as usize].compose_unchecked(&d.elements[b as usize]);
                d.lookup[&p]
            }
            Kind::Product(l, r) => {
                let m = r.order as u32;
                let (a0, a1) = (a / m, a % m);
                let (b0, b1) = (b / m, b % m);
                l.mul(a0, b0) * m + r.mul(a1, b1)
            }
            Kind::Sub(d) => {
                let p = d.parent.mul(d.elements[a as usize], d.elements[b as usize]);
                d.lookup[&p]
            }
        }
    }

    /// The cyclic group `Z/nZ` with generator `1`.
    pub fn cyclic(n: usize) -> Result<FinGroup> {
        Self::cyclic_with(n, &GroupCaps::default())
    }

    pub fn cyclic_with(n: usize, caps: &GroupCaps) -> Result<FinGroup> {
        if n == 0 {
            return Err(Error::InvalidInput("cyclic group of order 0".into()));
        }
        if n > caps.max_order {
            return Err(Error::Capacity {
                what: format!("cyclic({n})"),
                limit: caps.max_order,
            });
        }
        let inv = (0..n as u32).map(|a| (n as u32 - a) % n as u32).collect();
        let generators = if n == 1 { vec![] } else { vec![1] };
        Ok(FinGroup {
            order: n,
            kind: Kind::Cyclic,
            table: None,
            inv,
            generators,
            name: format!("C{n}"),
        }
        .finish(caps))
    }

    /// `SL_2(Z/nZ)`, identity first and the remaining matrices in
    /// lexicographic order of `(a, b, c, d)`. Generators are
    /// `[[1,1],[0,1]]` and `[[1,0],[1,1]]`.
    pub fn sl2_mod(n: u32) -> Result<FinGroup> {
        Self::sl2_mod_with(n, &GroupCaps::default())
    }

    pub fn sl2_mod_with(n: u32, caps: &GroupCaps) -> Result<FinGroup> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("SL2 modulus {n} < 2")));
        }
        let order = sl2_order(n as u64);
        if order > caps.max_order as u64 {
            return Err(Error::Capacity {
                what: format!("SL2(Z/{n}Z) of order {order}"),
                limit: caps.max_order,
            });
        }
        let nn = n as u64;
        let mut mats: Vec<[u32; 4]> = Vec::with_capacity(order as usize);
        mats.push([1, 0, 0, 1 % n]);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let det = (a as u64 * d as u64 + nn * nn - (b as u64 * c as u64) % nn) % nn;
                        if det == 1 % nn && [a, b, c, d] != mats[0] {
                            mats.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        debug_assert_eq!(mats.len() as u64, order);
        let n4 = (nn * nn * nn * nn) as usize;
        let lookup = if n4 <= 1 << 24 {
            let mut v = vec![u32::MAX; n4];
            let key = |m: &[u32; 4]| {
                let n = n as usize;
                ((m[0] as usize * n + m[1] as usize) * n + m[2] as usize) * n + m[3] as usize
            };
            for (i, m) in mats.iter().enumerate() {
                v[key(m)] = i as u32;
            }
            MatLookup::Dense(v)
        } else {
            MatLookup::Sparse(
                mats.iter()
                    .enumerate()
                    .map(|(i, m)| (*m, i as u32))
                    .collect(),
            )
        };
        let data = Sl2Data {
            modulus: n,
            mats,
            lookup,
        };
        let inv = data
            .mats
            .iter()
            .map(|&[a, b, c, d]| {
                let neg = |x: u32| (n - x % n) % n;
                data.index_of([d, neg(b), neg(c), a]).expect("inverse in SL2")
            })
            .collect();
        let generators = vec![
            data.index_of([1, 1 % n, 0, 1]).unwrap(),
            data.index_of([1, 0, 1 % n, 1]).unwrap(),
        ];
        Ok(FinGroup {
            order: order as usize,
            kind: Kind::Sl2(data),
            table: None,
            inv,
            generators,
            name: format!("SL2(Z/{n}Z)"),
        }
        .finish(caps))
    }

    /// `A × B` with element `(a, b)` at index `a * |B| + b`; generators are
    /// those of `A` (paired with the identity) followed by those of `B`.
    pub fn direct_product(a: Arc<FinGroup>, b: Arc<FinGroup>) -> Result<FinGroup> {
        Self::direct_product_with(a, b, &GroupCaps::default())
    }

    pub fn direct_product_with(
        a: Arc<FinGroup>,
        b: Arc<FinGroup>,
        caps: &GroupCaps,
    ) -> Result<FinGroup> {
        let order = a
            .order
            .checked_mul(b.order)
            .filter(|&o| o <= caps.max_order)
            .ok_or_else(|| Error::Capacity {
                what: format!("{} x {}", a.name, b.name),
                limit: caps.max_order,
            })?;
        let m = b.order as u32;
        let mut inv = Vec::with_capacity(order);
        for x in 0..a.order as u32 {
            for y in 0..m {
                inv.push(a.inv(x) * m + b.inv(y));
            }
        }
        let generators = a
            .generators
            .iter()
            .map(|&g| g * m)
            .chain(b.generators.iter().copied())
            .collect();
        let name = format!("{} x {}", a.name, b.name);
        Ok(FinGroup {
            order,
            kind: Kind::Product(a, b),
            table: None,
            inv,
            generators,
            name,
        }
        .finish(caps))
    }

    /// Closure of permutation generators, elements indexed in BFS discovery
    /// order with the identity first.
    pub fn from_perm_generators(gens: &[Perm], cap: usize) -> Result<FinGroup> {
        let caps = GroupCaps {
            max_order: cap,
            ..GroupCaps::default()
        };
        Self::from_perm_generators_with(gens, &caps)
    }

    pub fn from_perm_generators_with(gens: &[Perm], caps: &GroupCaps) -> Result<FinGroup> {
        let degree = gens.first().map_or(0, Perm::len);
        if let Some(g) = gens.iter().find(|g| g.len() != degree) {
            return Err(Error::SizeMismatch {
                left: degree,
                right: g.len(),
            });
        }
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut lookup = HashMap::from([(id, 0u32)]);
        let mut head = 0;
        while head < elements.len() {
            for g in gens {
                let p = elements[head].compose_unchecked(g);
                if !lookup.contains_key(&p) {
                    if elements.len() >= caps.max_order {
                        return Err(Error::Capacity {
                            what: "permutation group closure".into(),
                            limit: caps.max_order,
                        });
                    }
                    lookup.insert(p.clone(), elements.len() as u32);
                    elements.push(p);
                }
            }
            head += 1;
        }
        let inv = elements.iter().map(|p| lookup[&p.inverse()]).collect();
        let generators = gens.iter().map(|g| lookup[g]).collect();
        Ok(FinGroup {
            order: elements.len(),
            kind: Kind::Perms(PermData { elements, lookup }),
            table: None,
            inv,
            generators,
            name: format!("<{} perms on {degree} points>", gens.len()),
        }
        .finish(caps))
    }

    /// A group given by its full multiplication table (row-major, identity
    /// at index 0). Group axioms are checked.
    pub fn from_table(order: usize, table: Vec<u32>, generators: Vec<u32>) -> Result<FinGroup> {
        if table.len() != order * order || order == 0 {
            return Err(Error::InvalidInput("table is not order x order".into()));
        }
        if table.iter().any(|&v| v as usize >= order) {
            return Err(Error::InvalidInput("table entry out of range".into()));
        }
        let mut inv = vec![u32::MAX; order];
        for a in 0..order {
            if table[a] as usize != a || table[a * order] as usize != a {
                return Err(Error::InvalidInput("index 0 is not the identity".into()));
            }
            inv[a] = (0..order as u32)
                .find(|&b| table[a * order + b as usize] == 0)
                .ok_or_else(|| Error::InvalidInput(format!("element {a} has no inverse")))?;
        }
        let g = FinGroup {
            order,
            kind: Kind::Abstract,
            table: Some(table),
            inv,
            generators,
            name: format!("G{order}"),
        };
        g.validate(&mut rand::rngs::mock::StepRng::new(1, 7))?;
        Ok(g)
    }

    /// The subgroup generated by `gens` (indices into `parent`), with its own
    /// indexing in BFS order. Returns the subgroup and its embedding.
    pub fn subgroup(parent: &Arc<FinGroup>, gens: &[u32]) -> Result<(FinGroup, Vec<u32>)> {
        Self::subgroup_with(parent, gens, &GroupCaps::default())
    }

    pub fn subgroup_with(
        parent: &Arc<FinGroup>,
        gens: &[u32],
        caps: &GroupCaps,
    ) -> Result<(FinGroup, Vec<u32>)> {
        let elements = parent.closure(gens);
        Self::subgroup_from_elements(parent, elements, gens, caps)
    }

    /// Subgroup given by its full element list (identity first). Closure
    /// under multiplication is checked.
    pub fn subgroup_from_elements(
        parent: &Arc<FinGroup>,
        elements: Vec<u32>,
        gens: &[u32],
        caps: &GroupCaps,
    ) -> Result<(FinGroup, Vec<u32>)> {
        if elements.first() != Some(&0) {
            return Err(Error::NotASubgroup("identity must come first".into()));
        }
        if elements.len() > caps.max_order {
            return Err(Error::Capacity {
                what: "subgroup".into(),
                limit: caps.max_order,
            });
        }
        let lookup: HashMap<u32, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as u32))
            .collect();
        let inv = elements
            .iter()
            .map(|&e| {
                lookup
                    .get(&parent.inv(e))
                    .copied()
                    .ok_or_else(|| Error::NotASubgroup("not closed under inverse".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let generators = gens
            .iter()
            .map(|g| {
                lookup
                    .get(g)
                    .copied()
                    .ok_or_else(|| Error::NotASubgroup("generator outside subgroup".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let name = format!("subgroup of {} (order {})", parent.name, elements.len());
        let sub = FinGroup {
            order: elements.len(),
            kind: Kind::Sub(SubData {
                parent: Arc::clone(parent),
                elements: elements.clone(),
                lookup,
            }),
            table: None,
            inv,
            generators,
            name,
        };
        // closure under multiplication: every product must resolve
        for &a in &elements {
            for &b in &sub.generators {
                let p = parent.mul(a, elements[b as usize]);
                if !matches!(&sub.kind, Kind::Sub(d) if d.lookup.contains_key(&p)) {
                    return Err(Error::NotASubgroup("not closed under multiplication".into()));
                }
            }
        }
        Ok((sub.finish(caps), elements))
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> u32 {
        0
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.table {
            Some(t) => t[a as usize * self.order + b as usize],
            None => self.mul_raw(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn pow(&self, x: u32, e: u64) -> u32 {
        let (mut acc, mut base, mut e) = (0u32, x, e);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn element_order(&self, x: u32) -> usize {
        let mut y = x;
        let mut k = 1;
        while y != 0 {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Elements of the subgroup generated by `gens`, identity first, then in
    /// BFS discovery order (right multiplication by generators).
    pub fn closure(&self, gens: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut out = vec![0u32];
        let mut queue = VecDeque::from([0u32]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !std::mem::replace(&mut seen[y as usize], true) {
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out
    }

    pub fn generates(&self, gens: &[u32]) -> bool {
        self.closure(gens).len() == self.order
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter()
            .all(|&a| g.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
            && self.generates(g)
    }

    /// `x -> g x` as a permutation of the elements.
    pub fn left_translation(&self, g: u32) -> Perm {
        Perm::from_images_unchecked((0..self.order as u32).map(|x| self.mul(g, x)).collect())
    }

    /// `x -> x g⁻¹` as a permutation of the elements.
    pub fn right_translation(&self, g: u32) -> Perm {
        let gi = self.inv(g);
        Perm::from_images_unchecked((0..self.order as u32).map(|x| self.mul(x, gi)).collect())
    }

    /// Index of the matrix `[[a, b], [c, d]]` (entries reduced mod n) for an
    /// `SL_2(Z/nZ)` group.
    pub fn sl2_element(&self, m: [i64; 4]) -> Option<u32> {
        match &self.kind {
            Kind::Sl2(d) => {
                let n = d.modulus as i64;
                d.index_of(m.map(|x| x.rem_euclid(n) as u32))
            }
            _ => None,
        }
    }

    pub fn sl2_modulus(&self) -> Option<u32> {
        match &self.kind {
            Kind::Sl2(d) => Some(d.modulus),
            _ => None,
        }
    }

    /// Factors of a direct product.
    pub fn factors(&self) -> Option<(&Arc<FinGroup>, &Arc<FinGroup>)> {
        match &self.kind {
            Kind::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn pair(&self, a: u32, b: u32) -> Option<u32> {
        self.factors().map(|(_, r)| a * r.order as u32 + b)
    }

    pub fn components(&self, x: u32) -> Option<(u32, u32)> {
        self.factors()
            .map(|(_, r)| (x / r.order as u32, x % r.order as u32))
    }

    /// Permutation elements of a group built from permutation generators.
    pub fn perm_elements(&self) -> Option<&[Perm]> {
        match &self.kind {
            Kind::Perms(d) => Some(&d.elements),
            _ => None,
        }
    }

    pub fn perm_index(&self, p: &Perm) -> Option<u32> {
        match &self.kind {
            Kind::Perms(d) => d.lookup.get(p).copied(),
            _ => None,
        }
    }

    /// Embedding of a subgroup into its parent.
    pub fn parent_embedding(&self) -> Option<(&Arc<FinGroup>, &[u32])> {
        match &self.kind {
            Kind::Sub(d) => Some((&d.parent, &d.elements)),
            _ => None,
        }
    }

    pub fn label(&self, x: u32) -> String {
        match &self.kind {
            Kind::Sl2(d) => {
                let [a, b, c, e] = d.mats[x as usize];
                format!("[[{a},{b}],[{c},{e}]]")
            }
            Kind::Perms(d) => format!("{:?}", d.elements[x as usize].images()),
            Kind::Product(l, r) => {
                let m = r.order as u32;
                format!("({}, {})", l.label(x / m), r.label(x % m))
            }
            Kind::Sub(d) => d.parent.label(d.elements[x as usize]),
            Kind::Abstract | Kind::Cyclic => x.to_string(),
        }
    }

    /// Checks identity, inverse and generation exhaustively, and
    /// associativity exhaustively for order <= 64, on 4096 random triples
    /// otherwise.
    pub fn validate<R: Rng>(&self, rng: &mut R) -> Result<()> {
        let n = self.order as u32;
        for x in 0..n {
            if self.mul(0, x) != x || self.mul(x, 0) != x {
                return Err(Error::Internal(format!("identity law fails at {x}")));
            }
            if self.mul(x, self.inv(x)) != 0 {
                return Err(Error::Internal(format!("inverse law fails at {x}")));
            }
        }
        let assoc = |a: u32, b: u32, c: u32| {
            self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
        };
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::Internal(format!(
                                "associativity fails at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            for _ in 0..4096 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(Error::Internal(format!(
                        "associativity fails at ({a},{b},{c})"
                    )));
                }
            }
        }
        let closure = self.closure(&self.generators).len();
        if closure != self.order {
            return Err(Error::NonGenerating {
                closure,
                order: self.order,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> GroupJson {
        let small = self.order <= 4096;
        GroupJson {
            name: self.name.clone(),
            order: self.order,
            generators: self.generators.clone(),
            labels: small.then(|| (0..self.order as u32).map(|x| self.label(x)).collect()),
            mul_rows: self.table.as_ref().map(|t| {
                t.chunks(self.order).map(|r| r.to_vec()).collect()
            }),
        }
    }
}

/// JSON form of a group; `mul_rows` is omitted above the table cap.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupJson {
    pub name: String,
    pub order: usize,
    pub generators: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mul_rows: Option<Vec<Vec<u32>>>,
}

/// Compact group descriptions used by the CLI and config files:
/// `cyclic(6)`, `sl2(5)`, `sym(3)`, and products joined by `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupSpec {
    Cyclic(usize),
    Sl2(u32),
    Sym(usize),
    Product(Vec<GroupSpec>),
}

impl TryFrom<String> for GroupSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupSpec> for String {
    fn from(g: GroupSpec) -> Self {
        g.to_string()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic({n})"),
            GroupSpec::Sl2(n) => write!(f, "sl2({n})"),
            GroupSpec::Sym(n) => write!(f, "sym({n})"),
            GroupSpec::Product(parts) => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join("x"))
            }
        }
    }
}

impl std::str::FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('x').map(str::trim).filter(|p| !p.is_empty()).collect();
        let parse_one = |p: &str| -> Result<GroupSpec> {
            let bad = || Error::InvalidInput(format!("cannot parse group spec {p:?}"));
            let (head, rest) = p.split_once('(').ok_or_else(bad)?;
            let arg: u64 = rest
                .strip_suffix(')')
                .ok_or_else(bad)?
                .trim()
                .parse()
                .map_err(|_| bad())?;
            match head.trim() {
                "cyclic" | "C" | "Z" => Ok(GroupSpec::Cyclic(arg as usize)),
                "sl2" | "SL2" => Ok(GroupSpec::Sl2(arg as u32)),
                "sym" | "S" => Ok(GroupSpec::Sym(arg as usize)),
                _ => Err(bad()),
            }
        };
        match parts.as_slice() {
            [] => Err(Error::InvalidInput("empty group spec".into())),
            [one] => parse_one(one),
            many => Ok(GroupSpec::Product(
                many.iter().map(|p| parse_one(p)).collect::<Result<_>>()?,
            )),
        }
    }
}

impl GroupSpec {
    pub fn build(&self, caps: &GroupCaps) -> Result<FinGroup> {
        match self {
            GroupSpec::Cyclic(n) => FinGroup::cyclic_with(*n, caps),
            GroupSpec::Sl2(n) => FinGroup::sl2_mod_with(*n, caps),
            GroupSpec::Sym(n) => symmetric_group(*n, caps),
            GroupSpec::Product(parts) => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::InvalidInput("empty product".into()))?;
                let mut acc = Arc::new(first.build(caps)?);
                for p in it {
                    let next = Arc::new(p.build(caps)?);
                    acc = Arc::new(FinGroup::direct_product_with(acc, next, caps)?);
                }
                Ok(Arc::try_unwrap(acc).unwrap_or_else(|_| unreachable!("sole owner")))
            }
        }
    }
}

/// `Sym(n)` generated by the transposition `(0 1)` and the cycle `(0 1 .. n-1)`.
pub fn symmetric_group(n: usize, caps: &GroupCaps) -> Result<FinGroup> {
    if n == 0 {
        return Err(Error::InvalidInput("Sym(0)".into()));
    }
    if n == 1 {
        let mut g = FinGroup::from_perm_generators_with(&[], caps)?;
        g.set_name("Sym(1)");
        return Ok(g);
    }
    let swap = Perm::transposition(n, 0, 1)?;
    let cycle = Perm::cycle(n, &(0..n).collect::<Vec<_>>())?;
    let mut g = FinGroup::from_perm_generators_with(&[swap, cycle], caps)?;
    g.set_name(format!("Sym({n})"));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_sl2_count(n: u32) -> usize {
        let mut c = 0;
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        if (a * d + n * n - b * cc % (n * n)) % n == 1 % n {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn sl2_orders_match_enumeration_and_formula() {
        for (n, expect) in [(2u32, 6usize), (3, 24), (4, 48), (5, 120), (6, 144), (13, 2184)] {
            let g = FinGroup::sl2_mod(n).unwrap();
            assert_eq!(g.order(), expect, "n = {n}");
            assert_eq!(sl2_order(n as u64) as usize, expect);
            if n <= 6 {
                assert_eq!(brute_sl2_count(n), expect);
            }
        }
    }

    #[test]
    fn sl2_passes_group_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 4, 5, 7] {
            FinGroup::sl2_mod(n).unwrap().validate(&mut rng).unwrap();
        }
        // large enough to skip the table
        let g = FinGroup::sl2_mod(17).unwrap();
        assert!(!g.has_table());
        g.validate(&mut rng).unwrap();
    }

    #[test]
    fn sl2_2_is_sym3() {
        let g = FinGroup::sl2_mod(2).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
    }

    #[test]
    fn perm_closure_sizes() {
        let s = Perm::transposition(2, 0, 1).unwrap();
        assert_eq!(FinGroup::from_perm_generators(&[s], 100).unwrap().order(), 2);

        let c3 = Perm::cycle(3, &[0, 1, 2]).unwrap();
        let sw = Perm::transposition(3, 0, 1).unwrap();
        let g = FinGroup::from_perm_generators(&[c3, sw], 100).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.perm_elements().unwrap()[0], Perm::identity(3));
    }

    #[test]
    fn perm_closure_of_sl2_5_regular_image() {
        let g = Arc::new(FinGroup::sl2_mod(5).unwrap());
        let gens: Vec<Perm> = g.generators().iter().map(|&s| g.left_translation(s)).collect();
        assert_eq!(FinGroup::from_perm_generators(&gens, 1000).unwrap().order(), 120);
    }

    #[test]
    fn perm_closure_cap() {
        let g = symmetric_group(5, &GroupCaps::default()).unwrap();
        assert_eq!(g.order(), 120);
        let swap = Perm::transposition(5, 0, 1).unwrap();
        let cyc = Perm::cycle(5, &[0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(
            FinGroup::from_perm_generators(&[swap, cyc], 50),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn cyclic_and_products() {
        assert_eq!(FinGroup::cyclic(1).unwrap().order(), 1);
        let p = FinGroup::direct_product(
            Arc::new(FinGroup::cyclic(2).unwrap()),
            Arc::new(FinGroup::cyclic(3).unwrap()),
        )
        .unwrap();
        assert_eq!(p.order(), 6);
        assert!(p.is_abelian());
        let big = FinGroup::direct_product(
            Arc::new(FinGroup::sl2_mod(3).unwrap()),
            Arc::new(FinGroup::sl2_mod(5).unwrap()),
        )
        .unwrap();
        assert_eq!(big.order(), 2880);
        big.validate(&mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    }

    #[test]
    fn order_cap_is_enforced() {
        let caps = GroupCaps {
            max_order: 1000,
            table_max: 64,
        };
        assert!(matches!(
            FinGroup::sl2_mod_with(13, &caps),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn group_spec_round_trip() {
        let s: GroupSpec = "sl2(3) x cyclic(4)".parse().unwrap();
        assert_eq!(s.to_string(), "sl2(3)xcyclic(4)");
        assert_eq!(s.build(&GroupCaps::default()).unwrap().order(), 96);
        assert!("foo(3)".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn json_omits_table_above_cap() {
        let small = FinGroup::cyclic(4).unwrap().to_json();
        assert_eq!(small.mul_rows.as_ref().unwrap().len(), 4);
        let big = FinGroup::sl2_mod(17).unwrap().to_json();
        assert!(big.mul_rows.is_none());
        let s = serde_json::to_string(&big).unwrap();
        assert!(!s.contains("mul_rows"));
    }

    #[test]
    fn from_table_rejects_non_groups() {
        // Z/3 table with a corrupted entry
        let t = vec![0, 1, 2, 1, 2, 0, 2, 0, 0];
        assert!(FinGroup::from_table(3, t, vec![1]).is_err());
        let ok = vec![0, 1, 2, 1, 2, 0, 2, 0, 1];
        assert_eq!(FinGroup::from_table(3, ok, vec![1]).unwrap().order(), 3);
    }
}
