//! Almost-invariant subsets of finite groups and sets.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::group::{orbits, FinGroup};
use crate::{Error, Perm, Rational, Result};

/// A subset `C` of a finite group together with its density and its
/// defect `|sC △ C| / |G|` under left translation by each generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlmostInvSet {
    pub order: usize,
    pub members: Vec<u32>,
    pub density: Rational,
    pub defect_profile: Vec<(u32, Rational)>,
}

impl AlmostInvSet {
    pub fn new(g: &FinGroup, members: Vec<u32>, gens: &[u32]) -> Result<Self> {
        let n = g.order();
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::Precondition("almost-invariant set must be nonempty".into()));
        }
        if members.last().is_some_and(|&x| x as usize >= n) {
            return Err(Error::InvalidInput("member out of range".into()));
        }
        let mask = to_mask(n, &members);
        let defect_profile = gens
            .iter()
            .map(|&s| {
                let moved_out = members
                    .iter()
                    .filter(|&&x| !mask.contains(g.mul(s, x) as usize))
                    .count();
                (s, Rational::new(2 * moved_out as i64, n as i64))
            })
            .collect();
        Ok(AlmostInvSet {
            order: n,
            density: Rational::new(members.len() as i64, n as i64),
            members,
            defect_profile,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_defect(&self) -> Rational {
        self.defect_profile
            .iter()
            .map(|p| p.1)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn mask(&self) -> FixedBitSet {
        to_mask(self.order, &self.members)
    }
}

pub(crate) fn checked_mask(n: usize, members: &[u32]) -> Result<FixedBitSet> {
    if let Some(&x) = members.iter().find(|&&x| x as usize >= n) {
        return Err(Error::InvalidInput(format!("{x} out of range 0..{n}")));
    }
    Ok(to_mask(n, members))
}

pub(crate) fn to_mask(n: usize, members: &[u32]) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(n);
    members.iter().for_each(|&x| m.insert(x as usize));
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRounding {
    /// The invariant set, sorted.
    pub set: Vec<u32>,
    pub sym_diff: usize,
    /// `2 · max_{h∈H} |X △ hX|`.
    pub bound: usize,
    pub subgroup_order: usize,
}

/// Rounds `x ⊂ {0..y_size-1}` to a set invariant under the group generated
/// by `h_gens`: keeps the points `y` with `#{h : h(y) ∈ X} ≥ |H|/2`.
///
/// Since `#{h : h(y) ∈ X} / |H| = |Hy ∩ X| / |Hy|`, the rule keeps exactly
/// the orbits at least half covered by `X`. The subgroup is still
/// enumerated, up to `cap` elements, to evaluate the bound.
pub fn round_to_invariant(
    y_size: usize,
    x: &[u32],
    h_gens: &[Perm],
    cap: usize,
) -> Result<InvariantRounding> {
    if let Some(p) = h_gens.iter().find(|p| p.len() != y_size) {
        return Err(Error::SizeMismatch {
            left: y_size,
            right: p.len(),
        });
    }
    let mask = checked_mask(y_size, x)?;
    let h = if h_gens.is_empty() {
        FinGroup::from_perm_generators(&[Perm::identity(y_size)], cap)?
    } else {
        FinGroup::from_perm_generators(h_gens, cap)?
    };
    let elements = h.perm_elements().expect("permutation group");
    let bound = 2 * elements
        .iter()
        .map(|p| {
            // |X △ hX| = 2 |hX ∖ X|
            2 * mask.ones().filter(|&y| !mask.contains(p.apply(y))).count()
        })
        .max()
        .unwrap_or(0);
    let mut keep = FixedBitSet::with_capacity(y_size);
    for orbit in orbits(y_size, h_gens) {
        let inside = orbit.iter().filter(|&&y| mask.contains(y)).count();
        if 2 * inside >= orbit.len() {
            orbit.iter().for_each(|&y| keep.insert(y));
        }
    }
    let sym_diff = keep.symmetric_difference(&mask).count();
    Ok(InvariantRounding {
        set: keep.ones().map(|y| y as u32).collect(),
        sym_diff,
        bound,
        subgroup_order: h.order(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShrinkStep {
    pub h: u32,
    /// `|Dh ∩ D|`.
    pub overlap: usize,
    /// `Dh ∩ D`, sorted.
    pub shrunk: Vec<u32>,
}

/// Finds the smallest `h` with `|D|²/(4|G|) ≤ |Dh ∩ D| ≤ 3|D|/4` and
/// returns it with `Dh ∩ D`.
pub fn shrink_step(g: &FinGroup, d: &[u32]) -> Result<ShrinkStep> {
    let n = g.order();
    let mask = checked_mask(n, d)?;
    let size = mask.count_ones(..);
    if size == 0 || 4 * size >= 3 * n {
        return Err(Error::Precondition(format!(
            "shrink step needs 0 < |D| < 3|G|/4, got |D| = {size}, |G| = {n}"
        )));
    }
    for h in 0..n as u32 {
        // x ∈ Dh ∩ D iff x ∈ D and x h⁻¹ ∈ D
        let hi = g.inv(h);
        let shrunk: Vec<u32> = mask
            .ones()
            .map(|x| x as u32)
            .filter(|&x| mask.contains(g.mul(x, hi) as usize))
            .collect();
        let i = shrunk.len();
        if size * size <= 4 * n * i && 4 * i <= 3 * size {
            return Ok(ShrinkStep {
                h,
                overlap: i,
                shrunk,
            });
        }
    }
    Err(Error::NoWitness(format!(
        "no h satisfies the overlap window for |D| = {size} in order {n}"
    )))
}

/// Smallest `k` with `(1 − d)^k ≤ 1 − α`, computed exactly.
pub fn translate_budget(density: Rational, alpha: Rational) -> Result<usize> {
    if density <= Rational::zero() || density > Rational::one() {
        return Err(Error::Precondition("density must lie in (0, 1]".into()));
    }
    let to_big = |r: Rational| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
    let q = BigRational::one() - to_big(density);
    let target = BigRational::one() - to_big(alpha);
    let mut acc = BigRational::one();
    let mut k = 0;
    while acc > target {
        acc *= &q;
        k += 1;
        if k > 1_000_000 {
            return Err(Error::Internal("translate budget did not terminate".into()));
        }
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrownSet {
    pub set: AlmostInvSet,
    /// The right translators `g` used, in order.
    pub translators: Vec<u32>,
    pub budget: usize,
}

/// Greedily unions right translates `Dg` (most new points first, ties to
/// the smallest `g`) until the density reaches `α`.
pub fn grow_to_window(
    g: &FinGroup,
    d: &[u32],
    gens: &[u32],
    alpha: Rational,
    beta: Rational,
) -> Result<GrownSet> {
    let n = g.order();
    let dmask = checked_mask(n, d)?;
    let dsize = dmask.count_ones(..);
    if !(Rational::zero() < alpha && alpha < beta && beta <= Rational::new(1, 2)) {
        return Err(Error::Precondition(format!(
            "need 0 < alpha < beta <= 1/2, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if dsize == 0 {
        return Err(Error::Precondition("D must be nonempty".into()));
    }
    let density = Rational::new(dsize as i64, n as i64);
    let cap = (beta - alpha).min(alpha);
    if density > cap {
        return Err(Error::Precondition(format!(
            "|D|/|G| = {density} exceeds min(beta - alpha, alpha) = {cap}"
        )));
    }
    let budget = translate_budget(density, alpha)?;
    let dlist: Vec<u32> = dmask.ones().map(|x| x as u32).collect();
    let mut covered = FixedBitSet::with_capacity(n);
    let mut count = 0usize;
    let mut translators = vec![];
    while Rational::new(count as i64, n as i64) < alpha {
        let mut best = (0usize, 0u32);
        for h in 0..n as u32 {
            let fresh = dlist
                .iter()
                .filter(|&&x| !covered.contains(g.mul(x, h) as usize))
                .count();
            if fresh > best.0 {
                best = (fresh, h);
            }
        }
        if best.0 == 0 {
            return Err(Error::Internal("greedy cover stalled".into()));
        }
        for &x in &dlist {
            let y = g.mul(x, best.1) as usize;
            if !covered.put(y) {
                count += 1;
            }
        }
        translators.push(best.1);
        if translators.len() > budget {
            return Err(Error::Internal(format!(
                "greedy cover used more than {budget} translates"
            )));
        }
    }
    let members: Vec<u32> = covered.ones().map(|x| x as u32).collect();
    let set = AlmostInvSet::new(g, members, gens)?;
    if set.density >= beta {
        return Err(Error::Internal(format!(
            "grown density {} reached beta {beta}",
            set.density
        )));
    }
    Ok(GrownSet {
        set,
        translators,
        budget,
    })
}

/// For an abelian group with independent generators `s_1..s_k`
/// (`∏ ord(s_i) = |G|`), the first `c` elements in mixed-radix order of
/// `s_1^{a_1} .. s_k^{a_k}` (last exponent fastest), `c = ⌈α|G|⌉`, provided
/// `c ≤ β|G|`.
pub fn window_set_cyclic(
    g: &FinGroup,
    s: &[u32],
    alpha: Rational,
    beta: Rational,
) -> Result<AlmostInvSet> {
    if !g.is_abelian() {
        return Err(Error::NotAbelian);
    }
    if !(Rational::zero() < alpha && alpha <= beta && beta <= Rational::one()) {
        return Err(Error::Precondition(format!(
            "need 0 < alpha <= beta <= 1, got {alpha}, {beta}"
        )));
    }
    let n = g.order();
    let radices: Vec<usize> = s.iter().map(|&x| g.element_order(x)).collect();
    if radices.iter().product::<usize>() != n || !g.generates(s) {
        return Err(Error::Precondition(
            "generators must form an independent basis of the group".into(),
        ));
    }
    let scaled = alpha * Rational::from_integer(n as i64);
    let c = scaled.ceil().to_integer().max(1) as usize;
    if Rational::from_integer(c as i64) > beta * Rational::from_integer(n as i64) {
        return Err(Error::WindowEmpty {
            order: n,
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    let mut members = Vec::with_capacity(c);
    let mut digits = vec![0usize; s.len()];
    for _ in 0..c {
        let elem = s
            .iter()
            .zip(&digits)
            .fold(0u32, |acc, (&x, &a)| g.mul(acc, g.pow(x, a as u64)));
        members.push(elem);
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    AlmostInvSet::new(g, members, s)
}
