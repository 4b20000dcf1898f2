//! Permutations and partial injections of `{0, .., n-1}`, with the normalized
//! Hamming and Hilbert-Schmidt distances between them.

use serde::{Deserialize, Serialize};

use crate::{Error, Rational, Result};

/// A bijection of `{0, .., n-1}`, stored as its one-line image array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Perm {
    image: Vec<u32>,
}

impl TryFrom<Vec<u32>> for Perm {
    type Error = Error;

    fn try_from(image: Vec<u32>) -> Result<Self> {
        Perm::from_images(image)
    }
}

impl From<Perm> for Vec<u32> {
    fn from(p: Perm) -> Self {
        p.image
    }
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            image: (0..n as u32).collect(),
        }
    }

    /// Validates that `image` is a bijection.
    pub fn from_images(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for (i, &v) in image.iter().enumerate() {
            let v = v as usize;
            if v >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image[{i}] = {v} out of range for n = {n}"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
        }
        Ok(Perm { image })
    }

    /// Caller guarantees `image` is a bijection.
    pub(crate) fn from_images_unchecked(image: Vec<u32>) -> Self {
        debug_assert!(Perm::from_images(image.clone()).is_ok());
        Perm { image }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidPermutation(format!(
                "transposition ({a} {b}) out of range for n = {n}"
            )));
        }
        let mut p = Perm::identity(n);
        p.image.swap(a, b);
        Ok(p)
    }

    /// The cycle `c[0] -> c[1] -> .. -> c[last] -> c[0]`.
    pub fn cycle(n: usize, cycle: &[usize]) -> Result<Self> {
        let mut image: Vec<u32> = (0..n as u32).collect();
        for (i, &a) in cycle.iter().enumerate() {
            let b = cycle[(i + 1) % cycle.len()];
            if a >= n || b >= n {
                return Err(Error::InvalidPermutation(format!(
                    "cycle entry out of range for n = {n}"
                )));
            }
            image[a] = b as u32;
        }
        Perm::from_images(image)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// `self ∘ other`, i.e. `x -> self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        check_sizes(self.len(), other.len())?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Perm) -> Perm {
        Perm {
            image: other.image.iter().map(|&x| self.image[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Perm { image: inv }
    }

    /// `c ∘ self ∘ c⁻¹`.
    pub fn conjugate_by(&self, c: &Perm) -> Result<Perm> {
        check_sizes(self.len(), c.len())?;
        let mut image = vec![0u32; self.len()];
        for x in 0..self.len() {
            image[c.apply(x)] = c.image[self.apply(x)];
        }
        Ok(Perm { image })
    }

    pub fn pow(&self, mut e: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.len());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose_unchecked(&base);
            }
            base = base.compose_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Number of moved points.
    pub fn support_size(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i as u32 != v)
            .count()
    }

    pub fn to_partial(&self) -> PartialInjection {
        PartialInjection {
            entries: self.image.iter().map(|&v| Some(v)).collect(),
        }
    }
}

/// A partially defined injective map on `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Option<u32>>", into = "Vec<Option<u32>>")]
pub struct PartialInjection {
    entries: Vec<Option<u32>>,
}

impl TryFrom<Vec<Option<u32>>> for PartialInjection {
    type Error = Error;

    fn try_from(entries: Vec<Option<u32>>) -> Result<Self> {
        PartialInjection::new(entries)
    }
}

impl From<PartialInjection> for Vec<Option<u32>> {
    fn from(p: PartialInjection) -> Self {
        p.entries
    }
}

impl PartialInjection {
    /// Defined targets must be pairwise distinct; they are not required to lie
    /// below `entries.len()` since the codomain may be larger than the domain.
    pub fn new(entries: Vec<Option<u32>>) -> Result<Self> {
        let mut targets: Vec<u32> = entries.iter().flatten().copied().collect();
        targets.sort_unstable();
        if let Some(w) = targets.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartialInjection(format!(
                "target {} hit twice",
                w[0]
            )));
        }
        Ok(PartialInjection { entries })
    }

    pub fn empty(n: usize) -> Self {
        PartialInjection {
            entries: vec![None; n],
        }
    }

    /// Restriction of a permutation to the points of `domain`, undefined elsewhere.
    pub fn restrict(p: &Perm, domain: impl IntoIterator<Item = usize>) -> Self {
        let mut entries = vec![None; p.len()];
        for x in domain {
            entries[x] = Some(p.image[x]);
        }
        PartialInjection { entries }
    }

    pub fn domain_size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.entries[x].map(|v| v as usize)
    }

    pub fn entries(&self) -> &[Option<u32>] {
        &self.entries
    }

    pub fn defined_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|_| i))
    }
}

/// Anything with a finite domain `{0, .., n-1}` whose points map to an
/// optional target. Used so `hamming` accepts permutations and partial
/// injections interchangeably.
pub trait PointMap {
    fn domain_size(&self) -> usize;
    fn target(&self, x: usize) -> Option<usize>;
}

impl PointMap for Perm {
    fn domain_size(&self) -> usize {
        self.len()
    }

    fn target(&self, x: usize) -> Option<usize> {
        Some(self.apply(x))
    }
}

impl PointMap for PartialInjection {
    fn domain_size(&self) -> usize {
        self.entries.len()
    }

    fn target(&self, x: usize) -> Option<usize> {
        self.get(x)
    }
}

fn check_sizes(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::SizeMismatch { left, right });
    }
    Ok(())
}

/// Number of points where `a` and `b` disagree. Undefined matches undefined;
/// undefined against defined is a mismatch.
pub fn hamming_count<A, B>(a: &A, b: &B) -> Result<usize>
where
    A: PointMap + ?Sized,
    B: PointMap + ?Sized,
{
    check_sizes(a.domain_size(), b.domain_size())?;
    Ok((0..a.domain_size())
        .filter(|&x| a.target(x) != b.target(x))
        .count())
}

/// Normalized Hamming distance `|{x : a(x) != b(x)}| / n`.
pub fn hamming<A, B>(a: &A, b: &B) -> Result<Rational>
where
    A: PointMap + ?Sized,
    B: PointMap + ?Sized,
{
    let n = a.domain_size();
    if n == 0 {
        return Err(Error::InvalidInput("empty ground set".into()));
    }
    let c = hamming_count(a, b)?;
    Ok(Rational::new(c as i64, n as i64))
}

/// Normalized Hilbert-Schmidt distance between the permutation matrices,
/// `sqrt(2 d_H(a, b))`. No matrix is formed.
pub fn hs_distance(a: &Perm, b: &Perm) -> Result<f64> {
    let d = hamming(a, b)?;
    Ok((2.0 * rational_to_f64(d)).sqrt())
}

/// `d_H(a∘b, b∘a)`.
pub fn commutator_defect(a: &Perm, b: &Perm) -> Result<Rational> {
    check_sizes(a.len(), b.len())?;
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty ground set".into()));
    }
    let c = (0..n)
        .filter(|&x| a.apply(b.apply(x)) != b.apply(a.apply(x)))
        .count();
    Ok(Rational::new(c as i64, n as i64))
}

pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
