//! Seeded random instances for the rounding procedures.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::group::{GroupSpec, PermAction};
use crate::{FinGroup, GroupCaps, Perm, Result};

/// Groups of order 6 to 120 used by the randomized suites.
pub const ROUNDING_GROUPS: &[&str] = &[
    "sym(3)",
    "cyclic(6)",
    "cyclic(8)",
    "cyclic(2) x sym(3)",
    "cyclic(12)",
    "cyclic(2) x cyclic(6)",
    "cyclic(17)",
    "sl2(3)",
    "sym(4)",
    "cyclic(30)",
    "sl2(4)",
    "cyclic(3) x sl2(3)",
    "cyclic(60)",
    "cyclic(97)",
    "sl2(5)",
    "sym(5)",
    "cyclic(120)",
];

pub fn random_group<R: Rng>(rng: &mut R, max_order: usize) -> Result<Arc<FinGroup>> {
    let caps = GroupCaps::default();
    loop {
        let spec: GroupSpec = ROUNDING_GROUPS.choose(rng).expect("nonempty").parse()?;
        let g = spec.build(&caps)?;
        if g.order() <= max_order {
            return Ok(Arc::new(g));
        }
    }
}

/// A product of `m` random transpositions of `{0..n-1}`.
pub fn random_transpositions<R: Rng>(rng: &mut R, n: usize, m: usize) -> Perm {
    let mut img: Vec<u32> = (0..n as u32).collect();
    for _ in 0..m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        img.swap(a, b);
    }
    Perm::from_images(img).expect("swaps keep a bijection")
}

/// A product of `m` transpositions each swapping a point of `X = {0..n-1}`
/// with a point of `Y ∖ X` when one exists.
pub fn crossing_transpositions<R: Rng>(rng: &mut R, n: usize, y: usize, m: usize) -> Perm {
    let mut img: Vec<u32> = (0..y as u32).collect();
    for _ in 0..m {
        let a = rng.gen_range(0..n);
        let b = if y > n { rng.gen_range(n..y) } else { rng.gen_range(0..y) };
        img.swap(a, b);
    }
    Perm::from_images(img).expect("swaps keep a bijection")
}

pub struct CommutantInstance {
    pub group: Arc<FinGroup>,
    pub s: Vec<u32>,
    pub phi: Perm,
    /// The right translation `φ` was perturbed from, if any.
    pub planted: Option<u32>,
}

/// `φ` is a right translation perturbed by a few transpositions, or a left
/// translation.
pub fn commutant_instance<R: Rng>(rng: &mut R) -> Result<CommutantInstance> {
    let group = random_group(rng, 120)?;
    let n = group.order();
    let s = group.generators().to_vec();
    let h0 = rng.gen_range(0..n as u32);
    if rng.gen_bool(0.2) {
        return Ok(CommutantInstance {
            phi: group.left_translation(h0),
            group,
            s,
            planted: None,
        });
    }
    let m = rng.gen_range(0..=3);
    let phi = group
        .right_translation(h0)
        .compose(&random_transpositions(rng, n, m))?;
    Ok(CommutantInstance {
        group,
        s,
        phi,
        planted: Some(h0),
    })
}

pub struct ConjugacyInstance {
    pub alpha1: PermAction,
    pub alpha2: PermAction,
    pub tau: Perm,
}

/// `α₁` is a regular action plus a few fixed points; `α₂ = τ α₁ τ⁻¹` for a
/// product `τ` of a few transpositions.
pub fn conjugacy_instance<R: Rng>(rng: &mut R) -> Result<ConjugacyInstance> {
    let group = random_group(rng, 120)?;
    let regular = if rng.gen_bool(0.5) {
        PermAction::left_regular(Arc::clone(&group))
    } else {
        PermAction::right_regular(Arc::clone(&group))
    };
    let extra = rng.gen_range(0..=3);
    let alpha1 = if extra > 0 {
        regular.disjoint_union(&PermAction::trivial(Arc::clone(&group), extra))?
    } else {
        regular
    };
    let m = rng.gen_range(0..=4);
    let tau = random_transpositions(rng, alpha1.degree, m);
    let alpha2 = alpha1.conjugated(&tau)?;
    Ok(ConjugacyInstance {
        alpha1,
        alpha2,
        tau,
    })
}

pub struct Commutant2Instance {
    pub action: PermAction,
    pub phi: Perm,
}

/// `α` is one or two regular copies plus fixed points; `φ` is a map
/// commuting with `α` (a right translation on each copy, possibly swapping
/// the copies) perturbed by a few transpositions.
pub fn commutant2_instance<R: Rng>(rng: &mut R) -> Result<Commutant2Instance> {
    let group = random_group(rng, 60)?;
    let n = group.order();
    let left = PermAction::left_regular(Arc::clone(&group));
    let copies = rng.gen_range(1..=2);
    let fixed = rng.gen_range(0..=2);
    let mut action = left.clone();
    if copies == 2 {
        action = action.disjoint_union(&left)?;
    }
    if fixed > 0 {
        action = action.disjoint_union(&PermAction::trivial(Arc::clone(&group), fixed))?;
    }
    let degree = action.degree;
    let swap_copies = copies == 2 && rng.gen_bool(0.5);
    let mut img: Vec<u32> = (0..degree as u32).collect();
    for c in 0..copies {
        let h = rng.gen_range(0..n as u32);
        let target = if swap_copies { 1 - c } else { c };
        let rt = group.right_translation(h);
        for x in 0..n {
            img[c * n + x] = (target * n + rt.apply(x)) as u32;
        }
    }
    img[copies * n..].shuffle(rng);
    let commuting = Perm::from_images(img)?;
    let m = rng.gen_range(0..=3);
    let phi = commuting.compose(&random_transpositions(rng, degree, m))?;
    Ok(Commutant2Instance { action, phi })
}

pub struct AlmostInstance {
    pub group: Arc<FinGroup>,
    pub s: Vec<u32>,
    pub y_size: usize,
    pub k_gens: Vec<Perm>,
}

/// `β(h)` on `X = {0..n-1}` extended by `rest` on `Y ∖ X`.
fn extended_right_translation(group: &FinGroup, h: u32, rest: &[u32]) -> Result<Perm> {
    let n = group.order();
    let mut img: Vec<u32> = group.right_translation(h).images().to_vec();
    img.extend(rest.iter().map(|&r| r + n as u32));
    Perm::from_images(img)
}

/// Instances for the almost-action pipeline, with `S = G ∖ {e}` so the
/// certified Kazhdan constant is as large as the spectral bound allows:
///
/// * exact: `K` generated by `β(h)` extended by arbitrary permutations of
///   `Y ∖ X` (`ε = 0`);
/// * crossing: `K` generated by one or two disjoint transpositions each
///   swapping a point of `X` with a point of `Y ∖ X` (`ε = m/|X|`);
/// * conjugated: `K = τ β(H) τ⁻¹` for `τ` a product of crossing
///   transpositions, usually outside the regime at these orders.
pub fn almost_instance<R: Rng>(rng: &mut R) -> Result<AlmostInstance> {
    let group = random_group(rng, 120)?;
    let n = group.order();
    let s: Vec<u32> = (1..n as u32).collect();
    let kind = rng.gen_range(0..20);
    let extra = if kind < 8 { rng.gen_range(0..=3) } else { rng.gen_range(2..=3) };
    let y_size = n + extra;
    let h_gens: Vec<u32> = if rng.gen_bool(0.5) {
        group.generators().to_vec()
    } else {
        vec![rng.gen_range(0..n as u32)]
    };
    let k_gens = if kind < 8 {
        h_gens
            .iter()
            .map(|&h| {
                let mut rest: Vec<u32> = (0..extra as u32).collect();
                rest.shuffle(rng);
                extended_right_translation(&group, h, &rest)
            })
            .collect::<Result<Vec<_>>>()?
    } else if kind < 15 {
        let m = rng.gen_range(1..=2);
        let mut xs: Vec<usize> = (0..n).collect();
        xs.shuffle(rng);
        (0..m)
            .map(|i| Perm::transposition(y_size, xs[i], n + i))
            .collect::<Result<Vec<_>>>()?
    } else {
        let m = rng.gen_range(1..=2);
        let tau = crossing_transpositions(rng, n, y_size, m);
        let tau_inv = tau.inverse();
        let identity: Vec<u32> = (0..extra as u32).collect();
        h_gens
            .iter()
            .map(|&h| tau.compose(&extended_right_translation(&group, h, &identity)?)?.compose(&tau_inv))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(AlmostInstance {
        group,
        s,
        y_size,
        k_gens,
    })
}
