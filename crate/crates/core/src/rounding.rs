//! Rounding almost-equivariant maps and almost-actions to exact ones.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::foelner::{checked_mask, round_to_invariant};
use crate::group::{subgroup_class_key, FinGroup, GroupCaps, GroupHom, PermAction};
use crate::perm::{hamming, hamming_count};
use crate::spectral::{kazhdan_auto, SpectralOptions};
use crate::{Error, PartialInjection, Perm, Rational, Result};

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `count ≤ c · ε · n` with a relative slack for floating point `c`.
fn within(count: usize, c: f64, eps: Rational, n: usize) -> bool {
    let rhs = c * to_f64(eps) * n as f64;
    count as f64 <= rhs * (1.0 + 1e-12) + 1e-9
}

/// `max_{s ∈ S} d_H(α(s) ∘ φ, φ ∘ α(s))` for the left regular action.
pub fn left_commutation_defect(g: &FinGroup, s: &[u32], phi: &Perm) -> Result<Rational> {
    if phi.len() != g.order() {
        return Err(Error::SizeMismatch {
            left: g.order(),
            right: phi.len(),
        });
    }
    let n = g.order();
    let worst = s
        .iter()
        .map(|&t| {
            (0..n as u32)
                .filter(|&x| phi.apply(g.mul(t, x) as usize) as u32 != g.mul(t, phi.apply(x as usize) as u32))
                .count()
        })
        .max()
        .unwrap_or(0);
    Ok(ratio(worst, n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestTranslation {
    pub h: u32,
    /// `d_H(φ, β(h))`.
    pub distance: Rational,
    /// `max_{s∈S} d_H(α(s)∘φ, φ∘α(s))`.
    pub defect: Rational,
    /// `κ² · distance ≤ 4 · defect` with the supplied lower bound for `κ`.
    pub bound_holds: bool,
}

/// Picks `x*` minimizing `c(x) = |{g : φ(gx) ≠ g φ(x)}|` (smallest index on
/// ties) and returns `h = φ(x*)⁻¹ x*`, for which `d_H(φ, β(h)) = c(x*)/|G|`.
pub fn nearest_right_translation(
    g: &FinGroup,
    s: &[u32],
    phi: &Perm,
    kappa_lower: f64,
) -> Result<NearestTranslation> {
    let defect = left_commutation_defect(g, s, phi)?;
    let n = g.order() as u32;
    let cost = |x: u32| {
        let fx = phi.apply(x as usize) as u32;
        (0..n)
            .filter(|&a| phi.apply(g.mul(a, x) as usize) as u32 != g.mul(a, fx))
            .count()
    };
    let (xstar, cmin) = (0..n)
        .map(|x| (x, cost(x)))
        .min_by_key(|&(x, c)| (c, x))
        .expect("nonempty group");
    let h = g.mul(g.inv(phi.apply(xstar as usize) as u32), xstar);
    let distance = ratio(cmin, n as usize);
    debug_assert_eq!(
        distance,
        hamming(phi, &g.right_translation(h)).expect("same size")
    );
    let bound_holds = kappa_lower * kappa_lower * to_f64(distance) <= 4.0 * to_f64(defect) + 1e-12;
    Ok(NearestTranslation {
        h,
        distance,
        defect,
        bound_holds,
    })
}

/// Coefficients `V_{x1,x2} = |{k : α₁(k)x₁ = α₂(k)x₂}| / |K|`, stored as
/// integer counts over the pairs actually hit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchMatrix {
    pub n: usize,
    pub group_order: usize,
    pub counts: BTreeMap<(u32, u32), u32>,
}

impl MatchMatrix {
    pub fn build(a1: &PermAction, a2: &PermAction) -> Result<Self> {
        if a1.degree != a2.degree {
            return Err(Error::SizeMismatch {
                left: a1.degree,
                right: a2.degree,
            });
        }
        if a1.images.len() != a2.images.len() {
            return Err(Error::SizeMismatch {
                left: a1.images.len(),
                right: a2.images.len(),
            });
        }
        let n = a1.degree;
        let partial = a1
            .images
            .par_iter()
            .zip(&a2.images)
            .fold(HashMap::new, |mut acc: HashMap<(u32, u32), u32>, (p1, p2)| {
                let p2i = p2.inverse();
                for x in 0..n {
                    let y = p2i.apply(p1.apply(x));
                    *acc.entry((x as u32, y as u32)).or_insert(0) += 1;
                }
                acc
            })
            .collect::<Vec<_>>();
        let mut counts = BTreeMap::new();
        for part in partial {
            for (k, v) in part {
                *counts.entry(k).or_insert(0) += v;
            }
        }
        Ok(MatchMatrix {
            n,
            group_order: a1.images.len(),
            counts,
        })
    }

    pub fn weight(&self, x1: u32, x2: u32) -> Rational {
        ratio(
            self.counts.get(&(x1, x2)).copied().unwrap_or(0) as usize,
            self.group_order,
        )
    }

    pub fn row_sums(&self) -> Vec<u32> {
        let mut v = vec![0; self.n];
        self.counts.iter().for_each(|(&(a, _), &c)| v[a as usize] += c);
        v
    }

    pub fn col_sums(&self) -> Vec<u32> {
        let mut v = vec![0; self.n];
        self.counts.iter().for_each(|(&(_, b), &c)| v[b as usize] += c);
        v
    }

    /// Entries above one half, as a row map and a column map.
    pub fn heavy(&self) -> (Vec<Option<u32>>, Vec<Option<u32>>) {
        let mut row = vec![None; self.n];
        let mut col = vec![None; self.n];
        for (&(a, b), &c) in &self.counts {
            if 2 * c as usize > self.group_order {
                row[a as usize] = Some(b);
                col[b as usize] = Some(a);
            }
        }
        (row, col)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyResult {
    pub x1: Vec<u32>,
    pub x2: Vec<u32>,
    /// `φ : X₁ → X₂`, undefined off `X₁`.
    pub phi: PartialInjection,
    /// `max_k d_H(α₁(k), α₂(k))`.
    pub epsilon: Rational,
    pub loss1: usize,
    pub loss2: usize,
    pub moved: usize,
    pub equivariant: bool,
    pub x1_invariant: bool,
    pub x2_invariant: bool,
    pub bounds_hold: bool,
    /// Whether `α₁` is transitive; if so and `16ε < 1`, `X₁` must be all of `X`.
    pub transitive: bool,
    pub transitive_clause_holds: bool,
}

/// Thresholds the match matrix at 1/2: `A` = rows with a heavy entry, `B` =
/// columns with one, `X₁ = A ∩ φ⁻¹(B)`, `X₂ = φ(X₁)`.
pub fn extract_conjugacy(a1: &PermAction, a2: &PermAction) -> Result<ConjugacyResult> {
    let n = a1.degree;
    let v = MatchMatrix::build(a1, a2)?;
    let (row, col) = v.heavy();
    let mut entries = vec![None; n];
    let mut x1 = vec![];
    for x in 0..n {
        if let Some(y) = row[x] {
            if col[y as usize].is_some() {
                entries[x] = Some(y);
                x1.push(x as u32);
            }
        }
    }
    let phi = PartialInjection::new(entries)?;
    let mut x2: Vec<u32> = x1.iter().map(|&x| phi.get(x as usize).unwrap() as u32).collect();
    x2.sort_unstable();

    let epsilon = a1
        .images
        .iter()
        .zip(&a2.images)
        .map(|(p, q)| hamming_count(p, q).expect("same degree"))
        .max()
        .map_or(Rational::from_integer(0), |c| ratio(c, n));
    let m1 = checked_mask(n, &x1)?;
    let m2 = checked_mask(n, &x2)?;
    let gens = a1.group.generators();
    let x1_invariant = gens
        .iter()
        .all(|&s| x1.iter().all(|&x| m1.contains(a1.act(s, x as usize))));
    let x2_invariant = gens
        .iter()
        .all(|&s| x2.iter().all(|&x| m2.contains(a2.act(s, x as usize))));
    let equivariant = x1_invariant
        && gens.iter().all(|&s| {
            x1.iter().all(|&x| {
                phi.get(a1.act(s, x as usize)) == Some(a2.act(s, phi.get(x as usize).unwrap()))
            })
        });
    let loss1 = n - x1.len();
    let loss2 = n - x2.len();
    let moved = x1
        .iter()
        .filter(|&&x| phi.get(x as usize) != Some(x as usize))
        .count();
    let bound = Rational::from_integer(16) * epsilon * Rational::from_integer(n as i64);
    let le = |c: usize| Rational::from_integer(c as i64) <= bound;
    let bounds_hold = le(loss1) && le(loss2) && le(moved) && equivariant && x2_invariant;
    let a1_gens: Vec<Perm> = gens.iter().map(|&s| a1.image(s).clone()).collect();
    let transitive = crate::group::orbits(n, &a1_gens).len() == 1;
    let transitive_clause_holds =
        !(transitive && epsilon < Rational::new(1, 16)) || loss1 == 0;
    Ok(ConjugacyResult {
        x1,
        x2,
        phi,
        epsilon,
        loss1,
        loss2,
        moved,
        equivariant,
        x1_invariant,
        x2_invariant,
        bounds_hold,
        transitive,
        transitive_clause_holds,
    })
}

/// Orbits of `action` inside an invariant subset, with the stabilizer class
/// of each orbit's smallest point.
fn orbits_in(action: &PermAction, subset: &FixedBitSet) -> Result<Vec<(Vec<u32>, usize, Vec<u32>)>> {
    let g = &action.group;
    let gens = g.generators();
    let mut seen = FixedBitSet::with_capacity(action.degree);
    let mut out = vec![];
    for start in subset.ones() {
        if seen.contains(start) {
            continue;
        }
        seen.insert(start);
        let mut orbit = vec![start];
        let mut head = 0;
        while head < orbit.len() {
            let x = orbit[head];
            for &s in gens {
                let y = action.act(s, x);
                if !subset.contains(y) {
                    return Err(Error::Internal("subset is not invariant".into()));
                }
                if !seen.put(y) {
                    orbit.push(y);
                }
            }
            head += 1;
        }
        let stab: Vec<u32> = (0..g.order() as u32)
            .filter(|&h| action.act(h, start) == start)
            .collect();
        let key = subgroup_class_key(g, &stab)?;
        out.push((key.0, start, stab));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutingExtension {
    pub psi: Perm,
    /// `d_H(φ, ψ)`.
    pub distance: Rational,
    /// `max_{g∈G} d_H(α(g)∘φ, φ∘α(g))`.
    pub epsilon: Rational,
    pub commutes: bool,
    /// `distance ≤ 32 ε`.
    pub bound_holds: bool,
    pub x1_size: usize,
    pub sigma_moved: usize,
}

/// A permutation commuting with `α(G)` close to `φ`: keeps `φ ∘ σ` on the
/// set where the conjugacy extraction succeeds and matches the remaining
/// orbits by stabilizer type.
pub fn commuting_extension(action: &PermAction, phi: &Perm) -> Result<CommutingExtension> {
    let n = action.degree;
    if phi.len() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: phi.len(),
        });
    }
    let g = Arc::clone(&action.group);
    let phi_inv = phi.inverse();
    let conj_images: Vec<Perm> = action
        .images
        .iter()
        .map(|a| phi_inv.compose_unchecked(a).compose_unchecked(phi))
        .collect();
    let conj = PermAction {
        group: Arc::clone(&g),
        degree: n,
        images: conj_images,
    };
    let epsilon = action
        .images
        .iter()
        .map(|a| {
            hamming_count(&a.compose_unchecked(phi), &phi.compose_unchecked(a)).expect("same size")
        })
        .max()
        .map_or(Rational::from_integer(0), |c| ratio(c, n));

    let ext = extract_conjugacy(action, &conj)?;
    // τ = φ ∘ σ : X₁ → X₃ = φ(X₂)
    let mut psi: Vec<Option<u32>> = vec![None; n];
    let mut x3 = FixedBitSet::with_capacity(n);
    for &x in &ext.x1 {
        let y = phi.apply(ext.phi.get(x as usize).expect("defined on X1"));
        psi[x as usize] = Some(y as u32);
        x3.insert(y);
    }
    let mut rest1 = FixedBitSet::with_capacity(n);
    rest1.insert_range(..);
    ext.x1.iter().for_each(|&x| rest1.set(x as usize, false));
    let mut rest3 = FixedBitSet::with_capacity(n);
    rest3.insert_range(..);
    rest3.difference_with(&x3);

    let mut left = orbits_in(action, &rest1)?;
    let mut right = orbits_in(action, &rest3)?;
    left.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    right.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    if left.len() != right.len() || left.iter().zip(&right).any(|(a, b)| a.0 != b.0) {
        return Err(Error::Internal(
            "orbit censuses of the complements differ".into(),
        ));
    }
    for ((_, o, stab_o), (_, o2, stab_o2)) in left.iter().zip(&right) {
        // find c with c Stab(o2) c⁻¹ = Stab(o); then α(c)o2 has stabilizer Stab(o)
        let target: Vec<u32> = {
            let mut v = stab_o.clone();
            v.sort_unstable();
            v
        };
        let c = (0..g.order() as u32)
            .find(|&c| {
                let ci = g.inv(c);
                let mut conj: Vec<u32> = stab_o2.iter().map(|&h| g.mul(g.mul(c, h), ci)).collect();
                conj.sort_unstable();
                conj == target
            })
            .ok_or_else(|| Error::Internal("no conjugator between stabilizers".into()))?;
        let anchor = action.act(c, *o2);
        // transport along generators from (o, anchor)
        psi[*o] = Some(anchor as u32);
        let mut queue = VecDeque::from([*o]);
        while let Some(x) = queue.pop_front() {
            let y = psi[x].expect("assigned") as usize;
            for &s in g.generators() {
                let (x2, y2) = (action.act(s, x), action.act(s, y));
                match psi[x2] {
                    None => {
                        psi[x2] = Some(y2 as u32);
                        queue.push_back(x2);
                    }
                    Some(prev) if prev as usize != y2 => {
                        return Err(Error::Internal("orbit transport is inconsistent".into()))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let psi = Perm::from_images(
        psi.into_iter()
            .map(|v| v.ok_or_else(|| Error::Internal("ψ left a point unassigned".into())))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let commutes = g.generators().iter().all(|&s| {
        let a = action.image(s);
        a.compose_unchecked(&psi) == psi.compose_unchecked(a)
    });
    let distance = hamming(phi, &psi)?;
    let bound_holds = distance <= Rational::from_integer(32) * epsilon;
    Ok(CommutingExtension {
        psi,
        distance,
        epsilon,
        commutes,
        bound_holds,
        x1_size: ext.x1.len(),
        sigma_moved: ext.moved,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostOptions {
    pub closure_cap: usize,
    pub spectral: SpectralOptions,
    /// Use this lower bound for `κ` instead of computing one.
    pub kappa_lower: Option<f64>,
}

impl Default for AlmostOptions {
    fn default() -> Self {
        AlmostOptions {
            closure_cap: 100_000,
            spectral: SpectralOptions::default(),
            kappa_lower: None,
        }
    }
}

/// Measured quantities and the three end-to-end checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostBounds {
    pub x_minus_x1: usize,
    pub x_minus_x2: usize,
    /// `4162 ε |X| / κ⁴`.
    pub bound1: f64,
    pub bound1_holds: bool,
    pub moved: usize,
    /// `2048 ε |X| / κ⁴`.
    pub bound2: f64,
    pub bound2_holds: bool,
    pub equivariant: bool,
    pub x1_invariant: bool,
    pub x2_invariant: bool,
    /// `max_{k∈K₀} |X △ kX|` against `8ε|X|/κ²`.
    pub max_invariance_defect: usize,
    pub invariance_bound: f64,
    /// `max_{k∈K₀} |{x ∈ X : kx ≠ β(δ(k))x}|` against `64ε|X|/κ⁴`.
    pub max_uniform_defect: usize,
    pub uniform_bound: f64,
    /// `|X₀ △ X|` against `16ε|X|/κ²`.
    pub x0_sym_diff: usize,
    pub x0_bound: f64,
    /// `max_k |{z : α₁(k)z ≠ α₂(k)z}|` against `128ε|X|/κ⁴`.
    pub max_action_gap: usize,
    pub action_gap_bound: f64,
}

impl AlmostBounds {
    pub fn all_hold(&self) -> bool {
        self.bound1_holds && self.bound2_holds && self.equivariant && self.x1_invariant && self.x2_invariant
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlmostResult {
    pub epsilon: Rational,
    pub kappa_lower: f64,
    pub threshold: f64,
    pub k_order: usize,
    /// Elements of `K₀` as indices into the enumerated `K`.
    pub k0: Vec<u32>,
    /// `δ(k)` for each entry of `k0`.
    pub delta: Vec<u32>,
    pub delta_is_hom: bool,
    pub x0: Vec<u32>,
    pub x1: Vec<u32>,
    pub x2: Vec<u32>,
    /// `φ : X₁ → X₂` on `Y`.
    pub phi: PartialInjection,
    pub bounds: AlmostBounds,
}

/// `ε = max_{s∈S, k∈K} |{x ∈ X ∩ k⁻¹X : α(s)kx ≠ kα(s)x}| / |X|`.
pub fn almost_epsilon(g: &FinGroup, s: &[u32], k_elems: &[Perm]) -> Rational {
    let n = g.order();
    let worst = k_elems
        .par_iter()
        .map(|k| {
            s.iter()
                .map(|&t| {
                    (0..n)
                        .filter(|&x| {
                            let kx = k.apply(x);
                            kx < n && {
                                let lhs = g.mul(t, kx as u32) as usize;
                                let rhs = k.apply(g.mul(t, x as u32) as usize);
                                lhs != rhs
                            }
                        })
                        .count()
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    ratio(worst, n)
}

/// Completes `k` restricted to `X ∩ k⁻¹X` to a permutation of `X`, pairing
/// leftover domain and range points in increasing order.
fn complete_on_x(k: &Perm, n: usize) -> Perm {
    let mut img = vec![u32::MAX; n];
    let mut hit = vec![false; n];
    for (x, slot) in img.iter_mut().enumerate() {
        let y = k.apply(x);
        if y < n {
            *slot = y as u32;
            hit[y] = true;
        }
    }
    let mut free = (0..n).filter(|&y| !hit[y]);
    for slot in img.iter_mut().filter(|v| **v == u32::MAX) {
        *slot = free.next().expect("counts match") as u32;
    }
    Perm::from_images_unchecked(img)
}

/// Given a finite group `G` sitting as `X = {0..|G|-1}` inside `Y` and a
/// permutation group `K` of `Y` whose elements almost commute with left
/// multiplication, finds `K₀`, `δ : K₀ → G`, `X₁`, `X₂`, and `φ` with
/// `φ ∘ k = β(δ(k)) ∘ φ` on `X₁`.
pub fn theorem_almost_pipeline(
    g: Arc<FinGroup>,
    s: &[u32],
    y_size: usize,
    k_gens: &[Perm],
    opts: &AlmostOptions,
) -> Result<AlmostResult> {
    let n = g.order();
    if y_size < n {
        return Err(Error::InvalidInput(format!(
            "Y has {y_size} points, fewer than |G| = {n}"
        )));
    }
    let kappa = match opts.kappa_lower {
        Some(k) => k,
        None => kazhdan_auto(&g, s, &opts.spectral)?.lower,
    };
    let caps = GroupCaps {
        max_order: opts.closure_cap,
        ..GroupCaps::default()
    };
    let gens: Vec<Perm> = if k_gens.is_empty() {
        vec![Perm::identity(y_size)]
    } else {
        k_gens.to_vec()
    };
    let k_group = Arc::new(FinGroup::from_perm_generators_with(&gens, &caps)?);
    let k_elems = k_group.perm_elements().expect("permutation group").to_vec();
    let epsilon = almost_epsilon(&g, s, &k_elems);
    let k4 = kappa.powi(4);
    let threshold = k4 / 200.0;
    if to_f64(epsilon) >= threshold {
        return Err(Error::OutOfRegime {
            epsilon: to_f64(epsilon),
            threshold,
        });
    }

    // K₀ = {k : |X ∩ kX| ≥ |X|/2}
    let k0: Vec<u32> = (0..k_elems.len() as u32)
        .filter(|&i| 2 * (0..n).filter(|&x| k_elems[i as usize].apply(x) < n).count() >= n)
        .collect();
    if !crate::group::is_subgroup(&k_group, &k0) {
        return Err(Error::Internal("K0 is not a subgroup".into()));
    }
    let max_invariance_defect = k0
        .iter()
        .map(|&i| 2 * (0..n).filter(|&x| k_elems[i as usize].apply(x) >= n).count())
        .max()
        .unwrap_or(0);

    let delta: Vec<u32> = k0
        .par_iter()
        .map(|&i| {
            let kt = complete_on_x(&k_elems[i as usize], n);
            nearest_right_translation(&g, s, &kt, kappa).map(|r| r.h)
        })
        .collect::<Result<_>>()?;
    let max_uniform_defect = k0
        .iter()
        .zip(&delta)
        .map(|(&i, &d)| {
            let di = g.inv(d);
            (0..n)
                .filter(|&x| k_elems[i as usize].apply(x) != g.mul(x as u32, di) as usize)
                .count()
        })
        .max()
        .unwrap_or(0);

    // δ as a homomorphism out of K₀
    let (k0_group, _) = FinGroup::subgroup_from_elements(&k_group, k0.clone(), &k0[1..], &caps)?;
    let k0_group = Arc::new(k0_group);
    let gen_images: Vec<u32> = k0_group.generators().iter().map(|&s| delta[s as usize]).collect();
    let delta_is_hom = GroupHom::from_generator_images(Arc::clone(&k0_group), Arc::clone(&g), &gen_images)
        .is_ok_and(|h| h.image == delta);
    if !delta_is_hom {
        return Err(Error::Internal("delta is not a homomorphism".into()));
    }

    let x_list: Vec<u32> = (0..n as u32).collect();
    let k0_perms: Vec<Perm> = k0[1..].iter().map(|&i| k_elems[i as usize].clone()).collect();
    let rounding = round_to_invariant(y_size, &x_list, &k0_perms, opts.closure_cap)?;
    let x0 = rounding.set;
    let x0_mask = checked_mask(y_size, &x0)?;

    // Z = X₀ ∪ X, reindexed in increasing order
    let mut z_mask = x0_mask.clone();
    z_mask.insert_range(..n);
    let z: Vec<usize> = z_mask.ones().collect();
    let mut z_index = vec![u32::MAX; y_size];
    z.iter().enumerate().for_each(|(i, &y)| z_index[y] = i as u32);
    let build = |f: &dyn Fn(usize) -> usize| -> Perm {
        Perm::from_images_unchecked(z.iter().map(|&y| z_index[f(y)]).collect())
    };
    let a1_images: Vec<Perm> = k0
        .iter()
        .map(|&i| {
            let k = &k_elems[i as usize];
            build(&|y| if x0_mask.contains(y) { k.apply(y) } else { y })
        })
        .collect();
    let a2_images: Vec<Perm> = delta
        .iter()
        .map(|&d| {
            let di = g.inv(d);
            build(&|y| if y < n { g.mul(y as u32, di) as usize } else { y })
        })
        .collect();
    let a1 = PermAction::from_images(Arc::clone(&k0_group), a1_images)?;
    let a2 = PermAction::from_images(Arc::clone(&k0_group), a2_images)?;
    let max_action_gap = a1
        .images
        .iter()
        .zip(&a2.images)
        .map(|(p, q)| hamming_count(p, q).expect("same size"))
        .max()
        .unwrap_or(0);
    let conj = extract_conjugacy(&a1, &a2)?;

    // X₁ = (Z₁ ∩ X₀) ∩ φ⁻¹(Z₂ ∩ X), X₂ = φ(X₁), back in Y coordinates
    let mut entries: Vec<Option<u32>> = vec![None; y_size];
    let mut x1 = vec![];
    let mut x2 = vec![];
    for &zi in &conj.x1 {
        let y = z[zi as usize];
        let target = z[conj.phi.get(zi as usize).expect("defined")];
        if x0_mask.contains(y) && target < n {
            entries[y] = Some(target as u32);
            x1.push(y as u32);
            x2.push(target as u32);
        }
    }
    x2.sort_unstable();
    let phi = PartialInjection::new(entries)?;

    let x1_mask = checked_mask(y_size, &x1)?;
    let x2_mask = checked_mask(y_size, &x2)?;
    let x_minus_x1 = (0..n).filter(|&x| !x1_mask.contains(x)).count();
    let x_minus_x2 = (0..n).filter(|&x| !x2_mask.contains(x)).count();
    let moved = x1
        .iter()
        .filter(|&&x| phi.get(x as usize) != Some(x as usize))
        .count();
    let x1_invariant = k0_perms
        .iter()
        .all(|k| x1.iter().all(|&x| x1_mask.contains(k.apply(x as usize))));
    let x2_invariant = delta.iter().all(|&d| {
        let di = g.inv(d);
        x2.iter().all(|&x| x2_mask.contains(g.mul(x, di) as usize))
    });
    let equivariant = x1_invariant
        && k0.iter().zip(&delta).all(|(&i, &d)| {
            let k = &k_elems[i as usize];
            let di = g.inv(d);
            x1.iter().all(|&x| {
                let lhs = phi.get(k.apply(x as usize));
                let rhs = g.mul(phi.get(x as usize).unwrap() as u32, di) as usize;
                lhs == Some(rhs)
            })
        });
    let c1 = 4162.0 / k4;
    let c2 = 2048.0 / k4;
    let bound1_holds = if epsilon == Rational::from_integer(0) {
        x_minus_x1 == 0 && x_minus_x2 == 0
    } else {
        let rhs = c1 * to_f64(epsilon) * n as f64;
        (x_minus_x1 as f64) < rhs && (x_minus_x2 as f64) < rhs
    };
    let bounds = AlmostBounds {
        x_minus_x1,
        x_minus_x2,
        bound1: c1 * to_f64(epsilon) * n as f64,
        bound1_holds,
        moved,
        bound2: c2 * to_f64(epsilon) * n as f64,
        bound2_holds: within(moved, c2, epsilon, n),
        equivariant,
        x1_invariant,
        x2_invariant,
        max_invariance_defect,
        invariance_bound: 8.0 / (kappa * kappa) * to_f64(epsilon) * n as f64,
        max_uniform_defect,
        uniform_bound: 64.0 / k4 * to_f64(epsilon) * n as f64,
        x0_sym_diff: rounding.sym_diff,
        x0_bound: 16.0 / (kappa * kappa) * to_f64(epsilon) * n as f64,
        max_action_gap,
        action_gap_bound: 128.0 / k4 * to_f64(epsilon) * n as f64,
    };
    Ok(AlmostResult {
        epsilon,
        kappa_lower: kappa,
        threshold,
        k_order: k_elems.len(),
        k0,
        delta,
        delta_is_hom,
        x0,
        x1,
        x2,
        phi,
        bounds,
    })
}
