//! Almost-actions of `(Γ ∗ Z) × Λ` on finite quotients `X` of `Γ`: `Γ` acts
//! by left translation, `Λ` by right translation, and the free generator
//! `t` swaps a set `A` with `gA`.

mod lift;

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::foelner::{to_mask, window_set_cyclic, AlmostInvSet};
use crate::group::{left_coset_reps, FinGroup, GroupCaps, MarkedGroup, MarkedHom, MarkedMap, Word};
use crate::perm::{commutator_defect, hamming};
use crate::{Error, Perm, Rational, Result};

pub use lift::{induce_finite_index, induced_defect_by_cosets, product_lift, CosetStructure};

/// `Γ` acting on `X` by `x -> p(γ) x` and `Λ` by `x -> x q(λ)⁻¹`.
#[derive(Clone, Debug)]
pub struct BiTranslationAction {
    pub x: Arc<FinGroup>,
    pub p: MarkedHom,
    pub q: MarkedHom,
    pub gamma_perms: Vec<Perm>,
    pub lambda_perms: Vec<Perm>,
}

impl BiTranslationAction {
    pub fn new(p: MarkedHom, q: MarkedHom) -> Result<Self> {
        if !Arc::ptr_eq(&p.target, &q.target) {
            return Err(Error::InvalidInput(
                "p and q must map into the same group".into(),
            ));
        }
        p.require_surjective()?;
        let x = Arc::clone(&p.target);
        let gamma_perms: Vec<Perm> = p.images.iter().map(|&g| x.left_translation(g)).collect();
        let lambda_perms: Vec<Perm> = q.images.iter().map(|&h| x.right_translation(h)).collect();
        for a in &gamma_perms {
            for b in &lambda_perms {
                if a.compose_unchecked(b) != b.compose_unchecked(a) {
                    return Err(Error::Internal(
                        "left and right translations failed to commute".into(),
                    ));
                }
            }
        }
        Ok(BiTranslationAction {
            x,
            p,
            q,
            gamma_perms,
            lambda_perms,
        })
    }

    /// The subgroup `q(Λ)` as a sorted-by-discovery element list of `X`.
    pub fn lambda_image(&self) -> Vec<u32> {
        self.x.closure(&self.q.images)
    }
}

/// Presentation of `(Γ ∗ Z) × Λ` with generators ordered as
/// `Γ`-generators, `t`, `Λ`-generators.
pub fn tech2_presentation(gamma: &MarkedGroup, lambda: &MarkedGroup) -> MarkedGroup {
    let gz = MarkedGroup::free_product(gamma, &MarkedGroup::free(1, "t"));
    let mut g = MarkedGroup::direct_product(&gz, lambda);
    g.name = format!("(({}) * Z) x ({})", gamma.name, lambda.name);
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// The element `h ∈ q(Λ)` as an index of `X`.
    pub h: u32,
    pub direct: Rational,
    pub closed_form: Rational,
}

/// The almost-action built from a density-window set in `q(Λ)`.
#[derive(Clone, Debug)]
pub struct Tech2Family {
    pub base: BiTranslationAction,
    pub alpha: Rational,
    pub beta: Rational,
    /// Elements of `q(Λ)` in `X`.
    pub lambda_elements: Vec<u32>,
    /// The window set `C ⊂ q(Λ)`, as indices of the subgroup.
    pub window: AlmostInvSet,
    /// `C` as elements of `X`.
    pub c: Vec<u32>,
    pub z: Vec<u32>,
    pub b: Vec<u32>,
    pub g: u32,
    pub a: Vec<u32>,
    pub t_image: Perm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tech2Summary {
    pub order: usize,
    pub lambda_order: usize,
    pub c_size: usize,
    pub cosets: usize,
    pub b_size: usize,
    pub a_size: usize,
    pub b_density: Rational,
    pub a_density: Rational,
    pub g: u32,
    pub g_label: String,
    pub g_is_involution: bool,
}

impl Tech2Family {
    pub fn order(&self) -> usize {
        self.base.x.order()
    }

    pub fn b_density(&self) -> Rational {
        Rational::new(self.b.len() as i64, self.order() as i64)
    }

    pub fn a_density(&self) -> Rational {
        Rational::new(self.a.len() as i64, self.order() as i64)
    }

    pub fn summary(&self) -> Tech2Summary {
        let x = &self.base.x;
        Tech2Summary {
            order: x.order(),
            lambda_order: self.lambda_elements.len(),
            c_size: self.c.len(),
            cosets: self.z.len(),
            b_size: self.b.len(),
            a_size: self.a.len(),
            b_density: self.b_density(),
            a_density: self.a_density(),
            g: self.g,
            g_label: x.label(self.g),
            g_is_involution: x.mul(self.g, self.g) == 0,
        }
    }

    /// The marked map of `(Γ ∗ Z) × Λ`: `Γ` by left translations, `t` by
    /// `t_image`, `Λ` by right translations.
    pub fn marked_map(&self) -> Result<MarkedMap> {
        let marked = tech2_presentation(&self.base.p.marked, &self.base.q.marked);
        self.on_marked(marked)
    }

    /// Realizes the family on a caller-supplied presentation whose
    /// generators are ordered `Γ`, `t`, `Λ`.
    pub fn on_marked(&self, marked: MarkedGroup) -> Result<MarkedMap> {
        let images: Vec<Perm> = self
            .base
            .gamma_perms
            .iter()
            .cloned()
            .chain(std::iter::once(self.t_image.clone()))
            .chain(self.base.lambda_perms.iter().cloned())
            .collect();
        MarkedMap::new(marked, images)
    }

    /// `|A ∖ Ah|`-type closed form of the commutator defect of `t_image`
    /// with right translation by `h`.
    pub fn closed_form_defect(&self, h: u32) -> Rational {
        let x = &self.base.x;
        let n = x.order();
        let a_mask = to_mask(n, &self.a);
        let mut u_mask = a_mask.clone();
        for &y in &self.a {
            u_mask.insert(x.mul(self.g, y) as usize);
        }
        // |S ∖ Sh| = #{s ∈ S : s h⁻¹ ∉ S}
        let hi = x.inv(h);
        let outside = |m: &FixedBitSet| {
            m.ones()
                .filter(|&s| !m.contains(x.mul(s as u32, hi) as usize))
                .count() as i64
        };
        let u_out = outside(&u_mask);
        let num = if x.mul(self.g, self.g) == 0 {
            2 * u_out
        } else {
            2 * outside(&a_mask) + u_out
        };
        Rational::new(num, n as i64)
    }

    /// Direct commutator defect of `t_image` with `x -> x h⁻¹`.
    pub fn direct_defect(&self, h: u32) -> Rational {
        let r = self.base.x.right_translation(h);
        commutator_defect(&self.t_image, &r).expect("equal sizes")
    }

    /// Both evaluations for every `h ∈ q(Λ)`.
    pub fn commutator_curve(&self) -> Vec<CurvePoint> {
        self.lambda_elements
            .par_iter()
            .map(|&h| CurvePoint {
                h,
                direct: self.direct_defect(h),
                closed_form: self.closed_form_defect(h),
            })
            .collect()
    }

    /// `Σ_{h ∈ q(Λ)} |Bh ∩ Y| · |X| = |B| |Y| |q(Λ)|` for a given `Y`.
    pub fn equidistribution_holds(&self, y: &[u32]) -> bool {
        let x = &self.base.x;
        let ymask = to_mask(x.order(), y);
        let total: u64 = self
            .lambda_elements
            .iter()
            .map(|&h| {
                self.b
                    .iter()
                    .filter(|&&b| ymask.contains(x.mul(b, h) as usize))
                    .count() as u64
            })
            .sum();
        let ycount = ymask.count_ones(..) as u64;
        total * x.order() as u64
            == self.b.len() as u64 * ycount * self.lambda_elements.len() as u64
    }
}

/// Builds the family: a window set `C ⊂ q(Λ)`, `B = Z·C` over left coset
/// representatives `Z`, the `g` maximizing `|B ∖ g⁻¹B|`, `A = B ∖ g⁻¹B`,
/// and `t_image` swapping `A` and `gA`.
pub fn build_tech2(
    base: BiTranslationAction,
    alpha: Rational,
    beta: Rational,
    seed: u64,
) -> Result<Tech2Family> {
    let x = Arc::clone(&base.x);
    let n = x.order();
    let caps = GroupCaps::default();
    let gens: Vec<u32> = {
        let mut v: Vec<u32> = base.q.images.iter().copied().filter(|&h| h != 0).collect();
        v.dedup();
        v
    };
    let (h_group, lambda_elements) = FinGroup::subgroup_with(&x, &gens, &caps)?;
    let window = window_set_cyclic(&h_group, h_group.generators(), alpha, beta)?;
    let c: Vec<u32> = window
        .members
        .iter()
        .map(|&i| lambda_elements[i as usize])
        .collect();
    let z = left_coset_reps(&x, &lambda_elements)?;
    let mut b: Vec<u32> = z
        .iter()
        .flat_map(|&zz| c.iter().map(move |&cc| (zz, cc)))
        .map(|(zz, cc)| x.mul(zz, cc))
        .collect();
    b.sort_unstable();
    b.dedup();
    if b.len() != z.len() * c.len() {
        return Err(Error::Internal("B = Z·C is not a disjoint union".into()));
    }
    let b_density = Rational::new(b.len() as i64, n as i64);
    if b_density < alpha || b_density > beta {
        return Err(Error::Internal(format!(
            "|B|/|X| = {b_density} left the window"
        )));
    }

    // count[g] = #{(b, b') ∈ B² : b' b⁻¹ = g}; |B ∖ g⁻¹B| = |B| − count[g]
    let b_inv: Vec<u32> = b.iter().map(|&y| x.inv(y)).collect();
    let count = b
        .par_chunks(256)
        .fold(
            || vec![0u32; n],
            |mut acc, chunk| {
                for &bp in chunk {
                    for &bi in &b_inv {
                        acc[x.mul(bp, bi) as usize] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; n],
            |mut l, r| {
                l.iter_mut().zip(r).for_each(|(a, b)| *a += b);
                l
            },
        );
    let g = (0..n as u32)
        .min_by_key(|&g| (count[g as usize], g))
        .expect("nonempty group");
    let b_mask = to_mask(n, &b);
    let a: Vec<u32> = b
        .iter()
        .copied()
        .filter(|&y| !b_mask.contains(x.mul(g, y) as usize))
        .collect();
    let a_mask = to_mask(n, &a);
    let gi = x.inv(g);
    let mut image: Vec<u32> = (0..n as u32).collect();
    for &y in &a {
        let gy = x.mul(g, y);
        if a_mask.contains(gy as usize) {
            return Err(Error::Internal("A meets gA".into()));
        }
        image[y as usize] = gy;
    }
    for &y in &a {
        let gy = x.mul(g, y);
        image[gy as usize] = x.mul(gi, gy);
    }
    let t_image = Perm::from_images(image)?;

    let fam = Tech2Family {
        base,
        alpha,
        beta,
        lambda_elements,
        window,
        c,
        z,
        b,
        g,
        a,
        t_image,
    };
    if fam.a_density() < Rational::new(5, 42) {
        return Err(Error::Internal(format!(
            "|A|/|X| = {} below 5/42",
            fam.a_density()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..3 {
        let y: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.5)).collect();
        if !fam.equidistribution_holds(&y) {
            return Err(Error::Internal("equidistribution identity failed".into()));
        }
    }
    Ok(fam)
}

/// `F_2 → SL_2(Z/pZ)` via `[[1,2],[0,1]]`, `[[1,0],[2,1]]` and
/// `Z → SL_2(Z/pZ)` via `[[1,2],[0,1]]`.
pub fn flagship_bitranslation(p: u32) -> Result<BiTranslationAction> {
    let x = Arc::new(FinGroup::sl2_mod(p)?);
    let u = x
        .sl2_element([1, 2, 0, 1])
        .ok_or_else(|| Error::InvalidInput(format!("modulus {p} too small")))?;
    let l = x.sl2_element([1, 0, 2, 1]).expect("same modulus");
    let mut gamma = MarkedGroup::free(2, "s");
    gamma.name = "F2".into();
    let mut lambda = MarkedGroup::free(1, "l");
    lambda.name = "Z".into();
    let ph = MarkedHom::new(gamma, Arc::clone(&x), vec![u, l])?;
    let qh = MarkedHom::new(lambda, x, vec![u])?;
    BiTranslationAction::new(ph, qh)
}

pub fn flagship_family(p: u32, alpha: Rational, beta: Rational, seed: u64) -> Result<Tech2Family> {
    build_tech2(flagship_bitranslation(p)?, alpha, beta, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordDefect {
    pub word: String,
    pub defect: Rational,
}

/// Relator defects, distance of each generator image from the identity,
/// and, for a family, the commutator curve over `q(Λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub relator_defects: Vec<WordDefect>,
    pub sofic_profile: Vec<WordDefect>,
    pub commutator_curve: Option<Vec<CurvePoint>>,
    pub curve_max: Option<Rational>,
    pub closed_form_agrees: Option<bool>,
}

pub fn defect_report(m: &MarkedMap, fam: Option<&Tech2Family>) -> Result<DefectReport> {
    let relator_defects = m
        .marked
        .relators
        .iter()
        .map(|r| {
            Ok(WordDefect {
                word: m.marked.display_word(r),
                defect: m.word_defect(r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sofic_profile = (0..m.marked.generator_count() as u32)
        .map(|i| {
            let w = Word::power(i, 1);
            Ok(WordDefect {
                word: m.marked.display_word(&w),
                defect: m.word_defect(&w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = fam.map(Tech2Family::commutator_curve);
    let curve_max = curve
        .as_ref()
        .and_then(|c| c.iter().map(|p| p.direct).max());
    let closed_form_agrees = curve
        .as_ref()
        .map(|c| c.iter().all(|p| p.direct == p.closed_form));
    Ok(DefectReport {
        relator_defects,
        sofic_profile,
        commutator_curve: curve,
        curve_max,
        closed_form_agrees,
    })
}

/// Half the largest commutator defect of `t_image` against `q(Λ)`: any
/// permutation commuting exactly with every right translation by `q(Λ)` is
/// at least this far from `t_image`.
pub fn distance_floor_to_commuting(fam: &Tech2Family) -> Rational {
    let max = fam
        .commutator_curve()
        .iter()
        .map(|p| p.direct)
        .max()
        .unwrap_or_else(|| Rational::from_integer(0));
    max / 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutingWitness {
    pub kind: String,
    pub element: u32,
    pub distance: Rational,
}

/// Distances from `t_image` to permutations that commute exactly with all
/// right translations by `q(Λ)`: the identity, right translations by the
/// centralizer of `q(Λ)`, and left translations by `g`, `g⁻¹`, and
/// `samples` seeded random elements.
pub fn commuting_witnesses(fam: &Tech2Family, samples: usize, seed: u64) -> Vec<CommutingWitness> {
    let x = &fam.base.x;
    let n = x.order() as u32;
    let centralizer: Vec<u32> = (0..n)
        .into_par_iter()
        .filter(|&c| {
            fam.base
                .q
                .images
                .iter()
                .all(|&h| x.mul(c, h) == x.mul(h, c))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lefts = vec![fam.g, x.inv(fam.g)];
    lefts.extend((0..samples).map(|_| rng.gen_range(0..n)));
    let mut jobs: Vec<(&str, u32)> = centralizer.iter().map(|&c| ("right", c)).collect();
    jobs.extend(lefts.into_iter().map(|g| ("left", g)));
    jobs.par_iter()
        .map(|&(kind, e)| {
            let p = if kind == "right" {
                x.right_translation(e)
            } else {
                x.left_translation(e)
            };
            CommutingWitness {
                kind: kind.to_string(),
                element: e,
                distance: hamming(&fam.t_image, &p).expect("equal sizes"),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn bitranslation_on_cyclic_five() {
        let x = Arc::new(FinGroup::cyclic(5).unwrap());
        let p = MarkedHom::new(MarkedGroup::free(1, "a"), Arc::clone(&x), vec![1]).unwrap();
        let q = MarkedHom::new(MarkedGroup::free(1, "b"), Arc::clone(&x), vec![0]).unwrap();
        let bt = BiTranslationAction::new(p, q).unwrap();
        assert_eq!(bt.gamma_perms[0], x.left_translation(1));
        assert!(bt.lambda_perms[0].is_identity());
    }

    #[test]
    fn non_surjective_p_rejected() {
        let x = Arc::new(FinGroup::cyclic(6).unwrap());
        let p = MarkedHom::new(MarkedGroup::free(1, "a"), Arc::clone(&x), vec![2]).unwrap();
        let q = MarkedHom::new(MarkedGroup::free(1, "b"), x, vec![0]).unwrap();
        assert!(matches!(
            BiTranslationAction::new(p, q),
            Err(Error::NotSurjective { image: 3, order: 6 })
        ));
    }

    #[test]
    fn flagship_seven() {
        let fam = flagship_family(7, r(1, 7), r(1, 6), 1).unwrap();
        assert_eq!(fam.order(), 336);
        assert_eq!(fam.z.len(), 48);
        assert_eq!(fam.b.len(), 48);
        assert_eq!(fam.b_density(), r(1, 7));
        assert!(fam.a_density() >= r(5, 42));
        assert!(fam.t_image.pow(2).is_identity());
        let curve = fam.commutator_curve();
        assert!(curve.iter().all(|p| p.direct == p.closed_form));
        assert!(curve.iter().map(|p| p.direct).max().unwrap() >= r(1, 126));
    }

    #[test]
    fn t_image_swaps_a_and_ga() {
        let fam = flagship_family(13, r(1, 7), r(1, 6), 2).unwrap();
        let x = &fam.base.x;
        for &a in &fam.a {
            let ga = x.mul(fam.g, a);
            assert_eq!(fam.t_image.apply(a as usize), ga as usize);
            assert_eq!(fam.t_image.apply(ga as usize), a as usize);
        }
        assert_eq!(fam.b_density(), r(2, 13));
    }

    #[test]
    fn marked_map_relators() {
        let fam = flagship_family(7, r(1, 7), r(1, 6), 1).unwrap();
        let m = fam.marked_map().unwrap();
        let rep = defect_report(&m, Some(&fam)).unwrap();
        // relators: [s0,l], [s1,l], [t,l]; only the last can be nonzero
        assert_eq!(rep.relator_defects.len(), 3);
        assert_eq!(rep.relator_defects[0].defect, r(0, 1));
        assert_eq!(rep.relator_defects[1].defect, r(0, 1));
        let tl = commutator_defect(&fam.t_image, &fam.base.lambda_perms[0]).unwrap();
        assert_eq!(rep.relator_defects[2].defect, tl);
        assert_eq!(rep.closed_form_agrees, Some(true));
    }

    #[test]
    fn trivial_q_has_empty_window() {
        let x = Arc::new(FinGroup::sl2_mod(5).unwrap());
        let u = x.sl2_element([1, 2, 0, 1]).unwrap();
        let l = x.sl2_element([1, 0, 2, 1]).unwrap();
        let p = MarkedHom::new(MarkedGroup::free(2, "s"), Arc::clone(&x), vec![u, l]).unwrap();
        let q = MarkedHom::new(MarkedGroup::free(1, "b"), x, vec![0]).unwrap();
        let bt = BiTranslationAction::new(p, q).unwrap();
        assert!(matches!(
            build_tech2(bt, r(1, 7), r(1, 6), 0),
            Err(Error::WindowEmpty { order: 1, .. })
        ));
    }

    #[test]
    fn floor_is_below_witness_distances() {
        let fam = flagship_family(7, r(1, 7), r(1, 6), 1).unwrap();
        let floor = distance_floor_to_commuting(&fam);
        assert!(floor >= r(1, 252));
        for w in commuting_witnesses(&fam, 8, 3) {
            assert!(w.distance >= floor, "{w:?}");
        }
    }
}
