//! Nearest exact homomorphism to a marked map, by exhaustive scan on tiny
//! ground sets or seeded local search otherwise.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{MarkedMap, Word};
use crate::perm::hamming_count;
use crate::{Error, Perm, Rational, Result};

/// Largest ground set the local search accepts.
pub const LOCAL_SEARCH_MAX_DEGREE: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCaps {
    /// Exhaustive scan when `(n!)^k` is at most this.
    pub exhaustive_cap: u64,
    pub allow_fallback: bool,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            exhaustive_cap: 10_000_000,
            allow_fallback: true,
            restarts: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_hom: MarkedMap,
    /// `d_H` of each generator image to the input.
    pub distance_profile: Vec<Rational>,
    pub max_distance: Rational,
    /// Tuples scanned (exhaustive) or candidates evaluated (local search).
    pub search_space_size: u64,
    pub exhaustive: bool,
}

/// `(n!)^k`, if it fits in a `u64`.
pub fn search_space(n: usize, k: usize) -> Option<u64> {
    let fact = (1..=n as u64).try_fold(1u64, |a, b| a.checked_mul(b))?;
    (0..k).try_fold(1u64, |a, _| a.checked_mul(fact))
}

/// Points moved by `word` under the generator images (with inverses).
fn moved_points(word: &Word, images: &[&[u32]], inverses: &[&[u32]], n: usize) -> usize {
    (0..n)
        .filter(|&x| {
            let y = word.letters().iter().rev().fold(x as u32, |y, l| {
                let table = if l.inverse { inverses } else { images };
                table[l.gen as usize][y as usize]
            });
            y as usize != x
        })
        .count()
}

fn result_for(m: &MarkedMap, images: Vec<Perm>, size: u64, exhaustive: bool) -> Result<OracleResult> {
    let n = m.degree();
    let distance_profile: Vec<Rational> = images
        .iter()
        .zip(&m.images)
        .map(|(a, b)| Ok(Rational::new(hamming_count(a, b)? as i64, n.max(1) as i64)))
        .collect::<Result<_>>()?;
    let max_distance = distance_profile
        .iter()
        .copied()
        .max()
        .unwrap_or_else(|| Rational::from_integer(0));
    let best_hom = MarkedMap::new(m.marked.clone(), images)?;
    if !best_hom.is_homomorphism()? {
        return Err(Error::Internal("oracle returned a non-homomorphism".into()));
    }
    Ok(OracleResult {
        best_hom,
        distance_profile,
        max_distance,
        search_space_size: size,
        exhaustive,
    })
}

/// Minimizes the largest per-generator `d_H` to the input over all
/// assignments satisfying every relator exactly. Ties go to the smaller
/// total distance, then to the earlier tuple in lexicographic order.
pub fn nearest_homomorphism_bruteforce(m: &MarkedMap, caps: &OracleCaps) -> Result<OracleResult> {
    let n = m.degree();
    let k = m.marked.generator_count();
    match search_space(n, k) {
        Some(size) if size <= caps.exhaustive_cap => exhaustive(m, size),
        _ if caps.allow_fallback => local_search(m, caps),
        _ => Err(Error::Capacity {
            what: "exhaustive homomorphism search".into(),
            limit: caps.exhaustive_cap as usize,
        }),
    }
}

fn exhaustive(m: &MarkedMap, size: u64) -> Result<OracleResult> {
    let n = m.degree();
    let k = m.marked.generator_count();
    if k == 0 {
        return result_for(m, vec![], 1, true);
    }
    let perms: Vec<Vec<u32>> = (0..n as u32).permutations(n).collect();
    let inverses: Vec<Vec<u32>> = perms
        .iter()
        .map(|p| {
            let mut inv = vec![0u32; n];
            p.iter().enumerate().for_each(|(i, &v)| inv[v as usize] = i as u32);
            inv
        })
        .collect();
    // dist[i][p] = points where perm p differs from generator i's image
    let dist: Vec<Vec<usize>> = m
        .images
        .iter()
        .map(|img| {
            perms
                .iter()
                .map(|p| p.iter().zip(img.images()).filter(|(a, b)| a != b).count())
                .collect()
        })
        .collect();
    let np = perms.len();
    let relators = &m.marked.relators;
    let best = (0..np)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(usize, usize, Vec<usize>)> = None;
            let mut idx = vec![0usize; k];
            idx[0] = first;
            loop {
                let max = (0..k).map(|i| dist[i][idx[i]]).max().unwrap_or(0);
                let sum: usize = (0..k).map(|i| dist[i][idx[i]]).sum();
                let better = best.as_ref().is_none_or(|b| (max, sum) < (b.0, b.1));
                if better {
                    let imgs: Vec<&[u32]> = idx.iter().map(|&j| perms[j].as_slice()).collect();
                    let invs: Vec<&[u32]> = idx.iter().map(|&j| inverses[j].as_slice()).collect();
                    if relators.iter().all(|r| moved_points(r, &imgs, &invs, n) == 0) {
                        best = Some((max, sum, idx.clone()));
                    }
                }
                // advance the trailing digits, last fastest
                let mut pos = k;
                loop {
                    if pos == 1 {
                        return best;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < np {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        })
        .filter_map(|b| b)
        .min_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)))
        .ok_or_else(|| Error::Internal("no homomorphism found, not even the trivial one".into()))?;
    let images = best
        .2
        .iter()
        .map(|&j| Perm::from_images(perms[j].clone()))
        .collect::<Result<_>>()?;
    result_for(m, images, size, true)
}

/// `(max relator moved points, max distance, total distance)`.
fn objective(m: &MarkedMap, imgs: &[Vec<u32>]) -> (usize, usize, usize) {
    let n = m.degree();
    let invs: Vec<Vec<u32>> = imgs
        .iter()
        .map(|p| {
            let mut inv = vec![0u32; n];
            p.iter().enumerate().for_each(|(i, &v)| inv[v as usize] = i as u32);
            inv
        })
        .collect();
    let ir: Vec<&[u32]> = imgs.iter().map(Vec::as_slice).collect();
    let iv: Vec<&[u32]> = invs.iter().map(Vec::as_slice).collect();
    let rel = m
        .marked
        .relators
        .iter()
        .map(|r| moved_points(r, &ir, &iv, n))
        .max()
        .unwrap_or(0);
    let d: Vec<usize> = imgs
        .iter()
        .zip(&m.images)
        .map(|(a, b)| a.iter().zip(b.images()).filter(|(x, y)| x != y).count())
        .collect();
    (rel, d.iter().copied().max().unwrap_or(0), d.iter().sum())
}

fn local_search(m: &MarkedMap, caps: &OracleCaps) -> Result<OracleResult> {
    let n = m.degree();
    let k = m.marked.generator_count();
    if n > LOCAL_SEARCH_MAX_DEGREE {
        return Err(Error::Capacity {
            what: "homomorphism local search".into(),
            limit: LOCAL_SEARCH_MAX_DEGREE,
        });
    }
    let input: Vec<Vec<u32>> = m.images.iter().map(|p| p.images().to_vec()).collect();
    let identity: Vec<Vec<u32>> = vec![(0..n as u32).collect(); k];
    let runs: Vec<(Option<(usize, usize, Vec<Vec<u32>>)>, u64)> = (0..caps.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(caps.seed ^ (r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let mut cur = input.clone();
            if r > 0 && n > 1 {
                for _ in 0..rng.gen_range(1..=n) {
                    let i = rng.gen_range(0..k.max(1));
                    if k > 0 {
                        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                        cur[i].swap(a, b);
                    }
                }
            }
            let mut obj = objective(m, &cur);
            let mut evals = 1u64;
            loop {
                let mut best_move = None;
                for i in 0..k {
                    for a in 0..n {
                        for b in a + 1..n {
                            cur[i].swap(a, b);
                            let o = objective(m, &cur);
                            evals += 1;
                            cur[i].swap(a, b);
                            if o < best_move.map_or(obj, |(bo, _, _, _)| bo) {
                                best_move = Some((o, i, a, b));
                            }
                        }
                    }
                }
                match best_move {
                    Some((o, i, a, b)) => {
                        cur[i].swap(a, b);
                        obj = o;
                    }
                    None => break,
                }
            }
            let found = (obj.0 == 0).then_some((obj.1, obj.2, cur));
            (found, evals)
        })
        .collect();
    let evals: u64 = runs.iter().map(|r| r.1).sum::<u64>() + 1;
    let trivial = {
        let o = objective(m, &identity);
        (o.1, o.2, identity)
    };
    let best = runs
        .into_iter()
        .filter_map(|r| r.0)
        .chain(std::iter::once(trivial))
        .min_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)))
        .expect("trivial candidate present");
    let images = best
        .2
        .into_iter()
        .map(Perm::from_images)
        .collect::<Result<_>>()?;
    result_for(m, images, evals, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRow {
    pub instance: usize,
    pub degree: usize,
    /// Largest relator defect of the input.
    pub relator_defect: Rational,
    /// Distance to the nearest homomorphism found.
    pub distance: Rational,
    pub exhaustive: bool,
}

/// Relator defects against nearest-homomorphism distances over a family of
/// marked maps.
pub fn stability_defect_table(family: &[MarkedMap], caps: &OracleCaps) -> Result<Vec<DefectRow>> {
    family
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let r = nearest_homomorphism_bruteforce(m, caps)?;
            Ok(DefectRow {
                instance: i,
                degree: m.degree(),
                relator_defect: m.max_relator_defect()?,
                distance: r.max_distance,
                exhaustive: r.exhaustive,
            })
        })
        .collect()
}

/// A `Z²` marked map on `n` points: `a` an `n`-cycle, `b = a^j` perturbed
/// by one transposition.
pub fn z2_perturbed(n: usize, j: u64, swap: (usize, usize)) -> Result<MarkedMap> {
    let a = Perm::cycle(n, &(0..n).collect::<Vec<_>>())?;
    let b = a.pow(j).compose(&Perm::transposition(n, swap.0, swap.1)?)?;
    MarkedMap::new(crate::MarkedGroup::free_abelian(2, "a"), vec![a, b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MarkedGroup;

    #[test]
    fn homomorphism_is_its_own_nearest() {
        let a = Perm::cycle(4, &[0, 1, 2, 3]).unwrap();
        let m = MarkedMap::new(MarkedGroup::free_abelian(2, "a"), vec![a.clone(), a.pow(2)]).unwrap();
        let r = nearest_homomorphism_bruteforce(&m, &OracleCaps::default()).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.max_distance, Rational::from_integer(0));
        assert_eq!(r.best_hom, m);
        assert_eq!(r.search_space_size, 576);
    }

    #[test]
    fn free_group_input_is_a_homomorphism() {
        let m = MarkedMap::new(
            MarkedGroup::free(2, "s"),
            vec![Perm::cycle(3, &[0, 1]).unwrap(), Perm::cycle(3, &[1, 2]).unwrap()],
        )
        .unwrap();
        let r = nearest_homomorphism_bruteforce(&m, &OracleCaps::default()).unwrap();
        assert_eq!(r.max_distance, Rational::from_integer(0));
    }

    #[test]
    fn cap_without_fallback_is_an_error() {
        let m = z2_perturbed(7, 2, (0, 3)).unwrap();
        let caps = OracleCaps {
            allow_fallback: false,
            ..OracleCaps::default()
        };
        assert!(matches!(
            nearest_homomorphism_bruteforce(&m, &caps),
            Err(Error::Capacity { .. })
        ));
        let r = nearest_homomorphism_bruteforce(&m, &OracleCaps::default()).unwrap();
        assert!(!r.exhaustive);
    }

    #[test]
    fn local_search_never_beats_exhaustive() {
        for n in 3..=5 {
            let m = z2_perturbed(n, 1, (0, n - 1)).unwrap();
            let ex = nearest_homomorphism_bruteforce(&m, &OracleCaps::default()).unwrap();
            let ls = local_search(&m, &OracleCaps::default()).unwrap();
            assert!(ls.max_distance >= ex.max_distance);
        }
    }

    #[test]
    fn search_space_sizes() {
        assert_eq!(search_space(4, 2), Some(576));
        assert_eq!(search_space(6, 2), Some(518_400));
        assert_eq!(search_space(30, 2), None);
    }
}
