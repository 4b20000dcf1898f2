//! Kazhdan constants of finite groups with respect to generating sets.
//!
//! For a unit vector `ξ` orthogonal to the constants,
//! `Σ_s ‖π(s)ξ − ξ‖² = ⟨Lξ, ξ⟩` where `L = Σ_s (2I − π(s) − π(s)⁻¹)` is the
//! Cayley graph Laplacian. So `max_s ‖π(s)ξ − ξ‖² ≥ λ₁/|S|` for every such
//! `ξ`, giving `κ ≥ sqrt(λ₁/|S|)`, while the bottom eigenvector has
//! `max_s ‖π(s)ξ − ξ‖² ≤ λ₁`, giving `κ ≤ sqrt(λ₁)`.

pub mod lanczos;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{FinGroup, PermAction};
use crate::{Error, Result};

pub use lanczos::{smallest_eigen, LanczosOptions, LanczosResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KazhdanMethod {
    AbelianExact,
    LaplacianBracket,
}

/// Certified interval `[lower, upper]` containing `κ(G, S)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KazhdanBracket {
    pub lower: f64,
    pub upper: f64,
    pub lambda1: f64,
    pub method: KazhdanMethod,
    pub iterations: usize,
}

impl KazhdanBracket {
    pub fn contains(&self, kappa: f64) -> bool {
        self.lower <= kappa && kappa <= self.upper
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub tol: f64,
    /// Largest order solved by dense eigendecomposition.
    pub dense_max: usize,
    /// Largest order accepted at all.
    pub max_order: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: 1e-8,
            dense_max: 2000,
            max_order: 200_000,
            krylov_dim: 120,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

fn require_generating(g: &FinGroup, s: &[u32]) -> Result<()> {
    if let Some(&bad) = s.iter().find(|&&x| x as usize >= g.order()) {
        return Err(Error::InvalidInput(format!("generator index {bad} out of range")));
    }
    let closure = g.closure(s).len();
    if closure != g.order() {
        return Err(Error::NonGenerating {
            closure,
            order: g.order(),
        });
    }
    Ok(())
}

fn exponent(g: &FinGroup) -> usize {
    let mut e = 1usize;
    for x in 0..g.order() as u32 {
        e = num_integer::lcm(e, g.element_order(x));
    }
    e
}

/// All characters of an abelian group, as tables `x -> k` meaning
/// `χ(x) = exp(2πi k / e)` with `e` the exponent. The trivial character
/// comes first.
pub fn abelian_characters(g: &FinGroup) -> Result<(usize, Vec<Vec<u32>>)> {
    if !g.is_abelian() {
        return Err(Error::NotAbelian);
    }
    let e = exponent(g);
    let gens = g.generators();
    let total = (e as f64).powi(gens.len() as i32);
    if total > 4e6 {
        return Err(Error::Capacity {
            what: "character enumeration".into(),
            limit: 4_000_000,
        });
    }
    let mut chars = vec![];
    let mut assign = vec![0u32; gens.len()];
    loop {
        if let Some(table) = extend_character(g, &assign, e as u32) {
            chars.push(table);
        }
        // odometer
        let mut i = 0;
        loop {
            if i == assign.len() {
                return Ok((e, chars));
            }
            assign[i] += 1;
            if assign[i] < e as u32 {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

fn extend_character(g: &FinGroup, assign: &[u32], e: u32) -> Option<Vec<u32>> {
    let mut table = vec![u32::MAX; g.order()];
    table[0] = 0;
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(x) = queue.pop_front() {
        for (j, &s) in g.generators().iter().enumerate() {
            let y = g.mul(x, s) as usize;
            let v = (table[x as usize] + assign[j]) % e;
            if table[y] == u32::MAX {
                table[y] = v;
                queue.push_back(y as u32);
            } else if table[y] != v {
                return None;
            }
        }
    }
    Some(table)
}

fn chord(k: u32, e: usize) -> f64 {
    2.0 * (std::f64::consts::PI * k as f64 / e as f64).sin().abs()
}

/// Character-wise Kazhdan constant of an abelian group:
/// `min_{χ ≠ 1} max_{s ∈ S} |χ(s) − 1|`, with `λ₁ = min_{χ ≠ 1} Σ_s |χ(s) − 1|²`.
pub fn kazhdan_abelian_exact(g: &FinGroup, s: &[u32]) -> Result<KazhdanBracket> {
    require_generating(g, s)?;
    if g.order() < 2 {
        return Err(Error::InvalidInput("trivial group has no nontrivial characters".into()));
    }
    let (e, chars) = abelian_characters(g)?;
    let mut kappa = f64::INFINITY;
    let mut lambda1 = f64::INFINITY;
    for table in chars.iter().skip(1) {
        let vals = s.iter().map(|&x| chord(table[x as usize], e));
        let (mx, sum) = vals.fold((0.0f64, 0.0f64), |(m, t), v| (m.max(v), t + v * v));
        kappa = kappa.min(mx);
        lambda1 = lambda1.min(sum);
    }
    Ok(KazhdanBracket {
        lower: kappa,
        upper: kappa,
        lambda1,
        method: KazhdanMethod::AbelianExact,
        iterations: 0,
    })
}

/// Neighbor table: for each `x`, the points `s x` and `s⁻¹ x`.
fn neighbor_table(g: &FinGroup, s: &[u32]) -> Vec<u32> {
    let d = 2 * s.len();
    let mut nb = vec![0u32; g.order() * d];
    nb.par_chunks_mut(d).enumerate().for_each(|(x, row)| {
        for (j, &t) in s.iter().enumerate() {
            row[2 * j] = g.mul(t, x as u32);
            row[2 * j + 1] = g.mul(g.inv(t), x as u32);
        }
    });
    nb
}

fn apply_laplacian(nb: &[u32], d: usize, x: &[f64], y: &mut [f64]) {
    let deg = d as f64;
    y.par_iter_mut().enumerate().for_each(|(i, yi)| {
        let row = &nb[i * d..(i + 1) * d];
        let mut acc = deg * x[i];
        for &j in row {
            acc -= x[j as usize];
        }
        *yi = acc;
    });
}

/// Smallest nonzero eigenvalue of the Cayley graph Laplacian, its
/// eigenvector, an error bound, and the iteration count.
pub fn laplacian_gap(
    g: &FinGroup,
    s: &[u32],
    opts: &SpectralOptions,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    require_generating(g, s)?;
    let n = g.order();
    if n > opts.max_order {
        return Err(Error::Capacity {
            what: format!("spectral computation on order {n}"),
            limit: opts.max_order,
        });
    }
    if n < 2 {
        return Err(Error::InvalidInput("trivial group has no spectral gap".into()));
    }
    let d = 2 * s.len();
    let nb = neighbor_table(g, s);
    if n <= opts.dense_max {
        // deflate constants by pushing them above the spectrum (≤ 2d)
        let shift = 2.0 * d as f64 + 1.0;
        let mut m = DMatrix::<f64>::from_element(n, n, shift / n as f64);
        for x in 0..n {
            m[(x, x)] += d as f64;
            for &y in &nb[x * d..(x + 1) * d] {
                m[(x, y as usize)] -= 1.0;
            }
        }
        let eig = SymmetricEigen::new(m);
        let (i, &val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let mut w = vec![0.0; n];
        apply_laplacian(&nb, d, &v, &mut w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - val * b).powi(2))
            .sum::<f64>()
            .sqrt();
        return Ok((val, v, residual, 1));
    }
    let lopts = LanczosOptions {
        krylov_dim: opts.krylov_dim,
        max_restarts: opts.max_restarts,
        tol: opts.tol,
        seed: opts.seed,
    };
    let r = smallest_eigen(n, |x, y| apply_laplacian(&nb, d, x, y), &lopts)?;
    Ok((r.value, r.vector, r.residual, r.iterations))
}

/// Bracket `[sqrt(λ₁/|S|) − tol, sqrt(λ₁) + tol]`, clipped to `[0, 2]`.
/// The lower end also absorbs the eigensolver residual.
pub fn kazhdan_bracket(g: &FinGroup, s: &[u32], opts: &SpectralOptions) -> Result<KazhdanBracket> {
    let (lambda1, _, residual, iterations) = laplacian_gap(g, s, opts)?;
    let k = s.len() as f64;
    let lam_low = (lambda1 - residual).max(0.0);
    let lower = ((lam_low / k).sqrt() - opts.tol).clamp(0.0, 2.0);
    let upper = (lambda1.max(0.0).sqrt() + opts.tol).min(2.0);
    Ok(KazhdanBracket {
        lower,
        upper,
        lambda1,
        method: KazhdanMethod::LaplacianBracket,
        iterations,
    })
}

/// Exact character value for abelian groups, Laplacian bracket otherwise.
pub fn kazhdan_auto(g: &FinGroup, s: &[u32], opts: &SpectralOptions) -> Result<KazhdanBracket> {
    if g.is_abelian() && s.len() == 1 {
        kazhdan_abelian_exact(g, s)
    } else {
        kazhdan_bracket(g, s, opts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub holds: bool,
    /// `κ² |A| |G∖A|`.
    pub lhs: f64,
    /// `max_s |sA △ A| · |G|`.
    pub rhs: u64,
    pub witness: Option<u32>,
    pub max_sym_diff: usize,
}

/// `κ² |A||G∖A| ≤ max_{s∈S} |sA △ A| · |G|` with `κ` a certified lower bound.
pub fn check_expansion(g: &FinGroup, s: &[u32], a: &[u32], kappa_lower: f64) -> Result<ExpansionCheck> {
    let n = g.order();
    let mut mask = vec![false; n];
    for &x in a {
        if x as usize >= n {
            return Err(Error::InvalidInput(format!("{x} is not an element")));
        }
        mask[x as usize] = true;
    }
    let size = mask.iter().filter(|&&b| b).count();
    let mut best: Option<(u32, usize)> = None;
    for &t in s {
        // |tA △ A| = 2 |tA ∖ A|
        let out = mask
            .iter()
            .enumerate()
            .filter(|&(x, &m)| m && !mask[g.mul(t, x as u32) as usize])
            .count();
        let sd = 2 * out;
        if best.is_none_or(|(_, b)| sd > b) {
            best = Some((t, sd));
        }
    }
    let max_sym_diff = best.map_or(0, |b| b.1);
    let lhs = kappa_lower * kappa_lower * size as f64 * (n - size) as f64;
    let rhs = (max_sym_diff * n) as u64;
    Ok(ExpansionCheck {
        holds: lhs <= rhs as f64 * (1.0 + 1e-12) + 1e-12,
        lhs,
        rhs,
        witness: best.map(|b| b.0),
        max_sym_diff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalCheck {
    pub holds: bool,
    /// `κ · max_{g∈G} ‖π(g)ξ − ξ‖`.
    pub lhs: f64,
    /// `2 · max_{s∈S} ‖π(s)ξ − ξ‖`.
    pub rhs: f64,
    pub max_over_group: f64,
    pub max_over_generators: f64,
}

fn displacement(p: &crate::Perm, xi: &[f64]) -> f64 {
    xi.iter()
        .enumerate()
        .map(|(x, v)| (xi[p.apply(x)] - v).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `κ · max_{g∈G} ‖π(g)ξ − ξ‖ ≤ 2 · max_{s∈S} ‖π(s)ξ − ξ‖` for the
/// permutation representation given by `action`.
pub fn global_from_generators(
    action: &PermAction,
    s: &[u32],
    xi: &[f64],
    kappa_lower: f64,
) -> Result<GlobalCheck> {
    if xi.len() != action.degree {
        return Err(Error::SizeMismatch {
            left: action.degree,
            right: xi.len(),
        });
    }
    let max_over_group = action
        .images
        .iter()
        .map(|p| displacement(p, xi))
        .fold(0.0, f64::max);
    let max_over_generators = s
        .iter()
        .map(|&t| displacement(action.image(t), xi))
        .fold(0.0, f64::max);
    let lhs = kappa_lower * max_over_group;
    let rhs = 2.0 * max_over_generators;
    Ok(GlobalCheck {
        holds: lhs <= rhs + 1e-9 * (1.0 + rhs),
        lhs,
        rhs,
        max_over_group,
        max_over_generators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn cyclic_exact_values() {
        let c6 = FinGroup::cyclic(6).unwrap();
        let k = kazhdan_abelian_exact(&c6, &[1]).unwrap();
        assert!((k.lower - 1.0).abs() < 1e-12);
        let c2 = FinGroup::cyclic(2).unwrap();
        assert!((kazhdan_abelian_exact(&c2, &[1]).unwrap().lower - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cyclic_six_bracket_collapses() {
        let c6 = FinGroup::cyclic(6).unwrap();
        let b = kazhdan_bracket(&c6, &[1], &SpectralOptions::default()).unwrap();
        assert!((b.lambda1 - 1.0).abs() < 1e-10);
        assert!(b.contains(1.0));
        assert!(b.upper - b.lower < 1e-7);
    }

    #[test]
    fn non_abelian_rejected_by_character_method() {
        let g = FinGroup::sl2_mod(3).unwrap();
        assert_eq!(kazhdan_abelian_exact(&g, &[1, 2]).unwrap_err(), Error::NotAbelian);
    }

    #[test]
    fn non_generating_is_an_error() {
        let c6 = FinGroup::cyclic(6).unwrap();
        assert!(matches!(
            kazhdan_bracket(&c6, &[2], &SpectralOptions::default()),
            Err(Error::NonGenerating { closure: 3, order: 6 })
        ));
    }

    #[test]
    fn lanczos_path_agrees_with_dense_path() {
        let g = FinGroup::sl2_mod(7).unwrap();
        let s = g.generators().to_vec();
        let dense = kazhdan_bracket(&g, &s, &SpectralOptions::default()).unwrap();
        let sparse = kazhdan_bracket(
            &g,
            &s,
            &SpectralOptions {
                dense_max: 10,
                ..SpectralOptions::default()
            },
        )
        .unwrap();
        assert!((dense.lambda1 - sparse.lambda1).abs() < 1e-7);
    }

    #[test]
    fn expansion_example_cyclic_twelve() {
        let g = FinGroup::cyclic(12).unwrap();
        let a: Vec<u32> = (0..6).collect();
        let kappa = 2.0 * (PI / 12.0).sin();
        let c = check_expansion(&g, &[1], &a, kappa).unwrap();
        assert_eq!(c.max_sym_diff, 2);
        assert_eq!(c.rhs, 24);
        assert!((c.lhs - kappa * kappa * 36.0).abs() < 1e-12);
        assert!(c.holds);
        let empty = check_expansion(&g, &[1], &[], kappa).unwrap();
        assert!(empty.holds && empty.lhs == 0.0 && empty.rhs == 0);
    }

    #[test]
    fn global_inequality_on_cyclic_six() {
        let g = Arc::new(FinGroup::cyclic(6).unwrap());
        let act = PermAction::left_regular(Arc::clone(&g));
        let mut xi = vec![0.0; 6];
        xi[0] = 1.0;
        xi[2] = -1.0;
        let c = global_from_generators(&act, &[1], &xi, 1.0).unwrap();
        assert!(c.holds);
        // an invariant vector has zero displacement everywhere
        let z = global_from_generators(&act, &[1], &[1.0; 6], 1.0).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    }
}
