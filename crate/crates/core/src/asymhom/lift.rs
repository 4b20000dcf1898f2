//! Lifting marked maps to larger ground sets: diagonal products with an
//! extra finite quotient, and induction from a finite-index subgroup.

use serde::{Deserialize, Serialize};

use crate::group::{FinGroup, MarkedGroup, MarkedMap, Word};
use crate::perm::hamming;
use crate::{Error, Perm, Rational, Result};

/// Largest ground set a lift may produce.
pub const LIFT_MAX_DEGREE: usize = 1 << 26;

/// On `extra × X` (point `(e, y)` at `e·|X| + y`), the first
/// `extra_images.len()` generators act by `(e, y) -> (a_i e, σ_i(y))`; the
/// remaining generators leave the first coordinate alone.
pub fn product_lift(m: &MarkedMap, extra: &FinGroup, extra_images: &[u32]) -> Result<MarkedMap> {
    let k = m.marked.generator_count();
    if extra_images.len() > k {
        return Err(Error::Arity {
            expected: k,
            got: extra_images.len(),
        });
    }
    let closure = extra.closure(extra_images).len();
    if closure != extra.order() {
        return Err(Error::NotSurjective {
            image: closure,
            order: extra.order(),
        });
    }
    let n = m.degree();
    let e = extra.order();
    let total = n.checked_mul(e).filter(|&t| t <= LIFT_MAX_DEGREE).ok_or_else(|| {
        Error::Capacity {
            what: "product lift".into(),
            limit: LIFT_MAX_DEGREE,
        }
    })?;
    let images = m
        .images
        .iter()
        .enumerate()
        .map(|(i, sigma)| {
            let mut img = vec![0u32; total];
            for a in 0..e as u32 {
                let a2 = extra_images.get(i).map_or(a, |&ai| extra.mul(ai, a));
                for y in 0..n {
                    img[a as usize * n + y] = a2 * n as u32 + sigma.images()[y];
                }
            }
            Perm::from_images_unchecked(img)
        })
        .collect();
    MarkedMap::new(m.marked.clone(), images)
}

/// How `Γ` permutes the cosets of a finite-index subgroup `Γ₀`, with a
/// section `s` (as words in `Γ`, `s(0)` empty) and the cocycle
/// `c(γ, j) = s(γ j)⁻¹ γ s(j)` written as words in `Γ₀`'s generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetStructure {
    pub index: usize,
    /// One permutation of the cosets per generator of `Γ`.
    pub action: Vec<Perm>,
    pub section_words: Vec<Word>,
    /// `cocycle_words[s][j] = c(s, j)`.
    pub cocycle_words: Vec<Vec<Word>>,
}

impl CosetStructure {
    pub fn validate(&self, gamma: &MarkedGroup, sub: &MarkedGroup) -> Result<()> {
        let k = gamma.generator_count();
        if self.action.len() != k || self.cocycle_words.len() != k {
            return Err(Error::Arity {
                expected: k,
                got: self.action.len().min(self.cocycle_words.len()),
            });
        }
        if self.index == 0 || self.action.iter().any(|p| p.len() != self.index) {
            return Err(Error::InvalidInput("coset action has the wrong degree".into()));
        }
        if self.section_words.len() != self.index {
            return Err(Error::InvalidInput("one section word per coset required".into()));
        }
        if !self.section_words[0].is_empty() {
            return Err(Error::Precondition(
                "section must send the trivial coset to the identity".into(),
            ));
        }
        let ks = sub.generator_count() as u32;
        for (s, row) in self.cocycle_words.iter().enumerate() {
            if row.len() != self.index {
                return Err(Error::InvalidInput(format!(
                    "cocycle words for generator {s} missing"
                )));
            }
            if row.iter().any(|w| w.max_gen().is_some_and(|g| g >= ks)) {
                return Err(Error::InvalidInput(format!(
                    "cocycle word for generator {s} leaves the subgroup's generators"
                )));
            }
        }
        Ok(())
    }

    /// The identity structure of index 1.
    pub fn trivial(gamma_gens: usize) -> Self {
        CosetStructure {
            index: 1,
            action: vec![Perm::identity(1); gamma_gens],
            section_words: vec![Word::default()],
            cocycle_words: (0..gamma_gens as u32)
                .map(|s| vec![Word::power(s, 1)])
                .collect(),
        }
    }
}

/// On cosets × X (point `(j, x)` at `j·|X| + x`), generator `γ` acts by
/// `(j, x) -> (γ j, σ(c(γ, j)) x)`.
pub fn induce_finite_index(
    m: &MarkedMap,
    gamma: MarkedGroup,
    cs: &CosetStructure,
) -> Result<MarkedMap> {
    cs.validate(&gamma, &m.marked)?;
    let n = m.degree();
    let total = n.checked_mul(cs.index).filter(|&t| t <= LIFT_MAX_DEGREE).ok_or_else(|| {
        Error::Capacity {
            what: "induced action".into(),
            limit: LIFT_MAX_DEGREE,
        }
    })?;
    let images = cs
        .action
        .iter()
        .zip(&cs.cocycle_words)
        .map(|(act, row)| {
            let mut img = vec![0u32; total];
            for (j, w) in row.iter().enumerate() {
                let fiber = m.eval(w)?;
                let target = act.apply(j) * n;
                for x in 0..n {
                    img[j * n + x] = (target + fiber.apply(x)) as u32;
                }
            }
            Ok(Perm::from_images_unchecked(img))
        })
        .collect::<Result<Vec<_>>>()?;
    MarkedMap::new(gamma, images)
}

/// Defect of a `Γ`-word under the induced map, computed fiberwise: the
/// average over cosets `j` of `d_H(σ(c(w, j)), id)`, where `c(w, j)` is the
/// cocycle word accumulated along `w`. A coset not returned to itself
/// contributes 1.
pub fn induced_defect_by_cosets(m: &MarkedMap, cs: &CosetStructure, w: &Word) -> Result<Rational> {
    let n = m.degree();
    let id = Perm::identity(n);
    let mut total = Rational::from_integer(0);
    for j in 0..cs.index {
        let mut cur = j;
        let mut pieces: Vec<Word> = Vec::with_capacity(w.len());
        for l in w.letters().iter().rev() {
            let act = &cs.action[l.gen as usize];
            if l.inverse {
                let prev = act.inverse().apply(cur);
                pieces.push(cs.cocycle_words[l.gen as usize][prev].inverse());
                cur = prev;
            } else {
                pieces.push(cs.cocycle_words[l.gen as usize][cur].clone());
                cur = act.apply(cur);
            }
        }
        if cur != j {
            total += Rational::from_integer(1);
            continue;
        }
        let word = pieces
            .iter()
            .rev()
            .fold(Word::default(), |acc, p| acc.concat(p));
        total += hamming(&m.eval(&word)?, &id)?;
    }
    Ok(total / Rational::from_integer(cs.index as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MarkedGroup;

    #[test]
    fn trivial_extra_factor_changes_nothing() {
        let a = Perm::cycle(4, &[0, 1, 2]).unwrap();
        let m = MarkedMap::new(MarkedGroup::free(1, "a"), vec![a]).unwrap();
        let one = FinGroup::cyclic(1).unwrap();
        let lifted = product_lift(&m, &one, &[0]).unwrap();
        assert_eq!(lifted, m);
    }

    #[test]
    fn lift_moves_every_point() {
        let m = MarkedMap::new(MarkedGroup::free(1, "a"), vec![Perm::identity(5)]).unwrap();
        let c3 = FinGroup::cyclic(3).unwrap();
        let lifted = product_lift(&m, &c3, &[1]).unwrap();
        assert_eq!(lifted.word_defect(&Word::power(0, 1)).unwrap(), Rational::from_integer(1));
        assert!(matches!(
            product_lift(&m, &FinGroup::cyclic(4).unwrap(), &[2]),
            Err(Error::NotSurjective { .. })
        ));
    }

    #[test]
    fn index_one_induction_is_identity() {
        let a = Perm::transposition(3, 0, 2).unwrap();
        let m = MarkedMap::new(MarkedGroup::free(1, "a"), vec![a]).unwrap();
        let out = induce_finite_index(&m, m.marked.clone(), &CosetStructure::trivial(1)).unwrap();
        assert_eq!(out.images, m.images);
    }

    #[test]
    fn section_must_be_normalized() {
        let m = MarkedMap::new(MarkedGroup::free(1, "a"), vec![Perm::identity(2)]).unwrap();
        let mut cs = CosetStructure::trivial(1);
        cs.section_words[0] = Word::power(0, 1);
        assert!(matches!(
            induce_finite_index(&m, m.marked.clone(), &cs),
            Err(Error::Precondition(_))
        ));
    }
}
