//! Finitely presented groups given by generator count and relator words, and
//! assignments of permutations to their generators.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FinGroup;
use crate::perm::{hamming, Perm};
use crate::{Error, Rational, Result};

/// A generator or its inverse. Serialized as a signed integer `±(gen + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Letter {
    pub gen: u32,
    pub inverse: bool,
}

impl Letter {
    pub fn gen(gen: u32) -> Self {
        Letter {
            gen,
            inverse: false,
        }
    }

    pub fn inv(gen: u32) -> Self {
        Letter { gen, inverse: true }
    }

    pub fn inverted(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

impl TryFrom<i32> for Letter {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            0 => Err(Error::InvalidInput("letter 0 is not allowed".into())),
            v if v > 0 => Ok(Letter::gen(v as u32 - 1)),
            v => Ok(Letter::inv(v.unsigned_abs() - 1)),
        }
    }
}

impl From<Letter> for i32 {
    fn from(l: Letter) -> i32 {
        let g = l.gen as i32 + 1;
        if l.inverse {
            -g
        } else {
            g
        }
    }
}

/// A word in the generators, read left to right as a product.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn from_signed(v: &[i32]) -> Result<Self> {
        v.iter().map(|&x| Letter::try_from(x)).collect::<Result<_>>().map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }

    /// `a b a⁻¹ b⁻¹`.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    pub fn power(gen: u32, e: u32) -> Word {
        Word(vec![Letter::gen(gen); e as usize])
    }

    /// Index shift applied to every generator.
    pub fn shifted(&self, by: u32) -> Word {
        Word(
            self.0
                .iter()
                .map(|l| Letter {
                    gen: l.gen + by,
                    inverse: l.inverse,
                })
                .collect(),
        )
    }

    /// Free reduction: cancels adjacent `x x⁻¹` pairs.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverted()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn max_gen(&self) -> Option<u32> {
        self.0.iter().map(|l| l.gen).max()
    }

    /// Evaluates in a finite group given the image of each generator.
    pub fn eval_in(&self, g: &FinGroup, images: &[u32]) -> u32 {
        self.0.iter().fold(g.identity(), |acc, l| {
            let x = images[l.gen as usize];
            g.mul(acc, if l.inverse { g.inv(x) } else { x })
        })
    }

    /// Evaluates as a permutation: `w = l1 l2 .. lk` maps to
    /// `σ(l1) ∘ σ(l2) ∘ .. ∘ σ(lk)`.
    pub fn eval_perm(&self, images: &[Perm], n: usize) -> Perm {
        let mut acc = Perm::identity(n);
        for l in &self.0 {
            let p = &images[l.gen as usize];
            acc = if l.inverse {
                acc.compose_unchecked(&p.inverse())
            } else {
                acc.compose_unchecked(p)
            };
        }
        acc
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".into();
        }
        self.0
            .iter()
            .map(|l| {
                let name = names
                    .get(l.gen as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("g{}", l.gen));
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// A finite presentation: generator names and relator words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedGroup {
    pub name: String,
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

impl MarkedGroup {
    pub fn new(name: impl Into<String>, generators: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        let k = generators.len() as u32;
        if let Some(r) = relators.iter().find(|r| r.max_gen().is_some_and(|g| g >= k)) {
            return Err(Error::InvalidInput(format!(
                "relator {r} uses a generator outside 0..{k}"
            )));
        }
        Ok(MarkedGroup {
            name: name.into(),
            generators,
            relators,
        })
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Free group on `k` generators named `{prefix}0, {prefix}1, ..`.
    pub fn free(k: usize, prefix: &str) -> Self {
        MarkedGroup {
            name: format!("F{k}"),
            generators: (0..k).map(|i| format!("{prefix}{i}")).collect(),
            relators: vec![],
        }
    }

    /// `Z^d` with all pairwise commutators as relators.
    pub fn free_abelian(d: usize, prefix: &str) -> Self {
        let mut g = Self::free(d, prefix);
        g.name = format!("Z^{d}");
        g.relators = commutators_between(0..d as u32, 0..d as u32, true);
        g
    }

    pub fn cyclic(n: u32, name: &str) -> Self {
        MarkedGroup {
            name: format!("Z/{n}"),
            generators: vec![name.to_string()],
            relators: vec![Word::power(0, n)],
        }
    }

    /// Generators of `a` followed by those of `b`; relators of both.
    pub fn free_product(a: &MarkedGroup, b: &MarkedGroup) -> Self {
        let shift = a.generator_count() as u32;
        MarkedGroup {
            name: format!("({}) * ({})", a.name, b.name),
            generators: a.generators.iter().chain(&b.generators).cloned().collect(),
            relators: a
                .relators
                .iter()
                .cloned()
                .chain(b.relators.iter().map(|r| r.shifted(shift)))
                .collect(),
        }
    }

    /// The free product with every commutator `[x, y]` (x from `a`, y from
    /// `b`) added.
    pub fn direct_product(a: &MarkedGroup, b: &MarkedGroup) -> Self {
        let mut g = Self::free_product(a, b);
        g.name = format!("({}) x ({})", a.name, b.name);
        let ka = a.generator_count() as u32;
        let kb = b.generator_count() as u32;
        g.relators
            .extend(commutators_between(0..ka, ka..ka + kb, false));
        g
    }

    pub fn eval_perm(&self, word: &Word, images: &[Perm]) -> Perm {
        let n = images.first().map_or(0, Perm::len);
        word.eval_perm(images, n)
    }

    pub fn display_word(&self, w: &Word) -> String {
        w.display_with(&self.generators)
    }
}

fn commutators_between(
    a: std::ops::Range<u32>,
    b: std::ops::Range<u32>,
    upper_only: bool,
) -> Vec<Word> {
    let mut out = vec![];
    for x in a {
        for y in b.clone() {
            if upper_only && y <= x {
                continue;
            }
            out.push(Word::commutator(
                &Word(vec![Letter::gen(x)]),
                &Word(vec![Letter::gen(y)]),
            ));
        }
    }
    out
}

/// An assignment of a permutation of `{0..n-1}` to each generator of a
/// marked group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedMap {
    pub marked: MarkedGroup,
    pub images: Vec<Perm>,
}

impl MarkedMap {
    pub fn new(marked: MarkedGroup, images: Vec<Perm>) -> Result<Self> {
        if images.len() != marked.generator_count() {
            return Err(Error::Arity {
                expected: marked.generator_count(),
                got: images.len(),
            });
        }
        if let Some(n) = images.first().map(Perm::len) {
            if n == 0 {
                return Err(Error::InvalidInput("empty ground set".into()));
            }
            if let Some(p) = images.iter().find(|p| p.len() != n) {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: p.len(),
                });
            }
        }
        Ok(MarkedMap { marked, images })
    }

    pub fn degree(&self) -> usize {
        self.images.first().map_or(0, Perm::len)
    }

    pub fn eval(&self, w: &Word) -> Result<Perm> {
        if let Some(g) = w.max_gen().filter(|&g| g as usize >= self.images.len()) {
            return Err(Error::InvalidInput(format!("generator {g} out of range")));
        }
        Ok(w.eval_perm(&self.images, self.degree()))
    }

    /// `d_H(w(σ), id)` for a word `w`.
    pub fn word_defect(&self, w: &Word) -> Result<Rational> {
        let p = self.eval(w)?;
        hamming(&p, &Perm::identity(p.len()))
    }

    /// Defect of every relator, in relator order.
    pub fn relator_defects(&self) -> Result<Vec<Rational>> {
        self.marked
            .relators
            .iter()
            .map(|r| self.word_defect(r))
            .collect()
    }

    pub fn max_relator_defect(&self) -> Result<Rational> {
        Ok(self
            .relator_defects()?
            .into_iter()
            .max()
            .unwrap_or_else(|| Rational::from_integer(0)))
    }

    pub fn is_homomorphism(&self) -> Result<bool> {
        Ok(self.relator_defects()?.iter().all(|d| *d == Rational::from_integer(0)))
    }
}
