//! Homomorphisms out of finite and marked groups, and permutation actions.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FinGroup, MarkedGroup, Word};
use crate::{Error, Perm, Result};

/// Propagates generator images along every Cayley graph edge `x -> x s`.
/// Consistency on all edges is equivalent to the map being a homomorphism.
fn propagate<T: Clone + PartialEq>(
    src: &FinGroup,
    identity: T,
    gen_images: &[T],
    mul: impl Fn(&T, &T) -> T,
) -> std::result::Result<Vec<T>, String> {
    let gens = src.generators();
    let mut out: Vec<Option<T>> = vec![None; src.order()];
    out[0] = Some(identity);
    let mut queue = VecDeque::from([0u32]);
    while let Some(x) = queue.pop_front() {
        let ix = out[x as usize].clone().expect("visited");
        for (j, &s) in gens.iter().enumerate() {
            let y = src.mul(x, s);
            let iy = mul(&ix, &gen_images[j]);
            match &out[y as usize] {
                Some(prev) if *prev != iy => {
                    return Err(format!(
                        "image of {} disagrees along generator {j}",
                        src.label(y)
                    ))
                }
                Some(_) => {}
                None => {
                    out[y as usize] = Some(iy);
                    queue.push_back(y);
                }
            }
        }
    }
    out.into_iter()
        .map(|v| v.ok_or_else(|| "generators do not generate the source".to_string()))
        .collect()
}

/// An element-wise homomorphism between finite groups.
#[derive(Clone, Debug)]
pub struct GroupHom {
    pub source: Arc<FinGroup>,
    pub target: Arc<FinGroup>,
    pub image: Vec<u32>,
}

impl GroupHom {
    /// Extends images of `source.generators()` to a homomorphism.
    pub fn from_generator_images(
        source: Arc<FinGroup>,
        target: Arc<FinGroup>,
        images: &[u32],
    ) -> Result<Self> {
        if images.len() != source.generators().len() {
            return Err(Error::Arity {
                expected: source.generators().len(),
                got: images.len(),
            });
        }
        let image = propagate(&source, 0u32, images, |a, b| target.mul(*a, *b))
            .map_err(|relator| Error::NotAHomomorphism { relator })?;
        Ok(GroupHom {
            source,
            target,
            image,
        })
    }

    /// Wraps an explicit image table after checking the homomorphism law.
    pub fn from_table(source: Arc<FinGroup>, target: Arc<FinGroup>, image: Vec<u32>) -> Result<Self> {
        if image.len() != source.order() {
            return Err(Error::SizeMismatch {
                left: source.order(),
                right: image.len(),
            });
        }
        let h = GroupHom {
            source,
            target,
            image,
        };
        h.verify(0)?;
        Ok(h)
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.image[x as usize]
    }

    /// Checks `f(xy) = f(x)f(y)` on all pairs when there are at most 10⁴,
    /// otherwise on 10⁴ seeded random pairs.
    pub fn verify(&self, seed: u64) -> Result<()> {
        let n = self.source.order() as u32;
        let check = |x: u32, y: u32| -> Result<()> {
            let lhs = self.apply(self.source.mul(x, y));
            let rhs = self.target.mul(self.apply(x), self.apply(y));
            if lhs != rhs {
                return Err(Error::NotAHomomorphism {
                    relator: format!("f({x}*{y})"),
                });
            }
            Ok(())
        };
        if (n as u64) * (n as u64) <= 10_000 {
            for x in 0..n {
                for y in 0..n {
                    check(x, y)?;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                check(rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    pub fn image_size(&self) -> usize {
        let mut seen = vec![false; self.target.order()];
        self.image.iter().for_each(|&y| seen[y as usize] = true);
        seen.into_iter().filter(|&b| b).count()
    }

    pub fn is_surjective(&self) -> bool {
        self.image_size() == self.target.order()
    }

    pub fn is_injective(&self) -> bool {
        self.image_size() == self.source.order()
    }

    /// Elements of the kernel in index order.
    pub fn kernel(&self) -> Vec<u32> {
        (0..self.source.order() as u32)
            .filter(|&x| self.image[x as usize] == 0)
            .collect()
    }
}

/// A homomorphism from a finitely presented group onto (or into) a finite
/// group, stored by generator images.
#[derive(Clone, Debug)]
pub struct MarkedHom {
    pub marked: MarkedGroup,
    pub target: Arc<FinGroup>,
    pub images: Vec<u32>,
    pub surjective: bool,
}

impl MarkedHom {
    /// Checks every relator in the target; computes surjectivity by closure.
    pub fn new(marked: MarkedGroup, target: Arc<FinGroup>, images: Vec<u32>) -> Result<Self> {
        if images.len() != marked.generator_count() {
            return Err(Error::Arity {
                expected: marked.generator_count(),
                got: images.len(),
            });
        }
        if let Some(&bad) = images.iter().find(|&&x| x as usize >= target.order()) {
            return Err(Error::InvalidInput(format!("image {bad} out of range")));
        }
        for r in &marked.relators {
            if r.eval_in(&target, &images) != 0 {
                return Err(Error::NotAHomomorphism {
                    relator: marked.display_word(r),
                });
            }
        }
        let surjective = target.generates(&images);
        Ok(MarkedHom {
            marked,
            target,
            images,
            surjective,
        })
    }

    pub fn eval(&self, w: &Word) -> u32 {
        w.eval_in(&self.target, &self.images)
    }

    pub fn image_order(&self) -> usize {
        self.target.closure(&self.images).len()
    }

    pub fn require_surjective(&self) -> Result<()> {
        if self.surjective {
            Ok(())
        } else {
            Err(Error::NotSurjective {
                image: self.image_order(),
                order: self.target.order(),
            })
        }
    }
}

/// An action of a finite group by permutations of `{0..degree-1}`, stored
/// as the image of every group element.
#[derive(Clone, Debug)]
pub struct PermAction {
    pub group: Arc<FinGroup>,
    pub degree: usize,
    pub images: Vec<Perm>,
}

impl PermAction {
    /// Extends permutation images of `group.generators()` to an action,
    /// failing if they do not satisfy the group's relations.
    pub fn from_generator_images(group: Arc<FinGroup>, gen_images: &[Perm]) -> Result<Self> {
        let degree = gen_images.first().map_or(0, Perm::len);
        Self::with_degree(group, degree, gen_images)
    }

    fn with_degree(group: Arc<FinGroup>, degree: usize, gen_images: &[Perm]) -> Result<Self> {
        if gen_images.len() != group.generators().len() {
            return Err(Error::Arity {
                expected: group.generators().len(),
                got: gen_images.len(),
            });
        }
        if let Some(p) = gen_images.iter().find(|p| p.len() != degree) {
            return Err(Error::SizeMismatch {
                left: degree,
                right: p.len(),
            });
        }
        let images = propagate(&group, Perm::identity(degree), gen_images, |a, b| {
            a.compose_unchecked(b)
        })
        .map_err(Error::NotAnAction)?;
        Ok(PermAction {
            group,
            degree,
            images,
        })
    }

    /// Wraps per-element images after checking the action law exhaustively
    /// along generators.
    pub fn from_images(group: Arc<FinGroup>, images: Vec<Perm>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::SizeMismatch {
                left: group.order(),
                right: images.len(),
            });
        }
        let gens: Vec<Perm> = group
            .generators()
            .iter()
            .map(|&s| images[s as usize].clone())
            .collect();
        let degree = images.first().map_or(0, Perm::len);
        let action = Self::with_degree(group, degree, &gens)?;
        if action.images != images {
            return Err(Error::NotAnAction(
                "element images disagree with generator images".into(),
            ));
        }
        Ok(action)
    }

    pub fn image(&self, g: u32) -> &Perm {
        &self.images[g as usize]
    }

    pub fn act(&self, g: u32, x: usize) -> usize {
        self.images[g as usize].apply(x)
    }

    /// The same action transported along a bijection: `c ∘ π(g) ∘ c⁻¹`.
    pub fn conjugated(&self, c: &Perm) -> Result<Self> {
        let images = self
            .images
            .iter()
            .map(|p| p.conjugate_by(c))
            .collect::<Result<_>>()?;
        Ok(PermAction {
            group: Arc::clone(&self.group),
            degree: self.degree,
            images,
        })
    }

    /// `x -> g x` on the elements of `group`.
    pub fn left_regular(group: Arc<FinGroup>) -> Self {
        let images = (0..group.order() as u32)
            .map(|g| group.left_translation(g))
            .collect();
        PermAction {
            degree: group.order(),
            group,
            images,
        }
    }

    /// `x -> x g⁻¹` on the elements of `group`.
    pub fn right_regular(group: Arc<FinGroup>) -> Self {
        let images = (0..group.order() as u32)
            .map(|g| group.right_translation(g))
            .collect();
        PermAction {
            degree: group.order(),
            group,
            images,
        }
    }

    /// The trivial action on `degree` points.
    pub fn trivial(group: Arc<FinGroup>, degree: usize) -> Self {
        let images = vec![Perm::identity(degree); group.order()];
        PermAction {
            group,
            degree,
            images,
        }
    }

    /// Disjoint union: the second action's points are shifted past the first.
    pub fn disjoint_union(&self, other: &PermAction) -> Result<Self> {
        if !Arc::ptr_eq(&self.group, &other.group) && self.group.order() != other.group.order() {
            return Err(Error::SizeMismatch {
                left: self.group.order(),
                right: other.group.order(),
            });
        }
        let n = self.degree;
        let images = self
            .images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| {
                let img = a
                    .images()
                    .iter()
                    .copied()
                    .chain(b.images().iter().map(|&y| y + n as u32))
                    .collect();
                Perm::from_images_unchecked(img)
            })
            .collect();
        Ok(PermAction {
            group: Arc::clone(&self.group),
            degree: n + other.degree,
            images,
        })
    }
}
