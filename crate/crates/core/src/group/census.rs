//! Orbit decomposition of permutation actions, bucketed by the conjugacy
//! class of point stabilizers.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FinGroup, PermAction};
use crate::{Error, Perm, Result};

/// Largest group for which stabilizer conjugacy is tested by brute force.
pub const CENSUS_MAX_ORDER: usize = 4096;

/// Canonical name of a conjugacy class of subgroups: the lexicographically
/// smallest sorted element list among all conjugates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubgroupClass(pub Vec<u32>);

impl SubgroupClass {
    pub fn order(&self) -> usize {
        self.0.len()
    }
}

pub fn subgroup_class_key(g: &FinGroup, h: &[u32]) -> Result<SubgroupClass> {
    if g.order() > CENSUS_MAX_ORDER {
        return Err(Error::Capacity {
            what: "subgroup conjugacy test".into(),
            limit: CENSUS_MAX_ORDER,
        });
    }
    let mut best: Option<Vec<u32>> = None;
    let mut buf = Vec::with_capacity(h.len());
    for c in 0..g.order() as u32 {
        let ci = g.inv(c);
        buf.clear();
        buf.extend(h.iter().map(|&x| g.mul(g.mul(c, x), ci)));
        buf.sort_unstable();
        if best.as_ref().is_none_or(|b| buf < *b) {
            best = Some(buf.clone());
        }
    }
    Ok(SubgroupClass(best.unwrap_or_default()))
}

/// Orbits as sorted point lists, ordered by smallest point.
pub fn orbits(degree: usize, gens: &[Perm]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; degree];
    let mut out = vec![];
    for start in 0..degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start];
        let mut head = 0;
        while head < orbit.len() {
            let x = orbit[head];
            for p in gens {
                let y = p.apply(x);
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            head += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitInfo {
    pub points: Vec<usize>,
    /// Stabilizer of the smallest point of the orbit.
    pub stabilizer: Vec<u32>,
    pub class: SubgroupClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCensus {
    pub orbits: Vec<OrbitInfo>,
    pub counts: BTreeMap<SubgroupClass, usize>,
}

impl OrbitCensus {
    pub fn of_action(action: &PermAction) -> Result<Self> {
        let g = &action.group;
        let gens: Vec<Perm> = g
            .generators()
            .iter()
            .map(|&s| action.image(s).clone())
            .collect();
        let mut infos = vec![];
        let mut counts = BTreeMap::new();
        for points in orbits(action.degree, &gens) {
            let x = points[0];
            let stabilizer: Vec<u32> = (0..g.order() as u32)
                .filter(|&h| action.act(h, x) == x)
                .collect();
            let class = subgroup_class_key(g, &stabilizer)?;
            *counts.entry(class.clone()).or_insert(0) += 1;
            infos.push(OrbitInfo {
                points,
                stabilizer,
                class,
            });
        }
        Ok(OrbitCensus {
            orbits: infos,
            counts,
        })
    }

    /// Counts only, keyed by the class in a human-readable form.
    pub fn summary(&self) -> Vec<(usize, usize)> {
        self.counts.iter().map(|(k, v)| (k.order(), *v)).collect()
    }
}

/// Census of the action of `group` given by images of its generators.
pub fn orbit_type_census(group: Arc<FinGroup>, gen_images: &[Perm]) -> Result<OrbitCensus> {
    let action = PermAction::from_generator_images(group, gen_images)?;
    OrbitCensus::of_action(&action)
}
