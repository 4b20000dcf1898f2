use super::FinGroup;
use crate::{Error, Result};

/// Membership mask for `h`, after checking it contains the identity and is
/// closed under products and inverses.
pub(crate) fn subgroup_mask(g: &FinGroup, h: &[u32]) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.order()];
    for &x in h {
        if x as usize >= g.order() {
            return Err(Error::NotASubgroup(format!("index {x} out of range")));
        }
        mask[x as usize] = true;
    }
    if !mask[0] {
        return Err(Error::NotASubgroup("missing identity".into()));
    }
    for &x in h {
        if !mask[g.inv(x) as usize] {
            return Err(Error::NotASubgroup(format!("inverse of {x} missing")));
        }
        for &y in h {
            if !mask[g.mul(x, y) as usize] {
                return Err(Error::NotASubgroup(format!("{x}*{y} missing")));
            }
        }
    }
    Ok(mask)
}

pub fn is_subgroup(g: &FinGroup, h: &[u32]) -> bool {
    subgroup_mask(g, h).is_ok()
}

/// One representative per left coset `gH`: the smallest index in the coset.
pub fn left_coset_reps(g: &FinGroup, h: &[u32]) -> Result<Vec<u32>> {
    subgroup_mask(g, h)?;
    let mut covered = vec![false; g.order()];
    let mut reps = Vec::with_capacity(g.order() / h.len().max(1));
    for x in 0..g.order() as u32 {
        if covered[x as usize] {
            continue;
        }
        reps.push(x);
        for &y in h {
            covered[g.mul(x, y) as usize] = true;
        }
    }
    Ok(reps)
}
