//! One randomized instance per call for each rounding procedure, reduced to
//! a table row.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instances::{almost_instance, commutant2_instance, commutant_instance, conjugacy_instance};
use crate::perm::rational_to_f64;
use crate::rounding::{
    commuting_extension, extract_conjugacy, nearest_right_translation, theorem_almost_pipeline,
    AlmostOptions,
};
use crate::spectral::{kazhdan_auto, SpectralOptions};
use crate::{Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    NearestTranslation,
    Conjugacy,
    CommutingExtension,
    AlmostAction,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::NearestTranslation,
        Suite::Conjugacy,
        Suite::CommutingExtension,
        Suite::AlmostAction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::NearestTranslation => "nearest-translation",
            Suite::Conjugacy => "conjugacy",
            Suite::CommutingExtension => "commuting-extension",
            Suite::AlmostAction => "almost-action",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingRow {
    pub suite: String,
    pub instance: usize,
    pub group: String,
    pub degree: usize,
    pub epsilon: String,
    pub epsilon_decimal: f64,
    /// The quantity the bound controls, as a fraction of the ground set.
    pub measured: String,
    pub measured_decimal: f64,
    pub bound: f64,
    pub holds: bool,
    pub status: String,
}

/// Deterministic per-instance seed.
pub fn instance_seed(seed: u64, suite: Suite, i: usize) -> u64 {
    let tag = Suite::ALL.iter().position(|&s| s == suite).expect("listed") as u64;
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(tag << 32)
        .wrapping_add(i as u64)
}

fn frac(r: Rational) -> (String, f64) {
    (r.to_string(), rational_to_f64(r))
}

pub fn run_instance(suite: Suite, seed: u64, i: usize) -> RoundingRow {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, suite, i));
    let row = match suite {
        Suite::NearestTranslation => nearest(&mut rng),
        Suite::Conjugacy => conjugacy(&mut rng),
        Suite::CommutingExtension => extension(&mut rng),
        Suite::AlmostAction => almost(&mut rng),
    };
    let mut row = row.unwrap_or_else(|e| RoundingRow {
        suite: String::new(),
        instance: 0,
        group: String::new(),
        degree: 0,
        epsilon: String::new(),
        epsilon_decimal: f64::NAN,
        measured: String::new(),
        measured_decimal: f64::NAN,
        bound: f64::NAN,
        holds: matches!(e, Error::OutOfRegime { .. }),
        status: match e {
            Error::OutOfRegime { .. } => format!("out-of-regime: {e}"),
            _ => format!("error: {e}"),
        },
    });
    row.suite = suite.name().into();
    row.instance = i;
    row
}

fn nearest(rng: &mut ChaCha8Rng) -> Result<RoundingRow> {
    let inst = commutant_instance(rng)?;
    let kappa = kazhdan_auto(&inst.group, &inst.s, &SpectralOptions::default())?.lower;
    let r = nearest_right_translation(&inst.group, &inst.s, &inst.phi, kappa)?;
    let (e, ed) = frac(r.defect);
    let (m, md) = frac(r.distance);
    Ok(RoundingRow {
        suite: String::new(),
        instance: 0,
        group: inst.group.name().into(),
        degree: inst.group.order(),
        epsilon: e,
        epsilon_decimal: ed,
        measured: m,
        measured_decimal: md,
        bound: 4.0 * ed / (kappa * kappa),
        holds: r.bound_holds,
        status: "ok".into(),
    })
}

fn conjugacy(rng: &mut ChaCha8Rng) -> Result<RoundingRow> {
    let inst = conjugacy_instance(rng)?;
    let r = extract_conjugacy(&inst.alpha1, &inst.alpha2)?;
    let n = inst.alpha1.degree;
    let worst = r.loss1.max(r.loss2).max(r.moved);
    let (e, ed) = frac(r.epsilon);
    let (m, md) = frac(Rational::new(worst as i64, n as i64));
    Ok(RoundingRow {
        suite: String::new(),
        instance: 0,
        group: inst.alpha1.group.name().into(),
        degree: n,
        epsilon: e,
        epsilon_decimal: ed,
        measured: m,
        measured_decimal: md,
        bound: 16.0 * ed,
        holds: r.bounds_hold && r.transitive_clause_holds,
        status: "ok".into(),
    })
}

fn extension(rng: &mut ChaCha8Rng) -> Result<RoundingRow> {
    let inst = commutant2_instance(rng)?;
    let r = commuting_extension(&inst.action, &inst.phi)?;
    let (e, ed) = frac(r.epsilon);
    let (m, md) = frac(r.distance);
    Ok(RoundingRow {
        suite: String::new(),
        instance: 0,
        group: inst.action.group.name().into(),
        degree: inst.action.degree,
        epsilon: e,
        epsilon_decimal: ed,
        measured: m,
        measured_decimal: md,
        bound: 32.0 * ed,
        holds: r.commutes && r.bound_holds,
        status: "ok".into(),
    })
}

fn almost(rng: &mut ChaCha8Rng) -> Result<RoundingRow> {
    let inst = almost_instance(rng)?;
    let n = inst.group.order();
    let name = inst.group.name().to_string();
    let r = theorem_almost_pipeline(
        inst.group,
        &inst.s,
        inst.y_size,
        &inst.k_gens,
        &AlmostOptions::default(),
    )?;
    let b = &r.bounds;
    let worst = b.x_minus_x1.max(b.x_minus_x2);
    let (e, ed) = frac(r.epsilon);
    let (m, md) = frac(Rational::new(worst as i64, n as i64));
    Ok(RoundingRow {
        suite: String::new(),
        instance: 0,
        group: name,
        degree: inst.y_size,
        epsilon: e,
        epsilon_decimal: ed,
        measured: m,
        measured_decimal: md,
        bound: b.bound1 / n as f64,
        holds: b.all_hold() && r.delta_is_hom,
        status: "ok".into(),
    })
}
