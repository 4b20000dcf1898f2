//! Experiment harness: brute-force oracles, randomized rounding suites and
//! the config-driven grid run.

mod config;
pub mod instances;
pub mod oracle;
pub mod suites;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CapsConfig, ExperimentConfig, GridConfig, OutputConfig};
pub use oracle::{
    nearest_homomorphism_bruteforce, stability_defect_table, z2_perturbed, DefectRow, OracleCaps,
    OracleResult,
};
pub use suites::{RoundingRow, Suite};

use crate::asymhom::{
    build_tech2, commuting_witnesses, defect_report, distance_floor_to_commuting,
    flagship_bitranslation, BiTranslationAction, CommutingWitness, Tech2Summary,
};
use crate::group::{MarkedGroup, MarkedHom};
use crate::perm::rational_to_f64;
use crate::spectral::{kazhdan_auto, KazhdanBracket, SpectralOptions};
use crate::{Error, FinGroup, GroupCaps, Rational, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KazhdanRow {
    pub quotient: String,
    pub order: usize,
    pub generators: usize,
    pub method: String,
    pub lower: String,
    pub upper: String,
    pub lambda1: String,
    pub iterations: usize,
    pub status: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub p: u32,
    pub order: usize,
    pub status: String,
    pub b_size: usize,
    pub b_density: String,
    pub b_density_decimal: f64,
    pub a_size: usize,
    pub a_density: String,
    pub a_density_decimal: f64,
    pub max_relator_defect: String,
    pub curve_max: String,
    pub curve_max_decimal: f64,
    pub defect_at_least_1_126: bool,
    pub closed_form_agrees: bool,
    pub floor: String,
    pub floor_decimal: f64,
    pub floor_at_least_1_252: bool,
    pub min_witness_distance: String,
    pub witnesses_above_floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub instance: String,
    pub degree: usize,
    pub generators: usize,
    pub relator_defect: String,
    pub relator_defect_decimal: f64,
    pub distance: String,
    pub distance_decimal: f64,
    pub exhaustive: bool,
    pub search_space: u64,
    pub status: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FamilyRecord {
    p: u32,
    summary: Tech2Summary,
    kazhdan: Option<KazhdanBracket>,
    relator_defects: Vec<crate::asymhom::WordDefect>,
    commutator_curve: Vec<crate::asymhom::CurvePoint>,
    curve_max: Rational,
    floor: Rational,
    witnesses: Vec<CommutingWitness>,
}

/// What a run produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub instances: usize,
    /// Instances that ended in an error other than an expected regime rejection.
    pub failures: Vec<String>,
    pub violations: usize,
}

fn decimal(x: f64) -> String {
    format!("{x:.12}")
}

fn kazhdan_row(label: String, g: &FinGroup, s: &[u32], opts: &SpectralOptions) -> (KazhdanRow, Option<KazhdanBracket>) {
    match kazhdan_auto(g, s, opts) {
        Ok(k) => (
            KazhdanRow {
                quotient: label,
                order: g.order(),
                generators: s.len(),
                method: format!("{:?}", k.method),
                lower: decimal(k.lower),
                upper: decimal(k.upper),
                lambda1: decimal(k.lambda1),
                iterations: k.iterations,
                status: "ok".into(),
            },
            Some(k),
        ),
        Err(e) => (
            KazhdanRow {
                quotient: label,
                order: g.order(),
                generators: s.len(),
                method: String::new(),
                lower: String::new(),
                upper: String::new(),
                lambda1: String::new(),
                iterations: 0,
                status: format!("error: {e}"),
            },
            None,
        ),
    }
}

fn family_instance(
    p: u32,
    base: Result<BiTranslationAction>,
    cfg: &ExperimentConfig,
    window: (Rational, Rational),
    spectral: &SpectralOptions,
) -> (Option<KazhdanRow>, FamilyRow, Option<FamilyRecord>) {
    let mut row = FamilyRow {
        p,
        ..FamilyRow::default()
    };
    let base = match base {
        Ok(b) => b,
        Err(e) => {
            row.status = format!("error: {e}");
            return (None, row, None);
        }
    };
    row.order = base.x.order();
    let (krow, bracket) = kazhdan_row(format!("SL2(Z/{p}Z)"), &base.x, &base.p.images, spectral);
    let fam = match build_tech2(base, window.0, window.1, cfg.seed) {
        Ok(f) => f,
        Err(e) => {
            row.status = match e {
                Error::WindowEmpty { .. } => format!("window-empty: {e}"),
                _ => format!("error: {e}"),
            };
            return (Some(krow), row, None);
        }
    };
    let result = (|| -> Result<FamilyRecord> {
        let m = fam.marked_map()?;
        let report = defect_report(&m, Some(&fam))?;
        let curve = report.commutator_curve.clone().unwrap_or_default();
        let curve_max = report.curve_max.unwrap_or_else(|| Rational::from_integer(0));
        let floor = distance_floor_to_commuting(&fam);
        let witnesses = commuting_witnesses(&fam, cfg.grid.witness_samples, cfg.seed);
        row.closed_form_agrees = report.closed_form_agrees.unwrap_or(false);
        row.max_relator_defect = report
            .relator_defects
            .iter()
            .map(|d| d.defect)
            .max()
            .unwrap_or_else(|| Rational::from_integer(0))
            .to_string();
        Ok(FamilyRecord {
            p,
            summary: fam.summary(),
            kazhdan: bracket,
            relator_defects: report.relator_defects,
            commutator_curve: curve,
            curve_max,
            floor,
            witnesses,
        })
    })();
    match result {
        Ok(rec) => {
            let s = &rec.summary;
            row.b_size = s.b_size;
            row.b_density = s.b_density.to_string();
            row.b_density_decimal = rational_to_f64(s.b_density);
            row.a_size = s.a_size;
            row.a_density = s.a_density.to_string();
            row.a_density_decimal = rational_to_f64(s.a_density);
            row.curve_max = rec.curve_max.to_string();
            row.curve_max_decimal = rational_to_f64(rec.curve_max);
            row.defect_at_least_1_126 = rec.curve_max >= Rational::new(1, 126);
            row.floor = rec.floor.to_string();
            row.floor_decimal = rational_to_f64(rec.floor);
            row.floor_at_least_1_252 = rec.floor >= Rational::new(1, 252);
            let min_w = rec.witnesses.iter().map(|w| w.distance).min();
            row.min_witness_distance = min_w.map(|r| r.to_string()).unwrap_or_default();
            row.witnesses_above_floor = min_w.is_none_or(|d| d >= rec.floor);
            row.status = "ok".into();
            (Some(krow), row, Some(rec))
        }
        Err(e) => {
            row.status = format!("error: {e}");
            (Some(krow), row, None)
        }
    }
}

/// The 6-point toy family: `Z` acting on `Z/6Z` by left and right
/// translation by 1.
pub fn toy_family_map(window: (Rational, Rational), seed: u64) -> Result<crate::MarkedMap> {
    let x = Arc::new(FinGroup::cyclic(6)?);
    let p = MarkedHom::new(MarkedGroup::free(1, "s"), Arc::clone(&x), vec![1])?;
    let q = MarkedHom::new(MarkedGroup::free(1, "l"), x, vec![1])?;
    build_tech2(BiTranslationAction::new(p, q)?, window.0, window.1, seed)?.marked_map()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured grid and writes its artifacts into `out`. Instance
/// failures are recorded, not raised.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let window = cfg.window()?;
    fs::create_dir_all(out)?;
    let spectral = SpectralOptions {
        tol: cfg.tolerance,
        seed: cfg.seed,
        ..SpectralOptions::default()
    };
    let caps = GroupCaps {
        max_order: cfg.caps.max_order,
        table_max: cfg.caps.table_max,
    };
    let mut report = RunReport::default();

    // Tech2 families over SL2(Z/pZ), with their Kazhdan brackets
    let families: Vec<_> = cfg
        .grid
        .flagship_primes
        .par_iter()
        .map(|&p| family_instance(p, flagship_bitranslation(p), cfg, window, &spectral))
        .collect();
    let mut kazhdan_rows: Vec<KazhdanRow> = families.iter().filter_map(|f| f.0.clone()).collect();
    let extra: Vec<(KazhdanRow, Option<KazhdanBracket>)> = cfg
        .grid
        .kazhdan_quotients
        .par_iter()
        .map(|spec| match spec.build(&caps) {
            Ok(g) => kazhdan_row(spec.to_string(), &g, g.generators(), &spectral),
            Err(e) => (
                KazhdanRow {
                    quotient: spec.to_string(),
                    order: 0,
                    generators: 0,
                    method: String::new(),
                    lower: String::new(),
                    upper: String::new(),
                    lambda1: String::new(),
                    iterations: 0,
                    status: format!("error: {e}"),
                },
                None,
            ),
        })
        .collect();
    kazhdan_rows.extend(extra.into_iter().map(|e| e.0));
    let family_rows: Vec<FamilyRow> = families.iter().map(|f| f.1.clone()).collect();

    // rounding suites
    let rounding_rows: Vec<RoundingRow> = Suite::ALL
        .iter()
        .flat_map(|&s| (0..cfg.grid.rounding_instances).map(move |i| (s, i)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(s, i)| suites::run_instance(s, cfg.seed, i))
        .collect();

    // oracle table
    let oracle_caps = OracleCaps {
        exhaustive_cap: cfg.caps.oracle_exhaustive,
        seed: cfg.seed,
        ..OracleCaps::default()
    };
    let mut oracle_inputs: Vec<(String, Result<crate::MarkedMap>)> = cfg
        .grid
        .oracle_points
        .iter()
        .map(|&n| (format!("z2-n{n}"), z2_perturbed(n, 1, (0, n / 2))))
        .collect();
    if cfg.grid.oracle_toy_family {
        oracle_inputs.push(("toy-cyclic6".into(), toy_family_map(window, cfg.seed)));
    }
    let oracle_rows: Vec<OracleRow> = oracle_inputs
        .par_iter()
        .map(|(name, m)| {
            let res = m.as_ref().map_err(Clone::clone).and_then(|m| {
                let r = nearest_homomorphism_bruteforce(m, &oracle_caps)?;
                Ok((m.degree(), m.marked.generator_count(), m.max_relator_defect()?, r))
            });
            match res {
                Ok((degree, k, defect, r)) => OracleRow {
                    instance: name.clone(),
                    degree,
                    generators: k,
                    relator_defect: defect.to_string(),
                    relator_defect_decimal: rational_to_f64(defect),
                    distance: r.max_distance.to_string(),
                    distance_decimal: rational_to_f64(r.max_distance),
                    exhaustive: r.exhaustive,
                    search_space: r.search_space_size,
                    status: "ok".into(),
                },
                Err(e) => OracleRow {
                    instance: name.clone(),
                    degree: 0,
                    generators: 0,
                    relator_defect: String::new(),
                    relator_defect_decimal: f64::NAN,
                    distance: String::new(),
                    distance_decimal: f64::NAN,
                    exhaustive: false,
                    search_space: 0,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();

    // artifacts, written serially
    let tables: [(&str, bool); 4] = [
        ("kazhdan.csv", !kazhdan_rows.is_empty()),
        ("families.csv", !family_rows.is_empty()),
        ("rounding.csv", !rounding_rows.is_empty()),
        ("oracle.csv", !oracle_rows.is_empty()),
    ];
    for (name, present) in tables {
        if !present {
            continue;
        }
        let path = out.join(name);
        match name {
            "kazhdan.csv" => write_csv(&path, &kazhdan_rows)?,
            "families.csv" => write_csv(&path, &family_rows)?,
            "rounding.csv" => write_csv(&path, &rounding_rows)?,
            _ => write_csv(&path, &oracle_rows)?,
        }
        report.files.push(path);
    }
    let records: Vec<&FamilyRecord> = families.iter().filter_map(|f| f.2.as_ref()).collect();
    if !records.is_empty() {
        fs::create_dir_all(out.join("instances"))?;
        for rec in &records {
            let path = out.join("instances").join(format!("family_p{}.json", rec.p));
            fs::write(&path, serde_json::to_string_pretty(rec)?)?;
            report.files.push(path);
        }
    }

    report.instances = kazhdan_rows.len() + family_rows.len() + rounding_rows.len() + oracle_rows.len();
    let failed = |status: &str| status.starts_with("error");
    report.failures.extend(kazhdan_rows.iter().filter(|r| failed(&r.status)).map(|r| format!("kazhdan {}: {}", r.quotient, r.status)));
    report.failures.extend(family_rows.iter().filter(|r| failed(&r.status)).map(|r| format!("family p={}: {}", r.p, r.status)));
    report.failures.extend(rounding_rows.iter().filter(|r| failed(&r.status)).map(|r| format!("{} #{}: {}", r.suite, r.instance, r.status)));
    report.failures.extend(oracle_rows.iter().filter(|r| failed(&r.status)).map(|r| format!("oracle {}: {}", r.instance, r.status)));
    report.violations = rounding_rows.iter().filter(|r| !r.holds).count()
        + family_rows
            .iter()
            .filter(|r| r.status == "ok")
            .filter(|r| !(r.defect_at_least_1_126 && r.closed_form_agrees && r.floor_at_least_1_252 && r.witnesses_above_floor))
            .count();

    let summary = render_summary(cfg, &kazhdan_rows, &family_rows, &rounding_rows, &oracle_rows, &report);
    let path = out.join("summary.txt");
    fs::write(&path, summary)?;
    report.files.push(path);
    Ok(report)
}

fn render_summary(
    cfg: &ExperimentConfig,
    kazhdan: &[KazhdanRow],
    families: &[FamilyRow],
    rounding: &[RoundingRow],
    oracle: &[OracleRow],
    report: &RunReport,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "permstab run, seed {}", cfg.seed);
    let _ = writeln!(s, "window [{}, {}]", cfg.grid.window[0], cfg.grid.window[1]);
    let _ = writeln!(s, "instances: {}, failures: {}, violations: {}", report.instances, report.failures.len(), report.violations);
    if !kazhdan.is_empty() {
        let _ = writeln!(s, "\nKazhdan brackets");
        for r in kazhdan {
            let _ = writeln!(s, "  {} (order {}): [{}, {}] {} {}", r.quotient, r.order, r.lower, r.upper, r.method, r.status);
        }
    }
    if !families.is_empty() {
        let _ = writeln!(s, "\nFamilies over SL2(Z/pZ)");
        for r in families {
            if r.status == "ok" {
                let _ = writeln!(
                    s,
                    "  p={}: |X|={} |B|/|X|={} |A|/|X|={} max commutator defect={} (>= 1/126: {}) closed form agrees: {} floor={} (>= 1/252: {}) witnesses above floor: {}",
                    r.p, r.order, r.b_density, r.a_density, r.curve_max, r.defect_at_least_1_126, r.closed_form_agrees, r.floor, r.floor_at_least_1_252, r.witnesses_above_floor
                );
            } else {
                let _ = writeln!(s, "  p={}: {}", r.p, r.status);
            }
        }
        let _ = writeln!(s, "  Note: asymptotic non-stability cannot be observed on finitely many quotients.");
        let _ = writeln!(s, "  The distance floor to exactly commuting permutations, together with the");
        let _ = writeln!(s, "  commutator defect bound above, is reported as a property-based substitute.");
    }
    if !rounding.is_empty() {
        let _ = writeln!(s, "\nRounding suites");
        for suite in Suite::ALL {
            let rows: Vec<&RoundingRow> = rounding.iter().filter(|r| r.suite == suite.name()).collect();
            let regime = rows.iter().filter(|r| r.status.starts_with("out-of-regime")).count();
            let errors = rows.iter().filter(|r| r.status.starts_with("error")).count();
            let bad = rows.iter().filter(|r| !r.holds).count();
            let _ = writeln!(s, "  {}: {} instances, {} violations, {} out of regime, {} errors", suite.name(), rows.len(), bad, regime, errors);
        }
    }
    if !oracle.is_empty() {
        let _ = writeln!(s, "\nNearest-homomorphism oracle");
        for r in oracle {
            let _ = writeln!(s, "  {}: relator defect {} -> distance {} ({})", r.instance, r.relator_defect, r.distance, if r.exhaustive { "exhaustive" } else { "local search" });
        }
        let _ = writeln!(s, "  Note: these pairs are finite evidence for the defect/distance relation;");
        let _ = writeln!(s, "  no finite table certifies stability.");
    }
    if !report.failures.is_empty() {
        let _ = writeln!(s, "\nFailures");
        for f in &report.failures {
            let _ = writeln!(s, "  {f}");
        }
    }
    s
}
