use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use permstab::asymhom::{defect_report, flagship_family};
use permstab::group::GroupSpec;
use permstab::lab::oracle::z2_perturbed;
use permstab::lab::{nearest_homomorphism_bruteforce, run_experiment, ExperimentConfig, OracleCaps};
use permstab::rounding::{theorem_almost_pipeline, AlmostOptions};
use permstab::spectral::{kazhdan_auto, SpectralOptions};
use permstab::{Error, MarkedMap, Perm, Rational};
use serde_json::json;

#[derive(Parser)]
#[command(name = "permstab", version, about = "Permutation stability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified Kazhdan constant bracket for a finite group.
    Kazhdan {
        /// Group spec, e.g. "sl2(5)" or "cyclic(4) x cyclic(6)".
        group: String,
        /// Generating set as element indices (default: the group's generators).
        #[arg(long, value_delimiter = ',')]
        gens: Option<Vec<u32>>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Build the SL2(p) family with |B|/|X| in the window.
    BuildFamily {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value = "1/7")]
        alpha: String,
        #[arg(long, default_value = "1/6")]
        beta: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the marked map (generator images) as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relator defects of a marked map, or of the SL2(p) family with its commutator curve.
    Defect {
        #[arg(long, conflicts_with = "map", required_unless_present = "map")]
        p: Option<u32>,
        /// Marked map JSON as written by build-family.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Round an almost-action to an exact action (JSON instance in, JSON result out).
    Round {
        /// {"group": spec, "y_size": n, "k_gens": [[images]..], "s": [..] optional}
        instance: PathBuf,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Nearest homomorphism to a marked map by exhaustive or local search.
    Oracle {
        #[arg(long, conflicts_with = "z2", required_unless_present = "z2")]
        map: Option<PathBuf>,
        /// Perturbed Z^2 instance on this many points.
        #[arg(long)]
        z2: Option<usize>,
        #[arg(long, default_value_t = 1e7)]
        cap: f64,
        #[arg(long)]
        no_fallback: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a TOML-configured experiment grid and write CSV tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn fraction(s: &str) -> Result<Rational> {
    s.parse().map_err(|_| anyhow::anyhow!("cannot parse fraction {s:?}"))
}

fn read_map(path: &Path) -> Result<MarkedMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(serde::Deserialize)]
struct RoundInstance {
    group: String,
    y_size: usize,
    k_gens: Vec<Vec<u32>>,
    s: Option<Vec<u32>>,
}

fn kazhdan(group: &str, gens: Option<Vec<u32>>, tol: f64) -> Result<()> {
    let g = group.parse::<GroupSpec>()?.build(&Default::default())?;
    let s = gens.unwrap_or_else(|| g.generators().to_vec());
    let opts = SpectralOptions { tol, ..SpectralOptions::default() };
    let b = kazhdan_auto(&g, &s, &opts)?;
    print(&json!({ "group": g.name(), "order": g.order(), "generators": s, "bracket": b }))
}

fn round(path: &Path, kappa: Option<f64>) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst: RoundInstance = serde_json::from_str(&text)?;
    let g = Arc::new(inst.group.parse::<GroupSpec>()?.build(&Default::default())?);
    let s = inst.s.unwrap_or_else(|| (1..g.order() as u32).collect());
    let k_gens = inst
        .k_gens
        .into_iter()
        .map(Perm::from_images)
        .collect::<permstab::Result<Vec<_>>>()?;
    let opts = AlmostOptions { kappa_lower: kappa, ..AlmostOptions::default() };
    match theorem_almost_pipeline(g, &s, inst.y_size, &k_gens, &opts) {
        Ok(r) => print(&r),
        Err(e @ Error::OutOfRegime { .. }) => print(&json!({ "status": "out-of-regime", "detail": e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

fn run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExitCode> {
    let cfg = fs::read_to_string(config)
        .map_err(|e| Error::Config(format!("{}: {e}", config.display())))
        .and_then(|text| ExperimentConfig::from_toml_str(&text));
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Ok(ExitCode::from(1));
        }
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let Some(out) = out.or_else(|| cfg.output.dir.clone()) else {
        eprintln!("config error: no output directory (use --out or [output] dir)");
        return Ok(ExitCode::from(1));
    };
    let report = run_experiment(&cfg, &out)?;
    println!(
        "{} instances, {} failures, {} violations; tables in {}",
        report.instances,
        report.failures.len(),
        report.violations,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Kazhdan { group, gens, tol } => kazhdan(&group, gens, tol)?,
        Command::BuildFamily { p, alpha, beta, seed, out } => {
            let fam = flagship_family(p, fraction(&alpha)?, fraction(&beta)?, seed)?;
            if let Some(out) = out {
                fs::write(&out, serde_json::to_string(&fam.marked_map()?)?)?;
            }
            print(&fam.summary())?;
        }
        Command::Defect { p, map, seed } => match (p, map) {
            (Some(p), _) => {
                let fam = flagship_family(p, Rational::new(1, 7), Rational::new(1, 6), seed)?;
                print(&defect_report(&fam.marked_map()?, Some(&fam))?)?;
            }
            (None, Some(path)) => print(&defect_report(&read_map(&path)?, None)?)?,
            (None, None) => bail!("need --p or --map"),
        },
        Command::Round { instance, kappa } => round(&instance, kappa)?,
        Command::Oracle { map, z2, cap, no_fallback, seed } => {
            let m = match (map, z2) {
                (Some(path), _) => read_map(&path)?,
                (None, Some(n)) => z2_perturbed(n, 1, (0, n / 2))?,
                (None, None) => bail!("need --map or --z2"),
            };
            let caps = OracleCaps {
                exhaustive_cap: cap as u64,
                allow_fallback: !no_fallback,
                seed,
                ..OracleCaps::default()
            };
            print(&nearest_homomorphism_bruteforce(&m, &caps)?)?;
        }
        Command::Run { config, seed, out } => return run(&config, seed, out),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
