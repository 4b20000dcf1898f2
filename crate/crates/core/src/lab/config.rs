use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::group::GroupSpec;
use crate::{Error, Rational, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Eigensolver tolerance for Kazhdan brackets.
    pub tolerance: f64,
    pub grid: GridConfig,
    pub caps: CapsConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Primes `p` for the `SL_2(Z/pZ)` families.
    pub flagship_primes: Vec<u32>,
    /// Density window as fractions, e.g. `["1/7", "1/6"]`.
    pub window: [String; 2],
    /// Extra quotients for Kazhdan brackets, generated by their standard generators.
    pub kazhdan_quotients: Vec<GroupSpec>,
    /// Randomized instances per rounding procedure.
    pub rounding_instances: usize,
    /// Point counts for the `Z²` oracle family.
    pub oracle_points: Vec<usize>,
    /// Include the 6-point toy family (cyclic base) in the oracle table.
    pub oracle_toy_family: bool,
    /// Random left translations sampled as exactly commuting witnesses.
    pub witness_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapsConfig {
    pub max_order: usize,
    pub table_max: usize,
    pub oracle_exhaustive: u64,
    pub closure_cap: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            tolerance: 1e-8,
            grid: GridConfig::default(),
            caps: CapsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            flagship_primes: vec![],
            window: ["1/7".into(), "1/6".into()],
            kazhdan_quotients: vec![],
            rounding_instances: 0,
            oracle_points: vec![],
            oracle_toy_family: false,
            witness_samples: 8,
        }
    }
}

impl Default for CapsConfig {
    fn default() -> Self {
        CapsConfig {
            max_order: 1 << 20,
            table_max: 4096,
            oracle_exhaustive: 10_000_000,
            closure_cap: 100_000,
        }
    }
}

fn parse_fraction(s: &str) -> Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| Error::Config(format!("cannot parse fraction {s:?}")))
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The four flagship primes with every table enabled.
    pub fn flagship() -> Self {
        ExperimentConfig {
            grid: GridConfig {
                flagship_primes: vec![7, 13, 19, 43],
                kazhdan_quotients: vec![GroupSpec::Cyclic(12), GroupSpec::Sl2(5)],
                rounding_instances: 20,
                oracle_points: vec![3, 4, 5],
                oracle_toy_family: true,
                ..GridConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    pub fn window(&self) -> Result<(Rational, Rational)> {
        let a = parse_fraction(&self.grid.window[0])?;
        let b = parse_fraction(&self.grid.window[1])?;
        Ok((a, b))
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.window()?;
        if !(Rational::from_integer(0) < a && a < b && b <= Rational::new(1, 2)) {
            return Err(Error::Config(format!(
                "window must satisfy 0 < alpha < beta <= 1/2, got [{a}, {b}]"
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        let c = &self.caps;
        if c.max_order == 0 || c.table_max == 0 || c.oracle_exhaustive == 0 || c.closure_cap == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        if let Some(p) = self.grid.flagship_primes.iter().find(|&&p| p < 3) {
            return Err(Error::Config(format!("flagship modulus {p} must be at least 3")));
        }
        if let Some(n) = self.grid.oracle_points.iter().find(|&&n| n == 0) {
            return Err(Error::Config(format!("oracle point count {n} must be positive")));
        }
        Ok(())
    }
}
