//! Run configuration: one JSON document per run.

use jostkit::potential::Tabulated;
use jostkit::quad::{linspace, logspace};
use jostkit::verify::VerifyGrid;
use jostkit::{Potential, ProblemSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Scatter,
    Spectral,
    Propagate,
    Certify,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Scatter => "scatter",
            Command::Spectral => "spectral",
            Command::Propagate => "propagate",
            Command::Certify => "certify",
            Command::Verify => "verify",
        }
    }
}

/// Explicit values or a generated grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { linspace: (f64, f64, usize) },
    Logspace { logspace: (f64, f64, usize) },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Linspace { linspace: (a, b, n) } => linspace(*a, *b, *n),
            Grid::Logspace { logspace: (a, b, n) } => logspace(*a, *b, *n),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Grid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub l: f64,
    /// preset string, or "tabulated(path)" with a two-column CSV relative to the config file
    pub potential: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// spectral amplitude cut-off for state evolution, relative to its peak
    #[serde(default = "default_amp_tol")]
    pub amp_tol: f64,
    /// largest k the state evolution may reach
    #[serde(default = "default_k_cap")]
    pub k_cap: f64,
}

fn default_amp_tol() -> f64 {
    1e-10
}

fn default_k_cap() -> f64 {
    400.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { amp_tol: default_amp_tol(), k_cap: default_k_cap() }
    }
}

/// Initial state x^{l+1} exp(-(x - center)^2 / width^2) for `propagate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub center: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_values: Option<Vec<f64>>,
    #[serde(default = "default_nk")]
    pub nk: usize,
    #[serde(default = "default_nx")]
    pub nx: usize,
}

fn default_nk() -> usize {
    VerifyGrid::default().nk
}

fn default_nx() -> usize {
    VerifyGrid::default().nx
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { l_values: None, nk: default_nk(), nx: default_nx() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub problem: Problem,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<State>,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError(format!("config JSON: {e}")))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks grids and tolerances against what `command` needs.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(ConfigError(format!("config is for '{}' but the command is '{}'", c.name(), command.name())));
            }
        }
        let l = self.problem.l;
        if !(l > -0.5) || !l.is_finite() {
            return Err(ConfigError(format!("problem.l must be finite and > -1/2, got {l}")));
        }
        let g = &self.grids;
        for (name, grid) in [("k", &g.k), ("x", &g.x), ("y", &g.y), ("t", &g.t), ("lambda", &g.lambda)] {
            if let Some(grid) = grid {
                check_grid(name, grid)?;
            }
        }
        let need = |name: &str, grid: &Option<Grid>| -> Result<(), ConfigError> {
            match grid {
                Some(_) => Ok(()),
                None => Err(ConfigError(format!("command '{}' needs grids.{name}", command.name()))),
            }
        };
        let positive = |name: &str, grid: &Option<Grid>| -> Result<(), ConfigError> {
            if grid.as_ref().is_some_and(|g| g.points()[0] <= 0.0) {
                return Err(ConfigError(format!("grids.{name} must be positive")));
            }
            Ok(())
        };
        match command {
            Command::Solve => {
                need("k", &g.k)?;
                need("x", &g.x)?;
                positive("x", &g.x)?;
            }
            Command::Scatter => {
                need("k", &g.k)?;
                positive("k", &g.k)?;
            }
            Command::Spectral => need("lambda", &g.lambda)?,
            Command::Propagate => {
                need("t", &g.t)?;
                need("x", &g.x)?;
                positive("x", &g.x)?;
                positive("y", &g.y)?;
                if let Some(t) = &g.t {
                    if t.points().contains(&0.0) {
                        return Err(ConfigError("grids.t must not contain 0".into()));
                    }
                }
                if let Some(s) = &self.state {
                    if !(s.width > 0.0 && s.center.is_finite() && s.width.is_finite()) {
                        return Err(ConfigError("state.width must be positive and state.center finite".into()));
                    }
                }
            }
            Command::Certify => {
                need("t", &g.t)?;
                need("x", &g.x)?;
                positive("t", &g.t)?;
                positive("x", &g.x)?;
                positive("y", &g.y)?;
                if g.t.as_ref().is_some_and(|t| t.points().len() < 2) {
                    return Err(ConfigError("certify needs at least two times".into()));
                }
            }
            Command::Verify => {
                if self.verify.nk < 2 || self.verify.nx < 2 {
                    return Err(ConfigError("verify.nk and verify.nx must be at least 2".into()));
                }
                if let Some(ls) = &self.verify.l_values {
                    if ls.is_empty() || ls.iter().any(|l| !(*l > -0.5) || !l.is_finite()) {
                        return Err(ConfigError("verify.l_values must be nonempty with every l > -1/2".into()));
                    }
                }
            }
        }
        let t = &self.tolerances;
        if !(t.amp_tol > 0.0 && t.amp_tol.is_finite()) || !(t.k_cap > 0.0 && t.k_cap.is_finite()) {
            return Err(ConfigError("tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn potential(&self, base: &Path) -> Result<Potential, ConfigError> {
        let s = self.problem.potential.trim();
        if let Some(file) = s.strip_prefix("tabulated(").and_then(|r| r.strip_suffix(')')) {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            let t = Tabulated::from_csv(file, &text).map_err(|e| ConfigError(e.to_string()))?;
            return Ok(Potential::Tabulated(t));
        }
        s.parse().map_err(|e: jostkit::Error| ConfigError(e.to_string()))
    }

    pub fn problem_spec(&self, base: &Path) -> Result<ProblemSpec, ConfigError> {
        ProblemSpec::new(self.problem.l, self.potential(base)?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn verify_grid(&self) -> VerifyGrid {
        VerifyGrid { nk: self.verify.nk, nx: self.verify.nx, seed: self.seed, ..VerifyGrid::default() }
    }
}

fn check_grid(name: &str, grid: &Grid) -> Result<(), ConfigError> {
    match grid {
        Grid::Linspace { linspace: (a, b, n) } | Grid::Logspace { logspace: (a, b, n) } => {
            if *n < 1 || !a.is_finite() || !b.is_finite() || (*n > 1 && !(b > a)) {
                return Err(ConfigError(format!("grids.{name}: need finite a < b and n >= 1")));
            }
            if matches!(grid, Grid::Logspace { .. }) && !(*a > 0.0) {
                return Err(ConfigError(format!("grids.{name}: logspace needs a > 0")));
            }
        }
        Grid::Values(v) => {
            if v.is_empty() {
                return Err(ConfigError(format!("grids.{name} is empty")));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ConfigError(format!("grids.{name} has a non-finite value")));
            }
        }
    }
    if grid.points().windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConfigError(format!("grids.{name} must be strictly increasing")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "command": "scatter",
        "problem": {"l": 0.25, "potential": "well(1,0,1)"},
        "grids": {"k": {"logspace": [0.1, 100.0, 7]}, "x": [0.1, 0.30000000000000004, 1e-7]},
        "seed": 12345
    }"#;

    #[test]
    fn round_trips_bit_exactly() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        let b = RunConfig::parse(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn rejects_non_increasing_grid() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        let any = RunConfig { command: None, ..a.clone() };
        let e = any.validate(Command::Solve).unwrap_err();
        assert!(e.0.contains("strictly increasing"), "{}", e.0);
        assert!(a.validate(Command::Scatter).is_err());
    }

    #[test]
    fn command_mismatch_is_a_config_error() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        assert!(a.validate(Command::Verify).unwrap_err().0.contains("config is for"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::parse(r#"{"problem": {"l": 0, "potential": "free"}, "grid": {}}"#).is_err());
    }
}
