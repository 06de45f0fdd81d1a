//! Flat experiment configuration: TOML file, then command-line overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fbxlab::energy::SmoothingSchedule;
use fbxlab::mesh::{Grid, ProblemParams};
use fbxlab::monotonicity::default_radii;
use serde::Deserialize;

use crate::CliError;

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub a: Option<f64>,
    pub lambda_plus: Option<f64>,
    pub lambda_minus: Option<f64>,
    pub grid_n: Option<usize>,
    pub bc: Option<String>,
    pub eps_start: Option<f64>,
    pub eps_end: Option<f64>,
    pub eps_factor: Option<f64>,
    pub radii: Option<String>,
    pub x0: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))
    }

    /// Values set in `over` replace those in `self`.
    pub fn merge(self, over: FileConfig) -> Self {
        Self {
            a: over.a.or(self.a),
            lambda_plus: over.lambda_plus.or(self.lambda_plus),
            lambda_minus: over.lambda_minus.or(self.lambda_minus),
            grid_n: over.grid_n.or(self.grid_n),
            bc: over.bc.or(self.bc),
            eps_start: over.eps_start.or(self.eps_start),
            eps_end: over.eps_end.or(self.eps_end),
            eps_factor: over.eps_factor.or(self.eps_factor),
            radii: over.radii.or(self.radii),
            x0: over.x0.or(self.x0),
            seed: over.seed.or(self.seed),
            output: over.output.or(self.output),
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: ProblemParams,
    pub grid: Grid,
    pub bc: String,
    pub schedule: SmoothingSchedule,
    pub radii: RadiiSpec,
    pub x0: f64,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiiSpec {
    Default,
    List(Vec<f64>),
}

impl RadiiSpec {
    fn parse(s: &str) -> Result<Self, CliError> {
        if s.trim() == "default" {
            return Ok(Self::Default);
        }
        let list = parse_list(s, "radii")?;
        if list.is_empty() || list.iter().any(|r| !(*r > 0.0)) || list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage(format!("radii '{s}' must be positive and increasing")));
        }
        Ok(Self::List(list))
    }

    pub fn resolve(&self, grid: &Grid) -> Vec<f64> {
        match self {
            Self::Default => default_radii(grid.h()),
            Self::List(l) => l.clone(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Default => "default".into(),
            Self::List(l) => l.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number '{t}' in {what}")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_file_config(c: &FileConfig, default_output: PathBuf) -> Result<Self, CliError> {
        let a = c.a.unwrap_or(0.0);
        let params = ProblemParams::new(a, c.lambda_plus.unwrap_or(1.0), c.lambda_minus.unwrap_or(1.0))?;
        let grid = Grid::new(c.grid_n.unwrap_or(129))?;
        let default = SmoothingSchedule::default_for(&grid);
        let schedule = SmoothingSchedule::new(
            c.eps_start.unwrap_or(default.eps_start),
            c.eps_end.unwrap_or(default.eps_end),
            c.eps_factor.unwrap_or(default.factor),
        )?;
        let radii = match &c.radii {
            Some(s) => RadiiSpec::parse(s)?,
            None => RadiiSpec::Default,
        };
        let x0 = c.x0.unwrap_or(0.0);
        if !(x0.abs() < 1.0) {
            return Err(CliError::Usage(format!("x0 = {x0} must lie in (-1, 1)")));
        }
        Ok(Self {
            params,
            grid,
            bc: c.bc.clone().unwrap_or_else(|| "linear".into()),
            schedule,
            radii,
            x0,
            seed: c.seed.unwrap_or(0),
            output: c.output.clone().unwrap_or(default_output),
        })
    }

    /// Comment block echoing every parameter of the computation. The output
    /// location is left out so that reruns elsewhere produce identical files.
    pub fn header(&self, command: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# fbxlab {} {command}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(
            s,
            "# a={} lambda_plus={} lambda_minus={} grid_n={} bc={}",
            self.params.a, self.params.lambda_plus, self.params.lambda_minus, self.grid.nx, self.bc
        );
        let _ = writeln!(
            s,
            "# eps_start={} eps_end={} eps_factor={} radii={} x0={} seed={}",
            self.schedule.eps_start,
            self.schedule.eps_end,
            self.schedule.factor,
            self.radii.describe(),
            self.x0,
            self.seed
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = toml::from_str::<FileConfig>("a = 0.1\nlamda = 2\n").unwrap_err();
        assert!(err.message().contains("lamda"), "{}", err.message());
    }

    #[test]
    fn overrides_win() {
        let file: FileConfig = toml::from_str("a = 0.1\ngrid_n = 33\n").unwrap();
        let over = FileConfig {
            a: Some(0.4),
            ..Default::default()
        };
        let c = file.merge(over);
        assert_eq!(c.a, Some(0.4));
        assert_eq!(c.grid_n, Some(33));
    }

    #[test]
    fn validation() {
        let bad = FileConfig {
            grid_n: Some(32),
            ..Default::default()
        };
        assert!(ExperimentConfig::from_file_config(&bad, "out".into()).is_err());
        let bad = FileConfig {
            radii: Some("0.2,0.1".into()),
            ..Default::default()
        };
        assert!(ExperimentConfig::from_file_config(&bad, "out".into()).is_err());
        let ok = ExperimentConfig::from_file_config(&FileConfig::default(), "out".into()).unwrap();
        assert!(ok.header("solve").starts_with("# fbxlab"));
    }
}
