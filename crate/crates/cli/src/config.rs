//! Run configuration: a TOML file of `key = value` entries, overridden by
//! command-line flags.
//!
//! ```toml
//! seed = 7
//! timing.t_pi_us = 5
//! [optimize]
//! time_limit_s = 60
//! [sweep]
//! lambda_grid = [0.0, 0.001, 0.01]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub timing: Timing,
    pub optimize: Optimize,
    pub sweep: Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    pub t_pi_us: f64,
    pub t_ising_per_ion_us: f64,
    pub t_ms_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Optimize {
    /// `sum` or `theorem`.
    pub big_m: String,
    pub time_limit_s: f64,
    /// `support` or `bnb`.
    pub engine: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Vertex count of the random-graph sweeps.
    pub n: usize,
    pub graphs_per_p: usize,
    /// Edge probabilities are `p_step · {1, …, p_count}`.
    pub p_step: f64,
    pub p_count: usize,
    /// Weight set of the weighted sweep.
    pub weights: Vec<i64>,
    /// Per-instance solver limit.
    pub time_limit_s: f64,
    /// Largest `n` of the exhaustive worst-case table.
    pub max_worstcase_n: usize,
    pub lambda_grid: Vec<f64>,
    pub grid_res: usize,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            t_pi_us: 5.0,
            t_ising_per_ion_us: 50.0,
            t_ms_us: 100.0,
        }
    }
}

impl Default for Optimize {
    fn default() -> Self {
        Self {
            big_m: "sum".into(),
            time_limit_s: 600.0,
            engine: "support".into(),
        }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            n: 7,
            graphs_per_p: 4,
            p_step: 0.04,
            p_count: 24,
            weights: vec![1, 2, 3],
            time_limit_s: 600.0,
            max_worstcase_n: 5,
            lambda_grid: vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.02],
            grid_res: 32,
            jobs: 0,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        Self::parse(&text).map_err(|f| f.in_file(path))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| Failure::usage(format!("config: {}", e.message())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn dotted_keys_and_sections() {
        let c = Config::parse("seed = 9\ntiming.t_pi_us = 2.5\n[sweep]\ngrid_res = 16\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.timing.t_pi_us, 2.5);
        assert_eq!(c.timing.t_ms_us, 100.0);
        assert_eq!(c.sweep.grid_res, 16);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("timing.t_pi = 5").is_err());
    }
}
