//! Experiment files.
//!
//! ```toml
//! [sim]
//! nu = 0.01
//! eps = 1e-3
//! t_end = 20.0
//! ic_kind = "random_band"
//!
//! [sim.grid]
//! nx = 16
//! ny = 64
//! nz = 16
//! ly = 32.0
//!
//! [sweep]
//! nu_grid = [0.05, 0.02]
//! eps_grid = { min = 1e-6, max = 1e-2, points = 5 }
//! bisect = false
//!
//! [sweep.base]   # every SimConfig key
//! [sweep.classify]
//! growth_factor = 10.0
//! ```
//!
//! Keys mirror the `SimConfig` and `SweepConfig` fields; unknown keys are
//! rejected. Command-line flags override file values.

use std::path::Path;

use couette_core::harness::SweepConfig;
use couette_core::SimConfig;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub sim: Option<SimConfig>,
    pub sweep: Option<SweepConfig>,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<ConfigFile, toml::de::Error> {
    toml::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use couette_core::sim::IcKind;

    #[test]
    fn documented_example_parses() {
        let src = include_str!("config.rs");
        let example: String = src
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .map(|l| l.split('#').next().unwrap())
            .collect::<Vec<_>>()
            .join("\n");
        let cfg = parse(&example).unwrap();
        let sim = cfg.sim.unwrap();
        assert_eq!(sim.ic_kind, IcKind::RandomBand);
        assert_eq!(sim.grid.ny, 64);
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.eps_grid.points, 5);
        assert_eq!(sweep.base, SimConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse("[sim]\nviscosity = 0.1\n").is_err());
        assert!(parse("[simulation]\n").is_err());
    }

    #[test]
    fn missing_keys_take_defaults() {
        let sim = parse("[sim]\nnu = 0.2\n").unwrap().sim.unwrap();
        assert_eq!(sim, SimConfig { nu: 0.2, ..SimConfig::default() });
    }
}
