//! Amplitude-viscosity sweeps of nonlinear runs and the transition-exponent
//! fit.
//!
//! The stability proxy: a run is unstable if it blows up or
//! `sup_t ||U_nonzero||_{H^N}` exceeds `G` times its initial value, stable
//! if additionally the value at the horizon is below the initial one, and
//! inconclusive otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Result};
use crate::sim::{run, SimConfig, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyCriteria {
    /// Horizon; `None` means `min(50, 10 nu^{-1/3})`.
    pub horizon: Option<f64>,
    pub growth_factor: f64,
    /// Report column tracked by the classifier.
    pub norm_name: String,
}

impl Default for ClassifyCriteria {
    fn default() -> Self {
        Self { horizon: None, growth_factor: 10.0, norm_name: "Uneq_HN".into() }
    }
}

impl ClassifyCriteria {
    pub fn horizon_for(&self, nu: f64) -> f64 {
        self.horizon.unwrap_or_else(|| default_horizon(nu))
    }
}

pub fn default_horizon(nu: f64) -> f64 {
    (10.0 * nu.powf(-1.0 / 3.0)).min(50.0)
}

/// Classification plus the peak of the tracked norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub status: Stability,
    pub initial: f64,
    pub peak: f64,
    pub t_peak: f64,
    pub last: f64,
}

pub fn classify_run(traj: &Trajectory, c: &ClassifyCriteria) -> Classification {
    let horizon = c.horizon_for(traj.config.nu);
    let series: Vec<(f64, f64)> = traj
        .reports
        .iter()
        .filter(|r| r.t <= horizon * (1.0 + 1e-12))
        .map(|r| (r.t, r.get(&c.norm_name).unwrap_or(f64::NAN)))
        .collect();
    let initial = series.first().map_or(0.0, |p| p.1);
    let (t_peak, peak) = series.iter().copied().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let peak = peak.max(initial);
    let last = series.last().map_or(0.0, |p| p.1);
    let status = if traj.blew_up() || !peak.is_finite() {
        Stability::Unstable
    } else if initial == 0.0 {
        if peak == 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    } else if peak > c.growth_factor * initial {
        Stability::Unstable
    } else if last < initial {
        Stability::Stable
    } else {
        Stability::Inconclusive
    };
    Classification { status, initial, peak, t_peak, last }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EpsGrid {
    /// Geometric grid from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let r = (self.max / self.min).ln() / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min * (r * i as f64).exp()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub nu_grid: Vec<f64>,
    pub eps_grid: EpsGrid,
    #[serde(default)]
    pub base: SimConfig,
    #[serde(default)]
    pub classify: ClassifyCriteria,
    /// Refine each `eps*` by bisection to 10% relative width.
    #[serde(default)]
    pub bisect: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu_grid.is_empty() || self.nu_grid.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(invalid("nu_grid must be non-empty with entries in (0, 1)"));
        }
        let e = &self.eps_grid;
        if e.points == 0 || !(e.min > 0.0) || !(e.max >= e.min) {
            return Err(invalid("eps_grid needs 0 < min <= max and at least one point"));
        }
        if !(self.classify.growth_factor > 1.0) {
            return Err(invalid("growth_factor must exceed 1"));
        }
        Ok(())
    }

    /// The simulation configuration of one cell.
    pub fn cell_config(&self, nu: f64, eps: f64) -> SimConfig {
        SimConfig { nu, eps, t_end: self.classify.horizon_for(nu), ..self.base.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub nu: f64,
    pub eps: f64,
    /// Status after monotone repair.
    pub status: Stability,
    pub raw_status: Stability,
    pub peak_norm: f64,
    pub t_peak: f64,
    pub error: Option<String>,
    /// Whether the cell came from bisection rather than the grid.
    pub refined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Censoring {
    None,
    /// No stable amplitude on the grid.
    Below,
    /// Every amplitude stable; `eps*` is only a lower bound.
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub nu: f64,
    pub eps_star: Option<f64>,
    pub censored: Censoring,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    pub intercept: f64,
    /// 95% interval; infinite with fewer than three points.
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub cells: Vec<CellResult>,
    pub thresholds: Vec<ThresholdRow>,
    pub gamma: Option<GammaFit>,
}

/// Persistence of finished cells, for resuming interrupted sweeps.
pub trait CellStore: Sync {
    fn load(&self, nu: f64, eps: f64) -> Option<CellResult>;
    fn store(&self, cell: &CellResult);
}

/// A store that remembers nothing.
pub struct NoStore;

impl CellStore for NoStore {
    fn load(&self, _: f64, _: f64) -> Option<CellResult> {
        None
    }
    fn store(&self, _: &CellResult) {}
}

fn run_cell(cfg: &SweepConfig, nu: f64, eps: f64, refined: bool, store: &dyn CellStore) -> CellResult {
    if let Some(c) = store.load(nu, eps) {
        return c;
    }
    let cell = match run(&cfg.cell_config(nu, eps)) {
        Ok(traj) => {
            let c = classify_run(&traj, &cfg.classify);
            CellResult {
                nu,
                eps,
                status: c.status,
                raw_status: c.status,
                peak_norm: c.peak,
                t_peak: c.t_peak,
                error: None,
                refined,
            }
        }
        Err(e) => CellResult {
            nu,
            eps,
            status: Stability::Inconclusive,
            raw_status: Stability::Inconclusive,
            peak_norm: f64::NAN,
            t_peak: f64::NAN,
            error: Some(e.to_string()),
            refined,
        },
    };
    store.store(&cell);
    cell
}

/// Mark every (unstable below stable) pair inconclusive. `cells` must share
/// one `nu` and be sorted by `eps`.
pub fn monotone_repair(cells: &mut [CellResult]) {
    let n = cells.len();
    let mut bad = vec![false; n];
    for a in 0..n {
        for b in a + 1..n {
            if cells[a].raw_status == Stability::Unstable && cells[b].raw_status == Stability::Stable {
                bad[a] = true;
                bad[b] = true;
            }
        }
    }
    for (c, b) in cells.iter_mut().zip(bad) {
        c.status = if b { Stability::Inconclusive } else { c.raw_status };
    }
}

fn threshold_of(nu: f64, cells: &[CellResult]) -> ThresholdRow {
    let stable_max = cells.iter().filter(|c| c.status == Stability::Stable).map(|c| c.eps).fold(None, |a: Option<f64>, e| {
        Some(a.map_or(e, |a| a.max(e)))
    });
    let any_unstable_above =
        stable_max.is_some_and(|s| cells.iter().any(|c| c.status == Stability::Unstable && c.eps > s));
    match stable_max {
        None => ThresholdRow { nu, eps_star: None, censored: Censoring::Below },
        Some(s) if !any_unstable_above => ThresholdRow { nu, eps_star: Some(s), censored: Censoring::Above },
        Some(s) => ThresholdRow { nu, eps_star: Some(s), censored: Censoring::None },
    }
}

/// Run every `(nu, eps)` cell, optionally bisect, and fit `gamma`.
pub fn sweep(cfg: &SweepConfig, store: &dyn CellStore) -> Result<ThresholdResult> {
    cfg.validate()?;
    cfg.base.validate()?;
    let eps_values = cfg.eps_grid.values();
    let jobs: Vec<(f64, f64)> = cfg.nu_grid.iter().flat_map(|&nu| eps_values.iter().map(move |&e| (nu, e))).collect();
    let done: Vec<CellResult> = jobs.par_iter().map(|&(nu, eps)| run_cell(cfg, nu, eps, false, store)).collect();

    let mut cells = Vec::new();
    let mut thresholds = Vec::new();
    for &nu in &cfg.nu_grid {
        let mut row: Vec<CellResult> = done.iter().filter(|c| c.nu == nu).cloned().collect();
        row.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        monotone_repair(&mut row);
        if cfg.bisect {
            bisect_row(cfg, nu, &mut row, store);
        }
        thresholds.push(threshold_of(nu, &row));
        cells.extend(row);
    }
    let pts: Vec<(f64, f64)> = thresholds
        .iter()
        .filter(|t| t.censored == Censoring::None)
        .filter_map(|t| t.eps_star.map(|e| (t.nu, e)))
        .collect();
    let gamma = if pts.len() >= 2 { Some(fit_gamma(&pts)?) } else { None };
    Ok(ThresholdResult { cells, thresholds, gamma })
}

fn bisect_row(cfg: &SweepConfig, nu: f64, row: &mut Vec<CellResult>, store: &dyn CellStore) {
    loop {
        let t = threshold_of(nu, row);
        let (Some(lo), Censoring::None) = (t.eps_star, t.censored) else { return };
        let hi = row
            .iter()
            .filter(|c| c.status == Stability::Unstable && c.eps > lo)
            .map(|c| c.eps)
            .fold(f64::INFINITY, f64::min);
        if hi / lo <= 1.1 {
            return;
        }
        let mid = (lo * hi).sqrt();
        let cell = run_cell(cfg, nu, mid, true, store);
        let inconclusive = cell.raw_status == Stability::Inconclusive;
        row.push(cell);
        row.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        monotone_repair(row);
        if inconclusive {
            return;
        }
    }
}

/// Least-squares slope of `log eps*` against `log nu` with a 95% Student-t
/// interval.
pub fn fit_gamma(points: &[(f64, f64)]) -> Result<GammaFit> {
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (gamma, intercept, rms) = crate::diagnostics::fit_power_law(&x, &y)?;
    let n = points.len();
    let (ci_low, ci_high) = if n >= 3 {
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let mean = lx.iter().sum::<f64>() / n as f64;
        let sxx: f64 = lx.iter().map(|v| (v - mean).powi(2)).sum();
        let s2 = rms * rms * n as f64 / (n - 2) as f64;
        let se = (s2 / sxx).sqrt();
        let tq = StudentsT::new(0.0, 1.0, (n - 2) as f64).expect("dof >= 1").inverse_cdf(0.975);
        (gamma - tq * se, gamma + tq * se)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Ok(GammaFit { gamma, intercept, ci_low, ci_high, points: n })
}
