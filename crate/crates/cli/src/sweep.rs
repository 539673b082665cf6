//! `couette sweep`: the `[sweep]` table over `(nu, eps)`.
//!
//! Each finished cell is checkpointed as `cells/<nu bits>_<eps bits>.json`;
//! rerunning into the same directory loads those cells instead of
//! recomputing them, so an interrupted sweep resumes where it stopped.
//! Writes `sweep.csv`, `summary.csv`, `gamma.json` and `manifest.json`.

use std::path::PathBuf;
use std::sync::Mutex;

use clap::Args;
use couette_core::harness::{sweep, CellResult, CellStore, Censoring, Stability, SweepConfig};
use serde::{Deserialize, Serialize};

use crate::output::{field, num, Outputs};
use crate::{config, CmdResult, Common, Failure};

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    /// Refine each threshold by bisection.
    #[arg(long)]
    pub bisect: bool,
}

pub fn effective_config(common: &Common, a: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut cfg = config::load(common.config.as_deref())?
        .sweep
        .ok_or_else(|| Failure::usage("sweep needs a [sweep] table in --config"))?;
    if let Some(s) = common.seed {
        cfg.base.seed = s;
    }
    cfg.bisect |= a.bisect;
    cfg.validate()?;
    cfg.base.validate()?;
    Ok(cfg)
}

/// JSON form of a cell; `NaN` becomes `null`.
#[derive(Serialize, Deserialize)]
struct CellRecord {
    nu: f64,
    eps: f64,
    status: Stability,
    raw_status: Stability,
    peak_norm: Option<f64>,
    t_peak: Option<f64>,
    error: Option<String>,
    refined: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl From<&CellResult> for CellRecord {
    fn from(c: &CellResult) -> Self {
        Self {
            nu: c.nu,
            eps: c.eps,
            status: c.status,
            raw_status: c.raw_status,
            peak_norm: finite(c.peak_norm),
            t_peak: finite(c.t_peak),
            error: c.error.clone(),
            refined: c.refined,
        }
    }
}

impl From<CellRecord> for CellResult {
    fn from(c: CellRecord) -> Self {
        Self {
            nu: c.nu,
            eps: c.eps,
            status: c.status,
            raw_status: c.raw_status,
            peak_norm: c.peak_norm.unwrap_or(f64::NAN),
            t_peak: c.t_peak.unwrap_or(f64::NAN),
            error: c.error,
            refined: c.refined,
        }
    }
}

/// Checkpoints under `cells/`, written by one writer at a time.
pub struct DirStore {
    dir: PathBuf,
    lock: Mutex<Vec<String>>,
}

impl DirStore {
    pub fn new(dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, lock: Mutex::new(Vec::new()) })
    }

    pub fn file_name(nu: f64, eps: f64) -> String {
        format!("{:016x}_{:016x}.json", nu.to_bits(), eps.to_bits())
    }

    /// Names of the checkpoints loaded or written so far.
    pub fn touched(&self) -> Vec<String> {
        self.lock.lock().unwrap().clone()
    }
}

impl CellStore for DirStore {
    fn load(&self, nu: f64, eps: f64) -> Option<CellResult> {
        let name = Self::file_name(nu, eps);
        let text = std::fs::read_to_string(self.dir.join(&name)).ok()?;
        let rec: CellRecord = serde_json::from_str(&text).ok()?;
        (rec.nu == nu && rec.eps == eps).then(|| {
            self.lock.lock().unwrap().push(name);
            rec.into()
        })
    }

    fn store(&self, cell: &CellResult) {
        let name = Self::file_name(cell.nu, cell.eps);
        let json = serde_json::to_string_pretty(&CellRecord::from(cell)).expect("plain data");
        let mut touched = self.lock.lock().unwrap();
        let tmp = self.dir.join(format!("{name}.tmp"));
        // A failed checkpoint only costs a recomputation on resume.
        if std::fs::write(&tmp, json + "\n").and_then(|_| std::fs::rename(&tmp, self.dir.join(&name))).is_ok() {
            touched.push(name);
        } else {
            eprintln!("warning: could not checkpoint cell nu={} eps={}", cell.nu, cell.eps);
        }
    }
}

fn status_word(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::Inconclusive => "inconclusive",
    }
}

pub fn run(common: &Common, a: &SweepArgs) -> CmdResult {
    let cfg = effective_config(common, a)?;
    let mut out = Outputs::create(&common.out, "sweep", &cfg)?;
    let store = DirStore::new(out.path("cells"))?;
    let res = sweep(&cfg, &store)?;

    let mut csv = String::from("nu,eps,stable,peak_norm,t_peak,status,raw_status,refined,error\n");
    for c in &res.cells {
        let stable = c.status == Stability::Stable;
        let err = c.error.as_deref().map(field).unwrap_or_default();
        csv += &format!(
            "{},{},{stable},{},{},{},{},{},{err}\n",
            num(c.nu),
            num(c.eps),
            num(c.peak_norm),
            num(c.t_peak),
            status_word(c.status),
            status_word(c.raw_status),
            c.refined
        );
    }
    out.write("sweep.csv", &csv)?;

    let mut summary = String::from("nu,eps_star,censored\n");
    for t in &res.thresholds {
        let censored = match t.censored {
            Censoring::None => "none",
            Censoring::Below => "below",
            Censoring::Above => "above",
        };
        summary += &format!("{},{},{censored}\n", num(t.nu), t.eps_star.map(num).unwrap_or_default());
    }
    out.write("summary.csv", &summary)?;

    let gamma = serde_json::json!({ "gamma": res.gamma, "thresholds": res.thresholds });
    out.write("gamma.json", &(serde_json::to_string_pretty(&gamma).map_err(Failure::usage)? + "\n"))?;
    for name in store.touched() {
        out.record(&format!("cells/{name}"));
    }
    out.finish("completed")?;
    Ok(())
}
