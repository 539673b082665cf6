//! `couette simulate`: one run from the `[sim]` table.
//!
//! Writes `energy.csv`, `final.csv`, `snapshots/snap_NNNNN.csv` when
//! `snapshot_every > 0`, `run.json` and `manifest.json`. A run that blows up
//! keeps everything up to the blow-up and exits with status 2.

use clap::Args;
use couette_core::diagnostics::EnergyReport;
use couette_core::sim::{run as simulate, Outcome};
use couette_core::snapshot::format_snapshot;
use couette_core::SimConfig;
use serde::Serialize;

use crate::output::Outputs;
use crate::{config, CmdResult, Common, Failure};

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Drop the nonlinear term.
    #[arg(long)]
    pub linear: bool,
}

/// `[sim]` from the config file with command-line overrides applied.
pub fn effective_config(common: &Common, a: &SimulateArgs) -> Result<SimConfig, Failure> {
    let mut cfg = config::load(common.config.as_deref())?.sim.unwrap_or_default();
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(v) = a.nu {
        cfg.nu = v;
    }
    if let Some(v) = a.eps {
        cfg.eps = v;
    }
    if let Some(v) = a.t_end {
        cfg.t_end = v;
    }
    if a.linear {
        cfg.nonlinear_enabled = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    outcome: &'a Outcome,
    eps_in: f64,
    steps: usize,
    t_final: f64,
    warnings: &'a [String],
}

pub fn run(common: &Common, a: &SimulateArgs) -> CmdResult {
    let cfg = effective_config(common, a)?;
    let mut out = Outputs::create(&common.out, "simulate", &cfg)?;
    let traj = simulate(&cfg)?;

    let mut csv = EnergyReport::csv_header() + "\n";
    for r in &traj.reports {
        csv += &r.csv_row();
        csv.push('\n');
    }
    out.write("energy.csv", &csv)?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        out.write(&format!("snapshots/snap_{i:05}.csv"), &format_snapshot(s, cfg.nu))?;
    }
    out.write("final.csv", &format_snapshot(&traj.final_state, cfg.nu))?;
    let summary = RunSummary {
        outcome: &traj.outcome,
        eps_in: traj.eps_in,
        steps: traj.steps,
        t_final: traj.final_state.time(),
        warnings: &traj.warnings,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(Failure::usage)?;
    out.write("run.json", &(json + "\n"))?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    match &traj.outcome {
        Outcome::Completed => {
            out.finish("completed")?;
            Ok(())
        }
        Outcome::BlewUp { t, reason } => {
            out.finish("blew_up")?;
            Err(Failure::Numerical(anyhow::anyhow!("blow-up at t = {t}: {reason}")))
        }
    }
}
