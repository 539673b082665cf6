//! `couette multipliers`: `m` and `M` along one mode, with the residual of
//! the `m` ODE (empty within reach of a switching time).

use clap::Args;
use couette_core::multipliers::{m_ode_residual, profile, MultiplierParams, DEFAULT_WINDOW, PROFILE_COLUMNS};
use couette_core::{Error, WaveVector};
use serde::Serialize;

use crate::output::{num, Outputs};
use crate::{CmdResult, Common, Failure};

#[derive(Args, Debug, Clone, Serialize)]
pub struct MultiplierArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l: i64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Window constant: m is active for `window * nu^{-1/3}` after the
    /// critical time.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: f64,
}

pub fn table(a: &MultiplierArgs) -> Result<String, Failure> {
    let p = MultiplierParams::with_window(a.nu, a.window)?;
    if !(a.t_max >= 0.0 && a.t_max.is_finite()) || a.samples < 2 {
        return Err(Failure::usage("need t_max >= 0 and at least two samples"));
    }
    let kv = WaveVector::new(a.k, a.eta, a.l);
    let times: Vec<f64> = (0..a.samples).map(|i| a.t_max * i as f64 / (a.samples - 1) as f64).collect();
    let mut out = PROFILE_COLUMNS.join(",") + ",ode_residual\n";
    for r in profile(&times, kv, p) {
        let residual = match m_ode_residual(r.t, kv, p) {
            Ok(v) => num(v),
            Err(Error::SwitchingTime { .. }) => String::new(),
            Err(e) => return Err(e.into()),
        };
        let vals = [r.t, r.k as f64, r.eta, r.l as f64, r.nu, r.m, r.big_m, r.mdot_over_m, r.big_mdot_over_big_m];
        out += &vals.map(num).join(",");
        out += &format!(",{residual}\n");
    }
    Ok(out)
}

pub fn run(common: &Common, a: &MultiplierArgs) -> CmdResult {
    let csv = table(a)?;
    let mut out = Outputs::create(&common.out, "multipliers", a)?;
    out.write("multipliers.csv", &csv)?;
    out.finish("completed")?;
    Ok(())
}
