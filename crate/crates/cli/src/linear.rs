//! `couette linear`: closed-form trajectory of a single mode.
//!
//! For `k != 0` the table carries `|K1|`, `|K2|`, `|K|` with the envelope
//! `exp(-nu k^2 t^3 / 12) |K(0)|`, and `|U3|` with its bound. For `k = 0` the
//! lift-up solution is exact and the `K` columns are left empty.

use clap::Args;
use couette_core::linear::{evolve_k_closed, evolve_u3, u3_envelope, zero_mode_evolve, ModeStateK, ZeroModeState};
use couette_core::WaveVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::output::{num, Outputs};
use crate::{CmdResult, Common, Failure};

#[derive(Args, Debug, Clone, Serialize)]
pub struct LinearArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l: i64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    /// Number of equispaced output times including 0 and t_max.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Initial velocity coefficients as `re` or `re,im`.
    #[arg(long, default_value = "1", value_parser = parse_complex, allow_hyphen_values = true)]
    pub u1: Complex64,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub u2: Complex64,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub u3: Complex64,
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

pub const COLUMNS: [&str; 17] = [
    "t", "k", "eta", "l", "nu", "u1_re", "u1_im", "u2_re", "u2_im", "u3_re", "u3_im", "K1_abs", "K2_abs", "K_abs",
    "K_envelope", "U3_abs", "U3_envelope",
];

pub fn table(a: &LinearArgs) -> Result<String, Failure> {
    if !(a.nu >= 0.0 && a.nu.is_finite()) {
        return Err(Failure::usage(format!("--nu must be non-negative, got {}", a.nu)));
    }
    if !(a.t_max >= 0.0 && a.t_max.is_finite()) || a.samples < 2 {
        return Err(Failure::usage("need t_max >= 0 and at least two samples"));
    }
    let kv = WaveVector::new(a.k, a.eta, a.l);
    let mut out = COLUMNS.join(",") + "\n";
    let k0 = if a.k != 0 { Some(ModeStateK::from_velocity(a.u1, a.u2, 0.0, kv)?) } else { None };
    for i in 0..a.samples {
        let t = a.t_max * i as f64 / (a.samples - 1) as f64;
        let mut row = vec![num(t), a.k.to_string(), num(a.eta), a.l.to_string(), num(a.nu)];
        let (u, extra) = match k0 {
            None => {
                let s = zero_mode_evolve(ZeroModeState { u1: a.u1, u2: a.u2, u3: a.u3 }, t, a.nu, a.eta, a.l)?;
                ([s.u1, s.u2, s.u3], vec![String::new(); 6])
            }
            Some(k0) => {
                let kt = evolve_k_closed(k0, t, a.nu, kv)?;
                let (u1, u2) = kt.to_velocity(t, kv)?;
                let u3 = evolve_u3(a.u3, k0, t, a.nu, kv)?;
                let k = a.k as f64;
                let env = (-a.nu * k * k * t.powi(3) / 12.0).exp() * k0.norm();
                let extra = [kt.k1.norm(), kt.k2.norm(), kt.norm(), env, u3.norm(), u3_envelope(a.u3.norm(), k0, t, a.nu, kv)];
                ([u1, u2, u3], extra.map(num).to_vec())
            }
        };
        for z in u {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.extend(extra);
        out += &row.join(",");
        out.push('\n');
    }
    Ok(out)
}

pub fn run(common: &Common, a: &LinearArgs) -> CmdResult {
    let csv = table(a)?;
    let mut out = Outputs::create(&common.out, "linear", a)?;
    out.write("linear.csv", &csv)?;
    out.finish("completed")?;
    Ok(())
}
