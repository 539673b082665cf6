//! Time-dependent Fourier multipliers.
//!
//! `m` cancels the transient growth of the `Q3` stretching term inside the
//! window `[eta/k, eta/k + T]`, `T = window * nu^{-1/3}`. `M` is the ghost
//! multiplier with `M'/M = -nu^{1/3} / (1 + nu^{2/3} (t - eta/k)^2)`, which
//! integrates to an arctan pair.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{sheared_eta, w_symbol, WaveVector};

pub const DEFAULT_WINDOW: f64 = 1000.0;

/// Step used by the finite-difference residual of the `m` ODE.
pub const RESIDUAL_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierParams {
    pub nu: f64,
    /// Window constant; the active window has length `window * nu^{-1/3}`.
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_window() -> f64 {
    DEFAULT_WINDOW
}

impl MultiplierParams {
    pub fn new(nu: f64) -> Result<Self> {
        Self::with_window(nu, DEFAULT_WINDOW)
    }

    pub fn with_window(nu: f64, window: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(invalid(format!("nu must lie in (0, 1), got {nu}")));
        }
        if !(window > 0.0 && window.is_finite()) {
            return Err(invalid(format!("window must be positive, got {window}")));
        }
        Ok(Self { nu, window })
    }

    /// Window length `window * nu^{-1/3}`.
    pub fn window_length(&self) -> f64 {
        self.window * self.nu.powf(-1.0 / 3.0)
    }
}

/// Closed form of `m`.
pub fn m_exact(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    if kv.k == 0 {
        return 1.0;
    }
    let big_t = p.window_length();
    let tc = kv.eta / kv.k as f64;
    let (k, l) = (kv.k as f64, kv.l as f64);
    let frozen_w = k * k + (k * big_t).powi(2) + l * l;
    if tc < -big_t {
        1.0
    } else if tc < 0.0 {
        let num = kv.magnitude_sq();
        if t < tc + big_t {
            num / w_symbol(t, kv)
        } else {
            num / frozen_w
        }
    } else if t < tc {
        1.0
    } else if t < tc + big_t {
        (k * k + l * l) / w_symbol(t, kv)
    } else {
        (k * k + l * l) / frozen_w
    }
}

/// `m'/m` as prescribed by the defining ODE.
pub fn m_log_rate(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    if kv.k == 0 {
        return 0.0;
    }
    let tc = kv.eta / kv.k as f64;
    if t >= tc && t <= tc + p.window_length() {
        2.0 * kv.k as f64 * sheared_eta(t, kv) / w_symbol(t, kv)
    } else {
        0.0
    }
}

/// Switching times where `m` is only continuous.
pub fn m_switching_times(kv: WaveVector, p: MultiplierParams) -> Vec<f64> {
    if kv.k == 0 {
        return Vec::new();
    }
    let big_t = p.window_length();
    let tc = kv.eta / kv.k as f64;
    if tc < -big_t {
        Vec::new()
    } else {
        vec![tc, tc + big_t]
    }
}

/// `|d/dt log m_exact - m_log_rate|` by central differences.
pub fn m_ode_residual(t: f64, kv: WaveVector, p: MultiplierParams) -> Result<f64> {
    let h = RESIDUAL_STEP;
    if m_switching_times(kv, p).iter().any(|&s| (t - s).abs() <= 2.0 * h) {
        return Err(Error::SwitchingTime { t, h });
    }
    let fd = (m_exact(t + h, kv, p).ln() - m_exact(t - h, kv, p).ln()) / (2.0 * h);
    Ok((fd - m_log_rate(t, kv, p)).abs())
}

/// Closed form of the ghost multiplier `M`.
pub fn ghost_closed(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    if kv.k == 0 {
        return 1.0;
    }
    let c = p.nu.cbrt();
    let tc = kv.eta / kv.k as f64;
    (-(c * (t - tc)).atan() - (c * tc).atan()).exp()
}

/// `M'/M` (non-positive).
pub fn ghost_log_rate(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    if kv.k == 0 {
        return 0.0;
    }
    let c = p.nu.cbrt();
    let s = t - kv.eta / kv.k as f64;
    -c / (1.0 + c * c * s * s)
}

/// `sqrt(-M' M)`
pub fn ghost_dissipation_weight(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    ghost_closed(t, kv, p) * (-ghost_log_rate(t, kv, p)).sqrt()
}

/// `nu^{-1/6} sqrt(-M' M) + nu^{1/3} |k, eta - k t, l|`
pub fn coercivity(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    p.nu.powf(-1.0 / 6.0) * ghost_dissipation_weight(t, kv, p) + p.nu.cbrt() * w_symbol(t, kv).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBoundsReport {
    pub samples: usize,
    pub max_m: f64,
    /// Largest `c1` with `m >= c1 nu^{2/3}` on the samples.
    pub c1: f64,
    /// Largest `c2` with `m >= c2 (k^2 + l^2) / w` on the samples.
    pub c2: f64,
    pub upper_ok: bool,
}

/// Scan `m` over `(t, kv)` samples at fixed parameters.
pub fn check_m_bounds(samples: &[(f64, WaveVector)], p: MultiplierParams) -> MBoundsReport {
    let nu23 = p.nu.powf(2.0 / 3.0);
    let mut r = MBoundsReport { samples: samples.len(), max_m: 0.0, c1: f64::INFINITY, c2: f64::INFINITY, upper_ok: true };
    for &(t, kv) in samples {
        let m = m_exact(t, kv, p);
        r.max_m = r.max_m.max(m);
        r.c1 = r.c1.min(m / nu23);
        let kl2 = kv.kl_magnitude().powi(2);
        if kl2 > 0.0 {
            r.c2 = r.c2.min(m * w_symbol(t, kv) / kl2);
        }
    }
    r.upper_ok = r.max_m <= 1.0;
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhostBoundsReport {
    pub samples: usize,
    pub min_m: f64,
    pub max_m: f64,
    /// `min_m > e^{-pi}` and `max_m <= 1`.
    pub range_ok: bool,
    /// Infimum of [`coercivity`] over samples with `k != 0`.
    pub coercivity_inf: f64,
}

/// Scan `M` and the coercivity sum over `(t, kv, params)` samples.
pub fn check_ghost_bounds(samples: &[(f64, WaveVector, MultiplierParams)]) -> GhostBoundsReport {
    let floor = (-std::f64::consts::PI).exp();
    let mut r = GhostBoundsReport {
        samples: samples.len(),
        min_m: f64::INFINITY,
        max_m: f64::NEG_INFINITY,
        range_ok: true,
        coercivity_inf: f64::INFINITY,
    };
    for &(t, kv, p) in samples {
        let m = ghost_closed(t, kv, p);
        r.min_m = r.min_m.min(m);
        r.max_m = r.max_m.max(m);
        if kv.k != 0 {
            r.coercivity_inf = r.coercivity_inf.min(coercivity(t, kv, p));
        }
    }
    r.range_ok = samples.is_empty() || (r.min_m > floor && r.max_m <= 1.0);
    r
}

/// One row of a multiplier profile dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub k: i64,
    pub eta: f64,
    pub l: i64,
    pub nu: f64,
    pub m: f64,
    pub big_m: f64,
    pub mdot_over_m: f64,
    pub big_mdot_over_big_m: f64,
}

pub const PROFILE_COLUMNS: [&str; 9] = ["t", "k", "eta", "l", "nu", "m", "M", "mdot_over_m", "Mdot_over_M"];

pub fn profile(times: &[f64], kv: WaveVector, p: MultiplierParams) -> Vec<ProfileRow> {
    times
        .iter()
        .map(|&t| ProfileRow {
            t,
            k: kv.k,
            eta: kv.eta,
            l: kv.l,
            nu: p.nu,
            m: m_exact(t, kv, p),
            big_m: ghost_closed(t, kv, p),
            mdot_over_m: m_log_rate(t, kv, p),
            big_mdot_over_big_m: ghost_log_rate(t, kv, p),
        })
        .collect()
}
