//! Weighted energy quantities computed from velocity snapshots.
//!
//! Non-zero modes are measured through the good unknowns
//! `K1 = -|k,l| sqrt(w) U1`, `K2 = -|k| sqrt(w) U2` and `Q3 = -w U3`,
//! weighted by the multipliers `m` and `M`. Sobolev weights use the sheared
//! labels `<k, eta, l>`, which do not move in time.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::multipliers::{ghost_closed, ghost_dissipation_weight, m_exact, MultiplierParams};
use crate::sim::{SimConfig, VelocityField};
use crate::spectral::{w_symbol, SpectralField};

/// Instantaneous columns. `g*` entries carry the factor `nu^{1/2}`;
/// `d*` entries are the `sqrt(-M' M)` weighted norms.
pub const INSTANT_COLUMNS: [&str; 33] = [
    "MK1_HN",
    "MK2_HN",
    "mMQ3_HN",
    "dMK1_HN",
    "dMK2_HN",
    "dmMQ3_HN",
    "gMK1_HN",
    "gMK2_HN",
    "gmMQ3_HN",
    "Q0_1_HN",
    "Q0_2_HN",
    "Q0_3_HN",
    "gQ0_1_HN",
    "gQ0_2_HN",
    "gQ0_3_HN",
    "U0_1_HNm1",
    "U0_2_HNm1",
    "U0_3_HNm1",
    "gU0_1_HNm1",
    "gU0_2_HNm1",
    "gU0_3_HNm1",
    "wU0_2_HNm1",
    "Uneq_1_HN",
    "Uneq_2_HN",
    "Uneq_3_HN",
    "Uneq_HN",
    "U12neq_L2",
    "Kneq_HN",
    "mQ3_HN",
    "gradL_U12neq_HN",
    "U_L2",
    "U_HN",
    "div_max",
];

/// Quantities accumulated as `sqrt(int_0^t X^2)` (trapezoid rule).
pub const L2T_SOURCES: [&str; 17] = [
    "dMK1_HN",
    "dMK2_HN",
    "dmMQ3_HN",
    "gMK1_HN",
    "gMK2_HN",
    "gmMQ3_HN",
    "gQ0_1_HN",
    "gQ0_2_HN",
    "gQ0_3_HN",
    "gU0_1_HNm1",
    "gU0_2_HNm1",
    "gU0_3_HNm1",
    "wU0_2_HNm1",
    "Kneq_HN",
    "mQ3_HN",
    "gradL_U12neq_HN",
    "Uneq_HN",
];

/// Quantities accumulated as running maxima.
pub const LINF_SOURCES: [&str; 9] =
    ["MK1_HN", "MK2_HN", "mMQ3_HN", "Q0_1_HN", "Q0_2_HN", "Q0_3_HN", "U0_1_HNm1", "U0_2_HNm1", "U0_3_HNm1"];

/// The nine bootstrap hypothesis lines, in order.
pub const BOOT_LINES: [&str; 9] =
    ["boot_K1", "boot_K2", "boot_Q3", "boot_Q0_1", "boot_Q0_2", "boot_Q0_3", "boot_U0_1", "boot_U0_2", "boot_U0_3"];

/// Full, stable column list of a report row (after `t`).
pub fn report_columns() -> Vec<String> {
    let mut cols: Vec<String> = INSTANT_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(L2T_SOURCES.iter().map(|s| format!("L2t_{s}")));
    cols.extend(LINF_SOURCES.iter().map(|s| format!("Linf_{s}")));
    cols.extend(BOOT_LINES.iter().map(|s| s.to_string()));
    cols
}

fn col(name: &str) -> usize {
    INSTANT_COLUMNS.iter().position(|c| *c == name).expect("known column")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub nu: f64,
    /// Sobolev index `N`.
    pub n: f64,
    /// Reference size `||u_in||_{H^sigma}` for the bootstrap bounds.
    pub eps: f64,
    pub c0: f64,
    pub c1: f64,
    pub multipliers: MultiplierParams,
}

impl DiagnosticsConfig {
    pub fn new(nu: f64, n: f64, eps: f64) -> Result<Self> {
        Ok(Self { nu, n, eps, c0: 100.0, c1: 10.0, multipliers: MultiplierParams::new(nu)? })
    }

    pub fn from_sim(cfg: &SimConfig, eps: f64) -> Result<Self> {
        if cfg.n_index() <= 2.5 {
            return Err(invalid(format!("N = sigma - 2 must exceed 5/2, got {}", cfg.n_index())));
        }
        Ok(Self {
            nu: cfg.nu,
            n: cfg.n_index(),
            eps,
            c0: cfg.c0,
            c1: cfg.c1,
            multipliers: MultiplierParams::with_window(cfg.nu, cfg.multiplier_window)?,
        })
    }

    /// Right-hand sides `8 * {eps, eps, C0 eps nu^{-1/3}, eps, C1 eps/nu,
    /// C0 eps/nu, eps, C1 eps/nu, C0 eps/nu}` of the bootstrap lines.
    pub fn bootstrap_bounds(&self) -> [f64; 9] {
        let (e, nu) = (self.eps, self.nu);
        let b = [
            e,
            e,
            self.c0 * e * nu.powf(-1.0 / 3.0),
            e,
            self.c1 * e / nu,
            self.c0 * e / nu,
            e,
            self.c1 * e / nu,
            self.c0 * e / nu,
        ];
        b.map(|x| 8.0 * x)
    }
}

/// One diagnostic row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    /// Values in [`report_columns`] order.
    pub values: Vec<f64>,
    /// Bootstrap lines exceeding their bound.
    pub flags: Vec<String>,
}

impl EnergyReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        report_columns().iter().position(|c| c == name).map(|i| self.values[i])
    }

    pub fn csv_header() -> String {
        let mut h = String::from("t");
        for c in report_columns() {
            h.push(',');
            h.push_str(&c);
        }
        h.push_str(",flags");
        h
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!("{:.10e}", self.t);
        for v in &self.values {
            s.push_str(&format!(",{v:.10e}"));
        }
        s.push(',');
        s.push_str(&self.flags.join(";"));
        s
    }
}

/// `Q^i = -w U^i` per mode.
pub fn compute_q(u: &VelocityField) -> [SpectralField; 3] {
    let t = u.time();
    let g = u.grid();
    let mut q = u.u.clone();
    for (i, c) in q.iter_mut().enumerate() {
        for (idx, z) in c.coeffs.iter_mut().enumerate() {
            *z = -w_symbol(t, g.wave_vector(idx)) * u.u[i].coeffs[idx];
        }
    }
    q
}

/// `(K1, K2) = (-|k,l| |grad_L| U1, -|k| |grad_L| U2)`.
pub fn compute_k_check(u: &VelocityField) -> [SpectralField; 2] {
    let t = u.time();
    let g = u.grid();
    let mut k1 = u.u[0].clone();
    let mut k2 = u.u[1].clone();
    for idx in 0..g.len() {
        let kv = g.wave_vector(idx);
        let sw = w_symbol(t, kv).sqrt();
        k1.coeffs[idx] *= -kv.kl_magnitude() * sw;
        k2.coeffs[idx] *= -(kv.k.abs() as f64) * sw;
    }
    [k1, k2]
}

/// Inverse of [`compute_k_check`] where the prefactors are non-zero; other
/// modes are returned as zero.
pub fn recover_velocity_12(kc: &[SpectralField; 2]) -> [SpectralField; 2] {
    let t = kc[0].time;
    let g = kc[0].grid;
    let mut u1 = kc[0].clone();
    let mut u2 = kc[1].clone();
    for idx in 0..g.len() {
        let kv = g.wave_vector(idx);
        let sw = w_symbol(t, kv).sqrt();
        let p1 = kv.kl_magnitude() * sw;
        let p2 = kv.k.abs() as f64 * sw;
        u1.coeffs[idx] = if p1 > 0.0 { -kc[0].coeffs[idx] / p1 } else { Default::default() };
        u2.coeffs[idx] = if p2 > 0.0 { -kc[1].coeffs[idx] / p2 } else { Default::default() };
    }
    [u1, u2]
}

/// Instantaneous values in [`INSTANT_COLUMNS`] order.
pub fn instantaneous(u: &VelocityField, cfg: &DiagnosticsConfig) -> Vec<f64> {
    let t = u.time();
    let g = u.grid();
    let p = cfg.multipliers;
    let mut s = [0.0f64; 33];
    let mut div_max: f64 = 0.0;
    let c = |name| col(name);
    for idx in 0..g.len() {
        let a = [u.u[0].coeffs[idx], u.u[1].coeffs[idx], u.u[2].coeffs[idx]];
        let e = [a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr()];
        if e[0] + e[1] + e[2] == 0.0 {
            continue;
        }
        let kv = g.wave_vector(idx);
        let br2 = 1.0 + kv.magnitude_sq();
        let hn = br2.powf(cfg.n);
        let hnm1 = br2.powf(cfg.n - 1.0);
        let w = w_symbol(t, kv);
        let div = kv.k as f64 * a[0] + (kv.eta - kv.k as f64 * t) * a[1] + kv.l as f64 * a[2];
        div_max = div_max.max(div.norm());
        s[c("U_L2")] += e[0] + e[1] + e[2];
        s[c("U_HN")] += hn * (e[0] + e[1] + e[2]);
        if kv.k != 0 {
            let k1 = kv.kl_magnitude().powi(2) * w * e[0];
            let k2 = (kv.k as f64).powi(2) * w * e[1];
            let q3 = w * w * e[2];
            let big_m = ghost_closed(t, kv, p);
            let d = ghost_dissipation_weight(t, kv, p);
            let m = m_exact(t, kv, p);
            s[c("MK1_HN")] += hn * big_m * big_m * k1;
            s[c("MK2_HN")] += hn * big_m * big_m * k2;
            s[c("mMQ3_HN")] += hn * (m * big_m).powi(2) * q3;
            s[c("dMK1_HN")] += hn * d * d * k1;
            s[c("dMK2_HN")] += hn * d * d * k2;
            s[c("dmMQ3_HN")] += hn * d * d * m * m * q3;
            s[c("gMK1_HN")] += hn * big_m * big_m * w * k1;
            s[c("gMK2_HN")] += hn * big_m * big_m * w * k2;
            s[c("gmMQ3_HN")] += hn * (m * big_m).powi(2) * w * q3;
            s[c("Uneq_1_HN")] += hn * e[0];
            s[c("Uneq_2_HN")] += hn * e[1];
            s[c("Uneq_3_HN")] += hn * e[2];
            s[c("U12neq_L2")] += e[0] + e[1];
            s[c("Kneq_HN")] += hn * (k1 + k2);
            s[c("mQ3_HN")] += hn * m * m * q3;
            s[c("gradL_U12neq_HN")] += hn * w * (e[0] + e[1]);
        } else {
            for i in 0..3 {
                s[c(["Q0_1_HN", "Q0_2_HN", "Q0_3_HN"][i])] += hn * w * w * e[i];
                s[c(["gQ0_1_HN", "gQ0_2_HN", "gQ0_3_HN"][i])] += hn * w * w * w * e[i];
                s[c(["U0_1_HNm1", "U0_2_HNm1", "U0_3_HNm1"][i])] += hnm1 * e[i];
                s[c(["gU0_1_HNm1", "gU0_2_HNm1", "gU0_3_HNm1"][i])] += hnm1 * w * e[i];
            }
            s[c("wU0_2_HNm1")] += hnm1 * e[1];
        }
    }
    let measure = g.cell_measure();
    let mut out: Vec<f64> = s.iter().map(|x| (x * measure).sqrt()).collect();
    out[c("Uneq_HN")] = (out[c("Uneq_1_HN")].powi(2) + out[c("Uneq_2_HN")].powi(2) + out[c("Uneq_3_HN")].powi(2)).sqrt();
    let sqrt_nu = cfg.nu.sqrt();
    for (i, name) in INSTANT_COLUMNS.iter().enumerate() {
        if name.starts_with('g') || name.starts_with('w') {
            out[i] *= sqrt_nu;
        }
    }
    out[c("div_max")] = div_max;
    out
}

/// Time-integral and running-maximum state of one run.
#[derive(Clone, Debug)]
pub struct Accumulators {
    pub cfg: DiagnosticsConfig,
    last: Option<(f64, Vec<f64>)>,
    l2t_sq: Vec<f64>,
    linf: Vec<f64>,
}

impl Accumulators {
    pub fn new(cfg: DiagnosticsConfig) -> Self {
        Self { cfg, last: None, l2t_sq: vec![0.0; L2T_SOURCES.len()], linf: vec![0.0; LINF_SOURCES.len()] }
    }

    /// Evaluate all quantities at `u.time()` and advance the accumulators.
    pub fn report(&mut self, u: &VelocityField) -> EnergyReport {
        let t = u.time();
        let inst = instantaneous(u, &self.cfg);
        if let Some((t0, prev)) = &self.last {
            let dt = t - t0;
            for (acc, name) in self.l2t_sq.iter_mut().zip(L2T_SOURCES) {
                let i = col(name);
                *acc += 0.5 * dt * (prev[i].powi(2) + inst[i].powi(2));
            }
        }
        for (acc, name) in self.linf.iter_mut().zip(LINF_SOURCES) {
            *acc = acc.max(inst[col(name)]);
        }
        let l2t: Vec<f64> = self.l2t_sq.iter().map(|x| x.sqrt()).collect();
        let l2 = |name: &str| l2t[L2T_SOURCES.iter().position(|c| *c == name).unwrap()];
        let li = |name: &str| self.linf[LINF_SOURCES.iter().position(|c| *c == name).unwrap()];
        let boot = [
            li("MK1_HN") + l2("gMK1_HN") + l2("dMK1_HN"),
            li("MK2_HN") + l2("gMK2_HN") + l2("dMK2_HN"),
            li("mMQ3_HN") + l2("gmMQ3_HN") + l2("dmMQ3_HN"),
            li("Q0_1_HN") + l2("gQ0_1_HN"),
            li("Q0_2_HN") + l2("gQ0_2_HN"),
            li("Q0_3_HN") + l2("gQ0_3_HN"),
            li("U0_1_HNm1") + l2("gU0_1_HNm1"),
            li("U0_2_HNm1") + l2("wU0_2_HNm1") + l2("gU0_2_HNm1"),
            li("U0_3_HNm1") + l2("gU0_3_HNm1"),
        ];
        let bounds = self.cfg.bootstrap_bounds();
        let flags = BOOT_LINES
            .iter()
            .zip(boot.iter().zip(bounds))
            .filter(|(_, (v, b))| **v > *b)
            .map(|(n, _)| n.to_string())
            .collect();

        let mut values = inst.clone();
        values.extend(&l2t);
        values.extend(&self.linf);
        values.extend(boot);
        self.last = Some((t, inst));
        EnergyReport { t, values, flags }
    }
}

/// One-shot report with caller-owned accumulators.
pub fn bootstrap_report(u: &VelocityField, acc: &mut Accumulators) -> EnergyReport {
    acc.report(u)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub quantity: String,
    pub predicted: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

/// Least-squares `log y = a + b log x`; returns `(b, a, rms residual)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("power-law fit needs matching samples, at least two"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(invalid("power-law fit needs positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("power-law fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    Ok((slope, icept, (rss / n).sqrt()))
}

/// Fit the viscosity exponents of the accumulated enhanced-dissipation
/// norms from the final report of each run, `(nu, report)`.
pub fn viscosity_rate_fits(runs: &[(f64, EnergyReport)]) -> Result<Vec<RateFit>> {
    let mut nus: Vec<f64> = runs.iter().map(|r| r.0).collect();
    nus.sort_by(f64::total_cmp);
    nus.dedup();
    if nus.len() < 3 {
        return Err(Error::InsufficientRuns { got: nus.len(), need: 3 });
    }
    let targets = [("L2t_Kneq_HN", -1.0 / 6.0), ("L2t_mQ3_HN", -0.5), ("L2t_gradL_U12neq_HN", -1.0 / 6.0)];
    let x: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mut out = Vec::new();
    for (name, predicted) in targets {
        let y: Vec<f64> = runs.iter().map(|r| r.1.get(name).expect("known column")).collect();
        let (exponent, intercept, residual_rms) = fit_power_law(&x, &y)?;
        out.push(RateFit { quantity: name.to_string(), predicted, exponent, intercept, residual_rms });
    }
    Ok(out)
}
