//! Pseudospectral integration of the perturbation equations in the sheared
//! frame.
//!
//! The momentum form is advanced:
//!
//! ```text
//! d/dt U - nu Delta_L U = -(0, beta U1, 0) + grad_L p_lin - P_L(U . grad_L U)
//! ```
//!
//! where `p_lin` keeps `grad_L . U = 0` while the sheared y-frequency
//! `eta - beta k t` moves. Diffusion is removed with the exact per-mode
//! factor `exp(-nu int w)`; the remaining terms go through a Lawson
//! Runge-Kutta scheme. Products are formed on the physical grid with 2/3-rule
//! truncation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Accumulators, DiagnosticsConfig, EnergyReport};
use crate::error::{invalid, Error, Result};
use crate::fft::Fft3;
use crate::spectral::{enforce_hermitian_of, GridSpec, ModeTable, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// The three velocity components at a common time.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub u: [SpectralField; 3],
}

impl VelocityField {
    pub fn zeros(grid: GridSpec, time: f64) -> Self {
        let z = SpectralField::zeros(grid, time);
        Self { u: [z.clone(), z.clone(), z] }
    }

    pub fn from_components(u1: SpectralField, u2: SpectralField, u3: SpectralField) -> Result<Self> {
        if u1.grid != u2.grid || u1.grid != u3.grid {
            return Err(invalid("velocity components live on different grids"));
        }
        if u1.time != u2.time || u1.time != u3.time {
            return Err(invalid("velocity components are at different times"));
        }
        Ok(Self { u: [u1, u2, u3] })
    }

    pub fn grid(&self) -> GridSpec {
        self.u[0].grid
    }

    pub fn time(&self) -> f64 {
        self.u[0].time
    }

    pub fn set_time(&mut self, t: f64) {
        for c in &mut self.u {
            c.time = t;
        }
    }

    /// `sqrt(sum_i ||U^i||_{H^s}^2)`
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.u.iter().map(|c| c.sobolev_norm(s).powi(2)).sum::<f64>().sqrt()
    }

    pub fn project_nonzero(&self) -> Self {
        Self { u: [self.u[0].project_nonzero(), self.u[1].project_nonzero(), self.u[2].project_nonzero()] }
    }

    pub fn project_zero(&self) -> Self {
        Self { u: [self.u[0].project_zero(), self.u[1].project_zero(), self.u[2].project_zero()] }
    }

    /// Largest `|k U1 + (eta - beta k t) U2 + l U3|` over modes.
    pub fn divergence_max(&self, beta: f64) -> f64 {
        let g = self.grid();
        let t = self.time();
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let kv = g.wave_vector(idx);
            let k = kv.k as f64;
            let xi = kv.eta - beta * k * t;
            let d = k * self.u[0].coeffs[idx] + xi * self.u[1].coeffs[idx] + kv.l as f64 * self.u[2].coeffs[idx];
            worst = worst.max(d.norm());
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u.iter().map(|c| c.hermitian_defect()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, f: f64) {
        for c in &mut self.u {
            c.coeffs.iter_mut().for_each(|z| *z *= f);
        }
    }

    fn is_finite(&self) -> bool {
        self.u.iter().all(|c| c.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    SingleMode,
    RandomBand,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    Midpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub nu: f64,
    /// Shear rate and rotation strength.
    pub beta: f64,
    pub grid: GridSpec,
    /// Largest step; the advective limit may shorten it.
    pub dt: f64,
    pub t_end: f64,
    /// `||u_in||_{H^sigma}` of the generated initial data.
    pub eps: f64,
    pub seed: u64,
    pub ic_kind: IcKind,
    pub ic_file: Option<String>,
    /// Target y-frequency of `single_mode` data, snapped to the grid.
    pub eta0: f64,
    pub sigma: f64,
    pub nonlinear_enabled: bool,
    pub integrator: Integrator,
    /// Steps between diagnostic reports.
    pub diag_every: usize,
    /// Steps between stored snapshots; 0 stores none.
    pub snapshot_every: usize,
    /// Blow-up threshold on `||U||_{H^N}`.
    pub blowup_cap: f64,
    /// Courant number for the advective limit.
    pub cfl: f64,
    pub c0: f64,
    pub c1: f64,
    pub multiplier_window: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nu: 0.01,
            beta: 1.0,
            grid: GridSpec::default(),
            dt: 0.01,
            t_end: 10.0,
            eps: 1e-3,
            seed: 0,
            ic_kind: IcKind::RandomBand,
            ic_file: None,
            eta0: 1.0,
            sigma: 5.0,
            nonlinear_enabled: true,
            integrator: Integrator::Rk4,
            diag_every: 10,
            snapshot_every: 0,
            blowup_cap: 1e6,
            cfl: 0.5,
            c0: 100.0,
            c1: 10.0,
            multiplier_window: crate::multipliers::DEFAULT_WINDOW,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(invalid(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !(self.sigma > 4.5) {
            return Err(invalid(format!("sigma must exceed 9/2, got {}", self.sigma)));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        if self.diag_every == 0 {
            return Err(invalid("diag_every must be at least 1"));
        }
        if !(self.cfl > 0.0) || !(self.blowup_cap > 0.0) {
            return Err(invalid("cfl and blowup_cap must be positive"));
        }
        if self.ic_kind == IcKind::File && self.ic_file.is_none() {
            return Err(invalid("ic_kind = file needs ic_file"));
        }
        Ok(())
    }

    /// Regularity index of the weighted norms, `sigma - 2`.
    pub fn n_index(&self) -> f64 {
        self.sigma - 2.0
    }
}

/// `P_L f = f - kappa (kappa . f) / |kappa|^2`, `kappa = (k, eta - t k, l)`.
/// The `(0, 0, 0)` mode is set to zero.
pub fn leray_project_l(f: &VelocityField, t: f64) -> VelocityField {
    leray_project_beta(f, t, 1.0)
}

pub fn leray_project_beta(f: &VelocityField, t: f64, beta: f64) -> VelocityField {
    let mut out = f.clone();
    out.set_time(t);
    let g = f.grid();
    for idx in 0..g.len() {
        let kv = g.wave_vector(idx);
        let kappa = [kv.k as f64, kv.eta - beta * kv.k as f64 * t, kv.l as f64];
        let w: f64 = kappa.iter().map(|x| x * x).sum();
        if w == 0.0 {
            for c in &mut out.u {
                c.coeffs[idx] = ZERO;
            }
            continue;
        }
        let dot = (0..3).fold(ZERO, |acc, i| acc + kappa[i] * f.u[i].coeffs[idx]);
        for i in 0..3 {
            out.u[i].coeffs[idx] = f.u[i].coeffs[idx] - kappa[i] * dot / w;
        }
    }
    out
}

/// Non-diffusive linear terms at `beta = 1`.
pub fn linear_rhs(u: &VelocityField, t: f64) -> VelocityField {
    let table = u.grid().mode_table();
    let mut out = VelocityField::zeros(u.grid(), t);
    linear_rhs_into(&table, u, t, 1.0, &mut out);
    out
}

/// `beta * (k a / w, -U1 + xi a / w, l a / w)` with `a = k U2 + xi U1`.
fn linear_rhs_into(table: &ModeTable, u: &VelocityField, t: f64, beta: f64, out: &mut VelocityField) {
    let [o1, o2, o3] = &mut out.u;
    for idx in 0..table.k.len() {
        let (k, l) = (table.k[idx], table.l[idx]);
        let xi = table.eta[idx] - beta * k * t;
        let w = k * k + xi * xi + l * l;
        if w == 0.0 {
            o1.coeffs[idx] = ZERO;
            o2.coeffs[idx] = ZERO;
            o3.coeffs[idx] = ZERO;
            continue;
        }
        let u1 = u.u[0].coeffs[idx];
        let a = (k * u.u[1].coeffs[idx] + xi * u1) / w;
        o1.coeffs[idx] = beta * k * a;
        o2.coeffs[idx] = beta * (xi * a - u1);
        o3.coeffs[idx] = beta * l * a;
    }
}

/// `-P_L (U . grad_L U)` at `beta = 1`, dealiased.
pub fn nonlinear_rhs(u: &VelocityField, t: f64) -> Result<VelocityField> {
    let g = u.grid();
    let fft = Fft3::new(g);
    let table = g.mode_table();
    let mut out = VelocityField::zeros(g, t);
    nonlinear_rhs_into(&fft, &table, u, t, 1.0, &mut out)?;
    Ok(out)
}

/// Returns `max |U|` on the physical grid.
fn nonlinear_rhs_into(
    fft: &Fft3,
    table: &ModeTable,
    u: &VelocityField,
    t: f64,
    beta: f64,
    out: &mut VelocityField,
) -> Result<f64> {
    let g = u.grid();
    let n = g.len();
    let i_unit = Complex64::new(0.0, 1.0);

    // Real fields packed two per complex transform: field a + i field b.
    // Order: U1, U2, U3, then d_j U^i for i, j in 0..3.
    let mut spec: Vec<Vec<Complex64>> = vec![vec![ZERO; n]; 6];
    let slot = |f: usize| (f / 2, f % 2 == 1);
    for idx in 0..n {
        if !table.retained[idx] {
            continue;
        }
        let kappa = [table.k[idx], table.eta[idx] - beta * table.k[idx] * t, table.l[idx]];
        for i in 0..3 {
            let c = u.u[i].coeffs[idx];
            let mut put = |f: usize, v: Complex64| {
                let (b, odd) = slot(f);
                spec[b][idx] += if odd { i_unit * v } else { v };
            };
            put(i, c);
            for (j, kj) in kappa.iter().enumerate() {
                put(3 + 3 * i + j, i_unit * kj * c);
            }
        }
    }
    spec.iter_mut().for_each(|b| fft.synthesize(b));
    let field = |f: usize, x: usize| -> f64 {
        let (b, odd) = slot(f);
        if odd {
            spec[b][x].im
        } else {
            spec[b][x].re
        }
    };

    let mut prod = [vec![ZERO; n], vec![ZERO; n]];
    let mut umax: f64 = 0.0;
    for x in 0..n {
        let uu = [field(0, x), field(1, x), field(2, x)];
        umax = umax.max((uu[0] * uu[0] + uu[1] * uu[1] + uu[2] * uu[2]).sqrt());
        let mut a = [0.0; 3];
        for (i, ai) in a.iter_mut().enumerate() {
            for (j, uj) in uu.iter().enumerate() {
                *ai += uj * field(3 + 3 * i + j, x);
            }
        }
        prod[0][x] = Complex64::new(a[0], a[1]);
        prod[1][x] = Complex64::new(a[2], 0.0);
    }
    if !umax.is_finite() {
        return Err(Error::BlowUp { t, reason: "non-finite velocity in physical space".into() });
    }
    prod.iter_mut().for_each(|b| fft.analyze(b));

    let half = Complex64::new(0.5, 0.0);
    for idx in 0..n {
        if !table.retained[idx] {
            for c in &mut out.u {
                c.coeffs[idx] = ZERO;
            }
            continue;
        }
        let cj = g.conjugate_index(idx);
        let p = prod[0][idx];
        let pc = prod[0][cj].conj();
        let a1 = half * (p + pc);
        let a2 = (p - pc) / Complex64::new(0.0, 2.0);
        let a3 = half * (prod[1][idx] + prod[1][cj].conj());
        out.u[0].coeffs[idx] = -a1;
        out.u[1].coeffs[idx] = -a2;
        out.u[2].coeffs[idx] = -a3;
    }
    out.set_time(t);
    let projected = leray_project_beta(out, t, beta);
    *out = projected;
    Ok(umax)
}

/// Owns FFT plans and per-mode tables for one configuration.
pub struct Solver {
    cfg: SimConfig,
    grid: GridSpec,
    fft: Fft3,
    table: ModeTable,
    /// `<k, eta, l>^{2N}`, time independent.
    hn_weight: Vec<f64>,
    last_umax: f64,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("cfg", &self.cfg).finish()
    }
}

impl Solver {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid;
        let table = grid.mode_table();
        let n_idx = cfg.n_index();
        let hn_weight = (0..grid.len())
            .map(|i| (1.0 + table.k[i].powi(2) + table.eta[i].powi(2) + table.l[i].powi(2)).powf(n_idx))
            .collect();
        Ok(Self { fft: Fft3::new(grid), grid, table, hn_weight, cfg, last_umax: 0.0 })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Linear plus (if enabled) nonlinear right-hand side, diffusion excluded.
    pub fn rhs(&mut self, u: &VelocityField, t: f64) -> Result<VelocityField> {
        let mut out = VelocityField::zeros(self.grid, t);
        linear_rhs_into(&self.table, u, t, self.cfg.beta, &mut out);
        if self.cfg.nonlinear_enabled {
            let mut nl = VelocityField::zeros(self.grid, t);
            self.last_umax = nonlinear_rhs_into(&self.fft, &self.table, u, t, self.cfg.beta, &mut nl)?;
            for i in 0..3 {
                for (o, v) in out.u[i].coeffs.iter_mut().zip(&nl.u[i].coeffs) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }

    /// `exp(-nu int_{t0}^{t1} w)` per mode with the sheared frequency
    /// `eta - beta k t`.
    fn decay_factors(&self, t0: f64, t1: f64) -> Vec<f64> {
        let (nu, beta, dt) = (self.cfg.nu, self.cfg.beta, t1 - t0);
        (0..self.grid.len())
            .map(|i| {
                let (k, l) = (self.table.k[i], self.table.l[i]);
                let a = self.table.eta[i] - beta * k * t0;
                let b = self.table.eta[i] - beta * k * t1;
                (-nu * ((k * k + l * l) * dt + dt * (a * a + a * b + b * b) / 3.0)).exp()
            })
            .collect()
    }

    /// Advective step limit `cfl / (max|U| max|kappa|)` at time `t`.
    pub fn cfl_dt(&self, t: f64) -> f64 {
        if !self.cfg.nonlinear_enabled || self.last_umax == 0.0 {
            return f64::INFINITY;
        }
        let kmax = (0..self.grid.len())
            .filter(|&i| self.table.retained[i])
            .map(|i| {
                let k = self.table.k[i];
                let xi = self.table.eta[i] - self.cfg.beta * k * t;
                (k * k + xi * xi + self.table.l[i].powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        self.cfg.cfl / (self.last_umax * kmax)
    }

    /// Advance `u` by `h`, then re-project, clear the mean and dealias.
    pub fn step(&mut self, u: &mut VelocityField, h: f64) -> Result<()> {
        let t = u.time();
        let th = t + 0.5 * h;
        let e_half = self.decay_factors(t, th);
        let e_2 = self.decay_factors(th, t + h);
        let n = self.grid.len();
        let grid = self.grid;
        let combine = |terms: &[(&VelocityField, &dyn Fn(usize) -> f64)], time: f64| -> VelocityField {
            let mut out = VelocityField::zeros(grid, time);
            for i in 0..3 {
                for x in 0..n {
                    let mut acc = ZERO;
                    for (f, wgt) in terms {
                        acc += wgt(x) * f.u[i].coeffs[x];
                    }
                    out.u[i].coeffs[x] = acc;
                }
            }
            out
        };
        let eh = |x: usize| e_half[x];
        let ef = |x: usize| e_half[x] * e_2[x];

        let k1 = self.rhs(u, t)?;
        let next = match self.cfg.integrator {
            Integrator::Midpoint => {
                let ua = combine(&[(u, &eh), (&k1, &|x| 0.5 * h * e_half[x])], th);
                let k2 = self.rhs(&ua, th)?;
                combine(&[(u, &ef), (&k2, &|x| h * e_2[x])], t + h)
            }
            Integrator::Rk4 => {
                let ua = combine(&[(u, &eh), (&k1, &|x| 0.5 * h * e_half[x])], th);
                let k2 = self.rhs(&ua, th)?;
                let ub = combine(&[(u, &eh), (&k2, &|_| 0.5 * h)], th);
                let k3 = self.rhs(&ub, th)?;
                let uc = combine(&[(u, &ef), (&k3, &|x| h * e_2[x])], t + h);
                let k4 = self.rhs(&uc, t + h)?;
                let s = h / 6.0;
                combine(
                    &[
                        (u, &ef),
                        (&k1, &|x| s * e_half[x] * e_2[x]),
                        (&k2, &|x| 2.0 * s * e_2[x]),
                        (&k3, &|x| 2.0 * s * e_2[x]),
                        (&k4, &|_| s),
                    ],
                    t + h,
                )
            }
        };
        *u = self.clean(next, t + h);
        if !u.is_finite() {
            return Err(Error::BlowUp { t: t + h, reason: "non-finite spectral coefficient".into() });
        }
        let norm = self.hn_norm(u);
        if norm > self.cfg.blowup_cap {
            return Err(Error::BlowUp {
                t: t + h,
                reason: format!("||U||_H^N = {norm:.3e} exceeds cap {:.3e}", self.cfg.blowup_cap),
            });
        }
        Ok(())
    }

    fn clean(&self, u: VelocityField, t: f64) -> VelocityField {
        let mut out = leray_project_beta(&u, t, self.cfg.beta);
        for c in &mut out.u {
            for (idx, z) in c.coeffs.iter_mut().enumerate() {
                if !self.table.retained[idx] {
                    *z = ZERO;
                }
            }
            enforce_hermitian_of(&self.grid, &mut c.coeffs);
        }
        out
    }

    /// `||U||_{H^N}`, `N = sigma - 2`.
    pub fn hn_norm(&self, u: &VelocityField) -> f64 {
        let mut s = 0.0;
        for c in &u.u {
            for (z, w) in c.coeffs.iter().zip(&self.hn_weight) {
                s += w * z.norm_sqr();
            }
        }
        (s * self.grid.cell_measure()).sqrt()
    }
}

/// Build the configured initial condition at `t = 0`.
pub fn initial_condition(cfg: &SimConfig) -> Result<VelocityField> {
    cfg.validate()?;
    let g = cfg.grid;
    let mut u = match cfg.ic_kind {
        IcKind::File => {
            let path = cfg.ic_file.as_deref().expect("validated");
            let snap = crate::snapshot::read_snapshot(std::path::Path::new(path))?;
            if snap.field.grid() != g {
                return Err(invalid(format!("snapshot grid {:?} does not match config grid {:?}", snap.field.grid(), g)));
            }
            return Ok(snap.field);
        }
        IcKind::SingleMode => single_mode_data(g, cfg.eta0)?,
        IcKind::RandomBand => random_band_data(g, cfg.seed),
    };
    u = leray_project_beta(&u, 0.0, cfg.beta);
    let norm = u.sobolev_norm(cfg.sigma);
    if norm > 0.0 {
        u.scale(cfg.eps / norm);
    } else if cfg.eps > 0.0 {
        return Err(invalid("initial data vanished after projection"));
    }
    Ok(u)
}

fn single_mode_data(g: GridSpec, eta0: f64) -> Result<VelocityField> {
    let j = (eta0 / g.deta()).round() as i64;
    let (ck, cj, cl) = g.dealias_cutoff();
    if ck < 1 || cl < 1 || j.abs() > cj {
        return Err(invalid(format!("mode (1, {eta0}, 1) is outside the resolved band of {g:?}")));
    }
    let idx = g.index_of(1, j, 1).expect("within cutoff");
    let eta = g.eta_of(j);
    let kappa = [1.0, eta, 1.0];
    let w = 2.0 + eta * eta;
    let mut dir = [1.0, 1.0, 1.0];
    let dot: f64 = (0..3).map(|i| kappa[i] * dir[i]).sum();
    dir.iter_mut().zip(kappa).for_each(|(d, k)| *d -= k * dot / w);
    if dir.iter().map(|d| d * d).sum::<f64>() < 1e-12 {
        dir = [1.0, -1.0, 0.0];
    }
    let mut u = VelocityField::zeros(g, 0.0);
    let cj_idx = g.conjugate_index(idx);
    for i in 0..3 {
        u.u[i].coeffs[idx] = Complex64::new(dir[i], 0.0);
        u.u[i].coeffs[cj_idx] = Complex64::new(dir[i], 0.0);
    }
    Ok(u)
}

/// Random phases and amplitudes on `|k|, |l| <= 2`, `|eta| <= 2`.
fn random_band_data(g: GridSpec, seed: u64) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = VelocityField::zeros(g, 0.0);
    for idx in 0..g.len() {
        let kv = g.wave_vector(idx);
        let cj = g.conjugate_index(idx);
        let in_band = kv.k.abs() <= 2 && kv.l.abs() <= 2 && kv.eta.abs() <= 2.0 && g.is_retained(idx);
        if !in_band || cj < idx || (kv.k == 0 && kv.l == 0 && kv.eta == 0.0) {
            continue;
        }
        for c in &mut u.u {
            let amp: f64 = rng.random_range(0.5..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(amp, phase);
            c.coeffs[idx] = z;
            c.coeffs[cj] = z.conj();
        }
    }
    u
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlewUp { t: f64, reason: String },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    /// `||u_in||_{H^sigma}`
    pub eps_in: f64,
    pub reports: Vec<EnergyReport>,
    pub snapshots: Vec<VelocityField>,
    pub final_state: VelocityField,
    pub outcome: Outcome,
    pub warnings: Vec<String>,
    pub steps: usize,
}

impl Trajectory {
    pub fn blew_up(&self) -> bool {
        matches!(self.outcome, Outcome::BlewUp { .. })
    }
}

/// Integrate the configured initial condition to `t_end`.
pub fn run(cfg: &SimConfig) -> Result<Trajectory> {
    let u0 = initial_condition(cfg)?;
    run_from(cfg, u0, |_, _| {})
}

/// Integrate from `u0`, calling `observe` at every diagnostic time.
/// Blow-up ends the run early and is recorded in [`Trajectory::outcome`].
pub fn run_from<F>(cfg: &SimConfig, u0: VelocityField, mut observe: F) -> Result<Trajectory>
where
    F: FnMut(&VelocityField, &EnergyReport),
{
    let mut solver = Solver::new(cfg.clone())?;
    if u0.grid() != cfg.grid {
        return Err(invalid("initial field grid differs from config grid"));
    }
    let mut warnings = Vec::new();
    if cfg.beta != 1.0 {
        warnings.push(format!("beta = {} : weighted diagnostics assume beta = 1", cfg.beta));
    }
    let t0 = u0.time();
    let mut u = solver.clean(u0, t0);
    let eps_in = u.sobolev_norm(cfg.sigma);
    let edge = u.u.iter().map(|c| c.y_edge_energy_fraction()).fold(0.0, f64::max);
    if edge > 0.01 {
        warnings.push(format!("initial data has {:.1}% of its energy near the y-frequency edge", 100.0 * edge));
    }

    let dcfg = DiagnosticsConfig::from_sim(cfg, eps_in)?;
    let mut acc = Accumulators::new(dcfg);
    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    let report = acc.report(&u);
    observe(&u, &report);
    reports.push(report);
    if cfg.snapshot_every > 0 {
        snapshots.push(u.clone());
    }

    let t_end = cfg.t_end;
    let mut steps = 0usize;
    let mut outcome = Outcome::Completed;
    let mut edge_warned = false;
    // Seed the velocity bound used by the advective limit.
    if cfg.nonlinear_enabled && u.time() < t_end {
        solver.rhs(&u, u.time())?;
    }
    while u.time() < t_end * (1.0 - 1e-14) - 1e-14 {
        let t = u.time();
        let mut h = cfg.dt.min(solver.cfl_dt(t));
        if t + h > t_end || t_end - (t + h) < 1e-9 * h {
            h = t_end - t;
        }
        match solver.step(&mut u, h) {
            Ok(()) => {}
            Err(Error::BlowUp { t, reason }) => {
                outcome = Outcome::BlewUp { t, reason };
                break;
            }
            Err(e) => return Err(e),
        }
        steps += 1;
        let last = u.time() >= t_end * (1.0 - 1e-14) - 1e-14;
        if steps.is_multiple_of(cfg.diag_every) || last {
            let report = acc.report(&u);
            observe(&u, &report);
            reports.push(report);
            if !edge_warned {
                let edge = u.u.iter().map(|c| c.y_edge_energy_fraction()).fold(0.0, f64::max);
                if edge > 0.01 {
                    edge_warned = true;
                    warnings.push(format!(
                        "t = {:.3}: {:.1}% of the energy sits near the y-frequency edge; increase ny or ly",
                        u.time(),
                        100.0 * edge
                    ));
                }
            }
        }
        if cfg.snapshot_every > 0 && steps.is_multiple_of(cfg.snapshot_every) {
            snapshots.push(u.clone());
        }
    }
    Ok(Trajectory { config: cfg.clone(), eps_in, reports, snapshots, final_state: u, outcome, warnings, steps })
}
