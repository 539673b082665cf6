//! Frequency grids, moving-frame symbols, zero/non-zero projections and
//! Sobolev norms.
//!
//! Fields live in the sheared frame `X = x - t y`, so a mode labelled
//! `(k, eta, l)` has physical y-frequency `eta - k t`. The x and z
//! directions are unit tori in measure with integer wavenumbers; y is a
//! periodic box of length `ly` standing in for the real line.
//!
//! Coefficients are amplitudes: `f(X, Y, Z) = sum c(k, j, l) e^{i(kX + eta_j Y + lZ)}`.
//! The L2 norm is taken over one box, so `||f||^2 = ly * sum |c|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fft::Fft3;

/// One Fourier label `(k, eta, l)`. Stored exactly as given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveVector {
    pub k: i64,
    pub eta: f64,
    pub l: i64,
}

impl WaveVector {
    pub fn new(k: i64, eta: f64, l: i64) -> Self {
        Self { k, eta, l }
    }

    /// `|k, eta, l|`
    pub fn magnitude(&self) -> f64 {
        self.magnitude_sq().sqrt()
    }

    pub fn magnitude_sq(&self) -> f64 {
        let (k, l) = (self.k as f64, self.l as f64);
        k * k + self.eta * self.eta + l * l
    }

    /// `|k, l|`, the symbol of `|grad_{X,Z}|`.
    pub fn kl_magnitude(&self) -> f64 {
        let (k, l) = (self.k as f64, self.l as f64);
        (k * k + l * l).sqrt()
    }

    /// `<k, eta, l> = sqrt(1 + |k, eta, l|^2)`
    pub fn bracket(&self) -> f64 {
        (1.0 + self.magnitude_sq()).sqrt()
    }

    /// Time `eta / k` at which the sheared y-frequency vanishes.
    pub fn critical_time(&self) -> Option<f64> {
        (self.k != 0).then(|| self.eta / self.k as f64)
    }
}

/// Sheared y-frequency `eta - k t`.
#[inline]
pub fn sheared_eta(t: f64, kv: WaveVector) -> f64 {
    kv.eta - kv.k as f64 * t
}

/// Symbol of `-Delta_L`: `k^2 + (eta - k t)^2 + l^2`.
#[inline]
pub fn w_symbol(t: f64, kv: WaveVector) -> f64 {
    let (k, l) = (kv.k as f64, kv.l as f64);
    let xi = sheared_eta(t, kv);
    k * k + xi * xi + l * l
}

/// `d/dt w = -2k(eta - k t)`.
#[inline]
pub fn w_dot_symbol(t: f64, kv: WaveVector) -> f64 {
    -2.0 * kv.k as f64 * sheared_eta(t, kv)
}

/// Exact `int_0^t w(tau) dtau`.
pub fn integral_w(t: f64, kv: WaveVector) -> f64 {
    integral_w_between(0.0, t, kv)
}

/// Exact `int_{t0}^{t1} w(tau) dtau`, written without the cubic
/// cancellation of `integral_w(t1) - integral_w(t0)`.
pub fn integral_w_between(t0: f64, t1: f64, kv: WaveVector) -> f64 {
    let (k, l) = (kv.k as f64, kv.l as f64);
    let a = sheared_eta(t0, kv);
    let b = sheared_eta(t1, kv);
    let dt = t1 - t0;
    (k * k + l * l) * dt + dt * (a * a + a * b + b * b) / 3.0
}

/// `|grad_L|` symbol, `|k, eta - k t, l|`.
#[inline]
pub fn nabla_l_magnitude(t: f64, kv: WaveVector) -> f64 {
    w_symbol(t, kv).sqrt()
}

/// Discretization of `T x R x T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "default_ly")]
    pub ly: f64,
}

fn default_ly() -> f64 {
    32.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 16, ny: 64, nz: 16, ly: default_ly() }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nz: usize, ly: f64) -> Result<Self> {
        let g = Self { nx, ny, nz, ly };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n < 2 || n % 2 != 0 {
                return Err(invalid(format!("{name} must be a positive even integer, got {n}")));
            }
        }
        if !(self.ly > 0.0 && self.ly.is_finite()) {
            return Err(invalid(format!("ly must be positive, got {}", self.ly)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spacing of the y-frequency grid, `2 pi / ly`.
    pub fn deta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.ly
    }

    pub fn eta_of(&self, j: i64) -> f64 {
        self.deta() * j as f64
    }

    /// Weight of one mode in the discrete Plancherel sum.
    pub fn cell_measure(&self) -> f64 {
        self.ly
    }

    /// Largest retained |index| per axis under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> (i64, i64, i64) {
        let c = |n: usize| ((n as i64) - 1) / 3;
        (c(self.nx), c(self.ny), c(self.nz))
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.ny + iy) * self.nz + iz
    }

    /// Signed mode numbers `(k, j, l)` of a storage index.
    #[inline]
    pub fn mode(&self, idx: usize) -> (i64, i64, i64) {
        let iz = idx % self.nz;
        let iy = (idx / self.nz) % self.ny;
        let ix = idx / (self.ny * self.nz);
        (signed(ix, self.nx), signed(iy, self.ny), signed(iz, self.nz))
    }

    pub fn index_of(&self, k: i64, j: i64, l: i64) -> Option<usize> {
        let wrap = |m: i64, n: usize| -> Option<usize> {
            let half = (n / 2) as i64;
            (m >= -half && m < half).then(|| m.rem_euclid(n as i64) as usize)
        };
        Some(self.index(wrap(k, self.nx)?, wrap(j, self.ny)?, wrap(l, self.nz)?))
    }

    pub fn wave_vector(&self, idx: usize) -> WaveVector {
        let (k, j, l) = self.mode(idx);
        WaveVector::new(k, self.eta_of(j), l)
    }

    /// Storage index of `(-k, -j, -l)`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let iz = idx % self.nz;
        let iy = (idx / self.nz) % self.ny;
        let ix = idx / (self.ny * self.nz);
        self.index((self.nx - ix) % self.nx, (self.ny - iy) % self.ny, (self.nz - iz) % self.nz)
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        let (k, j, l) = self.mode(idx);
        let (ck, cj, cl) = self.dealias_cutoff();
        k.abs() <= ck && j.abs() <= cj && l.abs() <= cl
    }

    pub fn mode_table(&self) -> ModeTable {
        let n = self.len();
        let mut table = ModeTable {
            k: Vec::with_capacity(n),
            eta: Vec::with_capacity(n),
            l: Vec::with_capacity(n),
            retained: Vec::with_capacity(n),
        };
        for idx in 0..n {
            let kv = self.wave_vector(idx);
            table.k.push(kv.k as f64);
            table.eta.push(kv.eta);
            table.l.push(kv.l as f64);
            table.retained.push(self.is_retained(idx));
        }
        table
    }
}

#[inline]
fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Flat per-index copies of the mode labels, for hot loops.
#[derive(Clone, Debug)]
pub struct ModeTable {
    pub k: Vec<f64>,
    pub eta: Vec<f64>,
    pub l: Vec<f64>,
    pub retained: Vec<bool>,
}

/// Spectral coefficients of one real scalar field at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
    pub time: f64,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, time: f64) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()], time }
    }

    pub fn from_fn(grid: GridSpec, time: f64, mut f: impl FnMut(WaveVector) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| f(grid.wave_vector(i))).collect();
        Self { grid, coeffs, time }
    }

    /// Keep only the `k = 0` coefficients (x-average).
    pub fn project_zero(&self) -> Self {
        self.filter(|k| k == 0)
    }

    /// Keep only the `k != 0` coefficients.
    pub fn project_nonzero(&self) -> Self {
        self.filter(|k| k != 0)
    }

    fn filter(&self, keep: impl Fn(i64) -> bool) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            if !keep(self.grid.mode(idx).0) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `||<D>^s f||_{L2}` over one box.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        sobolev_norm_of(&self.grid, &self.coeffs, s)
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Largest `|c(-m) - conj(c(m))|` over the grid, ignoring unpaired
    /// Nyquist planes.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect_of(&self.grid, &self.coeffs)
    }

    pub fn enforce_hermitian(&mut self) {
        enforce_hermitian_of(&self.grid, &mut self.coeffs);
    }

    /// Zero every coefficient outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.is_retained(idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Sample the field on the physical grid. Returns the complex samples;
    /// for a Hermitian field the imaginary parts are rounding noise.
    pub fn to_physical(&self, fft: &Fft3) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft.synthesize(&mut buf);
        buf
    }

    pub fn from_physical(grid: GridSpec, time: f64, samples: &[f64], fft: &Fft3) -> Self {
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.analyze(&mut buf);
        Self { grid, coeffs: buf, time }
    }

    /// Fraction of the L2 energy sitting within 10% of the retained
    /// y-frequency edge. Large values mean `ly`/`ny` under-resolve the field.
    pub fn y_edge_energy_fraction(&self) -> f64 {
        let (_, cj, _) = self.grid.dealias_cutoff();
        let edge = 0.9 * cj as f64;
        let mut total = 0.0;
        let mut near = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if (self.grid.mode(idx).1.abs() as f64) >= edge {
                near += e;
            }
        }
        if total > 0.0 {
            near / total
        } else {
            0.0
        }
    }
}

pub(crate) fn sobolev_norm_of(grid: &GridSpec, coeffs: &[Complex64], s: f64) -> f64 {
    let mut sum = 0.0;
    for (idx, c) in coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        if e == 0.0 {
            continue;
        }
        let kv = grid.wave_vector(idx);
        sum += (1.0 + kv.magnitude_sq()).powf(s) * e;
    }
    (sum * grid.cell_measure()).sqrt()
}

fn has_partner(grid: &GridSpec, idx: usize) -> bool {
    let (k, j, l) = grid.mode(idx);
    k != -(grid.nx as i64) / 2 && j != -(grid.ny as i64) / 2 && l != -(grid.nz as i64) / 2
}

pub(crate) fn hermitian_defect_of(grid: &GridSpec, coeffs: &[Complex64]) -> f64 {
    (0..coeffs.len())
        .filter(|&i| has_partner(grid, i))
        .map(|i| (coeffs[grid.conjugate_index(i)] - coeffs[i].conj()).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn enforce_hermitian_of(grid: &GridSpec, coeffs: &mut [Complex64]) {
    for i in 0..coeffs.len() {
        if !has_partner(grid, i) {
            coeffs[i] = Complex64::new(0.0, 0.0);
            continue;
        }
        let j = grid.conjugate_index(i);
        if j < i {
            continue;
        }
        let avg = 0.5 * (coeffs[i] + coeffs[j].conj());
        coeffs[i] = avg;
        coeffs[j] = avg.conj();
    }
}
