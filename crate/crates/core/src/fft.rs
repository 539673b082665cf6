//! Complex 3D FFT over the `(x, y, z)` storage layout of [`GridSpec`].
//!
//! `analyze` maps samples to amplitude coefficients (forward DFT scaled by
//! `1/(nx ny nz)`); `synthesize` is the unscaled inverse sum.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::spectral::GridSpec;

pub struct Fft3 {
    grid: GridSpec,
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

impl Fft3 {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let mut plan = |n, dir| planner.plan_fft(n, dir);
        let fwd = [
            plan(grid.nx, FftDirection::Forward),
            plan(grid.ny, FftDirection::Forward),
            plan(grid.nz, FftDirection::Forward),
        ];
        let inv = [
            plan(grid.nx, FftDirection::Inverse),
            plan(grid.ny, FftDirection::Inverse),
            plan(grid.nz, FftDirection::Inverse),
        ];
        Self { grid, fwd, inv }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Physical samples -> amplitude coefficients.
    pub fn analyze(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
        let scale = 1.0 / self.grid.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    /// Amplitude coefficients -> physical samples.
    pub fn synthesize(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let GridSpec { nx, ny, nz, .. } = self.grid;
        assert_eq!(data.len(), nx * ny * nz);

        // z: contiguous lines
        data.par_chunks_mut(ny * nz).for_each(|slab| plans[2].process(slab));

        // y: transpose each (ny x nz) slab so y lines become contiguous
        data.par_chunks_mut(ny * nz).for_each(|slab| {
            let mut t = transpose(slab, ny, nz);
            plans[1].process(&mut t);
            untranspose(&t, slab, ny, nz);
        });

        // x: treat the array as nx x (ny nz)
        let m = ny * nz;
        let mut t = transpose(data, nx, m);
        t.par_chunks_mut(nx * 64.min(m).max(1)).for_each(|lines| plans[0].process(lines));
        untranspose(&t, data, nx, m);
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

fn untranspose(t: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[r * cols + c] = t[c * rows + r];
        }
    }
}
