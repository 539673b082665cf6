//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use couette_core::WaveVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// Non-zero `k` in `[-kmax, kmax]`, any `l` in `[-lmax, lmax]`, `eta` uniform.
pub fn random_mode(r: &mut ChaCha8Rng, kmax: i64, lmax: i64, eta_max: f64) -> WaveVector {
    let mut k = 0;
    while k == 0 {
        k = r.random_range(-kmax..=kmax);
    }
    WaveVector::new(k, r.random_range(-eta_max..eta_max), r.random_range(-lmax..=lmax))
}

pub fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (r.random_range(lo.ln()..hi.ln())).exp()
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss-Legendre with `panels` equal panels of `order` points.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre_rule(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * sum
}

/// Classical RK4 on a complex state with a time-dependent step size.
pub fn rk4<const N: usize, F, H>(f: F, y0: [Complex64; N], t0: f64, t1: f64, step: H) -> [Complex64; N]
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
    H: Fn(f64) -> f64,
{
    let axpy = |y: &[Complex64; N], h: f64, k: &[Complex64; N]| {
        let mut out = *y;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let mut y = y0;
    let mut t = t0;
    while t < t1 {
        let h = step(t).min(t1 - t);
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        if h <= 0.0 {
            break;
        }
    }
    y
}

pub type Mat3 = [[f64; 3]; 3];

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Dense matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &Mat3) -> Mat3 {
    let norm = a.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let s: Mat3 = a.map(|r| r.map(|x| x * scale));
    let mut result = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut term = result;
    for n in 1..=30 {
        term = matmul(&term, &s).map(|r| r.map(|x| x / n as f64));
        for i in 0..3 {
            for j in 0..3 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

pub fn apply(m: &Mat3, v: [Complex64; 3]) -> [Complex64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|j| m[i][j] * v[j]).sum())
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Momentum-form linear per-mode system at `beta = 1`:
/// `U' = (k a / w, -U1 + xi a / w, l a / w) - nu w U`, `a = k U2 + xi U1`.
pub fn velocity_rhs(t: f64, u: &[Complex64; 3], kv: WaveVector, nu: f64) -> [Complex64; 3] {
    let (k, l) = (kv.k as f64, kv.l as f64);
    let xi = kv.eta - k * t;
    let w = k * k + xi * xi + l * l;
    let a = (k * u[1] + xi * u[0]) / w;
    [k * a - nu * w * u[0], -u[0] + xi * a - nu * w * u[1], l * a - nu * w * u[2]]
}
