//! Closed-form and quadrature solutions of the linearized per-mode dynamics.
//!
//! For `k != 0` the pair `(Q1, Q2) = -w (U1, U2)` is symmetrized into
//! `K1 = |k,l| w^{-1/2} Q1`, `K2 = |k| w^{-1/2} Q2`, which obey
//!
//! ```text
//! K1' = +a K2 - nu w K1
//! K2' = -a K1 - nu w K2,      a = |k| |k,l| / w
//! ```
//!
//! i.e. a rotation by the phase `int a` times the heat factor
//! `exp(-nu int w)`. `U3` is then driven by `(U1, U2)` and obtained by one
//! quadrature. The x-averaged modes follow a lower-triangular constant
//! matrix with a triple eigenvalue, solved exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::spectral::{integral_w, integral_w_between, sheared_eta, w_symbol, WaveVector};

/// Absolute tolerance (per unit |K(0)|) for the U3 forcing quadrature.
pub const U3_QUADRATURE_TOL: f64 = 1e-10;

/// Symmetrized unknowns at one non-zero mode.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeStateK {
    pub k1: Complex64,
    pub k2: Complex64,
}

/// Fourier coefficients of `Delta_L U1`, `Delta_L U2` at one mode.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeStateQ {
    pub q1: Complex64,
    pub q2: Complex64,
}

/// x-averaged velocity coefficients at one `(eta, l)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ZeroModeState {
    pub u1: Complex64,
    pub u2: Complex64,
    pub u3: Complex64,
}

fn require_nonzero(kv: WaveVector) -> Result<()> {
    if kv.k == 0 {
        Err(Error::ZeroFrequency { eta: kv.eta, l: kv.l })
    } else {
        Ok(())
    }
}

impl ModeStateK {
    pub fn new(k1: Complex64, k2: Complex64) -> Self {
        Self { k1, k2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.k1.norm_sqr() + self.k2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn to_q(&self, t: f64, kv: WaveVector) -> Result<ModeStateQ> {
        require_nonzero(kv)?;
        let sw = w_symbol(t, kv).sqrt();
        Ok(ModeStateQ {
            q1: self.k1 * sw / kv.kl_magnitude(),
            q2: self.k2 * sw / kv.k.abs() as f64,
        })
    }

    /// `(U1, U2) = -(K1 / (|k,l| sqrt w), K2 / (|k| sqrt w))`
    pub fn to_velocity(&self, t: f64, kv: WaveVector) -> Result<(Complex64, Complex64)> {
        require_nonzero(kv)?;
        let sw = w_symbol(t, kv).sqrt();
        Ok((-self.k1 / (kv.kl_magnitude() * sw), -self.k2 / (kv.k.abs() as f64 * sw)))
    }

    pub fn from_velocity(u1: Complex64, u2: Complex64, t: f64, kv: WaveVector) -> Result<Self> {
        require_nonzero(kv)?;
        let sw = w_symbol(t, kv).sqrt();
        Ok(Self { k1: -kv.kl_magnitude() * sw * u1, k2: -(kv.k.abs() as f64) * sw * u2 })
    }

    fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { k1: c * self.k1 + s * self.k2, k2: -s * self.k1 + c * self.k2 }
    }

    fn scaled(&self, f: f64) -> Self {
        Self { k1: self.k1 * f, k2: self.k2 * f }
    }
}

impl ModeStateQ {
    pub fn to_k(&self, t: f64, kv: WaveVector) -> Result<ModeStateK> {
        require_nonzero(kv)?;
        let isw = 1.0 / w_symbol(t, kv).sqrt();
        Ok(ModeStateK { k1: kv.kl_magnitude() * isw * self.q1, k2: kv.k.abs() as f64 * isw * self.q2 })
    }
}

/// `int_0^t |k| |k,l| / w(s) ds`, in closed form.
pub fn phase_angle(t: f64, kv: WaveVector) -> Result<f64> {
    phase_angle_between(0.0, t, kv)
}

pub fn phase_angle_between(t0: f64, t1: f64, kv: WaveVector) -> Result<f64> {
    require_nonzero(kv)?;
    let a = kv.kl_magnitude();
    let sign = kv.k.signum() as f64;
    Ok(sign * ((sheared_eta(t0, kv) / a).atan() - (sheared_eta(t1, kv) / a).atan()))
}

/// Exact solution of the symmetrized system from `t = 0`.
pub fn evolve_k_closed(state0: ModeStateK, t: f64, nu: f64, kv: WaveVector) -> Result<ModeStateK> {
    evolve_k_between(state0, 0.0, t, nu, kv)
}

/// Exact propagation of a state known at `t0` to `t1`.
pub fn evolve_k_between(state: ModeStateK, t0: f64, t1: f64, nu: f64, kv: WaveVector) -> Result<ModeStateK> {
    let phi = phase_angle_between(t0, t1, kv)?;
    let decay = (-nu * integral_w_between(t0, t1, kv)).exp();
    Ok(state.rotated(phi).scaled(decay))
}

/// Whether `|K(t)|^2 <= exp(-(nu/6) k^2 t^3) |K(0)|^2` (plus 1e-12 slack).
pub fn enhanced_dissipation_check(state0: ModeStateK, t: f64, nu: f64, kv: WaveVector) -> Result<bool> {
    let kt = evolve_k_closed(state0, t, nu, kv)?;
    let k = kv.k as f64;
    let envelope = (-(nu / 6.0) * k * k * t.powi(3)).exp() * state0.norm_sqr();
    Ok(kt.norm_sqr() <= envelope + 1e-12)
}

/// Right-hand side of the U3 equation, `(k l U2 + l (eta - k t) U1) / w`,
/// expressed through `K`.
fn u3_forcing(s: f64, kv: WaveVector, state: ModeStateK) -> Complex64 {
    let (u1, u2) = state.to_velocity(s, kv).expect("k != 0 checked by caller");
    let (k, l) = (kv.k as f64, kv.l as f64);
    l * (k * u2 + sheared_eta(s, kv) * u1) / w_symbol(s, kv)
}

fn forcing_breaks(kv: WaveVector) -> Vec<f64> {
    let tc = kv.eta / kv.k as f64;
    let width = kv.kl_magnitude() / kv.k.abs() as f64;
    vec![tc - 5.0 * width, tc, tc + 5.0 * width]
}

/// `U3(t)` for the closed-form `K` path started from `k0`.
///
/// Uses the exact integrating factor: with `K(s) = e^{-nu I(s)} R(phi(s)) K0`
/// the weighted forcing `e^{nu I(s)} F(s)` is independent of `nu`, so only
/// a smooth, bounded integrand is handed to the quadrature.
pub fn evolve_u3(u3_0: Complex64, k0: ModeStateK, t: f64, nu: f64, kv: WaveVector) -> Result<Complex64> {
    require_nonzero(kv)?;
    let decay = (-nu * integral_w(t, kv)).exp();
    if kv.l == 0 || k0.norm_sqr() == 0.0 || t == 0.0 {
        return Ok(decay * u3_0);
    }
    let integrand = |s: f64| {
        let phi = phase_angle(s, kv).expect("k != 0");
        u3_forcing(s, kv, k0.rotated(phi))
    };
    let tol = U3_QUADRATURE_TOL * k0.norm();
    let forced = adaptive_simpson(integrand, 0.0, t, &forcing_breaks(kv), tol)?;
    Ok(decay * (u3_0 + forced))
}

/// `U3(t)` driven by an arbitrary `K` trajectory `path(s)` (damped values).
pub fn evolve_u3_along<P>(u3_0: Complex64, path: P, t: f64, nu: f64, kv: WaveVector) -> Result<Complex64>
where
    P: Fn(f64) -> ModeStateK,
{
    require_nonzero(kv)?;
    let decay = (-nu * integral_w(t, kv)).exp();
    if kv.l == 0 || t == 0.0 {
        return Ok(decay * u3_0);
    }
    let scale = path(0.0).norm().max(f64::MIN_POSITIVE);
    let integrand = |s: f64| (nu * integral_w(s, kv)).exp() * u3_forcing(s, kv, path(s));
    let forced = adaptive_simpson(integrand, 0.0, t, &forcing_breaks(kv), U3_QUADRATURE_TOL * scale)?;
    Ok(decay * (u3_0 + forced))
}

/// A-priori envelope `exp(-(nu/12) k^2 t^3) [|U3(0)| + 12 |K(0)| / |k|]`.
pub fn u3_envelope(u3_0_abs: f64, k0: ModeStateK, t: f64, nu: f64, kv: WaveVector) -> f64 {
    let k = kv.k as f64;
    (-(nu / 12.0) * k * k * t.powi(3)).exp() * (u3_0_abs + 12.0 / k.abs() * k0.norm())
}

/// Exact zero-frequency evolution: heat decay times the lift-up shear
/// `u2 -= l^2/(eta^2+l^2) t u1`, `u3 += eta l/(eta^2+l^2) t u1`.
pub fn zero_mode_evolve(s0: ZeroModeState, t: f64, nu: f64, eta: f64, l: i64) -> Result<ZeroModeState> {
    let lf = l as f64;
    let r2 = eta * eta + lf * lf;
    if r2 == 0.0 {
        return Err(Error::ZeroZeroMode);
    }
    let decay = (-nu * r2 * t).exp();
    Ok(ZeroModeState {
        u1: decay * s0.u1,
        u2: decay * (s0.u2 - (lf * lf / r2) * t * s0.u1),
        u3: decay * (s0.u3 + (eta * lf / r2) * t * s0.u1),
    })
}

/// Reference envelopes `(<t>^{-1} e^{-(nu/6) t^3} u, e^{-(nu/6) t^3} u)` at
/// `k = 1` for the `(U1, U2)` and `U3` non-zero components.
pub fn inviscid_damping_rates(u_in_norm: f64, t: f64, nu: f64) -> (f64, f64) {
    let bound3 = (-(nu / 6.0) * t.powi(3)).exp() * u_in_norm;
    (bound3 / (1.0 + t * t).sqrt(), bound3)
}

/// `w^{-1} / (<t>^{-2} |k, eta, l|^2)`; bounded by a universal constant for
/// `k != 0`.
pub fn inverse_w_ratio(t: f64, kv: WaveVector) -> f64 {
    (1.0 + t * t) / (w_symbol(t, kv) * kv.magnitude_sq())
}
