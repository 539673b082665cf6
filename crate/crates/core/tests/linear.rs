mod common;

use common::{apply, c, expm, gauss_legendre, log_uniform, random_complex, random_mode, rel_err, rk4, rng, velocity_rhs};
use couette_core::linear::{
    evolve_k_between, evolve_k_closed, evolve_u3, evolve_u3_along, phase_angle, u3_envelope, zero_mode_evolve,
    ModeStateK, ZeroModeState,
};
use couette_core::spectral::{integral_w, w_symbol};
use couette_core::{Error, WaveVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// RK4 of the symmetrized system, step limited by the local stiffness.
fn k_rk4(k0: ModeStateK, t: f64, nu: f64, kv: WaveVector) -> ModeStateK {
    let kf = kv.k as f64;
    let a_num = kf.abs() * kv.kl_magnitude();
    let rhs = |s: f64, y: &[Complex64; 2]| {
        let w = w_symbol(s, kv);
        let a = a_num / w;
        [a * y[1] - nu * w * y[0], -a * y[0] - nu * w * y[1]]
    };
    let step = |s: f64| {
        let w = w_symbol(s, kv);
        (0.01 / (nu * w + a_num / w)).min(0.005)
    };
    let y = rk4(rhs, [k0.k1, k0.k2], 0.0, t, step);
    ModeStateK::new(y[0], y[1])
}

#[test]
fn phase_angle_matches_quadrature() {
    let mut r = rng(1);
    for _ in 0..300 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let t = r.random_range(0.0..50.0);
        let a_num = (kv.k as f64).abs() * kv.kl_magnitude();
        let quad = gauss_legendre(|s| a_num / w_symbol(s, kv), 0.0, t, 400, 10);
        let exact = phase_angle(t, kv).unwrap();
        assert!((exact - quad).abs() < 1e-10, "{kv:?} t={t}: {exact} vs {quad}");
    }
}

#[test]
fn closed_form_matches_rk4() {
    let mut r = rng(2);
    for _ in 0..100 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let nu = log_uniform(&mut r, 1e-4, 1e-1);
        let t = r.random_range(0.0..20.0);
        let k0 = ModeStateK::new(random_complex(&mut r), random_complex(&mut r));
        let exact = evolve_k_closed(k0, t, nu, kv).unwrap();
        if exact.norm() < 1e-200 * k0.norm() {
            continue;
        }
        let num = k_rk4(k0, t, nu, kv);
        let err = ((exact.k1 - num.k1).norm_sqr() + (exact.k2 - num.k2).norm_sqr()).sqrt() / exact.norm();
        assert!(err < 1e-6, "{kv:?} nu={nu} t={t}: {err}");
    }
}

#[test]
fn closed_form_agrees_with_momentum_form() {
    // K -> (U1, U2) via the symmetrizing weights, U3 by quadrature, all
    // compared against RK4 of the unreduced velocity system.
    let mut r = rng(3);
    for _ in 0..40 {
        let kv = random_mode(&mut r, 4, 4, 10.0);
        let nu = log_uniform(&mut r, 1e-3, 1e-1);
        let t = r.random_range(0.5..8.0);
        let u0 = [random_complex(&mut r), random_complex(&mut r), random_complex(&mut r)];
        let k0 = ModeStateK::from_velocity(u0[0], u0[1], 0.0, kv).unwrap();
        let kt = evolve_k_closed(k0, t, nu, kv).unwrap();
        let (u1, u2) = kt.to_velocity(t, kv).unwrap();
        let u3 = evolve_u3(u0[2], k0, t, nu, kv).unwrap();
        let num = rk4(|s, y| velocity_rhs(s, y, kv, nu), u0, 0.0, t, |s| (0.005 / (1.0 + nu * w_symbol(s, kv))).min(1e-3));
        let scale = num.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in [u1, u2, u3].iter().zip(&num) {
            assert!((a - b).norm() < 1e-8 * scale, "{kv:?} nu={nu} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn evolve_u3_along_closed_path_matches_evolve_u3() {
    let mut r = rng(4);
    for _ in 0..30 {
        let kv = random_mode(&mut r, 4, 4, 20.0);
        let nu = log_uniform(&mut r, 1e-3, 1e-1);
        let t = r.random_range(0.0..10.0);
        let k0 = ModeStateK::new(random_complex(&mut r), random_complex(&mut r));
        let u30 = random_complex(&mut r);
        let a = evolve_u3(u30, k0, t, nu, kv).unwrap();
        let b = evolve_u3_along(u30, |s| evolve_k_closed(k0, s, nu, kv).unwrap(), t, nu, kv).unwrap();
        assert!((a - b).norm() < 1e-8 * (k0.norm() + u30.norm()), "{a} vs {b}");
    }
}

#[test]
fn u3_stays_under_envelope() {
    let mut r = rng(5);
    for _ in 0..200 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let nu = log_uniform(&mut r, 1e-4, 1e-1);
        let t = r.random_range(0.0..50.0);
        let k0 = ModeStateK::new(random_complex(&mut r), random_complex(&mut r));
        let u30 = random_complex(&mut r);
        let u3 = evolve_u3(u30, k0, t, nu, kv).unwrap();
        assert!(u3.norm() <= u3_envelope(u30.norm(), k0, t, nu, kv) + 1e-8);
    }
}

fn zero_mode_matrix(eta: f64, l: i64, nu: f64) -> common::Mat3 {
    let lf = l as f64;
    let r2 = eta * eta + lf * lf;
    [[-nu * r2, 0.0, 0.0], [-lf * lf / r2, -nu * r2, 0.0], [eta * lf / r2, 0.0, -nu * r2]]
}

#[test]
fn zero_mode_matches_matrix_exponential() {
    let mut r = rng(6);
    for _ in 0..200 {
        let eta = r.random_range(-20.0..20.0);
        let l = r.random_range(-8i64..=8);
        let nu = log_uniform(&mut r, 1e-4, 1e-1);
        let t = r.random_range(0.0..20.0);
        let v0 = [random_complex(&mut r), random_complex(&mut r), random_complex(&mut r)];
        let m = zero_mode_matrix(eta, l, nu).map(|row| row.map(|x| x * t));
        let expect = apply(&expm(&m), v0);
        let got = zero_mode_evolve(ZeroModeState { u1: v0[0], u2: v0[1], u3: v0[2] }, t, nu, eta, l).unwrap();
        for (a, b) in [got.u1, got.u2, got.u3].iter().zip(&expect) {
            assert!((a - b).norm() < 1e-10, "eta={eta} l={l} nu={nu} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn lift_up_slopes_without_viscosity() {
    let s0 = ZeroModeState { u1: c(1.0, 0.0), u2: c(0.0, 0.0), u3: c(0.0, 0.0) };
    for t in [0.5, 1.0, 3.0] {
        let s = zero_mode_evolve(s0, t, 0.0, 1.0, 1).unwrap();
        assert_eq!(s.u2.re / t, -0.5);
        assert_eq!(s.u3.re / t, 0.5);
    }
}

#[test]
fn zero_frequency_inputs_are_rejected() {
    let k0 = ModeStateK::new(c(1.0, 0.0), c(0.0, 0.0));
    let kv = WaveVector::new(0, 1.0, 1);
    assert!(matches!(evolve_k_closed(k0, 1.0, 0.1, kv), Err(Error::ZeroFrequency { .. })));
    assert!(matches!(evolve_u3(c(0.0, 0.0), k0, 1.0, 0.1, kv), Err(Error::ZeroFrequency { .. })));
    assert!(matches!(zero_mode_evolve(ZeroModeState::default(), 1.0, 0.1, 0.0, 0), Err(Error::ZeroZeroMode)));
}

fn kmode() -> impl Strategy<Value = WaveVector> {
    (1i64..=8, any::<bool>(), -50.0..50.0f64, -8i64..=8)
        .prop_map(|(k, neg, eta, l)| WaveVector::new(if neg { -k } else { k }, eta, l))
}

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #[test]
    fn norm_decays_exactly(kv in kmode(), a in cplx(), b in cplx(), nu in 1e-4..1e-1f64, t in 0.0..50.0f64) {
        let k0 = ModeStateK::new(a, b);
        let kt = evolve_k_closed(k0, t, nu, kv).unwrap();
        let expect = (-2.0 * nu * integral_w(t, kv)).exp() * k0.norm_sqr();
        prop_assert!((kt.norm_sqr() - expect).abs() <= 1e-10 * expect.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn propagation_is_a_semigroup(kv in kmode(), a in cplx(), b in cplx(), nu in 1e-4..1e-1f64, t0 in 0.0..10.0f64, dt in 0.0..10.0f64) {
        let k0 = ModeStateK::new(a, b);
        let direct = evolve_k_closed(k0, t0 + dt, nu, kv).unwrap();
        let mid = evolve_k_closed(k0, t0, nu, kv).unwrap();
        let two = evolve_k_between(mid, t0, t0 + dt, nu, kv).unwrap();
        let scale = direct.norm().max(1e-300);
        prop_assert!(rel_err(two.k1, direct.k1).min((two.k1 - direct.k1).norm() / scale) < 1e-11);
        prop_assert!(rel_err(two.k2, direct.k2).min((two.k2 - direct.k2).norm() / scale) < 1e-11);
    }

    #[test]
    fn q_and_velocity_round_trip(kv in kmode(), a in cplx(), b in cplx(), t in 0.0..20.0f64) {
        let k0 = ModeStateK::new(a, b);
        let back = k0.to_q(t, kv).unwrap().to_k(t, kv).unwrap();
        prop_assert!((back.k1 - a).norm() < 1e-12 && (back.k2 - b).norm() < 1e-12);
        let (u1, u2) = k0.to_velocity(t, kv).unwrap();
        let again = ModeStateK::from_velocity(u1, u2, t, kv).unwrap();
        prop_assert!((again.k1 - a).norm() < 1e-12 && (again.k2 - b).norm() < 1e-12);
        // Q = -w U
        let q = k0.to_q(t, kv).unwrap();
        let w = w_symbol(t, kv);
        prop_assert!((q.q1 + w * u1).norm() < 1e-10 * q.q1.norm().max(1.0));
        prop_assert!((q.q2 + w * u2).norm() < 1e-10 * q.q2.norm().max(1.0));
    }
}
