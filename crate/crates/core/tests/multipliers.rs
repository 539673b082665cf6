mod common;

use common::{c, gauss_legendre, log_uniform, random_mode, rk4, rng};
use couette_core::multipliers::{
    check_ghost_bounds, check_m_bounds, coercivity, ghost_closed, ghost_log_rate, m_exact, m_log_rate,
    m_ode_residual, m_switching_times, profile, MultiplierParams, PROFILE_COLUMNS,
};
use couette_core::spectral::{sheared_eta, w_symbol};
use couette_core::{Error, WaveVector};
use proptest::prelude::*;
use rand::Rng;

/// `log m(t)` from `m(0) = 1` and the window rate `2k(eta - kt)/w`,
/// integrated by Gauss-Legendre over the active window only.
fn log_m_by_quadrature(t: f64, kv: WaveVector, p: MultiplierParams) -> f64 {
    let tc = kv.eta / kv.k as f64;
    let lo = tc.max(0.0);
    let hi = (tc + p.window_length()).min(t);
    if hi <= lo {
        return 0.0;
    }
    let k = kv.k as f64;
    gauss_legendre(|s| 2.0 * k * sheared_eta(s, kv) / w_symbol(s, kv), lo, hi, 200, 10)
}

#[test]
fn m_matches_integrated_rate() {
    let mut r = rng(10);
    for _ in 0..500 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let p = MultiplierParams::with_window(log_uniform(&mut r, 1e-4, 1e-1), r.random_range(0.5..20.0)).unwrap();
        let t = r.random_range(0.0..100.0);
        let expect = log_m_by_quadrature(t, kv, p);
        let got = m_exact(t, kv, p).ln();
        assert!((got - expect).abs() < 1e-9, "{kv:?} {p:?} t={t}: {got} vs {expect}");
    }
}

#[test]
fn m_ode_residual_is_small_away_from_switches() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 2000 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let p = MultiplierParams::new(log_uniform(&mut r, 1e-4, 1e-1)).unwrap();
        let t = r.random_range(0.0..100.0);
        match m_ode_residual(t, kv, p) {
            Ok(res) => {
                assert!(res <= 1e-6, "{kv:?} t={t}: residual {res}");
                checked += 1;
            }
            Err(Error::SwitchingTime { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn residual_refuses_switching_times() {
    let p = MultiplierParams::new(1e-3).unwrap();
    let kv = WaveVector::new(1, 3.0, 1);
    for s in m_switching_times(kv, p) {
        assert!(matches!(m_ode_residual(s, kv, p), Err(Error::SwitchingTime { .. })));
    }
}

#[test]
fn ghost_matches_rk4_of_its_ode() {
    let mut r = rng(12);
    for _ in 0..300 {
        let kv = random_mode(&mut r, 8, 8, 50.0);
        let p = MultiplierParams::new(log_uniform(&mut r, 1e-4, 1e-1)).unwrap();
        let t = r.random_range(0.0..100.0);
        let c3 = p.nu.cbrt();
        let tc = kv.eta / kv.k as f64;
        let y = rk4(|s, y: &[_; 1]| [-c3 / (1.0 + c3 * c3 * (s - tc).powi(2)) * y[0]], [c(1.0, 0.0)], 0.0, t, |_| 0.01);
        let closed = ghost_closed(t, kv, p);
        assert!((y[0].re - closed).abs() < 1e-8, "{kv:?} t={t}: {} vs {closed}", y[0].re);
    }
}

#[test]
fn bounds_hold_on_large_sample() {
    let mut r = rng(13);
    let mut ghost = Vec::with_capacity(100_000);
    let mut worst_c1 = f64::INFINITY;
    for _ in 0..100 {
        let p = MultiplierParams::new(log_uniform(&mut r, 1e-6, 1e-1)).unwrap();
        let samples: Vec<_> =
            (0..1000).map(|_| (r.random_range(0.0..100.0), random_mode(&mut r, 8, 8, 50.0))).collect();
        let rep = check_m_bounds(&samples, p);
        assert!(rep.upper_ok && rep.max_m <= 1.0);
        assert!(rep.c2 >= 1.0 - 1e-12, "c2 = {}", rep.c2);
        worst_c1 = worst_c1.min(rep.c1);
        ghost.extend(samples.into_iter().map(|(t, kv)| (t, kv, p)));
    }
    assert!(worst_c1 >= 1.0 / (1.0 + 1e6), "c1 = {worst_c1}");
    let g = check_ghost_bounds(&ghost);
    assert!(g.range_ok, "{g:?}");
    assert!(g.coercivity_inf >= 0.1, "{g:?}");
}

#[test]
fn profile_columns_match_rows() {
    let p = MultiplierParams::new(1e-2).unwrap();
    let kv = WaveVector::new(2, 5.0, 1);
    let rows = profile(&[0.0, 1.0, 2.5, 10.0], kv, p);
    assert_eq!(PROFILE_COLUMNS.len(), 9);
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row.m, m_exact(row.t, kv, p));
        assert_eq!(row.big_m, ghost_closed(row.t, kv, p));
        assert_eq!(row.mdot_over_m, m_log_rate(row.t, kv, p));
        assert_eq!(row.big_mdot_over_big_m, ghost_log_rate(row.t, kv, p));
    }
}

fn kmode() -> impl Strategy<Value = WaveVector> {
    (1i64..=8, any::<bool>(), -50.0..50.0f64, -8i64..=8)
        .prop_map(|(k, neg, eta, l)| WaveVector::new(if neg { -k } else { k }, eta, l))
}

proptest! {
    #[test]
    fn ghost_is_non_increasing(kv in kmode(), nu in 1e-5..0.5f64, t in 0.0..100.0f64, dt in 0.0..10.0f64) {
        let p = MultiplierParams::new(nu).unwrap();
        prop_assert!(ghost_closed(t + dt, kv, p) <= ghost_closed(t, kv, p) * (1.0 + 1e-15));
        prop_assert!(ghost_log_rate(t, kv, p) <= 0.0);
    }

    #[test]
    fn m_is_non_increasing(kv in kmode(), nu in 1e-5..0.5f64, t in 0.0..100.0f64, dt in 0.0..10.0f64) {
        // The window opens at the critical time, after which w grows.
        let p = MultiplierParams::new(nu).unwrap();
        prop_assert!(m_exact(t + dt, kv, p) <= m_exact(t, kv, p) * (1.0 + 1e-12));
    }

    #[test]
    fn coercivity_is_positive(kv in kmode(), nu in 1e-6..0.1f64, t in 0.0..100.0f64) {
        let p = MultiplierParams::new(nu).unwrap();
        prop_assert!(coercivity(t, kv, p) >= 0.1);
    }

    #[test]
    fn multipliers_start_at_one(kv in kmode(), nu in 1e-5..0.5f64) {
        let p = MultiplierParams::new(nu).unwrap();
        prop_assert!((ghost_closed(0.0, kv, p) - 1.0).abs() < 1e-15);
        prop_assert!((m_exact(0.0, kv, p) - 1.0).abs() < 1e-15);
    }
}
