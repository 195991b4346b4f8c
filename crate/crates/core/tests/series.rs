use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use coulomb_tmatrix::series::{backward_bracket_limit, half_integer_sum, series_bracket};
use coulomb_tmatrix::{
    born_term, fock_sum, make_fock_point, rational_sum, schwinger_integral, standard_omega_grid,
    tmatrix_series, Acceleration, EnergyState, RationalGamma, SeriesOptions, TMatrixError,
};
use proptest::prelude::*;

fn opts() -> SeriesOptions {
    SeriesOptions::default()
}

fn s(g: f64, w: f64) -> f64 {
    fock_sum(g, w, &opts()).unwrap().value
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn half_integer_identity_at_right_angle() {
    let plus = PI / 2.0 * FRAC_1_SQRT_2 + FRAC_1_SQRT_2 * (SQRT_2 - 1.0).ln();
    let minus = PI / 2.0 * FRAC_1_SQRT_2 - FRAC_1_SQRT_2 * (SQRT_2 - 1.0).ln();
    assert!(rel(half_integer_sum(true, PI / 2.0).unwrap(), plus) < 1e-15);
    assert!(rel(half_integer_sum(false, PI / 2.0).unwrap(), minus) < 1e-15);
    assert!(rel(s(0.5, PI / 2.0), plus) < 1e-12);
    assert!(rel(s(-0.5, PI / 2.0), minus) < 1e-12);
}

#[test]
fn brute_force_partial_sums_reach_the_identity() {
    // 10⁷ raw terms, then the mean of the partial sums over the last 8 terms
    // (one full period of sin(nπ/2)) cancels the oscillating remainder
    let w = PI / 2.0;
    let n_max = 10_000_000usize;
    let mut acc = 0.0;
    let mut window = 0.0;
    for n in 1..=n_max {
        let nf = n as f64;
        acc += (nf * w).sin() / (nf + 0.5);
        if n > n_max - 8 {
            window += acc;
        }
    }
    let averaged = window / 8.0;
    let exact = half_integer_sum(true, w).unwrap();
    assert!((averaged - exact).abs() < 1e-8, "{averaged} vs {exact}");
}

#[test]
fn half_integer_identity_near_forward_limit() {
    for &w in &[1e-3, 1e-4] {
        for positive in [true, false] {
            let g = if positive { 0.5 } else { -0.5 };
            let a = half_integer_sum(positive, w).unwrap();
            assert!(rel(a, s(g, w)) < 1e-10, "{g} {w}");
        }
    }
}

#[test]
fn sawtooth_at_zero_gamma() {
    for i in 1..50 {
        let w = PI * i as f64 / 50.0;
        assert!((s(0.0, w) - 0.5 * (PI - w)).abs() < 1e-14);
    }
}

#[test]
fn sum_vanishes_backward() {
    for g in [-3.5, -0.5, 0.0, 1.0 / 3.0, 2.0] {
        assert_eq!(s(g, PI), 0.0);
    }
}

#[test]
fn terms_flip_sign_under_reflection() {
    for n in 1..100 {
        for &w in &[0.3, 1.1, 2.9] {
            let nf = n as f64;
            let a = (nf * w).sin() / (nf + 0.7);
            let b = (nf * (2.0 * PI - w)).sin() / (nf + 0.7);
            assert!((a + b).abs() < 1e-12);
        }
    }
}

#[test]
fn rational_half_collapses_to_identity_on_fine_grid() {
    let r = RationalGamma::positive(1, 2).unwrap();
    for i in 0..100 {
        let w = 0.05 + (PI - 0.1) * i as f64 / 99.0;
        let a = rational_sum(r, w).unwrap();
        let b = half_integer_sum(true, w).unwrap();
        assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "{w}");
    }
}

#[test]
fn rational_examples() {
    let third = RationalGamma::positive(1, 3).unwrap();
    assert!(rel(rational_sum(third, PI / 2.0).unwrap(), 0.560_326_091_837_136_27) < 1e-9);
    let m32 = RationalGamma::negative(3, 2).unwrap();
    assert!(rel(rational_sum(m32, PI / 3.0).unwrap(), -0.415_092_910_644_060_58) < 1e-9);
}

#[test]
fn oracles_agree_pairwise_on_standard_grid() {
    let values = [
        (false, 1, 2),
        (true, 1, 2),
        (false, 1, 3),
        (true, 1, 3),
        (false, 1, 4),
        (true, 1, 4),
        (false, 3, 2),
        (true, 3, 2),
        (false, 5, 2),
        (true, 5, 2),
        (false, 7, 2),
        (true, 7, 2),
    ];
    for (neg, n, m) in values {
        let r = RationalGamma::new(neg, n, m).unwrap();
        let g = r.value();
        for w in standard_omega_grid() {
            let a = s(g, w);
            let b = rational_sum(r, w).unwrap();
            assert!(rel(b, a) < 1e-8, "rational {r} {w}");
            if g > -1.0 {
                let c = schwinger_integral(g, w).unwrap().value * w.sin();
                assert!(rel(c, a) < 1e-8, "schwinger {r} {w}");
                assert!(rel(c, b) < 1e-8);
            }
        }
    }
}

#[test]
fn pole_limit() {
    for &eps in &[1e-3, 1e-5] {
        for &w in &[0.5, 1.0, 2.0, 3.0] {
            let g = -1.0 + eps;
            let v = (1.0 + g) * s(g, w);
            assert!(rel(v, w.sin()) <= 10.0 * eps, "{eps} {w}");
        }
    }
    for g in [-1.0, -2.0, -7.0] {
        assert_eq!(fock_sum(g, 1.0, &opts()), Err(TMatrixError::BoundStatePole(g)));
    }
    assert!(fock_sum(-1.0 + 1e-12, 1.0, &opts()).is_ok());
}

#[test]
fn series_tmatrix_errors() {
    let st = EnergyState::dimensionless(1.0, -2.0).unwrap();
    let p = make_fock_point(&st, 1.0, 2.0, 0.2).unwrap();
    assert_eq!(tmatrix_series(&st, &p, &opts()), Err(TMatrixError::BoundStatePole(-2.0)));
    let st = EnergyState::dimensionless(1.0, 0.5).unwrap();
    let p = make_fock_point(&st, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(tmatrix_series(&st, &p, &opts()), Err(TMatrixError::ForwardSingularity));
}

#[test]
fn backward_point_uses_the_limit() {
    for g in [0.5, -0.5, 1.7, -2.5] {
        let st = EnergyState::dimensionless(1.0, g).unwrap();
        let p = make_fock_point(&st, 1.0, 1.0, -1.0).unwrap();
        assert_eq!(p.omega(), PI);
        let t = tmatrix_series(&st, &p, &opts()).unwrap();
        let lim = backward_bracket_limit(g, &opts()).unwrap().value;
        assert_eq!(t.bracket, lim);
        let near = series_bracket(g, PI - 1e-3, &opts()).unwrap().value;
        assert!((near - lim).abs() < 1e-4 * lim.abs().max(1.0), "{g}");
    }
    let averaged = opts().with_acceleration(Acceleration::AveragedTail);
    assert_eq!(series_bracket(0.5, PI, &averaged), Err(TMatrixError::BackwardIndeterminate));
}

#[test]
fn born_dominance_in_the_forward_limit() {
    for g in [-2.5, -0.5, 0.5, 3.5] {
        let st = EnergyState::dimensionless(1.0, g).unwrap();
        let mut prev = f64::INFINITY;
        for &w in &[1e-2, 1e-3] {
            // on the sphere the scattering angle equals ω
            let p = make_fock_point(&st, 1.0, 1.0, f64::cos(w)).unwrap();
            let ratio = tmatrix_series(&st, &p, &opts()).unwrap().value / born_term(&st, &p).unwrap();
            let dev = (ratio - 1.0).abs();
            assert!(dev < 2.0 * g.abs() * p.omega(), "{g} {w}: {ratio}");
            assert!(dev < prev);
            prev = dev;
        }
    }
}

proptest! {
    #[test]
    fn accelerations_agree(g in -3.9f64..4.0, w in 0.2f64..3.0) {
        prop_assume!((g - g.round()).abs() > 0.05 || g >= 0.0);
        let a = s(g, w);
        let b = fock_sum(g, w, &opts().with_acceleration(Acceleration::AveragedTail)).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn series_tmatrix_is_exchange_symmetric(
        g in -3.5f64..3.5,
        k in 0.01f64..10.0,
        kp in 0.01f64..10.0,
        c in -1.0f64..0.99,
    ) {
        prop_assume!(!(g < 0.0 && g.fract() == 0.0));
        let st = EnergyState::dimensionless(0.7, g).unwrap();
        let a = tmatrix_series(&st, &make_fock_point(&st, k, kp, c).unwrap(), &opts()).unwrap();
        let b = tmatrix_series(&st, &make_fock_point(&st, kp, k, c).unwrap(), &opts()).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
