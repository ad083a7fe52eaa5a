use std::f64::consts::PI;

use approx::assert_relative_eq;
use mchgap::homology::quadrature::{chebyshev_integral, gauss_legendre};
use mchgap::series::{binomial_power, eval, inverse, shift_poly, sqrt_unit};
use mchgap::{Complex, Complex32, Series, Theta, Theta32};
use proptest::prelude::*;

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    let (x, w) = gauss_legendre::<f64>(20);
    for k in 0..40 {
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        assert!((got - want).abs() < 1e-14, "degree {k}: {got} vs {want}");
    }
}

#[test]
fn gauss_legendre_in_single_precision() {
    let (x, w) = gauss_legendre::<f32>(12);
    let total: f32 = w.iter().sum();
    assert!((total - 2.0).abs() < 1e-5);
    let m4: f32 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
    assert!((m4 - 0.4).abs() < 1e-5);
}

#[test]
fn chebyshev_rule_absorbs_the_endpoint_weight() {
    let v = chebyshev_integral::<f64>(16, |t| Complex::new(t * t, 0.0));
    assert_relative_eq!(v.re, PI / 2.0, epsilon = 1e-14);
    let v = chebyshev_integral::<f64>(64, |t| Complex::new(0.0, (3.0 * t).cos()));
    // ∫ cos(3t)/√(1−t²) = π J₀(3)
    assert_relative_eq!(v.im, PI * -0.260_051_954_901_933_4, epsilon = 1e-13);
}

fn coeffs() -> impl Strategy<Value = Vec<Complex>> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 6)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex::new(a, b)).collect())
}

proptest! {
    #[test]
    fn inverse_is_a_reciprocal(mut a in coeffs()) {
        a[0] += Complex::new(1.0, 0.0);
        let b = inverse(&a);
        let prod = Series::taylor(a).mul(&Series::taylor(b));
        prop_assert!((prod.coeff(0) - 1.0).norm() < 1e-12);
        for n in 1..6 {
            prop_assert!(prod.coeff(n).norm() < 1e-12);
        }
    }

    #[test]
    fn sqrt_squares_back(mut a in coeffs()) {
        a[0] = Complex::new(1.0, 0.0);
        let s = Series::taylor(sqrt_unit(&a));
        let sq = s.mul(&s);
        for n in 0..6 {
            prop_assert!((sq.coeff(n) - a[n as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_polynomial_agrees(p in coeffs(), z in (-1.0f64..1.0, -1.0f64..1.0), e in (-0.3f64..0.3, -0.3f64..0.3)) {
        let z = Complex::new(z.0, z.1);
        let eps = Complex::new(e.0, e.1);
        let shifted = shift_poly(&p, z, p.len());
        prop_assert!((eval(&shifted, eps) - eval(&p, z + eps)).norm() < 1e-12);
    }

    #[test]
    fn negative_powers_expand(k in -4i32..0, z in (0.5f64..2.0, -1.0f64..1.0)) {
        let z = Complex::new(z.0, z.1);
        let eps = z * 0.05;
        let c = binomial_power(z, k, 30);
        prop_assert!((eval(&c, eps) - (z + eps).powi(k)).norm() < 1e-12 * z.norm().powi(k));
    }
}

fn genus_two() -> Vec<Vec<Complex>> {
    vec![
        vec![Complex::new(0.3, 1.1), Complex::new(-0.2, 0.4)],
        vec![Complex::new(-0.2, 0.4), Complex::new(0.5, 0.9)],
    ]
}

fn c2() -> impl Strategy<Value = Vec<Complex>> {
    prop::collection::vec((-1.0f64..1.0, -0.6f64..0.6), 2)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_even_and_periodic(z in c2(), n in (-3i64..4, -3i64..4)) {
        let ev = Theta::new(&genus_two(), 1e-14).unwrap();
        let v = ev.eval(&z);
        let neg: Vec<Complex> = z.iter().map(|w| -w).collect();
        prop_assert!((v.ratio(&ev.eval(&neg)) - 1.0).norm() < 1e-12);
        let shifted = vec![z[0] + n.0 as f64, z[1] + n.1 as f64];
        prop_assert!((v.ratio(&ev.eval(&shifted)) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn theta_quasi_periodicity(z in c2(), k in 0usize..2) {
        let b = genus_two();
        let ev = Theta::new(&b, 1e-14).unwrap();
        let shifted: Vec<Complex> = (0..2).map(|i| z[i] + b[i][k]).collect();
        let factor = (Complex::new(0.0, -PI) * (b[k][k] + 2.0 * z[k])).exp();
        let lhs = ev.eval(&shifted);
        let rhs = ev.eval(&z);
        prop_assert!((lhs.ratio(&rhs) - factor).norm() < 1e-11 * factor.norm().max(1.0));
    }
}

#[test]
fn single_precision_theta_tracks_double() {
    let b = genus_two();
    let ev64 = Theta::new(&b, 1e-14).unwrap();
    let ev32 = Theta32::new(&b, 1e-6).unwrap();
    let z = [Complex::new(0.2, 0.1), Complex::new(-0.4, 0.3)];
    let z32: Vec<Complex32> = z.iter().map(|w| Complex32::new(w.re as f32, w.im as f32)).collect();
    let a = ev64.eval(&z);
    let b = ev32.eval(&z32);
    let a = a.value * a.log_scale.exp();
    let b = b.value * b.log_scale.exp();
    assert!((a.re - b.re as f64).abs() < 1e-5 * a.norm());
    assert!((a.im - b.im as f64).abs() < 1e-5 * a.norm());
}
