//! Riemann theta function by ellipsoid enumeration.
//!
//! `Θ(z) = Σ_n exp(πi nᵀBn + 2πi nᵀz)` is returned as `(v, s)` with
//! `Θ = v·exp(s)`, `s = π yᵀY⁻¹y`, `y = Im z`, `Y = Im B`. After completing
//! the square every term of `v` has modulus `exp(−π‖n + Y⁻¹y‖²_Y) ≤ 1`, so
//! `|v|` is a shift-invariant size measure.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::scalar::Real;

/// Lattice points enumerated per evaluation before giving up.
pub const MAX_POINTS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("NotRiemannMatrix: {0}")]
    NotRiemannMatrix(String),
    #[error("TruncationOverflow: {points} lattice points needed for tolerance {tol:e}")]
    TruncationOverflow { points: f64, tol: f64 },
}

/// Scaled theta value `Θ = value·exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue<T> {
    pub value: Complex<T>,
    pub log_scale: T,
}

impl<T: Real> ThetaValue<T> {
    /// Ratio `self / other` as a plain complex number.
    pub fn ratio(&self, other: &Self) -> Complex<T> {
        self.value / other.value * (self.log_scale - other.log_scale).exp()
    }
}

/// Tail bound `(g/2)(2/r)^g Γ(g/2, (R − r/2)²)` on the terms outside the
/// ellipsoid of radius `R`, for `R ≥ (√g + r)/2`.
pub fn tail_bound(g: usize, r: f64, radius: f64) -> f64 {
    let gf = g as f64;
    if radius < 0.5 * (gf.sqrt() + r) {
        return f64::INFINITY;
    }
    let x = (radius - 0.5 * r).powi(2);
    // Γ(a, x) = Q(a, x)·Γ(a)
    let upper = gamma_ur(0.5 * gf, x) * statrs::function::gamma::gamma(0.5 * gf);
    0.5 * gf * (2.0 / r).powi(g as i32) * upper
}

#[derive(Clone, Debug)]
pub struct ThetaEvaluator<T> {
    g: usize,
    /// Row-major `B`.
    b: Vec<Complex<T>>,
    /// Row-major `Y⁻¹`.
    yinv: Vec<T>,
    /// Upper-triangular `U` with `πY = UᵀU`, row-major.
    u: Vec<T>,
    radius: T,
    shortest: f64,
    tol: f64,
}

fn cholesky(a: &[f64], g: usize) -> Option<Vec<f64>> {
    // returns lower L with a = L Lᵀ
    let mut l = vec![0.0; g * g];
    for i in 0..g {
        for j in 0..=i {
            let mut s = a[i * g + j];
            for k in 0..j {
                s -= l[i * g + k] * l[j * g + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * g + i] = s.sqrt();
            } else {
                l[i * g + j] = s / l[j * g + j];
            }
        }
    }
    Some(l)
}

impl<T: Real> ThetaEvaluator<T> {
    /// Builds the evaluator for a symmetric `B` with `Im B ≻ 0` and a target
    /// absolute accuracy `tol` relative to `exp(log_scale)`.
    pub fn new(b: &[Vec<crate::Complex>], tol: f64) -> Result<Self, ThetaError> {
        let g = b.len();
        if g == 0 || b.iter().any(|r| r.len() != g) {
            return Err(ThetaError::NotRiemannMatrix("not square".into()));
        }
        let mut asym: f64 = 0.0;
        for i in 0..g {
            for j in 0..g {
                asym = asym.max((b[i][j] - b[j][i]).norm());
            }
        }
        if asym > 1e-8 {
            return Err(ThetaError::NotRiemannMatrix(format!("asymmetry {asym:e}")));
        }
        let y: Vec<f64> = (0..g * g)
            .map(|k| 0.5 * (b[k / g][k % g].im + b[k % g][k / g].im))
            .collect();
        let piy: Vec<f64> = y.iter().map(|v| std::f64::consts::PI * v).collect();
        // πY = LLᵀ, U = Lᵀ
        let l = cholesky(&piy, g).ok_or_else(|| ThetaError::NotRiemannMatrix("Im B not positive definite".into()))?;
        let mut u = vec![0.0; g * g];
        for i in 0..g {
            for j in i..g {
                u[i * g + j] = l[j * g + i];
            }
        }
        let yinv = {
            let m = nalgebra::DMatrix::from_row_slice(g, g, &y);
            let inv = m
                .try_inverse()
                .ok_or_else(|| ThetaError::NotRiemannMatrix("Im B singular".into()))?;
            (0..g * g).map(|k| inv[(k / g, k % g)]).collect::<Vec<f64>>()
        };
        let mut ev = ThetaEvaluator {
            g,
            b: b.iter()
                .flatten()
                .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
                .collect(),
            yinv: yinv.iter().map(|&v| T::lit(v)).collect(),
            u: u.iter().map(|&v| T::lit(v)).collect(),
            radius: T::zero(),
            shortest: 0.0,
            tol,
        };
        let r = ev.shortest_vector(&u);
        ev.shortest = r;
        let mut rad = 0.5 * ((g as f64).sqrt() + r);
        while tail_bound(g, r, rad) > tol {
            rad += 0.05;
        }
        let points = ev.ellipsoid_volume(rad, &u);
        if points > MAX_POINTS as f64 {
            return Err(ThetaError::TruncationOverflow { points, tol });
        }
        ev.radius = T::lit(rad);
        Ok(ev)
    }

    pub fn genus(&self) -> usize {
        self.g
    }
    pub fn radius(&self) -> f64 {
        self.radius.to_f64().unwrap()
    }
    pub fn shortest_vector_length(&self) -> f64 {
        self.shortest
    }
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn ellipsoid_volume(&self, rad: f64, u: &[f64]) -> f64 {
        let g = self.g as f64;
        let det: f64 = (0..self.g).map(|i| u[i * self.g + i]).product();
        let ball = std::f64::consts::PI.powf(0.5 * g) / statrs::function::gamma::gamma(0.5 * g + 1.0) * rad.powf(g);
        ball / det
    }

    /// Length of the shortest nonzero vector of `U·ℤ^g`.
    fn shortest_vector(&self, u: &[f64]) -> f64 {
        let g = self.g;
        let mut best = f64::INFINITY;
        for j in 0..g {
            let n2: f64 = (0..g).map(|i| u[i * g + j].powi(2)).sum();
            best = best.min(n2.sqrt());
        }
        let centre = vec![0.0; g];
        let mut n = vec![0i64; g];
        enumerate::<f64>(
            u,
            g,
            &centre,
            best * best * (1.0 + 1e-12),
            g,
            0.0,
            &mut n,
            &mut |n, q| {
                if n.iter().any(|&x| x != 0) && q > 0.0 {
                    best = best.min(q.sqrt());
                }
            },
        );
        best
    }

    /// `Θ(z)` in scaled form.
    pub fn eval(&self, z: &[Complex<T>]) -> ThetaValue<T> {
        self.eval_with_char(z, None)
    }

    /// Θ with the sum restricted to the ellipsoid and the terms weighted by
    /// `chi(n)`; `None` is the plain theta function.
    fn eval_with_char(&self, z: &[Complex<T>], chi: Option<&dyn Fn(&[i64]) -> Complex<T>>) -> ThetaValue<T> {
        let g = self.g;
        let pi = T::PI();
        let (centre, log_scale) = self.centre(z);
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut n = vec![0i64; g];
        let r2 = self.radius * self.radius;
        let iu = Complex::new(T::zero(), T::one());
        let zero = Complex::new(T::zero(), T::zero());
        walk(
            self,
            z,
            &centre,
            r2,
            g,
            T::zero(),
            zero,
            &mut n,
            &mut |n: &[i64], ph| {
                let term = (iu * pi * ph - Complex::new(log_scale, T::zero())).exp();
                acc = acc
                    + match chi {
                        Some(f) => term * f(n),
                        None => term,
                    };
            },
        );
        ThetaValue { value: acc, log_scale }
    }

    /// `∂Θ/∂z_k` for every k, in the same scale as [`Self::eval`].
    pub fn gradient(&self, z: &[Complex<T>]) -> Vec<ThetaValue<T>> {
        let two_pi_i = Complex::new(T::zero(), T::lit(2.0) * T::PI());
        (0..self.g)
            .map(|k| {
                let f = move |n: &[i64]| two_pi_i * T::from_i64(n[k]).unwrap();
                self.eval_with_char(z, Some(&f))
            })
            .collect()
    }

    /// `Θ(z)` and `∂Θ/∂z_k` in one pass, sharing the scale of `Θ`.
    pub fn eval_with_gradient(&self, z: &[Complex<T>]) -> (ThetaValue<T>, Vec<Complex<T>>) {
        let g = self.g;
        let pi = T::PI();
        let (centre, log_scale) = self.centre(z);
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut grad = vec![Complex::new(T::zero(), T::zero()); g];
        let mut n = vec![0i64; g];
        let r2 = self.radius * self.radius;
        let iu = Complex::new(T::zero(), T::one());
        let two_pi_i = iu * (T::lit(2.0) * pi);
        let zero = Complex::new(T::zero(), T::zero());
        walk(
            self,
            z,
            &centre,
            r2,
            g,
            T::zero(),
            zero,
            &mut n,
            &mut |n: &[i64], ph| {
                let term = (iu * pi * ph - Complex::new(log_scale, T::zero())).exp();
                acc = acc + term;
                for k in 0..g {
                    if n[k] != 0 {
                        grad[k] = grad[k] + term * two_pi_i * T::from_i64(n[k]).unwrap();
                    }
                }
            },
        );
        (ThetaValue { value: acc, log_scale }, grad)
    }

    /// Ellipsoid centre `−Y⁻¹ Im z` and `π yᵀY⁻¹y`.
    fn centre(&self, z: &[Complex<T>]) -> (Vec<T>, T) {
        let g = self.g;
        let y: Vec<T> = z.iter().map(|w| w.im).collect();
        let mut c = vec![T::zero(); g];
        let mut s = T::zero();
        for i in 0..g {
            for j in 0..g {
                c[i] = c[i] + self.yinv[i * g + j] * y[j];
            }
            s = s + y[i] * c[i];
        }
        (c.iter().map(|&v| -v).collect(), T::PI() * s)
    }

    /// Number of lattice points the current radius visits for `z`.
    pub fn point_count(&self, z: &[Complex<T>]) -> usize {
        let (centre, _) = self.centre(z);
        let mut count = 0usize;
        let mut n = vec![0i64; self.g];
        enumerate(
            &self.u,
            self.g,
            &centre,
            self.radius * self.radius,
            self.g,
            T::zero(),
            &mut n,
            &mut |_, _| count += 1,
        );
        count
    }
}

/// Fincke–Pohst: visits every `n` with `‖U(n − centre)‖² ≤ r2`, last index
/// first. `level` counts the indices still free.
#[allow(clippy::too_many_arguments)]
fn enumerate<T: Real>(
    u: &[T],
    g: usize,
    centre: &[T],
    r2: T,
    level: usize,
    partial: T,
    n: &mut [i64],
    visit: &mut dyn FnMut(&[i64], T),
) {
    if level == 0 {
        visit(n, partial);
        return;
    }
    let i = level - 1;
    let uii = u[i * g + i];
    let mut shift = T::zero();
    for j in i + 1..g {
        shift = shift + u[i * g + j] * (T::from_i64(n[j]).unwrap() - centre[j]);
    }
    let rem = r2 - partial;
    if rem < T::zero() {
        return;
    }
    let mid = centre[i] - shift / uii;
    let half = rem.sqrt() / uii;
    let lo = (mid - half).ceil().to_i64().unwrap();
    let hi = (mid + half).floor().to_i64().unwrap();
    for k in lo..=hi {
        n[i] = k;
        let v = uii * (T::from_i64(k).unwrap() - centre[i]) + shift;
        let p = partial + v * v;
        if p <= r2 {
            enumerate(u, g, centre, r2, i, p, n, visit);
        }
    }
    n[i] = 0;
}

/// Like `enumerate`, also accumulating `nᵀBn + 2nᵀz` one coordinate at a time.
#[allow(clippy::too_many_arguments)]
fn walk<T: Real>(
    ev: &ThetaEvaluator<T>,
    z: &[Complex<T>],
    centre: &[T],
    r2: T,
    level: usize,
    partial: T,
    phase: Complex<T>,
    n: &mut [i64],
    visit: &mut dyn FnMut(&[i64], Complex<T>),
) {
    if level == 0 {
        visit(n, phase);
        return;
    }
    let g = ev.g;
    let u = &ev.u;
    let i = level - 1;
    let uii = u[i * g + i];
    let mut shift = T::zero();
    let mut lin = z[i];
    for j in i + 1..g {
        let nj = T::from_i64(n[j]).unwrap();
        shift = shift + u[i * g + j] * (nj - centre[j]);
        if n[j] != 0 {
            lin = lin + ev.b[i * g + j] * nj;
        }
    }
    let rem = r2 - partial;
    if rem < T::zero() {
        return;
    }
    let bii = ev.b[i * g + i];
    let two = T::lit(2.0);
    let mid = centre[i] - shift / uii;
    let half = rem.sqrt() / uii;
    let lo = (mid - half).ceil().to_i64().unwrap();
    let hi = (mid + half).floor().to_i64().unwrap();
    for k in lo..=hi {
        n[i] = k;
        let kf = T::from_i64(k).unwrap();
        let v = uii * (kf - centre[i]) + shift;
        let p = partial + v * v;
        if p <= r2 {
            let ph = phase + bii * (kf * kf) + lin * (two * kf);
            walk(ev, z, centre, r2, i, p, ph, n, visit);
        }
    }
    n[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = crate::Complex;

    fn b1(tau: C) -> Vec<Vec<C>> {
        vec![vec![tau]]
    }

    #[test]
    fn genus_one_matches_jacobi_product() {
        // θ₃(z|τ) = Π (1 − q^{2m})(1 + 2q^{2m−1}cos 2πz + q^{4m−2}), q = e^{iπτ}
        let tau = C::new(0.1, 0.8);
        let ev = ThetaEvaluator::<f64>::new(&b1(tau), 1e-15).unwrap();
        let q = (C::new(0.0, std::f64::consts::PI) * tau).exp();
        for z in [C::new(0.3, 0.0), C::new(-0.2, 0.25), C::new(0.7, -0.4)] {
            let mut prod = C::new(1.0, 0.0);
            for m in 1..60 {
                let q2m = q.powi(2 * m);
                let qo = q.powi(2 * m - 1);
                prod *= (C::new(1.0, 0.0) - q2m) * (1.0 + 2.0 * qo * (2.0 * std::f64::consts::PI * z).cos() + qo * qo);
            }
            let v = ev.eval(&[z]);
            let got = v.value * v.log_scale.exp();
            assert!((got - prod).norm() < 1e-13 * prod.norm().max(1.0), "{got} {prod}");
        }
    }

    #[test]
    fn genus_three_matches_box_sum() {
        let b = vec![
            vec![C::new(1.0, 1.42), C::new(1.0, 0.64), C::new(1.0, 0.78)],
            vec![C::new(1.0, 0.64), C::new(1.0, 1.6), C::new(0.0, 0.96)],
            vec![C::new(1.0, 0.78), C::new(0.0, 0.96), C::new(0.0, 1.74)],
        ];
        let ev = ThetaEvaluator::<f64>::new(&b, 1e-14).unwrap();
        let pi_i = C::new(0.0, std::f64::consts::PI);
        for z in [
            vec![C::new(-2.4, -0.63), C::new(-0.15, 0.0), C::new(-0.75, -0.63)],
            vec![C::new(0.3, 0.9), C::new(0.1, -0.4), C::new(-0.2, 0.5)],
        ] {
            let mut sum = C::new(0.0, 0.0);
            for n0 in -12i64..=12 {
                for n1 in -12i64..=12 {
                    for n2 in -12i64..=12 {
                        let n = [n0 as f64, n1 as f64, n2 as f64];
                        let mut e = C::new(0.0, 0.0);
                        for i in 0..3 {
                            e += 2.0 * n[i] * z[i];
                            for j in 0..3 {
                                e += n[i] * b[i][j] * n[j];
                            }
                        }
                        sum += (pi_i * e).exp();
                    }
                }
            }
            let v = ev.eval(&z);
            let scaled = sum * (-v.log_scale).exp();
            assert!((v.value - scaled).norm() < 1e-13, "{} {}", v.value, scaled);
        }
    }

    #[test]
    fn single_precision_agrees() {
        let b = vec![
            vec![C::new(0.0, 1.2), C::new(0.3, 0.4)],
            vec![C::new(0.3, 0.4), C::new(0.1, 0.9)],
        ];
        let e64 = ThetaEvaluator::<f64>::new(&b, 1e-12).unwrap();
        let e32 = ThetaEvaluator::<f32>::new(&b, 1e-6).unwrap();
        let z = [C::new(0.2, 0.1), C::new(-0.3, 0.05)];
        let z32: Vec<Complex<f32>> = z.iter().map(|w| Complex::new(w.re as f32, w.im as f32)).collect();
        let a = e64.eval(&z);
        let b = e32.eval(&z32);
        let av = a.value * a.log_scale.exp();
        let bv = b.value * b.log_scale.exp();
        assert!((av - C::new(bv.re as f64, bv.im as f64)).norm() < 1e-5);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let b = vec![
            vec![C::new(0.2, 1.1), C::new(0.3, 0.4)],
            vec![C::new(0.3, 0.4), C::new(-0.1, 0.9)],
        ];
        let ev = ThetaEvaluator::<f64>::new(&b, 1e-14).unwrap();
        let z = [C::new(0.2, 0.1), C::new(-0.3, 0.05)];
        let (v, grad) = ev.eval_with_gradient(&z);
        let sep = ev.gradient(&z);
        for k in 0..2 {
            let h = 1e-6;
            let mut zp = z;
            let mut zm = z;
            zp[k] += h;
            zm[k] -= h;
            let fd = (ev.eval(&zp).ratio(&v) - ev.eval(&zm).ratio(&v)) / (2.0 * h);
            assert!((fd - grad[k] / v.value).norm() < 1e-7);
            assert!((sep[k].value - grad[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn tail_bound_decreases() {
        let a = tail_bound(3, 1.5, 4.0);
        let b = tail_bound(3, 1.5, 6.0);
        assert!(b < a && b > 0.0);
    }
}
