//! Quadrature rules for path and cut integrals.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let two = T::lit(2.0);
    let nf = T::from_usize(n).unwrap();
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (T::from_usize(i).unwrap() + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for k in 2..=n {
                let kf = T::from_usize(k).unwrap();
                let p2 = ((two * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { T::one() } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - T::one());
            let dz = pn / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = two / ((T::one() - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Chebyshev points `t_k = cos((k+½)π/n)` of the first kind. The rule
/// `∫_{-1}^{1} F(t)/√(1−t²) dt ≈ (π/n) Σ F(t_k)` is exact for polynomials of
/// degree `< 2n`.
pub fn chebyshev_nodes<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_usize(n).unwrap();
    (0..n)
        .map(|k| ((T::from_usize(k).unwrap() + T::lit(0.5)) * T::PI() / nf).cos())
        .collect()
}

/// Integrates `F(t)/√(1−t²)` over `[-1,1]` given the smooth part `F`.
pub fn chebyshev_integral<T: Real>(n: usize, mut f: impl FnMut(T) -> Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for t in chebyshev_nodes::<T>(n) {
        acc = acc + f(t);
    }
    acc * (T::PI() / T::from_usize(n).unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Chebyshev nodes per cut integral.
    pub nodes: usize,
    /// Order of the Gauss–Legendre panels in adaptive subdivision.
    pub panel_order: usize,
    /// Relative accuracy target of adaptive subdivision.
    pub tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            nodes: 128,
            panel_order: 20,
            tol: 1e-13,
            max_depth: 24,
        }
    }
}

impl QuadratureRule {
    pub fn with_nodes(self, nodes: usize) -> Self {
        QuadratureRule { nodes, ..self }
    }
}

/// Fixed Gauss–Legendre panel, reused by the adaptive integrator.
#[derive(Clone, Debug)]
pub struct Panel<T> {
    x: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> Panel<T> {
    pub fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        Panel { x, w }
    }

    /// `∫_a^b f(s) ds` for real `s`, vector-valued `f` accumulated into `out`.
    pub fn apply<E>(
        &self,
        a: T,
        b: T,
        dim: usize,
        f: &mut impl FnMut(T, &mut [Complex<T>]) -> Result<(), E>,
    ) -> Result<Vec<Complex<T>>, E> {
        let two = T::lit(2.0);
        let (m, h) = ((a + b) / two, (b - a) / two);
        let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
        let mut buf = vec![Complex::new(T::zero(), T::zero()); dim];
        for (xi, wi) in self.x.iter().zip(&self.w) {
            f(m + h * *xi, &mut buf)?;
            for (o, v) in out.iter_mut().zip(&buf) {
                *o = *o + *v * (*wi * h);
            }
        }
        Ok(out)
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Debug)]
pub struct Adaptive<T> {
    pub value: Vec<Complex<T>>,
    pub error: T,
    pub converged: bool,
    pub panels: usize,
}

/// Panel evaluations allowed per adaptive integral.
const PANEL_BUDGET: usize = 4000;

/// Adaptive bisection with Gauss–Legendre panels on `[a, b]`.
pub fn adaptive<T: Real, E>(
    panel: &Panel<T>,
    a: T,
    b: T,
    dim: usize,
    tol: T,
    max_depth: usize,
    f: &mut impl FnMut(T, &mut [Complex<T>]) -> Result<(), E>,
) -> Result<Adaptive<T>, E> {
    let whole = panel.apply(a, b, dim, f)?;
    let mut out = Adaptive {
        value: vec![Complex::new(T::zero(), T::zero()); dim],
        error: T::zero(),
        converged: true,
        panels: 1,
    };
    recurse(panel, a, b, whole, dim, tol, max_depth, 0, f, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, E>(
    panel: &Panel<T>,
    a: T,
    b: T,
    whole: Vec<Complex<T>>,
    dim: usize,
    tol: T,
    max_depth: usize,
    depth: usize,
    f: &mut impl FnMut(T, &mut [Complex<T>]) -> Result<(), E>,
    out: &mut Adaptive<T>,
) -> Result<(), E> {
    let m = (a + b) / T::lit(2.0);
    let left = panel.apply(a, m, dim, f)?;
    let right = panel.apply(m, b, dim, f)?;
    out.panels += 2;
    let mut err = T::zero();
    let mut scale = T::one();
    for k in 0..dim {
        let s = left[k] + right[k];
        err = err.max((s - whole[k]).norm());
        scale = scale.max(s.norm());
    }
    let floor = T::epsilon() * T::lit(256.0) * scale;
    if err <= tol * scale || err <= floor || depth >= max_depth || out.panels >= PANEL_BUDGET {
        if err > tol * scale {
            out.converged = false;
        }
        out.error = out.error + err;
        for k in 0..dim {
            out.value[k] = out.value[k] + left[k] + right[k];
        }
        return Ok(());
    }
    recurse(panel, a, m, left, dim, tol, max_depth, depth + 1, f, out)?;
    recurse(panel, m, b, right, dim, tol, max_depth, depth + 1, f, out)
}
