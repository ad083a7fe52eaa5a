//! Cycles, Γ-avoiding paths and singularity-aware path integrals.
//!
//! Cycle integrals of differentials `r(λ)dλ/R` use the sheet reductions
//! `∮_{𝔟_j} = 2∫_{Γ_j} f₊` and `∮_{𝔞_l} = −2∫_{gap_l} f`, where `gap_l` is a
//! sheet-1 path from an endpoint of Γ_{l−1} to an endpoint of Γ_l. With these
//! signs `Im B ≻ 0`; the 𝔟-loop traced by the reduction runs clockwise.

pub mod quadrature;
pub mod router;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, CurveModel, Side};
use crate::Complex;
pub use quadrature::QuadratureRule;
use quadrature::{adaptive, Panel};
pub use router::Router;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomologyError {
    #[error("NonConvergent: {what} (error estimate {error:e})")]
    NonConvergent { what: String, error: f64 },
    #[error("PathThroughCut: no Γ-avoiding path to {target}")]
    PathThroughCut { target: Complex },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Coefficients `f(λ, R)` of a vector of differentials `f dλ`, given the
/// sheet-1 value `R` at λ.
pub struct Form<'a> {
    pub dim: usize,
    pub f: Box<dyn Fn(Complex, Complex, &mut [Complex]) + Sync + 'a>,
}

impl<'a> Form<'a> {
    pub fn new(dim: usize, f: impl Fn(Complex, Complex, &mut [Complex]) + Sync + 'a) -> Self {
        Form { dim, f: Box::new(f) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CycleLabel {
    A(usize),
    B(usize),
}

/// One piece of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Leg {
    /// Straight sheet-1 or sheet-2 segment.
    Line { from: Complex, to: Complex, sheet: u8 },
    /// Boundary of a cut, traversed along (`forward`) or against its orientation.
    CutBoundary { arc: usize, side: Side, forward: bool },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chain {
    pub label: CycleLabel,
    pub legs: Vec<Leg>,
}

impl Chain {
    /// Sheet-1 vertices of an 𝔞-chain (the gap path), or `None` for 𝔟.
    pub fn gap_path(&self) -> Option<Vec<Complex>> {
        if let CycleLabel::B(_) = self.label {
            return None;
        }
        let mut pts = Vec::new();
        for leg in &self.legs {
            if let Leg::Line { from, to, sheet: 1 } = leg {
                if pts.is_empty() {
                    pts.push(*from);
                }
                pts.push(*to);
            }
        }
        Some(pts)
    }

    /// Closed polygon approximating the cycle projected to the λ-plane, for
    /// winding-number checks on 𝔟-cycles: the cut boundary offset by `delta`.
    pub fn offset_polygon(&self, model: &CurveModel, delta: f64, n: usize) -> Vec<Complex> {
        let arc = match self.label {
            CycleLabel::B(j) => &model.arcs[j],
            CycleLabel::A(_) => return self.gap_path().unwrap_or_default(),
        };
        stadium(arc, delta, n)
    }
}

/// Closed loop at distance `delta` around a cut: both offset sides plus
/// semicircular caps, traversed with the cut on the right.
pub fn stadium(arc: &crate::curve::Arc, delta: f64, n: usize) -> Vec<Complex> {
    let mut pts = Vec::with_capacity(4 * n);
    for k in 0..n {
        let s = k as f64 / n as f64;
        pts.push(arc.point(s) + arc.plus_normal(s) * delta);
    }
    for k in 0..n {
        let ang = std::f64::consts::PI * k as f64 / n as f64;
        pts.push(arc.end + arc.plus_normal(1.0) * delta * Complex::from_polar(1.0, -ang));
    }
    for k in 0..n {
        let s = 1.0 - k as f64 / n as f64;
        pts.push(arc.point(s) - arc.plus_normal(s) * delta);
    }
    for k in 0..n {
        let ang = std::f64::consts::PI * k as f64 / n as f64;
        pts.push(arc.start - arc.plus_normal(0.0) * delta * Complex::from_polar(1.0, -ang));
    }
    pts
}

/// Winding number of a closed polygon about `z`.
pub fn winding_number(poly: &[Complex], z: Complex) -> i64 {
    let mut total = 0.0;
    for k in 0..poly.len() {
        let a = poly[k] - z;
        let b = poly[(k + 1) % poly.len()] - z;
        total += (b / a).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Polyline path whose first and/or last vertex may be a branch point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub points: Vec<Complex>,
    pub start_at_branch: bool,
    pub end_at_branch: bool,
    /// Last leg runs radially to a far point and is integrated in `u = 1/λ`.
    pub radial_tail: bool,
}

/// Integrator bound to a curve and a rule.
pub struct Integrator<'m> {
    pub model: &'m CurveModel,
    pub rule: QuadratureRule,
    panel: Panel<f64>,
}

/// Accepted error of an adaptive path integral.
const ACCEPT: f64 = 1e-10;

impl<'m> Integrator<'m> {
    pub fn new(model: &'m CurveModel, rule: QuadratureRule) -> Self {
        Integrator {
            model,
            rule,
            panel: Panel::new(rule.panel_order),
        }
    }

    fn leg(
        &self,
        dim: usize,
        f: &mut dyn FnMut(f64, &mut [Complex]),
        what: &str,
    ) -> Result<Vec<Complex>, HomologyError> {
        let mut g = |s: f64, out: &mut [Complex]| -> Result<(), HomologyError> {
            f(s, out);
            Ok(())
        };
        let r = adaptive(&self.panel, 0.0, 1.0, dim, self.rule.tol, self.rule.max_depth, &mut g)?;
        let scale = r.value.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        if !r.converged && r.error > ACCEPT * scale {
            return Err(HomologyError::NonConvergent {
                what: what.to_string(),
                error: r.error,
            });
        }
        Ok(r.value)
    }

    /// `∫_a^b f dλ` along a straight sheet-1 segment; `singular_at_a` uses
    /// `λ = a + (b−a)s²` to absorb an inverse square root at `a`.
    pub fn segment(
        &self,
        a: Complex,
        b: Complex,
        singular_at_a: bool,
        form: &Form,
    ) -> Result<Vec<Complex>, HomologyError> {
        let dim = form.dim;
        let f = &form.f;
        let d = b - a;
        let model = self.model;
        let mut buf = vec![Complex::new(0.0, 0.0); dim];
        let mut h = |s: f64, out: &mut [Complex]| {
            let (lam, r, jac) = if singular_at_a {
                let delta = d * (s * s);
                (a + delta, model.r_near(a, delta), d * (2.0 * s))
            } else {
                let lam = a + d * s;
                (lam, model.r_unchecked(lam), d)
            };
            f(lam, r, &mut buf);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o = *v * jac;
            }
        };
        self.leg(dim, &mut h, "segment")
    }

    /// `∫ f dλ` from `a` to `b` on a common ray from the origin, in `u = 1/λ`.
    /// `b = ∞` is encoded as `None`.
    pub fn radial(&self, a: Complex, b: Option<Complex>, form: &Form) -> Result<Vec<Complex>, HomologyError> {
        let dim = form.dim;
        let f = &form.f;
        let ua = a.inv();
        let ub = b.map(|z| z.inv()).unwrap_or(Complex::new(0.0, 0.0));
        let du = ub - ua;
        let model = self.model;
        let mut buf = vec![Complex::new(0.0, 0.0); dim];
        let mut h = |s: f64, out: &mut [Complex]| {
            let u = ua + du * s;
            let lam = u.inv();
            let r = model.r_unchecked(lam);
            f(lam, r, &mut buf);
            let jac = -du / (u * u);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o = *v * jac;
            }
        };
        self.leg(dim, &mut h, "radial tail")
    }

    /// Integral along a recorded path.
    pub fn path(&self, path: &Path, f: &Form) -> Result<Vec<Complex>, HomologyError> {
        let dim = f.dim;
        let pts = &path.points;
        let mut total = vec![Complex::new(0.0, 0.0); dim];
        let n = pts.len();
        if n < 2 {
            return Ok(total);
        }
        for k in 0..n - 1 {
            let (a, b) = (pts[k], pts[k + 1]);
            let last = k == n - 2;
            let v = if last && path.radial_tail {
                self.radial(a, b.is_finite().then_some(b), f)?
            } else if k == 0 && path.start_at_branch {
                self.segment(a, b, true, f)?
            } else if last && path.end_at_branch {
                let v = self.segment(b, a, true, f)?;
                v.into_iter().map(|x| -x).collect()
            } else {
                self.segment(a, b, false, f)?
            };
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        Ok(total)
    }

    /// `∫_{Γ_j} f₊ dλ` along the orientation of the cut, by Gauss–Chebyshev
    /// in `t = 2s−1`.
    pub fn cut_plus(&self, arc: usize, form: &Form, nodes: usize) -> Vec<Complex> {
        let (dim, f) = (form.dim, &form.f);
        let model = self.model;
        let a = &model.arcs[arc];
        let mut out = vec![Complex::new(0.0, 0.0); dim];
        let mut buf = vec![Complex::new(0.0, 0.0); dim];
        let w = std::f64::consts::PI / nodes as f64;
        for t in quadrature::chebyshev_nodes::<f64>(nodes) {
            let s = 0.5 * (t + 1.0);
            let lam = a.point(s);
            let r = model.eval_r_boundary(arc, s, Side::Plus);
            f(lam, r, &mut buf);
            let jac = a.dpoint(s) * (0.5 * (1.0 - t * t).sqrt() * w);
            for (o, v) in out.iter_mut().zip(&buf) {
                *o += *v * jac;
            }
        }
        out
    }
}
