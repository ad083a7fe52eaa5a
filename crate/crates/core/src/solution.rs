//! The explicit matrix `M⁽¹⁾`, the scalar functions `m₁, m₂`, the full `M`
//! and the reconstructed solution `(u, x, q, m)`.
//!
//! `M⁽¹⁾ = N·½[[(κ+κ⁻¹)Θ(𝒜+C+e)/Θ(𝒜+e), (κ−κ⁻¹)Θ(−𝒜+C+e)/Θ(−𝒜+e)],
//! [(κ−κ⁻¹)Θ(𝒜+C−e)/Θ(𝒜−e), (κ+κ⁻¹)Θ(−𝒜+C−e)/Θ(−𝒜−e)]]` with the diagonal
//! `N` fixed by `M⁽¹⁾(∞) = I`, and
//! `M = e^{iφσ₃} D⁻¹ M⁽¹⁾ D e^{−i(g−θ)σ₃}` where `D = d^{σ₃}`,
//! `d² = −iβ₁` (q ≠ 0) or `α_p` (q = 0), `φ = ¼(yΩ_g^y + tΩ_g^t)`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{JumpWeight, Side};
use crate::differentials::{AbelMap, AbelValue, DifferentialError, Special};
use crate::kappa_divisor::ThetaData;
use crate::theta::{ThetaEvaluator, ThetaValue};
use crate::Complex;

const I: Complex = Complex::new(0.0, 1.0);
const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

pub type Mat2 = Matrix2<Complex>;

/// Theta denominators below this normalized modulus are refused.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Largest admissible imaginary part of `u` or `x`.
pub const REALITY_TOLERANCE: f64 = 1e-6;
/// Trapezoid nodes on the Cauchy circles around i and 0.
pub const CIRCLE_NODES: usize = 48;
/// Divisor points closer than this to i or 0 switch that point to a circle.
const COINCIDENCE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("DenominatorUnderflow: theta denominator {margin:e} at λ = {lambda} (y = {y}, t = {t})")]
    DenominatorUnderflow {
        lambda: Complex,
        y: f64,
        t: f64,
        margin: f64,
    },
    #[error("RealityViolation at (y, t) = ({y}, {t}): |Im u| = {im_u:e}, |Im x| = {im_x:e}")]
    RealityViolation { y: f64, t: f64, im_u: f64, im_x: f64 },
    #[error(transparent)]
    Differential(#[from] DifferentialError),
}

/// λ-dependent ingredients of `M⁽¹⁾`.
#[derive(Clone, Debug)]
pub struct Local {
    pub lambda: Complex,
    pub abel: AbelValue,
    pub kappa: Complex,
}

/// Everything depending on `(y, t)` only.
#[derive(Clone, Debug)]
pub struct Frame {
    pub y: f64,
    pub t: f64,
    /// `C_1 … C_g`.
    pub c: Vec<Complex>,
    pub phi: Complex,
    n1: Complex,
    n2: Complex,
    /// Smallest normalized modulus among the normalizer denominators.
    pub margin: f64,
}

/// `M⁽¹⁾` with the smallest normalized theta denominator that entered it.
#[derive(Clone, Copy, Debug)]
pub struct M1Value {
    pub m: Mat2,
    pub margin: f64,
}

/// How values at i or 0 are taken.
#[derive(Clone, Debug)]
enum Centre {
    Direct(Local),
    /// Trapezoid rule on `|λ − c| = radius` with nodes `c + radius·w_k`.
    Circle {
        radius: f64,
        nodes: Vec<(Complex, Local)>,
    },
}

/// One reconstructed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub y: f64,
    pub t: f64,
    pub u: f64,
    pub x: f64,
    pub q: f64,
    pub m: f64,
    pub im_u: f64,
    pub im_x: f64,
    pub denominator_margin: f64,
}

/// Unrounded reconstruction, for diagnostics.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub u: Complex,
    pub x: Complex,
    pub q: Complex,
    pub m: Complex,
    pub m_zero: Mat2,
    pub f_i: Complex,
    pub margin: f64,
}

pub struct SolutionContext<'a> {
    pub map: AbelMap<'a>,
    pub theta: &'a ThetaEvaluator<f64>,
    pub data: &'a ThetaData,
    /// `d²`, the conjugation constant of the transformation.
    pub d2: Complex,
    /// `i·log(d² x_j / i)` for `j = 1..g`, principal branch.
    pub phases: Vec<Complex>,
    pub a_inf: Vec<Complex>,
    at_i: Centre,
    at_zero: Centre,
}

fn add(a: &[Complex], b: &[Complex], s: f64) -> Vec<Complex> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

fn neg(a: &[Complex]) -> Vec<Complex> {
    a.iter().map(|x| -x).collect()
}

fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The phase of `2πC_j` as tabulated by index range, `j = 1..g`.
pub fn tabulated_phase(params: &crate::curve::SpectralParams, j: usize) -> Complex {
    let (p, q) = (params.p(), params.q());
    let al = |l: usize| params.alpha()[l - 1];
    let be = |l: usize| params.beta()[l - 1];
    let half = Complex::new(PI / 2.0, 0.0);
    let il = |x: f64| I * x.ln();
    if q > 0 {
        let b1 = be(1);
        if j < q {
            -il(be(j + 1) / b1)
        } else if j < p + q {
            -il(al(p + q - j) / b1) + half
        } else if j < 2 * p + q {
            il(al(j - p - q + 1) * b1) + half
        } else if j < 2 * p + 2 * q {
            il(b1 * be(2 * p + 2 * q - j))
        } else if j < 2 * p + 3 * q {
            -il(be(j - 2 * p - 2 * q + 1) / b1)
        } else if j < 3 * p + 3 * q {
            -il(al(3 * p + 3 * q - j) / b1) + half
        } else if j < 4 * p + 3 * q {
            il(al(j - 3 * p - 3 * q + 1) * b1) + half
        } else {
            il(b1 * be(4 * p + 4 * q - j))
        }
    } else {
        let ap = al(p);
        if j < p {
            -il(al(p - j) / ap) + half
        } else if j < 2 * p {
            il(al(j - p + 1) * ap) + half
        } else if j < 3 * p {
            -il(al(3 * p - j) / ap) + half
        } else {
            il(al(j - 3 * p + 1) * ap) + half
        }
    }
}

/// `d²`: `−iβ₁` when q ≠ 0, `α_p` otherwise.
pub fn conjugation_constant(params: &crate::curve::SpectralParams) -> Complex {
    if params.q() > 0 {
        -I * params.beta()[0]
    } else {
        Complex::new(params.alpha()[params.p() - 1], 0.0)
    }
}

/// `i·log(d² x_j / i)`, the phase that turns the jump on Γ_j into
/// `[[0, ie^{−2πiC_j}], [ie^{2πiC_j}, 0]]`.
pub fn derived_phase(params: &crate::curve::SpectralParams, weight: JumpWeight) -> Complex {
    I * (conjugation_constant(params) * weight.x(params) / I).ln()
}

impl<'a> SolutionContext<'a> {
    pub fn new(map: AbelMap<'a>, theta: &'a ThetaEvaluator<f64>, data: &'a ThetaData) -> Result<Self, SolutionError> {
        let model = map.wb.model;
        let params = &model.params;
        let g = model.genus;
        let phases = (1..=g).map(|j| derived_phase(params, model.arcs[j].weight)).collect();
        let a_inf = map.pd.special(Special::Infinity).a.clone();
        let mut ctx = SolutionContext {
            map,
            theta,
            data,
            d2: conjugation_constant(params),
            phases,
            a_inf,
            at_i: Centre::Direct(Local {
                lambda: I,
                abel: AbelValue {
                    a: vec![],
                    gy: ZERO,
                    gt: ZERO,
                },
                kappa: ONE,
            }),
            at_zero: Centre::Direct(Local {
                lambda: ZERO,
                abel: AbelValue {
                    a: vec![],
                    gy: ZERO,
                    gt: ZERO,
                },
                kappa: ONE,
            }),
        };
        ctx.at_i = ctx.centre(I)?;
        ctx.at_zero = ctx.centre(ZERO)?;
        Ok(ctx)
    }

    pub fn genus(&self) -> usize {
        self.map.genus()
    }

    fn centre(&self, c: Complex) -> Result<Centre, SolutionError> {
        let model = self.map.wb.model;
        let close = self
            .data
            .divisor
            .points
            .iter()
            .any(|p| p.lambda.is_some_and(|z| (z - c).norm() < COINCIDENCE));
        if !close {
            return Ok(Centre::Direct(self.local(c)?));
        }
        let to_cut = model.nearest_cut(c).1;
        let to_special = [ZERO, I, -I]
            .iter()
            .filter(|&&s| s != c)
            .map(|s| (s - c).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = 0.4 * to_cut.min(to_special);
        let nodes = (0..CIRCLE_NODES)
            .map(|k| {
                let w = Complex::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / CIRCLE_NODES as f64);
                Ok((w, self.local(c + w * radius)?))
            })
            .collect::<Result<Vec<_>, SolutionError>>()?;
        Ok(Centre::Circle { radius, nodes })
    }

    /// Whether the values at i (resp. 0) come from a Cauchy circle.
    pub fn uses_circle(&self) -> (bool, bool) {
        let f = |c: &Centre| matches!(c, Centre::Circle { .. });
        (f(&self.at_i), f(&self.at_zero))
    }

    /// λ-dependent data at λ off Γ.
    pub fn local(&self, lambda: Complex) -> Result<Local, SolutionError> {
        Ok(Local {
            lambda,
            abel: self.map.at(lambda)?,
            kappa: self.map.wb.model.kappa_unchecked(lambda),
        })
    }

    /// One-sided data on `arcs[arc].point(s)`.
    pub fn local_boundary(&self, arc: usize, s: f64, side: Side) -> Result<Local, SolutionError> {
        let model = self.map.wb.model;
        Ok(Local {
            lambda: model.arcs[arc].point(s),
            abel: self.map.boundary(arc, s, side)?,
            kappa: model.kappa_boundary(arc, s, side),
        })
    }

    /// `C_1 … C_g` at `(y, t)`.
    pub fn c_vector(&self, y: f64, t: f64) -> Vec<Complex> {
        let pd = self.map.pd;
        (1..=self.genus())
            .map(|j| (y * pd.omega_y[j] + t * pd.omega_t[j] + self.phases[j - 1]) / (2.0 * PI))
            .collect()
    }

    fn th(&self, z: &[Complex]) -> ThetaValue<f64> {
        self.theta.eval(z)
    }

    pub fn frame(&self, y: f64, t: f64) -> Result<Frame, SolutionError> {
        let c = self.c_vector(y, t);
        let e = &self.data.e;
        let ai = &self.a_inf;
        let base = self.th(&add(ai, e, 1.0));
        let d1 = self.th(&add(&add(ai, &c, 1.0), e, 1.0));
        let d2 = self.th(&add(&add(ai, &c, -1.0), e, 1.0));
        let margin = d1.value.norm().min(d2.value.norm());
        if margin < DENOMINATOR_FLOOR {
            return Err(SolutionError::DenominatorUnderflow {
                lambda: Complex::new(f64::INFINITY, 0.0),
                y,
                t,
                margin,
            });
        }
        Ok(Frame {
            y,
            t,
            phi: self.map.pd.phase(y, t),
            n1: base.ratio(&d1),
            n2: base.ratio(&d2),
            c,
            margin,
        })
    }

    /// `M⁽¹⁾` and, with `derivative`, `dM⁽¹⁾/dλ` (requires λ off Γ).
    fn m1_parts(&self, fr: &Frame, loc: &Local, derivative: bool) -> Result<(M1Value, Option<Mat2>), SolutionError> {
        let e = &self.data.e;
        let a = &loc.abel.a;
        let c = &fr.c;
        let am = neg(a);
        let ce = add(c, e, 1.0);
        let cme = add(c, e, -1.0);
        let nums = [
            add(a, &ce, 1.0),
            add(&am, &ce, 1.0),
            add(a, &cme, 1.0),
            add(&am, &cme, 1.0),
        ];
        let dens = [add(a, e, 1.0), add(a, e, -1.0)];
        let (nv, ng): (Vec<ThetaValue<f64>>, Vec<Vec<Complex>>) = if derivative {
            nums.iter().map(|z| self.theta.eval_with_gradient(z)).unzip()
        } else {
            (nums.iter().map(|z| self.th(z)).collect(), vec![])
        };
        let (dv, dg): (Vec<ThetaValue<f64>>, Vec<Vec<Complex>>) = if derivative {
            dens.iter().map(|z| self.theta.eval_with_gradient(z)).unzip()
        } else {
            (dens.iter().map(|z| self.th(z)).collect(), vec![])
        };
        let margin = dv[0].value.norm().min(dv[1].value.norm());
        if margin < DENOMINATOR_FLOOR {
            return Err(SolutionError::DenominatorUnderflow {
                lambda: loc.lambda,
                y: fr.y,
                t: fr.t,
                margin,
            });
        }
        let k = loc.kappa;
        let kp = k + k.inv();
        let km = k - k.inv();
        // entry (r, c): factor, numerator, sign of 𝒜 in it, denominator
        let layout = [
            (0, 0, true, 0, 1.0, 0),
            (0, 1, false, 1, -1.0, 1),
            (1, 0, false, 2, 1.0, 1),
            (1, 1, true, 3, -1.0, 0),
        ];
        let mut m = Mat2::zeros();
        for &(r, col, plus, ni, _, di) in &layout {
            let n = if r == 0 { fr.n1 } else { fr.n2 };
            let f = if plus { kp } else { km };
            m[(r, col)] = 0.5 * n * f * nv[ni].ratio(&dv[di]);
        }
        if !derivative {
            return Ok((M1Value { m, margin }, None));
        }
        let dens_w = self.map.density(loc.lambda);
        let g = self.genus();
        let da = &dens_w[..g];
        let mut lk = ZERO;
        for arc in &self.map.wb.model.arcs {
            lk += (loc.lambda - arc.end).inv() - (loc.lambda - arc.start).inv();
        }
        let dk = k * lk * 0.25;
        let dkp = dk * (ONE - (k * k).inv());
        let dkm = dk * (ONE + (k * k).inv());
        let mut dm = Mat2::zeros();
        for &(r, col, plus, ni, s, di) in &layout {
            let n = if r == 0 { fr.n1 } else { fr.n2 };
            let (f, df) = if plus { (kp, dkp) } else { (km, dkm) };
            let q = nv[ni].ratio(&dv[di]);
            let ln_num = s * dot(&ng[ni], da) / nv[ni].value;
            let ln_den = dot(&dg[di], da) / dv[di].value;
            dm[(r, col)] = 0.5 * n * q * (df + f * (ln_num - ln_den));
        }
        Ok((M1Value { m, margin }, Some(dm)))
    }

    pub fn m1_at(&self, fr: &Frame, loc: &Local) -> Result<M1Value, SolutionError> {
        Ok(self.m1_parts(fr, loc, false)?.0)
    }

    /// `M⁽¹⁾(λ)` at λ off Γ.
    pub fn m1(&self, fr: &Frame, lambda: Complex) -> Result<M1Value, SolutionError> {
        self.m1_at(fr, &self.local(lambda)?)
    }

    /// One-sided `M⁽¹⁾±` on a cut.
    pub fn m1_boundary(&self, fr: &Frame, arc: usize, s: f64, side: Side) -> Result<M1Value, SolutionError> {
        self.m1_at(fr, &self.local_boundary(arc, s, side)?)
    }

    /// Jump matrix of `M⁽¹⁾` on Γ_j.
    pub fn jump(&self, fr: &Frame, j: usize) -> Mat2 {
        if j == 0 {
            return Mat2::new(ZERO, I, I, ZERO);
        }
        let w = (2.0 * PI * I * fr.c[j - 1]).exp();
        Mat2::new(ZERO, I / w, I * w, ZERO)
    }

    /// `(−iβ₁ e^{−2iφ}, e^{2iφ}/(−iβ₁))`, the row-sum coefficients of `m₁, m₂`
    /// (q ≠ 0; `α_p` in place of `−iβ₁` otherwise).
    fn row_coefficients(&self, fr: &Frame) -> (Complex, Complex) {
        let rot = (2.0 * I * fr.phi).exp();
        (self.d2 / rot, rot / self.d2)
    }

    /// `(m₁, m₂) = (M⁽¹⁾₁₁ + c₁M⁽¹⁾₂₁, M⁽¹⁾₂₂ + c₂M⁽¹⁾₁₂)`, the row sums of `M`
    /// with the λ-dependent phase `e^{∓i(g−θ)}` and the constant `e^{±iφ}`
    /// removed.
    pub fn m1m2_from(&self, fr: &Frame, m1: &Mat2) -> (Complex, Complex) {
        let (c1, c2) = self.row_coefficients(fr);
        (m1[(0, 0)] + c1 * m1[(1, 0)], m1[(1, 1)] + c2 * m1[(0, 1)])
    }

    pub fn m1m2(&self, fr: &Frame, lambda: Complex) -> Result<(Complex, Complex), SolutionError> {
        Ok(self.m1m2_from(fr, &self.m1(fr, lambda)?.m))
    }

    /// `(g − θ)(λ)` from the regularized Abel values.
    pub fn g_minus_theta(fr: &Frame, abel: &AbelValue) -> Complex {
        0.25 * fr.y * abel.gy + 2.0 * fr.t * abel.gt
    }

    /// `M` from `M⁽¹⁾` by inverting the transformation.
    pub fn full_from(&self, fr: &Frame, m1: &Mat2, abel: &AbelValue) -> Mat2 {
        let gam = Self::g_minus_theta(fr, abel);
        let l = (I * fr.phi).exp();
        let r = (-I * gam).exp();
        Mat2::new(
            l * m1[(0, 0)] * r,
            l * m1[(0, 1)] / self.d2 / r,
            self.d2 * m1[(1, 0)] * r / l,
            m1[(1, 1)] / (l * r),
        )
    }

    /// `M(λ)` at λ off Γ.
    pub fn m_full(&self, fr: &Frame, lambda: Complex) -> Result<Mat2, SolutionError> {
        let loc = self.local(lambda)?;
        let m1 = self.m1_at(fr, &loc)?;
        Ok(self.full_from(fr, &m1.m, &loc.abel))
    }

    /// `(m₁(i), m₂(i), F′(i))` with `F = m₁m₂`, and the margin.
    fn at_i(&self, fr: &Frame) -> Result<(Complex, Complex, Complex, f64), SolutionError> {
        match &self.at_i {
            Centre::Direct(loc) => {
                let (v, dm) = self.m1_parts(fr, loc, true)?;
                let dm = dm.unwrap();
                let (a, b) = self.m1m2_from(fr, &v.m);
                let (da, db) = self.m1m2_from(fr, &dm);
                Ok((a, b, da * b + a * db, v.margin))
            }
            Centre::Circle { radius, nodes, .. } => {
                let n = nodes.len() as f64;
                let (mut a, mut b, mut df) = (ZERO, ZERO, ZERO);
                let mut margin = f64::INFINITY;
                for (w, loc) in nodes {
                    let v = self.m1_at(fr, loc)?;
                    margin = margin.min(v.margin);
                    let (x, y) = self.m1m2_from(fr, &v.m);
                    a += x;
                    b += y;
                    df += x * y / w;
                }
                Ok((a / n, b / n, df / (n * radius), margin))
            }
        }
    }

    /// `M(0)` and the margin.
    pub fn m_zero(&self, fr: &Frame) -> Result<(Mat2, f64), SolutionError> {
        match &self.at_zero {
            Centre::Direct(loc) => {
                let v = self.m1_at(fr, loc)?;
                Ok((self.full_from(fr, &v.m, &loc.abel), v.margin))
            }
            Centre::Circle { nodes, .. } => {
                let mut acc = Mat2::zeros();
                let mut margin = f64::INFINITY;
                for (_, loc) in nodes {
                    let v = self.m1_at(fr, loc)?;
                    margin = margin.min(v.margin);
                    acc += self.full_from(fr, &v.m, &loc.abel);
                }
                Ok((acc / Complex::new(nodes.len() as f64, 0.0), margin))
            }
        }
    }

    /// `F′(i)/F(i)` by a central difference of step `h` with one Richardson
    /// step, for checking the analytic derivative.
    pub fn log_derivative_fd(&self, fr: &Frame, h: f64) -> Result<Complex, SolutionError> {
        let f = |z: Complex| -> Result<Complex, SolutionError> {
            let (a, b) = self.m1m2(fr, z)?;
            Ok(a * b)
        };
        let d = |h: f64| -> Result<Complex, SolutionError> { Ok((f(I + h)? - f(I - h)?) / (2.0 * h)) };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        let (a, b, _, _) = self.at_i(fr)?;
        Ok((4.0 * d2 - d1) / 3.0 / (a * b))
    }

    pub fn reconstruct_raw(&self, y: f64, t: f64) -> Result<Reconstruction, SolutionError> {
        let fr = self.frame(y, t)?;
        let (a, b, df, margin_i) = self.at_i(&fr)?;
        let f_i = a * b;
        let pd = self.map.pd;
        let u = -df / f_i;
        let x = y + (a / b).ln() + 2.0 * I * (y * pd.x_y + t * pd.x_t);
        // the logarithm's branch only shifts Im x by a multiple of 2π
        let x = Complex::new(x.re, x.im - 2.0 * PI * (x.im / (2.0 * PI)).round());
        let (m0, margin_0) = self.m_zero(&fr)?;
        let beta0 = m0[(0, 0)];
        let eta0 = m0[(0, 1)];
        Ok(Reconstruction {
            u,
            x,
            q: beta0.inv(),
            m: eta0 / (I * beta0),
            m_zero: m0,
            f_i,
            margin: fr.margin.min(margin_i).min(margin_0),
        })
    }

    /// The solution at `(y, t)`, refusing points with non-real `u` or `x`.
    pub fn reconstruct(&self, y: f64, t: f64) -> Result<SolutionSample, SolutionError> {
        let r = self.reconstruct_raw(y, t)?;
        let (im_u, im_x) = (r.u.im.abs(), r.x.im.abs());
        if !(im_u <= REALITY_TOLERANCE && im_x <= REALITY_TOLERANCE) {
            return Err(SolutionError::RealityViolation { y, t, im_u, im_x });
        }
        Ok(SolutionSample {
            y,
            t,
            u: r.u.re,
            x: r.x.re,
            q: r.q.re,
            m: r.m.re,
            im_u,
            im_x,
            denominator_margin: r.margin,
        })
    }

    /// Smallest normalizer margin over the grid, with its location.
    pub fn prescan(&self, grid: &Grid) -> (f64, f64, f64) {
        grid.points()
            .par_iter()
            .map(|&(y, t)| match self.frame(y, t) {
                Ok(f) => (f.margin, y, t),
                Err(_) => (0.0, y, t),
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((f64::INFINITY, 0.0, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    /// Row-major samples (`t` outer, `y` inner).
    pub fn sample_grid(&self, grid: &Grid) -> Vec<Result<SolutionSample, SolutionError>> {
        grid.points().par_iter().map(|&(y, t)| self.reconstruct(y, t)).collect()
    }
}

/// Uniform `(y, t)` grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

impl Grid {
    pub fn ys(&self) -> Vec<f64> {
        linspace(self.y0, self.y1, self.ny)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(self.t0, self.t1, self.nt)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let ys = self.ys();
        self.ts()
            .into_iter()
            .flat_map(|t| ys.iter().map(move |&y| (y, t)))
            .collect()
    }
}
