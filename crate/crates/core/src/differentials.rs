//! Normalized holomorphic differentials, the period matrix, the Abel map and
//! the g-function differentials with their frequency and shift constants.
//!
//! Every differential is stored as coefficients over one fixed basis
//! `λ^k dλ/R` (k = −2..N) followed by `λ^k dλ/((λ²+1)³R)` (k = 0..N+4), so a
//! single vector integral along a path serves all of them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveModel;
use crate::homology::router::Anchor;
use crate::homology::{Form, HomologyError, Integrator, Path, QuadratureRule, Router};
use crate::series::{self, Laurent};
use crate::Complex;

const I: Complex = Complex::new(0.0, 1.0);
const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Truncation length of local expansions.
const SERIES_TERMS: usize = 72;
/// Approach radius as a fraction of the convergence radius.
const APPROACH: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DifferentialError {
    #[error("IllConditioned: {what} has condition number {cond:e}")]
    IllConditioned { what: &'static str, cond: f64 },
    #[error("InconsistentPrincipalPart: residual {residual:e} in {what}")]
    InconsistentPrincipalPart { what: &'static str, residual: f64 },
    #[error("NotRiemannMatrix: {reason}")]
    NotRiemannMatrix { reason: String },
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// The shared monomial basis.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Basis {
    pub n: usize,
}

impl Basis {
    pub fn dim(&self) -> usize {
        2 * self.n + 8
    }
    /// Slot of `λ^k dλ/R`, `k ∈ [−2, N]`.
    pub fn plain(&self, k: i32) -> usize {
        (k + 2) as usize
    }
    /// Slot of `λ^k dλ/((λ²+1)³R)`, `k ∈ [0, N+4]`.
    pub fn framed(&self, k: usize) -> usize {
        self.n + 3 + k
    }
    pub fn plain_range(&self) -> std::ops::RangeInclusive<i32> {
        -2..=self.n as i32
    }
    pub fn framed_range(&self) -> std::ops::Range<usize> {
        0..self.n + 5
    }

    pub fn eval(&self, lam: Complex, r: Complex, out: &mut [Complex]) {
        let ir = r.inv();
        let il = lam.inv();
        out[0] = il * il * ir;
        out[1] = il * ir;
        let mut pw = ir;
        for k in 0..=self.n {
            out[2 + k] = pw;
            pw *= lam;
        }
        let l2 = lam * lam + 1.0;
        let mut pw = ir / (l2 * l2 * l2);
        for k in 0..self.n + 5 {
            out[self.n + 3 + k] = pw;
            pw *= lam;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DifferentialKind {
    Holomorphic,
    /// Double poles at ∞ and 0 matching `(1+λ⁻²)dλ`.
    YFlow,
    /// Triple poles at ±i matching the t-part of `dθ`.
    TFlow,
}

/// A differential as coefficients over [`Basis`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DifferentialRep {
    pub kind: DifferentialKind,
    pub coeffs: Vec<Complex>,
}

impl DifferentialRep {
    pub fn apply(&self, basis_values: &[Complex]) -> Complex {
        self.coeffs
            .iter()
            .zip(basis_values)
            .fold(ZERO, |acc, (c, v)| acc + c * v)
    }

    /// Value of `f` in `f dλ` at λ for the given sheet-1 `R`.
    pub fn density(&self, basis: &Basis, lam: Complex, r: Complex) -> Complex {
        let mut buf = vec![ZERO; basis.dim()];
        basis.eval(lam, r, &mut buf);
        self.apply(&buf)
    }
}

/// `dθ_y = (1+λ⁻²)dλ`, `θ_y = λ − λ⁻¹`.
pub fn dtheta_y(lam: Complex) -> Complex {
    ONE + (lam * lam).inv()
}
/// `dθ_t = h′dλ` with `θ_t = h = −λ(λ²−1)/(λ²+1)²`.
pub fn dtheta_t(lam: Complex) -> Complex {
    let l2 = lam * lam;
    let d = l2 + 1.0;
    (l2 * l2 - 6.0 * l2 + 1.0) / (d * d * d)
}
pub fn theta_y(lam: Complex) -> Complex {
    lam - lam.inv()
}
pub fn theta_t(lam: Complex) -> Complex {
    let l2 = lam * lam;
    -lam * (l2 - 1.0) / ((l2 + 1.0) * (l2 + 1.0))
}

/// The four points where the g-differentials have poles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Special {
    Zero,
    PlusI,
    MinusI,
    Infinity,
}

impl Special {
    pub const ALL: [Special; 4] = [Special::Zero, Special::PlusI, Special::MinusI, Special::Infinity];
    pub fn point(self) -> Option<Complex> {
        match self {
            Special::Zero => Some(ZERO),
            Special::PlusI => Some(I),
            Special::MinusI => Some(-I),
            Special::Infinity => None,
        }
    }
}

/// Laurent expansions of every basis element about a special point, in
/// `ε = λ − p` (finite `p`) or `w = 1/λ` (infinity; coefficients of the
/// density, not of the form in `w`).
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    pub at: Special,
    /// Convergence radius in the local variable.
    pub radius: f64,
    pub basis: Vec<Laurent<f64>>,
    pub dtheta_y: Laurent<f64>,
    pub dtheta_t: Laurent<f64>,
}

fn taylor_r_inverse(model: &CurveModel, at: Special, m: usize) -> Laurent<f64> {
    let coeffs: Vec<Complex> = model
        .r_squared_coeffs()
        .into_iter()
        .map(|x| Complex::new(x, 0.0))
        .collect();
    match at.point() {
        Some(p) => {
            let shifted = series::shift_poly(&coeffs, p, m);
            let p0 = shifted[0];
            let unit: Vec<Complex> = shifted.iter().map(|c| c / p0).collect();
            let root = series::sqrt_unit(&unit);
            let r0 = model.r_unchecked(p);
            let inv = series::inverse(&root);
            Laurent::taylor(inv.iter().map(|c| c / r0).collect())
        }
        None => {
            // 1/R = w^N (w^{2N} P(1/w))^{-1/2}
            let mut rev = coeffs.clone();
            rev.reverse();
            rev.resize(m.max(rev.len()), ZERO);
            rev.truncate(m);
            let root = series::sqrt_unit(&rev);
            Laurent {
                low: model.cut_count() as i32,
                c: series::inverse(&root),
            }
        }
    }
}

/// Taylor series about `p` of `(λ²+1)^{-3}`, or Laurent at `±i`.
fn frame_series(p: Complex, m: usize) -> Laurent<f64> {
    if (p - I).norm() < 1e-15 || (p + I).norm() < 1e-15 {
        Laurent {
            low: -3,
            c: series::binomial_power(2.0 * p, -3, m),
        }
    } else {
        let cube = [ONE, ZERO, 3.0 * ONE, ZERO, 3.0 * ONE, ZERO, ONE];
        let sh = series::shift_poly(&cube, p, m);
        Laurent::taylor(series::inverse(&sh))
    }
}

fn monomial_at(p: Complex, k: i32, m: usize) -> Laurent<f64> {
    if p == ZERO {
        let mut c = vec![ZERO; m];
        c[0] = ONE;
        Laurent { low: k, c }
    } else {
        Laurent::taylor(series::binomial_power(p, k, m))
    }
}

impl LocalExpansion {
    pub fn new(model: &CurveModel, basis: &Basis, at: Special) -> LocalExpansion {
        let m = SERIES_TERMS;
        let s = taylor_r_inverse(model, at, m);
        let bps = model.branch_points();
        match at.point() {
            Some(p) => {
                let mut radius = bps.iter().map(|b| (b - p).norm()).fold(f64::INFINITY, f64::min);
                for o in [ZERO, I, -I] {
                    if o != p {
                        radius = radius.min((o - p).norm());
                    }
                }
                let frame = frame_series(p, m);
                let mut out = vec![Laurent::taylor(vec![ZERO; m]); basis.dim()];
                for k in basis.plain_range() {
                    out[basis.plain(k)] = monomial_at(p, k, m).mul(&s);
                }
                for k in basis.framed_range() {
                    out[basis.framed(k)] = monomial_at(p, k as i32, m).mul(&frame).mul(&s);
                }
                let dty = monomial_at(p, 0, m).add(&monomial_at(p, -2, m));
                let quart = series::shift_poly(&[ONE, ZERO, -6.0 * ONE, ZERO, ONE], p, m);
                let dtt = Laurent::taylor(quart).mul(&frame);
                LocalExpansion {
                    at,
                    radius,
                    basis: out,
                    dtheta_y: dty,
                    dtheta_t: dtt,
                }
            }
            None => {
                let top = bps.iter().map(|b| b.norm()).fold(1.0, f64::max);
                // (1+w²)^{-3} w^6 and  λ^k = w^{-k}
                let cube = [ONE, ZERO, 3.0 * ONE, ZERO, 3.0 * ONE, ZERO, ONE];
                let mut cube_m = cube.to_vec();
                cube_m.resize(m, ZERO);
                let frame = Laurent {
                    low: 6,
                    c: series::inverse(&cube_m),
                };
                let unit = |k: i32| {
                    let mut c = vec![ZERO; m];
                    c[0] = ONE;
                    Laurent { low: -k, c }
                };
                let mut out = vec![Laurent::taylor(vec![ZERO; m]); basis.dim()];
                for k in basis.plain_range() {
                    out[basis.plain(k)] = unit(k).mul(&s);
                }
                for k in basis.framed_range() {
                    out[basis.framed(k)] = unit(k as i32).mul(&frame).mul(&s);
                }
                let dty = unit(0).add(&unit(-2));
                let quart = Laurent {
                    low: -4,
                    c: {
                        let mut c = vec![ZERO; m];
                        c[0] = ONE;
                        c[2] = -6.0 * ONE;
                        c[4] = ONE;
                        c
                    },
                };
                let dtt = quart.mul(&frame);
                LocalExpansion {
                    at,
                    radius: 1.0 / top,
                    basis: out,
                    dtheta_y: dty,
                    dtheta_t: dtt,
                }
            }
        }
    }

    /// Laurent series of a differential minus `weight_y·dθ_y + weight_t·dθ_t`.
    pub fn of(&self, rep: &DifferentialRep, weight_y: f64, weight_t: f64) -> Laurent<f64> {
        let mut acc: Option<Laurent<f64>> = None;
        for (c, l) in rep.coeffs.iter().zip(&self.basis) {
            if *c == ZERO {
                continue;
            }
            let t = l.scale(*c);
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t),
            });
        }
        let mut acc = acc.unwrap_or_else(|| Laurent::taylor(vec![ZERO; SERIES_TERMS]));
        if weight_y != 0.0 {
            acc = acc.sub(&self.dtheta_y.scale(Complex::new(weight_y, 0.0)));
        }
        if weight_t != 0.0 {
            acc = acc.sub(&self.dtheta_t.scale(Complex::new(weight_t, 0.0)));
        }
        acc
    }

    /// Point where paths hand over to the series.
    pub fn approach_point(&self) -> Complex {
        match self.at.point() {
            Some(p) => p + APPROACH * self.radius,
            None => Complex::new(1.0 / (APPROACH * self.radius), 0.0),
        }
    }

    /// `∫_z^p f dλ` for a regular local series `f` (orders below the integrable
    /// range must vanish; they are ignored here and checked by callers).
    pub fn integrate_to_point(&self, f: &Laurent<f64>, z: Complex) -> Complex {
        match self.at.point() {
            Some(p) => {
                let e = z - p;
                let mut acc = ZERO;
                let mut pw = e;
                for n in 0..f.high().max(0) {
                    acc -= f.coeff(n) * pw / (n as f64 + 1.0);
                    pw *= e;
                }
                acc
            }
            None => {
                let w = z.inv();
                let mut acc = ZERO;
                let mut pw = w;
                for m in 2..f.high() {
                    acc += f.coeff(m) * pw / (m as f64 - 1.0);
                    pw *= w;
                }
                acc
            }
        }
    }

    /// Largest coefficient among orders that must vanish for `f` to be
    /// integrable up to the point.
    pub fn singular_residue(&self, f: &Laurent<f64>) -> f64 {
        let hi = match self.at {
            Special::Infinity => 2,
            _ => 0,
        };
        (f.low..hi).map(|n| f.coeff(n).norm()).fold(0.0, f64::max)
    }
}

/// Abel-type integral from the base point: `a` = 𝒜, `gy`, `gt` the regularized
/// `g_y − θ_y` and `g_t − θ_t` (with `g(base) = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelValue {
    pub a: Vec<Complex>,
    pub gy: Complex,
    pub gt: Complex,
}

pub(crate) fn max_norm<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex, R, C>>(
    m: &nalgebra::Matrix<Complex, R, C, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Linear solve with residual and condition reporting.
fn solve_square(
    m: &DMatrix<Complex>,
    rhs: &DVector<Complex>,
    what: &'static str,
) -> Result<(DVector<Complex>, f64, f64), DifferentialError> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if !(cond < 1e14) {
        return Err(DifferentialError::IllConditioned { what, cond });
    }
    let x = match m.clone().lu().solve(rhs) {
        Some(x) => x,
        None => svd
            .solve(rhs, 1e-14 * smax)
            .map_err(|_| DifferentialError::IllConditioned { what, cond })?,
    };
    let res = max_norm(&(m * &x - rhs));
    Ok((x, cond, res))
}

/// Everything computed once per parameter set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodData {
    pub genus: usize,
    pub basis: Basis,
    pub rule: QuadratureRule,
    pub omega: Vec<DifferentialRep>,
    pub omega_condition: f64,
    /// `∮_{𝔟_j}` of every basis element, `[slot][j−1]`.
    pub b_raw: Vec<Vec<Complex>>,
    /// `∮_{𝔞_l}` of every basis element, `[slot][l−1]`.
    pub a_raw: Vec<Vec<Complex>>,
    /// Endpoints `(exit of Γ_{l−1}, entry of Γ_l)` of each gap path.
    pub gap_paths: Vec<Path>,
    /// Cumulative sums before the integer correction.
    pub b_cumulative: Vec<Vec<Complex>>,
    /// Integer intersection defect `round(Re(B − Bᵀ))` of the cumulative sums.
    pub intersection_defect: Vec<Vec<i64>>,
    pub period_matrix: Vec<Vec<Complex>>,
    pub dg_y: DifferentialRep,
    pub dg_t: DifferentialRep,
    pub dg_y_tilde: DifferentialRep,
    pub dg_t_tilde: DifferentialRep,
    /// Worst re-substituted residual of the dg systems.
    pub dg_residual: f64,
    pub dg_condition: f64,
    pub omega_y: Vec<Complex>,
    pub omega_t: Vec<Complex>,
    pub omega_y_tilde: Vec<Complex>,
    pub omega_t_tilde: Vec<Complex>,
    pub x_y: Complex,
    pub x_t: Complex,
    pub x_y_tilde: Complex,
    pub x_t_tilde: Complex,
    /// Regularized Abel values at 0, i, −i, ∞.
    pub special: Vec<(Special, AbelValue)>,
    pub base_point: Complex,
}

/// Assembly context: router, integrator and local expansions.
pub struct Workbench<'m> {
    pub model: &'m CurveModel,
    pub router: Router,
    pub integ: Integrator<'m>,
    pub basis: Basis,
    pub local: Vec<LocalExpansion>,
}

impl<'m> Workbench<'m> {
    pub fn new(model: &'m CurveModel, rule: QuadratureRule) -> Self {
        let basis = Basis { n: model.cut_count() };
        let local = Special::ALL
            .iter()
            .map(|&s| LocalExpansion::new(model, &basis, s))
            .collect();
        Workbench {
            model,
            router: Router::new(model),
            integ: Integrator::new(model, rule),
            basis,
            local,
        }
    }

    pub fn local(&self, s: Special) -> &LocalExpansion {
        self.local.iter().find(|l| l.at == s).unwrap()
    }

    pub fn basis_form(&self) -> Form<'static> {
        let b = self.basis;
        Form::new(b.dim(), move |lam, r, out| b.eval(lam, r, out))
    }

    /// 2∫_{Γ_j} of the basis on the plus side.
    pub fn b_period_raw(&self, j: usize, nodes: usize) -> Vec<Complex> {
        let f = self.basis_form();
        self.integ.cut_plus(j, &f, nodes).into_iter().map(|v| 2.0 * v).collect()
    }

    /// Endpoint pairs for the gap paths: a_l leaves Γ_{l−1} by the endpoint
    /// not used to enter it and enters Γ_l by the nearer endpoint.
    pub fn gap_anchors(&self) -> Vec<(Anchor, Anchor)> {
        let arcs = &self.model.arcs;
        let g = self.model.genus;
        let mut out = Vec::with_capacity(g);
        let mut entry_prev: Option<bool> = None;
        for l in 1..=g {
            let prev = &arcs[l - 1];
            let cur = &arcs[l];
            let exits: Vec<bool> = match entry_prev {
                Some(e) => vec![!e],
                None => {
                    // from Γ_0 leave by the base point's opposite end
                    vec![self.model.params.q() == 0]
                }
            };
            let mut best = (f64::INFINITY, false, false);
            for &xe in &exits {
                let xp = if xe { prev.end } else { prev.start };
                for ce in [false, true] {
                    let cp = if ce { cur.end } else { cur.start };
                    let d = (xp - cp).norm();
                    if d < best.0 {
                        best = (d, xe, ce);
                    }
                }
            }
            out.push((
                Anchor::Branch {
                    arc: l - 1,
                    end: best.1,
                },
                Anchor::Branch { arc: l, end: best.2 },
            ));
            entry_prev = Some(best.2);
        }
        out
    }

    pub fn route(&self, from: Anchor, to: Anchor) -> Result<Path, DifferentialError> {
        Ok(self.router.route(from, to)?)
    }

    pub fn base_anchor(&self) -> Anchor {
        Anchor::Branch {
            arc: 0,
            end: self.model.params.q() > 0,
        }
    }

    /// Form `[ω_1..ω_g, dg_y − dθ_y, dg_t − dθ_t]`.
    pub fn abel_form<'a>(
        &self,
        omega: &'a [DifferentialRep],
        dgy: &'a DifferentialRep,
        dgt: &'a DifferentialRep,
    ) -> Form<'a> {
        let b = self.basis;
        let g = omega.len();
        Form::new(g + 2, move |lam, r, out| {
            let mut buf = vec![ZERO; b.dim()];
            b.eval(lam, r, &mut buf);
            for (k, w) in omega.iter().enumerate() {
                out[k] = w.apply(&buf);
            }
            out[g] = dgy.apply(&buf) - dtheta_y(lam);
            out[g + 1] = dgt.apply(&buf) - dtheta_t(lam);
        })
    }

    fn abel_from_parts(&self, v: Vec<Complex>, g: usize) -> AbelValue {
        let base = self.model.base_point();
        AbelValue {
            a: v[..g].to_vec(),
            gy: v[g] - theta_y(base),
            gt: v[g + 1] - theta_t(base),
        }
    }

    /// Abel value at a free point off Γ, along a routed path.
    pub fn abel_along(&self, path: &Path, form: &Form, g: usize) -> Result<AbelValue, DifferentialError> {
        let v = self.integ.path(path, form)?;
        Ok(self.abel_from_parts(v, g))
    }

    /// Regularized Abel value at a special point.
    pub fn abel_special(
        &self,
        s: Special,
        omega: &[DifferentialRep],
        dgy: &DifferentialRep,
        dgt: &DifferentialRep,
    ) -> Result<AbelValue, DifferentialError> {
        let loc = self.local(s);
        let z = loc.approach_point();
        let form = self.abel_form(omega, dgy, dgt);
        let path = self.router.route(self.base_anchor(), Anchor::Free(z))?;
        let mut v = self.integ.path(&path, &form)?;
        let g = omega.len();
        for (k, w) in omega.iter().enumerate() {
            v[k] += loc.integrate_to_point(&loc.of(w, 0.0, 0.0), z);
        }
        v[g] += loc.integrate_to_point(&loc.of(dgy, 1.0, 0.0), z);
        v[g + 1] += loc.integrate_to_point(&loc.of(dgt, 0.0, 1.0), z);
        Ok(self.abel_from_parts(v, g))
    }

    /// Path from the base point to an arbitrary λ off Γ.
    pub fn path_to(&self, z: Complex) -> Result<Path, DifferentialError> {
        if z.norm() > self.router.far_radius() {
            Ok(self.router.route_far(self.base_anchor(), Some(z))?)
        } else {
            Ok(self.router.route(self.base_anchor(), Anchor::Free(z))?)
        }
    }
}

/// Resolves the sign and solves the square system for one g-differential.
struct AnsatzRows {
    m: DMatrix<Complex>,
    rhs: DVector<Complex>,
}

impl PeriodData {
    pub fn compute(model: &CurveModel, rule: QuadratureRule) -> Result<(PeriodData, Workbench<'_>), DifferentialError> {
        let wb = Workbench::new(model, rule);
        let pd = Self::compute_with(&wb)?;
        Ok((pd, wb))
    }

    pub fn compute_with(wb: &Workbench) -> Result<PeriodData, DifferentialError> {
        let model = wb.model;
        let g = model.genus;
        let n = model.cut_count();
        let basis = wb.basis;
        let dim = basis.dim();
        let rule = wb.integ.rule;

        // raw periods of the basis
        let mut b_raw = vec![vec![ZERO; g]; dim];
        for j in 1..=g {
            let v = wb.b_period_raw(j, rule.nodes);
            for s in 0..dim {
                b_raw[s][j - 1] = v[s];
            }
        }
        let form = wb.basis_form();
        let mut a_raw = vec![vec![ZERO; g]; dim];
        let mut gap_paths = Vec::with_capacity(g);
        for (l, (from, to)) in wb.gap_anchors().into_iter().enumerate() {
            let path = wb.route(from, to)?;
            let v = wb.integ.path(&path, &form)?;
            for s in 0..dim {
                a_raw[s][l] = -2.0 * v[s];
            }
            gap_paths.push(path);
        }

        // normalized holomorphic differentials
        let pb = DMatrix::from_fn(g, g, |m, j| b_raw[basis.plain(m as i32)][j]);
        let svd = pb.clone().svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min();
        if !(cond < 1e12) {
            return Err(DifferentialError::IllConditioned {
                what: "monomial b-period matrix",
                cond,
            });
        }
        let w = pb.clone().try_inverse().ok_or(DifferentialError::IllConditioned {
            what: "monomial b-period matrix",
            cond,
        })?;
        let omega: Vec<DifferentialRep> = (0..g)
            .map(|k| {
                let mut c = vec![ZERO; dim];
                for m in 0..g {
                    c[basis.plain(m as i32)] = w[(k, m)];
                }
                DifferentialRep {
                    kind: DifferentialKind::Holomorphic,
                    coeffs: c,
                }
            })
            .collect();

        let period_of = |rep: &DifferentialRep, raw: &Vec<Vec<Complex>>, l: usize| -> Complex {
            rep.coeffs
                .iter()
                .enumerate()
                .fold(ZERO, |acc, (s, c)| acc + c * raw[s][l])
        };

        // cumulative a-sums and the integer correction to a canonical basis
        let mut bc = vec![vec![ZERO; g]; g];
        for k in 0..g {
            let mut acc = ZERO;
            for j in 0..g {
                acc += period_of(&omega[k], &a_raw, j);
                bc[k][j] = acc;
            }
        }
        let mut defect = vec![vec![0i64; g]; g];
        let mut bm = bc.clone();
        for k in 0..g {
            for j in 0..g {
                defect[k][j] = (bc[k][j] - bc[j][k]).re.round() as i64;
            }
        }
        for k in 0..g {
            for j in k + 1..g {
                bm[k][j] -= Complex::new(defect[k][j] as f64, 0.0);
            }
        }

        let local_inf = wb.local(Special::Infinity);
        let local_zero = wb.local(Special::Zero);
        let local_pi = wb.local(Special::PlusI);
        let local_mi = wb.local(Special::MinusI);

        // dg_y rows: ∞ (orders 0, 1 in w), 0 (orders −2, −1), b- or a-periods
        let build_y = |periods: &Vec<Vec<Complex>>| -> AnsatzRows {
            let cols: Vec<usize> = basis.plain_range().map(|k| basis.plain(k)).collect();
            let nu = cols.len();
            let mut m = DMatrix::from_element(nu, nu, ZERO);
            let mut rhs = DVector::from_element(nu, ZERO);
            for (c, &slot) in cols.iter().enumerate() {
                m[(0, c)] = local_inf.basis[slot].coeff(0);
                m[(1, c)] = local_inf.basis[slot].coeff(1);
                m[(2, c)] = local_zero.basis[slot].coeff(-2);
                m[(3, c)] = local_zero.basis[slot].coeff(-1);
                for j in 0..g {
                    m[(4 + j, c)] = periods[slot][j];
                }
            }
            rhs[0] = ONE;
            rhs[2] = ONE;
            AnsatzRows { m, rhs }
        };
        let build_t = |periods: &Vec<Vec<Complex>>| -> AnsatzRows {
            let cols: Vec<usize> = basis.framed_range().map(|k| basis.framed(k)).collect();
            let nu = cols.len();
            let mut m = DMatrix::from_element(nu, nu, ZERO);
            let mut rhs = DVector::from_element(nu, ZERO);
            for (c, &slot) in cols.iter().enumerate() {
                for (r, ord) in (-3..0).enumerate() {
                    m[(r, c)] = local_pi.basis[slot].coeff(ord);
                    m[(3 + r, c)] = local_mi.basis[slot].coeff(ord);
                }
                for j in 0..g {
                    m[(6 + j, c)] = periods[slot][j];
                }
            }
            for (r, ord) in (-3..0).enumerate() {
                rhs[r] = local_pi.dtheta_t.coeff(ord);
                rhs[3 + r] = local_mi.dtheta_t.coeff(ord);
            }
            AnsatzRows { m, rhs }
        };
        let mut dg_residual: f64 = 0.0;
        let mut dg_condition: f64 = 0.0;
        let mut solve = |rows: AnsatzRows,
                         slots: Vec<usize>,
                         kind: DifferentialKind,
                         what: &'static str|
         -> Result<DifferentialRep, DifferentialError> {
            let (x, cond, res) = solve_square(&rows.m, &rows.rhs, what)?;
            dg_residual = dg_residual.max(res);
            dg_condition = dg_condition.max(cond);
            let mut c = vec![ZERO; dim];
            for (k, &slot) in slots.iter().enumerate() {
                c[slot] = x[k];
            }
            Ok(DifferentialRep { kind, coeffs: c })
        };
        let yslots: Vec<usize> = basis.plain_range().map(|k| basis.plain(k)).collect();
        let tslots: Vec<usize> = basis.framed_range().map(|k| basis.framed(k)).collect();
        let dg_y = solve(build_y(&b_raw), yslots.clone(), DifferentialKind::YFlow, "dg_y system")?;
        let dg_t = solve(build_t(&b_raw), tslots.clone(), DifferentialKind::TFlow, "dg_t system")?;
        let dg_y_tilde = solve(build_y(&a_raw), yslots, DifferentialKind::YFlow, "tilde dg_y system")?;
        let dg_t_tilde = solve(build_t(&a_raw), tslots, DifferentialKind::TFlow, "tilde dg_t system")?;
        for (rep, what) in [(&dg_t, "dg_t"), (&dg_t_tilde, "tilde dg_t")] {
            for loc in [local_pi, local_mi] {
                let r = loc.singular_residue(&loc.of(rep, 0.0, 1.0));
                if r > 1e-8 {
                    return Err(DifferentialError::InconsistentPrincipalPart { what, residual: r });
                }
            }
        }

        // frequencies
        let mut omega_y = vec![ZERO; g + 1];
        let mut omega_t = vec![ZERO; g + 1];
        let (mut ay, mut at) = (ZERO, ZERO);
        for j in 1..=g {
            ay += period_of(&dg_y, &a_raw, j - 1);
            at += period_of(&dg_t, &a_raw, j - 1);
            omega_y[j] = -0.25 * ay;
            omega_t[j] = -2.0 * at;
        }
        let mut omega_y_tilde = vec![ZERO; g + 1];
        let mut omega_t_tilde = vec![ZERO; g + 1];
        for j in (1..=g).rev() {
            let by = period_of(&dg_y_tilde, &b_raw, j - 1);
            let bt = period_of(&dg_t_tilde, &b_raw, j - 1);
            let next_y = if j < g { omega_y_tilde[j + 1] } else { ZERO };
            let next_t = if j < g { omega_t_tilde[j + 1] } else { ZERO };
            omega_y_tilde[j] = next_y + 0.25 * by;
            omega_t_tilde[j] = next_t + 2.0 * bt;
        }

        let mut special = Vec::new();
        for s in Special::ALL {
            special.push((s, wb.abel_special(s, &omega, &dg_y, &dg_t)?));
        }
        let sp = |s: Special| &special.iter().find(|x| x.0 == s).unwrap().1;
        let x_y = 0.25 * (sp(Special::Infinity).gy - sp(Special::PlusI).gy);
        let x_t = 2.0 * (sp(Special::Infinity).gt - sp(Special::PlusI).gt);

        // tilde shift constants along the imaginary axis, right of the cuts
        let (ty, tt) = imaginary_axis_integral(wb, &dg_y_tilde, &dg_t_tilde, 1.0)?;
        let x_y_tilde = -0.25 * ty;
        let x_t_tilde = -2.0 * tt;

        let _ = n;
        Ok(PeriodData {
            genus: g,
            basis,
            rule,
            omega,
            omega_condition: cond,
            b_raw,
            a_raw,
            gap_paths,
            b_cumulative: bc,
            intersection_defect: defect,
            period_matrix: bm,
            dg_y,
            dg_t,
            dg_y_tilde,
            dg_t_tilde,
            dg_residual,
            dg_condition,
            omega_y,
            omega_t,
            omega_y_tilde,
            omega_t_tilde,
            x_y,
            x_t,
            x_y_tilde,
            x_t_tilde,
            special,
            base_point: model.base_point(),
        })
    }

    pub fn special(&self, s: Special) -> &AbelValue {
        &self.special.iter().find(|x| x.0 == s).unwrap().1
    }

    /// Period matrix as a dense matrix.
    pub fn b_matrix(&self) -> DMatrix<Complex> {
        let g = self.genus;
        DMatrix::from_fn(g, g, |k, j| self.period_matrix[k][j])
    }

    /// Largest real part among the frequencies; θ is imaginary on every cut,
    /// which makes the frequencies imaginary as well.
    pub fn omega_real_residue(&self) -> f64 {
        self.omega_y
            .iter()
            .chain(&self.omega_t)
            .map(|w| w.re.abs())
            .fold(0.0, f64::max)
    }

    /// Largest imaginary part among the frequencies.
    pub fn omega_imag_residue(&self) -> f64 {
        self.omega_y
            .iter()
            .chain(&self.omega_t)
            .map(|w| w.im.abs())
            .fold(0.0, f64::max)
    }

    /// `max |B − Bᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let b = self.b_matrix();
        max_norm(&(&b - b.transpose()))
    }

    /// Eigenvalues of `Im B` (symmetrized).
    pub fn im_eigenvalues(&self) -> Vec<f64> {
        let g = self.genus;
        let y = DMatrix::from_fn(g, g, |k, j| {
            0.5 * (self.period_matrix[k][j].im + self.period_matrix[j][k].im)
        });
        let mut e: Vec<f64> = y.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// `∮_{𝔟_j} ω_k` recomputed from the raw periods, minus the identity.
    pub fn normalization_residual(&self) -> f64 {
        let g = self.genus;
        let mut worst: f64 = 0.0;
        for k in 0..g {
            for j in 0..g {
                let v = self.omega[k]
                    .coeffs
                    .iter()
                    .enumerate()
                    .fold(ZERO, |acc, (s, c)| acc + c * self.b_raw[s][j]);
                let target = if k == j { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// `∮` over the raw cycles of a differential: (a-periods, b-periods).
    pub fn periods_of(&self, rep: &DifferentialRep) -> (Vec<Complex>, Vec<Complex>) {
        let g = self.genus;
        let f = |raw: &Vec<Vec<Complex>>| {
            (0..g)
                .map(|l| {
                    rep.coeffs
                        .iter()
                        .enumerate()
                        .fold(ZERO, |acc, (s, c)| acc + c * raw[s][l])
                })
                .collect()
        };
        (f(&self.a_raw), f(&self.b_raw))
    }

    /// `lim_{λ→∞}(g − θ)` predicted by the frequencies: `¼(yΩ_y + tΩ_t)` at `j = g`.
    pub fn phase(&self, y: f64, t: f64) -> Complex {
        0.25 * (y * self.omega_y[self.genus] + t * self.omega_t[self.genus])
    }
}

/// `(∫ (dg_y − dθ_y), ∫ (dg_t − dθ_t))` from i to i∞ along `Re λ = side·ε`.
pub fn imaginary_axis_integral(
    wb: &Workbench,
    dgy: &DifferentialRep,
    dgt: &DifferentialRep,
    side: f64,
) -> Result<(Complex, Complex), DifferentialError> {
    let b = wb.basis;
    let form = Form::new(2, move |lam, r, out| {
        let mut buf = vec![ZERO; b.dim()];
        b.eval(lam, r, &mut buf);
        out[0] = dgy.apply(&buf) - dtheta_y(lam);
        out[1] = dgt.apply(&buf) - dtheta_t(lam);
    });
    let li = wb.local(Special::PlusI);
    let linf = wb.local(Special::Infinity);
    let eps = (0.05 * wb.model.min_feature()).min(0.5 * APPROACH * li.radius);
    let z0 = I + side * eps;
    let top = linf.approach_point().norm();
    let z1 = Complex::new(side * eps, top);
    let path = Path {
        points: vec![z0, z1],
        start_at_branch: false,
        end_at_branch: false,
        radial_tail: false,
    };
    let v = wb.integ.path(&path, &form)?;
    // i → z0 and z1 → ∞ by series
    let head_y = -li.integrate_to_point(&li.of(dgy, 1.0, 0.0), z0);
    let head_t = -li.integrate_to_point(&li.of(dgt, 0.0, 1.0), z0);
    let tail_y = linf.integrate_to_point(&linf.of(dgy, 1.0, 0.0), z1);
    let tail_t = linf.integrate_to_point(&linf.of(dgt, 0.0, 1.0), z1);
    Ok((head_y + v[0] + tail_y, head_t + v[1] + tail_t))
}

/// Abel map `λ ↦ (𝒜, g_y − θ_y, g_t − θ_t)` on sheet 1, with local series near
/// 0, ±i and ∞ and one-sided values on the cuts.
pub struct AbelMap<'a> {
    pub wb: &'a Workbench<'a>,
    pub pd: &'a PeriodData,
    form: Form<'a>,
    series: Vec<(Special, Vec<Laurent<f64>>)>,
}

impl<'a> AbelMap<'a> {
    pub fn new(wb: &'a Workbench<'a>, pd: &'a PeriodData) -> Self {
        let form = wb.abel_form(&pd.omega, &pd.dg_y, &pd.dg_t);
        let series = Special::ALL
            .iter()
            .map(|&s| {
                let loc = wb.local(s);
                let mut v: Vec<Laurent<f64>> = pd.omega.iter().map(|w| loc.of(w, 0.0, 0.0)).collect();
                v.push(loc.of(&pd.dg_y, 1.0, 0.0));
                v.push(loc.of(&pd.dg_t, 0.0, 1.0));
                (s, v)
            })
            .collect();
        AbelMap { wb, pd, form, series }
    }

    pub fn genus(&self) -> usize {
        self.pd.genus
    }

    /// Special point whose series reaches `z`, if any.
    fn near(&self, z: Complex) -> Option<Special> {
        Special::ALL.into_iter().find(|&s| {
            let loc = self.wb.local(s);
            match s.point() {
                Some(p) => (z - p).norm() <= APPROACH * loc.radius,
                None => z.norm() * APPROACH * loc.radius >= 1.0,
            }
        })
    }

    /// Value at λ off Γ.
    pub fn at(&self, z: Complex) -> Result<AbelValue, DifferentialError> {
        let g = self.pd.genus;
        if let Some(s) = self.near(z) {
            let loc = self.wb.local(s);
            let base = self.pd.special(s);
            let series = &self.series.iter().find(|x| x.0 == s).unwrap().1;
            let mut out = base.clone();
            if s.point() == Some(z) {
                return Ok(out);
            }
            for (k, f) in series.iter().enumerate() {
                let d = loc.integrate_to_point(f, z);
                match k {
                    k if k < g => out.a[k] -= d,
                    k if k == g => out.gy -= d,
                    _ => out.gt -= d,
                }
            }
            return Ok(out);
        }
        let path = self.wb.path_to(z)?;
        self.wb.abel_along(&path, &self.form, g)
    }

    /// One-sided value at `arcs[arc].point(s)`, approached along the normal.
    pub fn boundary(&self, arc: usize, s: f64, side: crate::curve::Side) -> Result<AbelValue, DifferentialError> {
        let a = &self.wb.model.arcs[arc];
        let lam = a.point(s);
        let room = (lam - a.start).norm().min((lam - a.end).norm());
        let delta = 0.1 * self.wb.model.min_feature().min(room);
        let off = lam + a.plus_normal(s) * (side.sign() * delta);
        let mut v = self.at(off)?;
        let seg = self.wb.integ.segment(off, lam, false, &self.form)?;
        let g = self.pd.genus;
        for k in 0..g {
            v.a[k] += seg[k];
        }
        v.gy += seg[g];
        v.gt += seg[g + 1];
        Ok(v)
    }

    /// Densities `(ω_k, dg_y − dθ_y, dg_t − dθ_t)` at λ off Γ, from the local
    /// series near the special points (all regular there; at infinity the
    /// coefficients are those of the density in `1/λ`).
    pub fn density(&self, z: Complex) -> Vec<Complex> {
        if let Some(s) = self.near(z) {
            let series = &self.series.iter().find(|x| x.0 == s).unwrap().1;
            let eps = match s.point() {
                Some(p) => z - p,
                None => z.inv(),
            };
            return series
                .iter()
                .map(|f| (0..f.high()).rev().fold(ZERO, |acc, n| acc * eps + f.coeff(n)))
                .collect();
        }
        let mut out = vec![ZERO; self.form.dim];
        (self.form.f)(z, self.wb.model.r_unchecked(z), &mut out);
        out
    }
}
