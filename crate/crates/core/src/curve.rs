//! Spectral parameters, the branch-cut contour and the sheet-1 square root.
//!
//! Every cut carries its own Möbius-adapted square root
//! `(λ−s)·((c·w)^{1/2}/c^{1/2})` with `w = (λ−e)/(λ−s)`, where the unit
//! rotation `c` sends the cut onto the negative real axis of `c·w`. The
//! principal branch then puts each discontinuity exactly on its cut and the
//! product of the factors behaves like `λ^N` at infinity.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Complex;

const I: Complex = Complex::new(0.0, 1.0);

/// Relative distance below which a point counts as lying on a cut.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Parameter record as it arrives from a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub p: usize,
    pub q: usize,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub d: Vec<f64>,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("EmptySpectrum: p and q are both zero")]
    EmptySpectrum,
    #[error("LengthMismatch: `{field}` has {found} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("RangeViolation: `{field}[{index}]` = {value} must lie in {range}")]
    RangeViolation {
        field: &'static str,
        index: usize,
        value: f64,
        range: &'static str,
    },
    #[error("OrderingViolation: `{field}[{index}]` breaks the interleaving {order}")]
    OrderingViolation {
        field: &'static str,
        index: usize,
        order: &'static str,
    },
    #[error("ZeroWeight: `{field}[{index}]` is zero")]
    ZeroWeight { field: &'static str, index: usize },
}

/// Validated spectral data. Indices in error messages are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    p: usize,
    q: usize,
    c: Vec<f64>,
    d: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn check_len(field: &'static str, v: &[f64], expected: usize) -> Result<(), ParamError> {
    if v.len() != expected {
        return Err(ParamError::LengthMismatch {
            field,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// Checks `0 < lo_1 < hi_1 < lo_2 < … < hi_n < top`.
fn check_interleaved(
    names: (&'static str, &'static str),
    lo: &[f64],
    hi: &[f64],
    top: f64,
    range: &'static str,
    order: &'static str,
) -> Result<(), ParamError> {
    let seq: Vec<(&'static str, usize, f64)> = lo
        .iter()
        .zip(hi)
        .enumerate()
        .flat_map(|(k, (&l, &h))| [(names.0, k + 1, l), (names.1, k + 1, h)])
        .collect();
    for &(field, index, value) in &seq {
        if !(value > 0.0 && value < top) {
            return Err(ParamError::RangeViolation {
                field,
                index,
                value,
                range,
            });
        }
    }
    for w in seq.windows(2) {
        if w[1].2 <= w[0].2 {
            return Err(ParamError::OrderingViolation {
                field: w[1].0,
                index: w[1].1,
                order,
            });
        }
    }
    Ok(())
}

fn check_weights(field: &'static str, v: &[f64]) -> Result<(), ParamError> {
    for (k, &x) in v.iter().enumerate() {
        if x == 0.0 {
            return Err(ParamError::ZeroWeight { field, index: k + 1 });
        }
        if !x.is_finite() {
            return Err(ParamError::RangeViolation {
                field,
                index: k + 1,
                value: x,
                range: "finite reals",
            });
        }
    }
    Ok(())
}

impl SpectralParams {
    pub fn validate(raw: &RawParams) -> Result<Self, ParamError> {
        let (p, q) = (raw.p, raw.q);
        if p + q == 0 {
            return Err(ParamError::EmptySpectrum);
        }
        check_len("c", &raw.c, p)?;
        check_len("d", &raw.d, p)?;
        check_len("alpha", &raw.alpha, p)?;
        check_len("a", &raw.a, q)?;
        check_len("b", &raw.b, q)?;
        check_len("beta", &raw.beta, q)?;
        check_interleaved(
            ("c", "d"),
            &raw.c,
            &raw.d,
            FRAC_PI_2,
            "(0, pi/2)",
            "0 < c1 < d1 < ... < cp < dp < pi/2",
        )?;
        check_interleaved(
            ("a", "b"),
            &raw.a,
            &raw.b,
            1.0,
            "(0, 1)",
            "0 < a1 < b1 < ... < aq < bq < 1",
        )?;
        check_weights("alpha", &raw.alpha)?;
        check_weights("beta", &raw.beta)?;
        Ok(SpectralParams {
            p,
            q,
            c: raw.c.clone(),
            d: raw.d.clone(),
            a: raw.a.clone(),
            b: raw.b.clone(),
            alpha: raw.alpha.clone(),
            beta: raw.beta.clone(),
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            p: self.p,
            q: self.q,
            c: self.c.clone(),
            d: self.d.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn d(&self) -> &[f64] {
        &self.d
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Number of cuts, `4(p+q)`.
    pub fn cut_count(&self) -> usize {
        4 * (self.p + self.q)
    }

    pub fn genus(&self) -> usize {
        self.cut_count() - 1
    }

    /// Same family with one jump weight rescaled; used by negative controls.
    pub fn with_weight_scaled(&self, weight: JumpWeight, factor: f64) -> Self {
        let mut out = self.clone();
        match weight {
            JumpWeight::BetaRecip(l) | JumpWeight::Beta(l) => out.beta[l - 1] *= factor,
            JumpWeight::AlphaRecip(l) | JumpWeight::Alpha(l) => out.alpha[l - 1] *= factor,
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    ImaginarySegment,
    CircleArc,
}

/// The weight entering the off-diagonal jump on a cut. `x()` returns the
/// 12-entry of the jump; the 21-entry is `−1/x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpWeight {
    /// `−1/β_l`
    BetaRecip(usize),
    /// `i/α_l`
    AlphaRecip(usize),
    /// `iα_l`
    Alpha(usize),
    /// `−β_l`
    Beta(usize),
}

impl JumpWeight {
    pub fn x(&self, params: &SpectralParams) -> Complex {
        match *self {
            JumpWeight::BetaRecip(l) => Complex::new(-1.0 / params.beta[l - 1], 0.0),
            JumpWeight::AlphaRecip(l) => I / params.alpha[l - 1],
            JumpWeight::Alpha(l) => I * params.alpha[l - 1],
            JumpWeight::Beta(l) => Complex::new(-params.beta[l - 1], 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    First,
    Second,
}

/// One oriented cut Γ_j. The plus side lies to the left of the direction of
/// travel from `start` to `end`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Arc {
    pub index: usize,
    pub kind: ArcKind,
    pub start: Complex,
    pub end: Complex,
    pub weight: JumpWeight,
    phi0: f64,
    dphi: f64,
    rot: Complex,
    rot_sqrt: Complex,
    rot_qrt: Complex,
}

impl Arc {
    fn new(index: usize, kind: ArcKind, start: Complex, end: Complex, weight: JumpWeight) -> Arc {
        let phi0 = start.arg();
        let dphi = (end / start).arg();
        let mut arc = Arc {
            index,
            kind,
            start,
            end,
            weight,
            phi0,
            dphi,
            rot: Complex::new(1.0, 0.0),
            rot_sqrt: Complex::new(1.0, 0.0),
            rot_qrt: Complex::new(1.0, 0.0),
        };
        let mid = arc.point(0.5);
        let w = (mid - end) / (mid - start);
        arc.rot = -w.conj() / w.norm();
        arc.rot_sqrt = arc.rot.sqrt();
        arc.rot_qrt = arc.rot.powf(0.25);
        arc
    }

    /// Point at parameter `s ∈ [0,1]`, `s = 0` at the start.
    pub fn point(&self, s: f64) -> Complex {
        match self.kind {
            ArcKind::ImaginarySegment => self.start + (self.end - self.start) * s,
            ArcKind::CircleArc => Complex::from_polar(1.0, self.phi0 + self.dphi * s),
        }
    }

    /// `dλ/ds`.
    pub fn dpoint(&self, s: f64) -> Complex {
        match self.kind {
            ArcKind::ImaginarySegment => self.end - self.start,
            ArcKind::CircleArc => I * self.point(s) * self.dphi,
        }
    }

    pub fn tangent(&self, s: f64) -> Complex {
        let d = self.dpoint(s);
        d / d.norm()
    }

    /// Unit normal pointing into the plus side.
    pub fn plus_normal(&self, s: f64) -> Complex {
        I * self.tangent(s)
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            ArcKind::ImaginarySegment => (self.end - self.start).norm(),
            ArcKind::CircleArc => self.dphi.abs(),
        }
    }

    pub fn endpoints(&self) -> [Complex; 2] {
        [self.start, self.end]
    }

    /// Angular span `[lo, hi]` of a circle arc, `lo` in `(−π, π]`.
    fn span(&self) -> (f64, f64) {
        let (a, b) = (self.phi0, self.phi0 + self.dphi);
        if a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn angle_inside(&self, phi: f64) -> bool {
        let (lo, hi) = self.span();
        let mut x = phi;
        while x < lo {
            x += 2.0 * PI;
        }
        while x > lo + 2.0 * PI {
            x -= 2.0 * PI;
        }
        x <= hi
    }

    /// Euclidean distance from `z` to the cut.
    pub fn distance(&self, z: Complex) -> f64 {
        match self.kind {
            ArcKind::ImaginarySegment => point_segment_distance(z, self.start, self.end),
            ArcKind::CircleArc => {
                if z.norm() > 0.0 && self.angle_inside(z.arg()) {
                    (z.norm() - 1.0).abs()
                } else {
                    (z - self.start).norm().min((z - self.end).norm())
                }
            }
        }
    }

    /// Distance from the straight segment `[p, r]` to the cut; zero when they meet.
    pub fn segment_distance(&self, p: Complex, r: Complex) -> f64 {
        match self.kind {
            ArcKind::ImaginarySegment => segment_segment_distance(p, r, self.start, self.end),
            ArcKind::CircleArc => {
                let v = r - p;
                let vv = v.norm_sqr();
                let mut best = self.distance(p).min(self.distance(r));
                best = best
                    .min(point_segment_distance(self.start, p, r))
                    .min(point_segment_distance(self.end, p, r));
                if vv == 0.0 {
                    return best;
                }
                // crossings of the unit circle
                let bq = 2.0 * (p.conj() * v).re;
                let cq = p.norm_sqr() - 1.0;
                let disc = bq * bq - 4.0 * vv * cq;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [(-bq - sq) / (2.0 * vv), (-bq + sq) / (2.0 * vv)] {
                        if (0.0..=1.0).contains(&t) && self.angle_inside((p + v * t).arg()) {
                            return 0.0;
                        }
                    }
                }
                // closest approach to the origin gives the radial extremum
                let t0 = (-(p.conj() * v).re / vv).clamp(0.0, 1.0);
                let z0 = p + v * t0;
                if z0.norm() > 0.0 && self.angle_inside(z0.arg()) {
                    best = best.min((z0.norm() - 1.0).abs());
                }
                best
            }
        }
    }

    /// The Möbius-rotated variable `c·w` for this cut.
    fn cw(&self, lam: Complex) -> Complex {
        self.rot * (lam - self.end) / (lam - self.start)
    }

    /// `(λ − start, λ − end)` for `λ = base + delta`, exact when `base` is an
    /// endpoint of this cut.
    fn offsets(&self, base: Complex, delta: Complex) -> (Complex, Complex) {
        let lam = base + delta;
        let ds = if base == self.start { delta } else { lam - self.start };
        let de = if base == self.end { delta } else { lam - self.end };
        (ds, de)
    }

    /// Root of `w` of the given order (2 or 4), normalized so it tends to 1
    /// at infinity. With `edge`, returns the boundary value for a point on this
    /// cut approached from `side`.
    fn root(&self, lam: Complex, order: u32, edge: Option<(Side, Complex)>) -> Complex {
        let z = self.cw(lam);
        let (norm_c, power) = match order {
            2 => (self.rot_sqrt, 0.5),
            _ => (self.rot_qrt, 0.25),
        };
        let r = match edge {
            Some((side, tangent)) => {
                let dw = self.rot * (self.end - self.start) / ((lam - self.start) * (lam - self.start));
                let dz = dw * I * tangent * side.sign();
                let sg = if dz.im >= 0.0 { 1.0 } else { -1.0 };
                Complex::from_polar(z.norm().powf(power), PI * power * sg)
            }
            None => {
                if order == 2 {
                    z.sqrt()
                } else {
                    z.sqrt().sqrt()
                }
            }
        };
        r / norm_c
    }

    /// Whether `lam` lies on this cut to snap tolerance.
    fn touches(&self, lam: Complex) -> bool {
        let z = self.cw(lam);
        z.re < 0.0 && z.im.abs() <= SNAP_TOLERANCE * z.norm()
    }
}

pub fn point_segment_distance(z: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let s = (((z - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + ab * s)).norm()
}

pub fn segment_segment_distance(p1: Complex, p2: Complex, q1: Complex, q2: Complex) -> f64 {
    let cross = |u: Complex, v: Complex| (u.conj() * v).im;
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(p1, q1, q2)
        .min(point_segment_distance(p2, q1, q2))
        .min(point_segment_distance(q1, p1, p2))
        .min(point_segment_distance(q2, p1, p2))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("OnCutError: point {point} lies on cut {arc}; use the boundary evaluator")]
    OnCut { arc: usize, point: Complex },
    #[error("point {point} is a branch point")]
    BranchPoint { point: Complex },
}

/// Branch-cut contour and sheet-1 evaluators of `R` and the per-cut roots.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveModel {
    pub params: SpectralParams,
    pub arcs: Vec<Arc>,
    pub genus: usize,
    pub reference_point: f64,
}

/// The pair `(arc, side)` naming a boundary value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub arc: usize,
    pub side: Side,
}

impl CurveModel {
    pub fn new(params: SpectralParams) -> CurveModel {
        let arcs = build_contour(&params);
        let genus = params.genus();
        CurveModel {
            params,
            arcs,
            genus,
            reference_point: 1e6,
        }
    }

    pub fn cut_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn branch_points(&self) -> Vec<Complex> {
        self.arcs.iter().flat_map(|a| a.endpoints()).collect()
    }

    /// Base point of the Abel map: `i/a_1` for `q ≠ 0`, `−e^{−i c_p}` otherwise.
    /// Both are endpoints of Γ_0.
    pub fn base_point(&self) -> Complex {
        if self.params.q > 0 {
            self.arcs[0].end
        } else {
            self.arcs[0].start
        }
    }

    /// Smallest scale of the picture; sets geometric tolerances.
    pub fn min_feature(&self) -> f64 {
        let bps = self.branch_points();
        let mut m = f64::INFINITY;
        for (i, a) in bps.iter().enumerate() {
            for b in &bps[i + 1..] {
                m = m.min((a - b).norm());
            }
            for s in [Complex::new(0.0, 0.0), I, -I] {
                m = m.min((a - s).norm());
            }
        }
        m
    }

    /// The defining polynomial `R²`.
    pub fn r_squared(&self, lam: Complex) -> Complex {
        let l2 = lam * lam;
        let l4 = l2 * l2;
        let mut v = Complex::new(1.0, 0.0);
        for &x in self.params.c.iter().chain(&self.params.d) {
            v *= l4 - 2.0 * (2.0 * x).cos() * l2 + 1.0;
        }
        for &x in self.params.a.iter().chain(&self.params.b) {
            v *= l4 + (x * x + 1.0 / (x * x)) * l2 + 1.0;
        }
        v
    }

    /// Coefficients of `R²` in increasing powers, degree `2N`.
    pub fn r_squared_coeffs(&self) -> Vec<f64> {
        let mut poly = vec![1.0];
        let mut mul = |f: [f64; 5]| {
            let mut out = vec![0.0; poly.len() + 4];
            for (i, &x) in poly.iter().enumerate() {
                for (j, &y) in f.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            poly = out;
        };
        for &x in self.params.c.iter().chain(&self.params.d) {
            mul([1.0, 0.0, -2.0 * (2.0 * x).cos(), 0.0, 1.0]);
        }
        for &x in self.params.a.iter().chain(&self.params.b) {
            mul([1.0, 0.0, x * x + 1.0 / (x * x), 0.0, 1.0]);
        }
        poly
    }

    fn check_off_cut(&self, lam: Complex, skip: Option<usize>) -> Result<(), CurveError> {
        for arc in &self.arcs {
            if Some(arc.index) == skip {
                continue;
            }
            if lam == arc.start || lam == arc.end {
                return Err(CurveError::BranchPoint { point: lam });
            }
            if arc.touches(lam) {
                return Err(CurveError::OnCut {
                    arc: arc.index,
                    point: lam,
                });
            }
        }
        Ok(())
    }

    fn product(&self, lam: Complex, order: u32, edge: Option<(Edge, f64)>) -> Complex {
        let mut v = Complex::new(1.0, 0.0);
        for arc in &self.arcs {
            let e = match edge {
                Some((ed, s)) if ed.arc == arc.index => Some((ed.side, arc.tangent(s))),
                _ => None,
            };
            let r = arc.root(lam, order, e);
            v *= if order == 2 { (lam - arc.start) * r } else { r };
        }
        v
    }

    /// `R(λ)` on the requested sheet, for λ off the cuts.
    pub fn eval_r(&self, lam: Complex, sheet: Sheet) -> Result<Complex, CurveError> {
        self.check_off_cut(lam, None)?;
        let v = self.product(lam, 2, None);
        Ok(match sheet {
            Sheet::First => v,
            Sheet::Second => -v,
        })
    }

    /// Sheet-1 `R` at `base + delta`, accurate for tiny `delta` when `base` is a
    /// branch point.
    pub fn r_near(&self, base: Complex, delta: Complex) -> Complex {
        let mut v = Complex::new(1.0, 0.0);
        for arc in &self.arcs {
            let (ds, de) = arc.offsets(base, delta);
            v *= ds * (arc.rot * de / ds).sqrt() / arc.rot_sqrt;
        }
        v
    }

    /// Sheet-1 `R` without the on-cut check. Callers guarantee λ is off Γ.
    pub fn r_unchecked(&self, lam: Complex) -> Complex {
        self.product(lam, 2, None)
    }

    /// Sheet-1 boundary value of `R` at `arcs[arc].point(s)` from `side`.
    pub fn eval_r_boundary(&self, arc: usize, s: f64, side: Side) -> Complex {
        let lam = self.arcs[arc].point(s);
        self.product(lam, 2, Some((Edge { arc, side }, s)))
    }

    /// The fourth root `κ` normalized by `κ → 1` at infinity.
    pub fn kappa(&self, lam: Complex) -> Result<Complex, CurveError> {
        self.check_off_cut(lam, None)?;
        Ok(self.product(lam, 4, None))
    }

    pub fn kappa_unchecked(&self, lam: Complex) -> Complex {
        self.product(lam, 4, None)
    }

    pub fn kappa_boundary(&self, arc: usize, s: f64, side: Side) -> Complex {
        let lam = self.arcs[arc].point(s);
        self.product(lam, 4, Some((Edge { arc, side }, s)))
    }

    /// Distance from `z` to the nearest cut, with that cut's index.
    pub fn nearest_cut(&self, z: Complex) -> (usize, f64) {
        self.arcs
            .iter()
            .map(|a| (a.index, a.distance(z)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }
}

/// The cut table. Imaginary segments run upward, circle arcs clockwise.
pub fn build_contour(params: &SpectralParams) -> Vec<Arc> {
    let (p, q) = (params.p, params.q);
    let n = 4 * (p + q);
    let (a, b, c, d) = (&params.a, &params.b, &params.c, &params.d);
    let e = |phi: f64| Complex::from_polar(1.0, phi);
    let seg = Complex::new(0.0, 1.0);
    (0..n)
        .map(|k| {
            use ArcKind::*;
            use JumpWeight::*;
            let (kind, start, end, w) = if k < q {
                let l = k + 1;
                (ImaginarySegment, seg / b[l - 1], seg / a[l - 1], BetaRecip(l))
            } else if k < p + q {
                let l = p + q - k;
                (CircleArc, e(PI - c[l - 1]), e(PI - d[l - 1]), AlphaRecip(l))
            } else if k < 2 * p + q {
                let l = k - p - q + 1;
                (CircleArc, e(PI + d[l - 1]), e(PI + c[l - 1]), Alpha(l))
            } else if k < 2 * p + 2 * q {
                let l = 2 * p + 2 * q - k;
                (ImaginarySegment, -seg * b[l - 1], -seg * a[l - 1], Beta(l))
            } else if k < 2 * p + 3 * q {
                let l = k - 2 * p - 2 * q + 1;
                (ImaginarySegment, seg * a[l - 1], seg * b[l - 1], BetaRecip(l))
            } else if k < 3 * p + 3 * q {
                let l = 3 * p + 3 * q - k;
                (CircleArc, e(d[l - 1]), e(c[l - 1]), AlphaRecip(l))
            } else if k < 4 * p + 3 * q {
                let l = k - 3 * p - 3 * q + 1;
                (CircleArc, e(-c[l - 1]), e(-d[l - 1]), Alpha(l))
            } else {
                let l = 4 * p + 4 * q - k;
                (ImaginarySegment, -seg / a[l - 1], -seg / b[l - 1], Beta(l))
            };
            Arc::new(k, kind, start, end, w)
        })
        .collect()
}
