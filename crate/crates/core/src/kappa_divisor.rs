//! The fourth root κ, the divisor of zeros of `κ + κ⁻¹`, the Riemann
//! constant and the vector `e = 𝒜(D) + K`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveModel, Sheet};
use crate::differentials::{AbelMap, DifferentialError};
use crate::theta::{ThetaError, ThetaEvaluator};
use crate::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Divisor points closer than this to Γ are rejected.
pub const CUT_MARGIN: f64 = 1e-8;
/// Allowed distance of `κ²` from ±1 at a root.
pub const SHEET_TOLERANCE: f64 = 1e-6;
/// Certificate threshold relative to the reference scale.
pub const VANISHING_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivisorError {
    #[error("RootCountMismatch: expected {expected}, found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("AmbiguousSheet: κ² = {kappa_sq} at λ = {lambda}")]
    AmbiguousSheet { lambda: Complex, kappa_sq: Complex },
    #[error("DivisorOnCut: λ = {lambda} lies within {distance:e} of Γ_{arc}")]
    DivisorOnCut { lambda: Complex, arc: usize, distance: f64 },
    #[error("MonodromyError: κ winds {winding} times around Γ_{arc}")]
    Monodromy { arc: usize, winding: i64 },
    #[error("DivisorValidationFailed: best vanishing ratio {ratio:e}")]
    ValidationFailed { ratio: f64 },
    #[error(transparent)]
    Differential(#[from] DifferentialError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// Coefficients (increasing powers) of `N` and `Dn` with `κ⁴ = N/Dn`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaEvaluator {
    pub numerator: Vec<Complex>,
    pub denominator: Vec<Complex>,
}

fn poly_from_roots(roots: impl Iterator<Item = Complex>) -> Vec<Complex> {
    let mut p = vec![ONE];
    for r in roots {
        let mut q = vec![ZERO; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            q[i + 1] += c;
            q[i] -= c * r;
        }
        p = q;
    }
    p
}

pub fn poly_eval(p: &[Complex], z: Complex) -> Complex {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

fn poly_deriv(p: &[Complex]) -> Vec<Complex> {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

impl KappaEvaluator {
    /// `κ⁴ = Π_j (λ − end_j)/(λ − start_j)`.
    pub fn new(model: &CurveModel) -> Self {
        KappaEvaluator {
            numerator: poly_from_roots(model.arcs.iter().map(|a| a.end)),
            denominator: poly_from_roots(model.arcs.iter().map(|a| a.start)),
        }
    }

    pub fn quartic(&self, lam: Complex) -> Complex {
        poly_eval(&self.numerator, lam) / poly_eval(&self.denominator, lam)
    }

    /// Winding of `κ⁴` around each cut; zero means κ is single-valued there.
    pub fn check_monodromy(&self, model: &CurveModel) -> Result<(), DivisorError> {
        let delta = 0.25 * model.min_feature();
        for arc in &model.arcs {
            let poly = crate::homology::stadium(arc, delta, 200);
            let mut total = 0.0;
            for k in 0..poly.len() {
                let a = self.quartic(poly[k]);
                let b = self.quartic(poly[(k + 1) % poly.len()]);
                total += (b / a).arg();
            }
            let winding = (total / (2.0 * std::f64::consts::PI)).round() as i64;
            if winding != 0 {
                return Err(DivisorError::Monodromy {
                    arc: arc.index,
                    winding,
                });
            }
        }
        Ok(())
    }

    /// `N − Dn`, whose leading terms cancel.
    pub fn difference(&self) -> Vec<Complex> {
        let mut d: Vec<Complex> = self
            .numerator
            .iter()
            .zip(&self.denominator)
            .map(|(a, b)| a - b)
            .collect();
        while d.len() > 1 && d.last().map(|c| c.norm() < 1e-14).unwrap_or(false) {
            d.pop();
        }
        d
    }
}

/// Roots of a complex polynomial by companion-matrix eigenvalues and Newton
/// polishing.
pub fn polynomial_roots(p: &[Complex]) -> Vec<Complex> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    let mut m = DMatrix::from_element(n, n, ZERO);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    let eig = m.complex_eigenvalues_fallback();
    let dp = poly_deriv(p);
    eig.into_iter()
        .map(|mut z| {
            for _ in 0..3 {
                let f = poly_eval(p, z);
                let df = poly_eval(&dp, z);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

trait ComplexEigen {
    fn complex_eigenvalues_fallback(self) -> Vec<Complex>;
}

impl ComplexEigen for DMatrix<Complex> {
    fn complex_eigenvalues_fallback(self) -> Vec<Complex> {
        let n = self.nrows();
        match nalgebra::Schur::try_new(self.clone(), 1e-15, 10_000) {
            Some(s) => {
                let (_, t) = s.unpack();
                (0..n).map(|i| t[(i, i)]).collect()
            }
            None => self
                .eigenvalues()
                .map(|v| v.iter().copied().collect())
                .unwrap_or_default(),
        }
    }
}

/// How divisor roots are placed on sheets from the sheet-1 value of `κ²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheetRule {
    /// `κ² = −1 → sheet 1`, `κ² = +1 → sheet 2`.
    MinusOnFirst,
    /// `κ² = +1 → sheet 1`, `κ² = −1 → sheet 2`.
    PlusOnFirst,
}

impl SheetRule {
    pub fn sheet(self, kappa_sq: Complex) -> Option<Sheet> {
        let plus = (kappa_sq - ONE).norm() < SHEET_TOLERANCE;
        let minus = (kappa_sq + ONE).norm() < SHEET_TOLERANCE;
        match (plus, minus, self) {
            (true, false, SheetRule::PlusOnFirst) | (false, true, SheetRule::MinusOnFirst) => Some(Sheet::First),
            (true, false, SheetRule::MinusOnFirst) | (false, true, SheetRule::PlusOnFirst) => Some(Sheet::Second),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    /// Projection to the λ-plane, `None` for a point over infinity.
    pub lambda: Option<Complex>,
    pub sheet: Sheet,
    pub kappa_sq: Complex,
    /// `|κ⁴(λ) − 1|` after polishing.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
    pub rule: SheetRule,
}

impl Divisor {
    /// Copy with one point moved to the other sheet.
    pub fn with_flipped(&self, k: usize) -> Divisor {
        let mut d = self.clone();
        d.points[k].sheet = match d.points[k].sheet {
            Sheet::First => Sheet::Second,
            Sheet::Second => Sheet::First,
        };
        d
    }
}

/// Roots of `κ⁴ = 1` placed on sheets by `rule`.
pub fn find_divisor(model: &CurveModel, kev: &KappaEvaluator, rule: SheetRule) -> Result<Divisor, DivisorError> {
    let diff = kev.difference();
    let roots = polynomial_roots(&diff);
    if roots.len() != model.genus && roots.len() + 1 != model.genus {
        return Err(DivisorError::RootCountMismatch {
            expected: model.genus,
            found: roots.len(),
        });
    }
    let mut points = Vec::with_capacity(model.genus);
    for lam in roots {
        let (arc, distance) = model.nearest_cut(lam);
        if distance < CUT_MARGIN {
            return Err(DivisorError::DivisorOnCut {
                lambda: lam,
                arc,
                distance,
            });
        }
        let k = model.kappa_unchecked(lam);
        let kappa_sq = k * k;
        let sheet = rule
            .sheet(kappa_sq)
            .ok_or(DivisorError::AmbiguousSheet { lambda: lam, kappa_sq })?;
        points.push(DivisorPoint {
            lambda: Some(lam),
            sheet,
            kappa_sq,
            residual: (kev.quartic(lam) - ONE).norm(),
        });
    }
    points.sort_by(|a, b| {
        let (a, b) = (a.lambda.unwrap(), b.lambda.unwrap());
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
    });
    if points.len() + 1 == model.genus {
        // κ⁴ − 1 = O(λ⁻²): the remaining point lies over infinity, where κ = 1
        points.push(DivisorPoint {
            lambda: None,
            sheet: rule.sheet(ONE).unwrap(),
            kappa_sq: ONE,
            residual: 0.0,
        });
    }
    Ok(Divisor { points, rule })
}

/// `K_j = ½Σ_k B_kj − j/2`.
pub fn riemann_constant_formula(b: &[Vec<Complex>]) -> Vec<Complex> {
    let g = b.len();
    (0..g)
        .map(|j| {
            let col: Complex = (0..g).map(|k| b[k][j]).sum();
            0.5 * col - 0.5 * (j as f64 + 1.0)
        })
        .collect()
}

/// Where the Riemann constant came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KSource {
    Formula,
    /// `K = (n + Bm)/2`.
    HalfPeriod {
        n: Vec<u8>,
        m: Vec<u8>,
    },
}

/// Result of the vanishing test `Θ(𝒜(P) − e) = 0` on the divisor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Largest normalized `|Θ(𝒜(P) − e)|` over the divisor.
    pub worst: f64,
    /// Median normalized `|Θ(𝒜(λ) − e)|` over the reference points.
    pub reference: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn ratio(&self) -> f64 {
        self.worst / self.reference
    }
}

/// Abel images of the divisor points, signed by sheet.
pub fn divisor_abel(map: &AbelMap, d: &Divisor) -> Result<Vec<Vec<Complex>>, DivisorError> {
    let mut out = Vec::with_capacity(d.points.len());
    for p in &d.points {
        let v = match p.lambda {
            Some(z) => map.at(z)?,
            None => map.pd.special(crate::differentials::Special::Infinity).clone(),
        };
        let sign = match p.sheet {
            Sheet::First => 1.0,
            Sheet::Second => -1.0,
        };
        out.push(v.a.iter().map(|z| z * sign).collect());
    }
    Ok(out)
}

/// Reference points for the vanishing scale: a ring well outside Γ.
pub fn reference_abel(map: &AbelMap) -> Result<Vec<Vec<Complex>>, DivisorError> {
    let r = 0.6 * map.wb.router.far_radius();
    let mut out = Vec::new();
    for k in 0..16 {
        let z = Complex::from_polar(r, (k as f64 + 0.37) * std::f64::consts::PI / 8.0);
        out.push(map.at(z)?.a);
    }
    Ok(out)
}

fn normalized(ev: &ThetaEvaluator<f64>, z: &[Complex]) -> f64 {
    ev.eval(z).value.norm()
}

pub fn certify(
    ev: &ThetaEvaluator<f64>,
    points: &[Vec<Complex>],
    reference: &[Vec<Complex>],
    e: &[Complex],
) -> Certificate {
    let shift = |a: &Vec<Complex>| -> Vec<Complex> { a.iter().zip(e).map(|(x, y)| x - y).collect() };
    let worst = points.iter().map(|a| normalized(ev, &shift(a))).fold(0.0, f64::max);
    let mut refs: Vec<f64> = reference.iter().map(|a| normalized(ev, &shift(a))).collect();
    refs.sort_by(f64::total_cmp);
    let reference = refs[refs.len() / 2];
    Certificate {
        worst,
        reference,
        passed: worst < VANISHING_RATIO * reference,
    }
}

/// Divisor, Riemann constant and `e`, certified by the vanishing test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaData {
    pub divisor: Divisor,
    pub divisor_abel: Vec<Vec<Complex>>,
    pub k: Vec<Complex>,
    pub k_source: KSource,
    pub e: Vec<Complex>,
    pub certificate: Certificate,
    /// Vanishing ratio of the formula value of K, kept for the record.
    pub formula_ratio: f64,
}

/// Sum of the divisor's Abel images plus K.
pub fn e_vector(abel: &[Vec<Complex>], k: &[Complex]) -> Vec<Complex> {
    let mut e = k.to_vec();
    for a in abel {
        for (x, y) in e.iter_mut().zip(a) {
            *x += y;
        }
    }
    e
}

fn half_period(b: &[Vec<Complex>], n: &[u8], m: &[u8]) -> Vec<Complex> {
    let g = b.len();
    (0..g)
        .map(|i| {
            let mut v = Complex::new(n[i] as f64, 0.0);
            for j in 0..g {
                v += b[i][j] * m[j] as f64;
            }
            0.5 * v
        })
        .collect()
}

/// Builds the theta data: tries the formula for K, then every half-period.
pub fn theta_data(map: &AbelMap, ev: &ThetaEvaluator<f64>, divisor: Divisor) -> Result<ThetaData, DivisorError> {
    let pd = map.pd;
    let abel = divisor_abel(map, &divisor)?;
    let reference = reference_abel(map)?;
    let b = &pd.period_matrix;
    let k_formula = riemann_constant_formula(b);
    let e = e_vector(&abel, &k_formula);
    let cert = certify(ev, &abel, &reference, &e);
    let formula_ratio = cert.ratio();
    if cert.passed {
        return Ok(ThetaData {
            divisor,
            divisor_abel: abel,
            k: k_formula,
            k_source: KSource::Formula,
            e,
            certificate: cert,
            formula_ratio,
        });
    }
    let g = pd.genus;
    let mut best: Option<(f64, Vec<u8>, Vec<u8>, Certificate, Vec<Complex>, Vec<Complex>)> = None;
    for code in 0u64..(1u64 << (2 * g)) {
        let n: Vec<u8> = (0..g).map(|i| ((code >> i) & 1) as u8).collect();
        let m: Vec<u8> = (0..g).map(|i| ((code >> (g + i)) & 1) as u8).collect();
        let k = half_period(b, &n, &m);
        let e = e_vector(&abel, &k);
        // cheap rejection on the first point before the full test
        let first: Vec<Complex> = abel[0].iter().zip(&e).map(|(x, y)| x - y).collect();
        if normalized(ev, &first) > 1e-3 {
            continue;
        }
        let c = certify(ev, &abel, &reference, &e);
        let r = c.ratio();
        if best.as_ref().map(|b| r < b.0).unwrap_or(true) {
            best = Some((r, n, m, c, k, e));
        }
    }
    match best {
        Some((r, n, m, c, k, e)) if c.passed => {
            let _ = r;
            Ok(ThetaData {
                divisor,
                divisor_abel: abel,
                k,
                k_source: KSource::HalfPeriod { n, m },
                e,
                certificate: c,
                formula_ratio,
            })
        }
        Some((r, ..)) => Err(DivisorError::ValidationFailed { ratio: r }),
        None => Err(DivisorError::ValidationFailed { ratio: formula_ratio }),
    }
}
