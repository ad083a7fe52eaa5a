//! Assembly of every parameter-dependent product, in dependency order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveModel, SpectralParams};
use crate::differentials::{AbelMap, DifferentialError, PeriodData, Workbench};
use crate::homology::QuadratureRule;
use crate::kappa_divisor::{find_divisor, theta_data, DivisorError, KappaEvaluator, SheetRule, ThetaData};
use crate::solution::{SolutionContext, SolutionError};
use crate::theta::{ThetaError, ThetaEvaluator};

/// Sheet placement that keeps `M⁽¹⁾` free of poles at the divisor.
pub const SHEET_RULE: SheetRule = SheetRule::PlusOnFirst;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Differential(#[from] DifferentialError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
}

/// The expensive, `(y, t)`-independent part; serializable for caching.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Precomputed {
    pub periods: PeriodData,
    pub theta_data: ThetaData,
}

pub struct Prepared {
    pub model: CurveModel,
    pub periods: PeriodData,
    pub theta: ThetaEvaluator<f64>,
    pub theta_data: ThetaData,
    pub tau: f64,
}

impl Prepared {
    pub fn build(params: SpectralParams, rule: QuadratureRule, tau: f64) -> Result<Self, PipelineError> {
        Self::build_with(params, rule, tau, SHEET_RULE)
    }

    pub fn build_with(
        params: SpectralParams,
        rule: QuadratureRule,
        tau: f64,
        sheets: SheetRule,
    ) -> Result<Self, PipelineError> {
        let model = CurveModel::new(params);
        let wb = Workbench::new(&model, rule);
        let periods = PeriodData::compute_with(&wb)?;
        let theta = ThetaEvaluator::new(&periods.period_matrix, tau)?;
        let kev = KappaEvaluator::new(&model);
        kev.check_monodromy(&model)?;
        let divisor = find_divisor(&model, &kev, sheets)?;
        let theta_data = theta_data(&AbelMap::new(&wb, &periods), &theta, divisor)?;
        drop(wb);
        Ok(Prepared {
            model,
            periods,
            theta,
            theta_data,
            tau,
        })
    }

    /// Rebuilds from a cached document without recomputing periods.
    pub fn from_cache(params: SpectralParams, cached: Precomputed, tau: f64) -> Result<Self, PipelineError> {
        let theta = ThetaEvaluator::new(&cached.periods.period_matrix, tau)?;
        Ok(Prepared {
            model: CurveModel::new(params),
            periods: cached.periods,
            theta,
            theta_data: cached.theta_data,
            tau,
        })
    }

    pub fn precomputed(&self) -> Precomputed {
        Precomputed {
            periods: self.periods.clone(),
            theta_data: self.theta_data.clone(),
        }
    }

    pub fn workbench(&self) -> Workbench<'_> {
        Workbench::new(&self.model, self.periods.rule)
    }

    /// Runs `f` with a solution context borrowed from `self`.
    pub fn with_context<R>(&self, f: impl FnOnce(&SolutionContext) -> R) -> Result<R, PipelineError> {
        let wb = self.workbench();
        let map = AbelMap::new(&wb, &self.periods);
        let ctx = SolutionContext::new(map, &self.theta, &self.theta_data)?;
        Ok(f(&ctx))
    }
}
