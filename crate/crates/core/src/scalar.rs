use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar accepted by the generic numeric kernels (quadrature
/// rules, power series, theta sums).
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}
