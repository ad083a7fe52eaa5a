//! Finite-gap solutions of the modified Camassa–Holm equation
//! `m_t + ((u² − u_x²)m)_x + 2u_x = 0`, `m = u − u_xx`, built from theta functions
//! of a hyperelliptic curve whose cuts lie on the imaginary axis and the unit
//! circle.

pub mod curve;
pub mod differentials;
pub mod homology;
pub mod kappa_divisor;
pub mod pipeline;
pub mod scalar;
pub mod series;
pub mod solution;
pub mod theta;
pub mod verification;

pub type Complex = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type Theta = theta::ThetaEvaluator<f64>;
pub type Theta32 = theta::ThetaEvaluator<f32>;
pub type Series = series::Laurent<f64>;
pub type Series32 = series::Laurent<f32>;
