//! Global hypoellipticity laboratory for operators
//! `P = Q - sum_l (a_l(t, X) + W_l)^2` on `T^n x G`, `G` a torus or SU(2).

pub mod cli;
pub mod diophantine;
pub mod error;
pub mod fields;
pub mod fit;
pub mod ghcheck;
pub mod linalg;
pub mod operator;
pub mod scalar;
pub mod spectral;
pub mod trig;

pub use error::{GhError, Result};
pub use scalar::{Rational, Scalar};

pub type LieElementQ = fields::LieElement<Rational>;
pub type LieElement64 = fields::LieElement<f64>;
pub type LieElement32 = fields::LieElement<f32>;
pub type CoefficientMapQ = fields::CoefficientMap<Rational>;
pub type CoefficientMap64 = fields::CoefficientMap<f64>;
pub type SystemSpecQ = fields::SystemSpec<Rational>;
pub type SystemSpec64 = fields::SystemSpec<f64>;
pub type SystemSpec32 = fields::SystemSpec<f32>;
pub type TrigPolyQ = trig::TrigPoly<Rational>;
pub type TrigPoly64 = trig::TrigPoly<f64>;
pub type FourierDataQ = operator::FourierData<Rational>;
pub type FourierData64 = operator::FourierData<f64>;
pub type FourierData32 = operator::FourierData<f32>;
pub type OperatorSpecQ = operator::OperatorSpec<Rational>;
pub type OperatorSpec64 = operator::OperatorSpec<f64>;
pub type OperatorSpec32 = operator::OperatorSpec<f32>;
