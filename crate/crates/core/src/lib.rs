pub mod error;
pub mod estim;
pub mod experiments;
pub mod filtering;
pub mod lti;
pub mod presets;
pub mod scalar;
pub mod sim;
pub mod theta;

pub use error::{Error, ErrorClass, Result};

/// Version of this library, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::Scalar;
pub use theta::ThetaVector;

pub type CtPoly = lti::CtPolynomial<f64>;
pub type CtTf = lti::CtTransferFunction<f64>;
pub type DtTf = lti::DtTransferFunction<f64>;
pub type SsModel = lti::StateSpaceModel<f64>;
pub type CtTf32 = lti::CtTransferFunction<f32>;
pub type Signal = filtering::SampledSignal<f64>;
