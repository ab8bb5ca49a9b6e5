//! Polynomials, transfer functions, realizations, discretization and
//! root-location tests.
//!
//! Continuous polynomials are stored in ascending degree order; discrete
//! transfer functions are stored in descending powers of `q` with a monic
//! denominator. The constructors enforce both conventions.

mod discretize;
mod expm;
mod impulse;
mod poly;
mod ss;
mod stability;
mod sylvester;
mod tf;

pub use discretize::{c2d_ss, c2d_zoh, char_poly_desc, foh_matrices, has_aliased_poles, zoh_matrices};
pub use expm::matrix_exponential;
pub use impulse::impulse_response_l1;
pub use poly::{cluster_roots, CtPolynomial, ROOT_CLUSTER_TOL};
pub use ss::{SsDomain, StateSpaceModel};
pub use stability::{
    spectral_abscissa, stability_check, stability_check_ct, stability_check_dt, StabilityDomain,
    StabilityReport, MARGINAL_TOL,
};
pub use sylvester::{build_sylvester, SylvesterMatrix, COPRIME_TOL};
pub use tf::{CtTransferFunction, DtTransferFunction, TfDomain};
