//! Dense linear algebra, F-distribution quantiles and the seeded RNG shared
//! by every detector.

mod eigen;
mod fdist;
mod matrix;
pub mod rng;
mod svd;

pub use eigen::{eig_generalized, eig_symmetric, GenEigResult, SW_REGULARIZATION};
pub use fdist::{f_cdf, f_quantile, f_sf, ln_gamma, reg_inc_beta};
pub use matrix::{dot, norm, Matrix, SpdFactor};
pub use rng::{derive_seed, rng_uniform, RngState};
pub use svd::{svd, SvdResult};
