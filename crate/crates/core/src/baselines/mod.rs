//! Comparison classifiers: shrinkage LDA, minimum distance to Riemannian
//! mean, and the tangent-space mapping that feeds covariance features into
//! linear classifiers.

pub mod lda;
pub mod riemann;

pub use lda::{lda_fit, lda_predict, LdaError, LdaModel};
pub use riemann::{
    mdrm_fit, mdrm_predict, riemannian_distance, riemannian_mean, MdrmModel, RiemannError,
    TangentSpaceMap,
};
