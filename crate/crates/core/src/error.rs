use crate::linalg::Complex64;
use thiserror::Error;

/// Errors raised by realization, certificate, oracle and document operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("z = {0} is a pole of the realization")]
    PoleAt(Complex64),
    #[error("coordinate change matrix is singular or ill-conditioned (cond = {0:e})")]
    SingularT(f64),
    #[error("realization array is singular (cond = {0:e})")]
    SingularArray(f64),
    #[error("feedthrough D is singular (cond = {0:e})")]
    SingularD(f64),
    #[error("I + D is singular (cond = {0:e})")]
    SingularIPlusD(f64),
    #[error("I + A is singular (cond = {0:e})")]
    SingularIPlusA(f64),
    #[error("-1 is (numerically) an eigenvalue")]
    MinusOneInSpectrum,
    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("eta = {0} is outside (1, inf] or used with a family other than beta")]
    EtaOutOfRange(f64),
    #[error("certificate is not verified")]
    CertificateNotVerified,
    #[error("operation requires the alpha or beta family")]
    BadFamily,
    #[error("not an isometry family (defect {0:e})")]
    NotAnIsometryFamily(f64),
    #[error("grid domain does not match the requested family")]
    DomainMismatch,
    #[error("input {index} is not certified (min eig Q = {min_eig_q:e})")]
    InputNotCertified { index: usize, min_eig_q: f64 },
    #[error("bad fixture parameters: {0}")]
    BadParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
