//! The unified quadratic-matrix-inequality engine.
//!
//! For a realization array `R = [A B; C D]` and a Hermitian weight `W` of size
//! `2(n+m)`, the quadratic form `Q = [R; I]* W [R; I]` is positive
//! semidefinite for some `P ≻ 0` exactly when `R` carries a KYP-type
//! certificate for the family encoded by `W`:
//!
//! | family | weight blocks (ordering `n, m, n, m`)                       |
//! |--------|-------------------------------------------------------------|
//! | α (𝒫)  | `(1,3) = (3,1) = −P`, `(2,4) = (4,2) = I`                   |
//! | β (ℬ)  | `(1,3) = (3,1) = −P`, `(2,2) = −I`, `(4,4) = I`             |
//! | γ (𝒟𝒫) | `(1,1) = −P`, `(3,3) = P`, `(2,4) = (4,2) = I`              |
//! | δ (𝒟ℬ) | `diag(−P, −I, P, I)`                                        |
//!
//! The η-refinement of β replaces the `(2,2)` block by `(1+η)/(1−η)·I`.

mod search;

pub use search::{solve_p, SolveOptions, SolveOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, block, block_diag, eye, zeros, CMat};
use crate::realization::Realization;

/// Balancing refuses certificates whose `P` has an eigenvalue below this.
pub const MIN_BALANCE_EIG: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Positive-real, continuous time.
    Alpha,
    /// Bounded-real, continuous time.
    Beta,
    /// Positive-real, discrete time.
    Gamma,
    /// Bounded-real, discrete time.
    Delta,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Alpha, Family::Beta, Family::Gamma, Family::Delta];

    pub fn is_discrete(self) -> bool {
        matches!(self, Family::Gamma | Family::Delta)
    }

    pub fn is_positive_type(self) -> bool {
        matches!(self, Family::Alpha | Family::Gamma)
    }

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Alpha => "p",
            Family::Beta => "b",
            Family::Gamma => "dp",
            Family::Delta => "db",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p" | "alpha" => Ok(Family::Alpha),
            "b" | "beta" => Ok(Family::Beta),
            "dp" | "gamma" => Ok(Family::Gamma),
            "db" | "delta" => Ok(Family::Delta),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

/// A family together with the optional hyper-boundedness parameter η.
///
/// `eta = None` and `eta = Some(∞)` both select the plain weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl FamilyTag {
    pub fn new(family: Family, eta: Option<f64>) -> Result<Self> {
        let tag = Self { family, eta };
        tag.validate()?;
        Ok(tag)
    }

    pub fn hyper_beta(eta: f64) -> Result<Self> {
        Self::new(Family::Beta, Some(eta))
    }

    pub fn validate(&self) -> Result<()> {
        match self.eta {
            None => Ok(()),
            Some(e) if e.is_nan() || e <= 1.0 => Err(Error::EtaOutOfRange(e)),
            Some(e) if e.is_finite() && self.family != Family::Beta => Err(Error::EtaOutOfRange(e)),
            Some(_) => Ok(()),
        }
    }

    /// Coefficient of the `(2,2)` block: `−1`, or `(1+η)/(1−η)` for finite η.
    fn io_weight(&self) -> f64 {
        match (self.family, self.eta) {
            (Family::Beta, Some(e)) if e.is_finite() => (1.0 + e) / (1.0 - e),
            _ => -1.0,
        }
    }
}

impl From<Family> for FamilyTag {
    fn from(family: Family) -> Self {
        Self { family, eta: None }
    }
}

/// A structured Hermitian weight of size `2(n+m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix {
    pub tag: FamilyTag,
    pub n: usize,
    pub m: usize,
    pub entries: CMat,
    pub p_used: CMat,
}

/// Weight blocks without any admissibility check on `P`.
pub(crate) fn weight_entries(tag: &FamilyTag, p: &CMat, m: usize) -> CMat {
    let n = p.nrows();
    let (zn, zm, znm, zmn) = (zeros(n, n), zeros(m, m), zeros(n, m), zeros(m, n));
    let im = eye(m);
    let neg_p = -p;
    match tag.family {
        Family::Delta => block_diag(&[&neg_p, &(-&im), p, &im]),
        Family::Beta => {
            let io = im.scale(tag.io_weight());
            block(&[
                &[&zn, &znm, &neg_p, &znm],
                &[&zmn, &io, &zmn, &zm],
                &[&neg_p, &znm, &zn, &znm],
                &[&zmn, &zm, &zmn, &im],
            ])
        }
        Family::Alpha => block(&[
            &[&zn, &znm, &neg_p, &znm],
            &[&zmn, &zm, &zmn, &im],
            &[&neg_p, &znm, &zn, &znm],
            &[&zmn, &im, &zmn, &zm],
        ]),
        Family::Gamma => block(&[
            &[&neg_p, &znm, &zn, &znm],
            &[&zmn, &zm, &zmn, &im],
            &[&zn, &znm, p, &znm],
            &[&zmn, &im, &zmn, &zm],
        ]),
    }
}

fn check_positive_definite(p: &CMat) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimensionMismatch(format!("P is {:?}", p.shape())));
    }
    let lo = linalg::min_eig(p);
    if lo <= 0.0 || lo.is_nan() {
        return Err(Error::NotPositiveDefinite(lo));
    }
    Ok(())
}

/// `W_l(P)` for the given family tag.
pub fn build_w(tag: FamilyTag, p: &CMat, m: usize) -> Result<WMatrix> {
    tag.validate()?;
    check_positive_definite(p)?;
    if m == 0 {
        return Err(Error::DimensionMismatch("m must be positive".into()));
    }
    let p = linalg::hermitian_part(p);
    Ok(WMatrix { tag, n: p.nrows(), m, entries: weight_entries(&tag, &p, m), p_used: p })
}

/// The balanced weight `Ŵ_l`, i.e. `W_l(I_n)`.
pub fn build_w_balanced(tag: FamilyTag, n: usize, m: usize) -> Result<WMatrix> {
    build_w(tag, &eye(n), m)
}

/// The orthogonal `U₁` with `U₁* W_δ U₁ = W_β`.
pub fn beta_rotation(n: usize, m: usize) -> CMat {
    let h = eye(n).scale(std::f64::consts::FRAC_1_SQRT_2);
    let (znm, zmn, zm) = (zeros(n, m), zeros(m, n), zeros(m, m));
    block(&[
        &[&h, &znm, &h, &znm],
        &[&zmn, &eye(m), &zmn, &zm],
        &[&h, &znm, &(-&h), &znm],
        &[&zmn, &zm, &zmn, &eye(m)],
    ])
}

/// `U₂ = [0, −I; I, 0]` of size `2(n+m)`; `W_β U₂ = W_γ`.
pub fn quarter_turn(n: usize, m: usize) -> CMat {
    let k = n + m;
    block(&[&[&zeros(k, k), &(-eye(k))], &[&eye(k), &zeros(k, k)]])
}

/// `[0, I; I, 0]` of size `2(n+m)`, the exchange relating `R` and `R⁻¹`.
pub fn exchange(n: usize, m: usize) -> CMat {
    let k = n + m;
    block(&[&[&zeros(k, k), &eye(k)], &[&eye(k), &zeros(k, k)]])
}

fn check_weight_dims(r: &Realization, w_rows: usize) -> Result<()> {
    if w_rows != 2 * (r.n() + r.m()) {
        return Err(Error::DimensionMismatch(format!(
            "weight of size {w_rows} does not fit n = {}, m = {}",
            r.n(),
            r.m()
        )));
    }
    Ok(())
}

/// `[R; I]* W [R; I]` for a raw weight matrix, Hermitian-symmetrized.
pub fn assemble_q_raw(r: &Realization, w: &CMat) -> Result<CMat> {
    check_weight_dims(r, w.nrows())?;
    let k = r.n() + r.m();
    let x = block(&[&[&r.array()], &[&eye(k)]]);
    Ok(linalg::hermitian_part(&(x.adjoint() * w * &x)))
}

pub fn assemble_q(r: &Realization, w: &WMatrix) -> Result<CMat> {
    if w.n != r.n() || w.m != r.m() {
        return Err(Error::DimensionMismatch(format!(
            "W built for (n, m) = ({}, {}), realization has ({}, {})",
            w.n,
            w.m,
            r.n(),
            r.m()
        )));
    }
    assemble_q_raw(r, &w.entries)
}

/// Default PSD tolerance `10⁻⁹·(1 + ‖Q‖₂)`.
pub fn default_tol_psd(q: &CMat) -> f64 {
    1e-9 * (1.0 + linalg::spectral_norm(q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    Verified,
    Refuted,
    Inconclusive,
}

/// A candidate `P` together with the assembled quadratic form and verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub tag: FamilyTag,
    pub p: CMat,
    pub q: CMat,
    pub min_eig_q: f64,
    pub min_eig_p: f64,
    pub tol_psd: f64,
    pub status: CertificateStatus,
}

impl Certificate {
    pub fn is_verified(&self) -> bool {
        self.status == CertificateStatus::Verified
    }
}

/// Checks whether `P` certifies `R` for the family: `P ≻ 0` and `Q ⪰ −tol`.
///
/// `Refuted` only says this `P` fails; it says nothing about membership.
pub fn verify_kyp(
    r: &Realization,
    p: &CMat,
    tag: FamilyTag,
    tol_psd: Option<f64>,
) -> Result<Certificate> {
    tag.validate()?;
    if p.shape() != (r.n(), r.n()) {
        return Err(Error::DimensionMismatch(format!(
            "P is {:?}, realization has n = {}",
            p.shape(),
            r.n()
        )));
    }
    let p = linalg::hermitian_part(p);
    let q = assemble_q_raw(r, &weight_entries(&tag, &p, r.m()))?;
    let tol = tol_psd.unwrap_or_else(|| default_tol_psd(&q));
    let min_eig_q = linalg::min_eig(&q);
    let min_eig_p = linalg::min_eig(&p);
    let status = if !(min_eig_p > 0.0) {
        CertificateStatus::Refuted
    } else if min_eig_q >= -tol {
        CertificateStatus::Verified
    } else if min_eig_q < -tol * 1e3 {
        CertificateStatus::Refuted
    } else {
        CertificateStatus::Inconclusive
    };
    Ok(Certificate { tag, p, q, min_eig_q, min_eig_p, tol_psd: tol, status })
}

/// Moves a verified certificate to `P = I` via `T = P^{−1/2}`.
pub fn balance(r: &Realization, cert: &Certificate) -> Result<(Realization, Certificate)> {
    if !cert.is_verified() {
        return Err(Error::CertificateNotVerified);
    }
    if cert.p.shape() != (r.n(), r.n()) {
        return Err(Error::DimensionMismatch("certificate does not match realization".into()));
    }
    if cert.min_eig_p < MIN_BALANCE_EIG {
        return Err(Error::NotPositiveDefinite(cert.min_eig_p));
    }
    let t = linalg::hermitian_map(&cert.p, |lam| 1.0 / lam.max(MIN_BALANCE_EIG).sqrt());
    let balanced = r.change_coordinates(&t)?;
    let probe = assemble_q_raw(&balanced, &weight_entries(&cert.tag, &eye(r.n()), r.m()))?;
    let tol = cert.tol_psd.max(default_tol_psd(&probe));
    let new_cert = verify_kyp(&balanced, &eye(r.n()), cert.tag, Some(tol))?;
    Ok((balanced, new_cert))
}

/// `Q = diag(T, I)*·Q·diag(T, I)`: how a quadratic form moves under `T`.
pub fn congruence(q: &CMat, t: &CMat) -> CMat {
    let m = q.nrows() - t.nrows();
    let s = block_diag(&[t, &eye(m)]);
    linalg::hermitian_part(&(s.adjoint() * q * &s))
}

/// Lossless test: `‖Q_l(P)‖₂ ≤ tol` for `l ∈ {α, β}`.
pub fn check_lossless(r: &Realization, p: &CMat, family: Family, tol: f64) -> Result<bool> {
    if family.is_discrete() {
        return Err(Error::BadFamily);
    }
    if p.shape() != (r.n(), r.n()) {
        return Err(Error::DimensionMismatch(format!("P is {:?}", p.shape())));
    }
    let w = if r.n() == 0 {
        WMatrix {
            tag: family.into(),
            n: 0,
            m: r.m(),
            entries: weight_entries(&family.into(), p, r.m()),
            p_used: p.clone(),
        }
    } else {
        build_w(family.into(), p, r.m())?
    };
    let q = assemble_q(r, &w)?;
    Ok(linalg::spectral_norm(&q) <= tol)
}
