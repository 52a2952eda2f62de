//! n,m-matrix-convex combinations of realization arrays and the check that
//! balanced QMI certificates survive them.

use rand::Rng;

use crate::cones::{isometry_defect, random_isometry_blocks, ISOMETRY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{eye, zeros, CMat};
use crate::qmi::{self, Certificate, FamilyTag};
use crate::realization::Realization;

/// Tier-wise isometry blocks `(Υ_{j,n}, Υ_{j,m})`, `j = 1..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryFamily {
    state_blocks: Vec<CMat>,
    io_blocks: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryCheck {
    pub ok: bool,
    pub defect_n: f64,
    pub defect_m: f64,
}

impl IsometryFamily {
    /// Shape-checked constructor; the isometry property itself is checked by
    /// [`validate_isometry`].
    pub fn new(state_blocks: Vec<CMat>, io_blocks: Vec<CMat>) -> Result<Self> {
        if state_blocks.len() != io_blocks.len() || state_blocks.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} state blocks and {} io blocks",
                state_blocks.len(),
                io_blocks.len()
            )));
        }
        let n = state_blocks[0].nrows();
        let m = io_blocks[0].nrows();
        if m == 0 {
            return Err(Error::DimensionMismatch("io blocks must be non-empty".into()));
        }
        for (j, (s, io)) in state_blocks.iter().zip(&io_blocks).enumerate() {
            if s.shape() != (n, n) || io.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "tier {j}: state {:?}, io {:?}; expected ({n}, {n}) and ({m}, {m})",
                    s.shape(),
                    io.shape()
                )));
            }
        }
        Ok(Self { state_blocks, io_blocks })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Self {
        let state_blocks = random_isometry_blocks(n, k, rng);
        let io_blocks = random_isometry_blocks(m, k, rng);
        Self { state_blocks, io_blocks }
    }

    /// All tiers equal to `√(1/k)·I`.
    pub fn uniform(n: usize, m: usize, k: usize) -> Self {
        let s = (1.0 / k as f64).sqrt();
        Self {
            state_blocks: vec![eye(n).scale(s); k],
            io_blocks: vec![eye(m).scale(s); k],
        }
    }

    pub fn k(&self) -> usize {
        self.state_blocks.len()
    }

    pub fn n(&self) -> usize {
        self.state_blocks[0].nrows()
    }

    pub fn m(&self) -> usize {
        self.io_blocks[0].nrows()
    }

    pub fn state_blocks(&self) -> &[CMat] {
        &self.state_blocks
    }

    pub fn io_blocks(&self) -> &[CMat] {
        &self.io_blocks
    }

    /// `diag(Υ_{j,n}, Υ_{j,m})`.
    pub fn tier(&self, j: usize) -> CMat {
        crate::linalg::block_diag(&[&self.state_blocks[j], &self.io_blocks[j]])
    }
}

pub fn validate_isometry(fam: &IsometryFamily) -> Result<IsometryCheck> {
    let defect_n = isometry_defect(&fam.state_blocks, fam.n())?;
    let defect_m = isometry_defect(&fam.io_blocks, fam.m())?;
    Ok(IsometryCheck { ok: defect_n <= ISOMETRY_TOL && defect_m <= ISOMETRY_TOL, defect_n, defect_m })
}

/// `Σⱼ diag(Υ_{j,n}, Υ_{j,m})* R_j diag(Υ_{j,n}, Υ_{j,m})`.
pub fn combine_realizations(rs: &[Realization], fam: &IsometryFamily) -> Result<Realization> {
    if rs.len() != fam.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} realizations for {} tiers",
            rs.len(),
            fam.k()
        )));
    }
    let (n, m) = (fam.n(), fam.m());
    if let Some(j) = rs.iter().position(|r| r.n() != n || r.m() != m) {
        return Err(Error::DimensionMismatch(format!(
            "realization {j} has (n, m) = ({}, {}), tiers expect ({n}, {m})",
            rs[j].n(),
            rs[j].m()
        )));
    }
    let check = validate_isometry(fam)?;
    if !check.ok {
        return Err(Error::NotAnIsometryFamily(check.defect_n.max(check.defect_m)));
    }
    let mut sum = zeros(n + m, n + m);
    for (j, r) in rs.iter().enumerate() {
        let t = fam.tier(j);
        sum += t.adjoint() * r.array() * &t;
    }
    Realization::from_array(n, &sum)
}

/// The combined realization with its balanced certificate, plus the
/// per-input certificates it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Preservation {
    pub combined: Realization,
    pub certificate: Certificate,
    pub per_input: Vec<Certificate>,
}

/// Certifies every input against `Ŵ_l` (`P = I`), combines, and certifies the result.
///
/// The combined tolerance is the sum of the input tolerances: `Q` of the
/// combination is `Σ diag(Υ)*·Q_j·diag(Υ)` and each congruence has norm ≤ 1.
pub fn verify_preservation(
    rs: &[Realization],
    fam: &IsometryFamily,
    tag: FamilyTag,
    tol_psd: Option<f64>,
) -> Result<Preservation> {
    let per_input = rs
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let cert = qmi::verify_kyp(r, &eye(r.n()), tag, tol_psd)?;
            if cert.is_verified() {
                Ok(cert)
            } else {
                Err(Error::InputNotCertified { index: j, min_eig_q: cert.min_eig_q })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let combined = combine_realizations(rs, fam)?;
    let tol = per_input.iter().map(|c| c.tol_psd).sum::<f64>();
    let certificate = qmi::verify_kyp(&combined, &eye(combined.n()), tag, Some(tol))?;
    Ok(Preservation { combined, certificate, per_input })
}

/// Like [`verify_preservation`] for inputs that arrive with their own `P`:
/// each is balanced to `P = I` first.
pub fn verify_preservation_certified(
    inputs: &[(Realization, Certificate)],
    fam: &IsometryFamily,
) -> Result<Preservation> {
    let tag = inputs
        .first()
        .map(|(_, c)| c.tag)
        .ok_or_else(|| Error::DimensionMismatch("no inputs".into()))?;
    let mut balanced = Vec::with_capacity(inputs.len());
    let mut tol = 0.0;
    for (j, (r, cert)) in inputs.iter().enumerate() {
        if cert.tag != tag {
            return Err(Error::DimensionMismatch(format!("input {j} is certified for another family")));
        }
        let (rb, cb) = qmi::balance(r, cert).map_err(|e| match e {
            Error::CertificateNotVerified | Error::NotPositiveDefinite(_) => {
                Error::InputNotCertified { index: j, min_eig_q: cert.min_eig_q }
            }
            other => other,
        })?;
        if !cb.is_verified() {
            return Err(Error::InputNotCertified { index: j, min_eig_q: cb.min_eig_q });
        }
        tol += cb.tol_psd;
        balanced.push(rb);
    }
    let mut out = verify_preservation(&balanced, fam, tag, Some(tol / inputs.len() as f64))?;
    out.certificate = qmi::verify_kyp(&out.combined, &eye(out.combined.n()), tag, Some(tol))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, FixtureId};
    use crate::linalg::{c, from_real_rows, max_abs_diff};
    use crate::qmi::Family;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validate_examples() {
        let one = IsometryFamily::new(vec![eye(2)], vec![eye(3)]).unwrap();
        assert_eq!(validate_isometry(&one).unwrap(), IsometryCheck { ok: true, defect_n: 0.0, defect_m: 0.0 });
        let half = IsometryFamily::uniform(2, 3, 2);
        let chk = validate_isometry(&half).unwrap();
        assert!(chk.ok && chk.defect_n < 1e-15 && chk.defect_m < 1e-15);
        let doubled = IsometryFamily::new(vec![eye(2), eye(2)], vec![eye(1).scale(0.0), eye(1)]).unwrap();
        let chk = validate_isometry(&doubled).unwrap();
        assert!(!chk.ok);
        assert!((chk.defect_n - 1.0).abs() < 1e-15);
        assert!(matches!(
            IsometryFamily::new(vec![eye(2)], vec![eye(2), eye(2)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn averaging_sign_flipped_realizations_kills_b_and_c() {
        let r1 = crate::realization::real_realization(
            2,
            1,
            &[&[-1.0, 0.5, 1.0], &[0.0, -2.0, 3.0], &[2.0, 1.0, 0.5]],
        )
        .unwrap();
        let r2 = Realization::new(r1.a().clone(), -r1.b(), -r1.c(), r1.d().clone()).unwrap();
        let r3 = combine_realizations(&[r1.clone(), r2], &IsometryFamily::uniform(2, 1, 2)).unwrap();
        assert!(max_abs_diff(r3.a(), r1.a()) < 1e-15);
        assert!(max_abs_diff(r3.d(), r1.d()) < 1e-15);
        assert_eq!(r3.b(), &zeros(2, 1));
        assert_eq!(r3.c(), &zeros(1, 2));
        assert!(!r3.is_minimal().minimal);
    }

    #[test]
    fn single_unitary_tier_is_a_congruence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let fam = IsometryFamily::random(2, 2, 1, &mut rng);
        let r = fixture(FixtureId::F1 { a: 1.0, b: 1.0 }).unwrap();
        let out = combine_realizations(&[r.clone()], &fam).unwrap();
        let t = fam.tier(0);
        assert!(max_abs_diff(&out.array(), &(t.adjoint() * r.array() * &t)) < 1e-14);
    }

    #[test]
    fn lossless_triple_stays_lossless() {
        let (a, b) = (1.0, 1.0);
        let rs: Vec<_> = [FixtureId::F1 { a, b }, FixtureId::F2 { a, b }, FixtureId::F3 { a, b }]
            .into_iter()
            .map(|id| fixture(id).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let fam = IsometryFamily::random(2, 2, 3, &mut rng);
        let k = combine_realizations(&rs, &fam).unwrap().array();
        let j = crate::linalg::block_diag(&[&eye(2).scale(-1.0), &eye(2)]);
        assert!(crate::linalg::max_abs(&(&j * &k + k.adjoint() * &j)) < 1e-12);
        let pres = verify_preservation(&rs, &fam, Family::Alpha.into(), None).unwrap();
        assert!(crate::linalg::spectral_norm(&pres.certificate.q) <= 1e-8);
    }

    #[test]
    fn single_input_identity_tiers_returns_input_certificate() {
        let r = fixture(FixtureId::F).unwrap();
        let fam = IsometryFamily::new(vec![eye(1)], vec![eye(1)]).unwrap();
        let pres = verify_preservation(&[r.clone()], &fam, Family::Delta.into(), None).unwrap();
        assert_eq!(pres.combined, r);
        assert_eq!(pres.certificate.q, pres.per_input[0].q);
        assert!(pres.certificate.is_verified());
    }

    #[test]
    fn uncertified_input_is_named() {
        let f = fixture(FixtureId::F).unwrap();
        let g = fixture(FixtureId::G).unwrap();
        let err = verify_preservation(&[f, g], &IsometryFamily::uniform(1, 1, 2), Family::Delta.into(), None)
            .unwrap_err();
        assert!(matches!(err, Error::InputNotCertified { index: 1, .. }));
    }

    #[test]
    fn zero_tier_drops_out() {
        let f = fixture(FixtureId::F).unwrap();
        let g = fixture(FixtureId::G).unwrap();
        let fam = IsometryFamily::new(
            vec![eye(1), zeros(1, 1)],
            vec![from_real_rows(&[&[1.0]]), zeros(1, 1)],
        )
        .unwrap();
        assert_eq!(combine_realizations(&[f.clone(), g], &fam).unwrap(), f);
    }

    #[test]
    fn certified_inputs_are_balanced_first() {
        let f = fixture(FixtureId::F).unwrap();
        let t = from_real_rows(&[&[3.0]]);
        let moved = f.change_coordinates(&t).unwrap();
        let cert = qmi::verify_kyp(&moved, &from_real_rows(&[&[9.0]]), Family::Delta.into(), None).unwrap();
        let fam = IsometryFamily::uniform(1, 1, 2);
        let pres = verify_preservation_certified(&[(moved.clone(), cert.clone()), (moved, cert)], &fam).unwrap();
        assert!(pres.certificate.is_verified());
        let z = c(1.0, 0.0);
        let v = pres.combined.evaluate(z).unwrap().value[(0, 0)];
        assert!((v - c(1.0 / 6.0, 0.0)).norm() < 1e-12);
    }
}
