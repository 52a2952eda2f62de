//! Lyapunov and Stein inclusions, the matrix Cayley transform and
//! level-ν matrix-convex combinations `Σ Υⱼ* Aⱼ Υⱼ`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, checked_inverse, eye, zeros, CMat};

/// Deviation of `Σ Υⱼ*Υⱼ` from `I` above which a tuple is rejected.
pub const ISOMETRY_TOL: f64 = 1e-8;
/// `(I + A)` counts as singular above this condition number.
pub const CAYLEY_COND_MAX: f64 = 1e12;

/// Hermitian nonsingular `H` plus open/closed selector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeParameter {
    h: CMat,
    pub strict: bool,
}

impl ConeParameter {
    /// Any Hermitian nonsingular `H` (indefinite allowed).
    pub fn new(h: CMat, strict: bool) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch(format!("H is {:?}", h.shape())));
        }
        let scale = 1.0 + linalg::max_abs(&h);
        if linalg::max_abs_diff(&h, &h.adjoint()) > 1e-12 * scale {
            return Err(Error::Parse("H is not Hermitian".into()));
        }
        if linalg::sigma_min(&h) <= 1e-14 * scale {
            return Err(Error::Parse("H is singular".into()));
        }
        Ok(Self { h, strict })
    }

    pub fn identity(n: usize, strict: bool) -> Self {
        Self { h: eye(n), strict }
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    fn check(&self, a: &CMat) -> Result<()> {
        if a.shape() != self.h.shape() {
            return Err(Error::DimensionMismatch(format!(
                "A is {:?}, H is {:?}",
                a.shape(),
                self.h.shape()
            )));
        }
        Ok(())
    }

    fn decide(&self, form: &CMat) -> bool {
        let tol = 1e-9 * (1.0 + linalg::spectral_norm(form));
        let lo = linalg::min_eig(form);
        if self.strict {
            lo > tol
        } else {
            lo >= -tol
        }
    }
}

/// `HA + A*H ⪰ 0` (or `≻ 0` when strict).
pub fn in_l(cone: &ConeParameter, a: &CMat) -> Result<bool> {
    cone.check(a)?;
    let ha = &cone.h * a;
    Ok(cone.decide(&(&ha + ha.adjoint())))
}

/// `H − A*HA ⪰ 0` (or `≻ 0` when strict).
pub fn in_s(cone: &ConeParameter, a: &CMat) -> Result<bool> {
    cone.check(a)?;
    Ok(cone.decide(&(&cone.h - a.adjoint() * &cone.h * a)))
}

/// `(I − A)(I + A)⁻¹`.
pub fn cayley_matrix(a: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("A is {:?}", a.shape())));
    }
    let id = eye(a.nrows());
    let inv = checked_inverse(&(&id + a), CAYLEY_COND_MAX).map_err(|_| Error::MinusOneInSpectrum)?;
    Ok((&id - a) * inv)
}

/// Column blocks `Υⱼ` (`ηⱼ × ν`, `ηⱼ ≤ ν`) with `Σ Υⱼ*Υⱼ = I_ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryTuple {
    blocks: Vec<CMat>,
}

/// `‖Σ Υⱼ*Υⱼ − I_ν‖₂` for blocks sharing `ν` columns.
pub fn isometry_defect(blocks: &[CMat], nu: usize) -> Result<f64> {
    let mut gram = zeros(nu, nu);
    for (j, b) in blocks.iter().enumerate() {
        if b.ncols() != nu {
            return Err(Error::DimensionMismatch(format!(
                "block {j} has {} columns, expected {nu}",
                b.ncols()
            )));
        }
        gram += b.adjoint() * b;
    }
    Ok(linalg::spectral_norm(&(gram - eye(nu))))
}

impl IsometryTuple {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        let nu = blocks
            .first()
            .map(|b| b.ncols())
            .ok_or_else(|| Error::DimensionMismatch("empty isometry tuple".into()))?;
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() == 0 || b.nrows() > nu {
                return Err(Error::DimensionMismatch(format!(
                    "block {j} has {} rows; need 1 ≤ η ≤ ν = {nu}",
                    b.nrows()
                )));
            }
        }
        let defect = isometry_defect(&blocks, nu)?;
        if defect > ISOMETRY_TOL {
            return Err(Error::NotAnIsometryFamily(defect));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn nu(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `k` square `ν × ν` blocks from an orthonormalized Gaussian `νk × ν` matrix.
    pub fn random<R: Rng + ?Sized>(nu: usize, k: usize, rng: &mut R) -> Self {
        Self { blocks: random_isometry_blocks(nu, k, rng) }
    }
}

/// Slices the thin `Q` factor of a complex Gaussian `νk × ν` matrix into `k` blocks.
pub fn random_isometry_blocks<R: Rng + ?Sized>(nu: usize, k: usize, rng: &mut R) -> Vec<CMat> {
    assert!(k >= 1, "need at least one block");
    if nu == 0 {
        return vec![zeros(0, 0); k];
    }
    let g = CMat::from_fn(nu * k, nu, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let q = g.qr().q();
    (0..k).map(|j| linalg::sub(&q, j * nu, 0, nu, nu)).collect()
}

/// `Σ Υⱼ* Aⱼ Υⱼ`.
pub fn matrix_convex_combine(matrices: &[CMat], iso: &IsometryTuple) -> Result<CMat> {
    if matrices.len() != iso.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for {} isometry blocks",
            matrices.len(),
            iso.len()
        )));
    }
    let nu = iso.nu();
    let mut out = zeros(nu, nu);
    for (j, (a, u)) in matrices.iter().zip(iso.blocks()).enumerate() {
        if a.shape() != (u.nrows(), u.nrows()) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {j} is {:?}, block is {:?}",
                a.shape(),
                u.shape()
            )));
        }
        out += u.adjoint() * a * u;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i], 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn lyapunov_examples() {
        assert!(in_l(&ConeParameter::identity(2, true), &eye(2)).unwrap());
        let skew = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(in_l(&ConeParameter::identity(2, false), &skew).unwrap());
        assert!(!in_l(&ConeParameter::identity(2, true), &skew).unwrap());
        assert!(!in_l(&ConeParameter::identity(2, false), &diag(&[1.0, -1.0])).unwrap());
        assert!(matches!(
            in_l(&ConeParameter::identity(2, false), &eye(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn stein_examples() {
        let closed = ConeParameter::identity(2, false);
        let rot = from_real_rows(&[&[0.6, -0.8], &[0.8, 0.6]]);
        assert!(in_s(&closed, &rot).unwrap());
        assert!(!in_s(&closed, &rot.scale(1.01)).unwrap());
        assert!(!in_s(&closed, &eye(2).scale(2.0)).unwrap());
        assert!(in_s(&ConeParameter::identity(2, true), &zeros(2, 2)).unwrap());
    }

    #[test]
    fn indefinite_h_is_accepted() {
        let h = ConeParameter::new(diag(&[1.0, -1.0]), false).unwrap();
        // H·A + A*·H = diag(2, 2) for A = diag(1, −1).
        assert!(in_l(&h, &diag(&[1.0, -1.0])).unwrap());
        assert!(ConeParameter::new(diag(&[1.0, 0.0]), false).is_err());
    }

    #[test]
    fn cayley_examples() {
        assert!(max_abs_diff(&cayley_matrix(&zeros(3, 3)).unwrap(), &eye(3)) < 1e-15);
        assert!(max_abs_diff(&cayley_matrix(&eye(3)).unwrap(), &zeros(3, 3)) < 1e-15);
        assert_eq!(cayley_matrix(&diag(&[-1.0, 2.0])), Err(Error::MinusOneInSpectrum));
        let a = from_real_rows(&[&[0.3, 2.0], &[-0.5, 1.5]]);
        let alt = -eye(2) + checked_inverse(&(eye(2) + &a), 1e12).unwrap().scale(2.0);
        assert!(max_abs_diff(&cayley_matrix(&a).unwrap(), &alt) < 1e-12);
    }

    #[test]
    fn scalar_matrices_are_not_matrix_convex() {
        let iso = IsometryTuple::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        let out = matrix_convex_combine(&[diag(&[2.0, 2.0]), diag(&[3.0, 3.0])], &iso).unwrap();
        assert_eq!(out, diag(&[2.0, 3.0]));
    }

    #[test]
    fn single_unitary_term_is_a_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let iso = IsometryTuple::random(3, 1, &mut rng);
        let u = &iso.blocks()[0];
        let a = CMat::from_fn(3, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64));
        let out = matrix_convex_combine(&[a.clone()], &iso).unwrap();
        assert!(max_abs_diff(&out, &(u.adjoint() * &a * u)) < 1e-14);
    }

    #[test]
    fn scalar_weights_give_classical_convex_combination() {
        let lams = [0.2, 0.5, 0.3];
        let blocks = lams.iter().map(|l: &f64| eye(2).scale(l.sqrt())).collect();
        let iso = IsometryTuple::new(blocks).unwrap();
        let mats: Vec<CMat> = (0..3).map(|j| diag(&[j as f64, 1.0 - j as f64])).collect();
        let want = mats.iter().zip(lams).fold(zeros(2, 2), |acc, (m, l)| acc + m.scale(l));
        assert!(max_abs_diff(&matrix_convex_combine(&mats, &iso).unwrap(), &want) < 1e-15);
    }

    #[test]
    fn non_isometries_and_tall_blocks_rejected() {
        assert!(matches!(
            IsometryTuple::new(vec![eye(2), eye(2)]),
            Err(Error::NotAnIsometryFamily(_))
        ));
        assert!(matches!(IsometryTuple::new(vec![zeros(3, 2)]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn non_square_blocks_combine() {
        // Υ₁ = e₁ᵀ, Υ₂ = e₂ᵀ: each 1×2, level ν = 2.
        let u1 = from_real_rows(&[&[1.0, 0.0]]);
        let u2 = from_real_rows(&[&[0.0, 1.0]]);
        let iso = IsometryTuple::new(vec![u1, u2]).unwrap();
        let out = matrix_convex_combine(&[diag(&[5.0]), diag(&[7.0])], &iso).unwrap();
        assert_eq!(out, diag(&[5.0, 7.0]));
    }

    #[test]
    fn random_blocks_are_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (nu, k) in [(1, 1), (2, 3), (4, 2)] {
            let blocks = random_isometry_blocks(nu, k, &mut rng);
            assert!(isometry_defect(&blocks, nu).unwrap() < 1e-12);
        }
    }
}
