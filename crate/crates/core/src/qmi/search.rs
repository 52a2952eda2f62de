//! Alternating-projection search for a certificate `P`.
//!
//! The feasible set is the intersection of the cone pair
//! `{(P, Q) : P ⪰ margin·I, Q ⪰ 0}` with the affine graph
//! `{(P, Q) : Q = Q_l(P)}`. Both are convex, so Dykstra's scheme applies.
//! Hermitian matrices are handled through an orthonormal real coordinate
//! system so that the graph projection reduces to one small SPD solve.

use nalgebra::{DMatrix, DVector};

use super::{assemble_q_raw, verify_kyp, weight_entries, Certificate, FamilyTag};
use crate::error::Result;
use crate::linalg::{self, c, eye, zeros, CMat};
use crate::realization::Realization;

/// First shrink, relative to `1 + ‖Q_l(I)‖₂`.
const FIRST_SHRINK: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Absolute PSD tolerance; `None` uses `10⁻⁹·(1 + ‖Q‖₂)`.
    pub tol_psd: Option<f64>,
    /// Lower bound on `P`; `None` uses `10⁻⁶·max(‖R‖₂, 1)`.
    pub margin: Option<f64>,
    /// Relative step size below which the iteration is declared stalled.
    pub tol_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 5000, tol_psd: None, margin: None, tol_step: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Found { certificate: Certificate, iterations: usize },
    /// No certificate found; this is not a proof of non-membership.
    NotFound { best: Certificate, iterations: usize },
}

impl SolveOutcome {
    pub fn certificate(&self) -> &Certificate {
        match self {
            SolveOutcome::Found { certificate, .. } => certificate,
            SolveOutcome::NotFound { best, .. } => best,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            SolveOutcome::Found { iterations, .. } | SolveOutcome::NotFound { iterations, .. } => {
                *iterations
            }
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SolveOutcome::Found { .. })
    }
}

/// Orthonormal real coordinates of `k × k` Hermitian matrices.
struct HermCoords {
    k: usize,
}

impl HermCoords {
    fn dim(&self) -> usize {
        self.k * self.k
    }

    fn basis(&self, idx: usize) -> CMat {
        let k = self.k;
        let mut out = zeros(k, k);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut t = 0;
        for i in 0..k {
            if t == idx {
                out[(i, i)] = c(1.0, 0.0);
                return out;
            }
            t += 1;
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if t == idx {
                    out[(i, j)] = c(s, 0.0);
                    out[(j, i)] = c(s, 0.0);
                    return out;
                }
                if t + 1 == idx {
                    out[(i, j)] = c(0.0, s);
                    out[(j, i)] = c(0.0, -s);
                    return out;
                }
                t += 2;
            }
        }
        unreachable!("basis index {idx} out of range for k = {k}")
    }

    fn to_vec(&self, m: &CMat) -> DVector<f64> {
        let k = self.k;
        let r2 = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(self.dim());
        for i in 0..k {
            v.push(m[(i, i)].re);
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                v.push(r2 * z.re);
                v.push(r2 * z.im);
            }
        }
        DVector::from_vec(v)
    }

    fn to_matrix(&self, v: &DVector<f64>) -> CMat {
        let k = self.k;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = zeros(k, k);
        let mut t = 0;
        for i in 0..k {
            m[(i, i)] = c(v[t], 0.0);
            t += 1;
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let z = c(s * v[t], s * v[t + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
                t += 2;
            }
        }
        m
    }
}

/// Affine map `P ↦ Q_l(P) = q0 + L·vec(P)` in Hermitian coordinates.
struct AffineGraph {
    p_coords: HermCoords,
    q_coords: HermCoords,
    q0: DVector<f64>,
    lin: DMatrix<f64>,
    normal: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl AffineGraph {
    /// `None` when the linear part is not finite.
    fn new(r: &Realization, tag: &FamilyTag) -> Result<Option<Self>> {
        let (n, m) = (r.n(), r.m());
        let p_coords = HermCoords { k: n };
        let q_coords = HermCoords { k: n + m };
        let q_zero = assemble_q_raw(r, &weight_entries(tag, &zeros(n, n), m))?;
        let q0 = q_coords.to_vec(&q_zero);
        let mut lin = DMatrix::<f64>::zeros(q_coords.dim(), p_coords.dim());
        for k in 0..p_coords.dim() {
            let qk = assemble_q_raw(r, &weight_entries(tag, &p_coords.basis(k), m))?;
            let col = q_coords.to_vec(&qk) - &q0;
            lin.set_column(k, &col);
        }
        let gram = DMatrix::<f64>::identity(p_coords.dim(), p_coords.dim()) + lin.transpose() * &lin;
        if !gram.iter().all(|x| x.is_finite()) {
            return Ok(None);
        }
        let Some(normal) = gram.cholesky() else { return Ok(None) };
        Ok(Some(Self { p_coords, q_coords, q0, lin, normal }))
    }

    /// Nearest point `(P, Q_l(P))` to `(p_hat, q_hat)` in the product Frobenius norm.
    fn project(&self, p_hat: &DVector<f64>, q_hat: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let rhs = p_hat + self.lin.transpose() * (q_hat - &self.q0);
        let p = self.normal.solve(&rhs);
        let q = &self.q0 + &self.lin * &p;
        (p, q)
    }
}

/// Searches for `P ≻ 0` with `Q_l(P) ⪰ 0` starting from `P = I`.
///
/// The search runs in rounds. Each round runs Dykstra's scheme in
/// coordinates where the current estimate of `P` is the identity; the
/// problem is congruence-equivariant, so this acts as a preconditioner when
/// the certificate is badly conditioned.
pub fn solve_p(r: &Realization, tag: FamilyTag, opts: &SolveOptions) -> Result<SolveOutcome> {
    tag.validate()?;
    let n = r.n();
    let start = verify_kyp(r, &eye(n), tag, opts.tol_psd)?;
    if start.is_verified() || n == 0 {
        return Ok(if start.is_verified() {
            SolveOutcome::Found { certificate: start, iterations: 0 }
        } else {
            SolveOutcome::NotFound { best: start, iterations: 0 }
        });
    }
    let margin = opts.margin.unwrap_or_else(|| 1e-6 * r.norm().max(1.0));

    // Coordinates of the current round: R_k = R.change_coordinates(S).
    let mut s = eye(n);
    let mut best = start;
    let mut iter = 0;
    // Dykstra converges to the intersection point nearest the start, which
    // sits on the boundary of the PSD cone. Aiming at {Q ⪰ εI} gives interior
    // points when they exist; ε drops to 0 for boundary-only problems.
    let mut shrink_rel = FIRST_SHRINK;
    let mut round = 0;

    while iter < opts.max_iter {
        round += 1;
        let rk = r.change_coordinates(&s)?;
        let Some(graph) = AffineGraph::new(&rk, &tag)? else {
            break;
        };
        let (pc, qc) = (&graph.p_coords, &graph.q_coords);
        let q_start = assemble_q_raw(&rk, &weight_entries(&tag, &eye(n), rk.m()))?;
        let shrink = shrink_rel * (1.0 + linalg::spectral_norm(&q_start));
        // The margin lives in original coordinates; carry a safe bound over.
        let s_norm = linalg::spectral_norm(&s);
        let margin_k = margin * s_norm * s_norm;

        let mut x_p = pc.to_vec(&eye(n));
        let mut x_q = qc.to_vec(&q_start);
        let mut inc_p = DVector::<f64>::zeros(x_p.len());
        let mut inc_q = DVector::<f64>::zeros(x_q.len());
        let mut stalled = false;
        for _ in 0..ROUND_ITER {
            if iter >= opts.max_iter {
                break;
            }
            iter += 1;
            let yp_in = &x_p + &inc_p;
            let yq_in = &x_q + &inc_q;
            let yp = pc.to_vec(&linalg::project_psd(&pc.to_matrix(&yp_in), margin_k));
            let yq = qc.to_vec(&linalg::project_psd(&qc.to_matrix(&yq_in), shrink));
            inc_p = yp_in - &yp;
            inc_q = yq_in - &yq;

            let (np, nq) = graph.project(&yp, &yq);
            let step = (&np - &x_p).norm();
            let size = 1.0 + np.norm();
            x_p = np;
            x_q = nq;

            let cert = verify_kyp(r, &pull_back(&pc.to_matrix(&x_p), &s)?, tag, opts.tol_psd)?;
            if cert.is_verified() {
                return Ok(SolveOutcome::Found { certificate: cert, iterations: iter });
            }
            if score(&cert) > score(&best) {
                best = cert;
            }
            if step < opts.tol_step * size {
                stalled = true;
                break;
            }
        }

        // Rebalance around the current estimate, with bounded distortion.
        let pk = pc.to_matrix(&x_p);
        let top = linalg::hermitian_eigenvalues(&pk).iter().cloned().fold(0.0_f64, f64::max);
        if !(top.is_finite() && top > 0.0) {
            break;
        }
        let u = linalg::hermitian_map(&pk, |lam| {
            lam.clamp(top / MAX_ROUND_DISTORTION, top).powf(-0.25)
        });
        let next = &s * &u;
        if linalg::condition_number(&next) > MAX_COORD_COND {
            // Coordinates are as far as they may go; only ε can still move.
            if shrink_rel == 0.0 {
                break;
            }
            shrink_rel = lower_shrink(shrink_rel);
            continue;
        }
        s = next;
        if stalled || round % SHRINK_EVERY == 0 {
            shrink_rel = lower_shrink(shrink_rel);
        }
    }
    Ok(SolveOutcome::NotFound { best, iterations: iter })
}

/// Dykstra iterations per rebalancing round.
const ROUND_ITER: usize = 50;
/// Eigenvalue ratio of one rebalancing step.
const MAX_ROUND_DISTORTION: f64 = 1e2;
/// Upper bound on the condition number of the working coordinates.
const MAX_COORD_COND: f64 = 1e4;
/// Rounds between reductions of ε.
const SHRINK_EVERY: usize = 4;

fn lower_shrink(rel: f64) -> f64 {
    if rel <= FIRST_SHRINK * 1e-4 {
        0.0
    } else {
        rel * 0.1
    }
}

/// Certificate of `R` from a certificate `P'` of `R.change_coordinates(S)`:
/// `S^{-*} P' S^{-1}`.
fn pull_back(pk: &CMat, s: &CMat) -> Result<CMat> {
    let s_inv = linalg::checked_inverse(s, f64::INFINITY)
        .map_err(crate::error::Error::SingularT)?;
    Ok(linalg::hermitian_part(&(s_inv.adjoint() * pk * &s_inv)))
}

/// Worst normalized violation; larger is better.
fn score(cert: &Certificate) -> f64 {
    let q_part = cert.min_eig_q / (1.0 + linalg::spectral_norm(&cert.q));
    let p_part = if cert.min_eig_p > 0.0 { 0.0 } else { cert.min_eig_p - 1.0 };
    q_part.min(0.0) + p_part
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, max_abs_diff};
    use crate::qmi::{CertificateStatus, Family};
    use crate::realization::real_realization;

    #[test]
    fn hermitian_coordinates_are_orthonormal() {
        let hc = HermCoords { k: 3 };
        for i in 0..hc.dim() {
            let bi = hc.basis(i);
            assert!(max_abs_diff(&bi, &bi.adjoint()) < 1e-15);
            assert!((hc.to_vec(&bi) - DVector::from_fn(hc.dim(), |j, _| (i == j) as u8 as f64)).norm() < 1e-14);
        }
        let m = CMat::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, i as f64 - j as f64));
        let h = linalg::hermitian_part(&m);
        assert!(max_abs_diff(&hc.to_matrix(&hc.to_vec(&h)), &h) < 1e-14);
        // Frobenius norm is preserved.
        let fro = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((hc.to_vec(&h).norm() - fro).abs() < 1e-12);
    }

    #[test]
    fn f_is_found_for_alpha_and_delta() {
        let f = real_realization(1, 1, &[&[-1.0, 1.0], &[1.0, 0.0]]).unwrap().scaled(0.5);
        for fam in [Family::Alpha, Family::Delta] {
            let out = solve_p(&f, fam.into(), &SolveOptions::default()).unwrap();
            assert!(out.is_found(), "{fam:?}");
        }
    }

    #[test]
    fn g_is_not_found_for_delta() {
        let g = real_realization(1, 1, &[&[0.0, 1.0], &[1.0, 1.0]]).unwrap().scaled(2.0);
        let out = solve_p(&g, Family::Delta.into(), &SolveOptions::default()).unwrap();
        assert!(!out.is_found());
        assert_ne!(out.certificate().status, CertificateStatus::Verified);
    }

    #[test]
    fn constant_with_psd_hermitian_part_is_found() {
        let r = Realization::constant(from_real_rows(&[&[1.0, 2.0], &[-2.0, 0.5]])).unwrap();
        let out = solve_p(&r, Family::Alpha.into(), &SolveOptions::default()).unwrap();
        assert!(out.is_found());
        assert_eq!(out.certificate().p.shape(), (0, 0));
    }

    #[test]
    fn finds_p_away_from_identity() {
        // Stable, positive-real after a coordinate change that breaks P = I.
        let base = real_realization(2, 1, &[&[-1.0, 0.3, 1.0], &[-0.3, -2.0, 0.5], &[1.0, 0.5, 1.0]]).unwrap();
        let t = from_real_rows(&[&[5.0, 1.0], &[0.0, 0.2]]);
        let r = base.change_coordinates(&t).unwrap();
        assert!(!verify_kyp(&r, &eye(2), Family::Alpha.into(), None).unwrap().is_verified());
        let out = solve_p(&r, Family::Alpha.into(), &SolveOptions::default()).unwrap();
        assert!(out.is_found(), "iterations {}", out.iterations());
    }
}
