//! Seedable random instances: Gaussian matrices, positive-definite weights
//! and realizations that carry a strict certificate for a chosen family.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, block, c, eye, sub, CMat};
use crate::qmi::{build_w_balanced, Family, FamilyTag};
use crate::realization::Realization;

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, complex: bool, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        c(re, im)
    })
}

/// Hermitian positive definite with spectrum in `[1, cond]`.
pub fn random_hpd<R: Rng + ?Sized>(n: usize, cond: f64, complex: bool, rng: &mut R) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let q = gaussian(n, n, complex, rng).qr().q();
    let mut d = CMat::zeros(n, n);
    for i in 0..n {
        let t: f64 = rng.gen();
        d[(i, i)] = c(cond.powf(t), 0.0);
    }
    linalg::hermitian_part(&(&q * d * q.adjoint()))
}

/// Nonsingular `T` with condition number at most `cond`.
pub fn random_coordinates<R: Rng + ?Sized>(n: usize, cond: f64, complex: bool, rng: &mut R) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let u = gaussian(n, n, complex, rng).qr().q();
    let v = gaussian(n, n, complex, rng).qr().q();
    let mut s = CMat::zeros(n, n);
    for i in 0..n {
        let t: f64 = rng.gen();
        s[(i, i)] = c(cond.powf(t), 0.0);
    }
    u * s * v.adjoint()
}

/// Orthogonal `V` with `V*·Ŵ_δ·V = Ŵ_l`, from matched eigen-decompositions.
fn delta_to(family: FamilyTag, n: usize, m: usize) -> CMat {
    let wd = build_w_balanced(Family::Delta.into(), n, m).expect("balanced weights exist").entries;
    let wl = build_w_balanced(family, n, m).expect("balanced weights exist").entries;
    let (_, ed) = linalg::hermitian_eigen(&wd);
    let (_, el) = linalg::hermitian_eigen(&wl);
    ed * el.adjoint()
}

/// A realization with `Q_l(I) ⪰ (1 − ρ²)·σ_min(Y)²·I ≻ 0`, where `ρ < 1` is
/// the norm of the underlying contraction; i.e. balanced and strictly
/// certified for the family. Only the plain (η-free) weights are supported.
pub fn random_balanced_certified<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    m: usize,
    rho: f64,
    complex: bool,
    rng: &mut R,
) -> Realization {
    assert!(rho > 0.0 && rho < 1.0, "contraction norm must lie in (0, 1)");
    let k = n + m;
    let v = delta_to(family.into(), n, m);
    let vs = v.adjoint();
    let (v11, v12, v21, v22) = (sub(&vs, 0, 0, k, k), sub(&vs, 0, k, k, k), sub(&vs, k, 0, k, k), sub(&vs, k, k, k, k));
    loop {
        let g = gaussian(k, k, complex, rng);
        let s = g.scale(rho / linalg::spectral_norm(&g).max(f64::MIN_POSITIVE));
        let den = &v21 * &s + &v22;
        if linalg::condition_number(&den) > 1e6 {
            continue;
        }
        let y = den.try_inverse().expect("well-conditioned");
        let arr = (&v11 * &s + &v12) * y;
        if linalg::spectral_norm(&arr) > 1e4 {
            continue;
        }
        let r = Realization::from_array(n, &arr).expect("square array");
        return r;
    }
}

/// A certified realization in general coordinates, with its certificate `P = T*T`.
pub fn random_certified<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    m: usize,
    rho: f64,
    cond_t: f64,
    complex: bool,
    rng: &mut R,
) -> (Realization, CMat) {
    let r = random_balanced_certified(family, n, m, rho, complex, rng);
    let t = random_coordinates(n, cond_t, complex, rng);
    let moved = r.change_coordinates(&t).expect("T is well-conditioned");
    let p = linalg::hermitian_part(&(t.adjoint() * &t));
    (moved, p)
}

/// Stack `[R; I]` (used by test oracles).
pub fn stacked(r: &Realization) -> CMat {
    let k = r.n() + r.m();
    block(&[&[&r.array()], &[&eye(k)]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmi::verify_kyp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_strictly_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fam in Family::ALL {
            for (n, m) in [(1, 1), (2, 1), (3, 2), (0, 2)] {
                let r = random_balanced_certified(fam, n, m, 0.9, true, &mut rng);
                let cert = verify_kyp(&r, &eye(n), fam.into(), Some(0.0)).unwrap();
                assert!(cert.min_eig_q > 0.0, "{fam:?} n={n} m={m}: {}", cert.min_eig_q);
                let (moved, p) = random_certified(fam, n, m, 0.9, 10.0, true, &mut rng);
                assert!(verify_kyp(&moved, &p, fam.into(), None).unwrap().is_verified());
            }
        }
    }

    #[test]
    fn hpd_has_requested_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_hpd(4, 100.0, true, &mut rng);
        let e = linalg::hermitian_eigenvalues(&p);
        assert!(e[0] >= 1.0 - 1e-12 && e[3] <= 100.0 + 1e-9);
    }
}
