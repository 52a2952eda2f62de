mod common;

use common::*;
use passivity_core::cones::{
    cayley_matrix, in_l, in_s, isometry_defect, matrix_convex_combine, ConeParameter, IsometryTuple,
};
use passivity_core::linalg::{self, c, eye, from_real_rows, max_abs_diff, CMat};
use passivity_core::sampling::{gaussian, random_hpd};
use passivity_core::Error;
use proptest::prelude::*;

#[test]
fn membership_examples() {
    let id = ConeParameter::identity(2, true);
    let closed = ConeParameter::identity(2, false);
    assert!(in_l(&id, &eye(2)).unwrap());
    let skew = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    assert!(in_l(&closed, &skew).unwrap());
    assert!(!in_l(&id, &skew).unwrap());
    assert!(!in_l(&closed, &from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])).unwrap());
    assert!(!in_s(&closed, &eye(2).scale(2.0)).unwrap());
    assert!(in_s(&id, &CMat::zeros(2, 2)).unwrap());
    assert!(matches!(in_l(&id, &eye(3)), Err(Error::DimensionMismatch(_))));
}

#[test]
fn cayley_examples() {
    assert!(max_abs_diff(&cayley_matrix(&CMat::zeros(3, 3)).unwrap(), &eye(3)) < 1e-15);
    assert!(max_abs_diff(&cayley_matrix(&eye(3)).unwrap(), &CMat::zeros(3, 3)) < 1e-15);
    assert!(matches!(cayley_matrix(&(-eye(2))), Err(Error::MinusOneInSpectrum)));
}

#[test]
fn combination_examples() {
    let mut rng = rng(3);
    let a = gaussian(3, 3, true, &mut rng);
    let u = gaussian(3, 3, true, &mut rng).qr().q();
    let single = matrix_convex_combine(&[a.clone()], &IsometryTuple::new(vec![u.clone()]).unwrap()).unwrap();
    assert!(max_abs_diff(&single, &(u.adjoint() * &a * &u)) < 1e-12);

    let lambdas = [0.2, 0.5, 0.3];
    let mats: Vec<CMat> = (0..3).map(|_| gaussian(2, 2, true, &mut rng)).collect();
    let iso = IsometryTuple::new(lambdas.iter().map(|l: &f64| eye(2).scale(l.sqrt())).collect()).unwrap();
    let expect = mats.iter().zip(lambdas).fold(CMat::zeros(2, 2), |acc, (m, l)| acc + m.scale(l));
    assert!(max_abs_diff(&matrix_convex_combine(&mats, &iso).unwrap(), &expect) < 1e-14);

    assert!(matches!(IsometryTuple::new(vec![eye(2), eye(2)]), Err(Error::NotAnIsometryFamily(_))));
    // η_j > ν is refused.
    let tall = CMat::from_fn(3, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    assert!(matches!(IsometryTuple::new(vec![tall]), Err(Error::DimensionMismatch(_))));
}

#[test]
fn scalar_matrices_are_not_matrix_convex() {
    let out = matrix_convex_combine(
        &[eye(2).scale(2.0), eye(2).scale(3.0)],
        &IsometryTuple::new(vec![from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])])
            .unwrap(),
    )
    .unwrap();
    assert!(max_abs_diff(&out, &from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]])) == 0.0);
    assert!((out[(0, 0)] - out[(1, 1)]).norm() > 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_isometries_are_isometries(seed in any::<u64>(), nu in 1usize..5, k in 1usize..4) {
        let blocks = passivity_core::cones::random_isometry_blocks(nu, k, &mut rng(seed));
        prop_assert!(isometry_defect(&blocks, nu).unwrap() < 1e-12);
    }

    #[test]
    fn cayley_is_an_involution(seed in any::<u64>(), n in 1usize..5) {
        let a = gaussian(n, n, true, &mut rng(seed));
        prop_assume!(linalg::sigma_min(&(eye(n) + &a)) > 1e-2);
        let ca = cayley_matrix(&a).unwrap();
        let alt = -eye(n) + (eye(n) + &a).try_inverse().unwrap().scale(2.0);
        prop_assert!(max_abs_diff(&ca, &alt) < 1e-10 * (1.0 + linalg::max_abs(&ca)));
        prop_assert!(max_abs_diff(&cayley_matrix(&ca).unwrap(), &a) < 1e-9 * (1.0 + linalg::max_abs(&a)));
    }

    /// A ∈ L̄_H ⇒ C(A) ∈ S̄_H, and back.
    #[test]
    fn cayley_exchanges_lyapunov_and_stein(seed in any::<u64>(), n in 1usize..5, use_identity in any::<bool>()) {
        let mut rng = rng(seed);
        let h = if use_identity { eye(n) } else { random_hpd(n, 10.0, true, &mut rng) };
        let hinv = h.clone().try_inverse().unwrap();
        // H A + A* H = S ⪰ 0 for A = H⁻¹ (S/2 + K), K skew.
        let g = gaussian(n, n, true, &mut rng);
        let k = gaussian(n, n, true, &mut rng);
        let a = &hinv * ((&g * g.adjoint()).scale(0.5) + (&k - k.adjoint()).scale(0.5));
        prop_assume!(linalg::sigma_min(&(eye(n) + &a)) > 1e-3);
        let cone = ConeParameter::new(h.clone(), false).unwrap();
        prop_assert!(in_l(&cone, &a).unwrap());
        let ca = cayley_matrix(&a).unwrap();
        prop_assert!(in_s(&cone, &ca).unwrap());
        prop_assert!(in_l(&cone, &cayley_matrix(&ca).unwrap()).unwrap());
    }

    #[test]
    fn closure_laws(seed in any::<u64>(), nu in 1usize..5, k in 1usize..4, b in 0.1f64..5.0) {
        let mut rng = rng(seed);
        let iso = IsometryTuple::random(nu, k, &mut rng);
        let herm: Vec<CMat> = (0..k).map(|_| random_hermitian(nu, &mut rng)).collect();
        let h = matrix_convex_combine(&herm, &iso).unwrap();
        prop_assert!(max_abs_diff(&h, &h.adjoint()) < 1e-12);

        let psd: Vec<CMat> = herm.iter().map(|m| m * m).collect();
        prop_assert!(linalg::min_eig(&matrix_convex_combine(&psd, &iso).unwrap()) >= -1e-9);

        let ball: Vec<CMat> = (0..k).map(|_| {
            let g = gaussian(nu, nu, true, &mut rng);
            g.scale(b / linalg::spectral_norm(&g))
        }).collect();
        prop_assert!(linalg::spectral_norm(&matrix_convex_combine(&ball, &iso).unwrap()) <= b + 1e-9);

        let lyap: Vec<CMat> = psd.iter().zip(&herm).map(|(p, s)| p + (s * c(0.0, 1.0))).collect();
        let combined = matrix_convex_combine(&lyap, &iso).unwrap();
        prop_assert!(in_l(&ConeParameter::identity(nu, false), &combined).unwrap());
    }
}
