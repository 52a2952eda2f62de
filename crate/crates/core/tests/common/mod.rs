// Helpers shared by the integration suites. Closed forms live here (not in
// the library) so they stay independent of the realization code.
#![allow(dead_code)]

use passivity_core::linalg::{self, c, eye, CMat, Complex64};
use passivity_core::qmi::{verify_kyp, Family};
use passivity_core::sampling::{gaussian, random_certified};
use passivity_core::Realization;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cm(rows: &[&[Complex64]]) -> CMat {
    CMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

/// f(z) = 1 / (2(2z + 1)).
pub fn f_closed(z: Complex64) -> Complex64 {
    1.0 / (2.0 * (2.0 * z + 1.0))
}

/// g(z) = 2(2 + z) / z.
pub fn g_closed(z: Complex64) -> Complex64 {
    2.0 * (2.0 + z) / z
}

pub fn f1_closed(a: f64, b: f64, z: Complex64) -> CMat {
    let r = b / a;
    let s = 1.0 / (a * a * z);
    cm(&[&[s * (r * r + 1.0), s * (z - r)], &[-s * (z + r), s]])
}

pub fn f2_closed(a: f64, b: f64, z: Complex64) -> CMat {
    let s = 1.0 / (z * z + 1.0);
    cm(&[
        &[s * a * a * z, s * a * (b * z - a)],
        &[s * a * (b * z + a), s * (a * a + b * b) * z],
    ])
}

pub fn f3_closed(a: f64, b: f64, z: Complex64) -> CMat {
    let r = b / a;
    let s = z / (1.0 + z * z);
    cm(&[&[s, s * (r - z)], &[s * (r + z), s * (r * r + 1.0)]])
}

/// Ten points away from every fixture pole (0, ±i, −1/2).
pub fn ten_points() -> Vec<Complex64> {
    vec![
        c(1.0, 0.0),
        c(2.5, 0.0),
        c(-3.0, 0.0),
        c(0.3, 0.7),
        c(0.3, -0.7),
        c(-1.2, 2.0),
        c(0.0, 3.0),
        c(4.0, -1.5),
        c(-0.7, -0.4),
        c(0.05, 0.6),
    ]
}

pub fn eval(r: &Realization, z: Complex64) -> CMat {
    r.evaluate(z).expect("no pole").value
}

/// Worst entrywise deviation between two transfer functions over the points.
pub fn transfer_gap(r1: &Realization, r2: &Realization, points: &[Complex64]) -> f64 {
    points
        .iter()
        .map(|&z| linalg::max_abs_diff(&eval(r1, z), &eval(r2, z)))
        .fold(0.0, f64::max)
}

pub fn random_realization(n: usize, m: usize, complex: bool, rng: &mut ChaCha8Rng) -> Realization {
    Realization::from_array(n, &gaussian(n + m, n + m, complex, rng)).unwrap()
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    linalg::hermitian_part(&gaussian(n, n, true, rng))
}

/// Random P ≻ 0 with eigenvalues in [0.2, 5].
pub fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    passivity_core::sampling::random_hpd(n, 25.0, true, rng).scale(0.2)
}

/// Random point with |z| in a shell and away from the real axis poles.
pub fn random_point(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
}

/// A certified instance in general coordinates (random P) for the family.
pub fn certified(family: Family, n: usize, m: usize, rng: &mut ChaCha8Rng) -> (Realization, CMat) {
    let complex = rng.gen_bool(0.5);
    let (r, p) = random_certified(family, n, m, 0.8, 10.0, complex, rng);
    assert!(verify_kyp(&r, &p, family.into(), None).unwrap().is_verified());
    (r, p)
}

pub fn diag_signs(k: usize, m: usize) -> CMat {
    let mut d = eye(k + m);
    for i in 0..k {
        d[(i, i)] = c(-1.0, 0.0);
    }
    d
}

/// Test-local W_α (block order n, m, n, m), written out independently.
pub fn w_alpha_oracle(p: &CMat, m: usize) -> CMat {
    let n = p.nrows();
    let k = 2 * (n + m);
    let mut w = CMat::zeros(k, k);
    for i in 0..n {
        for j in 0..n {
            w[(i, n + m + j)] = -p[(i, j)];
            w[(n + m + i, j)] = -p[(i, j)];
        }
    }
    for i in 0..m {
        w[(n + i, 2 * n + m + i)] = c(1.0, 0.0);
        w[(2 * n + m + i, n + i)] = c(1.0, 0.0);
    }
    w
}
