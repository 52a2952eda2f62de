//! Small dense complex linear-algebra helpers on top of nalgebra.
//!
//! Every helper accepts empty (0×k) operands so that realizations with no
//! state flow through the same code paths as everything else.

use nalgebra::DMatrix;
pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type CMat = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

pub fn zeros(r: usize, k: usize) -> CMat {
    CMat::zeros(r, k)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Real matrix lifted to complex entries.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    assert_eq!(rows * cols, data.len());
    CMat::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let k = if r == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(r, k, |i, j| c(rows[i][j], 0.0))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Singular values in descending order; empty for empty matrices.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix (infinity for 0×0).
pub fn sigma_min(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// 2-norm condition number; 1 for 0×0, infinity when singular.
pub fn condition_number(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&0.0) => 0,
        Some(&hi) => s.iter().filter(|&&x| x > rel_tol * hi).count(),
    }
}

/// Eigen-decomposition of the Hermitian part of `m`; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Smallest eigenvalue of the Hermitian part; +inf for 0×0.
pub fn min_eig(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Rebuild V·diag(f(λ))·V* from a Hermitian eigen-decomposition.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let s = f(lam);
        for r in 0..n {
            scaled[(r, k)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Nearest (Frobenius) Hermitian matrix with all eigenvalues ≥ `floor`.
pub fn project_psd(m: &CMat, floor: f64) -> CMat {
    hermitian_map(m, |lam| lam.max(floor))
}

/// Inverse guarded by a condition-number ceiling; returns the condition number on failure.
pub fn checked_inverse(m: &CMat, cond_max: f64) -> std::result::Result<CMat, f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let cond = condition_number(m);
    if !(cond <= cond_max) {
        return Err(cond);
    }
    m.clone().try_inverse().ok_or(cond)
}

/// Block-diagonal assembly of square or rectangular blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), b.shape()).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// Assemble a matrix from a row-major grid of blocks with consistent shapes.
pub fn block(grid: &[&[&CMat]]) -> CMat {
    let heights: Vec<usize> = grid.iter().map(|row| row[0].nrows()).collect();
    let widths: Vec<usize> = grid[0].iter().map(|b| b.ncols()).collect();
    let mut out = zeros(heights.iter().sum(), widths.iter().sum());
    let mut r = 0;
    for (i, row) in grid.iter().enumerate() {
        let mut k = 0;
        for (j, b) in row.iter().enumerate() {
            assert_eq!(b.shape(), (heights[i], widths[j]), "block ({i},{j}) shape");
            out.view_mut((r, k), b.shape()).copy_from(*b);
            k += widths[j];
        }
        r += heights[i];
    }
    out
}

pub fn sub(m: &CMat, r: usize, k: usize, rows: usize, cols: usize) -> CMat {
    m.view((r, k), (rows, cols)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_operands() {
        let e = zeros(0, 0);
        assert_eq!(spectral_norm(&e), 0.0);
        assert_eq!(min_eig(&e), f64::INFINITY);
        assert_eq!(rank(&zeros(0, 3), 1e-8), 0);
        assert_eq!(checked_inverse(&e, 1e12).unwrap().shape(), (0, 0));
        assert_eq!(condition_number(&e), 1.0);
    }

    #[test]
    fn psd_projection_clips_negative_eigenvalues() {
        let m = from_real_rows(&[&[1.0, 0.0], &[0.0, -2.0]]);
        let p = project_psd(&m, 0.0);
        assert!(max_abs_diff(&p, &from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])) < 1e-14);
    }

    #[test]
    fn rank_of_outer_product() {
        let u = from_real_rows(&[&[1.0], &[2.0], &[3.0]]);
        let m = &u * u.adjoint();
        assert_eq!(rank(&m, 1e-8), 1);
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let p = from_real_rows(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let s = hermitian_map(&p, f64::sqrt);
        assert!(max_abs_diff(&(&s * &s), &p) < 1e-12);
    }
}
