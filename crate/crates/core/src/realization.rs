//! State-space realization arrays `[A B; C D]` of `m × m`-valued rational
//! functions `F(z) = C(zI − A)⁻¹B + D`.

use crate::error::{Error, Result};
use crate::linalg::{self, block, c, checked_inverse, eye, sub, zeros, CMat, Complex64};

/// Relative SVD threshold for controllability/observability ranks.
pub const TOL_RANK: f64 = 1e-8;
/// `zI − A` counts as singular when `σ_min < TOL_POLE · max(‖zI − A‖₂, ‖A‖₂, 1)`.
pub const TOL_POLE: f64 = 1e-12;
/// Condition-number ceiling for coordinate changes and inversions.
pub const COND_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
}

/// A single sample `F(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSample {
    pub z: Complex64,
    pub value: CMat,
}

/// Result of the minimality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Minimality {
    pub minimal: bool,
    pub rank_ctrb: usize,
    pub rank_obsv: usize,
}

impl Realization {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("A is {}x{}", n, a.ncols())));
        }
        if d.ncols() != m || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "D must be square and non-empty, got {}x{}",
                m,
                d.ncols()
            )));
        }
        if b.shape() != (n, m) {
            return Err(Error::DimensionMismatch(format!(
                "B is {:?}, expected ({n}, {m})",
                b.shape()
            )));
        }
        if c.shape() != (m, n) {
            return Err(Error::DimensionMismatch(format!(
                "C is {:?}, expected ({m}, {n})",
                c.shape()
            )));
        }
        for (name, blk) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !linalg::is_finite(blk) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Zero-state realization of the constant function `F(z) ≡ D`.
    pub fn constant(d: CMat) -> Result<Self> {
        let m = d.nrows();
        Self::new(zeros(0, 0), zeros(0, m), zeros(m, 0), d)
    }

    /// Split an `(n+m) × (n+m)` array into its blocks.
    pub fn from_array(n: usize, array: &CMat) -> Result<Self> {
        let size = array.nrows();
        if array.ncols() != size || n >= size {
            return Err(Error::DimensionMismatch(format!(
                "array {:?} cannot hold n = {n} with m ≥ 1",
                array.shape()
            )));
        }
        let m = size - n;
        Self::new(
            sub(array, 0, 0, n, n),
            sub(array, 0, n, n, m),
            sub(array, n, 0, m, n),
            sub(array, n, n, m, m),
        )
    }

    pub fn array(&self) -> CMat {
        block(&[&[&self.a, &self.b], &[&self.c, &self.d]])
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn d(&self) -> &CMat {
        &self.d
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
            d: self.d.scale(s),
        }
    }

    /// `F(z) = C(zI − A)⁻¹B + D`.
    pub fn evaluate(&self, z: Complex64) -> Result<TransferSample> {
        let n = self.n();
        if n == 0 {
            return Ok(TransferSample { z, value: self.d.clone() });
        }
        let resolvent = eye(n) * z - &self.a;
        let s = linalg::singular_values(&resolvent);
        // Scale by ‖A‖ and 1 as well: near a pole of a scalar-like A the whole
        // resolvent is small and the plain ratio stays near 1.
        let scale = s[0].max(linalg::spectral_norm(&self.a)).max(1.0);
        if s[n - 1] < TOL_POLE * scale {
            return Err(Error::PoleAt(z));
        }
        let x = resolvent.lu().solve(&self.b).ok_or(Error::PoleAt(z))?;
        let value = &self.c * x + &self.d;
        if !linalg::is_finite(&value) {
            return Err(Error::PoleAt(z));
        }
        Ok(TransferSample { z, value })
    }

    /// Rank test of `[B, AB, …, Aⁿ⁻¹B]` and the observability dual.
    pub fn is_minimal(&self) -> Minimality {
        let n = self.n();
        if n == 0 {
            return Minimality { minimal: true, rank_ctrb: 0, rank_obsv: 0 };
        }
        let m = self.m();
        let mut ctrb = zeros(n, n * m);
        let mut obsv = zeros(n * m, n);
        let mut kb = self.b.clone();
        let mut ck = self.c.clone();
        for k in 0..n {
            ctrb.view_mut((0, k * m), (n, m)).copy_from(&kb);
            obsv.view_mut((k * m, 0), (m, n)).copy_from(&ck);
            kb = &self.a * kb;
            ck *= &self.a;
        }
        let rank_ctrb = linalg::rank(&ctrb, TOL_RANK);
        let rank_obsv = linalg::rank(&obsv, TOL_RANK);
        Minimality { minimal: rank_ctrb == n && rank_obsv == n, rank_ctrb, rank_obsv }
    }

    /// `(T⁻¹AT, T⁻¹B, CT, D)`.
    pub fn change_coordinates(&self, t: &CMat) -> Result<Self> {
        let n = self.n();
        if t.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "T is {:?}, expected ({n}, {n})",
                t.shape()
            )));
        }
        let t_inv = checked_inverse(t, COND_MAX).map_err(Error::SingularT)?;
        Self::new(&t_inv * &self.a * t, &t_inv * &self.b, &self.c * t, self.d.clone())
    }

    /// Inverse of the array viewed as a constant `(n+m) × (n+m)` matrix.
    pub fn invert_array(&self) -> Result<Self> {
        let inv = checked_inverse(&self.array(), COND_MAX).map_err(Error::SingularArray)?;
        Self::from_array(self.n(), &inv)
    }

    /// Realization of the pointwise inverse `F(z)⁻¹`; requires nonsingular `D`.
    pub fn invert_function(&self) -> Result<Self> {
        let d_inv = checked_inverse(&self.d, COND_MAX).map_err(Error::SingularD)?;
        let bd = &self.b * &d_inv;
        Self::new(
            &self.a - &bd * &self.c,
            bd,
            -(&d_inv * &self.c),
            d_inv,
        )
    }

    /// Series interconnection realizing `F₁(z)·F₂(z)` (`self` is `F₁`).
    pub fn cascade(&self, other: &Self) -> Result<Self> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch(format!(
                "cascade of m = {} with m = {}",
                self.m(),
                other.m()
            )));
        }
        let (n1, n2) = (self.n(), other.n());
        let a = block(&[
            &[&self.a, &(&self.b * &other.c)],
            &[&zeros(n2, n1), &other.a],
        ]);
        let b = block(&[&[&(&self.b * &other.d)], &[&other.b]]);
        let c = block(&[&[&self.c, &(&self.d * &other.c)]]);
        Self::new(a, b, c, &self.d * &other.d)
    }

    /// Spectral norm of the full array.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.array())
    }
}

/// Convenience constructor for real-valued test and fixture data.
pub fn real_realization(n: usize, m: usize, rows: &[&[f64]]) -> Result<Realization> {
    if rows.len() != n + m || rows.iter().any(|r| r.len() != n + m) {
        return Err(Error::DimensionMismatch("array rows".into()));
    }
    let arr = CMat::from_fn(n + m, n + m, |i, j| c(rows[i][j], 0.0));
    Realization::from_array(n, &arr)
}
