//! Small dense complex matrices.
//!
//! Matrix sizes in this crate are tiny (ranks 1 to 8), so everything is a
//! row-major `Vec<Complex64>` with hand-written kernels. nalgebra is only
//! used for the Hermitian eigendecomposition and the SVD fallback.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix size must be at least 1");
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, c: C64) -> Self {
        Self::identity(n).scale(c)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {} entries", n * n);
        Self { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `diag(self, Id_extra)`.
    pub fn stabilize(&self, extra: usize) -> Self {
        let n = self.n + extra;
        Self::from_fn(n, |i, j| {
            if i < self.n && j < self.n {
                self[(i, j)]
            } else if i == j {
                ONE
            } else {
                ZERO
            }
        })
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let n = a.n + b.n;
        Self::from_fn(n, |i, j| match (i < a.n, j < a.n) {
            (true, true) => a[(i, j)],
            (false, false) => b[(i - a.n, j - a.n)],
            _ => ZERO,
        })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// Returns `None` when a pivot vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .expect("non-empty range");
            if a[pivot * n + col].norm() == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].inv();
            for j in 0..n {
                a[col * n + j] *= p;
                inv[col * n + j] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (x, y) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= factor * x;
                    inv[r * n + j] -= factor * y;
                }
            }
        }
        Some(Self { n, data: inv })
    }

    pub fn min_singular_value(&self) -> f64 {
        let svd = self.to_nalgebra().svd(false, false);
        svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Inverse together with a certified lower bound check on the smallest
    /// singular value. `1/‖A⁻¹‖_F` bounds σ_min from below, so the SVD only
    /// runs when that bound is inconclusive.
    pub fn checked_inverse(&self, min_sigma: f64, location: impl FnOnce() -> String) -> Result<Self> {
        let singular = |sigma: f64, location: String| Error::Singular {
            location,
            sigma,
            threshold: min_sigma,
        };
        let Some(inv) = self.inverse() else {
            return Err(singular(0.0, location()));
        };
        let bound = 1.0 / inv.frobenius_norm();
        if bound.is_finite() && bound > min_sigma {
            return Ok(inv);
        }
        let sigma = self.min_singular_value();
        if sigma > min_sigma && inv.is_finite() {
            Ok(inv)
        } else {
            Err(singular(sigma, location()))
        }
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Maximum entrywise distance.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        let mut out = ComplexMatrix::zeros(self.n);
        matmul_acc(&mut out.data, &self.data, &rhs.data, self.n, ONE);
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// `dst += alpha · a · b` for row-major `n×n` blocks.
#[inline]
pub(crate) fn matmul_acc(dst: &mut [C64], a: &[C64], b: &[C64], n: usize, alpha: C64) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let s = alpha * aik;
            let brow = &b[k * n..(k + 1) * n];
            let drow = &mut dst[i * n..(i + 1) * n];
            for (d, bkj) in drow.iter_mut().zip(brow) {
                *d += s * bkj;
            }
        }
    }
}

/// Unitary polar factor `U = v (v*v)^{-1/2}` and its derivative along the
/// direction in which `v` moves with velocity `dv`.
///
/// The derivative of `P^{-1/2}` for `P = v*v = Q Λ Q*` uses the first divided
/// differences of `λ ↦ λ^{-1/2}`:
/// `d(P^{-1/2}) = Q (F ∘ (Q* dP Q)) Q*` with `F_ij = -1/(√λi √λj (√λi + √λj))`.
pub fn polar_unitary_jet(
    v: &ComplexMatrix,
    dv: &ComplexMatrix,
    min_sigma: f64,
) -> std::result::Result<(ComplexMatrix, ComplexMatrix), f64> {
    let n = v.size();
    let p = &v.adjoint() * v;
    let eig = nalgebra::SymmetricEigen::new(p.to_nalgebra());
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let lmin = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lmin > min_sigma * min_sigma) {
        return Err(lmin.max(0.0).sqrt());
    }
    let q = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let qh = q.adjoint();
    let roots: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();

    let inv_sqrt_diag = ComplexMatrix::diagonal(&roots.iter().map(|r| C64::from(1.0 / r)).collect::<Vec<_>>());
    let p_inv_sqrt = &(&q * &inv_sqrt_diag) * &qh;

    let dp = &(&dv.adjoint() * v) + &(&v.adjoint() * dv);
    let dp_eigen = &(&qh * &dp) * &q;
    let weighted = ComplexMatrix::from_fn(n, |i, j| {
        let f = -1.0 / (roots[i] * roots[j] * (roots[i] + roots[j]));
        dp_eigen[(i, j)] * f
    });
    let d_p_inv_sqrt = &(&q * &weighted) * &qh;

    let u = v * &p_inv_sqrt;
    let du = &(dv * &p_inv_sqrt) + &(v * &d_p_inv_sqrt);
    Ok((u, du))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn inverse_roundtrip() {
        for n in 1..6 {
            let a = &sample(n, n as u64) + &ComplexMatrix::scalar(n, C64::from(2.0));
            let inv = a.inverse().unwrap();
            assert!((&a * &inv).distance(&ComplexMatrix::identity(n)) < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = ComplexMatrix::from_row_major(2, vec![ONE, ONE, ONE, ONE]);
        let err = a.checked_inverse(1e-8, || "node 7".into()).unwrap_err();
        assert!(err.to_string().contains("node 7"));
    }

    #[test]
    fn polar_factor_is_unitary_and_derivative_matches_difference() {
        let v = &sample(3, 11) + &ComplexMatrix::scalar(3, C64::from(1.5));
        let dv = sample(3, 12);
        let (u, du) = polar_unitary_jet(&v, &dv, 1e-8).unwrap();
        assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(3)) < 1e-13);

        let h = 1e-5;
        let (up, _) = polar_unitary_jet(&(&v + &dv.scale(C64::from(h))), &dv, 1e-8).unwrap();
        let (um, _) = polar_unitary_jet(&(&v - &dv.scale(C64::from(h))), &dv, 1e-8).unwrap();
        let fd = (&up - &um).scale(C64::from(0.5 / h));
        assert!(fd.distance(&du) < 1e-8, "{}", fd.distance(&du));
    }
}
