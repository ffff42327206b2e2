//! Pullback of forms along a linear map of tangent spaces.

use super::{degree_of, GradedMatrixForm, Mask};
use crate::linalg::C64;

/// Determinant of a small row-major real matrix by partial-pivot LU.
/// The input is overwritten.
pub fn determinant(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        let p = a[piv * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    det
}

/// Pulls back a form on a `target_dim`-dimensional space along the linear
/// map with Jacobian `jac` (row-major, `target_dim × source_dim`,
/// `jac[a * source_dim + i] = ∂y^a/∂x^i`).
///
/// The coefficient on a source multi-index `K` is `Σ_I det(J[I, K]) w_I`.
/// Components of degree above `source_dim` disappear.
pub fn pullback_form(w: &GradedMatrixForm, jac: &[f64], source_dim: usize) -> GradedMatrixForm {
    let target_dim = w.dim();
    assert_eq!(jac.len(), target_dim * source_dim, "Jacobian shape mismatch");
    let n = w.matrix_size();
    let mut out = GradedMatrixForm::zero(source_dim, n);
    let source_masks: Vec<Mask> = (0..(1u32 << source_dim)).collect();
    let mut minor = Vec::with_capacity(source_dim * source_dim);
    for i in w.masks() {
        let p = degree_of(i);
        if p > source_dim {
            continue;
        }
        let coeff = w.component_matrix(i);
        let rows: Vec<usize> = (0..target_dim).filter(|a| i & (1 << a) != 0).collect();
        for &k in source_masks.iter().filter(|&&k| degree_of(k) == p) {
            let cols: Vec<usize> = (0..source_dim).filter(|c| k & (1 << c) != 0).collect();
            minor.clear();
            for &r in &rows {
                for &c in &cols {
                    minor.push(jac[r * source_dim + c]);
                }
            }
            let det = if p == 0 { 1.0 } else { determinant(&mut minor, p) };
            out.add_to_component(k, &coeff, C64::from(det));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    #[test]
    fn determinant_small_cases() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        assert!((determinant(&mut a, 2) - 5.0).abs() < 1e-15);
        let mut b = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!((determinant(&mut b, 3) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pullback_by_identity_is_identity() {
        let mut w = GradedMatrixForm::zero(3, 1);
        for s in 0..8u32 {
            w.set_component(s, &ComplexMatrix::scalar(1, C64::new(s as f64, 1.0)));
        }
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(pullback_form(&w, &id, 3), w);
    }

    #[test]
    fn pullback_drops_degrees_above_source() {
        let w = GradedMatrixForm::monomial(3, &[0, 1], &ComplexMatrix::identity(1));
        let jac = [1.0, 2.0, 3.0];
        assert_eq!(pullback_form(&w, &jac, 1).max_abs(), 0.0);
    }
}
