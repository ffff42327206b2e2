//! ℤ₂-graded matrices on `E₊ ⊕ E₋` with equal ranks.
//!
//! Forms with super-matrix coefficients are ordinary [`GradedMatrixForm`]s of
//! size `2r`, the first `r` basis vectors spanning `E₊`. Products are plain
//! block-matrix products combined with the wedge sign; no extra sign is
//! attached to odd blocks.

use super::{degree_of, wedge, GradedMatrixForm};
use crate::error::{contract, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Block matrix `[[pp, pm], [mp, mm]]`; `mp` maps `E₊ → E₋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix {
    pub pp: ComplexMatrix,
    pub pm: ComplexMatrix,
    pub mp: ComplexMatrix,
    pub mm: ComplexMatrix,
    pub parity: Parity,
}

impl SuperMatrix {
    pub fn even(pp: ComplexMatrix, mm: ComplexMatrix) -> Self {
        assert_eq!(pp.size(), mm.size(), "graded ranks must agree");
        let n = pp.size();
        Self {
            pp,
            pm: ComplexMatrix::zeros(n),
            mp: ComplexMatrix::zeros(n),
            mm,
            parity: Parity::Even,
        }
    }

    /// Odd endomorphism with `E₋ → E₊` block `pm` and `E₊ → E₋` block `mp`.
    pub fn odd(pm: ComplexMatrix, mp: ComplexMatrix) -> Self {
        assert_eq!(pm.size(), mp.size(), "graded ranks must agree");
        let n = pm.size();
        Self {
            pp: ComplexMatrix::zeros(n),
            pm,
            mp,
            mm: ComplexMatrix::zeros(n),
            parity: Parity::Odd,
        }
    }

    pub fn rank(&self) -> usize {
        self.pp.size()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let r = self.rank();
        ComplexMatrix::from_fn(2 * r, |i, j| match (i < r, j < r) {
            (true, true) => self.pp[(i, j)],
            (true, false) => self.pm[(i, j - r)],
            (false, true) => self.mp[(i - r, j)],
            (false, false) => self.mm[(i - r, j - r)],
        })
    }

    /// Splits a `2r×2r` matrix, checking that the blocks of the wrong parity
    /// vanish.
    pub fn from_matrix(m: &ComplexMatrix, parity: Parity) -> Result<Self> {
        if !m.size().is_multiple_of(2) {
            return Err(contract(format!("super matrix of odd size {}", m.size())));
        }
        let r = m.size() / 2;
        let block = |di: usize, dj: usize| ComplexMatrix::from_fn(r, |i, j| m[(i + di, j + dj)]);
        let s = Self {
            pp: block(0, 0),
            pm: block(0, r),
            mp: block(r, 0),
            mm: block(r, r),
            parity,
        };
        let stray = match parity {
            Parity::Even => s.pm.max_abs().max(s.mp.max_abs()),
            Parity::Odd => s.pp.max_abs().max(s.mm.max_abs()),
        };
        if stray != 0.0 {
            return Err(contract(format!("{parity:?} super matrix has nonzero off-parity blocks ({stray:.3e})")));
        }
        Ok(s)
    }

    pub fn supertrace(&self) -> C64 {
        self.pp.trace() - self.mm.trace()
    }
}

/// `Tr(pp) − Tr(mm)` componentwise; the result is scalar valued.
pub fn supertrace(w: &GradedMatrixForm) -> Result<GradedMatrixForm> {
    let n = w.matrix_size();
    if !n.is_multiple_of(2) {
        return Err(contract(format!("supertrace of a form with odd matrix size {n}")));
    }
    let r = n / 2;
    let mut out = GradedMatrixForm::zero(w.dim(), 1);
    for s in w.masks() {
        let c = w.component(s).expect("present");
        let mut t = ZERO;
        for i in 0..r {
            t += c[i * n + i] - c[(i + r) * n + i + r];
        }
        out.set_component(s, &ComplexMatrix::scalar(1, t));
    }
    Ok(out)
}

/// Graded commutator `ab − (−1)^{pq + |a||b|} ba`, summed over the form
/// degrees `p` of `a` and `q` of `b`; `|a|`, `|b|` are the matrix parities.
pub fn super_commutator(
    a: &GradedMatrixForm,
    pa: Parity,
    b: &GradedMatrixForm,
    pb: Parity,
) -> Result<GradedMatrixForm> {
    let mut out = GradedMatrixForm::zero(a.dim(), a.matrix_size());
    let deg = |f: &GradedMatrixForm| {
        let mut ds: Vec<usize> = f.masks().map(degree_of).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    };
    for p in deg(a) {
        let ap = a.degree_part(p);
        for q in deg(b) {
            let bq = b.degree_part(q);
            let sign = if (p * q + pa.bit() * pb.bit()).is_multiple_of(2) { 1.0 } else { -1.0 };
            out.axpy(ONE, &wedge(&ap, &bq)?)?;
            out.axpy(C64::from(-sign), &wedge(&bq, &ap)?)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::nilpotent_exp;

    #[test]
    fn supertrace_examples() {
        let id = GradedMatrixForm::identity(2, 4);
        assert_eq!(supertrace(&id).unwrap().scalar_component(0), ZERO);

        let a = ComplexMatrix::from_row_major(2, vec![C64::new(1.0, 2.0), ONE, ZERO, C64::from(3.0)]);
        let s = SuperMatrix::even(a.clone(), ComplexMatrix::zeros(2));
        let f = GradedMatrixForm::monomial(2, &[], &s.to_matrix());
        assert_eq!(supertrace(&f).unwrap().scalar_component(0), a.trace());

        // V = 0 and trivial connection: exp(-A_0^2) = Id.
        let e = nilpotent_exp(&GradedMatrixForm::zero(3, 4), C64::from(-1.0)).unwrap();
        assert_eq!(supertrace(&e).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn block_roundtrip_and_parity_check() {
        let v = ComplexMatrix::from_row_major(1, vec![C64::new(0.0, 1.0)]);
        let s = SuperMatrix::odd(v.adjoint(), v.clone());
        let m = s.to_matrix();
        assert_eq!(SuperMatrix::from_matrix(&m, Parity::Odd).unwrap(), s);
        assert!(SuperMatrix::from_matrix(&m, Parity::Even).is_err());
        assert_eq!(s.supertrace(), ZERO);
    }
}
