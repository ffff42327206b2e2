//! Graded exterior algebra of matrix-valued differential forms at a point.
//!
//! A [`GradedMatrixForm`] lives at one point of a `d`-dimensional chart and
//! stores one `N×N` coefficient per subset of `{0, …, d−1}`. Subsets are
//! bitmasks: bit `i` set means `dx^i` is a factor, always in increasing order.

mod pullback;
mod superalg;

pub use pullback::{determinant, pullback_form};
pub use superalg::{super_commutator, supertrace, Parity, SuperMatrix};

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{contract, Result};
use crate::linalg::{matmul_acc, ComplexMatrix, C64, ONE, ZERO};

/// Largest chart dimension supported by the dense layout.
pub const MAX_DIM: usize = 7;

pub type Mask = u32;

/// Bitmask of a strictly increasing multi-index.
pub fn mask_of(indices: &[usize]) -> Mask {
    let mut m = 0;
    for &i in indices {
        assert!(i < MAX_DIM, "coordinate index {i} out of range");
        assert!(m & (1 << i) == 0, "repeated index {i}");
        m |= 1 << i;
    }
    m
}

pub fn indices_of(mask: Mask) -> Vec<usize> {
    (0..MAX_DIM).filter(|i| mask & (1 << i) != 0).collect()
}

#[inline]
pub fn degree_of(mask: Mask) -> usize {
    mask.count_ones() as usize
}

/// Sign of the permutation that sorts `dx^I ∧ dx^J` into `dx^{I∪J}`.
/// Caller guarantees `I ∩ J = ∅`.
#[inline]
pub fn shuffle_sign(i: Mask, j: Mask) -> f64 {
    let mut inversions = 0;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (i >> (b + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Mixed-degree form with `N×N` complex coefficients at one chart point.
#[derive(Clone, PartialEq)]
pub struct GradedMatrixForm {
    dim: usize,
    n: usize,
    /// Bit `s` set when the component on subset `s` is stored. Absent
    /// components are zero in `data` as well.
    present: u128,
    data: Vec<C64>,
}

impl std::fmt::Debug for GradedMatrixForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "GradedMatrixForm(dim={}, N={})", self.dim, self.n)?;
        for s in self.masks() {
            writeln!(f, "  dx{:?}: {:?}", indices_of(s), self.component(s).unwrap())?;
        }
        Ok(())
    }
}

impl GradedMatrixForm {
    pub fn zero(dim: usize, n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "chart dimension {dim} outside 1..={MAX_DIM}");
        assert!(n >= 1, "matrix size must be at least 1");
        Self {
            dim,
            n,
            present: 0,
            data: vec![ZERO; (1 << dim) * n * n],
        }
    }

    /// Degree-0 form `c·Id`.
    pub fn scalar(dim: usize, n: usize, c: C64) -> Self {
        let mut f = Self::zero(dim, n);
        f.set_component(0, &ComplexMatrix::scalar(n, c));
        f
    }

    pub fn identity(dim: usize, n: usize) -> Self {
        Self::scalar(dim, n, ONE)
    }

    /// Single term `dx^I ⊗ A`.
    pub fn monomial(dim: usize, indices: &[usize], a: &ComplexMatrix) -> Self {
        let mut f = Self::zero(dim, a.size());
        f.set_component(mask_of(indices), a);
        f
    }

    /// Degree-1 form `Σ_i dx^i ⊗ A_i`.
    pub fn one_form(coefficients: &[ComplexMatrix]) -> Self {
        let mut f = Self::zero(coefficients.len(), coefficients[0].size());
        for (i, a) in coefficients.iter().enumerate() {
            f.set_component(1 << i, a);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    fn block(&self) -> usize {
        self.n * self.n
    }

    fn check_mask(&self, mask: Mask) {
        assert!(
            (mask as usize) < (1 << self.dim),
            "multi-index {:?} exceeds chart dimension {}",
            indices_of(mask),
            self.dim
        );
    }

    /// Stored multi-indices in increasing bitmask order.
    pub fn masks(&self) -> impl Iterator<Item = Mask> + '_ {
        (0..(1u32 << self.dim)).filter(move |s| self.present & (1u128 << s) != 0)
    }

    pub fn is_present(&self, mask: Mask) -> bool {
        self.present & (1u128 << mask) != 0
    }

    pub fn component(&self, mask: Mask) -> Option<&[C64]> {
        self.check_mask(mask);
        if self.is_present(mask) {
            let b = self.block();
            Some(&self.data[mask as usize * b..(mask as usize + 1) * b])
        } else {
            None
        }
    }

    /// Component as a matrix; zero when absent.
    pub fn component_matrix(&self, mask: Mask) -> ComplexMatrix {
        match self.component(mask) {
            Some(c) => ComplexMatrix::from_row_major(self.n, c.to_vec()),
            None => ComplexMatrix::zeros(self.n),
        }
    }

    fn slot_mut(&mut self, mask: Mask) -> &mut [C64] {
        self.check_mask(mask);
        self.present |= 1u128 << mask;
        let b = self.block();
        &mut self.data[mask as usize * b..(mask as usize + 1) * b]
    }

    pub fn set_component(&mut self, mask: Mask, a: &ComplexMatrix) {
        assert_eq!(a.size(), self.n, "matrix size mismatch");
        self.slot_mut(mask).copy_from_slice(a.as_slice());
    }

    pub fn add_to_component(&mut self, mask: Mask, a: &ComplexMatrix, factor: C64) {
        assert_eq!(a.size(), self.n, "matrix size mismatch");
        for (d, s) in self.slot_mut(mask).iter_mut().zip(a.as_slice()) {
            *d += factor * s;
        }
    }

    /// Top-degree coefficient of a scalar form (0 when absent).
    pub fn top(&self) -> C64 {
        self.scalar_component((1 << self.dim) - 1)
    }

    /// Coefficient of a scalar (N = 1) form on the given multi-index.
    pub fn scalar_component(&self, mask: Mask) -> C64 {
        assert_eq!(self.n, 1, "scalar component requested from a matrix-valued form");
        self.component(mask).map_or(ZERO, |c| c[0])
    }

    /// Degrees that carry a stored component.
    pub fn degrees(&self) -> Vec<usize> {
        let mut seen = vec![false; self.dim + 1];
        for s in self.masks() {
            seen[degree_of(s)] = true;
        }
        (0..=self.dim).filter(|&k| seen[k]).collect()
    }

    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.masks().all(|s| degree_of(s) == k)
    }

    /// Degree-`k` part.
    pub fn degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim, self.n);
        let b = self.block();
        for s in self.masks().filter(|&s| degree_of(s) == k) {
            out.slot_mut(s).copy_from_slice(&self.data[s as usize * b..(s as usize + 1) * b]);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise difference over all components.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.dim, self.n), (other.dim, other.n), "form shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self, op: &str) -> Result<()> {
        if self.dim != other.dim || self.n != other.n {
            return Err(contract(format!(
                "{op}: operands differ (chart dim {} vs {}, matrix size {} vs {})",
                self.dim, other.dim, self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            n: self.n,
            present: self.present | other.present,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: C64, other: &Self) -> Result<()> {
        self.check_compatible(other, "axpy")?;
        self.present |= other.present;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            n: self.n,
            present: self.present,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Multiplies each degree-`k` component by `f(k)`.
    pub fn scale_by_degree(&self, f: impl Fn(usize) -> C64) -> Self {
        let mut out = self.clone();
        let b = self.block();
        let factors: Vec<C64> = (0..=self.dim).map(f).collect();
        for s in self.masks() {
            let c = factors[degree_of(s)];
            for z in &mut out.data[s as usize * b..(s as usize + 1) * b] {
                *z *= c;
            }
        }
        out
    }

    /// Applies `f` to every coefficient matrix, keeping the degree structure.
    pub fn map_coefficients(&self, m: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut out = Self::zero(self.dim, m);
        for s in self.masks() {
            let c = f(&self.component_matrix(s));
            assert_eq!(c.size(), m, "coefficient map returned the wrong size");
            out.set_component(s, &c);
        }
        out
    }
}

/// `a ∧ b`: the coefficient on `K` is `Σ_{I ⊔ J = K} sign(I, J) a_I b_J`.
pub fn wedge(a: &GradedMatrixForm, b: &GradedMatrixForm) -> Result<GradedMatrixForm> {
    a.check_compatible(b, "wedge")?;
    let (n, blk) = (a.n, a.block());
    let mut out = GradedMatrixForm::zero(a.dim, n);
    let bm: Vec<Mask> = b.masks().collect();
    for i in a.masks() {
        let ai = &a.data[i as usize * blk..(i as usize + 1) * blk];
        for &j in bm.iter().filter(|&&j| i & j == 0) {
            let bj = &b.data[j as usize * blk..(j as usize + 1) * blk];
            let k = (i | j) as usize;
            out.present |= 1u128 << k;
            let sign = C64::from(shuffle_sign(i, j));
            matmul_acc(&mut out.data[k * blk..(k + 1) * blk], ai, bj, n, sign);
        }
    }
    Ok(out)
}

/// Left-folded wedge powers `w, w∧w, …, w^max` of a form.
/// Entry `m−1` holds `w^m`; powers beyond the chart dimension of a form
/// without degree-0 part are zero.
pub fn wedge_powers(w: &GradedMatrixForm, max: usize) -> Result<Vec<GradedMatrixForm>> {
    let mut out = Vec::with_capacity(max);
    if max == 0 {
        return Ok(out);
    }
    out.push(w.clone());
    for _ in 1..max {
        let next = wedge(out.last().expect("non-empty"), w)?;
        out.push(next);
    }
    Ok(out)
}

/// `w^m` for a homogeneous degree-1 form and odd `m`, evaluated as a left
/// fold. Returns the zero form when `m` exceeds the chart dimension.
pub fn power_odd(w: &GradedMatrixForm, m: usize) -> Result<GradedMatrixForm> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(contract(format!("power_odd: exponent {m} is not a positive odd integer")));
    }
    if !w.is_homogeneous(1) {
        return Err(contract("power_odd: form is not homogeneous of degree 1"));
    }
    if m > w.dim {
        return Ok(GradedMatrixForm::zero(w.dim, w.n));
    }
    let mut acc = w.clone();
    for _ in 1..m {
        acc = wedge(&acc, w)?;
    }
    Ok(acc)
}

/// Componentwise matrix trace; the result is scalar valued.
pub fn trace(w: &GradedMatrixForm) -> GradedMatrixForm {
    let mut out = GradedMatrixForm::zero(w.dim, 1);
    for s in w.masks() {
        let c = w.component(s).expect("present");
        let t: C64 = (0..w.n).map(|i| c[i * w.n + i]).sum();
        *out.slot_mut(s).first_mut().expect("1x1") = t;
    }
    out
}

/// Principal square root of `2πi`, i.e. `√(2π)·e^{iπ/4}`.
pub fn sqrt_2pi_i() -> C64 {
    C64::from_polar((2.0 * PI).sqrt(), FRAC_PI_4)
}

/// Scales each degree-`k` component by `(√(2πi))^{−k}`.
pub fn normalize_2pi(w: &GradedMatrixForm) -> GradedMatrixForm {
    let r = sqrt_2pi_i().inv();
    w.scale_by_degree(|k| r.powi(k as i32))
}

/// Terms `(s·w)^m / m!` for `m = 0..=dim`. Entry 0 is the identity.
pub fn nilpotent_exp_terms(w: &GradedMatrixForm, scale: C64) -> Result<Vec<GradedMatrixForm>> {
    if w.is_present(0) && w.component(0).expect("present").iter().any(|z| *z != ZERO) {
        return Err(contract(
            "nilpotent_exp: form has a nonzero degree-0 part; factor it out before exponentiating",
        ));
    }
    let sw = w.scale(scale);
    let mut terms = vec![GradedMatrixForm::identity(w.dim, w.n)];
    for m in 1..=w.dim {
        let next = wedge(terms.last().expect("non-empty"), &sw)?.scale(C64::from(1.0 / m as f64));
        terms.push(next);
    }
    Ok(terms)
}

/// `exp(s·w) = Σ_{m ≤ dim} (s·w)^m / m!`, exact because `w` has no
/// degree-0 part.
pub fn nilpotent_exp(w: &GradedMatrixForm, scale: C64) -> Result<GradedMatrixForm> {
    let terms = nilpotent_exp_terms(w, scale)?;
    let mut acc = GradedMatrixForm::zero(w.dim, w.n);
    for t in &terms {
        acc.axpy(ONE, t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, vec![a.into(), b.into(), c.into(), d.into()])
    }

    #[test]
    fn wedge_examples() {
        let a = m2(1.0, 2.0, 0.0, 1.0);
        let b = m2(0.0, 1.0, 3.0, 0.5);
        let ab = &a * &b;
        let x1a = GradedMatrixForm::monomial(2, &[0], &a);
        let x2a = GradedMatrixForm::monomial(2, &[1], &a);
        let x1b = GradedMatrixForm::monomial(2, &[0], &b);
        let x2b = GradedMatrixForm::monomial(2, &[1], &b);

        let w = wedge(&x1a, &x2b).unwrap();
        assert_eq!(w.component_matrix(0b11), ab);
        let w = wedge(&x2a, &x1b).unwrap();
        assert_eq!(w.component_matrix(0b11), -&ab);
        let w = wedge(&x1a, &x1b).unwrap();
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn wedge_rejects_mismatched_operands() {
        let a = GradedMatrixForm::identity(2, 2);
        let b = GradedMatrixForm::identity(3, 2);
        assert!(wedge(&a, &b).is_err());
        let c = GradedMatrixForm::identity(2, 3);
        assert!(wedge(&a, &c).is_err());
    }

    #[test]
    fn shuffle_signs() {
        assert_eq!(shuffle_sign(0b001, 0b010), 1.0);
        assert_eq!(shuffle_sign(0b010, 0b001), -1.0);
        assert_eq!(shuffle_sign(0b110, 0b001), 1.0);
        assert_eq!(shuffle_sign(0b100, 0b011), 1.0);
        assert_eq!(shuffle_sign(0b010, 0b101), -1.0);
    }

    #[test]
    fn power_odd_cases() {
        let a = m2(0.0, 1.0, -1.0, 0.0);
        let w = GradedMatrixForm::monomial(1, &[0], &a);
        assert_eq!(power_odd(&w, 1).unwrap(), w);
        let w3 = GradedMatrixForm::one_form(&[a.clone(), a.clone(), a.clone()]);
        assert_eq!(power_odd(&w3, 5).unwrap().max_abs(), 0.0);
        assert!(power_odd(&w3, 2).is_err());
        assert!(power_odd(&GradedMatrixForm::identity(3, 2), 1).is_err());
    }

    #[test]
    fn power_odd_matches_brute_force() {
        let mats = [m2(1.0, 2.0, 0.5, -1.0), m2(0.0, 1.0, 3.0, 0.5), m2(-2.0, 0.3, 1.0, 1.0)];
        let w = GradedMatrixForm::one_form(&mats);
        let got = power_odd(&w, 3).unwrap().component_matrix(0b111);
        let mut want = ComplexMatrix::zeros(2);
        let perms = [([0, 1, 2], 1.0), ([0, 2, 1], -1.0), ([1, 0, 2], -1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([2, 1, 0], -1.0)];
        for (p, sign) in perms {
            let prod = &(&mats[p[0]] * &mats[p[1]]) * &mats[p[2]];
            want += &prod.scale(C64::from(sign));
        }
        assert!(got.distance(&want) < 1e-14);
    }

    #[test]
    fn trace_examples() {
        let w = GradedMatrixForm::monomial(2, &[0], &ComplexMatrix::identity(3));
        assert_eq!(trace(&w).scalar_component(0b01), C64::from(3.0));
        assert_eq!(trace(&GradedMatrixForm::zero(2, 3)).max_abs(), 0.0);
        let a = m2(1.0, 7.0, 7.0, 4.0);
        let w = GradedMatrixForm::monomial(2, &[0, 1], &a);
        assert_eq!(trace(&w).top(), C64::from(5.0));
    }

    #[test]
    fn normalization_factors() {
        let mut w = GradedMatrixForm::zero(3, 1);
        let c = ComplexMatrix::scalar(1, C64::new(1.5, -0.5));
        w.set_component(0, &c);
        w.set_component(0b011, &c);
        w.set_component(0b001, &c);
        let n = normalize_2pi(&w);
        assert_eq!(n.scalar_component(0), c[(0, 0)]);
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        assert!((n.scalar_component(0b011) - c[(0, 0)] / two_pi_i).norm() < 1e-15);
        let s = sqrt_2pi_i();
        assert!((s * s - two_pi_i).norm() < 1e-14);
        assert!(s.re > 0.0 && s.im > 0.0);
        assert!((n.scalar_component(0b001) - c[(0, 0)] / s).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_exp_truncates_and_rejects_degree_zero() {
        let a = m2(0.0, 1.0, 1.0, 0.0);
        let w = GradedMatrixForm::one_form(&[a.clone(), a.clone(), a.clone()]);
        let terms = nilpotent_exp_terms(&w, C64::from(-1.0)).unwrap();
        assert_eq!(terms.len(), 4);
        assert_eq!(nilpotent_exp(&GradedMatrixForm::zero(2, 2), ONE).unwrap(), GradedMatrixForm::identity(2, 2));
        assert!(nilpotent_exp(&GradedMatrixForm::identity(2, 2), ONE).is_err());
    }

    #[test]
    fn nilpotent_exp_of_single_term_is_binomial() {
        // w = dx^1 ⊗ A + dx^2 ⊗ B with exp(s w) = 1 + s w + s²/2 dx^{12}(AB − BA).
        let a = m2(1.0, 2.0, 0.0, 1.0);
        let b = m2(0.0, 1.0, 3.0, 0.5);
        let w = GradedMatrixForm::one_form(&[a.clone(), b.clone()]);
        let s = C64::new(0.3, -1.1);
        let e = nilpotent_exp(&w, s).unwrap();
        let comm = &(&a * &b) - &(&b * &a);
        let want = comm.scale(s * s / 2.0);
        assert!(e.component_matrix(0b11).distance(&want) < 1e-14);
        assert!(e.component_matrix(0b01).distance(&a.scale(s)) < 1e-15);
    }
}
