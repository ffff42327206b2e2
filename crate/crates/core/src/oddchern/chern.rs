//! Maurer-Cartan forms, the odd Chern character, Chern-Simons forms and the
//! transgression form.

use std::sync::Arc;

use super::generators::HomotopyFamily;
use crate::error::Result;
use crate::forms::{nilpotent_exp, trace, wedge, wedge_powers, GradedMatrixForm};
use crate::geometry::quadrature::gauss_legendre;
use crate::geometry::{Chart, Dual, ExteriorDerivative, FormField, MatrixMap};
use crate::linalg::{ComplexMatrix, C64, ONE};

/// Default invertibility threshold on the smallest singular value.
pub const MIN_SIGMA: f64 = 1e-8;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Coefficient `(−1)^k k!/(2k+1)!` of `Tr ω^{2k+1}` in `Ch`.
pub fn odd_chern_coefficient(k: usize) -> f64 {
    let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    s * factorial(k) / factorial(2 * k + 1)
}

/// Coefficient `(−1)^k k!/(2k)!` of `Tr(g⁻¹ġ ω^{2k})` in the transgression
/// form.
pub fn transgression_coefficient(k: usize) -> f64 {
    let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    s * factorial(k) / factorial(2 * k)
}

fn location(theta: &[f64]) -> String {
    let coords: Vec<String> = theta.iter().map(|t| format!("{t:.6}")).collect();
    format!("chart point ({})", coords.join(", "))
}

/// `ω = g⁻¹dg` with coefficient `g⁻¹ ∂g/∂θ_i` on `dθ_i`.
#[derive(Clone)]
pub struct MaurerCartanField {
    pub chart: Chart,
    pub map: Arc<dyn MatrixMap>,
    pub min_sigma: f64,
}

impl MaurerCartanField {
    pub fn new(chart: Chart, map: Arc<dyn MatrixMap>) -> Self {
        assert_eq!(map.source_ambient(), chart.ambient_dim(), "map lives on a different space");
        Self {
            chart,
            map,
            min_sigma: MIN_SIGMA,
        }
    }

    /// `g⁻¹` and `ω` at a chart point.
    pub fn eval_with_inverse(&self, theta: &[f64]) -> Result<(ComplexMatrix, GradedMatrixForm)> {
        let (g, partials) = self.chart.matrix_partials(self.map.as_ref(), theta);
        let ginv = g.checked_inverse(self.min_sigma, || location(theta))?;
        let coeffs: Vec<ComplexMatrix> = partials.iter().map(|p| &ginv * p).collect();
        Ok((ginv, GradedMatrixForm::one_form(&coeffs)))
    }
}

impl FormField for MaurerCartanField {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn matrix_size(&self) -> usize {
        self.map.size()
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        Ok(self.eval_with_inverse(theta)?.1)
    }
}

/// `Σ_k (−1)^k k!/(2k+1)! Tr(ω^{2k+1})` for a degree-1 matrix form.
pub fn odd_chern_of(omega: &GradedMatrixForm) -> Result<GradedMatrixForm> {
    let d = omega.dim();
    let powers = wedge_powers(omega, d)?;
    let mut out = GradedMatrixForm::zero(d, 1);
    for k in 0..=(d - 1) / 2 {
        out.axpy(C64::from(odd_chern_coefficient(k)), &trace(&powers[2 * k]))?;
    }
    Ok(out)
}

/// The odd Chern character `Ch(g)`.
#[derive(Clone)]
pub struct OddChernField {
    pub omega: MaurerCartanField,
}

impl OddChernField {
    pub fn new(chart: Chart, map: Arc<dyn MatrixMap>) -> Self {
        Self {
            omega: MaurerCartanField::new(chart, map),
        }
    }
}

impl FormField for OddChernField {
    fn chart(&self) -> Chart {
        self.omega.chart
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        odd_chern_of(&self.omega.eval(theta)?)
    }
}

/// Default number of Gauss-Legendre nodes in the interpolation parameter.
/// The integrand is a polynomial of degree below the chart dimension in `u`,
/// so this is exact for every supported dimension.
pub const CS_U_NODES: usize = 8;

/// `cs(d + A_0, d + A_1) = ∫_0^1 Tr((A_1 − A_0) e^{F_u}) du` with
/// `A_u = A_0 + u(A_1 − A_0)` and `F_u = dA_u + A_u ∧ A_u`.
///
/// The exponent sign is the one for which `cs(d, d + g⁻¹dg) = Ch(g)`:
/// with `A_u = uω` one has `F_u = (u² − u) ω²`, and
/// `∫_0^1 (u² − u)^k du = (−1)^k (k!)²/(2k+1)!` turns `Tr(ω e^{F_u})` into the
/// series of [`odd_chern_of`].
#[derive(Clone)]
pub struct ChernSimonsField {
    pub conn0: Arc<dyn FormField>,
    pub conn1: Arc<dyn FormField>,
    d_conn0: ExteriorDerivative,
    d_conn1: ExteriorDerivative,
    u_nodes: Vec<f64>,
    u_weights: Vec<f64>,
}

impl ChernSimonsField {
    pub fn new(conn0: Arc<dyn FormField>, conn1: Arc<dyn FormField>, u_nodes: usize) -> Self {
        assert_eq!(conn0.chart(), conn1.chart(), "connections on different charts");
        assert_eq!(conn0.matrix_size(), conn1.matrix_size(), "connections on different bundles");
        let (u_nodes, u_weights) = gauss_legendre(u_nodes, 0.0, 1.0);
        Self {
            d_conn0: ExteriorDerivative::new(conn0.clone()),
            d_conn1: ExteriorDerivative::new(conn1.clone()),
            conn0,
            conn1,
            u_nodes,
            u_weights,
        }
    }
}

impl FormField for ChernSimonsField {
    fn chart(&self) -> Chart {
        self.conn0.chart()
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let a0 = self.conn0.eval(theta)?;
        let a1 = self.conn1.eval(theta)?;
        let da0 = self.d_conn0.eval(theta)?;
        let da1 = self.d_conn1.eval(theta)?;
        let diff = a1.sub(&a0)?;
        let ddiff = da1.sub(&da0)?;
        let mut out = GradedMatrixForm::zero(a0.dim(), 1);
        for (&u, &w) in self.u_nodes.iter().zip(&self.u_weights) {
            let mut au = a0.clone();
            au.axpy(C64::from(u), &diff)?;
            let mut fu = da0.clone();
            fu.axpy(C64::from(u), &ddiff)?;
            fu.axpy(ONE, &wedge(&au, &au)?)?;
            let integrand = trace(&wedge(&diff, &nilpotent_exp(&fu, ONE)?)?);
            out.axpy(C64::from(w), &integrand)?;
        }
        Ok(out)
    }
}

/// The zero connection `A = 0` (the trivial connection `d`).
#[derive(Clone, Copy)]
pub struct TrivialConnection {
    pub chart: Chart,
    pub n: usize,
}

impl FormField for TrivialConnection {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn matrix_size(&self) -> usize {
        self.n
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        Ok(GradedMatrixForm::zero(theta.len(), self.n))
    }
}

/// `Ch(g_t)` and `C̃h(g_t) = Σ_k (−1)^k k!/(2k)! Tr(g_t⁻¹ ġ_t ω_t^{2k})`
/// at a fixed time.
#[derive(Clone)]
pub struct TransgressionPair {
    pub chart: Chart,
    pub family: Arc<dyn HomotopyFamily>,
    pub t: f64,
}

impl TransgressionPair {
    fn slice(&self) -> MaurerCartanField {
        MaurerCartanField::new(
            self.chart,
            Arc::new(super::generators::Slice {
                family: self.family.clone(),
                t: self.t,
            }),
        )
    }

    pub fn chern(&self) -> OddChernField {
        OddChernField { omega: self.slice() }
    }

    pub fn chern_tilde(&self) -> TransgressionField {
        TransgressionField {
            omega: self.slice(),
            family: self.family.clone(),
            t: self.t,
        }
    }
}

/// Builds the pair `(Ch(g_t), C̃h(g_t))`.
pub fn transgression_pair(chart: Chart, family: Arc<dyn HomotopyFamily>, t: f64) -> (OddChernField, TransgressionField) {
    let pair = TransgressionPair { chart, family, t };
    (pair.chern(), pair.chern_tilde())
}

/// `C̃h(g_t)`; even-degree scalar form.
#[derive(Clone)]
pub struct TransgressionField {
    omega: MaurerCartanField,
    family: Arc<dyn HomotopyFamily>,
    t: f64,
}

impl FormField for TransgressionField {
    fn chart(&self) -> Chart {
        self.omega.chart
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let (ginv, omega) = self.omega.eval_with_inverse(theta)?;
        let d = theta.len();
        let x: Vec<Dual> = self.omega.chart.embed(theta).into_iter().map(Dual::constant).collect();
        let gdot = self.family.value_dual(Dual::new(self.t, 1.0), &x).tangent;
        let lead = GradedMatrixForm::scalar(d, ginv.size(), C64::from(0.0));
        let mut lead = lead;
        lead.set_component(0, &(&ginv * &gdot));
        let powers = wedge_powers(&omega, d)?;
        let mut out = trace(&lead);
        for k in 1..=d / 2 {
            let term = trace(&wedge(&lead, &powers[2 * k - 1])?);
            out.axpy(C64::from(transgression_coefficient(k)), &term)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_coefficients() {
        assert_eq!(odd_chern_coefficient(0), 1.0);
        assert!((odd_chern_coefficient(1) + 1.0 / 6.0).abs() < 1e-16);
        assert!((odd_chern_coefficient(2) - 2.0 / 120.0).abs() < 1e-16);
        assert_eq!(transgression_coefficient(0), 1.0);
        assert!((transgression_coefficient(1) + 0.5).abs() < 1e-16);
    }
}
