//! Form fields: forms that can be evaluated at any chart point.

use std::sync::Arc;

use super::chart::{sphere_volume, Chart, ChartedSphereDomain};
use super::dual::Dual;
use super::maps::PointMap;
use super::numdiff::richardson;
use crate::error::Result;
use crate::forms::{pullback_form, wedge, GradedMatrixForm, Mask};
use crate::linalg::{ComplexMatrix, C64};

/// A matrix-valued form depending smoothly on the chart point.
pub trait FormField: Send + Sync {
    fn chart(&self) -> Chart;
    fn matrix_size(&self) -> usize;
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm>;
}

type FieldFn = dyn Fn(&[f64]) -> Result<GradedMatrixForm> + Send + Sync;

/// Field defined by a closure.
#[derive(Clone)]
pub struct FnField {
    chart: Chart,
    n: usize,
    f: Arc<FieldFn>,
}

impl FnField {
    pub fn new(
        chart: Chart,
        n: usize,
        f: impl Fn(&[f64]) -> Result<GradedMatrixForm> + Send + Sync + 'static,
    ) -> Self {
        Self { chart, n, f: Arc::new(f) }
    }
}

impl FormField for FnField {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn matrix_size(&self) -> usize {
        self.n
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        (self.f)(theta)
    }
}

/// Coordinate exterior derivative of a field, by Richardson-extrapolated
/// central differences of its coefficients.
#[derive(Clone)]
pub struct ExteriorDerivative {
    pub inner: Arc<dyn FormField>,
}

impl ExteriorDerivative {
    pub fn new(inner: Arc<dyn FormField>) -> Self {
        Self { inner }
    }
}

impl FormField for ExteriorDerivative {
    fn chart(&self) -> Chart {
        self.inner.chart()
    }
    fn matrix_size(&self) -> usize {
        self.inner.matrix_size()
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let d = theta.len();
        let n = self.matrix_size();
        let mut out = GradedMatrixForm::zero(d, n);
        // The derivative of a coefficient that is absent at θ may still be
        // nonzero, so every multi-index is differentiated.
        let all: Vec<Mask> = (0..(1u32 << d)).collect();
        for i in 0..d {
            let mut shifted = theta.to_vec();
            let mut failure = None;
            let partial = richardson(
                |s| {
                    shifted[i] = s;
                    match self.inner.eval(&shifted) {
                        Ok(f) => all.iter().flat_map(|&m| f.component_matrix(m).into_vec()).collect(),
                        Err(e) => {
                            failure.get_or_insert(e);
                            vec![C64::from(f64::NAN); all.len() * n * n]
                        }
                    }
                },
                theta[i],
            );
            if let Some(e) = failure {
                return Err(e);
            }
            for &m in all.iter().filter(|&&m| m & (1 << i) == 0) {
                // dx^i ∧ dx^I = (−1)^{#{j ∈ I : j < i}} dx^{I ∪ {i}}
                let sign = if (m & ((1 << i) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let block = &partial[m as usize * n * n..(m as usize + 1) * n * n];
                if block.iter().all(|z| *z == C64::from(0.0)) {
                    continue;
                }
                let coeff = ComplexMatrix::from_row_major(n, block.to_vec());
                out.add_to_component(m | (1 << i), &coeff, C64::from(sign));
            }
        }
        Ok(out)
    }
}

/// Wedge product of two fields on the same chart.
#[derive(Clone)]
pub struct WedgeField {
    pub left: Arc<dyn FormField>,
    pub right: Arc<dyn FormField>,
}

impl FormField for WedgeField {
    fn chart(&self) -> Chart {
        self.left.chart()
    }
    fn matrix_size(&self) -> usize {
        self.left.matrix_size()
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        wedge(&self.left.eval(theta)?, &self.right.eval(theta)?)
    }
}

/// A form on an ambient Euclidean space `R^a`, with coefficients depending
/// on the ambient point.
pub trait AmbientForm: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn matrix_size(&self) -> usize;
    fn eval(&self, y: &[f64]) -> GradedMatrixForm;
}

/// Normalized volume form of `S^m` extended to `R^{m+1}`:
/// `Σ_j (−1)^j x_j dx^0 ∧ ⋯ ∧ dx^j-hat ∧ ⋯ ∧ dx^m / Vol(S^m)`.
#[derive(Debug, Clone, Copy)]
pub struct AmbientVolumeForm {
    pub m: usize,
}

impl AmbientForm for AmbientVolumeForm {
    fn ambient_dim(&self) -> usize {
        self.m + 1
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, y: &[f64]) -> GradedMatrixForm {
        let a = self.m + 1;
        let full: Mask = (1 << a) - 1;
        let vol = sphere_volume(self.m);
        let mut out = GradedMatrixForm::zero(a, 1);
        for (j, &yj) in y.iter().enumerate().take(a) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out.set_component(full & !(1 << j), &ComplexMatrix::scalar(1, C64::from(sign * yj / vol)));
        }
        out
    }
}

type AmbientFn = dyn Fn(&[f64]) -> GradedMatrixForm + Send + Sync;

/// Ambient form given by a closure.
#[derive(Clone)]
pub struct FnAmbientForm {
    pub dim: usize,
    pub n: usize,
    pub f: Arc<AmbientFn>,
}

impl FnAmbientForm {
    pub fn new(dim: usize, n: usize, f: impl Fn(&[f64]) -> GradedMatrixForm + Send + Sync + 'static) -> Self {
        Self { dim, n, f: Arc::new(f) }
    }
}

impl AmbientForm for FnAmbientForm {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn matrix_size(&self) -> usize {
        self.n
    }
    fn eval(&self, y: &[f64]) -> GradedMatrixForm {
        (self.f)(y)
    }
}

/// Pullback of an ambient form to the chart, optionally through a point map:
/// `(F ∘ embed)^* w` with `F` the identity when no map is given.
#[derive(Clone)]
pub struct PullbackField {
    pub chart: Chart,
    pub map: Option<Arc<dyn PointMap>>,
    pub form: Arc<dyn AmbientForm>,
}

impl PullbackField {
    pub fn new(chart: Chart, map: Option<Arc<dyn PointMap>>, form: Arc<dyn AmbientForm>) -> Self {
        let target = map.as_ref().map_or(chart.ambient_dim(), |m| m.target_ambient());
        assert_eq!(target, form.ambient_dim(), "ambient form lives on the wrong space");
        Self { chart, map, form }
    }

    /// Image point and its chart Jacobian (row-major, target × dim).
    pub fn image_jacobian(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        image_jacobian(self.chart, self.map.as_deref(), theta)
    }
}

/// `F(embed(θ))` and `∂F(embed(θ))/∂θ` for an optional point map `F`.
pub fn image_jacobian(chart: Chart, map: Option<&dyn PointMap>, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = chart.dim();
    let y = match map {
        Some(m) => m.apply(&chart.embed(theta)),
        None => chart.embed(theta),
    };
    let a = y.len();
    let mut jac = vec![0.0; a * d];
    for i in 0..d {
        let xd = chart.embed(&Dual::seed_axis(theta, i));
        let yd = match map {
            Some(m) => m.apply_dual(&xd),
            None => xd,
        };
        for (r, v) in yd.iter().enumerate() {
            jac[r * d + i] = v.d;
        }
    }
    (y, jac)
}

impl FormField for PullbackField {
    fn chart(&self) -> Chart {
        self.chart
    }
    fn matrix_size(&self) -> usize {
        self.form.matrix_size()
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let (y, jac) = self.image_jacobian(theta);
        Ok(pullback_form(&self.form.eval(&y), &jac, self.chart.dim()))
    }
}

/// `∫_domain w` for a scalar field: the top-degree coefficient summed with
/// the quadrature weights and the domain orientation. Lower-degree parts are
/// ignored.
pub fn integrate_top(field: &dyn FormField, domain: &ChartedSphereDomain) -> Result<C64> {
    domain.check_dim(field.chart().dim(), "integrand")?;
    assert_eq!(field.chart(), domain.chart(), "field and domain use different charts");
    domain.integrate_coordinate_density(|theta| Ok(field.eval(theta)?.top()))
}
