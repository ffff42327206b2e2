//! Chern character of the super-connection `A_T = d + T·V` and the
//! transgression integrand `γ`.
//!
//! With `V = [[0, v*], [v, 0]]` on `E_+ ⊕ E_−` and `v` unitary, `V² = Id`,
//! so `A_T² = T² + T·dV` and `e^{−A_T²} = e^{−T²} exp(−T·dV)` with an exact
//! nilpotent exponential. Form coefficients are multiplied as block
//! matrices with the wedge sign only.

use crate::error::Result;
use crate::forms::{nilpotent_exp, normalize_2pi, sqrt_2pi_i, supertrace, wedge, wedge_powers, GradedMatrixForm};
use crate::geometry::{Chart, FormField};
use crate::linalg::{ComplexMatrix, C64};

use super::model::SuperBundleModel;

fn odd_block(v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.size();
    let vh = v.adjoint();
    ComplexMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) => vh[(i, j - n)],
        (false, true) => v[(i - n, j)],
        _ => C64::from(0.0),
    })
}

/// `V` as a degree-0 form and `dV` as a degree-1 form at a chart point.
pub fn odd_endomorphism(model: &SuperBundleModel, theta: &[f64]) -> (GradedMatrixForm, GradedMatrixForm) {
    let chart = model.chart();
    let (v, partials) = chart.matrix_partials(model.v().as_ref(), theta);
    let big_v = odd_block(&v);
    let dv: Vec<ComplexMatrix> = partials.iter().map(odd_block).collect();
    let mut v_form = GradedMatrixForm::zero(chart.dim(), big_v.size());
    v_form.set_component(0, &big_v);
    (v_form, GradedMatrixForm::one_form(&dv))
}

/// `ch(E, A_T) = e^{−T²} φ(Tr_s exp(−T·dV))`, where `φ` scales degree `2j`
/// by `(2πi)^{−j}`.
#[derive(Clone)]
pub struct SuperChernField {
    model: SuperBundleModel,
    t: f64,
}

/// Requires a unitarized model.
pub fn superconn_chern_form(model: &SuperBundleModel, t: f64) -> Result<SuperChernField> {
    model.require_unitarized("ch(E, A_T)")?;
    Ok(SuperChernField {
        model: model.clone(),
        t,
    })
}

impl FormField for SuperChernField {
    fn chart(&self) -> Chart {
        self.model.chart()
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let (_, dv) = odd_endomorphism(&self.model, theta);
        let e = nilpotent_exp(&dv, C64::from(-self.t))?;
        Ok(normalize_2pi(&supertrace(&e)?).scale(C64::from((-self.t * self.t).exp())))
    }
}

/// `γ` integrand at time `t`:
/// `e^{−t²} (2πi)^{−1/2} φ(Tr_s(V exp(−t·dV)))`.
#[derive(Clone)]
pub struct GammaField {
    model: SuperBundleModel,
    t: f64,
}

/// Requires a unitarized model.
pub fn gamma_integrand(model: &SuperBundleModel, t: f64) -> Result<GammaField> {
    model.require_unitarized("the γ integrand")?;
    Ok(GammaField {
        model: model.clone(),
        t,
    })
}

impl FormField for GammaField {
    fn chart(&self) -> Chart {
        self.model.chart()
    }
    fn matrix_size(&self) -> usize {
        1
    }
    fn eval(&self, theta: &[f64]) -> Result<GradedMatrixForm> {
        let (v, dv) = odd_endomorphism(&self.model, theta);
        let e = nilpotent_exp(&dv, C64::from(-self.t))?;
        let s = supertrace(&wedge(&v, &e)?)?;
        let scale = C64::from((-self.t * self.t).exp()) / sqrt_2pi_i();
        Ok(normalize_2pi(&s).scale(scale))
    }
}

/// `Tr_s(V (dV)^m)` for `m = 1..=dim` (entry `m − 1`), without any
/// normalization. Every `t`-dependence of the `γ` integrand sits in the
/// scalar weights `e^{−t²}(−t)^m/m!` in front of these forms.
pub fn gamma_series(model: &SuperBundleModel, theta: &[f64]) -> Result<Vec<GradedMatrixForm>> {
    let (v, dv) = odd_endomorphism(model, theta);
    wedge_powers(&dv, model.chart().dim())?
        .iter()
        .map(|p| supertrace(&wedge(&v, p)?))
        .collect()
}

/// Top-degree coefficient of [`gamma_series`]: `Tr_s(V (dV)^d)` with
/// `d = 2n − 1`.
pub fn gamma_top_density(model: &SuperBundleModel, theta: &[f64]) -> Result<C64> {
    let (v, dv) = odd_endomorphism(model, theta);
    let d = model.chart().dim();
    let powers = wedge_powers(&dv, d)?;
    Ok(supertrace(&wedge(&v, &powers[d - 1])?)?.top())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{power_odd, trace};
    use crate::geometry::ChartedSphereDomain;
    use crate::oddchern::{generator, GeneratorKind, MaurerCartanField};
    use std::sync::Arc;

    fn su2_model() -> SuperBundleModel {
        let h = generator(GeneratorKind::Su2Identity, 2);
        SuperBundleModel::point(&ChartedSphereDomain::sphere(3), h)
            .unwrap()
            .assume_unitary()
            .unwrap()
    }

    #[test]
    fn supertrace_reduces_to_odd_traces() {
        // Tr_s(V (dV)^{2j+1}) = 2 (−1)^j Tr ω^{2j+1} for unitary v.
        let model = su2_model();
        let theta = [0.8, 1.3, 5.0];
        let series = gamma_series(&model, &theta).unwrap();
        let omega = MaurerCartanField::new(model.chart(), model.v().clone()).eval(&theta).unwrap();
        for (j, m) in [(0usize, 1usize), (1, 3)] {
            let expected = trace(&power_odd(&omega, m).unwrap()).scale(C64::from(2.0 * (-1f64).powi(j as i32)));
            assert!(series[m - 1].distance(&expected) < 1e-12);
        }
        // even powers have vanishing supertrace
        assert!(series[1].max_abs() < 1e-12);
    }

    #[test]
    fn gamma_vanishes_at_zero_and_in_even_degrees() {
        let model = su2_model();
        let theta = [0.8, 1.3, 5.0];
        let g0 = gamma_integrand(&model, 0.0).unwrap().eval(&theta).unwrap();
        assert!(g0.max_abs() < 1e-15);
        let g = gamma_integrand(&model, 1.3).unwrap().eval(&theta).unwrap();
        for k in [0, 2] {
            assert!(g.degree_part(k).max_abs() < 1e-12);
        }
        assert!(g.degree_part(3).max_abs() > 1e-3);
    }

    #[test]
    fn chern_form_vanishes_on_unitary_models() {
        let model = su2_model();
        for t in [0.0, 0.5, 2.0] {
            let ch = superconn_chern_form(&model, t).unwrap().eval(&[0.3, 2.0, 1.0]).unwrap();
            assert!(ch.max_abs() < 1e-12, "{ch:?}");
        }
    }

    #[test]
    fn requires_unitarized_models() {
        let h = generator(GeneratorKind::Su2Identity, 2);
        let m = SuperBundleModel::point(&ChartedSphereDomain::sphere(3), Arc::clone(&h)).unwrap();
        assert!(gamma_integrand(&m, 1.0).is_err());
        assert!(superconn_chern_form(&m, 1.0).is_err());
    }
}
