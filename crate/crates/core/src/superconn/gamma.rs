//! Boundary integrals of `γ(T)`, their `T → ∞` limit in closed form, and the
//! cross-check against `deg*`.

use crate::error::Result;
use crate::forms::{power_odd, trace};
use crate::geometry::quadrature::gauss_legendre;
use crate::geometry::{converge, ChartedSphereDomain, ConvergenceRow, FormField, Ladder};
use crate::linalg::C64;
use crate::oddchern::{deg_star_with, deg_with, DegreeResult, MaurerCartanField, LADDER_TOLERANCE};

use super::forms::gamma_top_density;
use super::model::SuperBundleModel;

/// Upper end of the `t` integral.
pub const T_MAX: f64 = 8.0;

/// Gauss-Legendre nodes on `[0, T]`.
pub const T_NODES: usize = 200;

/// Required agreement between the `γ` limit and its closed form.
pub const TWO_PATH_TOLERANCE: f64 = 1e-7;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `∫_0^∞ t^{2n−1} e^{−t²} dt = (n−1)!/2`.
pub fn gaussian_moment(n: usize) -> f64 {
    assert!(n >= 1, "moment index starts at 1");
    factorial(n - 1) / 2.0
}

/// `∫_0^T t^{2n−1} e^{−t²} dt` by Gauss-Legendre.
pub fn gaussian_moment_quadrature(n: usize, t_max: f64, nodes: usize) -> f64 {
    let (t, w) = gauss_legendre(nodes, 0.0, t_max);
    t.iter().zip(&w).map(|(t, w)| w * t.powi(2 * n as i32 - 1) * (-t * t).exp()).sum()
}

/// `(2πi)^{−n}`.
fn two_pi_i_inv(n: usize) -> C64 {
    C64::new(0.0, std::f64::consts::TAU).powi(n as i32).inv()
}

/// `∫_0^T e^{−t²} (−t)^d/d! dt` with `d = 2n − 1`: the only `t`-dependence
/// of the top-degree part of the `γ` integrand.
fn t_weight(n: usize, t_max: f64, nodes: usize) -> f64 {
    if t_max == 0.0 {
        return 0.0;
    }
    -gaussian_moment_quadrature(n, t_max, nodes) / factorial(2 * n - 1)
}

/// The model itself when `v` is already unitary on the nodes, otherwise its
/// polar unitarization.
fn unitarized(model: &SuperBundleModel) -> Result<SuperBundleModel> {
    if model.is_unitarized() {
        return Ok(model.clone());
    }
    match model.clone().assume_unitary() {
        Ok(m) => Ok(m),
        Err(_) => model.clone().unitarized(),
    }
}

/// `(2πi)^{−n} ∫_{∂N} Tr_s(V (dV)^{2n−1})` with the resolution ladder.
fn spatial_integral(model: &SuperBundleModel, ladder: Ladder) -> Result<crate::geometry::Converged> {
    model.require_unitarized("the γ integral")?;
    let scale = two_pi_i_inv(model.n());
    converge(model.domain(), ladder, |d: &ChartedSphereDomain| {
        let m = model.with_domain(d.clone());
        Ok(d.integrate_coordinate_density(|theta| gamma_top_density(&m, theta))? * scale)
    })
}

#[derive(Debug, Clone)]
pub struct TRow {
    pub nodes: usize,
    pub value: C64,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GammaIntegral {
    pub t_max: f64,
    pub value: C64,
    /// `t` quadrature at half and full node count.
    pub t_table: Vec<TRow>,
    pub spatial: Vec<ConvergenceRow>,
    pub converged: bool,
}

fn assemble(model: &SuperBundleModel, spatial: &crate::geometry::Converged, t_max: f64, t_nodes: usize) -> GammaIntegral {
    let n = model.n();
    let mut t_table: Vec<TRow> = Vec::new();
    for nodes in [(t_nodes / 2).max(1), t_nodes] {
        let value = spatial.value * t_weight(n, t_max, nodes);
        let delta = t_table.last().map(|r| (value - r.value).norm());
        t_table.push(TRow { nodes, value, delta });
    }
    let t_ok = t_table.last().and_then(|r| r.delta).is_some_and(|d| d < 1e-12);
    GammaIntegral {
        t_max,
        value: t_table.last().expect("two rows").value,
        t_table,
        spatial: spatial.table.clone(),
        converged: spatial.converged && t_ok,
    }
}

/// `∫_0^T dt ∫_{∂N} γ_t` with `t_nodes` Gauss-Legendre nodes.
///
/// At top degree the integrand is `e^{−t²}(−t)^d/d!` times a `t`-independent
/// form, so the double integral is evaluated as the product of the
/// one-dimensional `t` quadrature and one spatial integral.
pub fn gamma_boundary_integral(model: &SuperBundleModel, t_max: f64, t_nodes: usize) -> Result<GammaIntegral> {
    let model = unitarized(model)?;
    let spatial = spatial_integral(&model, Ladder::new(LADDER_TOLERANCE))?;
    Ok(assemble(&model, &spatial, t_max, t_nodes))
}

/// `(2πi)^{−n} · (−1)^n (n−1)!/(2n−1)! · ∫ Tr (v⁻¹dv)^{2n−1}`: the `T → ∞`
/// limit with the Gaussian moment done analytically.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub value: C64,
    pub convergence: Vec<ConvergenceRow>,
    pub converged: bool,
}

pub fn gamma_closed_form(model: &SuperBundleModel) -> Result<ClosedForm> {
    let model = unitarized(model)?;
    let n = model.n();
    let d = 2 * n - 1;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // −1/d! from the exponential, 2(−1)^{n−1} from the supertrace, and the moment.
    let factor = two_pi_i_inv(n) * (sign * 2.0 * gaussian_moment(n) / factorial(d));
    let conv = converge(model.domain(), Ladder::new(LADDER_TOLERANCE), |dom| {
        let omega = MaurerCartanField::new(dom.chart(), model.v().clone());
        Ok(dom.integrate_coordinate_density(|theta| Ok(trace(&power_odd(&omega.eval(theta)?, d)?).top()))? * factor)
    })?;
    Ok(ClosedForm {
        value: conv.value,
        convergence: conv.table,
        converged: conv.converged,
    })
}

/// `deg*(v)` on a boundary model (product orientation), `deg(v)` on a point
/// model.
pub fn model_degree(model: &SuperBundleModel) -> Result<DegreeResult> {
    let domain = model.domain().clone().with_orientation(1.0);
    let ladder = Ladder::new(LADDER_TOLERANCE);
    if model.is_point() {
        deg_with(model.v().clone(), &domain, ladder)
    } else {
        deg_star_with(model.v().clone(), &domain, ladder)
    }
}

/// `γ`-limit predicted by the degree: `(−1)^n deg*` on a boundary model,
/// `(−1)^{n+1} deg` on a point model.
pub fn predicted_limit(model: &SuperBundleModel, degree: C64) -> C64 {
    let odd = (model.n() + usize::from(model.is_point())) % 2 == 1;
    if odd {
        -degree
    } else {
        degree
    }
}

#[derive(Debug, Clone)]
pub struct GammaReport {
    pub t_values: Vec<f64>,
    pub boundary_integrals: Vec<C64>,
    /// Value at the largest `T`.
    pub extrapolated_limit: C64,
    pub limit_integral: GammaIntegral,
    pub closed_form: ClosedForm,
    pub deg_star_value: DegreeResult,
    /// `(−1)^n deg*` (or `(−1)^{n+1} deg` for a point model).
    pub predicted: C64,
}

impl GammaReport {
    pub fn closed_form_value(&self) -> C64 {
        self.closed_form.value
    }

    /// `|γ-limit − closed form|`.
    pub fn two_path_difference(&self) -> f64 {
        (self.extrapolated_limit - self.closed_form.value).norm()
    }

    /// `|closed form − predicted|`.
    pub fn degree_difference(&self) -> f64 {
        (self.closed_form.value - self.predicted).norm()
    }

    pub fn converged(&self) -> bool {
        self.limit_integral.converged && self.closed_form.converged && self.deg_star_value.converged
    }

    pub fn agrees(&self) -> bool {
        self.two_path_difference() < TWO_PATH_TOLERANCE && self.degree_difference() < TWO_PATH_TOLERANCE
    }
}

/// `∫_{∂N} γ(T)` at each requested `T`, the closed form and the degree.
///
/// The `γ` paths run on the unitarized model; the degree is evaluated on the
/// given `v`.
pub fn gamma_report(model: &SuperBundleModel, t_values: &[f64]) -> Result<GammaReport> {
    gamma_report_with(model, t_values, T_NODES)
}

pub fn gamma_report_with(model: &SuperBundleModel, t_values: &[f64], t_nodes: usize) -> Result<GammaReport> {
    let unit = unitarized(model)?;
    let spatial = spatial_integral(&unit, Ladder::new(LADDER_TOLERANCE))?;
    let integrals: Vec<GammaIntegral> = t_values.iter().map(|&t| assemble(&unit, &spatial, t, t_nodes)).collect();
    let t_last = t_values.iter().copied().fold(T_MAX, f64::max);
    let limit_integral = assemble(&unit, &spatial, t_last, t_nodes);
    let closed_form = gamma_closed_form(&unit)?;
    let deg_star_value = model_degree(model)?;
    Ok(GammaReport {
        t_values: t_values.to_vec(),
        boundary_integrals: integrals.iter().map(|g| g.value).collect(),
        extrapolated_limit: limit_integral.value,
        limit_integral,
        closed_form,
        predicted: predicted_limit(model, deg_star_value.value),
        deg_star_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::integrate_top;
    use crate::oddchern::{generator, GeneratorKind};

    #[test]
    fn gaussian_moments() {
        for n in 1..=3 {
            let exact = factorial(n - 1);
            assert!((2.0 * gaussian_moment(n) - exact).abs() < 1e-15);
            assert!((2.0 * gaussian_moment_quadrature(n, T_MAX, T_NODES) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn factorized_t_integral_matches_slices() {
        let h = generator(GeneratorKind::Su2Identity, 2);
        let domain = ChartedSphereDomain::with_resolution(crate::geometry::Chart::Sphere(3), vec![8, 8, 8]);
        let model = SuperBundleModel::point(&domain, h).unwrap().assume_unitary().unwrap();
        let spatial = domain.integrate_coordinate_density(|th| gamma_top_density(&model, th)).unwrap() * two_pi_i_inv(2);
        let (t, w) = gauss_legendre(40, 0.0, 3.0);
        let mut sliced = C64::from(0.0);
        for (t, w) in t.iter().zip(&w) {
            let field = super::super::forms::gamma_integrand(&model, *t).unwrap();
            sliced += integrate_top(&field, &domain).unwrap() * *w;
        }
        let factored = spatial * t_weight(2, 3.0, 40);
        assert!((sliced - factored).norm() < 1e-12, "{sliced} vs {factored}");
    }

    #[test]
    fn point_model_limits() {
        let h = generator(GeneratorKind::Su2Identity, 2);
        let model = SuperBundleModel::point(&ChartedSphereDomain::sphere(3), h)
            .unwrap()
            .assume_unitary()
            .unwrap();
        let report = gamma_report(&model, &[0.0, 6.0, 8.0]).unwrap();
        assert_eq!(report.boundary_integrals[0], C64::from(0.0));
        assert!((report.boundary_integrals[2] - report.boundary_integrals[1]).norm() < 1e-12);
        assert!(report.agrees(), "{report:?}");
        assert!(report.converged());
        // deg = −1 on S^3 and n = 2, so the limit is (−1)^3 · (−1) = 1.
        assert!((report.extrapolated_limit - C64::from(1.0)).norm() < 1e-9);
    }
}
