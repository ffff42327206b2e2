//! The localization formula over a list of boundary models, the point
//! singularity case and the index wrapper.

use std::sync::Arc;

use crate::error::{contract, Error, Result};
use crate::geometry::{ChartedSphereDomain, MatrixMap};
use crate::linalg::C64;
use crate::oddchern::{DegreeResult, INTEGRALITY, LADDER_TOLERANCE};

use super::gamma::{gamma_report, model_degree, GammaReport, T_MAX};
use super::model::SuperBundleModel;

fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn check_models(models: &[SuperBundleModel], n: usize) -> Result<()> {
    if let Some(m) = models.iter().find(|m| m.n() != n) {
        return Err(contract(format!("model {} has n = {} but n = {n} was requested", m.describe(), m.n())));
    }
    if let Some(m) = models.iter().find(|m| m.is_point()) {
        return Err(contract(format!("{} is a point model; use the point case", m.describe())));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ModelSummary {
    pub description: String,
    pub gamma: GammaReport,
}

#[derive(Debug, Clone)]
pub struct LocalizeReport {
    pub n: usize,
    /// `(−1)^{n+1} Σ_i round(deg*(v_i))`.
    pub value: i64,
    /// `(−1)^{n+1} Σ_i deg*(v_i)` before rounding.
    pub deg_star_path: C64,
    /// `−Σ_i lim_T ∫ γ(T)`.
    pub gamma_path: C64,
    pub models: Vec<ModelSummary>,
}

impl LocalizeReport {
    pub fn difference(&self) -> f64 {
        (self.gamma_path - C64::from(self.value as f64)).norm()
    }

    pub fn converged(&self) -> bool {
        self.models.iter().all(|m| m.gamma.converged())
    }

    pub fn degrees_accepted(&self) -> bool {
        self.models.iter().all(|m| m.gamma.deg_star_value.accepted())
    }

    /// Per-model lines for error messages.
    pub fn diagnostics(&self) -> String {
        self.models
            .iter()
            .map(|m| {
                let d = &m.gamma.deg_star_value;
                format!(
                    "{}: deg* = {:.10} (Δ {:.2e}), γ-limit = {:.10} (Δ {:.2e})",
                    m.description,
                    d.value.re,
                    d.last_delta(),
                    m.gamma.extrapolated_limit.re,
                    m.gamma.limit_integral.spatial.last().and_then(|r| r.delta).unwrap_or(f64::INFINITY),
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// Fails on any unconverged or non-integral component, or when the two
    /// paths disagree by [`INTEGRALITY`] or more.
    pub fn check(&self) -> Result<()> {
        if !self.converged() {
            return Err(Error::Unconverged {
                what: format!("localization [{}]", self.diagnostics()),
                delta: self
                    .models
                    .iter()
                    .map(|m| m.gamma.deg_star_value.last_delta())
                    .fold(0.0, f64::max),
                tolerance: LADDER_TOLERANCE,
            });
        }
        if !self.degrees_accepted() {
            let worst = self.models.iter().map(|m| m.gamma.deg_star_value.residual).fold(0.0, f64::max);
            return Err(Error::NotIntegral {
                what: format!("localization [{}]", self.diagnostics()),
                value: self.deg_star_path.re,
                residual: worst,
                tolerance: INTEGRALITY,
            });
        }
        if !(self.difference() < INTEGRALITY) {
            return Err(Error::Mismatch {
                what: format!("localization deg* path vs γ path [{}]", self.diagnostics()),
                difference: self.difference(),
                tolerance: INTEGRALITY,
            });
        }
        Ok(())
    }
}

/// `(−1)^{n+1} Σ_i deg*(v_i)`, with `−Σ_i lim ∫ γ` computed alongside.
pub fn localize(models: &[SuperBundleModel], n: usize) -> Result<LocalizeReport> {
    check_models(models, n)?;
    let s = sign(n + 1);
    let mut summaries = Vec::with_capacity(models.len());
    let mut rounded = 0i64;
    let mut deg_sum = C64::from(0.0);
    let mut gamma_sum = C64::from(0.0);
    for model in models {
        let gamma = gamma_report(model, &[T_MAX])?;
        rounded += gamma.deg_star_value.rounded;
        deg_sum += gamma.deg_star_value.value;
        gamma_sum += gamma.extrapolated_limit;
        summaries.push(ModelSummary {
            description: model.describe(),
            gamma,
        });
    }
    Ok(LocalizeReport {
        n,
        value: s * rounded,
        deg_star_path: deg_sum * s as f64,
        gamma_path: -gamma_sum,
        models: summaries,
    })
}

#[derive(Debug, Clone)]
pub struct FlzReport {
    pub n: usize,
    /// `(−1)^{n−1} round(deg(v))`.
    pub value: i64,
    pub degree: DegreeResult,
    /// `−lim_T ∫_{S^{2n−1}} γ(T)`, reported for the sign audit only.
    pub gamma_route: C64,
}

/// Point singularity: `(−1)^{n−1} deg(v)` for `v` on `S^{2n−1}`.
pub fn flz_point_case(v: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain, n: usize) -> Result<FlzReport> {
    let model = SuperBundleModel::point(domain, v)?;
    if model.n() != n {
        return Err(contract(format!("point case with n = {n} needs S^{}, got {}", 2 * n - 1, domain.chart().label())));
    }
    let gamma = gamma_report(&model, &[T_MAX])?;
    let degree = gamma.deg_star_value;
    Ok(FlzReport {
        n,
        value: sign(n - 1) * degree.rounded,
        degree,
        gamma_route: -gamma.extrapolated_limit,
    })
}

#[derive(Debug, Clone)]
pub struct IndexReport {
    pub n: usize,
    /// `(−1)^n Σ_i deg*(v_i)`.
    pub value: C64,
    pub rounded: i64,
    pub degrees: Vec<DegreeResult>,
}

/// `(−1)^n Σ_i deg*(v_i)`.
pub fn index_report(models: &[SuperBundleModel], n: usize) -> Result<IndexReport> {
    check_models(models, n)?;
    let degrees: Vec<DegreeResult> = models.iter().map(model_degree).collect::<Result<_>>()?;
    let s = sign(n);
    let sum: C64 = degrees.iter().map(|d| d.value).sum();
    let rounded: i64 = degrees.iter().map(|d| d.rounded).sum();
    Ok(IndexReport {
        n,
        value: sum * s as f64,
        rounded: s * rounded,
        degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oddchern::{generator, GeneratorKind};

    #[test]
    fn empty_lists() {
        let r = localize(&[], 2).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.check().is_ok());
        assert_eq!(index_report(&[], 2).unwrap().value, C64::from(0.0));
    }

    #[test]
    fn point_case_on_the_circle() {
        for m in -2..=2 {
            let v = generator(GeneratorKind::CircleWinding(m), 1);
            let r = flz_point_case(v, &ChartedSphereDomain::sphere(1), 1).unwrap();
            assert_eq!(r.value, -(m as i64));
            // the γ route carries the opposite sign
            assert!((r.gamma_route - C64::from(m as f64)).norm() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn point_case_rejects_wrong_n() {
        let v = generator(GeneratorKind::Su2Identity, 2);
        assert!(flz_point_case(v, &ChartedSphereDomain::sphere(3), 1).is_err());
    }
}
