//! Normalized integrals of the odd Chern character: `deg` on odd spheres and
//! `deg*` on product spheres.

use std::sync::Arc;

use super::chern::OddChernField;
use crate::error::{contract, Error, Result};
use crate::geometry::{converge, integrate_top, Chart, ChartedSphereDomain, ConvergenceRow, Ladder, MatrixMap};
use crate::linalg::C64;

/// Integrality tolerance for accepted degrees.
pub const INTEGRALITY: f64 = 1e-4;

/// Resolution ladder tolerance. Tighter than [`INTEGRALITY`] so that a
/// converged value is also a trustworthy one.
pub const LADDER_TOLERANCE: f64 = 1e-5;

/// Relative bound on the imaginary part of an accepted value.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DegreeResult {
    pub value: C64,
    pub rounded: i64,
    pub residual: f64,
    pub converged: bool,
    pub convergence: Vec<ConvergenceRow>,
}

impl DegreeResult {
    fn from_value(value: C64, converged: bool, convergence: Vec<ConvergenceRow>) -> Self {
        let rounded = value.re.round() as i64;
        Self {
            value,
            rounded,
            residual: (value - C64::from(rounded as f64)).norm(),
            converged,
            convergence,
        }
    }

    pub fn last_delta(&self) -> f64 {
        self.convergence.last().and_then(|r| r.delta).unwrap_or(f64::INFINITY)
    }

    pub fn is_real(&self) -> bool {
        self.value.im.abs() < IMAGINARY_TOLERANCE * (1.0 + self.value.norm())
    }

    /// Converged, real and integral.
    pub fn accepted(&self) -> bool {
        self.converged && self.is_real() && self.residual < INTEGRALITY
    }

    /// Turns a rejected result into the matching error.
    pub fn check(self, what: &str) -> Result<Self> {
        if !self.converged {
            return Err(Error::Unconverged {
                what: what.to_string(),
                delta: self.last_delta(),
                tolerance: LADDER_TOLERANCE,
            });
        }
        if !self.is_real() {
            return Err(Error::NotIntegral {
                what: format!("{what} (imaginary part {:.3e})", self.value.im),
                value: self.value.re,
                residual: self.residual,
                tolerance: INTEGRALITY,
            });
        }
        if self.residual >= INTEGRALITY {
            return Err(Error::NotIntegral {
                what: what.to_string(),
                value: self.value.re,
                residual: self.residual,
                tolerance: INTEGRALITY,
            });
        }
        Ok(self)
    }
}

/// `(−2πi)^{−n}`.
pub fn normalization(n: usize) -> C64 {
    C64::new(0.0, -std::f64::consts::TAU).powi(n as i32).inv()
}

fn normalized_integral(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain, n: usize, ladder: Ladder) -> Result<DegreeResult> {
    let field = OddChernField::new(domain.chart(), map);
    let scale = normalization(n);
    let conv = converge(domain, ladder, |d| Ok(integrate_top(&field, d)? * scale))?;
    Ok(DegreeResult::from_value(conv.value, conv.converged, conv.table))
}

/// `(−2πi)^{−k} ∫_{S^{2k−1}} Ch(g)`.
pub fn deg(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain) -> Result<DegreeResult> {
    deg_with(map, domain, Ladder::new(LADDER_TOLERANCE))
}

pub fn deg_with(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain, ladder: Ladder) -> Result<DegreeResult> {
    let m = match domain.chart() {
        Chart::Sphere(m) if m % 2 == 1 => m,
        other => return Err(contract(format!("deg needs an odd sphere, got {}", other.label()))),
    };
    normalized_integral(map, domain, m.div_ceil(2), ladder)
}

/// `(−2πi)^{−n} ∫_{S^{2n−2k} × S^{2k−1}} Ch(g)`.
pub fn deg_star(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain) -> Result<DegreeResult> {
    deg_star_with(map, domain, Ladder::new(LADDER_TOLERANCE))
}

pub fn deg_star_with(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain, ladder: Ladder) -> Result<DegreeResult> {
    let (p, q) = match domain.chart() {
        Chart::Product(p, q) if p % 2 == 0 && q % 2 == 1 && p > 0 => (p, q),
        other => {
            return Err(contract(format!(
                "deg* needs S^even × S^odd with a positive-dimensional first factor, got {}",
                other.label()
            )))
        }
    };
    normalized_integral(map, domain, (p + q).div_ceil(2), ladder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oddchern::generators::{generator, GeneratorKind};

    #[test]
    fn winding_degrees() {
        for m in -2..=2 {
            let g = generator(GeneratorKind::CircleWinding(m), 1);
            let d = deg(g, &ChartedSphereDomain::sphere(1)).unwrap();
            assert_eq!(d.rounded, -(m as i64));
            assert!(d.residual < 1e-10, "{d:?}");
            assert!(d.accepted());
        }
    }

    #[test]
    fn rejects_wrong_domains() {
        let g = generator(GeneratorKind::CircleWinding(1), 1);
        assert!(deg(g.clone(), &ChartedSphereDomain::sphere(2)).is_err());
        assert!(deg_star(g, &ChartedSphereDomain::sphere(1)).is_err());
    }
}
