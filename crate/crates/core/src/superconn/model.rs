//! Boundary models and polar unitarization.

use std::sync::Arc;

use crate::error::{contract, Error, Result};
use crate::geometry::{Chart, ChartedSphereDomain, DerivativeMode, Dual, MatrixJet, MatrixMap};
use crate::linalg::{polar_unitary_jet, ComplexMatrix};
use crate::oddchern::MIN_SIGMA;

/// Bound on `‖v*v − Id‖_F` at the nodes of a unitarized model.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Nodes inspected when checking a model: at most this many, evenly strided.
const CHECK_NODES: usize = 4096;

/// `v (v*v)^{−1/2}` for an invertible matrix map `v`.
#[derive(Clone)]
pub struct Unitarized {
    pub map: Arc<dyn MatrixMap>,
}

impl MatrixMap for Unitarized {
    fn size(&self) -> usize {
        self.map.size()
    }
    fn source_ambient(&self) -> usize {
        self.map.source_ambient()
    }
    fn value(&self, x: &[f64]) -> ComplexMatrix {
        let v = self.map.value(x);
        let zero = ComplexMatrix::zeros(v.size());
        match polar_unitary_jet(&v, &zero, 0.0) {
            Ok((u, _)) => u,
            Err(sigma) => panic!("polar decomposition of a singular matrix (σ_min = {sigma:.3e})"),
        }
    }
    fn value_dual(&self, x: &[Dual]) -> Option<MatrixJet> {
        let jet = self.map.value_dual(x)?;
        let (value, tangent) = polar_unitary_jet(&jet.value, &jet.tangent, 0.0)
            .unwrap_or_else(|sigma| panic!("polar decomposition of a singular matrix (σ_min = {sigma:.3e})"));
        Some(MatrixJet { value, tangent })
    }
    fn derivative_mode(&self) -> DerivativeMode {
        self.map.derivative_mode()
    }
    fn describe(&self) -> String {
        format!("polar({})", self.map.describe())
    }
}

fn strided_nodes(domain: &ChartedSphereDomain) -> impl Iterator<Item = Vec<f64>> + '_ {
    let total = domain.node_count();
    let stride = total.div_ceil(CHECK_NODES).max(1);
    (0..total).step_by(stride).map(move |i| {
        let mut theta = vec![0.0; domain.dim()];
        domain.node(i, &mut theta);
        theta
    })
}

fn node_label(theta: &[f64]) -> String {
    let coords: Vec<String> = theta.iter().map(|t| format!("{t:.6}")).collect();
    format!("chart point ({})", coords.join(", "))
}

/// Polar unitarization of `v`, after checking that `v` stays invertible on a
/// strided subset of the domain nodes.
pub fn unitarize(v: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain) -> Result<Arc<dyn MatrixMap>> {
    let chart = domain.chart();
    for theta in strided_nodes(domain) {
        let sigma = v.value(&chart.embed(&theta)).min_singular_value();
        if !(sigma > MIN_SIGMA) {
            return Err(Error::Singular {
                location: node_label(&theta),
                sigma,
                threshold: MIN_SIGMA,
            });
        }
    }
    Ok(Arc::new(Unitarized { map: v }))
}

/// Trivialized `Z_2`-graded bundle `E_+ ⊕ E_−` of rank `N + N` over a
/// boundary model, with the homomorphism `v: E_+ → E_−`.
///
/// On a product `S^{2n−2k} × S^{2k−1}` the domain carries the boundary
/// orientation of the tubular neighbourhood, which is the reverse of the
/// product orientation. On an odd sphere (a point singularity) it keeps the
/// standard orientation.
#[derive(Clone)]
pub struct SuperBundleModel {
    domain: ChartedSphereDomain,
    v: Arc<dyn MatrixMap>,
    n: usize,
    unitarized: bool,
}

impl SuperBundleModel {
    /// Model on a product `S^p × S^q` (`p` even, `q` odd) with `2n − 1 = p + q`.
    pub fn boundary(domain: &ChartedSphereDomain, v: Arc<dyn MatrixMap>) -> Result<Self> {
        let n = match domain.chart() {
            Chart::Product(p, q) if p % 2 == 0 && q % 2 == 1 => (p + q).div_ceil(2),
            other => return Err(contract(format!("boundary model needs S^even × S^odd, got {}", other.label()))),
        };
        Self::build(domain.clone().with_orientation(-1.0), v, n)
    }

    /// Model on the sphere `S^{2n−1}` around an isolated singular point.
    pub fn point(domain: &ChartedSphereDomain, v: Arc<dyn MatrixMap>) -> Result<Self> {
        let n = match domain.chart() {
            Chart::Sphere(m) if m % 2 == 1 => m.div_ceil(2),
            other => return Err(contract(format!("point model needs an odd sphere, got {}", other.label()))),
        };
        Self::build(domain.clone().with_orientation(1.0), v, n)
    }

    fn build(domain: ChartedSphereDomain, v: Arc<dyn MatrixMap>, n: usize) -> Result<Self> {
        if v.source_ambient() != domain.chart().ambient_dim() {
            return Err(contract(format!("{} does not live on {}", v.describe(), domain.chart().label())));
        }
        Ok(Self {
            domain,
            v,
            n,
            unitarized: false,
        })
    }

    /// Replaces `v` by its unitary polar factor.
    pub fn unitarized(self) -> Result<Self> {
        let v = unitarize(self.v.clone(), &self.domain)?;
        Ok(Self {
            v,
            unitarized: true,
            ..self
        })
    }

    /// Marks `v` as already unitary after checking it on the nodes.
    pub fn assume_unitary(self) -> Result<Self> {
        let model = Self {
            unitarized: true,
            ..self
        };
        let defect = model.unitarity_defect();
        if !(defect < UNITARITY_TOLERANCE) {
            return Err(contract(format!(
                "{} is not unitary: ‖v*v − Id‖ = {defect:.3e}",
                model.v.describe()
            )));
        }
        Ok(model)
    }

    /// Largest `‖v*v − Id‖_F` over a strided subset of the nodes.
    pub fn unitarity_defect(&self) -> f64 {
        let chart = self.domain.chart();
        let id = ComplexMatrix::identity(self.rank());
        strided_nodes(&self.domain)
            .map(|theta| {
                let v = self.v.value(&chart.embed(&theta));
                (&v.adjoint() * &v).distance(&id)
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn require_unitarized(&self, what: &str) -> Result<()> {
        if self.unitarized {
            Ok(())
        } else {
            Err(contract(format!("{what} needs a unitarized model")))
        }
    }

    pub fn domain(&self) -> &ChartedSphereDomain {
        &self.domain
    }

    /// Same model on a refined or coarsened grid.
    pub fn with_domain(&self, domain: ChartedSphereDomain) -> Self {
        assert_eq!(domain.chart(), self.domain.chart(), "chart mismatch");
        Self {
            domain: domain.with_orientation(self.domain.orientation()),
            ..self.clone()
        }
    }

    pub fn chart(&self) -> Chart {
        self.domain.chart()
    }

    pub fn v(&self) -> &Arc<dyn MatrixMap> {
        &self.v
    }

    /// Half the complex dimension of the ambient manifold.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.v.size()
    }

    pub fn is_unitarized(&self) -> bool {
        self.unitarized
    }

    pub fn is_point(&self) -> bool {
        matches!(self.chart(), Chart::Sphere(_))
    }

    pub fn describe(&self) -> String {
        format!("{} on {} (n={})", self.v.describe(), self.chart().label(), self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Scaled;
    use crate::linalg::C64;
    use crate::oddchern::{generator, ConstantMap, GeneratorKind};

    #[test]
    fn positive_scaling_is_undone() {
        let id = Arc::new(ConstantMap {
            n: 2,
            source_ambient: 4,
            c: C64::from(2.0),
        });
        let domain = ChartedSphereDomain::sphere(3);
        let u = unitarize(id, &domain).unwrap();
        assert!(u.value(&[0.0, 1.0, 0.0, 0.0]).distance(&ComplexMatrix::identity(2)) < 1e-15);

        let h = generator(GeneratorKind::Su2Identity, 2);
        let scaled: Arc<dyn MatrixMap> = Arc::new(Scaled {
            map: h.clone(),
            factor: C64::from(10.0),
        });
        let u = unitarize(scaled, &domain).unwrap();
        let x = domain.chart().embed(&[0.4, 1.1, 2.0]);
        assert!(u.value(&x).distance(&h.value(&x)) < 1e-13);
    }

    #[test]
    fn singular_input_is_named() {
        let zero = Arc::new(ConstantMap {
            n: 1,
            source_ambient: 2,
            c: C64::from(0.0),
        });
        let err = unitarize(zero, &ChartedSphereDomain::sphere(1)).err().unwrap();
        assert!(err.to_string().contains("chart point"));
    }

    #[test]
    fn models_check_unitarity() {
        let h = generator(GeneratorKind::Su2Identity, 2);
        let m = SuperBundleModel::point(&ChartedSphereDomain::sphere(3), h).unwrap();
        assert!(m.clone().assume_unitary().unwrap().is_unitarized());
        let bad: Arc<dyn MatrixMap> = Arc::new(Scaled {
            map: m.v().clone(),
            factor: C64::from(2.0),
        });
        let m = SuperBundleModel::point(&ChartedSphereDomain::sphere(3), bad).unwrap();
        assert!(m.clone().assume_unitary().is_err());
        assert!(m.unitarized().unwrap().unitarity_defect() < UNITARITY_TOLERANCE);
    }
}
