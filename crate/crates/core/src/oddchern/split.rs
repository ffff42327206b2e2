//! Split maps `g = pr₂*f · φ*h` on `S^p × S^q`.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::geometry::{CollapseMap, FactorProjection, MatrixMap, MatrixProduct, PulledBack};

/// `(x, y) ↦ f(y) · h(φ(x, y))` for `f` on `S^q`, `h` on `S^{p+q}` and the
/// collapse map `φ`.
pub fn assemble_split_map(
    f: Arc<dyn MatrixMap>,
    h: Arc<dyn MatrixMap>,
    collapse: &CollapseMap,
) -> Result<Arc<dyn MatrixMap>> {
    let (p, q) = (collapse.p, collapse.q);
    if f.size() != h.size() {
        return Err(contract(format!("split map: f has size {} but h has size {}", f.size(), h.size())));
    }
    if f.source_ambient() != q + 1 {
        return Err(contract(format!("split map: f must live on S^{q}")));
    }
    if h.source_ambient() != p + q + 1 {
        return Err(contract(format!("split map: h must live on S^{}", p + q)));
    }
    let left = PulledBack::new(f, Arc::new(FactorProjection::second(p, q)));
    let right = PulledBack::new(h, Arc::new(*collapse));
    Ok(Arc::new(MatrixProduct::new(Arc::new(left), Arc::new(right))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_collapse_map, Chart};
    use crate::linalg::ComplexMatrix;
    use crate::oddchern::generators::{generator, ConstantMap, GeneratorKind};

    #[test]
    fn factors_reduce_to_pullbacks() {
        let phi = build_collapse_map(2, 1, 1.0).unwrap();
        let id3 = Arc::new(ConstantMap {
            n: 2,
            source_ambient: 4,
            c: 1.0.into(),
        });
        let id1 = Arc::new(ConstantMap {
            n: 2,
            source_ambient: 2,
            c: 1.0.into(),
        });
        let f = generator(GeneratorKind::CircleWinding(2), 2);
        let h = generator(GeneratorKind::Su2Identity, 2);
        let chart = Chart::Product(2, 1);
        let theta = [0.7, 2.1, 4.0];
        let x = chart.embed(&theta);

        let only_f = assemble_split_map(f.clone(), id3, &phi).unwrap();
        assert!(only_f.value(&x).distance(&f.value(&x[3..])) < 1e-15);

        let both_id = assemble_split_map(id1.clone(), Arc::new(ConstantMap { n: 2, source_ambient: 4, c: 1.0.into() }), &phi).unwrap();
        assert!(both_id.value(&x).distance(&ComplexMatrix::identity(2)) < 1e-15);

        let g = assemble_split_map(f, h, &phi).unwrap();
        assert!(g.value_dual(&crate::geometry::Dual::seed_axis(&x, 0)).is_some());
        assert!(assemble_split_map(id1.clone(), id1, &phi).is_err());
    }
}
