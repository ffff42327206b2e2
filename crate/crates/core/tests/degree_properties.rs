use std::sync::Arc;

use chernloc::geometry::{ChartedSphereDomain, MatrixMap, MatrixProduct, Scaled, Stabilized};
use chernloc::oddchern::{deg, generator, GeneratorKind, Slice, TrigFamily};
use chernloc::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn winding(m: i32, n: usize) -> Arc<dyn MatrixMap> {
    generator(GeneratorKind::CircleWinding(m), n)
}

fn su2(n: usize) -> Arc<dyn MatrixMap> {
    generator(GeneratorKind::Su2Identity, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn degree_is_additive_under_products(a in -4i32..=4, b in -4i32..=4, n in 1usize..=3) {
        let s1 = ChartedSphereDomain::sphere(1);
        let g = Arc::new(MatrixProduct::new(winding(a, n), winding(b, n)));
        let d = deg(g, &s1).unwrap();
        prop_assert_eq!(d.rounded, -i64::from(a + b));
        prop_assert!(d.residual < 1e-10);
    }

    #[test]
    fn degree_ignores_constant_scalings(re in -3.0f64..3.0, im in -3.0f64..3.0, m in -3i32..=3) {
        prop_assume!(re.hypot(im) > 1e-2);
        let s1 = ChartedSphereDomain::sphere(1);
        let base = deg(winding(m, 2), &s1).unwrap();
        let scaled = deg(Arc::new(Scaled { map: winding(m, 2), factor: C64::new(re, im) }), &s1).unwrap();
        prop_assert!((scaled.value - base.value).norm() < 1e-8);
    }

    #[test]
    fn circle_degree_is_homotopy_invariant(seed: u64, m in -2i32..=2, t in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let family = Arc::new(TrigFamily::random(winding(m, 2), &mut rng));
        let d = deg(Arc::new(Slice { family, t }), &ChartedSphereDomain::sphere(1)).unwrap();
        prop_assert!(d.accepted(), "{:?}", d);
        prop_assert_eq!(d.rounded, -i64::from(m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn su2_degree_is_homotopy_invariant(seed: u64, t in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let family = Arc::new(TrigFamily::random(su2(2), &mut rng));
        let d = deg(Arc::new(Slice { family, t }), &ChartedSphereDomain::sphere(3)).unwrap();
        prop_assert!(d.accepted(), "{:?}", d);
        prop_assert_eq!(d.rounded, -1);
    }

    #[test]
    fn su2_degree_is_stable(extra in 1usize..=2, size in 2usize..=3) {
        let s3 = ChartedSphereDomain::sphere(3);
        let base = deg(su2(2), &s3).unwrap();
        let stable = deg(Arc::new(Stabilized { map: su2(size), extra }), &s3).unwrap();
        prop_assert!((stable.value - base.value).norm() < 1e-8);
    }
}

#[test]
fn reversing_orientation_negates_the_degree() {
    let s3 = ChartedSphereDomain::sphere(3);
    let d = deg(su2(2), &s3).unwrap();
    let r = deg(su2(2), &s3.clone().with_orientation(-1.0)).unwrap();
    assert!((d.value + r.value).norm() < 1e-12);
}
