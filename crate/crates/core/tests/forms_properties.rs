use chernloc::forms::{
    degree_of, nilpotent_exp, pullback_form, super_commutator, supertrace, trace, wedge, GradedMatrixForm, Parity,
    SuperMatrix,
};
use chernloc::linalg::ComplexMatrix;
use chernloc::C64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Matrix of size `2r` with the given block parity.
fn graded_matrix(rng: &mut ChaCha8Rng, r: usize, parity: Parity) -> ComplexMatrix {
    let (a, b) = (random_matrix(rng, r), random_matrix(rng, r));
    match parity {
        Parity::Even => SuperMatrix::even(a, b).to_matrix(),
        Parity::Odd => SuperMatrix::odd(a, b).to_matrix(),
    }
}

/// Random form of the given degree (all degrees when `None`).
fn random_form(
    rng: &mut ChaCha8Rng,
    dim: usize,
    degree: Option<usize>,
    mut coeff: impl FnMut(&mut ChaCha8Rng) -> ComplexMatrix,
) -> GradedMatrixForm {
    let n = coeff(rng).size();
    let mut f = GradedMatrixForm::zero(dim, n);
    for mask in 0..(1u32 << dim) {
        if degree.is_none_or(|p| degree_of(mask) == p) && rng.random_bool(0.8) {
            f.set_component(mask, &coeff(rng));
        }
    }
    f
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn close(a: &GradedMatrixForm, b: &GradedMatrixForm, tol: f64) -> bool {
    a.distance(b) <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_wedge_is_graded_commutative(seed: u64, dim in 1usize..=6, p in 0usize..=6, q in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (p.min(dim), q.min(dim));
        let a = random_form(&mut rng, dim, Some(p), |r| random_matrix(r, 1));
        let b = random_form(&mut rng, dim, Some(q), |r| random_matrix(r, 1));
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(C64::from(sign(p * q)));
        prop_assert!(close(&ab, &ba, 1e-13));
    }

    #[test]
    fn wedge_is_associative(seed: u64, dim in 1usize..=5, n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, dim, None, |r| random_matrix(r, n));
        let b = random_form(&mut rng, dim, None, |r| random_matrix(r, n));
        let c = random_form(&mut rng, dim, None, |r| random_matrix(r, n));
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn trace_is_graded_cyclic(seed: u64, dim in 1usize..=5, n in 1usize..=3, p in 0usize..=5, q in 0usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (p.min(dim), q.min(dim));
        let a = random_form(&mut rng, dim, Some(p), |r| random_matrix(r, n));
        let b = random_form(&mut rng, dim, Some(q), |r| random_matrix(r, n));
        let ab = trace(&wedge(&a, &b).unwrap());
        let ba = trace(&wedge(&b, &a).unwrap()).scale(C64::from(sign(p * q)));
        prop_assert!(close(&ab, &ba, 1e-12));
    }

    #[test]
    fn supertrace_kills_super_commutators(seed: u64, dim in 1usize..=5, r in 1usize..=2, odd_a: bool, odd_b: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pa = if odd_a { Parity::Odd } else { Parity::Even };
        let pb = if odd_b { Parity::Odd } else { Parity::Even };
        let a = random_form(&mut rng, dim, None, |g| graded_matrix(g, r, pa));
        let b = random_form(&mut rng, dim, None, |g| graded_matrix(g, r, pb));
        let s = supertrace(&super_commutator(&a, pa, &b, pb).unwrap()).unwrap();
        prop_assert!(s.max_abs() < 1e-12 * (1.0 + a.max_abs() * b.max_abs()));
    }

    #[test]
    fn pullback_is_functorial(seed: u64, d1 in 1usize..=5, d2 in 1usize..=5, d3 in 1usize..=5, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_form(&mut rng, d1, None, |r| random_matrix(r, n));
        let j1: Vec<f64> = (0..d1 * d2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let j2: Vec<f64> = (0..d2 * d3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut j12 = vec![0.0; d1 * d3];
        for a in 0..d1 {
            for c in 0..d3 {
                j12[a * d3 + c] = (0..d2).map(|b| j1[a * d2 + b] * j2[b * d3 + c]).sum();
            }
        }
        let twice = pullback_form(&pullback_form(&w, &j1, d2), &j2, d3);
        let once = pullback_form(&w, &j12, d3);
        prop_assert!(close(&twice, &once, 1e-12));
    }

    #[test]
    fn pullback_respects_wedge(seed: u64, d1 in 1usize..=5, d2 in 1usize..=5, n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, d1, None, |r| random_matrix(r, n));
        let b = random_form(&mut rng, d1, None, |r| random_matrix(r, n));
        let j: Vec<f64> = (0..d1 * d2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let left = pullback_form(&wedge(&a, &b).unwrap(), &j, d2);
        let right = wedge(&pullback_form(&a, &j, d2), &pullback_form(&b, &j, d2)).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn exponentials_of_even_scalar_forms_invert(seed: u64, dim in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = GradedMatrixForm::zero(dim, 1);
        for p in (2..=dim).step_by(2) {
            a = a.add(&random_form(&mut rng, dim, Some(p), |r| random_matrix(r, 1))).unwrap();
        }
        let e = nilpotent_exp(&a, C64::from(1.0)).unwrap();
        let f = nilpotent_exp(&a, C64::from(-1.0)).unwrap();
        let one = GradedMatrixForm::identity(dim, 1);
        prop_assert!(close(&wedge(&e, &f).unwrap(), &one, 1e-12));
    }
}
