//! Gauss-Legendre rules.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Nodes and weights of the `n`-point Gauss-Legendre rule mapped to `[a, b]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let n = NonZeroUsize::new(n).expect("quadrature needs at least one node");
    let rule = GaussLegendre::new(n);
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    pairs.into_iter().map(|(x, w)| (mid + half * x, half * w)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6, 0.0, 2.0);
        // ∫_0^2 t^11 dt = 2^12 / 12
        let got: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(11)).sum();
        assert!((got - 4096.0 / 12.0).abs() < 1e-11);
    }

    #[test]
    fn nodes_are_interior_and_sorted() {
        let (x, w) = gauss_legendre(64, 0.0, std::f64::consts::PI);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(x[0] > 0.0 && *x.last().unwrap() < std::f64::consts::PI);
        assert!((w.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-13);
    }
}
