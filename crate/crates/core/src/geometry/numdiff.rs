//! Richardson-extrapolated central differences.

use crate::linalg::C64;

/// Initial step, relative to `max(1, |x|)`.
pub const INITIAL_STEP: f64 = 1e-4;

/// Extrapolation levels on top of the plain central difference.
pub const LEVELS: usize = 2;

/// Derivative of a vector-valued function of one variable at `x0`.
///
/// Central differences `D(h), D(h/2), …` are combined in a Richardson table
/// that cancels the `h², h⁴, …` error terms.
pub fn richardson(f: impl FnMut(f64) -> Vec<C64>, x0: f64) -> Vec<C64> {
    richardson_with(f, x0, INITIAL_STEP * x0.abs().max(1.0), LEVELS)
}

pub fn richardson_with(mut f: impl FnMut(f64) -> Vec<C64>, x0: f64, h0: f64, levels: usize) -> Vec<C64> {
    let mut table: Vec<Vec<C64>> = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let h = h0 / (1 << l) as f64;
        let (p, m) = (f(x0 + h), f(x0 - h));
        let s = 0.5 / h;
        table.push(p.iter().zip(&m).map(|(a, b)| (a - b) * s).collect());
    }
    for level in 1..=levels {
        let factor = 4f64.powi(level as i32);
        for j in (level..=levels).rev() {
            let improved = table[j]
                .iter()
                .zip(&table[j - 1])
                .map(|(fine, coarse)| (fine * factor - coarse) / (factor - 1.0))
                .collect();
            table[j] = improved;
        }
    }
    table.pop().expect("non-empty table")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomial_and_trig_derivatives() {
        let f = |x: f64| vec![C64::new(x.powi(5) - 3.0 * x * x, x.sin())];
        for &x in &[-2.0, 0.3, 1.7, 6.0] {
            let d = richardson(f, x);
            assert!((d[0].re - (5.0 * x.powi(4) - 6.0 * x)).abs() < 1e-8 * (1.0 + x.powi(4)));
            assert!((d[0].im - x.cos()).abs() < 1e-10);
        }
    }
}
