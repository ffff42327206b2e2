//! Winding numbers of clutching functions `S^1 → GL_N(C)` by phase
//! unwrapping of the determinant.

use crate::error::{contract, Result};
use crate::geometry::MatrixMap;

/// Default number of samples on the circle.
pub const CLUTCHING_SAMPLES: usize = 4096;

/// Winding number of `det g` around the origin as `z = e^{iθ}` runs once
/// around the circle. For the clutching function of a bundle over `S^2`
/// this is its first Chern number.
///
/// Successive phase increments must stay below `π/2` in absolute value,
/// otherwise the sampling is too coarse to unwrap reliably.
pub fn winding_number(g: &dyn MatrixMap, samples: usize) -> Result<i64> {
    if g.source_ambient() != 2 {
        return Err(contract("winding number needs a map on S^1"));
    }
    if samples < 8 {
        return Err(contract("winding number needs at least 8 samples"));
    }
    let det_at = |k: usize| {
        let t = std::f64::consts::TAU * k as f64 / samples as f64;
        g.value(&[t.cos(), t.sin()]).to_nalgebra().determinant()
    };
    let first = det_at(0);
    let mut prev = first;
    let mut total = 0.0;
    for k in 1..=samples {
        let cur = if k == samples { first } else { det_at(k) };
        if cur.norm() == 0.0 || !cur.is_finite() {
            return Err(contract(format!("clutching function is singular at sample {k}")));
        }
        let step = (cur / prev).arg();
        if step.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(contract(format!("phase jump {step:.3} at sample {k}: increase the sample count")));
        }
        total += step;
        prev = cur;
    }
    Ok((total / std::f64::consts::TAU).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oddchern::generators::{generator, GeneratorKind};

    #[test]
    fn circle_powers() {
        for m in -3..=3 {
            let g = generator(GeneratorKind::CircleWinding(m), 2);
            assert_eq!(winding_number(g.as_ref(), CLUTCHING_SAMPLES).unwrap(), m as i64);
        }
    }
}
