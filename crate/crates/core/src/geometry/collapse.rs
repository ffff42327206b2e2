//! The collapse map `S^p × S^q → S^{p+q}` that crushes the wedge
//! `S^p ∨ S^q` to the basepoint.
//!
//! With `σ_m(x) = x'/(1 − x_1)` the stereographic projection from
//! `e_1 = (1, 0, …)`, write `w = (σ_p(x), σ_q(y)) ∈ R^{p+q}` and `r = |w|`.
//! The image is the point at angle `α(r)` from `e_1` in the direction of `w`:
//!
//! `α(r) = 2 atan(1/r) · χ(r)`,
//!
//! where `χ = 1` on `[0, R]`, `χ = 0` on `[2R, ∞)` and `χ` is the usual
//! `exp(−1/x)` smooth step in between. On `r ≤ R` this is exactly inverse
//! stereographic projection of `w`; from `r ≥ 2R` on (which contains a
//! neighbourhood of the wedge) the map is the constant `e_1`.

use super::chart::Chart;
use super::dual::Real;
use super::fields::image_jacobian;
use super::maps::{point_map_evals, PointMap};
use crate::error::{contract, Result};
use crate::forms::determinant;

#[derive(Debug, Clone, Copy)]
pub struct CollapseMap {
    pub p: usize,
    pub q: usize,
    pub radius: f64,
    /// Swap the last two target coordinates.
    pub flip: bool,
}

fn psi<T: Real>(x: T) -> T {
    if x.value() <= 0.0 {
        T::zero()
    } else {
        (-(x.recip())).exp()
    }
}

/// Smooth step: 1 for `s ≤ 0`, 0 for `s ≥ 1`.
fn step<T: Real>(s: T) -> T {
    let a = psi(T::one() - s);
    let b = psi(s);
    a / (a + b)
}

impl CollapseMap {
    pub fn target_dim(&self) -> usize {
        self.p + self.q
    }

    pub fn source_chart(&self) -> Chart {
        Chart::Product(self.p, self.q)
    }

    /// Angle from the basepoint as a function of `r = |w|`.
    pub fn profile<T: Real>(&self, r: T) -> T {
        let big_r = T::cst(self.radius);
        let s = (r - big_r) / big_r;
        T::cst(2.0) * r.recip().atan() * step(s)
    }

    /// `σ_p(x)` and `σ_q(y)` concatenated, or `None` when `x` or `y` is the
    /// basepoint of its factor.
    fn stereo<T: Real>(&self, x: &[T]) -> Option<Vec<T>> {
        let mut w = Vec::with_capacity(self.p + self.q);
        for (start, m) in [(0, self.p), (self.p + 1, self.q)] {
            let denom = T::one() - x[start];
            if denom.value() <= 1e-300 {
                return None;
            }
            for k in 1..=m {
                w.push(x[start + k] / denom);
            }
        }
        Some(w)
    }

    fn basepoint<T: Real>(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.target_dim() + 1];
        out[0] = T::one();
        out
    }

    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let Some(w) = self.stereo(x) else {
            return self.basepoint();
        };
        let r2 = w.iter().fold(T::zero(), |acc, &v| acc + v * v);
        let r2v = r2.value();
        let rad = self.radius;
        let mut out = Vec::with_capacity(w.len() + 1);
        if r2v <= rad * rad {
            let denom = (T::one() + r2).recip();
            out.push((r2 - T::one()) * denom);
            for v in w {
                out.push(T::cst(2.0) * v * denom);
            }
        } else if r2v >= 4.0 * rad * rad {
            return self.basepoint();
        } else {
            let r = r2.sqrt();
            let alpha = self.profile(r);
            let s = alpha.sin() / r;
            out.push(alpha.cos());
            for v in w {
                out.push(s * v);
            }
        }
        if self.flip {
            let k = out.len();
            out.swap(k - 2, k - 1);
        }
        out
    }

    /// Inverse stereographic projection from `e_1` of a vector in `R^m`.
    fn inverse_stereo(w: &[f64]) -> Vec<f64> {
        let r2: f64 = w.iter().map(|v| v * v).sum();
        let mut out = vec![(r2 - 1.0) / (r2 + 1.0)];
        out.extend(w.iter().map(|v| 2.0 * v / (1.0 + r2)));
        out
    }

    /// Radius `r` with `profile(r) = alpha`, for `0 < alpha < π`.
    fn solve_radius(&self, alpha: f64) -> f64 {
        let inner = 2.0 * (1.0 / self.radius).atan();
        if alpha >= inner {
            return 1.0 / (alpha / 2.0).tan();
        }
        // The profile decreases strictly on (R, 2R).
        let (mut lo, mut hi) = (self.radius, 2.0 * self.radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.profile(mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * self.radius {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

impl PointMap for CollapseMap {
    fn source_ambient(&self) -> usize {
        self.p + self.q + 2
    }
    fn target_ambient(&self) -> usize {
        self.target_dim() + 1
    }
    point_map_evals!();

    /// Every point other than the basepoint has exactly one preimage.
    fn preimages(&self, y: &[f64]) -> Option<Vec<Vec<f64>>> {
        let mut y = y.to_vec();
        if self.flip {
            let k = y.len();
            y.swap(k - 2, k - 1);
        }
        let tail = (y[1..].iter().map(|v| v * v).sum::<f64>()).sqrt();
        let alpha = tail.atan2(y[0]);
        if alpha <= 0.0 || tail == 0.0 {
            return Some(Vec::new());
        }
        let r = self.solve_radius(alpha);
        let w: Vec<f64> = y[1..].iter().map(|v| v / tail * r).collect();
        let mut x = Self::inverse_stereo(&w[..self.p]);
        x.extend(Self::inverse_stereo(&w[self.p..]));
        Some(vec![x])
    }

    fn describe(&self) -> String {
        format!("collapse(p={}, q={}, R={}{})", self.p, self.q, self.radius, if self.flip { ", flipped" } else { "" })
    }
}

/// Chart coordinates of an ambient point of `S^m` (inverse of the spherical
/// embedding).
pub fn sphere_angles(x: &[f64]) -> Vec<f64> {
    let m = x.len() - 1;
    let mut out = Vec::with_capacity(m);
    for i in 0..m - 1 {
        let rest = x[i + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        out.push(rest.atan2(x[i]));
    }
    let mut phi = x[m].atan2(x[m - 1]);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    out.push(phi);
    out
}

/// Chart coordinates of an ambient point of a sphere or product.
pub fn chart_angles(chart: Chart, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut off = 0;
    for m in chart.factors() {
        out.extend(sphere_angles(&x[off..off + m + 1]));
        off += m + 1;
    }
    out
}

/// Local degree sign `sign det[F, ∂F/∂θ]` of a map at a chart point, with
/// the chart orientation folded in.
pub fn local_degree_sign(chart: Chart, map: &dyn PointMap, theta: &[f64]) -> (f64, f64) {
    let d = chart.dim();
    let (y, jac) = image_jacobian(chart, Some(map), theta);
    let a = y.len();
    assert_eq!(a, d + 1, "local degree needs an equidimensional map to a sphere");
    let mut frame = vec![0.0; a * a];
    for r in 0..a {
        frame[r * a] = y[r];
        for c in 0..d {
            frame[r * a + c + 1] = jac[r * d + c];
        }
    }
    let det = determinant(&mut frame, a) * chart.orientation_sign();
    (det.signum(), det.abs())
}

/// Builds the collapse map with radius `R`, choosing the target orientation
/// so that its degree is `+1`.
///
/// The sign is read off at the preimage of a fixed regular value inside the
/// inverse-stereographic region.
pub fn build_collapse_map(p: usize, q: usize, radius: f64) -> Result<CollapseMap> {
    if p < 1 || q < 1 || !(radius > 0.0) || !radius.is_finite() {
        return Err(contract(format!("collapse map needs p, q ≥ 1 and R > 0 (got p={p}, q={q}, R={radius})")));
    }
    let mut map = CollapseMap { p, q, radius, flip: false };
    let chart = map.source_chart();
    let mut y: Vec<f64> = (0..=p + q).map(|i| 0.31 + 0.17 * i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    y[0] = -0.6;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    y.iter_mut().for_each(|v| *v /= norm);

    let pre = map.preimages(&y).unwrap_or_default();
    if pre.len() != 1 {
        return Err(contract(format!("collapse map construction: {} preimages of a regular value", pre.len())));
    }
    let theta = chart_angles(chart, &pre[0]);
    let (sign, size) = local_degree_sign(chart, &map, &theta);
    if !(size > 1e-8) {
        return Err(contract("collapse map construction: probe value is not regular"));
    }
    if sign < 0.0 {
        map.flip = true;
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dual;

    #[test]
    fn identity_region_is_inverse_stereographic() {
        let map = CollapseMap { p: 2, q: 1, radius: 4.0, flip: false };
        // σ values of modulus ≤ R/4 on each factor.
        let wx = [0.3, -0.5];
        let wy = [0.7];
        let mut x = CollapseMap::inverse_stereo(&wx);
        x.extend(CollapseMap::inverse_stereo(&wy));
        let got = map.apply(&x);
        let want = CollapseMap::inverse_stereo(&[0.3, -0.5, 0.7]);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn wedge_collapses_to_basepoint() {
        let map = CollapseMap { p: 2, q: 3, radius: 4.0, flip: false };
        let mut x = vec![1.0, 0.0, 0.0];
        x.extend([0.5, 0.5, 0.5, 0.5]);
        let y = map.apply(&x);
        assert_eq!(y[0], 1.0);
        assert!(y[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn locally_constant_near_wedge() {
        let map = CollapseMap { p: 1, q: 2, radius: 4.0, flip: false };
        // |σ_p| = 3R gives a point well outside the gluing band.
        let w = [12.0];
        let mut x = CollapseMap::inverse_stereo(&w);
        x.extend(CollapseMap::inverse_stereo(&[0.2, 0.1]));
        for dir in 0..x.len() {
            let xd: Vec<Dual> = x.iter().enumerate().map(|(i, &v)| Dual::new(v, if i == dir { 1.0 } else { 0.0 })).collect();
            assert!(map.apply_dual(&xd).iter().all(|v| v.d.abs() < 1e-12));
        }
    }

    #[test]
    fn preimage_roundtrip_in_band() {
        let map = build_collapse_map(2, 1, 4.0).unwrap();
        let alpha = 0.3;
        let y = [alpha.cos(), alpha.sin() * 0.6, alpha.sin() * 0.0, alpha.sin() * 0.8];
        let x = &map.preimages(&y).unwrap()[0];
        let back = map.apply(x);
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12, "{back:?} vs {y:?}");
        }
    }

    #[test]
    fn angles_invert_embedding() {
        let chart = Chart::Product(3, 2);
        let theta = [0.4, 2.0, 5.0, 1.1, 0.2];
        let back = chart_angles(chart, &chart.embed(&theta));
        for (a, b) in back.iter().zip(&theta) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
