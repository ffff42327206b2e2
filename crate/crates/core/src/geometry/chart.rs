//! Spherical-angle charts, product grids and integration.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::dual::{Dual, Real};
use super::maps::MatrixMap;
use super::numdiff::richardson;
use super::quadrature::gauss_legendre;
use crate::error::{contract, Result};
use crate::forms::determinant;
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Nodes per angle for an `S^m` factor at default resolution.
pub fn default_nodes(m: usize) -> usize {
    match m {
        1 => 64,
        2 => 48,
        3 | 4 => 32,
        _ => 24,
    }
}

/// Volume of the unit sphere `S^m`.
pub fn sphere_volume(m: usize) -> f64 {
    // Vol(S^m) = 2π^{(m+1)/2} / Γ((m+1)/2), by the recursion Vol(S^m) = 2π/(m−1) Vol(S^{m−2}).
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_volume(m - 2),
    }
}

/// A sphere `S^m` or a product `S^p × S^q`, parametrized by angles.
///
/// On `S^m` the coordinates are `(θ_1, …, θ_{m−1}, φ)` with
/// `x_1 = cos θ_1`, `x_2 = sin θ_1 cos θ_2`, …,
/// `x_m = sin θ_1 ⋯ sin θ_{m−1} cos φ`, `x_{m+1} = sin θ_1 ⋯ sin θ_{m−1} sin φ`,
/// `θ_i ∈ (0, π)`, `φ ∈ (0, 2π)`. Product charts list the angles of the first
/// factor first; ambient points are the two unit vectors concatenated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Sphere(usize),
    Product(usize, usize),
}

impl Chart {
    pub fn factors(&self) -> Vec<usize> {
        match *self {
            Chart::Sphere(m) => vec![m],
            Chart::Product(p, q) => vec![p, q],
        }
    }

    pub fn dim(&self) -> usize {
        self.factors().iter().sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors().iter().map(|m| m + 1).sum()
    }

    pub fn label(&self) -> String {
        match *self {
            Chart::Sphere(m) => format!("S^{m}"),
            Chart::Product(p, q) => format!("S^{p}xS^{q}"),
        }
    }

    /// Coordinate range of each angle.
    pub fn angle_ranges(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for m in self.factors() {
            for _ in 0..m - 1 {
                out.push((0.0, PI));
            }
            out.push((0.0, 2.0 * PI));
        }
        out
    }

    pub fn embed<T: Real>(&self, theta: &[T]) -> Vec<T> {
        assert_eq!(theta.len(), self.dim(), "expected {} chart coordinates", self.dim());
        let mut out = Vec::with_capacity(self.ambient_dim());
        let mut offset = 0;
        for m in self.factors() {
            embed_sphere(&theta[offset..offset + m], &mut out);
            offset += m;
        }
        out
    }

    /// Embedded point and its Jacobian `∂x/∂θ` (row-major, ambient × dim).
    pub fn embed_jacobian(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (d, a) = (self.dim(), self.ambient_dim());
        let x = self.embed(theta);
        let mut jac = vec![0.0; a * d];
        for i in 0..d {
            let xd = self.embed(&Dual::seed_axis(theta, i));
            for (r, v) in xd.iter().enumerate() {
                jac[r * d + i] = v.d;
            }
        }
        (x, jac)
    }

    /// Riemannian volume density in these coordinates.
    pub fn volume_element(&self, theta: &[f64]) -> f64 {
        let mut out = 1.0;
        let mut offset = 0;
        for m in self.factors() {
            for i in 0..m - 1 {
                out *= theta[offset + i].sin().powi((m - 1 - i) as i32);
            }
            offset += m;
        }
        out
    }

    /// `+1` when the coordinate frame is positively oriented for the standard
    /// orientation of each sphere (outward normal first), else `−1`; products
    /// multiply the factor signs.
    pub fn orientation_sign(&self) -> f64 {
        let mut sign = 1.0;
        for m in self.factors() {
            let chart = Chart::Sphere(m);
            let theta: Vec<f64> = (0..m).map(|i| 0.7 + 0.3 * i as f64).collect();
            let (x, jac) = chart.embed_jacobian(&theta);
            let mut frame = vec![0.0; (m + 1) * (m + 1)];
            for r in 0..=m {
                frame[r * (m + 1)] = x[r];
                for c in 0..m {
                    frame[r * (m + 1) + c + 1] = jac[r * m + c];
                }
            }
            sign *= determinant(&mut frame, m + 1).signum();
        }
        sign
    }

    /// Value of a matrix map at the embedded point and its partial
    /// derivatives along each chart coordinate.
    pub fn matrix_partials(&self, map: &dyn MatrixMap, theta: &[f64]) -> (ComplexMatrix, Vec<ComplexMatrix>) {
        let d = self.dim();
        let n = map.size();
        let value = map.value(&self.embed(theta));
        let mut partials = Vec::with_capacity(d);
        for i in 0..d {
            let jet = map.value_dual(&self.embed(&Dual::seed_axis(theta, i)));
            let dm = match jet {
                Some(j) => j.tangent,
                None => {
                    let mut shifted = theta.to_vec();
                    let deriv = richardson(
                        |s| {
                            shifted[i] = s;
                            map.value(&self.embed(&shifted)).into_vec()
                        },
                        theta[i],
                    );
                    ComplexMatrix::from_row_major(n, deriv)
                }
            };
            partials.push(dm);
        }
        (value, partials)
    }
}

fn embed_sphere<T: Real>(angles: &[T], out: &mut Vec<T>) {
    let m = angles.len();
    let mut s = T::one();
    for &t in &angles[..m - 1] {
        out.push(s * t.cos());
        s *= t.sin();
    }
    let phi = angles[m - 1];
    out.push(s * phi.cos());
    out.push(s * phi.sin());
}

/// A charted sphere or product of spheres with a Gauss-Legendre product grid.
#[derive(Debug, Clone)]
pub struct ChartedSphereDomain {
    chart: Chart,
    resolution: Vec<usize>,
    axes: Vec<(Vec<f64>, Vec<f64>)>,
    orientation: f64,
    chart_sign: f64,
    /// Angles that [`ChartedSphereDomain::scaled`] leaves untouched.
    fixed: Vec<bool>,
}

/// Nodes summed serially inside one parallel task.
const CHUNK: usize = 2048;

impl ChartedSphereDomain {
    pub fn new(chart: Chart) -> Self {
        let resolution = chart
            .factors()
            .into_iter()
            .flat_map(|m| std::iter::repeat_n(default_nodes(m), m))
            .collect();
        Self::with_resolution(chart, resolution)
    }

    pub fn sphere(m: usize) -> Self {
        assert!(m >= 1, "sphere dimension must be positive");
        Self::new(Chart::Sphere(m))
    }

    pub fn product(p: usize, q: usize) -> Self {
        assert!(p >= 1 && q >= 1, "factor dimensions must be positive");
        Self::new(Chart::Product(p, q))
    }

    /// Explicit nodes per angle.
    pub fn with_resolution(chart: Chart, resolution: Vec<usize>) -> Self {
        assert_eq!(resolution.len(), chart.dim(), "one resolution per angle");
        assert!(resolution.iter().all(|&r| r >= 1), "resolutions must be positive");
        let axes = chart
            .angle_ranges()
            .iter()
            .zip(&resolution)
            .map(|(&(a, b), &n)| gauss_legendre(n, a, b))
            .collect();
        Self {
            chart,
            resolution,
            axes,
            orientation: 1.0,
            chart_sign: chart.orientation_sign(),
            fixed: vec![false; chart.dim()],
        }
    }

    /// Grid for integrands that, up to the volume element, depend only on
    /// the polar angle `θ_1` of each factor (the angle from `e_1`; for an
    /// `S^1` factor its only angle). Polar angles get `polar_factor` times
    /// the default resolution, the other angles `other_nodes` nodes, and only
    /// the polar angles are refined by [`ChartedSphereDomain::scaled`].
    pub fn polar_adapted(chart: Chart, polar_factor: f64, other_nodes: usize) -> Self {
        let mut res = Vec::new();
        let mut fixed = Vec::new();
        for m in chart.factors() {
            res.push(((default_nodes(m) as f64 * polar_factor).round() as usize).max(2));
            fixed.push(false);
            for _ in 1..m {
                res.push(other_nodes);
                fixed.push(true);
            }
        }
        let mut d = Self::with_resolution(chart, res);
        d.fixed = fixed;
        d
    }

    pub fn is_polar_adapted(&self) -> bool {
        self.fixed.iter().any(|&f| f)
    }

    /// Multiplies the per-angle resolutions by `factor` (rounded, at least 2).
    pub fn scaled(&self, factor: f64) -> Self {
        let res = self
            .resolution
            .iter()
            .zip(&self.fixed)
            .map(|(&r, &fixed)| if fixed { r } else { ((r as f64 * factor).round() as usize).max(2) })
            .collect();
        let mut d = Self::with_resolution(self.chart, res).with_orientation(self.orientation);
        d.fixed = self.fixed.clone();
        d
    }

    /// Reverses (`−1`) or keeps (`+1`) the standard orientation.
    pub fn with_orientation(mut self, sign: f64) -> Self {
        assert!(sign == 1.0 || sign == -1.0, "orientation must be ±1");
        self.orientation = sign;
        self
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Sign relating coordinate order to the orientation of the domain.
    pub fn orientation_sign(&self) -> f64 {
        self.orientation * self.chart_sign
    }

    pub fn node_count(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Chart coordinates of node `index` (last angle fastest) and its
    /// product weight.
    pub fn node(&self, index: usize, theta: &mut [f64]) -> f64 {
        let mut rest = index;
        let mut w = 1.0;
        for a in (0..self.axes.len()).rev() {
            let n = self.resolution[a];
            let k = rest % n;
            rest /= n;
            theta[a] = self.axes[a].0[k];
            w *= self.axes[a].1[k];
        }
        w
    }

    /// `Σ_nodes w · f(θ)` over the coordinate box. Nodes are split into
    /// fixed chunks; chunk sums are combined serially so the result does not
    /// depend on the thread count.
    pub fn sum_over_nodes<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(&[f64]) -> Result<C64> + Sync,
    {
        let total = self.node_count();
        let chunks = total.div_ceil(CHUNK);
        let partial: Vec<Result<(C64, C64)>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut theta = vec![0.0; self.dim()];
                let (mut sum, mut comp) = (ZERO, ZERO);
                for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let w = self.node(i, &mut theta);
                    let v = f(&theta)? * w;
                    neumaier(&mut sum, &mut comp, v);
                }
                Ok((sum, comp))
            })
            .collect();
        let (mut sum, mut comp) = (ZERO, ZERO);
        for p in partial {
            let (s, c) = p?;
            neumaier(&mut sum, &mut comp, s);
            comp += c;
        }
        Ok(sum + comp)
    }

    /// `∫ f dvol` against the round volume element.
    pub fn integrate_volume<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(&[f64]) -> Result<C64> + Sync,
    {
        self.sum_over_nodes(|theta| Ok(f(theta)? * self.chart.volume_element(theta)))
    }

    /// Integral of a top-degree coefficient in chart coordinates, with the
    /// domain orientation applied.
    pub fn integrate_coordinate_density<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(&[f64]) -> Result<C64> + Sync,
    {
        Ok(self.sum_over_nodes(f)? * self.orientation_sign())
    }

    pub fn check_dim(&self, dim: usize, what: &str) -> Result<()> {
        if dim != self.dim() {
            return Err(contract(format!(
                "{what} has chart dimension {dim} but the domain {} has dimension {}",
                self.chart.label(),
                self.dim()
            )));
        }
        Ok(())
    }
}

#[inline]
fn neumaier(sum: &mut C64, comp: &mut C64, v: C64) {
    let t = *sum + v;
    let fix = |s: f64, v: f64, t: f64| if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
    comp.re += fix(sum.re, v.re, t.re);
    comp.im += fix(sum.im, v.im, t.im);
    *sum = t;
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub resolution: Vec<usize>,
    pub value: C64,
    /// Distance to the previous row.
    pub delta: Option<f64>,
}

/// Refinement policy for [`converge`].
#[derive(Debug, Clone, Copy)]
pub struct Ladder {
    pub tolerance: f64,
    /// Doublings allowed after the base resolution fails to settle.
    pub max_doublings: usize,
    /// Largest grid the ladder may visit.
    pub max_nodes: usize,
}

impl Ladder {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            max_doublings: 2,
            max_nodes: 250_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Converged {
    pub value: C64,
    pub table: Vec<ConvergenceRow>,
    pub converged: bool,
    pub tolerance: f64,
}

impl Converged {
    pub fn last_delta(&self) -> f64 {
        self.table.last().and_then(|r| r.delta).unwrap_or(f64::INFINITY)
    }
}

/// Evaluates `f` at half the domain's resolution and at the domain's
/// resolution, doubling further while consecutive values differ by more
/// than the tolerance.
pub fn converge<F>(domain: &ChartedSphereDomain, ladder: Ladder, f: F) -> Result<Converged>
where
    F: Fn(&ChartedSphereDomain) -> Result<C64>,
{
    let mut table: Vec<ConvergenceRow> = Vec::new();
    let push = |d: &ChartedSphereDomain, table: &mut Vec<ConvergenceRow>| -> Result<f64> {
        let value = f(d)?;
        let delta = table.last().map(|r| (value - r.value).norm());
        table.push(ConvergenceRow {
            resolution: d.resolution().to_vec(),
            value,
            delta,
        });
        Ok(delta.unwrap_or(f64::INFINITY))
    };
    let half = domain.scaled(0.5);
    let mut factor = 1.0;
    let mut delta = if half.resolution() == domain.resolution() {
        // Halving is clamped at two nodes per angle; compare against a
        // doubled grid instead of against itself.
        push(domain, &mut table)?;
        factor = 2.0;
        push(&domain.scaled(factor), &mut table)?
    } else {
        push(&half, &mut table)?;
        push(domain, &mut table)?
    };
    let mut doublings = 0;
    while !(delta < ladder.tolerance) && doublings < ladder.max_doublings {
        factor *= 2.0;
        let next = domain.scaled(factor);
        if next.node_count() > ladder.max_nodes {
            break;
        }
        delta = push(&next, &mut table)?;
        doublings += 1;
    }
    let value = table.last().expect("two rows").value;
    Ok(Converged {
        value,
        table,
        converged: delta < ladder.tolerance,
        tolerance: ladder.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_volume(5) - PI.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn embedding_has_unit_norm() {
        for chart in [Chart::Sphere(1), Chart::Sphere(4), Chart::Product(2, 3)] {
            let d = ChartedSphereDomain::new(chart).scaled(0.25);
            let mut theta = vec![0.0; d.dim()];
            for i in (0..d.node_count()).step_by(7) {
                d.node(i, &mut theta);
                let x = chart.embed(&theta);
                let mut off = 0;
                for m in chart.factors() {
                    let n: f64 = x[off..off + m + 1].iter().map(|v| v * v).sum();
                    assert!((n.sqrt() - 1.0).abs() < 1e-14);
                    off += m + 1;
                }
            }
        }
    }

    #[test]
    fn volume_quadrature_at_default_resolution() {
        for m in 1..=4 {
            let d = ChartedSphereDomain::sphere(m);
            let v = d.integrate_volume(|_| Ok(C64::from(1.0))).unwrap();
            assert!((v.re / sphere_volume(m) - 1.0).abs() < 1e-10, "S^{m}: {v}");
        }
    }

    #[test]
    fn standard_charts_are_positively_oriented() {
        for m in 1..=5 {
            assert_eq!(Chart::Sphere(m).orientation_sign(), 1.0, "S^{m}");
        }
    }
}
