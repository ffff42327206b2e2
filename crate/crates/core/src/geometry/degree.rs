//! Topological degree of maps into spheres: the integral of the pulled-back
//! normalized volume form, cross-checked by counting preimages of regular
//! values.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chart::{converge, sphere_volume, Chart, ChartedSphereDomain, ConvergenceRow, Ladder};
use super::collapse::{chart_angles, local_degree_sign};
use super::fields::image_jacobian;
use super::maps::PointMap;
use crate::error::{contract, Error, Result};
use crate::forms::determinant;
use crate::linalg::C64;

/// Integrality tolerance for degree integrals.
pub const DEGREE_TOLERANCE: f64 = 1e-4;

/// Below this `|det|` a preimage is treated as critical.
const REGULARITY: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PreimageCount {
    pub value: Vec<f64>,
    pub preimages: usize,
    pub signed: i64,
}

#[derive(Debug, Clone)]
pub struct MappingDegree {
    pub value: f64,
    pub rounded: i64,
    pub residual: f64,
    pub converged: bool,
    pub convergence: Vec<ConvergenceRow>,
    pub preimage_counts: Vec<PreimageCount>,
}

impl MappingDegree {
    /// Integral and preimage counts agree and the integral is integral.
    pub fn consistent(&self) -> bool {
        self.residual < DEGREE_TOLERANCE && self.preimage_counts.iter().all(|c| c.signed == self.rounded)
    }
}

/// `det[F, ∂F/∂θ_1, …, ∂F/∂θ_d] / Vol(S^d)`: the chart density of the pulled
/// back normalized volume form.
pub fn degree_density(chart: Chart, map: &dyn PointMap, theta: &[f64]) -> f64 {
    let d = chart.dim();
    let (y, jac) = image_jacobian(chart, Some(map), theta);
    let a = d + 1;
    let mut frame = [0.0; 64];
    let frame = &mut frame[..a * a];
    for r in 0..a {
        frame[r * a] = y[r];
        for c in 0..d {
            frame[r * a + c + 1] = jac[r * d + c];
        }
    }
    determinant(frame, a) / sphere_volume(d)
}

/// `∫ F^*(vol / Vol)` at one resolution.
pub fn degree_integral(map: &dyn PointMap, domain: &ChartedSphereDomain) -> Result<f64> {
    let chart = domain.chart();
    check_shapes(map, chart)?;
    let v = domain.integrate_coordinate_density(|theta| Ok(C64::from(degree_density(chart, map, theta))))?;
    Ok(v.re)
}

fn check_shapes(map: &dyn PointMap, chart: Chart) -> Result<()> {
    if map.source_ambient() != chart.ambient_dim() || map.target_ambient() != chart.dim() + 1 {
        return Err(contract(format!(
            "mapping degree of {} needs a map {} → S^{}",
            map.describe(),
            chart.label(),
            chart.dim()
        )));
    }
    Ok(())
}

/// Uniform random point of `S^m`.
pub fn random_sphere_point(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Preimages of `y` in chart coordinates: closed form when the map provides
/// one, otherwise Gauss-Newton from every coarse-grid node whose image is
/// close to `y`.
pub fn find_preimages(map: &dyn PointMap, chart: Chart, y: &[f64]) -> Vec<Vec<f64>> {
    if let Some(pts) = map.preimages(y) {
        return pts.iter().map(|x| chart_angles(chart, x)).collect();
    }
    let d = chart.dim();
    let per_axis = ((20_000f64).powf(1.0 / d as f64).floor() as usize).max(4);
    let coarse = ChartedSphereDomain::with_resolution(chart, vec![per_axis; d]);
    let mut theta = vec![0.0; d];
    let mut found: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..coarse.node_count() {
        coarse.node(i, &mut theta);
        let img = map.apply(&chart.embed(&theta));
        if dist(&img, y) > 0.6 {
            continue;
        }
        if let Some(sol) = gauss_newton(map, chart, y, &theta) {
            let x = chart.embed(&sol);
            if !found.iter().any(|(px, _)| dist(px, &x) < 1e-6) {
                found.push((x, sol));
            }
        }
    }
    found.into_iter().map(|(_, t)| t).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Solves `F(embed(θ)) = y` by Gauss-Newton on the normal equations.
fn gauss_newton(map: &dyn PointMap, chart: Chart, y: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let d = chart.dim();
    let mut theta = start.to_vec();
    for _ in 0..60 {
        let (img, jac) = image_jacobian(chart, Some(map), &theta);
        let a = img.len();
        let res: Vec<f64> = img.iter().zip(y).map(|(u, v)| u - v).collect();
        let r = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 1e-13 {
            return Some(theta);
        }
        // (JᵀJ) δ = −Jᵀ r
        let mut ata = vec![0.0; d * d];
        let mut atb = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                ata[i * d + j] = (0..a).map(|k| jac[k * d + i] * jac[k * d + j]).sum();
            }
            atb[i] = -(0..a).map(|k| jac[k * d + i] * res[k]).sum::<f64>();
        }
        let delta = solve(&mut ata, &mut atb, d)?;
        let step = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let damp = if step > 0.5 { 0.5 / step } else { 1.0 };
        for (t, dv) in theta.iter_mut().zip(&delta) {
            *t += damp * dv;
        }
    }
    let (img, _) = image_jacobian(chart, Some(map), &theta);
    (dist(&img, y) < 1e-10).then_some(theta)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-14 {
            return None;
        }
        for j in 0..n {
            a.swap(piv * n + j, col * n + j);
        }
        b.swap(piv, col);
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Some(x)
}

/// Signed preimage count at `y`, or `None` when `y` is not a regular value.
pub fn signed_preimage_count(map: &dyn PointMap, chart: Chart, y: &[f64]) -> Option<PreimageCount> {
    let pts = find_preimages(map, chart, y);
    let mut signed = 0;
    for theta in &pts {
        let (sign, size) = local_degree_sign(chart, map, theta);
        if size < REGULARITY {
            return None;
        }
        signed += sign as i64;
    }
    Some(PreimageCount {
        value: y.to_vec(),
        preimages: pts.len(),
        signed,
    })
}

/// Degree of `map: domain → S^d` from the volume integral, with
/// half/full/doubled resolution convergence and signed preimage counts at
/// `samples` random regular values.
pub fn mapping_degree(
    map: &dyn PointMap,
    domain: &ChartedSphereDomain,
    samples: usize,
    seed: u64,
) -> Result<MappingDegree> {
    let chart = domain.chart();
    check_shapes(map, chart)?;
    let conv = converge(domain, Ladder::new(DEGREE_TOLERANCE), |d| {
        degree_integral(map, d).map(C64::from)
    })?;
    let value = conv.value.re;
    let rounded = value.round() as i64;
    let residual = (value - rounded as f64).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::new();
    let mut attempts = 0;
    while counts.len() < samples && attempts < 20 * samples.max(1) {
        attempts += 1;
        let y = random_sphere_point(&mut rng, chart.dim());
        if let Some(c) = signed_preimage_count(map, chart, &y) {
            counts.push(c);
        }
    }
    Ok(MappingDegree {
        value,
        rounded,
        residual,
        converged: conv.converged,
        convergence: conv.table,
        preimage_counts: counts,
    })
}

/// Like [`mapping_degree`] but fails unless the integral is converged,
/// integral to [`DEGREE_TOLERANCE`] and matches every preimage count.
pub fn checked_mapping_degree(
    map: &dyn PointMap,
    domain: &ChartedSphereDomain,
    samples: usize,
    seed: u64,
) -> Result<MappingDegree> {
    let deg = mapping_degree(map, domain, samples, seed)?;
    if !deg.converged {
        let delta = deg.convergence.last().and_then(|r| r.delta).unwrap_or(f64::INFINITY);
        return Err(Error::Unconverged {
            what: format!("degree integral of {}", map.describe()),
            delta,
            tolerance: DEGREE_TOLERANCE,
        });
    }
    if deg.residual >= DEGREE_TOLERANCE {
        return Err(Error::NotIntegral {
            what: format!("degree of {}", map.describe()),
            value: deg.value,
            residual: deg.residual,
            tolerance: DEGREE_TOLERANCE,
        });
    }
    if let Some(c) = deg.preimage_counts.iter().find(|c| c.signed != deg.rounded) {
        return Err(Error::Mismatch {
            what: format!("degree of {}: integral {} vs preimage count {}", map.describe(), deg.rounded, c.signed),
            difference: (c.signed - deg.rounded).abs() as f64,
            tolerance: 0.0,
        });
    }
    Ok(deg)
}
