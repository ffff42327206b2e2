//! The acceptance suite: twelve numbered criteria, each with pinned
//! tolerances and, where it has one, a time budget.

use std::sync::Arc;
use std::time::{Duration, Instant};

use chernloc::forms::GradedMatrixForm;
use chernloc::geometry::numdiff::richardson;
use chernloc::geometry::{
    build_collapse_map, checked_mapping_degree, mapping_degree, Chart, ChartedSphereDomain, CollapseMap,
    ExteriorDerivative, FnAmbientForm, FormField, MatrixMap, PullbackField, Scaled,
};
use chernloc::linalg::ComplexMatrix;
use chernloc::oddchern::{
    assemble_split_map, deg, deg_star, generator, transgression_pair, winding_number, ChernSimonsField,
    ConstantMap, GeneratorKind, HomotopyFamily, MaurerCartanField, OddChernField, Slice, Su2Coordinates,
    TrigFamily, TrivialConnection, CLUTCHING_SAMPLES, CS_U_NODES,
};
use chernloc::superconn::{
    flz_point_case, gamma_report, gaussian_moment, gaussian_moment_quadrature, localize, superconn_chern_form,
    unitarize, SuperBundleModel, T_MAX, T_NODES,
};
use chernloc::{Error, C64};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WINDING_RESIDUAL: f64 = 1e-10;
pub const SU2_RESIDUAL: f64 = 1e-6;
pub const ORACLE_INTEGRALITY: f64 = 1e-4;
pub const CS_AGREEMENT: f64 = 1e-7;
pub const TRANSGRESSION_RELATIVE: f64 = 1e-4;
pub const SPLIT_SPREAD: f64 = 1e-6;
pub const COLLAPSE_RESIDUAL: f64 = 1e-4;
pub const MOMENT_ERROR: f64 = 1e-12;
pub const TWO_PATH: f64 = 1e-7;
pub const LOCALIZE_RESIDUAL: f64 = 1e-4;
pub const VANISHING: f64 = 1e-12;
pub const ROBUSTNESS: f64 = 1e-8;

/// Collapse radius used throughout the suite.
pub const RADIUS: f64 = 4.0;

/// `(id, title, budget in seconds)`.
pub const CRITERIA: [(u32, &str, Option<u64>); 12] = [
    (1, "winding quantization on S^1", Some(1)),
    (2, "su2 generator on S^3", Some(30)),
    (3, "cs(d, d + g^-1 dg) = Ch(g)", None),
    (4, "transgression d/dt Ch = d Ch~", None),
    (5, "product splitting deg* = deg(h)", Some(120)),
    (6, "collapse map degree", None),
    (7, "Gaussian moments", None),
    (8, "gamma limit two-path identity", Some(300)),
    (9, "localization sign chain", None),
    (10, "point case against clutching", None),
    (11, "vanishing of ch(E, A_T)", None),
    (12, "scale and unitarization robustness", None),
];

#[derive(Debug, Clone)]
pub struct Measurement {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Outcome {
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = self
            .measurements
            .iter()
            .filter(|m| !m.passed)
            .chain(self.measurements.iter().filter(|m| m.passed))
            .map(|m| format!("{}{}: {}", if m.passed { "" } else { "FAILED " }, m.name, m.detail))
            .collect();
        let time = match self.budget {
            Some(b) => format!("{:.2} s (budget {} s)", self.elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.2} s", self.elapsed.as_secs_f64()),
        };
        parts.push(time);
        parts.join("; ")
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary()
        )
    }
}

#[derive(Default)]
struct Rec {
    ms: Vec<Measurement>,
}

impl Rec {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.ms.push(Measurement {
            name: name.into(),
            passed,
            detail,
        });
    }

    /// `value < tolerance`; NaN fails.
    fn below(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.push(name, value < tolerance, format!("{value:.3e} < {tolerance:.0e}"));
    }

    fn equal(&mut self, name: impl Into<String>, got: i64, want: i64) {
        self.push(name, got == want, format!("{got} (want {want})"));
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        let detail = if detail.is_empty() { ok.to_string() } else { detail };
        self.push(name, ok, detail);
    }
}

type Body = fn(&mut Rec, u64) -> Result<(), Error>;

fn body(id: u32) -> Body {
    match id {
        1 => c1_winding,
        2 => c2_su2,
        3 => c3_chern_simons,
        4 => c4_transgression,
        5 => c5_splitting,
        6 => c6_collapse,
        7 => c7_moments,
        8 => c8_two_path,
        9 => c9_localize,
        10 => c10_point_case,
        11 => c11_vanishing,
        12 => c12_robustness,
        _ => panic!("no criterion {id}"),
    }
}

/// Runs criterion `id` (1 to 12).
pub fn run_criterion(id: u32, seed: u64) -> Outcome {
    let (_, title, budget) = CRITERIA.iter().copied().find(|c| c.0 == id).expect("criterion id in 1..=12");
    let budget = budget.map(Duration::from_secs);
    let mut rec = Rec::default();
    let start = Instant::now();
    if let Err(e) = body(id)(&mut rec, seed) {
        rec.holds("error", false, e.to_string());
    }
    let elapsed = start.elapsed();
    if rec.ms.is_empty() {
        rec.holds("measurements", false, "none recorded");
    }
    let in_time = budget.is_none_or(|b| elapsed <= b);
    Outcome {
        id: format!("C{id}"),
        title: title.into(),
        passed: in_time && rec.ms.iter().all(|m| m.passed),
        measurements: rec.ms,
        elapsed,
        budget,
    }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run_criterion(c.0, seed)).collect()
}

fn su2() -> Arc<dyn MatrixMap> {
    generator(GeneratorKind::Su2Identity, 2)
}

fn constant(n: usize, ambient: usize, c: f64) -> Arc<dyn MatrixMap> {
    Arc::new(ConstantMap {
        n,
        source_ambient: ambient,
        c: C64::from(c),
    })
}

fn product_domain(p: usize, q: usize) -> ChartedSphereDomain {
    ChartedSphereDomain::polar_adapted(Chart::Product(p, q), 2.0, 8)
}

/// `v = pr₂*f · φ*h` on `S^2 × S^1` with `f = z^m` (identity for `m = None`)
/// and `h` the su2 generator.
fn split_model_map(phi: &CollapseMap, m: Option<i32>) -> Result<Arc<dyn MatrixMap>, Error> {
    let f = match m {
        Some(m) => generator(GeneratorKind::CircleWinding(m), 2),
        None => constant(2, 2, 1.0),
    };
    assemble_split_map(f, su2(), phi)
}

fn c1_winding(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let domain = ChartedSphereDomain::sphere(1);
    let mut worst: f64 = 0.0;
    for m in -3..=3 {
        let d = deg(generator(GeneratorKind::CircleWinding(m), 1), &domain)?;
        rec.equal(format!("deg(z^{m})"), d.rounded, -i64::from(m));
        worst = worst.max(d.residual).max(d.value.im.abs());
    }
    rec.below("max residual", worst, WINDING_RESIDUAL);
    Ok(())
}

fn c2_su2(rec: &mut Rec, seed: u64) -> Result<(), Error> {
    let domain = ChartedSphereDomain::sphere(3);
    let oracle = mapping_degree(&Su2Coordinates { map: su2() }, &domain, 4, seed)?;
    rec.below("oracle residual", oracle.residual, ORACLE_INTEGRALITY);
    rec.holds(
        "oracle preimage counts",
        oracle.consistent(),
        format!("{:?}", oracle.preimage_counts.iter().map(|c| c.signed).collect::<Vec<_>>()),
    );
    rec.equal("oracle", oracle.rounded, 1);
    let d = deg(su2(), &domain)?;
    rec.equal("deg", d.rounded, -oracle.rounded);
    rec.below("deg residual", d.residual.max(d.value.im.abs()), SU2_RESIDUAL);
    Ok(())
}

/// `∫ (cs(d, d + ω) − Ch(g)) ∧ β` over `domain`.
fn cs_difference(map: Arc<dyn MatrixMap>, domain: &ChartedSphereDomain, beta: Option<&PullbackField>) -> Result<f64, Error> {
    let chart = domain.chart();
    let cs = ChernSimonsField::new(
        Arc::new(TrivialConnection { chart, n: map.size() }),
        Arc::new(MaurerCartanField::new(chart, map.clone())),
        CS_U_NODES,
    );
    let ch = OddChernField::new(chart, map);
    let z = domain.integrate_coordinate_density(|theta| {
        let diff = cs.eval(theta)?.sub(&ch.eval(theta)?)?;
        match beta {
            None => Ok(diff.top()),
            Some(b) => Ok(chernloc::forms::wedge(&diff.degree_part(1), &b.eval(theta)?)?.top()),
        }
    })?;
    Ok(z.norm())
}

fn constant_two_form(a: usize, b: usize) -> PullbackField {
    let form = FnAmbientForm::new(4, 1, move |_| GradedMatrixForm::monomial(4, &[a, b], &ComplexMatrix::identity(1)));
    PullbackField::new(Chart::Sphere(3), None, Arc::new(form))
}

fn trig_slice(base: Arc<dyn MatrixMap>, rng: &mut ChaCha8Rng, t: f64) -> Arc<dyn MatrixMap> {
    Arc::new(Slice {
        family: Arc::new(TrigFamily::random(base, rng)),
        t,
    })
}

fn c3_chern_simons(rec: &mut Rec, seed: u64) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s1 = ChartedSphereDomain::sphere(1);
    for (name, map) in [
        ("S^1 z^1", generator(GeneratorKind::CircleWinding(1), 1)),
        ("S^1 z^-2 (N=2)", generator(GeneratorKind::CircleWinding(-2), 2)),
        ("S^1 trig", trig_slice(generator(GeneratorKind::CircleWinding(1), 2), &mut rng, 0.5)),
    ] {
        rec.below(name, cs_difference(map, &s1, None)?, CS_AGREEMENT);
    }
    let s3 = ChartedSphereDomain::with_resolution(Chart::Sphere(3), vec![16, 16, 16]);
    for (name, map) in [("S^3 su2", su2()), ("S^3 trig", trig_slice(su2(), &mut rng, 0.5))] {
        rec.below(format!("{name} top"), cs_difference(map.clone(), &s3, None)?, CS_AGREEMENT);
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                worst = worst.max(cs_difference(map.clone(), &s3, Some(&constant_two_form(a, b)))?);
            }
        }
        rec.below(format!("{name} degree 1 against dx_a dx_b"), worst, CS_AGREEMENT);
    }
    Ok(())
}

/// Every component of a scalar form, in mask order.
fn components(f: &GradedMatrixForm) -> Vec<C64> {
    (0..1u32 << f.dim()).map(|m| f.scalar_component(m)).collect()
}

fn random_point(chart: Chart, rng: &mut ChaCha8Rng) -> Vec<f64> {
    chart
        .angle_ranges()
        .iter()
        .map(|&(a, b)| {
            let margin = 0.05 * (b - a);
            rng.random_range(a + margin..b - margin)
        })
        .collect()
}

fn c4_transgression(rec: &mut Rec, seed: u64) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7472_616e);
    for (chart, base) in [
        (Chart::Sphere(1), generator(GeneratorKind::CircleWinding(1), 2)),
        (Chart::Sphere(3), su2()),
    ] {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let family: Arc<dyn HomotopyFamily> = Arc::new(TrigFamily::random(base.clone(), &mut rng));
            for _ in 0..3 {
                let theta = random_point(chart, &mut rng);
                for t in [0.25, 0.75] {
                    let mut failure = None;
                    let dt = richardson(
                        |s| match transgression_pair(chart, family.clone(), s).0.eval(&theta) {
                            Ok(f) => components(&f),
                            Err(e) => {
                                failure.get_or_insert(e);
                                vec![C64::from(f64::NAN); 1 << chart.dim()]
                            }
                        },
                        t,
                    );
                    if let Some(e) = failure {
                        return Err(e);
                    }
                    let tilde = transgression_pair(chart, family.clone(), t).1;
                    let d = components(&ExteriorDerivative::new(Arc::new(tilde)).eval(&theta)?);
                    let scale = dt.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
                    let err = dt.iter().zip(&d).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    worst = worst.max(err / scale);
                }
            }
        }
        rec.below(format!("{} relative error", chart.label()), worst, TRANSGRESSION_RELATIVE);
    }
    Ok(())
}

fn c5_splitting(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let phi = build_collapse_map(2, 1, RADIUS)?;
    let domain = product_domain(2, 1);
    let s3 = ChartedSphereDomain::sphere(3);
    for (hname, h) in [("const", constant(2, 4, 1.0)), ("su2", su2())] {
        let dh = deg(h.clone(), &s3)?;
        let mut values = Vec::new();
        for m in [0, 1, 3] {
            let v = assemble_split_map(generator(GeneratorKind::CircleWinding(m), 2), h.clone(), &phi)?;
            let d = deg_star(v, &domain)?;
            rec.equal(format!("deg*(z^{m}, {hname})"), d.rounded, dh.rounded);
            rec.below(format!("deg*(z^{m}, {hname}) residual"), d.residual, ORACLE_INTEGRALITY);
            values.push(d.value);
        }
        let spread = values
            .iter()
            .flat_map(|a| values.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        rec.below(format!("spread over f, h = {hname}"), spread, SPLIT_SPREAD);
    }
    Ok(())
}

fn c6_collapse(rec: &mut Rec, seed: u64) -> Result<(), Error> {
    for (p, q) in [(2, 1), (2, 3), (4, 1)] {
        let phi = build_collapse_map(p, q, RADIUS)?;
        let domain = product_domain(p, q);
        let d = checked_mapping_degree(&phi, &domain, 4, seed)?;
        rec.equal(format!("deg phi on S^{p} x S^{q}"), d.rounded, 1);
        rec.below(format!("residual ({p},{q})"), d.residual, COLLAPSE_RESIDUAL);
    }
    Ok(())
}

fn c7_moments(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    for n in 1..=3 {
        let exact: f64 = (1..n).map(|i| i as f64).product();
        rec.below(format!("analytic n={n}"), (2.0 * gaussian_moment(n) - exact).abs(), MOMENT_ERROR);
        let q = 2.0 * gaussian_moment_quadrature(n, T_MAX, T_NODES);
        rec.below(format!("quadrature n={n}"), (q - exact).abs(), MOMENT_ERROR);
    }
    Ok(())
}

fn c8_two_path(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let phi = build_collapse_map(2, 1, RADIUS)?;
    let domain = product_domain(2, 1);
    for (name, m) in [("phi*h", None), ("z^1 . phi*h", Some(1)), ("z^3 . phi*h", Some(3))] {
        let model = SuperBundleModel::boundary(&domain, split_model_map(&phi, m)?)?;
        let r = gamma_report(&model, &[T_MAX])?;
        rec.holds(format!("{name} converged"), r.converged(), "");
        rec.below(format!("{name} gamma(8) vs closed form"), r.two_path_difference(), TWO_PATH);
        rec.below(format!("{name} closed form vs (-1)^n deg*"), r.degree_difference(), TWO_PATH);
        rec.equal(format!("{name} deg*"), r.deg_star_value.rounded, -1);
    }
    Ok(())
}

fn c9_localize(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let phi = build_collapse_map(2, 1, RADIUS)?;
    let model = SuperBundleModel::boundary(&product_domain(2, 1), split_model_map(&phi, None)?)?;
    let l = localize(&[model], 2)?;
    rec.equal("localize", l.value, 1);
    rec.holds("check", l.check().is_ok(), l.check().err().map(|e| e.to_string()).unwrap_or_default());
    rec.below("|-(gamma limits) - value|", l.difference(), LOCALIZE_RESIDUAL);
    rec.below("|deg* path - value|", (l.deg_star_path - C64::from(l.value as f64)).norm(), LOCALIZE_RESIDUAL);
    Ok(())
}

fn c10_point_case(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let domain = ChartedSphereDomain::sphere(1);
    for m in -2..=2 {
        let g = generator(GeneratorKind::CircleWinding(m), 1);
        let w = winding_number(g.as_ref(), CLUTCHING_SAMPLES)?;
        let r = flz_point_case(g, &domain, 1)?;
        rec.equal(format!("clutching winding m={m}"), w, i64::from(m));
        rec.equal(format!("flz(z^{m})"), r.value, -w);
    }
    Ok(())
}

/// Largest component of `ch(E, A_T)` over at most 256 strided nodes.
fn max_chern(model: &SuperBundleModel, t: f64) -> Result<f64, Error> {
    let field = superconn_chern_form(model, t)?;
    let domain = model.domain();
    let total = domain.node_count();
    let mut theta = vec![0.0; domain.dim()];
    let mut worst: f64 = 0.0;
    for i in (0..total).step_by(total.div_ceil(256)) {
        domain.node(i, &mut theta);
        worst = worst.max(field.eval(&theta)?.max_abs());
    }
    Ok(worst)
}

fn c11_vanishing(rec: &mut Rec, seed: u64) -> Result<(), Error> {
    let phi = build_collapse_map(2, 1, RADIUS)?;
    let domain = product_domain(2, 1);
    let v = split_model_map(&phi, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed = trig_slice(v.clone(), &mut rng, 0.5);
    for (name, model) in [
        ("phi*h", SuperBundleModel::boundary(&domain, v)?.assume_unitary()?),
        ("polar(trig perturbation)", SuperBundleModel::boundary(&domain, perturbed)?.unitarized()?),
    ] {
        let values: Vec<f64> = [0.0, 2.0, 4.0, 6.0].iter().map(|&t| max_chern(&model, t)).collect::<Result<_, _>>()?;
        rec.holds(format!("{name} T=0,2,4"), true, format!("{:.1e}, {:.1e}, {:.1e}", values[0], values[1], values[2]));
        rec.below(format!("{name} T=6"), values[3], VANISHING);
    }
    Ok(())
}

fn c12_robustness(rec: &mut Rec, _seed: u64) -> Result<(), Error> {
    let phi = build_collapse_map(2, 1, RADIUS)?;
    let domain = product_domain(2, 1);
    let v = split_model_map(&phi, Some(1))?;
    let scaled = |c: f64| -> Arc<dyn MatrixMap> {
        Arc::new(Scaled {
            map: v.clone(),
            factor: C64::from(c),
        })
    };
    let run = |map: Arc<dyn MatrixMap>| -> Result<(C64, C64, i64, C64), Error> {
        let l = localize(&[SuperBundleModel::boundary(&domain, map)?], 2)?;
        let g = &l.models[0].gamma;
        Ok((g.deg_star_value.value, g.extrapolated_limit, l.value, l.gamma_path))
    };
    let base = run(v.clone())?;
    for (name, map) in [
        ("0.1 v", scaled(0.1)),
        ("10 v", scaled(10.0)),
        ("polar(v)", unitarize(v.clone(), &domain)?),
        ("polar(10 v)", unitarize(scaled(10.0), &domain)?),
    ] {
        let r = run(map)?;
        rec.below(format!("{name} deg*"), (r.0 - base.0).norm(), ROBUSTNESS);
        rec.below(format!("{name} gamma limit"), (r.1 - base.1).norm(), ROBUSTNESS);
        rec.equal(format!("{name} localize"), r.2, base.2);
        rec.below(format!("{name} gamma path"), (r.3 - base.3).norm(), ROBUSTNESS);
    }
    Ok(())
}
