//! Builds domains and maps from a scenario and runs it.

use std::sync::Arc;

use chernloc::geometry::{
    build_collapse_map, mapping_degree, Chart, ChartedSphereDomain, CollapseMap, MatrixMap, Scaled, Stabilized,
};
use chernloc::oddchern::{
    assemble_split_map, deg, deg_star, generator, winding_number, ConstantMap, DegreeResult, GeneratorKind,
    Su2Coordinates, LADDER_TOLERANCE,
};
use chernloc::superconn::{flz_point_case, gamma_report_with, index_report, localize, SuperBundleModel};
use chernloc::{Error, C64};

use crate::acceptance;
use crate::config::{GridSpec, MapSpec, Recipe, ScenarioConfig, ScenarioKind};
use crate::report::{pair, CheckKind, Row, RunReport, Table};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub resolution_scale: f64,
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            resolution_scale: 1.0,
            seed: None,
        }
    }
}

/// A scenario that could not be set up: bad map data rather than bad
/// numerics.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct SetupError(pub Error);

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    scale: f64,
    seed: u64,
}

impl Ctx<'_> {
    fn sphere_dim(&self) -> usize {
        2 * self.cfg.n - 1
    }

    fn product(&self) -> (usize, usize) {
        (2 * self.cfg.n - 2 * self.cfg.k, 2 * self.cfg.k - 1)
    }

    fn chart(&self) -> Chart {
        if self.cfg.kind.on_product() {
            let (p, q) = self.product();
            Chart::Product(p, q)
        } else {
            Chart::Sphere(self.sphere_dim())
        }
    }

    fn domain(&self) -> ChartedSphereDomain {
        let chart = self.chart();
        let d = match &self.cfg.grid {
            GridSpec::Default => ChartedSphereDomain::new(chart),
            GridSpec::Polar { factor, other_nodes } => ChartedSphereDomain::polar_adapted(chart, *factor, *other_nodes),
            GridSpec::Explicit(res) => ChartedSphereDomain::with_resolution(chart, res.clone()),
        };
        self.rescale(d)
    }

    /// Default grid on `S^{2n−1}` for oracles on the product scenarios.
    fn sphere_domain(&self) -> ChartedSphereDomain {
        self.rescale(ChartedSphereDomain::sphere(self.sphere_dim()))
    }

    fn rescale(&self, d: ChartedSphereDomain) -> ChartedSphereDomain {
        if self.scale == 1.0 {
            d
        } else {
            d.scaled(self.scale)
        }
    }

    fn collapse(&self) -> Result<CollapseMap, Error> {
        let (p, q) = self.product();
        build_collapse_map(p, q, self.cfg.collapse_radius)
    }

    fn spec(&self) -> &MapSpec {
        self.cfg.map.as_ref().expect("scenario has a map")
    }
}

/// Map of a non-split recipe on a sphere or product with `ambient`
/// coordinates.
fn base_map(recipe: &Recipe, size: usize, ambient: usize) -> Result<Arc<dyn MatrixMap>, Error> {
    match recipe {
        Recipe::CircleWinding { m } => Ok(generator(GeneratorKind::CircleWinding(*m), size)),
        Recipe::Su2Identity => Ok(generator(GeneratorKind::Su2Identity, size)),
        Recipe::Constant { c } => Ok(Arc::new(ConstantMap {
            n: size,
            source_ambient: ambient,
            c: C64::from(*c),
        })),
        Recipe::Split { .. } => Err(Error::Contract("split recipes only on products".into())),
    }
}

fn wrap(map: Arc<dyn MatrixMap>, spec: &MapSpec) -> Arc<dyn MatrixMap> {
    let mut map = map;
    if spec.scale != 1.0 {
        map = Arc::new(Scaled {
            map,
            factor: C64::from(spec.scale),
        });
    }
    if spec.stabilize > 0 {
        map = Arc::new(Stabilized {
            map,
            extra: spec.stabilize,
        });
    }
    map
}

fn build_map(ctx: &Ctx) -> Result<Arc<dyn MatrixMap>, Error> {
    let spec = ctx.spec();
    let map = match &spec.recipe {
        Recipe::Split { f, h } => {
            let f = base_map(f, spec.size, 2 * ctx.cfg.k)?;
            let h = base_map(h, spec.size, 2 * ctx.cfg.n)?;
            assemble_split_map(f, h, &ctx.collapse()?)?
        }
        r => base_map(r, spec.size, ctx.chart().ambient_dim())?,
    };
    Ok(wrap(map, spec))
}

/// The sphere factor `h` of a product scenario, with the same wrappers as the
/// full map; `None` for a constant map.
fn sphere_factor(ctx: &Ctx) -> Result<Option<Arc<dyn MatrixMap>>, Error> {
    let spec = ctx.spec();
    match &spec.recipe {
        Recipe::Split { h, .. } => Ok(Some(wrap(base_map(h, spec.size, 2 * ctx.cfg.n)?, spec))),
        _ => Ok(None),
    }
}

/// Expected `deg` of a sphere recipe: analytic for windings and constants,
/// from the topological degree of the underlying `S^3 → S^3` map for su2.
fn deg_oracle(ctx: &Ctx, recipe: &Recipe, report: &mut RunReport) -> Result<i64, Error> {
    match recipe {
        Recipe::CircleWinding { m } => Ok(-i64::from(*m)),
        Recipe::Constant { .. } => Ok(0),
        Recipe::Su2Identity => {
            let top = su2_top_degree(ctx, report)?;
            Ok(-top)
        }
        Recipe::Split { .. } => unreachable!("split recipes have no sphere degree"),
    }
}

/// Topological degree of `x ↦ su2_identity(x)` read back as a point of `S^3`.
fn su2_top_degree(ctx: &Ctx, report: &mut RunReport) -> Result<i64, Error> {
    let coords = Su2Coordinates {
        map: generator(GeneratorKind::Su2Identity, 2),
    };
    let domain = ctx.rescale(ChartedSphereDomain::sphere(3));
    let md = mapping_degree(&coords, &domain, ctx.cfg.samples, ctx.seed)?;
    report.integer("mapping_degree", C64::from(md.value), md.rounded, md.residual);
    report.table("mapping_degree", &md.convergence);
    report.bound("mapping_degree converged", CheckKind::Convergence, last_delta(&md.convergence), 1e-4);
    report.bound("mapping_degree integral", CheckKind::Oracle, md.residual, ctx.cfg.integrality);
    let agree = md.preimage_counts.iter().all(|c| c.signed == md.rounded);
    report.check(
        "mapping_degree preimage counts",
        CheckKind::Oracle,
        agree,
        md.preimage_counts.len() as f64,
        f64::NAN,
        format!(
            "signed counts {:?}",
            md.preimage_counts.iter().map(|c| c.signed).collect::<Vec<_>>()
        ),
    );
    Ok(md.rounded)
}

fn last_delta(rows: &[chernloc::geometry::ConvergenceRow]) -> f64 {
    rows.last().and_then(|r| r.delta).unwrap_or(f64::INFINITY)
}

/// Ladder, integrality and oracle checks of one degree.
fn degree_checks(report: &mut RunReport, name: &str, d: &DegreeResult, integrality: f64, expected: Option<i64>) {
    report.check(
        &format!("{name} converged"),
        CheckKind::Convergence,
        d.converged,
        d.last_delta(),
        LADDER_TOLERANCE,
        "",
    );
    report.bound(&format!("{name} integral"), CheckKind::Oracle, d.residual, integrality);
    report.bound(&format!("{name} real"), CheckKind::Oracle, d.value.im.abs(), integrality);
    if let Some(e) = expected {
        report.check(
            &format!("{name} oracle"),
            CheckKind::Oracle,
            d.rounded == e,
            (d.value.re - e as f64).abs(),
            integrality,
            format!("expected {e}, got {}", d.rounded),
        );
    }
}

fn run_deg(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let map = build_map(ctx)?;
    let d = deg(map, &ctx.domain())?;
    report.degree("deg", &d);
    let expected = deg_oracle(ctx, &ctx.spec().recipe, report)?;
    degree_checks(report, "deg", &d, ctx.cfg.integrality, Some(expected));
    Ok(())
}

/// `deg(h)` on `S^{2n−1}`, or 0 for a constant map.
fn h_degree(ctx: &Ctx, report: &mut RunReport) -> Result<i64, Error> {
    match sphere_factor(ctx)? {
        Some(h) => {
            let d = deg(h, &ctx.sphere_domain())?;
            report.degree("deg(h)", &d);
            degree_checks(report, "deg(h)", &d, ctx.cfg.integrality, None);
            Ok(d.rounded)
        }
        None => Ok(0),
    }
}

fn run_deg_star(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let map = build_map(ctx)?;
    let d = deg_star(map, &ctx.domain())?;
    report.degree("deg*", &d);
    let expected = h_degree(ctx, report)?;
    degree_checks(report, "deg*", &d, ctx.cfg.integrality, Some(expected));
    Ok(())
}

fn models(ctx: &Ctx) -> Result<Vec<SuperBundleModel>, Error> {
    let model = SuperBundleModel::boundary(&ctx.domain(), build_map(ctx)?)?;
    Ok(vec![model; ctx.cfg.models])
}

fn run_gamma_limit(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let model = SuperBundleModel::boundary(&ctx.domain(), build_map(ctx)?)?;
    let g = gamma_report_with(&model, &ctx.cfg.t_values, ctx.cfg.t_nodes)?;
    for (t, v) in g.t_values.iter().zip(&g.boundary_integrals) {
        report.value(&format!("gamma(T={t})"), *v);
    }
    report.value("gamma_limit", g.extrapolated_limit);
    report.value("closed_form", g.closed_form.value);
    report.value("predicted", g.predicted);
    report.value("two_path_difference", C64::from(g.two_path_difference()));
    report.degree("deg*", &g.deg_star_value);
    report.table("gamma spatial", &g.limit_integral.spatial);
    report.raw_table(Table {
        name: format!("gamma t nodes (T={})", g.limit_integral.t_max),
        rows: g
            .limit_integral
            .t_table
            .iter()
            .map(|r| Row {
                resolution: vec![r.nodes],
                value: pair(r.value),
                delta: r.delta,
            })
            .collect(),
    });
    report.table("closed_form", &g.closed_form.convergence);
    report.check(
        "gamma converged",
        CheckKind::Convergence,
        g.limit_integral.converged && g.closed_form.converged,
        last_delta(&g.limit_integral.spatial),
        LADDER_TOLERANCE,
        "",
    );
    report.bound("gamma limit vs closed form", CheckKind::Oracle, g.two_path_difference(), ctx.cfg.two_path);
    report.bound("closed form vs (-1)^n deg*", CheckKind::Oracle, g.degree_difference(), ctx.cfg.two_path);
    let expected = h_degree(ctx, report)?;
    degree_checks(report, "deg*", &g.deg_star_value, ctx.cfg.integrality, Some(expected));
    Ok(())
}

fn run_localize(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let models = models(ctx)?;
    let l = localize(&models, ctx.cfg.n)?;
    report.integer("localize", C64::from(l.value as f64), l.value, (l.deg_star_path.re - l.value as f64).abs());
    report.value("deg*_path", l.deg_star_path);
    report.value("gamma_path", l.gamma_path);
    report.value("difference", C64::from(l.difference()));
    for (i, m) in l.models.iter().enumerate() {
        report.table(&format!("model {i} deg*"), &m.gamma.deg_star_value.convergence);
        report.table(&format!("model {i} gamma spatial"), &m.gamma.limit_integral.spatial);
    }
    report.check("models converged", CheckKind::Convergence, l.converged(), f64::NAN, LADDER_TOLERANCE, l.diagnostics());
    report.check("deg* integral", CheckKind::Oracle, l.degrees_accepted(), f64::NAN, ctx.cfg.integrality, "");
    report.bound("deg* path vs gamma path", CheckKind::Oracle, l.difference(), ctx.cfg.integrality);
    let s = if ctx.cfg.n % 2 == 1 { 1 } else { -1 };
    let expected = s * ctx.cfg.models as i64 * h_degree(ctx, report)?;
    report.check(
        "localize oracle",
        CheckKind::Oracle,
        l.value == expected,
        (l.value - expected).abs() as f64,
        0.5,
        format!("expected {expected}, got {}", l.value),
    );
    Ok(())
}

fn run_flz_point(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let map = build_map(ctx)?;
    let r = flz_point_case(map.clone(), &ctx.domain(), ctx.cfg.n)?;
    report.integer("flz", C64::from(r.value as f64), r.value, r.degree.residual);
    report.degree("deg", &r.degree);
    report.value("gamma_route", r.gamma_route);
    degree_checks(report, "deg", &r.degree, ctx.cfg.integrality, None);
    let expected = match &ctx.spec().recipe {
        Recipe::Constant { .. } => 0,
        Recipe::CircleWinding { .. } => {
            let w = winding_number(map.as_ref(), ctx.cfg.clutching_samples)?;
            report.integer("clutching_winding", C64::from(w as f64), w, 0.0);
            -w
        }
        Recipe::Su2Identity => su2_top_degree(ctx, report)?,
        Recipe::Split { .. } => unreachable!("split recipes are rejected on spheres"),
    };
    report.check(
        "flz oracle",
        CheckKind::Oracle,
        r.value == expected,
        (r.value - expected).abs() as f64,
        0.5,
        format!("expected {expected}, got {}", r.value),
    );
    Ok(())
}

fn run_index_report(ctx: &Ctx, report: &mut RunReport) -> Result<(), Error> {
    let models = models(ctx)?;
    let r = index_report(&models, ctx.cfg.n)?;
    report.integer("index", r.value, r.rounded, (r.value.re - r.rounded as f64).abs());
    for (i, d) in r.degrees.iter().enumerate() {
        report.degree(&format!("model {i} deg*"), d);
        degree_checks(report, &format!("model {i} deg*"), d, ctx.cfg.integrality, None);
    }
    let s = if ctx.cfg.n.is_multiple_of(2) { 1 } else { -1 };
    let expected = s * ctx.cfg.models as i64 * h_degree(ctx, report)?;
    report.check(
        "index oracle",
        CheckKind::Oracle,
        r.rounded == expected,
        (r.rounded - expected).abs() as f64,
        0.5,
        format!("expected {expected}, got {}", r.rounded),
    );
    Ok(())
}

fn run_verify(ctx: &Ctx, report: &mut RunReport) {
    for outcome in acceptance::run_all(ctx.seed) {
        let line = outcome.line();
        eprintln!("{line}");
        report.check(&outcome.id, CheckKind::Oracle, outcome.passed, f64::NAN, f64::NAN, outcome.summary());
    }
}

/// Runs a scenario. Numerical failures (unconverged ladders, non-integral
/// degrees, disagreeing paths) become failed checks in the report; errors in
/// setting up the maps are returned.
pub fn run(cfg: &ScenarioConfig, opts: RunOptions) -> Result<RunReport, SetupError> {
    let ctx = Ctx {
        cfg,
        scale: opts.resolution_scale,
        seed: opts.seed.unwrap_or(cfg.seed),
    };
    let mut echo = cfg.echo();
    echo.insert("seed".into(), ctx.seed.to_string());
    if ctx.scale != 1.0 {
        echo.insert("resolution_scale".into(), ctx.scale.to_string());
    }
    let mut report = RunReport::new(cfg.kind.name(), echo);
    let outcome = match cfg.kind {
        ScenarioKind::Deg => run_deg(&ctx, &mut report),
        ScenarioKind::DegStar => run_deg_star(&ctx, &mut report),
        ScenarioKind::GammaLimit => run_gamma_limit(&ctx, &mut report),
        ScenarioKind::Localize => run_localize(&ctx, &mut report),
        ScenarioKind::FlzPoint => run_flz_point(&ctx, &mut report),
        ScenarioKind::IndexReport => run_index_report(&ctx, &mut report),
        ScenarioKind::Verify => {
            run_verify(&ctx, &mut report);
            Ok(())
        }
    };
    match outcome {
        Ok(()) => {}
        Err(e @ (Error::Contract(_) | Error::Singular { .. })) => return Err(SetupError(e)),
        Err(e @ Error::Unconverged { delta, tolerance, .. }) => {
            report.check("numerics", CheckKind::Convergence, false, delta, tolerance, e.to_string())
        }
        Err(e @ Error::NotIntegral { residual, tolerance, .. }) => {
            report.check("numerics", CheckKind::Oracle, false, residual, tolerance, e.to_string())
        }
        Err(e @ Error::Mismatch { difference, tolerance, .. }) => {
            report.check("numerics", CheckKind::Oracle, false, difference, tolerance, e.to_string())
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn run_text(text: &str) -> RunReport {
        run(&ScenarioConfig::parse(text).unwrap(), RunOptions::default()).unwrap()
    }

    #[test]
    fn winding_degree() {
        let r = run_text("scenario = deg\nn = 1\nmap.kind = circle_winding\nmap.m = 2\n");
        assert_eq!(r.status, Status::Pass, "{r:?}");
        let v = &r.values[0];
        assert_eq!(v.rounded, Some(-2));
        assert!(v.residual.unwrap() < 1e-10);
        assert!(r.tables[0].rows.len() >= 2);
    }

    #[test]
    fn flz_on_the_circle() {
        let r = run_text("scenario = flz-point\nn = 1\nmap.kind = circle_winding\nmap.m = -2\nmap.scale = 3\nmap.stabilize = 1\n");
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert_eq!(r.values[0].rounded, Some(2));
    }

    #[test]
    fn clamped_grids_still_refine() {
        let r = run_text("scenario = deg\nn = 2\nmap.kind = su2_identity\ngrid.kind = explicit\ngrid.resolution = 2,2,2\n");
        assert_eq!(r.status, Status::Pass, "{r:?}");
        let rows = &r.tables[0].rows;
        assert!(rows.windows(2).all(|w| w[0].resolution != w[1].resolution), "{rows:?}");
    }
}
