//! Scenario files: one `key = value` per line, `#` starts a comment, nested
//! map recipes use dotted keys.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `scenario` | required | `deg`, `deg-star`, `gamma-limit`, `localize`, `flz-point`, `index-report`, `verify` |
//! | `n` | 2 | half the dimension of the ambient manifold |
//! | `k` | 1 | the singular sphere is `S^{2k−1}` (product scenarios only) |
//! | `grid.kind` | `polar` on products, `default` on spheres | `default`, `polar` or `explicit` |
//! | `grid.polar_factor` | 2 | polar angles at this multiple of the default nodes |
//! | `grid.other_nodes` | 8 | nodes on the remaining angles of a polar grid |
//! | `grid.resolution` | none | comma-separated nodes per angle for `explicit` |
//! | `collapse.radius` | 4 | radius `R` of the collapse map |
//! | `map.kind` | required | `circle_winding`, `su2_identity`, `constant` or `split` |
//! | `map.m` | 1 | winding of `circle_winding` |
//! | `map.c` | 1 | value of `constant` (a real multiple of the identity) |
//! | `map.f.*`, `map.h.*` | required for `split` | recipes of `f` on `S^{2k−1}` and `h` on `S^{2n−1}` |
//! | `map.size` | 2 (1 for `circle_winding`) | matrix size `N` |
//! | `map.scale` | 1 | positive factor applied to the whole map |
//! | `map.stabilize` | 0 | extra identity block |
//! | `models` | 1 | identical copies of the boundary model |
//! | `t_values` | `2,4,6,8` | `T` values reported for `gamma-limit` |
//! | `t_nodes` | 200 | Gauss-Legendre nodes in `t` |
//! | `samples` | 4 | random regular values for preimage counts |
//! | `seed` | 0 | seed for random regular values and property suites |
//! | `clutching_samples` | 4096 | samples for clutching winding numbers |
//! | `tolerance.integrality` | 1e-4 | accepted distance of a degree from an integer |
//! | `tolerance.two_path` | 1e-7 | accepted disagreement between the γ paths |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Parsed `key = value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("line {}", i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&at, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-') {
                return Err(ConfigError::new(&at, format!("invalid key `{key}`")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::new(key, format!("duplicate key ({at})")));
            }
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| ConfigError::new(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| ConfigError::new(key, format!("cannot parse `{}`: {e}", s.trim())))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn keys_under<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.keys().map(String::as_str).filter(move |k| k.starts_with(prefix))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Deg,
    DegStar,
    GammaLimit,
    Localize,
    FlzPoint,
    IndexReport,
    Verify,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        Self::Deg,
        Self::DegStar,
        Self::GammaLimit,
        Self::Localize,
        Self::FlzPoint,
        Self::IndexReport,
        Self::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Deg => "deg",
            Self::DegStar => "deg-star",
            Self::GammaLimit => "gamma-limit",
            Self::Localize => "localize",
            Self::FlzPoint => "flz-point",
            Self::IndexReport => "index-report",
            Self::Verify => "verify",
        }
    }

    /// Scenarios on the product `S^{2n−2k} × S^{2k−1}`.
    pub fn on_product(self) -> bool {
        matches!(self, Self::DegStar | Self::GammaLimit | Self::Localize | Self::IndexReport)
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    CircleWinding { m: i32 },
    Su2Identity,
    Constant { c: f64 },
    Split { f: Box<Recipe>, h: Box<Recipe> },
}

impl Recipe {
    fn parse(raw: &RawConfig, prefix: &str, allow_split: bool) -> Result<Self, ConfigError> {
        let kind_key = format!("{prefix}.kind");
        let kind = raw
            .get(&kind_key)
            .ok_or_else(|| ConfigError::new(&kind_key, "missing"))?;
        let recipe = match kind {
            "circle_winding" => Self::CircleWinding {
                m: raw.parse_or(&format!("{prefix}.m"), 1)?,
            },
            "su2_identity" => Self::Su2Identity,
            "constant" => {
                let key = format!("{prefix}.c");
                let c: f64 = raw.parse_or(&key, 1.0)?;
                if !(c.is_finite() && c != 0.0) {
                    return Err(ConfigError::new(key, "constant must be finite and nonzero"));
                }
                Self::Constant { c }
            }
            "split" if allow_split => Self::Split {
                f: Box::new(Self::parse(raw, &format!("{prefix}.f"), false)?),
                h: Box::new(Self::parse(raw, &format!("{prefix}.h"), false)?),
            },
            other => return Err(ConfigError::new(kind_key, format!("unknown or misplaced map kind `{other}`"))),
        };
        Ok(recipe)
    }

    /// Dimension of the sphere the map lives on, if it is fixed.
    pub fn sphere(&self) -> Option<usize> {
        match self {
            Self::CircleWinding { .. } => Some(1),
            Self::Su2Identity => Some(3),
            Self::Constant { .. } | Self::Split { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub recipe: Recipe,
    pub size: usize,
    pub scale: f64,
    pub stabilize: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Default,
    Polar { factor: f64, other_nodes: usize },
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n: usize,
    pub k: usize,
    pub grid: GridSpec,
    pub collapse_radius: f64,
    pub map: Option<MapSpec>,
    pub models: usize,
    pub t_values: Vec<f64>,
    pub t_nodes: usize,
    pub samples: usize,
    pub seed: u64,
    pub clutching_samples: usize,
    pub integrality: f64,
    pub two_path: f64,
}

const KNOWN: &[&str] = &[
    "scenario",
    "n",
    "k",
    "grid.kind",
    "grid.polar_factor",
    "grid.other_nodes",
    "grid.resolution",
    "collapse.radius",
    "map.size",
    "map.scale",
    "map.stabilize",
    "models",
    "t_values",
    "t_nodes",
    "samples",
    "seed",
    "clutching_samples",
    "tolerance.integrality",
    "tolerance.two_path",
];

fn known_map_key(key: &str) -> bool {
    let tail = ["kind", "m", "c"];
    let parts: Vec<&str> = key.split('.').collect();
    match parts.as_slice() {
        ["map", t] => tail.contains(t),
        ["map", "f" | "h", t] => tail.contains(t),
        _ => false,
    }
}

impl ScenarioConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        if let Some(k) = raw.keys_under("").find(|k| !KNOWN.contains(k) && !known_map_key(k)) {
            return Err(ConfigError::new(k, "unknown key"));
        }
        let kind: ScenarioKind = raw
            .get("scenario")
            .ok_or_else(|| ConfigError::new("scenario", "missing"))?
            .parse()
            .map_err(|e: String| ConfigError::new("scenario", e))?;
        let n: usize = raw.parse_or("n", 2)?;
        let k: usize = raw.parse_or("k", 1)?;
        if kind.on_product() {
            if !(1 <= k && k < n && n <= 3) {
                return Err(ConfigError::new("n", format!("need 1 ≤ k < n ≤ 3, got n = {n}, k = {k}")));
            }
        } else if !(1..=3).contains(&n) {
            return Err(ConfigError::new("n", format!("need 1 ≤ n ≤ 3, got {n}")));
        }

        let default_grid = if kind.on_product() { "polar" } else { "default" };
        let grid = match raw.get("grid.kind").unwrap_or(default_grid) {
            "default" => GridSpec::Default,
            "polar" => {
                let factor: f64 = raw.parse_or("grid.polar_factor", 2.0)?;
                let other_nodes: usize = raw.parse_or("grid.other_nodes", 8)?;
                if !(factor > 0.0 && factor <= 16.0) {
                    return Err(ConfigError::new("grid.polar_factor", "must lie in (0, 16]"));
                }
                if !(2..=256).contains(&other_nodes) {
                    return Err(ConfigError::new("grid.other_nodes", "must lie in [2, 256]"));
                }
                GridSpec::Polar { factor, other_nodes }
            }
            "explicit" => {
                let res: Vec<usize> = raw
                    .list("grid.resolution")?
                    .ok_or_else(|| ConfigError::new("grid.resolution", "required for an explicit grid"))?;
                let dim = 2 * n - 1;
                if res.len() != dim {
                    return Err(ConfigError::new("grid.resolution", format!("need {dim} entries, got {}", res.len())));
                }
                if res.iter().any(|&r| !(2..=4096).contains(&r)) {
                    return Err(ConfigError::new("grid.resolution", "entries must lie in [2, 4096]"));
                }
                GridSpec::Explicit(res)
            }
            other => return Err(ConfigError::new("grid.kind", format!("unknown grid `{other}`"))),
        };

        let collapse_radius: f64 = raw.parse_or("collapse.radius", 4.0)?;
        if !(collapse_radius > 0.0 && collapse_radius.is_finite()) {
            return Err(ConfigError::new("collapse.radius", "must be positive"));
        }

        let map = if kind == ScenarioKind::Verify {
            None
        } else {
            let recipe = Recipe::parse(raw, "map", kind.on_product())?;
            let default_size = if matches!(recipe, Recipe::CircleWinding { .. }) { 1 } else { 2 };
            let size: usize = raw.parse_or("map.size", default_size)?;
            if !(1..=8).contains(&size) {
                return Err(ConfigError::new("map.size", "must lie in [1, 8]"));
            }
            let scale: f64 = raw.parse_or("map.scale", 1.0)?;
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(ConfigError::new("map.scale", "must be positive"));
            }
            let stabilize: usize = raw.parse_or("map.stabilize", 0)?;
            if stabilize > 8 {
                return Err(ConfigError::new("map.stabilize", "at most 8"));
            }
            let spec = MapSpec {
                recipe,
                size,
                scale,
                stabilize,
            };
            check_map(&spec, kind, n, k)?;
            Some(spec)
        };

        let models: usize = raw.parse_or("models", 1)?;
        if models > 16 {
            return Err(ConfigError::new("models", "at most 16"));
        }
        let t_values = raw.list("t_values")?.unwrap_or_else(|| vec![2.0, 4.0, 6.0, 8.0]);
        if t_values.iter().any(|t: &f64| !(*t >= 0.0 && *t <= 20.0)) {
            return Err(ConfigError::new("t_values", "values must lie in [0, 20]"));
        }
        let t_nodes: usize = raw.parse_or("t_nodes", 200)?;
        if !(2..=2000).contains(&t_nodes) {
            return Err(ConfigError::new("t_nodes", "must lie in [2, 2000]"));
        }
        let clutching_samples: usize = raw.parse_or("clutching_samples", 4096)?;
        if !(8..=1 << 20).contains(&clutching_samples) {
            return Err(ConfigError::new("clutching_samples", "must lie in [8, 2^20]"));
        }
        let integrality: f64 = raw.parse_or("tolerance.integrality", 1e-4)?;
        let two_path: f64 = raw.parse_or("tolerance.two_path", 1e-7)?;
        for (key, v) in [("tolerance.integrality", integrality), ("tolerance.two_path", two_path)] {
            if !(v > 0.0 && v < 0.5) {
                return Err(ConfigError::new(key, "must lie in (0, 0.5)"));
            }
        }
        Ok(Self {
            kind,
            n,
            k,
            grid,
            collapse_radius,
            map,
            models,
            t_values,
            t_nodes,
            samples: raw.parse_or("samples", 4)?,
            seed: raw.parse_or("seed", 0)?,
            clutching_samples,
            integrality,
            two_path,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    /// Effective values, including defaults, as flat key-value pairs.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("scenario", self.kind.name().into());
        put("n", self.n.to_string());
        if self.kind.on_product() {
            put("k", self.k.to_string());
            put("collapse.radius", self.collapse_radius.to_string());
            put("models", self.models.to_string());
        }
        match &self.grid {
            GridSpec::Default => put("grid.kind", "default".into()),
            GridSpec::Polar { factor, other_nodes } => {
                put("grid.kind", "polar".into());
                put("grid.polar_factor", factor.to_string());
                put("grid.other_nodes", other_nodes.to_string());
            }
            GridSpec::Explicit(res) => {
                put("grid.kind", "explicit".into());
                put("grid.resolution", join(res));
            }
        }
        if let Some(map) = &self.map {
            echo_recipe(&mut put, "map", &map.recipe);
            put("map.size", map.size.to_string());
            put("map.scale", map.scale.to_string());
            put("map.stabilize", map.stabilize.to_string());
        }
        put("t_values", join(&self.t_values));
        put("t_nodes", self.t_nodes.to_string());
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("clutching_samples", self.clutching_samples.to_string());
        put("tolerance.integrality", self.integrality.to_string());
        put("tolerance.two_path", self.two_path.to_string());
        out
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn echo_recipe(put: &mut impl FnMut(&str, String), prefix: &str, r: &Recipe) {
    let kind = |p: &mut dyn FnMut(&str, String), s: &str| p(&format!("{prefix}.kind"), s.into());
    match r {
        Recipe::CircleWinding { m } => {
            kind(put, "circle_winding");
            put(&format!("{prefix}.m"), m.to_string());
        }
        Recipe::Su2Identity => kind(put, "su2_identity"),
        Recipe::Constant { c } => {
            kind(put, "constant");
            put(&format!("{prefix}.c"), c.to_string());
        }
        Recipe::Split { f, h } => {
            kind(put, "split");
            echo_recipe(put, &format!("{prefix}.f"), f);
            echo_recipe(put, &format!("{prefix}.h"), h);
        }
    }
}

fn check_map(spec: &MapSpec, kind: ScenarioKind, n: usize, k: usize) -> Result<(), ConfigError> {
    let need_size = |r: &Recipe, key: &str| -> Result<(), ConfigError> {
        if matches!(r, Recipe::Su2Identity) && spec.size < 2 {
            return Err(ConfigError::new(key, "su2_identity needs map.size ≥ 2"));
        }
        Ok(())
    };
    let on_sphere = |r: &Recipe, m: usize, key: &str| -> Result<(), ConfigError> {
        need_size(r, key)?;
        match r.sphere() {
            Some(s) if s != m => Err(ConfigError::new(key, format!("this map lives on S^{s}, the scenario needs S^{m}"))),
            _ => Ok(()),
        }
    };
    if kind.on_product() {
        match &spec.recipe {
            Recipe::Split { f, h } => {
                on_sphere(f, 2 * k - 1, "map.f.kind")?;
                on_sphere(h, 2 * n - 1, "map.h.kind")
            }
            Recipe::Constant { .. } => Ok(()),
            _ => Err(ConfigError::new("map.kind", "product scenarios need a split or constant map")),
        }
    } else {
        on_sphere(&spec.recipe, 2 * n - 1, "map.kind")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_split_recipe_with_defaults() {
        let cfg = ScenarioConfig::parse(
            "# example\nscenario = deg-star\nmap.kind = split\nmap.f.kind = circle_winding\nmap.f.m = 3\nmap.h.kind = su2_identity\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ScenarioKind::DegStar);
        assert_eq!((cfg.n, cfg.k), (2, 1));
        assert_eq!(cfg.grid, GridSpec::Polar { factor: 2.0, other_nodes: 8 });
        let map = cfg.map.unwrap();
        assert_eq!(map.size, 2);
        assert_eq!(
            map.recipe,
            Recipe::Split {
                f: Box::new(Recipe::CircleWinding { m: 3 }),
                h: Box::new(Recipe::Su2Identity)
            }
        );
    }

    #[test]
    fn errors_name_the_field() {
        let err = ScenarioConfig::parse("scenario = deg-star\nn = 5\nmap.kind = constant\n").unwrap_err();
        assert_eq!(err.path, "n");
        let err = ScenarioConfig::parse("scenario = deg\nn = 1\nmap.kind = su2_identity\n").unwrap_err();
        assert_eq!(err.path, "map.kind");
        let err = ScenarioConfig::parse("scenario = deg\nmap.kind = constant\nmap.bogus = 1\n").unwrap_err();
        assert_eq!(err.path, "map.bogus");
        let err = ScenarioConfig::parse("scenario = deg\nscenario = deg\n").unwrap_err();
        assert_eq!(err.path, "scenario");
        let err = ScenarioConfig::parse("scenario = deg\nn = 1\nmap.kind = circle_winding\nmap.m = x\n").unwrap_err();
        assert_eq!(err.path, "map.m");
    }

    #[test]
    fn echo_reparses_to_the_same_config() {
        let cfg = ScenarioConfig::parse("scenario = localize\nmap.kind = split\nmap.f.kind = constant\nmap.h.kind = su2_identity\n").unwrap();
        let text: String = cfg.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(ScenarioConfig::parse(&text).unwrap(), cfg);
    }
}
