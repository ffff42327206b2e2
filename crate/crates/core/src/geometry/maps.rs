//! Maps between spheres and matrix-valued maps on them.
//!
//! Points are ambient coordinates: a unit vector in `R^{m+1}` for `S^m`, two
//! concatenated unit vectors for a product. Programmatic maps implement both
//! a plain and a dual-number evaluation so derivatives are exact; closure
//! maps only provide values and are differentiated numerically.

use std::sync::Arc;

use super::dual::{Cx, Dual, Real};
use crate::linalg::{ComplexMatrix, C64};

/// Smooth map between spheres (or from a product to a sphere).
pub trait PointMap: Send + Sync {
    fn source_ambient(&self) -> usize;
    fn target_ambient(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_dual(&self, x: &[Dual]) -> Vec<Dual>;
    /// All preimages of `y` when they are known in closed form.
    fn preimages(&self, _y: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    DualNumber,
    Richardson,
}

/// Value and directional derivative of a matrix map.
#[derive(Debug, Clone)]
pub struct MatrixJet {
    pub value: ComplexMatrix,
    pub tangent: ComplexMatrix,
}

/// Invertible-matrix-valued map on a sphere or product of spheres.
pub trait MatrixMap: Send + Sync {
    fn size(&self) -> usize;
    fn source_ambient(&self) -> usize;
    fn value(&self, x: &[f64]) -> ComplexMatrix;
    /// Value and derivative along the tangent carried by the dual parts of
    /// `x`; `None` when the map has no forward-mode implementation.
    fn value_dual(&self, x: &[Dual]) -> Option<MatrixJet>;
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::DualNumber
    }
    fn describe(&self) -> String;
}

/// Dispatches trait-object maps on the scalar type, so composite maps can be
/// written once over [`Real`].
pub trait MapScalar: Real {
    fn apply_point(map: &dyn PointMap, x: &[Self]) -> Vec<Self>;
    fn matrix_entries(map: &dyn MatrixMap, x: &[Self]) -> Option<Vec<Cx<Self>>>;
}

impl MapScalar for f64 {
    fn apply_point(map: &dyn PointMap, x: &[f64]) -> Vec<f64> {
        map.apply(x)
    }
    fn matrix_entries(map: &dyn MatrixMap, x: &[f64]) -> Option<Vec<Cx<f64>>> {
        Some(map.value(x).into_vec())
    }
}

impl MapScalar for Dual {
    fn apply_point(map: &dyn PointMap, x: &[Dual]) -> Vec<Dual> {
        map.apply_dual(x)
    }
    fn matrix_entries(map: &dyn MatrixMap, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        let jet = map.value_dual(x)?;
        Some(
            jet.value
                .as_slice()
                .iter()
                .zip(jet.tangent.as_slice())
                .map(|(v, t)| Cx::new(Dual::new(v.re, t.re), Dual::new(v.im, t.im)))
                .collect(),
        )
    }
}

/// Splits dual-valued entries into value and tangent matrices.
pub fn jet_from_entries(n: usize, entries: &[Cx<Dual>]) -> MatrixJet {
    let value = entries.iter().map(|z| C64::new(z.re.v, z.im.v)).collect();
    let tangent = entries.iter().map(|z| C64::new(z.re.d, z.im.d)).collect();
    MatrixJet {
        value: ComplexMatrix::from_row_major(n, value),
        tangent: ComplexMatrix::from_row_major(n, tangent),
    }
}

/// Row-major product of two `n×n` matrices over a generic scalar.
pub fn cx_matmul<T: Real>(a: &[Cx<T>], b: &[Cx<T>], n: usize) -> Vec<Cx<T>> {
    let mut out = vec![Cx::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

/// Implements the two evaluation entry points of [`PointMap`] through a
/// generic `eval::<T>` method on the type.
macro_rules! point_map_evals {
    () => {
        fn apply(&self, x: &[f64]) -> Vec<f64> {
            self.eval(x)
        }
        fn apply_dual(&self, x: &[$crate::geometry::Dual]) -> Vec<$crate::geometry::Dual> {
            self.eval(x)
        }
    };
}

/// Implements [`MatrixMap::value`] and [`MatrixMap::value_dual`] through a
/// generic `entries::<T>` method returning row-major entries.
macro_rules! matrix_map_evals {
    () => {
        fn value(&self, x: &[f64]) -> $crate::linalg::ComplexMatrix {
            $crate::linalg::ComplexMatrix::from_row_major(self.size(), self.entries(x))
        }
        fn value_dual(&self, x: &[$crate::geometry::Dual]) -> Option<$crate::geometry::MatrixJet> {
            self.try_entries(x)
                .map(|e| $crate::geometry::maps::jet_from_entries(self.size(), &e))
        }
    };
}

pub(crate) use matrix_map_evals;
pub(crate) use point_map_evals;

/// Identity of `S^m`.
#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub ambient: usize,
}

impl Identity {
    pub fn sphere(m: usize) -> Self {
        Self { ambient: m + 1 }
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        x.to_vec()
    }
}

impl PointMap for Identity {
    fn source_ambient(&self) -> usize {
        self.ambient
    }
    fn target_ambient(&self) -> usize {
        self.ambient
    }
    point_map_evals!();
    fn preimages(&self, y: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(vec![y.to_vec()])
    }
    fn describe(&self) -> String {
        "identity".into()
    }
}

/// `x ↦ −x` on `S^m`.
#[derive(Debug, Clone, Copy)]
pub struct Antipodal {
    pub ambient: usize,
}

impl Antipodal {
    pub fn sphere(m: usize) -> Self {
        Self { ambient: m + 1 }
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        x.iter().map(|&v| -v).collect()
    }
}

impl PointMap for Antipodal {
    fn source_ambient(&self) -> usize {
        self.ambient
    }
    fn target_ambient(&self) -> usize {
        self.ambient
    }
    point_map_evals!();
    fn preimages(&self, y: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(vec![y.iter().map(|v| -v).collect()])
    }
    fn describe(&self) -> String {
        "antipodal".into()
    }
}

/// `z ↦ z^m` on the unit circle.
#[derive(Debug, Clone, Copy)]
pub struct CirclePower {
    pub m: i32,
}

impl CirclePower {
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        let z = super::dual::cx_powi(Cx::new(x[0], x[1]), self.m);
        vec![z.re, z.im]
    }
}

impl PointMap for CirclePower {
    fn source_ambient(&self) -> usize {
        2
    }
    fn target_ambient(&self) -> usize {
        2
    }
    point_map_evals!();
    fn describe(&self) -> String {
        format!("z^{}", self.m)
    }
}

/// Projection of `S^p × S^q` onto one factor.
#[derive(Debug, Clone, Copy)]
pub struct FactorProjection {
    pub p: usize,
    pub q: usize,
    /// 0 for the first factor, 1 for the second.
    pub factor: usize,
}

impl FactorProjection {
    pub fn second(p: usize, q: usize) -> Self {
        Self { p, q, factor: 1 }
    }
    pub fn first(p: usize, q: usize) -> Self {
        Self { p, q, factor: 0 }
    }
    fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        if self.factor == 0 {
            x[..=self.p].to_vec()
        } else {
            x[self.p + 1..].to_vec()
        }
    }
}

impl PointMap for FactorProjection {
    fn source_ambient(&self) -> usize {
        self.p + self.q + 2
    }
    fn target_ambient(&self) -> usize {
        if self.factor == 0 {
            self.p + 1
        } else {
            self.q + 1
        }
    }
    point_map_evals!();
    fn describe(&self) -> String {
        format!("pr{}", self.factor + 1)
    }
}

/// `outer ∘ inner`.
#[derive(Clone)]
pub struct Composed {
    pub outer: Arc<dyn PointMap>,
    pub inner: Arc<dyn PointMap>,
}

impl Composed {
    pub fn new(outer: Arc<dyn PointMap>, inner: Arc<dyn PointMap>) -> Self {
        assert_eq!(inner.target_ambient(), outer.source_ambient(), "composition dimension mismatch");
        Self { outer, inner }
    }
    fn eval<T: MapScalar>(&self, x: &[T]) -> Vec<T> {
        T::apply_point(self.outer.as_ref(), &T::apply_point(self.inner.as_ref(), x))
    }
}

impl PointMap for Composed {
    fn source_ambient(&self) -> usize {
        self.inner.source_ambient()
    }
    fn target_ambient(&self) -> usize {
        self.outer.target_ambient()
    }
    point_map_evals!();
    fn describe(&self) -> String {
        format!("{} o {}", self.outer.describe(), self.inner.describe())
    }
}

/// `h ∘ φ` for a matrix map `h` and a point map `φ`.
#[derive(Clone)]
pub struct PulledBack {
    pub map: Arc<dyn MatrixMap>,
    pub along: Arc<dyn PointMap>,
}

impl PulledBack {
    pub fn new(map: Arc<dyn MatrixMap>, along: Arc<dyn PointMap>) -> Self {
        assert_eq!(along.target_ambient(), map.source_ambient(), "pullback dimension mismatch");
        Self { map, along }
    }
    fn entries(&self, x: &[f64]) -> Vec<C64> {
        self.map.value(&self.along.apply(x)).into_vec()
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        Dual::matrix_entries(self.map.as_ref(), &self.along.apply_dual(x))
    }
}

impl MatrixMap for PulledBack {
    fn size(&self) -> usize {
        self.map.size()
    }
    fn source_ambient(&self) -> usize {
        self.along.source_ambient()
    }
    matrix_map_evals!();
    fn derivative_mode(&self) -> DerivativeMode {
        self.map.derivative_mode()
    }
    fn describe(&self) -> String {
        format!("({}) o ({})", self.map.describe(), self.along.describe())
    }
}

/// Pointwise product `a(x) · b(x)`.
#[derive(Clone)]
pub struct MatrixProduct {
    pub left: Arc<dyn MatrixMap>,
    pub right: Arc<dyn MatrixMap>,
}

impl MatrixProduct {
    pub fn new(left: Arc<dyn MatrixMap>, right: Arc<dyn MatrixMap>) -> Self {
        assert_eq!(left.size(), right.size(), "matrix size mismatch");
        assert_eq!(left.source_ambient(), right.source_ambient(), "domain mismatch");
        Self { left, right }
    }
    fn entries(&self, x: &[f64]) -> Vec<C64> {
        (&self.left.value(x) * &self.right.value(x)).into_vec()
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        let a = Dual::matrix_entries(self.left.as_ref(), x)?;
        let b = Dual::matrix_entries(self.right.as_ref(), x)?;
        Some(cx_matmul(&a, &b, self.size()))
    }
}

impl MatrixMap for MatrixProduct {
    fn size(&self) -> usize {
        self.left.size()
    }
    fn source_ambient(&self) -> usize {
        self.left.source_ambient()
    }
    matrix_map_evals!();
    fn derivative_mode(&self) -> DerivativeMode {
        match (self.left.derivative_mode(), self.right.derivative_mode()) {
            (DerivativeMode::DualNumber, DerivativeMode::DualNumber) => DerivativeMode::DualNumber,
            _ => DerivativeMode::Richardson,
        }
    }
    fn describe(&self) -> String {
        format!("{} * {}", self.left.describe(), self.right.describe())
    }
}

/// `c · g(x)` for a complex constant `c`.
#[derive(Clone)]
pub struct Scaled {
    pub map: Arc<dyn MatrixMap>,
    pub factor: C64,
}

impl Scaled {
    fn entries(&self, x: &[f64]) -> Vec<C64> {
        self.map.value(x).scale(self.factor).into_vec()
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        let c: Cx<Dual> = super::dual::cx_const(self.factor);
        Some(Dual::matrix_entries(self.map.as_ref(), x)?.into_iter().map(|z| z * c).collect())
    }
}

impl MatrixMap for Scaled {
    fn size(&self) -> usize {
        self.map.size()
    }
    fn source_ambient(&self) -> usize {
        self.map.source_ambient()
    }
    matrix_map_evals!();
    fn derivative_mode(&self) -> DerivativeMode {
        self.map.derivative_mode()
    }
    fn describe(&self) -> String {
        format!("{} * {}", self.factor, self.map.describe())
    }
}

/// `diag(g(x), Id_extra)`.
#[derive(Clone)]
pub struct Stabilized {
    pub map: Arc<dyn MatrixMap>,
    pub extra: usize,
}

impl Stabilized {
    fn pad<T: Real>(&self, e: Vec<Cx<T>>) -> Vec<Cx<T>> {
        let (n, m) = (self.map.size(), self.size());
        let mut out = vec![Cx::new(T::zero(), T::zero()); m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = if i < n && j < n {
                    e[i * n + j]
                } else if i == j {
                    Cx::new(T::one(), T::zero())
                } else {
                    Cx::new(T::zero(), T::zero())
                };
            }
        }
        out
    }
    fn entries(&self, x: &[f64]) -> Vec<C64> {
        self.pad(self.map.value(x).into_vec())
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        Some(self.pad(Dual::matrix_entries(self.map.as_ref(), x)?))
    }
}

impl MatrixMap for Stabilized {
    fn size(&self) -> usize {
        self.map.size() + self.extra
    }
    fn source_ambient(&self) -> usize {
        self.map.source_ambient()
    }
    matrix_map_evals!();
    fn derivative_mode(&self) -> DerivativeMode {
        self.map.derivative_mode()
    }
    fn describe(&self) -> String {
        format!("diag({}, Id_{})", self.map.describe(), self.extra)
    }
}

type MatrixFn = dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync;

/// Matrix map given only by values; derivatives come from Richardson
/// extrapolation in chart coordinates.
#[derive(Clone)]
pub struct ClosureMatrixMap {
    size: usize,
    source_ambient: usize,
    name: String,
    f: Arc<MatrixFn>,
}

impl ClosureMatrixMap {
    pub fn new(
        size: usize,
        source_ambient: usize,
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            size,
            source_ambient,
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl MatrixMap for ClosureMatrixMap {
    fn size(&self) -> usize {
        self.size
    }
    fn source_ambient(&self) -> usize {
        self.source_ambient
    }
    fn value(&self, x: &[f64]) -> ComplexMatrix {
        (self.f)(x)
    }
    fn value_dual(&self, _x: &[Dual]) -> Option<MatrixJet> {
        None
    }
    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Richardson
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Differential consistency check: compares the exact directional
/// derivative of `map` with a Richardson difference along random chart
/// directions. Returns the largest relative discrepancy.
pub fn differential_consistency(
    map: &dyn MatrixMap,
    chart: super::Chart,
    points: &[Vec<f64>],
) -> f64 {
    let mut worst: f64 = 0.0;
    for theta in points {
        let (_, exact) = chart.matrix_partials(map, theta);
        for (i, ex) in exact.iter().enumerate() {
            let mut shifted = theta.clone();
            let fd = super::numdiff::richardson(
                |s| {
                    shifted[i] = s;
                    map.value(&chart.embed(&shifted)).into_vec()
                },
                theta[i],
            );
            let fd = ComplexMatrix::from_row_major(map.size(), fd);
            let scale = ex.max_abs().max(1.0);
            worst = worst.max(fd.distance(ex) / scale);
        }
    }
    worst
}
