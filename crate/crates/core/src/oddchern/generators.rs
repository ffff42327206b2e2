//! Explicit generators of `π_1(U(1))` and `π_3(SU(2))`, and trigonometric
//! test families.

use std::sync::Arc;

use rand::{Rng, RngExt};

use crate::geometry::dual::{cx, cx_powi, Cx, Dual, Real};
use crate::geometry::maps::{jet_from_entries, matrix_map_evals, MapScalar, PointMap};
use crate::geometry::{MatrixJet, MatrixMap};
use crate::linalg::C64;

fn identity_entries<T: Real>(n: usize) -> Vec<Cx<T>> {
    let mut e = vec![cx(T::zero(), T::zero()); n * n];
    for i in 0..n {
        e[i * n + i] = cx(T::one(), T::zero());
    }
    e
}

/// `z ↦ diag(z^m, 1, …, 1)` on `S^1 ⊂ C`.
#[derive(Debug, Clone, Copy)]
pub struct CircleWinding {
    pub m: i32,
    pub n: usize,
}

impl CircleWinding {
    pub fn entries<T: Real>(&self, x: &[T]) -> Vec<Cx<T>> {
        let mut e = identity_entries(self.n);
        e[0] = cx_powi(cx(x[0], x[1]), self.m);
        e
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        Some(self.entries(x))
    }
}

impl MatrixMap for CircleWinding {
    fn size(&self) -> usize {
        self.n
    }
    fn source_ambient(&self) -> usize {
        2
    }
    matrix_map_evals!();
    fn describe(&self) -> String {
        format!("circle_winding(m={}, N={})", self.m, self.n)
    }
}

/// Unit quaternions `q = x_1 + x_2 i + x_3 j + x_4 k ∈ S^3` in the
/// representation `i ↦ iσ_3`, `j ↦ iσ_2`, `k ↦ iσ_1`:
/// `[[a, −b̄], [b, ā]]` with `a = x_1 + i x_2`, `b = −x_3 + i x_4`,
/// padded by the identity to size `N ≥ 2`.
#[derive(Debug, Clone, Copy)]
pub struct Su2Identity {
    pub n: usize,
}

impl Su2Identity {
    pub fn entries<T: Real>(&self, x: &[T]) -> Vec<Cx<T>> {
        let n = self.n;
        let a = cx(x[0], x[1]);
        let b = cx(-x[2], x[3]);
        let mut e = identity_entries(n);
        e[0] = a;
        e[1] = -b.conj();
        e[n] = b;
        e[n + 1] = a.conj();
        e
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        Some(self.entries(x))
    }
}

impl MatrixMap for Su2Identity {
    fn size(&self) -> usize {
        self.n
    }
    fn source_ambient(&self) -> usize {
        4
    }
    matrix_map_evals!();
    fn describe(&self) -> String {
        format!("su2_identity(N={})", self.n)
    }
}

/// Reads a point of `S^3` back off an `SU(2)` matrix in the representation
/// of [`Su2Identity`]: `a = g_00`, `b = g_10`. Composed with a matrix map
/// into `SU(2)` this is the map whose topological degree is `deg^top`.
#[derive(Clone)]
pub struct Su2Coordinates {
    pub map: Arc<dyn MatrixMap>,
}

impl Su2Coordinates {
    fn eval<T: MapScalar>(&self, x: &[T]) -> Vec<T> {
        let e = T::matrix_entries(self.map.as_ref(), x).expect("forward-mode map required");
        let n = self.map.size();
        let (a, b) = (e[0], e[n]);
        vec![a.re, a.im, -b.re, b.im]
    }
}

impl PointMap for Su2Coordinates {
    fn source_ambient(&self) -> usize {
        self.map.source_ambient()
    }
    fn target_ambient(&self) -> usize {
        4
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x)
    }
    fn apply_dual(&self, x: &[Dual]) -> Vec<Dual> {
        self.eval(x)
    }
    fn describe(&self) -> String {
        format!("su2_coordinates({})", self.map.describe())
    }
}

/// Constant map `x ↦ c·Id`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMap {
    pub n: usize,
    pub source_ambient: usize,
    pub c: C64,
}

impl ConstantMap {
    fn entries<T: Real>(&self, _x: &[T]) -> Vec<Cx<T>> {
        let mut e = identity_entries::<T>(self.n);
        for i in 0..self.n {
            e[i * self.n + i] = cx(T::cst(self.c.re), T::cst(self.c.im));
        }
        e
    }
    fn try_entries(&self, x: &[Dual]) -> Option<Vec<Cx<Dual>>> {
        Some(self.entries(x))
    }
}

impl MatrixMap for ConstantMap {
    fn size(&self) -> usize {
        self.n
    }
    fn source_ambient(&self) -> usize {
        self.source_ambient
    }
    matrix_map_evals!();
    fn describe(&self) -> String {
        format!("constant({}, N={})", self.c, self.n)
    }
}

/// Named generator constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    CircleWinding(i32),
    Su2Identity,
}

/// Builds the generator as a map into `GL_N(C)`.
pub fn generator(kind: GeneratorKind, n: usize) -> Arc<dyn MatrixMap> {
    match kind {
        GeneratorKind::CircleWinding(m) => Arc::new(CircleWinding { m, n }),
        GeneratorKind::Su2Identity => {
            assert!(n >= 2, "su2_identity needs N ≥ 2");
            Arc::new(Su2Identity { n })
        }
    }
}

/// Smooth family `g_t` of invertible matrices, `t ∈ [0, 1]`.
pub trait HomotopyFamily: Send + Sync {
    fn size(&self) -> usize;
    fn source_ambient(&self) -> usize;
    fn value(&self, t: f64, x: &[f64]) -> crate::linalg::ComplexMatrix;
    /// Jet along the tangent carried jointly by `t` and `x`.
    fn value_dual(&self, t: Dual, x: &[Dual]) -> MatrixJet;
    fn describe(&self) -> String;
}

/// Time slice `g_t` of a family as a matrix map.
#[derive(Clone)]
pub struct Slice {
    pub family: Arc<dyn HomotopyFamily>,
    pub t: f64,
}

impl MatrixMap for Slice {
    fn size(&self) -> usize {
        self.family.size()
    }
    fn source_ambient(&self) -> usize {
        self.family.source_ambient()
    }
    fn value(&self, x: &[f64]) -> crate::linalg::ComplexMatrix {
        self.family.value(self.t, x)
    }
    fn value_dual(&self, x: &[Dual]) -> Option<MatrixJet> {
        Some(self.family.value_dual(Dual::constant(self.t), x))
    }
    fn describe(&self) -> String {
        format!("{} at t={}", self.family.describe(), self.t)
    }
}

/// One trigonometric entry `a · sin(⟨u, x⟩ + c)` with complex amplitude.
#[derive(Debug, Clone)]
struct TrigTerm {
    amp: C64,
    freq: Vec<f64>,
    phase: f64,
}

/// `g_t(x) = g_0(x) · (Id + t·P(x))` where the entries of `P` are random
/// trigonometric polynomials of the ambient coordinates and
/// `‖P(x)‖_F ≤ 1/2`, so every `g_t` is invertible when `g_0` is unitary.
#[derive(Clone)]
pub struct TrigFamily {
    base: Arc<dyn MatrixMap>,
    terms: Vec<Vec<TrigTerm>>,
}

impl TrigFamily {
    pub fn random(base: Arc<dyn MatrixMap>, rng: &mut impl Rng) -> Self {
        let n = base.size();
        let a = base.source_ambient();
        let per_entry = 2;
        let bound = 0.5 / (n as f64 * per_entry as f64);
        let terms = (0..n * n)
            .map(|_| {
                (0..per_entry)
                    .map(|_| {
                        let r = bound * rng.random_range(0.2..1.0);
                        let arg = rng.random_range(0.0..std::f64::consts::TAU);
                        TrigTerm {
                            amp: C64::from_polar(r, arg),
                            freq: (0..a).map(|_| rng.random_range(-2.0..2.0)).collect(),
                            phase: rng.random_range(0.0..std::f64::consts::TAU),
                        }
                    })
                    .collect()
            })
            .collect();
        Self { base, terms }
    }

    fn entries<T: MapScalar>(&self, t: T, x: &[T]) -> Vec<Cx<T>> {
        let n = self.base.size();
        let g0 = T::matrix_entries(self.base.as_ref(), x).expect("forward-mode base map required");
        let mut m = identity_entries::<T>(n);
        for (k, entry) in self.terms.iter().enumerate() {
            let mut p = cx(T::zero(), T::zero());
            for term in entry {
                let arg = term
                    .freq
                    .iter()
                    .zip(x)
                    .fold(T::cst(term.phase), |acc, (&f, &xi)| acc + T::cst(f) * xi);
                let s = arg.sin();
                p = p + cx(T::cst(term.amp.re) * s, T::cst(term.amp.im) * s);
            }
            m[k] = m[k] + cx(t, T::zero()) * p;
        }
        crate::geometry::maps::cx_matmul(&g0, &m, n)
    }
}

impl HomotopyFamily for TrigFamily {
    fn size(&self) -> usize {
        self.base.size()
    }
    fn source_ambient(&self) -> usize {
        self.base.source_ambient()
    }
    fn value(&self, t: f64, x: &[f64]) -> crate::linalg::ComplexMatrix {
        crate::linalg::ComplexMatrix::from_row_major(self.size(), self.entries(t, x))
    }
    fn value_dual(&self, t: Dual, x: &[Dual]) -> MatrixJet {
        jet_from_entries(self.size(), &self.entries(t, x))
    }
    fn describe(&self) -> String {
        format!("trig_family({})", self.base.describe())
    }
}
