//! Charted spheres and products of spheres, smooth maps between them,
//! form fields, integration and mapping degrees.

pub mod chart;
pub mod collapse;
pub mod degree;
pub mod dual;
pub mod fields;
pub mod maps;
pub mod numdiff;
pub mod quadrature;

pub use chart::{converge, default_nodes, sphere_volume, Chart, ChartedSphereDomain, Converged, ConvergenceRow, Ladder};
pub use collapse::{build_collapse_map, chart_angles, CollapseMap};
pub use degree::{checked_mapping_degree, mapping_degree, MappingDegree, DEGREE_TOLERANCE};
pub use dual::{Dual, Real};
pub use fields::{
    integrate_top, AmbientForm, AmbientVolumeForm, ExteriorDerivative, FnAmbientForm, FnField, FormField,
    PullbackField, WedgeField,
};
pub use maps::{
    Antipodal, CirclePower, ClosureMatrixMap, Composed, DerivativeMode, FactorProjection, Identity, MatrixJet,
    MatrixMap, MatrixProduct, PointMap, PulledBack, Scaled, Stabilized,
};
