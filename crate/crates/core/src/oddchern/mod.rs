//! The odd Chern character of maps into `GL_N(C)` and its normalized
//! integrals over odd spheres and product spheres.

pub mod chern;
pub mod clutching;
pub mod degree;
pub mod generators;
pub mod split;

pub use chern::{
    odd_chern_of, transgression_pair, ChernSimonsField, MaurerCartanField, OddChernField, TransgressionField,
    TrivialConnection, CS_U_NODES, MIN_SIGMA,
};
pub use clutching::{winding_number, CLUTCHING_SAMPLES};
pub use degree::{deg, deg_star, deg_star_with, deg_with, normalization, DegreeResult, INTEGRALITY, LADDER_TOLERANCE};
pub use generators::{
    generator, CircleWinding, ConstantMap, GeneratorKind, HomotopyFamily, Slice, Su2Coordinates, Su2Identity, TrigFamily,
};
pub use split::assemble_split_map;
