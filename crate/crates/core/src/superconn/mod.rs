//! Super-connections on trivialized boundary models and the localization of
//! relative Chern numbers to `deg*`.

pub mod forms;
pub mod gamma;
pub mod localize;
pub mod model;

pub use forms::{gamma_integrand, gamma_series, gamma_top_density, odd_endomorphism, superconn_chern_form, GammaField, SuperChernField};
pub use gamma::{
    gamma_boundary_integral, gamma_closed_form, gamma_report, gamma_report_with, gaussian_moment, gaussian_moment_quadrature, model_degree,
    predicted_limit, ClosedForm, GammaIntegral, GammaReport, TRow, T_MAX, T_NODES, TWO_PATH_TOLERANCE,
};
pub use localize::{flz_point_case, index_report, localize, FlzReport, IndexReport, LocalizeReport, ModelSummary};
pub use model::{unitarize, SuperBundleModel, Unitarized, UNITARITY_TOLERANCE};
