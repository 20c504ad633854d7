//! Distance functions, parameter choices, rate prediction and bound checks.

mod asc;
mod avi;
mod choice;
mod holder;
mod rates;
mod table;

pub use asc::{asc_distance, asc_distance_normal_equations, asc_residual, asc_table, preimage_radius, AscPoint};
pub use avi::{avi_distance, avi_table, AviDiagnostics, AviParams, AviPoint, AviTable};
pub use choice::{
    choose_alpha_apriori, choose_alpha_phi, invert_monotone, kappa_ratio_diagnostic, majorant_rate_exponent, phi,
    predicted_rate, psi, AlphaChoice, KappaDiagnostic, PredictedRate,
};
pub use holder::{
    default_t_grid, extrapolate_to_zero, holder_kappa, holder_mu_bound, kappa_upper_bound_check, KappaBoundReport,
    DIRECTIONAL_TOLERANCE,
};
pub use rates::{
    empirical_rate, fit_loglog, lemma_constants, rates_lemma_bound, vi_to_avi_majorant, LemmaConstants, RateFit,
    RateRow, RateRun, MIN_RATE_DELTAS, MIN_RATE_SUCCESSES,
};
pub use table::{default_r_grid, log_grid, DistanceTable, Lookup};
