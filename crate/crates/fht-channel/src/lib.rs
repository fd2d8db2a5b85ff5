//! First-hitting-time channel modeling under time-varying drift.
//!
//! The library pairs a closed-form corrected inverse-Gaussian arrival-time
//! density (cumulative-displacement exponent, expected-positive-flux
//! prefactor) with a reproducible Euler-Maruyama first-passage simulator,
//! change-of-measure diagnostics, and quantitative fit metrics.

pub mod density;
pub mod drift;
pub mod error;
pub mod export;
pub mod girsanov;
pub mod mc;
pub mod metrics;
pub mod scenario;

pub use density::{
    cig_density, cig_exponent, density_curve, expected_positive_flux, ig_cdf, ig_density,
    ig_exponent, mean_flux, std_normal_cdf, std_normal_pdf, ChannelParams, DensityCurve,
    DensityModel, FluxDistance, PrefactorMode,
};
pub use drift::DriftProfile;
pub use error::{FhtError, Result};
pub use export::{
    arrivals_csv, combined_csv, density_csv, diagnostics_csv, fmt_f64, histogram_csv,
};
pub use girsanov::{
    boundary_potential, decomposed_log_rn, direct_log_rn, mpp_coupling, pinned_path, DiscretePath,
    LogLikelihoodBreakdown,
};
pub use mc::{empirical_cdf, histogram, simulate, ArrivalSet, HistogramDensity, SimConfig};
pub use metrics::{
    compare, find_peaks_curve, find_peaks_histogram, fit_report, ks_statistic, l1_distance,
    match_peaks, Comparison, FitReport,
};
pub use scenario::{parse_scenario, parse_with_overrides, serialize_scenario, Scenario};
