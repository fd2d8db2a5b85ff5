//! CSV renderings of curves, arrival sets, histograms, and diagnostics.
//! All output is UTF-8 with LF line endings and a mandatory header row;
//! floats carry 17 significant digits so files round-trip exactly.

use crate::density::DensityCurve;
use crate::girsanov::LogLikelihoodBreakdown;
use crate::mc::{ArrivalSet, HistogramDensity};

/// 17 significant digits: enough to reconstruct any f64 bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,f_cig,f_ig,cdf_cig,cdf_ig` over the shared grid of the two curves.
pub fn density_csv(cig: &DensityCurve, ig: &DensityCurve) -> String {
    assert_eq!(cig.grid, ig.grid, "curves must share a grid");
    let mut out = String::from("t,f_cig,f_ig,cdf_cig,cdf_ig\n");
    for i in 0..cig.grid.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(cig.grid[i]),
            fmt_f64(cig.pdf[i]),
            fmt_f64(ig.pdf[i]),
            fmt_f64(cig.cdf[i]),
            fmt_f64(ig.cdf[i]),
        ));
    }
    out
}

/// `trajectory_id,hit_time`; censored trajectories keep their row with an
/// empty hit_time field.
pub fn arrivals_csv(arrivals: &ArrivalSet) -> String {
    let mut out = String::from("trajectory_id,hit_time\n");
    for (i, h) in arrivals.per_trajectory().iter().enumerate() {
        match h {
            Some(t) => out.push_str(&format!("{i},{}\n", fmt_f64(*t))),
            None => out.push_str(&format!("{i},\n")),
        }
    }
    out
}

/// `bin_left,bin_right,density`.
pub fn histogram_csv(hist: &HistogramDensity) -> String {
    let mut out = String::from("bin_left,bin_right,density\n");
    for i in 0..hist.n_bins() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(i as f64 * hist.bin_width),
            fmt_f64((i + 1) as f64 * hist.bin_width),
            fmt_f64(hist.density[i]),
        ));
    }
    out
}

/// `t,f_cig,f_ig,f_mc`: both analytic traces on the curve grid with the
/// piecewise-constant Monte Carlo estimate sampled at the same times.
pub fn combined_csv(cig: &DensityCurve, ig: &DensityCurve, hist: &HistogramDensity) -> String {
    assert_eq!(cig.grid, ig.grid, "curves must share a grid");
    let mut out = String::from("t,f_cig,f_ig,f_mc\n");
    for i in 0..cig.grid.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(cig.grid[i]),
            fmt_f64(cig.pdf[i]),
            fmt_f64(ig.pdf[i]),
            fmt_f64(hist.density_at(cig.grid[i])),
        ));
    }
    out
}

/// `path_id,bp,coupling,energy,sum,direct,abs_diff` per diagnosed path.
pub fn diagnostics_csv(rows: &[LogLikelihoodBreakdown]) -> String {
    let mut out = String::from("path_id,bp,coupling,energy,sum,direct,abs_diff\n");
    for (i, b) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            fmt_f64(b.boundary_potential),
            fmt_f64(b.stochastic_coupling),
            fmt_f64(b.intrinsic_energy),
            fmt_f64(b.sum()),
            fmt_f64(b.direct_log_rn),
            fmt_f64((b.sum() - b.direct_log_rn).abs()),
        ));
    }
    out
}
