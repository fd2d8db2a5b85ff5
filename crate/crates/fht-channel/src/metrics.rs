//! Quantitative agreement between analytic density curves and Monte Carlo
//! arrival data: L1 distance, Kolmogorov-Smirnov statistic, peak structure,
//! and captured mass.

use crate::density::DensityCurve;
use crate::error::{FhtError, Result};
use crate::mc::{ArrivalSet, HistogramDensity};

/// Prominence floor (relative to the global maximum) used by the default
/// comparison pipeline.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.05;

/// Matching gate for pairing model peaks with Monte Carlo peaks, in time
/// units. Prevents pathological pairings across unrelated pulses.
pub const PEAK_MATCH_GATE: f64 = 0.25;

/// Histogram smoothing window (bins) applied before peak detection only.
pub const HIST_SMOOTH_WINDOW: usize = 5;

/// Comparison summary for one analytic model against one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub l1: f64,
    pub ks: f64,
    pub peak_times_model: Vec<f64>,
    pub peak_times_mc: Vec<f64>,
    /// |model - mc| per matched peak pair, ascending in model time.
    pub peak_time_errors: Vec<f64>,
    pub mass_model: f64,
    pub mass_mc: f64,
    pub runtime_ms: f64,
}

impl FitReport {
    pub fn max_peak_error(&self) -> Option<f64> {
        self.peak_time_errors.iter().cloned().fold(None, |acc, e| {
            Some(acc.map_or(e, |a: f64| a.max(e)))
        })
    }

    /// Flat key-value rendering, one `key = value` per line.
    pub fn to_kv_text(&self, label: &str) -> String {
        let join = |v: &[f64]| {
            v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
        };
        format!(
            "model = {label}\n\
             l1 = {:.6}\n\
             ks = {:.6}\n\
             peak_times_model = {}\n\
             peak_times_mc = {}\n\
             peak_time_errors = {}\n\
             mass_model = {:.6}\n\
             mass_mc = {:.6}\n\
             runtime_ms = {:.3}\n",
            self.l1,
            self.ks,
            join(&self.peak_times_model),
            join(&self.peak_times_mc),
            join(&self.peak_time_errors),
            self.mass_model,
            self.mass_mc,
            self.runtime_ms,
        )
    }

    pub fn csv_header() -> &'static str {
        "model,l1,ks,n_peaks_model,n_peaks_mc,max_peak_error,mass_model,mass_mc,runtime_ms"
    }

    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{label},{:.9},{:.9},{},{},{},{:.9},{:.9},{:.3}",
            self.l1,
            self.ks,
            self.peak_times_model.len(),
            self.peak_times_mc.len(),
            self.max_peak_error().map_or_else(|| "".into(), |e| format!("{e:.9}")),
            self.mass_model,
            self.mass_mc,
            self.runtime_ms,
        )
    }
}

/// Integral of the curve's pdf over [a, b]. The pdf is linear between grid
/// points, constant at pdf[0] on (0, grid[0]) (matching the CDF's left-edge
/// rectangle) and constant at the last value beyond the grid.
fn integrate_pdf(curve: &DensityCurve, a: f64, b: f64) -> f64 {
    let pdf_at = |t: f64| -> f64 {
        let g = &curve.grid;
        if t <= g[0] {
            return curve.pdf[0];
        }
        if t >= *g.last().unwrap() {
            return *curve.pdf.last().unwrap();
        }
        let i = g.partition_point(|&x| x <= t) - 1;
        let w = (t - g[i]) / (g[i + 1] - g[i]);
        curve.pdf[i] + w * (curve.pdf[i + 1] - curve.pdf[i])
    };
    // breakpoints: a, b, and every grid node strictly inside (a, b)
    let g = &curve.grid;
    let lo = g.partition_point(|&x| x <= a);
    let hi = g.partition_point(|&x| x < b);
    let mut acc = 0.0;
    let mut prev_t = a;
    let mut prev_f = pdf_at(a);
    for &t in &g[lo..hi] {
        let f = pdf_at(t);
        acc += 0.5 * (prev_f + f) * (t - prev_t);
        prev_t = t;
        prev_f = f;
    }
    acc += 0.5 * (prev_f + pdf_at(b)) * (b - prev_t);
    acc
}

fn l1_between_bin_averages(a: &[f64], b: &[f64], width: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() * width).sum()
}

/// L1 distance between an analytic curve and a histogram estimate: the curve
/// is averaged over each bin, then compared bin-wise.
pub fn l1_distance(curve: &DensityCurve, hist: &HistogramDensity) -> Result<f64> {
    let t_max = curve.t_max();
    if (t_max - hist.t_max).abs() > 1e-9 * hist.t_max.max(1.0) {
        return Err(FhtError::Config(format!(
            "horizon mismatch: curve t_max {t_max} vs histogram t_max {}",
            hist.t_max
        )));
    }
    let w = hist.bin_width;
    let model_avg: Vec<f64> = (0..hist.n_bins())
        .map(|i| integrate_pdf(curve, i as f64 * w, (i + 1) as f64 * w) / w)
        .collect();
    Ok(l1_between_bin_averages(&model_avg, &hist.density, w))
}

/// Two-sided Kolmogorov-Smirnov statistic between the model's interpolated
/// CDF and the empirical sub-CDF of the arrival set (censored mass stays in
/// the denominator on both sides of the comparison).
pub fn ks_statistic(curve: &DensityCurve, arrivals: &ArrivalSet) -> Result<f64> {
    let sorted = arrivals.sorted_hit_times();
    if sorted.is_empty() {
        return Err(FhtError::UndefinedStatistic(
            "KS statistic needs at least one arrival".into(),
        ));
    }
    let n = arrivals.n_total() as f64;
    let mut ks: f64 = 0.0;
    for (i, &t) in sorted.iter().enumerate() {
        let model = curve.cdf_at(t);
        ks = ks
            .max((model - i as f64 / n).abs())
            .max((model - (i + 1) as f64 / n).abs());
    }
    Ok(ks)
}

/// Centered moving average with truncated edge windows.
fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Strict local maxima of `values`, filtered by prominence relative to the
/// global maximum. Returns the corresponding `times`, ascending.
fn peaks_of(values: &[f64], times: &[f64], min_prominence: f64) -> Vec<f64> {
    debug_assert_eq!(values.len(), times.len());
    let global_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if global_max.is_nan() || global_max <= 0.0 {
        return Vec::new();
    }
    let threshold = min_prominence * global_max;
    let mut out = Vec::new();
    for i in 1..values.len() - 1 {
        if !(values[i] > values[i - 1] && values[i] > values[i + 1]) {
            continue;
        }
        // prominence: drop to the deepest valley before a higher point is
        // reached, on each side; the smaller side limits the prominence
        let side_min = |range: &mut dyn Iterator<Item = usize>| -> f64 {
            let mut lowest = values[i];
            for j in range {
                if values[j] > values[i] {
                    return lowest;
                }
                lowest = lowest.min(values[j]);
            }
            lowest
        };
        let left = side_min(&mut (0..i).rev());
        let right = side_min(&mut (i + 1..values.len()));
        let prominence = values[i] - left.max(right);
        if prominence >= threshold {
            out.push(times[i]);
        }
    }
    out
}

/// Peak times of an analytic curve (no smoothing).
pub fn find_peaks_curve(curve: &DensityCurve, min_prominence: f64) -> Result<Vec<f64>> {
    check_prominence(min_prominence)?;
    Ok(peaks_of(&curve.pdf, &curve.grid, min_prominence))
}

/// Peak times of a histogram estimate, after moving-average smoothing to
/// suppress per-bin sampling noise.
pub fn find_peaks_histogram(hist: &HistogramDensity, min_prominence: f64) -> Result<Vec<f64>> {
    check_prominence(min_prominence)?;
    let smoothed = smooth(&hist.density, HIST_SMOOTH_WINDOW);
    Ok(peaks_of(&smoothed, &hist.bin_centers(), min_prominence))
}

fn check_prominence(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(FhtError::Config(format!("min_prominence must be in (0, 1), got {p}")));
    }
    Ok(())
}

/// Pairs model peaks with MC peaks by greedy nearest-neighbor matching
/// inside the gate. Returns |dt| per matched pair, in model-time order.
pub fn match_peaks(model: &[f64], mc: &[f64], gate: f64) -> Vec<f64> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &tm) in model.iter().enumerate() {
        for (j, &th) in mc.iter().enumerate() {
            let d = (tm - th).abs();
            if d <= gate {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut used_model = vec![false; model.len()];
    let mut used_mc = vec![false; mc.len()];
    let mut matched: Vec<(usize, f64)> = Vec::new();
    for (d, i, j) in candidates {
        if !used_model[i] && !used_mc[j] {
            used_model[i] = true;
            used_mc[j] = true;
            matched.push((i, d));
        }
    }
    matched.sort_by_key(|&(i, _)| i);
    matched.into_iter().map(|(_, d)| d).collect()
}

/// Builds the full fit report for one curve against one Monte Carlo run.
pub fn fit_report(
    curve: &DensityCurve,
    hist: &HistogramDensity,
    arrivals: &ArrivalSet,
) -> Result<FitReport> {
    let start = std::time::Instant::now();
    let l1 = l1_distance(curve, hist)?;
    let ks = ks_statistic(curve, arrivals)?;
    let peak_times_model = find_peaks_curve(curve, DEFAULT_MIN_PROMINENCE)?;
    let peak_times_mc = find_peaks_histogram(hist, DEFAULT_MIN_PROMINENCE)?;
    let peak_time_errors = match_peaks(&peak_times_model, &peak_times_mc, PEAK_MATCH_GATE);
    Ok(FitReport {
        l1,
        ks,
        peak_times_model,
        peak_times_mc,
        peak_time_errors,
        mass_model: curve.mass(),
        mass_mc: arrivals.arrival_fraction(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Everything the comparison pipeline produces for one scenario.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub scenario_name: String,
    pub cig: FitReport,
    pub ig: FitReport,
    pub curve_cig: DensityCurve,
    pub curve_ig: DensityCurve,
    pub hist: HistogramDensity,
    pub arrivals: ArrivalSet,
}

/// Runs the Monte Carlo ground truth, builds both analytic curves, and
/// scores each against the simulation.
pub fn compare(scenario: &crate::scenario::Scenario) -> Result<Comparison> {
    use crate::density::{density_curve, DensityModel};

    let arrivals = crate::mc::simulate(&scenario.sim_config())?;
    let hist = crate::mc::histogram(&arrivals, scenario.bins)?;
    let mk = |model| {
        density_curve(
            &scenario.params,
            &scenario.profile,
            scenario.mode,
            scenario.flux_distance,
            model,
            scenario.t_max,
            scenario.grid_points,
        )
    };
    let curve_cig = mk(DensityModel::CorrectedIg)?;
    let curve_ig = mk(DensityModel::ClassicalIg)?;
    let cig = fit_report(&curve_cig, &hist, &arrivals)?;
    let ig = fit_report(&curve_ig, &hist, &arrivals)?;
    Ok(Comparison {
        scenario_name: scenario.name.clone(),
        cig,
        ig,
        curve_cig,
        curve_ig,
        hist,
        arrivals,
    })
}
