//! Analytic first-hitting-time densities: the classical inverse-Gaussian
//! baseline and the corrected density with cumulative-displacement exponent
//! and expected-positive-flux prefactor.

use crate::drift::DriftProfile;
use crate::error::{FhtError, Result};

const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;

/// Channel geometry and noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Release point.
    pub x0: f64,
    /// Absorbing boundary, must lie above the release point.
    pub ell: f64,
    /// Diffusion coefficient sigma^2.
    pub sigma2: f64,
}

impl ChannelParams {
    pub fn new(x0: f64, ell: f64, sigma2: f64) -> Result<Self> {
        if !(x0.is_finite() && ell.is_finite() && sigma2.is_finite()) {
            return Err(FhtError::Domain("channel parameters must be finite".into()));
        }
        if ell <= x0 {
            return Err(FhtError::Domain(format!(
                "absorbing boundary must exceed release point (ell={ell}, x0={x0})"
            )));
        }
        if sigma2 <= 0.0 {
            return Err(FhtError::Domain(format!("sigma2 must be > 0, got {sigma2}")));
        }
        Ok(ChannelParams { x0, ell, sigma2 })
    }

    /// Propagation distance lambda = ell - x0.
    pub fn lambda(&self) -> f64 {
        self.ell - self.x0
    }
}

/// Which baseline the drift deviation in the mean-flux factor is measured
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefactorMode {
    /// mu(t) - v0.
    Instantaneous,
    /// mu(t) - M(t)/t; measuring the deviation against the running average
    /// instead of v0 stabilizes the prefactor for large-variation profiles.
    RunningAverage,
}

/// Distance that anchors the mean-flux factor. `Boundary` is the literal
/// formula (uses ell); `Gap` substitutes lambda = ell - x0 so that nonzero
/// release points keep the same geometry. They coincide when x0 = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxDistance {
    Boundary,
    Gap,
}

/// Which analytic model a curve was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityModel {
    ClassicalIg,
    CorrectedIg,
}

/// Standard normal pdf.
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal cdf via the complementary error function. Accurate to
/// double precision across the full range; avoids the cancellation of
/// `1 - Phi` in the far tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn check_positive_time(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(FhtError::Domain(format!("density requires t > 0, got {t}")));
    }
    Ok(())
}

/// Exponent of the constant-drift inverse-Gaussian density.
pub fn ig_exponent(params: &ChannelParams, v0: f64, t: f64) -> Result<f64> {
    check_positive_time(t)?;
    let lam = params.lambda();
    let d = lam - v0 * t;
    Ok(-d * d / (2.0 * params.sigma2 * t))
}

/// Classical inverse-Gaussian first-hitting-time density for constant drift.
pub fn ig_density(params: &ChannelParams, v0: f64, t: f64) -> Result<f64> {
    let expo = ig_exponent(params, v0, t)?;
    // exp underflows first; bail out before t^3 can overflow the prefactor
    if expo < -745.0 {
        return Ok(0.0);
    }
    let lam = params.lambda();
    Ok(lam / (2.0 * std::f64::consts::PI * params.sigma2 * t * t * t).sqrt() * expo.exp())
}

/// Closed-form inverse-Gaussian CDF, the oracle for the Monte Carlo suite.
pub fn ig_cdf(params: &ChannelParams, v0: f64, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(FhtError::Domain(format!("ig_cdf requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let lam = params.lambda();
    let s = (params.sigma2 * t).sqrt();
    let a = std_normal_cdf((v0 * t - lam) / s);
    let b = (2.0 * v0 * lam / params.sigma2).exp() * std_normal_cdf(-(v0 * t + lam) / s);
    Ok((a + b).min(1.0))
}

/// Diffusion-scaled mean flux factor. May be negative during backflow.
pub fn mean_flux(
    params: &ChannelParams,
    profile: &DriftProfile,
    t: f64,
    mode: PrefactorMode,
    distance: FluxDistance,
) -> Result<f64> {
    let deviation = match mode {
        PrefactorMode::Instantaneous => profile.mu(t)? - profile.v0(),
        PrefactorMode::RunningAverage => profile.mu(t)? - profile.running_average_drift(t)?,
    };
    let d = match distance {
        FluxDistance::Boundary => params.ell,
        FluxDistance::Gap => params.lambda(),
    };
    Ok(d + deviation * (params.sigma2 * t).sqrt())
}

/// Expected positive flux: E[max(X, 0)] for X ~ Normal(f_mean, s^2).
/// Strictly positive for any finite mean; the soft-plus that keeps the
/// density alive during backflow.
pub fn expected_positive_flux(f_mean: f64, s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(FhtError::Domain(format!("flux scale must be > 0, got {s}")));
    }
    let z = f_mean / s;
    Ok(f_mean * std_normal_cdf(z) + s * std_normal_pdf(z))
}

/// Exponent of the corrected density: the IG exponent with the constant
/// displacement v0*t replaced by the cumulative displacement M(t).
pub fn cig_exponent(params: &ChannelParams, profile: &DriftProfile, t: f64) -> Result<f64> {
    check_positive_time(t)?;
    let d = params.lambda() - profile.cumulative_displacement(t)?;
    Ok(-d * d / (2.0 * params.sigma2 * t))
}

/// Corrected inverse-Gaussian density under time-varying drift.
pub fn cig_density(
    params: &ChannelParams,
    profile: &DriftProfile,
    t: f64,
    mode: PrefactorMode,
    distance: FluxDistance,
) -> Result<f64> {
    check_positive_time(t)?;
    let s = (params.sigma2 * t).sqrt();
    let f_mean = mean_flux(params, profile, t, mode, distance)?;
    let f_smooth = expected_positive_flux(f_mean, s)?;
    let expo = cig_exponent(params, profile, t)?;
    if expo < -745.0 {
        return Ok(0.0);
    }
    Ok(f_smooth / (2.0 * std::f64::consts::PI * params.sigma2 * t * t * t).sqrt() * expo.exp())
}

/// Discretized density with its cumulative integral.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    /// Strictly increasing times on (0, t_max].
    pub grid: Vec<f64>,
    pub pdf: Vec<f64>,
    /// Cumulative trapezoid of the pdf; the (0, grid[0]) gap is closed with a
    /// left-edge rectangle pdf[0] * grid[0].
    pub cdf: Vec<f64>,
    pub params: ChannelParams,
    pub mode: PrefactorMode,
    pub model: DensityModel,
}

impl DensityCurve {
    /// Total mass captured on the grid.
    pub fn mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn t_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Model CDF at an arbitrary time, linearly interpolated; anchored at
    /// (0, 0) below the first grid point, clamped to the final value above.
    pub fn cdf_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        if t <= g[0] {
            return self.cdf[0] * t / g[0];
        }
        if t >= *g.last().unwrap() {
            return *self.cdf.last().unwrap();
        }
        let i = g.partition_point(|&x| x <= t) - 1;
        let w = (t - g[i]) / (g[i + 1] - g[i]);
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }
}

/// Evaluates the selected model on a uniform grid over (0, t_max] and
/// integrates the CDF by cumulative trapezoid.
#[allow(clippy::too_many_arguments)]
pub fn density_curve(
    params: &ChannelParams,
    profile: &DriftProfile,
    mode: PrefactorMode,
    distance: FluxDistance,
    model: DensityModel,
    t_max: f64,
    n_points: usize,
) -> Result<DensityCurve> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(FhtError::Config(format!("t_max must be > 0, got {t_max}")));
    }
    if n_points < 2 {
        return Err(FhtError::Config(format!("n_points must be >= 2, got {n_points}")));
    }
    let dt = t_max / n_points as f64;
    let mut grid = Vec::with_capacity(n_points);
    let mut pdf = Vec::with_capacity(n_points);
    for i in 1..=n_points {
        let t = i as f64 * dt;
        grid.push(t);
        let f = match model {
            DensityModel::ClassicalIg => ig_density(params, profile.v0(), t)?,
            DensityModel::CorrectedIg => cig_density(params, profile, t, mode, distance)?,
        };
        pdf.push(f);
    }
    let mut cdf = Vec::with_capacity(n_points);
    cdf.push(pdf[0] * grid[0]);
    for i in 1..n_points {
        let inc = 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
        cdf.push(cdf[i - 1] + inc.max(0.0));
    }
    Ok(DensityCurve { grid, pdf, cdf, params: *params, mode, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::Distribution;
    use std::f64::consts::PI;

    fn params() -> ChannelParams {
        ChannelParams::new(0.0, 5.0, 2.0).unwrap()
    }

    fn sinusoid() -> DriftProfile {
        DriftProfile::sinusoidal(1.0, 2.0, 2.0 * PI).unwrap()
    }

    /// High-precision erf by Taylor series (small x) / continued-fraction-free
    /// asymptotic fallback is unnecessary for the probed range.
    fn erf_series(x: f64) -> f64 {
        // erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1))
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
            if term.abs() < 1e-20 {
                break;
            }
        }
        sum * 2.0 / PI.sqrt()
    }

    #[test]
    fn std_normal_values() {
        assert!((std_normal_pdf(0.0) - 0.3989422804014327).abs() < 1e-16);
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.959963985) - 0.975).abs() < 1e-9);
        // cross-check against the independent series oracle; the alternating
        // series cancels badly past |z| ~ 3, so larger arguments use frozen
        // high-precision reference values instead
        // the series is exact to a few ulps of erf, i.e. a few 1e-16 absolute
        // in the cdf, but not relatively accurate for small left-tail values
        for &z in &[-3.0, -1.2, -0.3, 0.4, 1.7] {
            let oracle = 0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2));
            assert!((std_normal_cdf(z) - oracle).abs() <= 2e-15 + 1e-14 * oracle);
        }
        #[allow(clippy::excessive_precision)] // keeps the full oracle digits
        for &(z, reference) in &[
            (-3.0, 1.349898031630094526651814767594977e-3),
            (4.0, 0.9999683287581668800787462292432778),
            (6.5, 0.9999999999598399941614088219165385),
        ] {
            assert!((std_normal_cdf(z) - reference).abs() <= 1e-15);
        }
        // deep tail must not cancel to zero prematurely
        assert!(std_normal_cdf(-8.0) > 1e-16);
        assert!(std_normal_cdf(-8.0) < 1e-14);
    }

    #[test]
    fn ig_density_examples() {
        let p = params();
        // at t = lambda/v0 the exponent vanishes: f = lambda / sqrt(2 pi sigma2 t^3)
        let peakish = ig_density(&p, 1.0, 5.0).unwrap();
        assert!((peakish - 5.0 / (500.0 * PI).sqrt()).abs() < 1e-14);
        assert_eq!(ig_density(&p, 1.0, 1e-300).unwrap(), 0.0);
        assert!(ig_density(&p, 1.0, 0.0).is_err());
        assert!(ig_density(&p, 1.0, -1.0).is_err());
    }

    #[test]
    fn ig_density_integrates_to_one() {
        // adaptive trapezoid refinement on [0, 200]
        let p = params();
        let mut n = 4000;
        let mut prev = f64::NAN;
        loop {
            let h = 200.0 / n as f64;
            let mut acc = 0.0;
            for i in 1..=n {
                let t = i as f64 * h;
                let f = ig_density(&p, 1.0, t).unwrap();
                let w = if i == n { 0.5 } else { 1.0 };
                acc += w * f * h;
            }
            if (acc - prev).abs() < 1e-8 {
                assert!((acc - 1.0).abs() < 1e-6, "mass = {acc}");
                break;
            }
            prev = acc;
            n *= 2;
            assert!(n <= 1 << 22, "no convergence");
        }
    }

    #[test]
    fn ig_cdf_matches_density_integral() {
        let p = params();
        let mut acc = 0.0;
        let n = 200_000;
        let t_max = 8.0;
        let h = t_max / n as f64;
        let mut prev = 0.0;
        for i in 1..=n {
            let t = i as f64 * h;
            let f = ig_density(&p, 1.0, t).unwrap();
            acc += 0.5 * (f + prev) * h;
            prev = f;
        }
        assert!((acc - ig_cdf(&p, 1.0, t_max).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn mean_flux_examples() {
        let p = params();
        let c = DriftProfile::constant(1.0).unwrap();
        for mode in [PrefactorMode::Instantaneous, PrefactorMode::RunningAverage] {
            assert_eq!(mean_flux(&p, &c, 0.7, mode, FluxDistance::Boundary).unwrap(), 5.0);
        }
        let f = mean_flux(&p, &sinusoid(), 0.25, PrefactorMode::Instantaneous, FluxDistance::Boundary)
            .unwrap();
        assert!((f - (5.0 + 2.0 * 0.5f64.sqrt())).abs() < 1e-12);
        let f = mean_flux(&p, &sinusoid(), 0.75, PrefactorMode::Instantaneous, FluxDistance::Boundary)
            .unwrap();
        assert!((f - (5.0 - 2.0 * 1.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn flux_distance_switch() {
        let p = ChannelParams::new(1.0, 5.0, 2.0).unwrap();
        let c = DriftProfile::constant(1.0).unwrap();
        let b = mean_flux(&p, &c, 1.0, PrefactorMode::Instantaneous, FluxDistance::Boundary).unwrap();
        let g = mean_flux(&p, &c, 1.0, PrefactorMode::Instantaneous, FluxDistance::Gap).unwrap();
        assert_eq!(b, 5.0);
        assert_eq!(g, 4.0);
    }

    #[test]
    fn epf_examples() {
        assert!((expected_positive_flux(0.0, 1.0).unwrap() - std_normal_pdf(0.0)).abs() < 1e-15);
        assert!((expected_positive_flux(10.0, 0.1).unwrap() - 10.0).abs() < 1e-12);
        let v = expected_positive_flux(-1.0, 1.0).unwrap();
        assert!((v - (-std_normal_cdf(-1.0) + std_normal_pdf(-1.0))).abs() < 1e-15);
        assert!((v - 0.08332).abs() < 1e-5);
        assert!(expected_positive_flux(1.0, 0.0).is_err());
        assert!(expected_positive_flux(1.0, -2.0).is_err());
    }

    #[test]
    fn epf_matches_monte_carlo_oracle() {
        // E[max(N(-1,1), 0)] by simulation
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12345);
        let normal = rand_distr::Normal::new(-1.0, 1.0).unwrap();
        let n = 10_000_000usize;
        let mut acc = 0.0;
        for _ in 0..n {
            let x: f64 = normal.sample(&mut rng);
            acc += x.max(0.0);
        }
        let mc = acc / n as f64;
        assert!((expected_positive_flux(-1.0, 1.0).unwrap() - mc).abs() < 3e-4);
    }

    #[test]
    fn epf_asymptotics() {
        // forward-flow regime: F_smooth ~ F_mean
        for &z in &[6.0, 10.0, 30.0] {
            let s = 0.7;
            let f = z * s;
            assert!((expected_positive_flux(f, s).unwrap() - f).abs() <= 1e-8 * s);
        }
        // deep backflow: dominated by the diffusion term
        for &z in &[-6.0, -12.0] {
            let s = 1.3;
            let f = z * s;
            let v = expected_positive_flux(f, s).unwrap();
            assert!(v > 0.0);
            assert!(v <= s * std_normal_pdf(z) * (1.0 + 1.0 / (z * z)));
        }
    }

    #[test]
    fn cig_reduces_to_ig_exponent_for_constant_drift() {
        let p = params();
        let c = DriftProfile::constant(1.0).unwrap();
        for i in 1..=100 {
            let t = i as f64 * 0.1;
            let ce = cig_exponent(&p, &c, t).unwrap();
            let ie = ig_exponent(&p, 1.0, t).unwrap();
            let scale = ie.abs().max(1e-300);
            assert!((ce - ie).abs() <= 1e-14 * scale);
            // full densities differ only by the EPF prefactor deviation
            let s = (p.sigma2 * t).sqrt();
            let ratio = cig_density(&p, &c, t, PrefactorMode::Instantaneous, FluxDistance::Boundary)
                .unwrap()
                / ig_density(&p, 1.0, t).unwrap();
            let expected = expected_positive_flux(p.ell, s).unwrap() / p.ell;
            assert!((ratio - expected).abs() < 1e-12);
        }
        // the deviation vanishes as sigma2*t / ell^2 -> 0
        let s_small = (p.sigma2 * 1e-6).sqrt();
        assert!((expected_positive_flux(p.ell, s_small).unwrap() - p.ell).abs() < 1e-12);
    }

    #[test]
    fn cig_positive_under_backflow() {
        let p = params();
        let s = sinusoid();
        // mu(t) < 0 for t in (0.58.., 0.91..) within the first period
        for &t in &[0.6, 0.7, 0.75, 0.85, 1.65, 1.75] {
            assert!(s.mu(t).unwrap() < 0.0);
            let f = cig_density(&p, &s, t, PrefactorMode::Instantaneous, FluxDistance::Boundary)
                .unwrap();
            assert!(f > 0.0, "density collapsed at t={t}");
        }
    }

    #[test]
    fn curve_edge_conventions() {
        let p = params();
        let c = DriftProfile::constant(1.0).unwrap();
        let curve = density_curve(
            &p,
            &c,
            PrefactorMode::Instantaneous,
            FluxDistance::Boundary,
            DensityModel::CorrectedIg,
            1.0,
            2,
        )
        .unwrap();
        assert_eq!(curve.grid, vec![0.5, 1.0]);
        assert!((curve.cdf[0] - curve.pdf[0] * 0.5).abs() < 1e-15);
    }

    #[test]
    fn ig_curve_total_mass() {
        let p = params();
        let c = DriftProfile::constant(1.0).unwrap();
        let curve = density_curve(
            &p,
            &c,
            PrefactorMode::Instantaneous,
            FluxDistance::Boundary,
            DensityModel::ClassicalIg,
            200.0,
            100_000,
        )
        .unwrap();
        assert!((curve.mass() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mode_agreement_on_smooth_profile() {
        // instantaneous vs running-average curves stay close for the
        // smooth sinusoid
        let p = params();
        let s = sinusoid();
        let mk = |mode| {
            density_curve(&p, &s, mode, FluxDistance::Boundary, DensityModel::CorrectedIg, 5.0, 4000)
                .unwrap()
        };
        let a = mk(PrefactorMode::Instantaneous);
        let b = mk(PrefactorMode::RunningAverage);
        let dt = a.grid[1] - a.grid[0];
        let l1: f64 = a.pdf.iter().zip(&b.pdf).map(|(x, y)| (x - y).abs() * dt).sum();
        // measured 0.054 on this grid for A/v0 = 2; frozen threshold 0.15
        assert!(l1 / a.mass().min(b.mass()) < 0.15, "mode disagreement {l1}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ChannelParams::new(5.0, 5.0, 2.0).is_err());
        assert!(ChannelParams::new(0.0, 5.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, f64::INFINITY, 2.0).is_err());
    }

    proptest! {
        // Jensen: E[max(X,0)] >= max(E[X], 0), with strict positivity
        #[test]
        fn epf_dominance(f in -50.0f64..50.0, s in 1e-6f64..100.0) {
            let v = expected_positive_flux(f, s).unwrap();
            prop_assert!(v >= f.max(0.0) - 1e-12 * s);
            prop_assert!(v >= 0.0);
            // both the Gaussian pdf and cdf underflow to 0.0 past z ~ -38,
            // so strict positivity is only representable above that
            if f / s > -37.0 {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn curve_invariants(t_max in 0.5f64..10.0, n in 2usize..200) {
            let p = ChannelParams::new(0.0, 5.0, 2.0).unwrap();
            let s = DriftProfile::sinusoidal(1.0, 2.0, 2.0 * PI).unwrap();
            let curve = density_curve(
                &p, &s,
                PrefactorMode::Instantaneous,
                FluxDistance::Boundary,
                DensityModel::CorrectedIg,
                t_max, n,
            ).unwrap();
            for w in curve.grid.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            prop_assert!(curve.pdf.iter().all(|&f| f >= 0.0));
            for w in curve.cdf.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
        }
    }
}
