//! Change-of-measure diagnostics on discretized paths.
//!
//! Verification-only machinery: the direct log Radon-Nikodym derivative, its
//! boundary-potential / stochastic-coupling / intrinsic-energy decomposition,
//! and the most-probable-path closed form of the coupling term. None of this
//! feeds the density evaluation path.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::ChannelParams;
use crate::drift::DriftProfile;
use crate::error::{FhtError, Result};

/// A trajectory on a uniform time grid with pinned endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    times: Vec<f64>,
    positions: Vec<f64>,
}

impl DiscretePath {
    /// Builds a path from positions sampled uniformly on [0, t_end].
    pub fn from_uniform(t_end: f64, positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(FhtError::Domain("path needs at least 2 points".into()));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(FhtError::Domain(format!("t_end must be > 0, got {t_end}")));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(FhtError::Domain("path positions must be finite".into()));
        }
        let k = positions.len() - 1;
        let times = (0..=k).map(|i| i as f64 * t_end / k as f64).collect();
        Ok(DiscretePath { times, positions })
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

/// The three decomposition terms plus the directly evaluated log-RN value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihoodBreakdown {
    pub boundary_potential: f64,
    pub stochastic_coupling: f64,
    pub intrinsic_energy: f64,
    pub direct_log_rn: f64,
}

impl LogLikelihoodBreakdown {
    /// Sum of the three decomposition terms; should track `direct_log_rn`
    /// up to discretization error.
    pub fn sum(&self) -> f64 {
        self.boundary_potential + self.stochastic_coupling + self.intrinsic_energy
    }
}

/// Log Radon-Nikodym derivative by Ito left-endpoint sums:
/// sum of mu(t_k) dX_k / sigma^2 minus the exact energy integral / 2 sigma^2.
pub fn direct_log_rn(path: &DiscretePath, profile: &DriftProfile, sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    let x = path.positions();
    let t = path.times();
    let mut ito = 0.0;
    for k in 0..x.len() - 1 {
        ito += profile.mu(t[k])? * (x[k + 1] - x[k]);
    }
    let energy = profile.intrinsic_energy_integral(path.t_end())?;
    Ok(ito / sigma2 - energy / (2.0 * sigma2))
}

/// Three-factor decomposition of the log-RN derivative. The coupling
/// integral uses the trapezoid rule with the analytic drift derivative; a
/// drift discontinuity contributes a discrete jump term and must land on a
/// grid point.
pub fn decomposed_log_rn(
    path: &DiscretePath,
    profile: &DriftProfile,
    sigma2: f64,
) -> Result<LogLikelihoodBreakdown> {
    check_sigma2(sigma2)?;
    let x = path.positions();
    let t = path.times();
    let t_end = path.t_end();

    let boundary_potential =
        (profile.mu(t_end)? * x[x.len() - 1] - profile.mu(0.0)? * x[0]) / sigma2;

    // trapezoid of mu'(t) X_t over the grid
    let mut coupling_integral = 0.0;
    for k in 0..x.len() - 1 {
        let g0 = profile.mu_prime(t[k])? * x[k];
        let g1 = profile.mu_prime(t[k + 1])? * x[k + 1];
        coupling_integral += 0.5 * (g0 + g1) * (t[k + 1] - t[k]);
    }
    if let Some((t_jump, delta_mu)) = profile.jump() {
        if t_jump <= t_end {
            let dt = path.dt();
            let k = (t_jump / dt).round() as usize;
            if k >= t.len() || (t[k] - t_jump).abs() > 1e-6 * dt {
                return Err(FhtError::Resample(format!(
                    "drift switch at t={t_jump} does not land on the path grid (dt={dt})"
                )));
            }
            coupling_integral += delta_mu * x[k];
        }
    }
    let stochastic_coupling = -coupling_integral / sigma2;

    let intrinsic_energy = -profile.intrinsic_energy_integral(t_end)? / (2.0 * sigma2);

    Ok(LogLikelihoodBreakdown {
        boundary_potential,
        stochastic_coupling,
        intrinsic_energy,
        direct_log_rn: direct_log_rn(path, profile, sigma2)?,
    })
}

/// Boundary-potential term evaluated at the channel endpoints.
pub fn boundary_potential(params: &ChannelParams, profile: &DriftProfile, t: f64) -> Result<f64> {
    Ok((profile.mu(t)? * params.ell - profile.mu(0.0)? * params.x0) / params.sigma2)
}

/// Closed-form stochastic coupling along the most-probable (straight-line)
/// path. Adding the boundary potential cancels the endpoint terms exactly,
/// leaving lambda M(t) / (sigma^2 t).
pub fn mpp_coupling(params: &ChannelParams, profile: &DriftProfile, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(FhtError::Domain(format!("mpp_coupling requires t > 0, got {t}")));
    }
    let lam = params.lambda();
    let m = profile.cumulative_displacement(t)?;
    let endpoint = profile.mu(t)? * params.ell - profile.mu(0.0)? * params.x0;
    Ok((lam * m / t - endpoint) / params.sigma2)
}

/// Simulates a drifted trajectory of `n_steps` uniform steps on [0, t_end],
/// conditions on landing near the boundary, and snaps the endpoint onto it
/// with a linear correction. Good enough for convergence diagnostics; this
/// is not an exact bridge sampler.
pub fn pinned_path<R: Rng>(
    params: &ChannelParams,
    profile: &DriftProfile,
    t_end: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<DiscretePath> {
    if n_steps == 0 {
        return Err(FhtError::Domain("n_steps must be >= 1".into()));
    }
    let dt = t_end / n_steps as f64;
    let noise = (params.sigma2 * dt).sqrt();
    let near = (params.sigma2 * t_end).sqrt();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..200 {
        let mut xs = Vec::with_capacity(n_steps + 1);
        let mut x = params.x0;
        xs.push(x);
        for k in 0..n_steps {
            let t = k as f64 * dt;
            let xi: f64 = rng.sample(StandardNormal);
            x += profile.mu(t)? * dt + noise * xi;
            xs.push(x);
        }
        let miss = (x - params.ell).abs();
        let better = best.as_ref().is_none_or(|(m, _)| miss < *m);
        if better {
            best = Some((miss, xs));
        }
        if miss <= near {
            break;
        }
    }
    let (_, mut xs) = best.unwrap();
    let miss = params.ell - xs[n_steps];
    for (k, x) in xs.iter_mut().enumerate() {
        *x += k as f64 / n_steps as f64 * miss;
    }
    DiscretePath::from_uniform(t_end, xs)
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(FhtError::Domain(format!("sigma2 must be > 0, got {sigma2}")));
    }
    Ok(())
}
