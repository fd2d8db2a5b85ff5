//! Deterministic time-varying drift fields and their exact integrals.
//!
//! Every profile kind evaluates its instantaneous drift, cumulative mean
//! displacement, running-average baseline, and squared-drift integral in
//! closed form, so density evaluation stays O(1) per time point.

use crate::error::{FhtError, Result};

/// A deterministic drift field mu(t) with baseline velocity `v0`.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftProfile {
    Constant {
        v0: f64,
    },
    Sinusoidal {
        v0: f64,
        amplitude: f64,
        omega: f64,
    },
    /// Single switching profile: `v0 + amplitude` before `t_switch`,
    /// `v0 - amplitude` from `t_switch` on (boundary inclusive on the
    /// post-switch side).
    Step {
        v0: f64,
        amplitude: f64,
        t_switch: f64,
    },
    /// Piecewise-linear interpolation through `(time, velocity)` breakpoints,
    /// clamped to the end values outside the table range. `v0` has no
    /// canonical definition here and must be supplied by the caller.
    Tabulated {
        v0: f64,
        table: Vec<(f64, f64)>,
    },
}

fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(FhtError::Domain(format!("{name} must be finite, got {x}")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(FhtError::Domain(format!("time must satisfy t >= 0, got {t}")));
    }
    Ok(())
}

impl DriftProfile {
    pub fn constant(v0: f64) -> Result<Self> {
        require_finite("v0", v0)?;
        Ok(DriftProfile::Constant { v0 })
    }

    pub fn sinusoidal(v0: f64, amplitude: f64, omega: f64) -> Result<Self> {
        require_finite("v0", v0)?;
        require_finite("amplitude", amplitude)?;
        require_finite("omega", omega)?;
        if omega <= 0.0 {
            return Err(FhtError::Domain(format!("omega must be > 0, got {omega}")));
        }
        Ok(DriftProfile::Sinusoidal { v0, amplitude, omega })
    }

    pub fn step(v0: f64, amplitude: f64, t_switch: f64) -> Result<Self> {
        require_finite("v0", v0)?;
        require_finite("amplitude", amplitude)?;
        require_finite("t_switch", t_switch)?;
        if t_switch <= 0.0 {
            return Err(FhtError::Domain(format!("t_switch must be > 0, got {t_switch}")));
        }
        Ok(DriftProfile::Step { v0, amplitude, t_switch })
    }

    pub fn tabulated(v0: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        require_finite("v0", v0)?;
        if table.len() < 2 {
            return Err(FhtError::Domain(format!(
                "tabulated profile needs >= 2 breakpoints, got {}",
                table.len()
            )));
        }
        for (i, &(t, v)) in table.iter().enumerate() {
            require_finite("table time", t)?;
            require_finite("table velocity", v)?;
            if i > 0 && t <= table[i - 1].0 {
                return Err(FhtError::Domain(format!(
                    "table times must be strictly increasing (entry {i}: {t} <= {})",
                    table[i - 1].0
                )));
            }
        }
        Ok(DriftProfile::Tabulated { v0, table })
    }

    /// Baseline drift v0.
    pub fn v0(&self) -> f64 {
        match *self {
            DriftProfile::Constant { v0 }
            | DriftProfile::Sinusoidal { v0, .. }
            | DriftProfile::Step { v0, .. }
            | DriftProfile::Tabulated { v0, .. } => v0,
        }
    }

    /// Instantaneous drift mu(t).
    pub fn mu(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match *self {
            DriftProfile::Constant { v0 } => v0,
            DriftProfile::Sinusoidal { v0, amplitude, omega } => v0 + amplitude * (omega * t).sin(),
            DriftProfile::Step { v0, amplitude, t_switch } => {
                if t < t_switch {
                    v0 + amplitude
                } else {
                    v0 - amplitude
                }
            }
            DriftProfile::Tabulated { ref table, .. } => interp_clamped(table, t),
        })
    }

    /// Cumulative mean displacement M(t) = integral of mu over [0, t].
    /// Exact closed form for every kind; M(0) = 0.
    pub fn cumulative_displacement(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match *self {
            DriftProfile::Constant { v0 } => v0 * t,
            DriftProfile::Sinusoidal { v0, amplitude, omega } => {
                v0 * t + amplitude / omega * (1.0 - (omega * t).cos())
            }
            DriftProfile::Step { v0, amplitude, t_switch } => {
                (v0 + amplitude) * t.min(t_switch) + (v0 - amplitude) * (t - t_switch).max(0.0)
            }
            DriftProfile::Tabulated { ref table, .. } => integrate_tabulated(table, t, |v| v),
        })
    }

    /// Running-average baseline M(t)/t, continued by mu(0) at t = 0.
    pub fn running_average_drift(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if t == 0.0 {
            self.mu(0.0)
        } else {
            Ok(self.cumulative_displacement(t)? / t)
        }
    }

    /// Integral of mu(s)^2 over [0, t]. Exact for Constant/Sinusoidal/Step,
    /// piecewise-exact (quadratic segments) for Tabulated.
    pub fn intrinsic_energy_integral(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match *self {
            DriftProfile::Constant { v0 } => v0 * v0 * t,
            DriftProfile::Sinusoidal { v0, amplitude, omega } => {
                // (v0 + A sin ws)^2 = v0^2 + 2 v0 A sin ws + A^2 sin^2 ws
                let a = amplitude;
                v0 * v0 * t
                    + 2.0 * v0 * a / omega * (1.0 - (omega * t).cos())
                    + a * a * (0.5 * t - (2.0 * omega * t).sin() / (4.0 * omega))
            }
            DriftProfile::Step { v0, amplitude, t_switch } => {
                let up = v0 + amplitude;
                let down = v0 - amplitude;
                up * up * t.min(t_switch) + down * down * (t - t_switch).max(0.0)
            }
            DriftProfile::Tabulated { ref table, .. } => integrate_tabulated_sq(table, t),
        })
    }

    /// Analytic derivative mu'(t) of the continuous part of the profile.
    /// Step profiles return 0 here; their jump is reported by [`Self::jump`].
    /// Tabulated profiles use the right-derivative at breakpoints and 0 in
    /// the clamped regions.
    pub fn mu_prime(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match *self {
            DriftProfile::Constant { .. } | DriftProfile::Step { .. } => 0.0,
            DriftProfile::Sinusoidal { amplitude, omega, .. } => {
                amplitude * omega * (omega * t).cos()
            }
            DriftProfile::Tabulated { ref table, .. } => {
                let first = table[0].0;
                let last = table[table.len() - 1].0;
                if t < first || t >= last {
                    0.0
                } else {
                    let i = table.partition_point(|&(bt, _)| bt <= t) - 1;
                    let (ta, va) = table[i];
                    let (tb, vb) = table[i + 1];
                    (vb - va) / (tb - ta)
                }
            }
        })
    }

    /// Discontinuity of the drift, if any, as `(time, delta_mu)`.
    pub fn jump(&self) -> Option<(f64, f64)> {
        match *self {
            DriftProfile::Step { amplitude, t_switch, .. } => Some((t_switch, -2.0 * amplitude)),
            _ => None,
        }
    }
}

fn interp_clamped(table: &[(f64, f64)], t: f64) -> f64 {
    let (first_t, first_v) = table[0];
    let (last_t, last_v) = table[table.len() - 1];
    if t <= first_t {
        return first_v;
    }
    if t >= last_t {
        return last_v;
    }
    let i = table.partition_point(|&(bt, _)| bt <= t) - 1;
    let (ta, va) = table[i];
    let (tb, vb) = table[i + 1];
    va + (vb - va) * (t - ta) / (tb - ta)
}

/// Exact integral over [0, t] of g(mu(s)) where g is applied segment-wise and
/// mu is the clamped piecewise-linear table. Only `g = identity` is needed;
/// the squared version has its own routine below.
fn integrate_tabulated(table: &[(f64, f64)], t: f64, g: impl Fn(f64) -> f64) -> f64 {
    let _ = &g;
    segment_integrals(table, t, |va, vb, len| 0.5 * (va + vb) * len)
}

fn integrate_tabulated_sq(table: &[(f64, f64)], t: f64) -> f64 {
    // integral of a linear ramp squared: (va^2 + va*vb + vb^2) / 3 * len
    segment_integrals(table, t, |va, vb, len| (va * va + va * vb + vb * vb) / 3.0 * len)
}

/// Walks the clamped piecewise-linear profile from 0 to t, applying an exact
/// per-segment rule `seg(v_left, v_right, length)` to each linear piece.
fn segment_integrals(table: &[(f64, f64)], t: f64, seg: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let (first_t, first_v) = table[0];
    let (last_t, last_v) = table[table.len() - 1];
    let mut acc = 0.0;

    // clamped constant region before the first breakpoint
    let head_end = t.min(first_t.max(0.0));
    if head_end > 0.0 {
        acc += seg(first_v, first_v, head_end);
    }
    if t <= first_t {
        return acc;
    }

    for w in table.windows(2) {
        let (ta, va) = w[0];
        let (tb, vb) = w[1];
        let lo = ta.max(0.0);
        let hi = tb.min(t);
        if hi <= lo {
            continue;
        }
        let v_lo = va + (vb - va) * (lo - ta) / (tb - ta);
        let v_hi = va + (vb - va) * (hi - ta) / (tb - ta);
        acc += seg(v_lo, v_hi, hi - lo);
    }

    if t > last_t {
        acc += seg(last_v, last_v, t - last_t.max(0.0));
    }
    acc
}
