//! Scenario configuration files: flat `key = value` documents with dotted
//! keys, `#` comments, and strict unknown-key rejection.

use std::collections::BTreeMap;

use crate::density::{ChannelParams, FluxDistance, PrefactorMode};
use crate::drift::DriftProfile;
use crate::error::{FhtError, Result};
use crate::mc::SimConfig;

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: ChannelParams,
    pub profile: DriftProfile,
    pub mode: PrefactorMode,
    pub flux_distance: FluxDistance,
    pub n_trajectories: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    /// Histogram bins for Monte Carlo density estimates.
    pub bins: usize,
    /// Grid points for analytic density curves.
    pub grid_points: usize,
}

impl Scenario {
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n_trajectories: self.n_trajectories,
            dt: self.dt,
            t_max: self.t_max,
            seed: self.seed,
            params: self.params,
            profile: self.profile.clone(),
        }
    }
}

struct Raw {
    // key -> (line, value); insertion order does not matter for semantics
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let stripped = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| FhtError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{stripped}`"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(FhtError::Parse {
                    line: line_no,
                    message: "empty key or value".into(),
                });
            }
            if entries.insert(key.clone(), (line_no, value)).is_some() {
                return Err(FhtError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Raw { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| FhtError::Parse {
                line,
                message: format!("`{key}` must be a number, got `{v}`"),
            }),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|_| FhtError::Parse {
                line,
                message: format!("`{key}` must be a nonnegative integer, got `{v}`"),
            }),
        }
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<u64>().map(Some).map_err(|_| FhtError::Parse {
                line,
                message: format!("`{key}` must be an unsigned integer, got `{v}`"),
            }),
        }
    }

    fn reject_leftovers(&self) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.iter().next() {
            return Err(FhtError::Parse {
                line: *line,
                message: format!("unknown key `{key}`"),
            });
        }
        Ok(())
    }
}

/// Parses a scenario document with the baseline defaults applied:
/// x0 = 0, ell = 5, sigma2 = 2, v0 = 1, N = 1e5, dt = 1e-3, seed = 42,
/// t_max = 5, 200 bins, 2000 grid points.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_with_overrides(text, &[])
}

/// Same as [`parse_scenario`] but with `(key, value)` overrides applied on
/// top of the document, used by the sweep subcommand and CLI flags.
pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Scenario> {
    let mut raw = Raw::parse(text)?;
    for (k, v) in overrides {
        raw.entries.insert(k.clone(), (0, v.clone()));
    }

    let name = match raw.take("name") {
        Some((line, n)) => {
            let ok = !n.is_empty()
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.');
            if !ok {
                return Err(FhtError::Parse {
                    line,
                    message: format!("`name` must be nonempty and filesystem-safe, got `{n}`"),
                });
            }
            n
        }
        None => return Err(FhtError::Config("missing required key `name`".into())),
    };

    let x0 = raw.take_f64("channel.x0")?.unwrap_or(0.0);
    let ell = raw.take_f64("channel.ell")?.unwrap_or(5.0);
    let sigma2 = raw.take_f64("channel.sigma2")?.unwrap_or(2.0);
    let params = ChannelParams::new(x0, ell, sigma2)?;

    let kind = match raw.take("drift.kind") {
        Some((_, k)) => k,
        None => return Err(FhtError::Config("missing required key `drift.kind`".into())),
    };
    let v0 = raw.take_f64("drift.v0")?.unwrap_or(1.0);
    let amplitude = raw.take_f64("drift.A")?;
    let omega = raw.take_f64("drift.omega")?;
    let t_switch = raw.take_f64("drift.t_switch")?;
    let table = raw.take("drift.table");

    let require = |opt: Option<f64>, key: &str| -> Result<f64> {
        opt.ok_or_else(|| FhtError::Config(format!("drift.kind = {kind} requires `{key}`")))
    };
    let forbid = |present: bool, key: &str| -> Result<()> {
        if present {
            Err(FhtError::Config(format!("`{key}` is not applicable to drift.kind = {kind}")))
        } else {
            Ok(())
        }
    };

    let profile = match kind.as_str() {
        "constant" => {
            forbid(amplitude.is_some(), "drift.A")?;
            forbid(omega.is_some(), "drift.omega")?;
            forbid(t_switch.is_some(), "drift.t_switch")?;
            forbid(table.is_some(), "drift.table")?;
            DriftProfile::constant(v0)?
        }
        "sinusoidal" => {
            forbid(t_switch.is_some(), "drift.t_switch")?;
            forbid(table.is_some(), "drift.table")?;
            DriftProfile::sinusoidal(v0, require(amplitude, "drift.A")?, require(omega, "drift.omega")?)?
        }
        "step" => {
            forbid(omega.is_some(), "drift.omega")?;
            forbid(table.is_some(), "drift.table")?;
            DriftProfile::step(v0, require(amplitude, "drift.A")?, require(t_switch, "drift.t_switch")?)?
        }
        "tabulated" => {
            forbid(amplitude.is_some(), "drift.A")?;
            forbid(omega.is_some(), "drift.omega")?;
            forbid(t_switch.is_some(), "drift.t_switch")?;
            let (line, spec) = table
                .ok_or_else(|| FhtError::Config("drift.kind = tabulated requires `drift.table`".into()))?;
            DriftProfile::tabulated(v0, parse_table(&spec, line)?)?
        }
        other => {
            return Err(FhtError::Config(format!(
                "`drift.kind` must be one of constant|sinusoidal|step|tabulated, got `{other}`"
            )))
        }
    };

    let mode = match raw.take("mode") {
        None => PrefactorMode::Instantaneous,
        Some((_, m)) if m == "instantaneous" => PrefactorMode::Instantaneous,
        Some((_, m)) if m == "running_average" => PrefactorMode::RunningAverage,
        Some((line, m)) => {
            return Err(FhtError::Parse {
                line,
                message: format!("`mode` must be instantaneous|running_average, got `{m}`"),
            })
        }
    };
    let flux_distance = match raw.take("flux_distance") {
        None => FluxDistance::Boundary,
        Some((_, d)) if d == "boundary" => FluxDistance::Boundary,
        Some((_, d)) if d == "gap" => FluxDistance::Gap,
        Some((line, d)) => {
            return Err(FhtError::Parse {
                line,
                message: format!("`flux_distance` must be boundary|gap, got `{d}`"),
            })
        }
    };

    let n_trajectories = raw.take_usize("sim.n")?.unwrap_or(100_000);
    let dt = raw.take_f64("sim.dt")?.unwrap_or(1e-3);
    let t_max = raw.take_f64("sim.t_max")?.unwrap_or(5.0);
    let seed = raw.take_u64("sim.seed")?.unwrap_or(42);
    let bins = raw.take_usize("output.bins")?.unwrap_or(200);
    let grid_points = raw.take_usize("output.grid")?.unwrap_or(2000);

    raw.reject_leftovers()?;

    let scenario = Scenario {
        name,
        params,
        profile,
        mode,
        flux_distance,
        n_trajectories,
        dt,
        t_max,
        seed,
        bins,
        grid_points,
    };
    scenario.sim_config().validate()?;
    if scenario.bins == 0 || scenario.grid_points < 2 {
        return Err(FhtError::Config(
            "output.bins must be >= 1 and output.grid >= 2".into(),
        ));
    }
    Ok(scenario)
}

fn parse_table(spec: &str, line: usize) -> Result<Vec<(f64, f64)>> {
    spec.split(',')
        .map(|pair| {
            let (t, v) = pair.trim().split_once(':').ok_or_else(|| FhtError::Parse {
                line,
                message: format!("table entries are `t:v` pairs, got `{pair}`"),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| FhtError::Parse {
                    line,
                    message: format!("bad table number `{s}`"),
                })
            };
            Ok((parse(t)?, parse(v)?))
        })
        .collect()
}

/// Canonical rendering of a scenario; `parse(serialize(s)) == s`.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", s.name));
    out.push_str(&format!(
        "mode = {}\n",
        match s.mode {
            PrefactorMode::Instantaneous => "instantaneous",
            PrefactorMode::RunningAverage => "running_average",
        }
    ));
    out.push_str(&format!(
        "flux_distance = {}\n",
        match s.flux_distance {
            FluxDistance::Boundary => "boundary",
            FluxDistance::Gap => "gap",
        }
    ));
    out.push_str(&format!("channel.x0 = {}\n", s.params.x0));
    out.push_str(&format!("channel.ell = {}\n", s.params.ell));
    out.push_str(&format!("channel.sigma2 = {}\n", s.params.sigma2));
    match &s.profile {
        DriftProfile::Constant { v0 } => {
            out.push_str("drift.kind = constant\n");
            out.push_str(&format!("drift.v0 = {v0}\n"));
        }
        DriftProfile::Sinusoidal { v0, amplitude, omega } => {
            out.push_str("drift.kind = sinusoidal\n");
            out.push_str(&format!("drift.v0 = {v0}\n"));
            out.push_str(&format!("drift.A = {amplitude}\n"));
            out.push_str(&format!("drift.omega = {omega}\n"));
        }
        DriftProfile::Step { v0, amplitude, t_switch } => {
            out.push_str("drift.kind = step\n");
            out.push_str(&format!("drift.v0 = {v0}\n"));
            out.push_str(&format!("drift.A = {amplitude}\n"));
            out.push_str(&format!("drift.t_switch = {t_switch}\n"));
        }
        DriftProfile::Tabulated { v0, table } => {
            out.push_str("drift.kind = tabulated\n");
            out.push_str(&format!("drift.v0 = {v0}\n"));
            let pairs: Vec<String> = table.iter().map(|(t, v)| format!("{t}:{v}")).collect();
            out.push_str(&format!("drift.table = {}\n", pairs.join(", ")));
        }
    }
    out.push_str(&format!("sim.n = {}\n", s.n_trajectories));
    out.push_str(&format!("sim.dt = {}\n", s.dt));
    out.push_str(&format!("sim.t_max = {}\n", s.t_max));
    out.push_str(&format!("sim.seed = {}\n", s.seed));
    out.push_str(&format!("output.bins = {}\n", s.bins));
    out.push_str(&format!("output.grid = {}\n", s.grid_points));
    out
}
