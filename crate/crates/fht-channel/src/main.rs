//! Batch front-end for the first-hitting-time channel toolkit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fht_channel::{
    decomposed_log_rn, density_curve, export, histogram, metrics, parse_with_overrides,
    pinned_path, simulate, DensityModel, FhtError, Scenario,
};

#[derive(Parser)]
#[command(name = "fht-channel", version, about = "First-hitting-time channel scenarios: analytic densities, Monte Carlo, and comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario configuration file (.scn)
    scenario: PathBuf,
    /// Output directory (default: $FHT_OUT_DIR or current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the Monte Carlo stage
    #[arg(long)]
    threads: Option<usize>,
    /// Override the scenario's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the histogram bin count
    #[arg(long)]
    bins: Option<usize>,
    /// Override the time horizon
    #[arg(long)]
    tmax: Option<f64>,
    /// Override the analytic grid resolution
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic C-IG and IG densities and their CDFs
    Density(Common),
    /// Run the Monte Carlo simulator and export the histogram
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the raw per-trajectory arrivals CSV
        #[arg(long)]
        arrivals: bool,
    },
    /// Simulate, build both analytic models, and report fit metrics
    Compare(Common),
    /// Per-path change-of-measure breakdowns on pinned trajectories
    Diagnose(Common),
    /// Re-run the comparison while varying one scenario key
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Scenario key to vary, e.g. drift.A
        #[arg(long)]
        param: String,
        /// Comma-separated values for the swept key
        #[arg(long)]
        values: String,
    },
}

fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("FHT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_scenario(common: &Common, extra: &[(String, String)]) -> Result<Scenario, FhtError> {
    let text = fs::read_to_string(&common.scenario)?;
    let mut overrides: Vec<(String, String)> = extra.to_vec();
    if let Some(seed) = common.seed {
        overrides.push(("sim.seed".into(), seed.to_string()));
    }
    if let Some(bins) = common.bins {
        overrides.push(("output.bins".into(), bins.to_string()));
    }
    if let Some(tmax) = common.tmax {
        overrides.push(("sim.t_max".into(), tmax.to_string()));
    }
    if let Some(grid) = common.grid {
        overrides.push(("output.grid".into(), grid.to_string()));
    }
    parse_with_overrides(&text, &overrides)
}

fn init_threads(common: &Common) -> Result<(), FhtError> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| FhtError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, FhtError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn both_curves(
    s: &Scenario,
) -> Result<(fht_channel::DensityCurve, fht_channel::DensityCurve), FhtError> {
    let mk = |model| {
        density_curve(
            &s.params,
            &s.profile,
            s.mode,
            s.flux_distance,
            model,
            s.t_max,
            s.grid_points,
        )
    };
    Ok((mk(DensityModel::CorrectedIg)?, mk(DensityModel::ClassicalIg)?))
}

fn run_density(common: &Common) -> Result<(), FhtError> {
    let s = load_scenario(common, &[])?;
    let (cig, ig) = both_curves(&s)?;
    write(&out_dir(common), &format!("{}_density.csv", s.name), &export::density_csv(&cig, &ig))?;
    Ok(())
}

fn run_simulate(common: &Common, with_arrivals: bool) -> Result<(), FhtError> {
    init_threads(common)?;
    let s = load_scenario(common, &[])?;
    let arrivals = simulate(&s.sim_config())?;
    let hist = histogram(&arrivals, s.bins)?;
    let dir = out_dir(common);
    write(&dir, &format!("{}_histogram.csv", s.name), &export::histogram_csv(&hist))?;
    if with_arrivals {
        write(&dir, &format!("{}_arrivals.csv", s.name), &export::arrivals_csv(&arrivals))?;
    }
    println!(
        "{}: {} / {} arrived ({:.4})",
        s.name,
        arrivals.n_total() - arrivals.n_censored(),
        arrivals.n_total(),
        arrivals.arrival_fraction()
    );
    Ok(())
}

fn run_compare(common: &Common) -> Result<(), FhtError> {
    init_threads(common)?;
    let s = load_scenario(common, &[])?;
    let cmp = metrics::compare(&s)?;
    let dir = out_dir(common);
    write(
        &dir,
        &format!("{}_compare.csv", s.name),
        &export::combined_csv(&cmp.curve_cig, &cmp.curve_ig, &cmp.hist),
    )?;
    let report_text = format!("{}{}", cmp.cig.to_kv_text("cig"), cmp.ig.to_kv_text("ig"));
    write(&dir, &format!("{}_report.txt", s.name), &report_text)?;
    let report_csv = format!(
        "{}\n{}\n{}\n",
        fht_channel::FitReport::csv_header(),
        cmp.cig.csv_row("cig"),
        cmp.ig.csv_row("ig"),
    );
    write(&dir, &format!("{}_report.csv", s.name), &report_csv)?;
    print_summary(&cmp);
    Ok(())
}

fn print_summary(cmp: &metrics::Comparison) {
    let peaks = |v: &[f64]| {
        v.iter().map(|t| format!("{t:.3}")).collect::<Vec<_>>().join(" ")
    };
    println!("scenario {}", cmp.scenario_name);
    println!("{:<18}{:>14}{:>14}", "metric", "C-IG", "IG");
    println!("{:<18}{:>14.6}{:>14.6}", "l1", cmp.cig.l1, cmp.ig.l1);
    println!("{:<18}{:>14.6}{:>14.6}", "ks", cmp.cig.ks, cmp.ig.ks);
    println!(
        "{:<18}{:>14}{:>14}",
        "peaks",
        peaks(&cmp.cig.peak_times_model),
        peaks(&cmp.ig.peak_times_model)
    );
    println!("{:<18}{:>14}", "mc peaks", peaks(&cmp.cig.peak_times_mc));
    let fmt_err = |r: &fht_channel::FitReport| {
        r.max_peak_error().map_or_else(|| "-".into(), |e| format!("{e:.4}"))
    };
    println!("{:<18}{:>14}{:>14}", "max peak err", fmt_err(&cmp.cig), fmt_err(&cmp.ig));
    println!(
        "{:<18}{:>14.6}{:>14.6}",
        "model mass", cmp.cig.mass_model, cmp.ig.mass_model
    );
    println!("{:<18}{:>14.6}", "mc mass", cmp.cig.mass_mc);
}

fn run_diagnose(common: &Common) -> Result<(), FhtError> {
    let s = load_scenario(common, &[])?;
    let n_paths = 100;
    let n_steps = (s.t_max / s.dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rows = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let path = pinned_path(&s.params, &s.profile, s.t_max, n_steps, &mut rng)?;
        rows.push(decomposed_log_rn(&path, &s.profile, s.params.sigma2)?);
    }
    write(&out_dir(common), &format!("{}_girsanov.csv", s.name), &export::diagnostics_csv(&rows))?;
    let mean_diff: f64 = rows
        .iter()
        .map(|b| (b.sum() - b.direct_log_rn).abs())
        .sum::<f64>()
        / rows.len() as f64;
    println!("{}: mean |decomposed - direct| = {mean_diff:.3e} over {n_paths} paths", s.name);
    Ok(())
}

fn run_sweep(common: &Common, param: &str, values: &str) -> Result<(), FhtError> {
    init_threads(common)?;
    let mut out = String::from(
        "param,value,l1_cig,ks_cig,mass_cig,l1_ig,ks_ig,mass_ig,mass_mc\n",
    );
    let mut name = String::new();
    for value in values.split(',') {
        let value = value.trim();
        let s = load_scenario(common, &[(param.to_string(), value.to_string())])?;
        let cmp = metrics::compare(&s)?;
        name = s.name.clone();
        out.push_str(&format!(
            "{param},{value},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}\n",
            cmp.cig.l1,
            cmp.cig.ks,
            cmp.cig.mass_model,
            cmp.ig.l1,
            cmp.ig.ks,
            cmp.ig.mass_model,
            cmp.cig.mass_mc,
        ));
        println!("{param} = {value}: l1_cig {:.5}, l1_ig {:.5}", cmp.cig.l1, cmp.ig.l1);
    }
    write(&out_dir(common), &format!("{name}_sweep.csv"), &out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), FhtError> {
    match &cli.command {
        Command::Density(c) => run_density(c),
        Command::Simulate { common, arrivals } => run_simulate(common, *arrivals),
        Command::Compare(c) => run_compare(c),
        Command::Diagnose(c) => run_diagnose(c),
        Command::Sweep { common, param, values } => run_sweep(common, param, values),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
