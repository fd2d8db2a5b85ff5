//! One-time threshold calibration at high trajectory counts. The frozen
//! numbers in tests/acceptance.rs were produced by this tool.

use fht_channel::*;

fn main() {
    for scn in ["scenarios/fig3.scn", "scenarios/fig4.scn"] {
        for n in [100_000usize, 1_000_000] {
            let text = std::fs::read_to_string(scn).unwrap();
            let mut s = parse_scenario(&text).unwrap();
            s.n_trajectories = n;
            let c = compare(&s).unwrap();
            println!(
                "{} n={} l1_cig={:.6} l1_ig={:.6} ratio={:.4} ks_cig={:.4} ks_ig={:.4}",
                s.name, n, c.cig.l1, c.ig.l1, c.cig.l1 / c.ig.l1, c.cig.ks, c.ig.ks
            );
            println!(
                "  mass_cig={:.6} mass_ig={:.6} mass_mc={:.6} dmass_cig={:.4}",
                c.cig.mass_model, c.ig.mass_model, c.cig.mass_mc,
                (c.cig.mass_model - c.cig.mass_mc).abs()
            );
            println!("  peaks_cig={:?}", c.cig.peak_times_model);
            println!("  peaks_ig={:?}", c.ig.peak_times_model);
            println!("  peaks_mc={:?}", c.cig.peak_times_mc);
            println!("  peak_errs_cig={:?}", c.cig.peak_time_errors);
            println!("  peak_errs_ig={:?}", c.ig.peak_time_errors);
        }
    }
}
