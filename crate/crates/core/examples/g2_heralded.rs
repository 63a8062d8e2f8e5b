//! Heralded g²(0): tune the multi-pair probability so the analytic estimator
//! limit hits a target, then simulate coincidence counts and estimate g².
//!
//! cargo run --example g2_heralded -- [target] [seed]

use plasmon_decoherence::simkit::{estimate_g2, simulate_g2_counts, stream_id, Regime, SourceModel};

/// Bisection on the multi-pair probability; `expected_g2` rises monotonically with it.
fn calibrate(base: SourceModel, target: f64) -> SourceModel {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let g2 = SourceModel { multi_pair_prob: mid, ..base }.expected_g2();
        if g2 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    SourceModel { multi_pair_prob: 0.5 * (lo + hi), ..base }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let target: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.26);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let base = SourceModel {
        herald_rate: 2.0e5,
        transmission: 0.05,
        multi_pair_prob: 0.0,
        dark_rate: 100.0,
        coincidence_window: 8e-9,
    };
    let source = calibrate(base, target);
    println!("multi_pair_prob = {:.6}", source.multi_pair_prob);
    println!("dark-only g2 limit = {:.4}", SourceModel { multi_pair_prob: 0.0, ..base }.expected_g2());
    println!("expected g2 = {:.6}", source.expected_g2());

    let counts = simulate_g2_counts(&source, 600.0, seed, stream_id("g2", Regime::Quantum, 0))?;
    println!(
        "n_herald = {}  n_ab = {}  n_ac = {}  n_abc = {}",
        counts.n_herald, counts.n_ab, counts.n_ac, counts.n_abc
    );
    println!("estimated g2 = {:.4}", estimate_g2(&counts)?);
    Ok(())
}
