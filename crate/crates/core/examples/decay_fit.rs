//! Propagation length and amplitude damping rate from counts through
//! waveguides of increasing length.
//!
//! cargo run --example decay_fit -- [seed]

use plasmon_decoherence::channels::ChannelParams;
use plasmon_decoherence::estimate::fit_exponential_decay;
use plasmon_decoherence::simkit::{simulate_decay_scan, stream_id, NoiseMode, Regime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let truth = ChannelParams::new(5.27e13, 0.89e13, 2.958e8)?;
    let lengths: Vec<f64> = [7.47, 12.47, 17.47, 22.47].iter().map(|l| l * 1e-6).collect();

    let scan = simulate_decay_scan(
        &truth,
        &lengths,
        2000.0,
        24.0,
        Regime::Quantum,
        NoiseMode::Poisson,
        seed,
        stream_id("decay", Regime::Quantum, 0),
    )?;
    for p in &scan.points {
        println!("l = {:>6.2} um  counts = {:>6}", p.length * 1e6, p.counts);
    }

    let fit = fit_exponential_decay(&scan, truth.group_velocity)?;
    println!(
        "L = {:.3} +/- {:.3} um  (truth {:.3})",
        fit.propagation_length.value * 1e6,
        fit.propagation_length.std * 1e6,
        truth.propagation_length() * 1e6
    );
    println!("Gamma1 = {:.4e} +/- {:.1e} 1/s", fit.gamma1.value, fit.gamma1.std);
    println!("T1 = {:.4e} +/- {:.1e} s", fit.t1.value, fit.t1.std);
    Ok(())
}
