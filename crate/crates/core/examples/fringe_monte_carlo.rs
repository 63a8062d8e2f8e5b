//! Fit the effective dephasing of one waveguide from its interference fringe
//! and attach a Monte-Carlo error bar.
//!
//! cargo run --example fringe_monte_carlo -- [seed] [instances]

use plasmon_decoherence::channels::ChannelParams;
use plasmon_decoherence::estimate::{empirical_visibility, fit_fringe, monte_carlo_fringe};
use plasmon_decoherence::mzi::StageGeometry;
use plasmon_decoherence::simkit::{
    simulate_fringe_scan, stage_positions, stream_id, FringeTruth, NoiseMode, Regime, WaveguideSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    let instances: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);

    let truth = FringeTruth {
        channel: ChannelParams::new(5.27e13, 0.89e13, 2.958e8)?,
        gamma_int: 0.893,
        reflectance: 0.5,
        transmittance: 0.5,
        g2p: 0.0,
        wavenumber: 8.15e6,
    };
    let wg = WaveguideSpec::from_length(12.47e-6)?;
    let geometry = StageGeometry::new(1.0, 810e-9)?;
    let positions = stage_positions(&geometry, 2.0, 41);
    let (_, model) = truth.model_for(&wg)?;
    let amplitude = 400.0 / model.terms()?.base;
    let scan = simulate_fringe_scan(
        &truth,
        &wg,
        &positions,
        &geometry,
        amplitude,
        Regime::Quantum,
        NoiseMode::Poisson,
        seed,
        stream_id("fringe", Regime::Quantum, 1),
    )?;

    let fit = fit_fringe(&scan)?;
    let mc = monte_carlo_fringe(&scan, instances, seed, stream_id("mc", Regime::Quantum, 1))?;
    let v = empirical_visibility(&scan, fit.scale)?;
    println!("{}: truth Gamma_eff = {:.4}  delta = {:.4}", wg.label, -model.visibility()?.ln(), model.delta());
    println!(
        "fit Gamma_eff = {:.4} +/- {:.4}  delta = {:.4}  s = {:.4}  I_in = {:.1}",
        fit.gamma_eff, fit.gamma_eff_std, fit.delta, fit.scale, fit.amplitude
    );
    match mc.std {
        Some(std) => println!("MC ({instances} instances): mean {:.4}  std {std:.4}  failures {}", mc.mean, mc.failures),
        None => println!("MC ({instances} instance): {:.4}", mc.mean),
    }
    println!("-ln(empirical V) = {:.4}", -v.ln());
    Ok(())
}
