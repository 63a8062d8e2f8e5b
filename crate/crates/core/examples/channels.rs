//! Amplitude and phase damping of a single-excitation qubit travelling down a
//! plasmonic waveguide.
//!
//! cargo run --example channels

use plasmon_decoherence::channels::{
    apply_waveguide_channel, gamma1_from_propagation, t2_from, ChannelParams, DampingTimes, DensityMatrix2,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vg = 2.958e8;
    let gamma1 = gamma1_from_propagation(5.61e-6, vg)?;
    let params = ChannelParams::new(gamma1, 0.89e13, vg)?;
    let times = DampingTimes::from_params(&params)?;
    println!("Gamma1 = {gamma1:.4e} 1/s  L = {:.3} um", params.propagation_length() * 1e6);
    println!("T1 = {:.4e} s  T2* = {:.4e} s  T2 = {:.4e} s", times.t1, times.t2_star, times.t2);
    println!("T2 at the amplitude-damping limit: {:.4e} s", t2_from(times.t1, f64::INFINITY)?);

    // equal superposition of vacuum and one plasmon
    let rho = DensityMatrix2::pure(std::f64::consts::FRAC_PI_4, 0.0);
    println!("\n{:>8} {:>10} {:>10} {:>10}", "l (um)", "rho11", "|rho01|", "trace");
    for l_um in [0.0, 2.5, 5.0, 7.47, 12.47, 17.47, 22.47] {
        let out = apply_waveguide_channel(&rho, &params, l_um * 1e-6)?;
        println!("{l_um:>8.2} {:>10.5} {:>10.5} {:>10.6}", out.rho11(), out.rho01().norm(), out.trace());
    }
    Ok(())
}
