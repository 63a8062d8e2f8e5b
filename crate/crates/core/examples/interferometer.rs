//! Output probability of the Mach-Zehnder interferometer with a plasmonic arm,
//! from the lossless fringe to the full model with unequal beamsplitters.
//!
//! cargo run --example interferometer

use std::f64::consts::PI;

use plasmon_decoherence::mzi::{balance_free_arm, phase_from_stage, MziModel, StageGeometry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let delta = 0.4;
    let (gt1, gt2s, g2p) = (1.33, 0.30, 0.05);
    let g1p = balance_free_arm(gt1, g2p)?;
    let models = [
        ("ideal", MziModel::Ideal { delta }),
        ("damped", MziModel::Damped { delta, gt1, gt2s }),
        ("nd-balanced", MziModel::NdBalanced { delta, gamma_free: gt1, gt1, gt2s }),
        ("pol-split", MziModel::PolarizationSplit { delta, g1p, g2p, gt1, gt2s }),
        (
            "full R=0.45",
            MziModel::Full { delta, reflectance: 0.45, transmittance: 0.55, g1p, g2p, gt1, gamma_eff: gt2s + 0.9 },
        ),
    ];
    for (name, model) in &models {
        print!("{name:<12} V = {:.4}  p(phi):", model.visibility()?);
        for k in 0..8 {
            print!(" {:.4}", model.fringe_probability(k as f64 * PI / 4.0)?);
        }
        println!();
    }

    let geom = StageGeometry::new(1.0, 810e-9)?;
    println!("\nstage period {:.1} nm", geom.period() * 1e9);
    for x_nm in [0.0, 202.5, 405.0, 607.5, 810.0] {
        let phi = phase_from_stage(x_nm * 1e-9, &geom);
        println!("x = {x_nm:>6.1} nm  phi = {phi:.4}  p = {:.4}", models[4].1.fringe_probability(phi)?);
    }
    Ok(())
}
