//! Group-velocity dispersion from a tabulated stripe mode and the resulting
//! overlap of the dispersed wavepacket with the undispersed one.
//!
//! cargo run --example dispersion_overlap -- [table.csv]

use plasmon_decoherence::dispersion::{angular_frequency, dispersion_overlap, gvd_coefficient, DispersionTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/stripe_dispersion.csv").into());
    let lambda0 = 810e-9;
    let table = DispersionTable::from_path(&path, angular_frequency(lambda0))?;
    let gvd = gvd_coefficient(&table)?;
    println!("v_g(omega0) = {:.4e} m/s", table.group_velocity_at(table.omega0())?);
    println!("D = {gvd:.4e} s^2/m");

    for length_um in [10.0, 30.0, 90.0, 300.0, 1000.0] {
        let check = dispersion_overlap(40e-9, lambda0, length_um * 1e-6, gvd)?;
        println!(
            "l = {length_um:>6.0} um  sigma_t = {:.3e} s  (from {:.3e})  overlap = {:.6}",
            check.sigma_t, check.sigma_t0, check.overlap
        );
    }
    Ok(())
}
