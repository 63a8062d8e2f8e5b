use std::f64::consts::{PI, TAU};

use plasmon_decoherence::mzi::*;
use proptest::prelude::*;

fn brute_force_visibility(model: &MziModel) -> f64 {
    let ps: Vec<f64> = (0..20_000)
        .map(|k| model.fringe_probability(TAU * k as f64 / 20_000.0).unwrap())
        .collect();
    let max = ps.iter().copied().fold(f64::MIN, f64::max);
    let min = ps.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

proptest! {
    #[test]
    fn lossless_amplitudes_give_ideal_probability(phi in -10.0f64..10.0, delta in 0.0f64..TAU) {
        let a = propagate_pure(phi, delta);
        let ideal = MziModel::Ideal { delta }.fringe_probability(phi).unwrap();
        prop_assert!((a.photon_in_mode1.norm_sqr() - ideal).abs() <= 1e-12);
        prop_assert!((a.photon_in_mode1.norm_sqr() + a.photon_in_mode2.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn reduction_chain(
        delta in 0.0f64..TAU, phi in -10.0f64..10.0,
        g1p in 0.0f64..3.0, g2p in 0.0f64..3.0, gt1 in 0.0f64..3.0, gt2s in 0.0f64..3.0,
    ) {
        let p = |m: MziModel| m.fringe_probability(phi).unwrap();
        let full = p(MziModel::Full { delta, reflectance: 0.5, transmittance: 0.5, g1p, g2p, gt1, gamma_eff: gt2s });
        let pol = p(MziModel::PolarizationSplit { delta, g1p, g2p, gt1, gt2s });
        prop_assert!((full - pol).abs() <= 1e-12);

        let pol0 = p(MziModel::PolarizationSplit { delta, g1p, g2p: 0.0, gt1, gt2s });
        let nd = p(MziModel::NdBalanced { delta, gamma_free: g1p, gt1, gt2s });
        prop_assert!((pol0 - 2.0 * nd).abs() <= 1e-12);

        let nd0 = p(MziModel::NdBalanced { delta, gamma_free: 0.0, gt1, gt2s });
        let damped = p(MziModel::Damped { delta, gt1, gt2s });
        prop_assert!((nd0 - damped).abs() <= 1e-12);

        let undamped = p(MziModel::Damped { delta, gt1: 0.0, gt2s: 0.0 });
        let ideal = p(MziModel::Ideal { delta });
        prop_assert!((undamped - ideal).abs() <= 1e-12);
    }

    #[test]
    fn balanced_visibility_is_exponential(g2p in 0.0f64..2.0, gt1 in 0.0f64..3.0, ge in 0.0f64..4.0, delta in 0.0f64..TAU) {
        let g1p = balance_free_arm(gt1, g2p).unwrap();
        let m = MziModel::Full { delta, reflectance: 0.5, transmittance: 0.5, g1p, g2p, gt1, gamma_eff: ge };
        prop_assert!((m.visibility().unwrap() - (-ge).exp()).abs() <= 1e-12);
    }

    #[test]
    fn strict_probability_models_stay_in_unit_interval(
        delta in 0.0f64..TAU, phi in -10.0f64..10.0, gt1 in 0.0f64..3.0, gt2s in 0.0f64..3.0, gf in 0.0f64..3.0,
    ) {
        for m in [
            MziModel::Damped { delta, gt1, gt2s },
            MziModel::NdBalanced { delta, gamma_free: gf, gt1, gt2s },
        ] {
            let v = m.fringe_probability(phi).unwrap();
            prop_assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        }
    }
}

#[test]
fn analytic_visibility_matches_brute_force() {
    let models = [
        MziModel::Damped { delta: 0.3, gt1: 0.8, gt2s: 0.4 },
        MziModel::NdBalanced { delta: 2.0, gamma_free: 0.2, gt1: 1.1, gt2s: 0.1 },
        MziModel::PolarizationSplit { delta: 4.0, g1p: 1.5, g2p: 0.3, gt1: 1.2, gt2s: 0.6 },
        MziModel::Full { delta: 5.5, reflectance: 0.3, transmittance: 0.6, g1p: 0.7, g2p: 0.2, gt1: 1.9, gamma_eff: 0.9 },
    ];
    for m in &models {
        let v = m.visibility().unwrap();
        assert!((v - brute_force_visibility(m)).abs() < 1e-7, "{m:?}: {v}");
    }
}

#[test]
fn fully_damped_model_has_no_visibility() {
    let m = MziModel::Full { delta: 0.0, reflectance: 0.0, transmittance: 0.0, g1p: 0.0, g2p: 0.0, gt1: 0.0, gamma_eff: 0.0 };
    assert!(matches!(m.visibility(), Err(plasmon_decoherence::Error::DegenerateModel(_))));
}

#[test]
fn invalid_parameters_are_rejected() {
    let m = MziModel::Full { delta: 0.0, reflectance: 0.7, transmittance: 0.7, g1p: 0.0, g2p: 0.0, gt1: 0.0, gamma_eff: 0.0 };
    assert!(m.validate(Validation::Rate).is_err());
    let m = MziModel::Damped { delta: 0.0, gt1: -0.1, gt2s: 0.0 };
    assert!(m.fringe_probability(0.0).is_err());
    let m = MziModel::PolarizationSplit { delta: 0.0, g1p: 0.0, g2p: 0.0, gt1: 0.0, gt2s: 0.0 };
    assert!(m.validate(Validation::StrictProbability).is_err());
    assert!(m.validate(Validation::Rate).is_ok());
    assert!(balance_free_arm(-1.0, 0.0).is_err());
}

#[test]
fn stage_period_is_one_wavelength() {
    let geom = StageGeometry::new(1.0, 810e-9).unwrap();
    assert!((geom.period() - 810e-9).abs() < 1e-20);
    assert!((phase_from_stage(405e-9, &geom) - PI).abs() < 1e-12);
    let doubled = StageGeometry::new(2.0, 810e-9).unwrap();
    assert!((phase_from_stage(405e-9, &doubled) - TAU).abs() < 1e-12);
    assert!(StageGeometry::new(0.0, 810e-9).is_err());
}

#[test]
fn waveguide_phase_wraps() {
    let p = PlasmonicPhase { wavenumber: 8.15e6, length: 12.47e-6 };
    let raw = delta_from_waveguide(&p, false).unwrap();
    let reduced = delta_from_waveguide(&p, true).unwrap();
    assert!((raw - 8.15e6 * 12.47e-6).abs() < 1e-12);
    assert!((0.0..TAU).contains(&reduced));
    assert!(((raw - reduced) / TAU - ((raw - reduced) / TAU).round()).abs() < 1e-12);
    assert!((wrap_phase_signed(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
}
