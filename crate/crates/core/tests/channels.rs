use nalgebra::Matrix2;
use num_complex::Complex64;
use plasmon_decoherence::channels::*;
use proptest::prelude::*;

type M = Matrix2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn to_matrix(rho: &DensityMatrix2) -> M {
    M::new(c(rho.rho00()), rho.rho01(), rho.rho10(), c(rho.rho11()))
}

fn assert_close(rho: &DensityMatrix2, m: &M, tol: f64) {
    let diff = to_matrix(rho) - m;
    let err = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err <= tol, "max element error {err:e}\n{rho:?}\n{m}");
}

/// Kraus form of amplitude damping with decay probability `p`.
fn kraus_amplitude(m: &M, p: f64) -> M {
    let k0 = M::new(c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt()));
    let k1 = M::new(c(0.0), c(p.sqrt()), c(0.0), c(0.0));
    k0 * m * k0.adjoint() + k1 * m * k1.adjoint()
}

/// Phase flip mixture `(1+λ)/2 ρ + (1−λ)/2 ZρZ`.
fn kraus_phase(m: &M, lambda: f64) -> M {
    let z = M::new(c(1.0), c(0.0), c(0.0), c(-1.0));
    m * c(0.5 * (1.0 + lambda)) + z * m * z * c(0.5 * (1.0 - lambda))
}

prop_compose! {
    fn state()(p in 0.0f64..=1.0, r in 0.0f64..=1.0, phase in -3.2f64..3.2) -> DensityMatrix2 {
        let mag = r * (p * (1.0 - p)).sqrt();
        DensityMatrix2::new(p, 1.0 - p, Complex64::from_polar(mag, phase)).unwrap()
    }
}

proptest! {
    #[test]
    fn amplitude_damping_matches_kraus(rho in state(), g in 0.0f64..1e14, t in 0.0f64..2e-13) {
        let out = apply_amplitude_damping(&rho, g, t).unwrap();
        assert_close(&out, &kraus_amplitude(&to_matrix(&rho), 1.0 - (-g * t).exp()), 1e-12);
    }

    #[test]
    fn phase_damping_matches_kraus(rho in state(), g in 0.0f64..1e14, t in 0.0f64..2e-13) {
        let out = apply_phase_damping(&rho, g, t).unwrap();
        assert_close(&out, &kraus_phase(&to_matrix(&rho), (-g * t).exp()), 1e-12);
    }

    #[test]
    fn waveguide_channel_preserves_state(rho in state(), g1 in 0.0f64..1e14, g2 in 0.0f64..1e14, l in 0.0f64..5e-5) {
        let params = ChannelParams::new(g1, g2, 2.958e8).unwrap();
        let out = apply_waveguide_channel(&rho, &params, l).unwrap();
        prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
        prop_assert!(out.rho00() >= -1e-12 && out.rho11() >= -1e-12);
        prop_assert!(out.positivity_margin() >= -1e-12);
        let t = params.transit_time(l);
        let expected = rho.rho01() * (-(0.5 * g1 + g2) * t).exp();
        prop_assert!((out.rho01() - expected).norm() <= 1e-12);
    }

    #[test]
    fn channels_commute(rho in state(), g1 in 0.0f64..1e14, g2 in 0.0f64..1e14, t in 0.0f64..2e-13) {
        let a = apply_phase_damping(&apply_amplitude_damping(&rho, g1, t).unwrap(), g2, t).unwrap();
        let b = apply_amplitude_damping(&apply_phase_damping(&rho, g2, t).unwrap(), g1, t).unwrap();
        assert_close(&a, &to_matrix(&b), 1e-12);
    }

    #[test]
    fn damping_is_a_semigroup(rho in state(), g in 0.0f64..1e14, t1 in 0.0f64..1e-13, t2 in 0.0f64..1e-13) {
        let ad = apply_amplitude_damping(&apply_amplitude_damping(&rho, g, t1).unwrap(), g, t2).unwrap();
        assert_close(&ad, &to_matrix(&apply_amplitude_damping(&rho, g, t1 + t2).unwrap()), 1e-12);
        let pd = apply_phase_damping(&apply_phase_damping(&rho, g, t1).unwrap(), g, t2).unwrap();
        assert_close(&pd, &to_matrix(&apply_phase_damping(&rho, g, t1 + t2).unwrap()), 1e-12);
    }

    #[test]
    fn t2_never_exceeds_twice_t1(t1 in 1e-15f64..1e-12, t2s in 1e-15f64..1e-10) {
        let t2 = t2_from(t1, t2s).unwrap();
        prop_assert!(t2 <= 2.0 * t1 && t2 <= t2s);
    }
}

#[test]
fn invalid_states_are_rejected() {
    assert!(DensityMatrix2::real(0.6, 0.5, 0.0).is_err());
    assert!(DensityMatrix2::real(1.2, -0.2, 0.0).is_err());
    assert!(DensityMatrix2::real(0.5, 0.5, 0.6).is_err());
    assert!(DensityMatrix2::real(0.5, 0.5, 0.5).is_ok());
}

#[test]
fn negative_rates_and_times_are_domain_errors() {
    let rho = DensityMatrix2::excited();
    assert!(apply_amplitude_damping(&rho, -1.0, 1e-14).is_err());
    assert!(apply_phase_damping(&rho, 1e13, -1e-14).is_err());
    assert!(ChannelParams::new(1e13, 1e13, 0.0).is_err());
    assert!(t2_from(0.0, 1e-13).is_err());
}

#[test]
fn excited_state_decays_to_ground() {
    let out = apply_amplitude_damping(&DensityMatrix2::excited(), 5.27e13, 1e-11).unwrap();
    assert!(out.rho11() < 1e-200);
    assert_eq!(out.rho00(), 1.0);
}

#[test]
fn infinite_t2_star_gives_amplitude_limit() {
    assert_eq!(t2_from(1.9e-14, f64::INFINITY).unwrap(), 3.8e-14);
    let times = DampingTimes::from_params(&ChannelParams::new(5.27e13, 0.0, 2.958e8).unwrap()).unwrap();
    assert!(times.t2_star.is_infinite());
    assert!((times.t2 - 2.0 * times.t1).abs() <= 1e-28);
}
