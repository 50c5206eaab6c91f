use nalgebra::{DMatrix, Matrix4};
use ncphase_core::channel::{diffusion_trajectory, TrajectoryConfig};
use ncphase_core::dynamics::DerivedCoeffs;
use ncphase_core::gaussian::BONA_FIDE_TOL;
use ncphase_core::metrics::DEFAULT_WITNESS_TOL;
use ncphase_core::*;
use proptest::prelude::*;

fn unit() -> Units {
    Units::default()
}

/// `nu * R(phi) diag(e^{-2r}, e^{2r}) R(phi)^T`, displaced by `d`.
fn one_mode(nu: f64, r: f64, phi: f64, d: [f64; 2]) -> GaussianState {
    let (s, c) = phi.sin_cos();
    let rot = nalgebra::Matrix2::new(c, -s, s, c);
    let sq = nalgebra::Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
    let m = rot * sq * rot.transpose() * nu;
    let m = DMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(0, 1)], m[(1, 1)]]);
    GaussianState::new(
        FirstMoments::new(d.to_vec()).unwrap(),
        CovarianceMatrix::new(m).unwrap(),
    )
    .unwrap()
}

fn arb_state() -> impl Strategy<Value = GaussianState> {
    (1.0f64..8.0, -1.0f64..1.0, 0.0f64..std::f64::consts::PI, -4.0f64..4.0, -4.0f64..4.0)
        .prop_map(|(nu, r, phi, a, b)| one_mode(nu, r, phi, [a, b]))
}

#[test]
fn frequency_identity_on_grid() {
    for i in 0..=20 {
        for j in 0..=20 {
            let (theta, zeta) = (i as f64 / 20.0, j as f64 / 20.0);
            let c = coefficients(&NcParams::new(theta, zeta, unit()).unwrap());
            assert!(
                c.frequency_identity_residual() < 1e-10,
                "theta = {theta}, zeta = {zeta}"
            );
        }
    }
}

#[test]
fn propagator_stays_symplectic() {
    for b0 in [0.0, 0.5, 1.0] {
        for gauge in [Gauge::PositionOnly, Gauge::Symmetric] {
            let c = coefficients(&params_from_b0(b0, gauge, unit()).unwrap());
            for k in 0..200 {
                let t = 50.0 * k as f64 / 199.0;
                let s = propagator(&c, t).unwrap();
                assert!(s.symplectic_residual() < 1e-10);
                assert!((s.matrix().determinant() - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn one_parameter_group_without_rotation() {
    let commutative = coefficients(&NcParams::commutative());
    // alpha != beta but gamma = 0: not reachable from the map, still a
    // valid quadratic oscillator.
    let anisotropic = DerivedCoeffs {
        alpha2: 0.5,
        beta2: 0.8,
        gamma: 0.0,
        xi: 0.0,
        big_omega: 2.0 * (0.4f64).sqrt(),
        b0: 0.0,
    };
    for c in [commutative, anisotropic] {
        for (t1, t2) in [(0.3, 1.1), (2.5, 7.0), (10.0, 0.01)] {
            let a = propagator(&c, t1).unwrap();
            let b = propagator(&c, t2).unwrap();
            let ab = propagator(&c, t1 + t2).unwrap();
            assert!((a.matrix() * b.matrix() - ab.matrix()).amax() < 1e-10);
        }
    }
}

#[test]
fn commutative_propagator_is_orthogonal() {
    let c = coefficients(&NcParams::commutative());
    for k in 0..100 {
        let s = *propagator(&c, 0.5 * k as f64).unwrap().matrix();
        assert!((s * s.transpose() - Matrix4::identity()).amax() < 1e-12);
    }
}

#[test]
fn field_round_trip() {
    for gauge in [Gauge::PositionOnly, Gauge::Symmetric] {
        for k in 0..=36 {
            let b0 = 1.8 * k as f64 / 36.0;
            let c = coefficients(&params_from_b0(b0, gauge, unit()).unwrap());
            assert!((c.b0 - b0).abs() < 1e-12, "{gauge:?} {b0}");
        }
    }
}

#[test]
fn diffuse_only_trajectories_are_markovian() {
    let base = TrajectoryConfig::cooling(InitialConditions::default(), 0.0);
    let starts = [
        one_mode(9.0, 0.0, 0.0, [1.0, 1.0]),
        one_mode(1.0, 0.8, 0.3, [-2.0, 3.0]),
        one_mode(3.0, -0.5, 1.2, [0.0, 0.0]),
        one_mode(1.0, 0.0, 0.0, [0.0, 0.0]),
    ];
    for s in &starts {
        let traj = diffusion_trajectory(s, &base).unwrap();
        let series = fidelity_series(&traj, &base.channel.asymptotic_state()).unwrap();
        let report = nonmarkov_witness(&series, DEFAULT_WITNESS_TOL);
        assert_eq!(report.measure, 0.0);
        assert!(report.intervals.is_empty());
    }
}

#[test]
fn trajectories_reach_the_bath_and_stay_physical() {
    for b0 in [0.0, 0.5, 1.0] {
        let mut cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, -0.5, 1.0, 2.0), b0);
        cfg.t_max = 1200.0;
        cfg.dt = 0.5;
        let target = DMatrix::identity(2, 2) * cfg.channel.m_bar().variance();
        for p in composed_trajectory(&cfg).unwrap() {
            assert!(check_bona_fide(p.state.sigma()).unwrap().valid);
            assert!((0.0..=1.0 + 1e-12).contains(&p.fidelity));
            if p.t >= 100.0 / cfg.channel.gamma() {
                assert!((p.state.sigma().as_matrix() - &target).amax() < 1e-3);
                assert!(p.state.d().as_vector().norm() < 1e-3);
            }
        }
    }
}

#[test]
fn fidelity_bounds_on_ten_thousand_pairs() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strat = (arb_state(), arb_state());
    for _ in 0..10_000 {
        let (a, b) = strat.new_tree(&mut runner).unwrap().current();
        let f = fidelity(&a, &b).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&f), "F = {f}");
    }
}

proptest! {
    #[test]
    fn fidelity_is_symmetric(a in arb_state(), b in arb_state()) {
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn self_fidelity_is_one(a in arb_state()) {
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_preserves_purity(b0 in 0.0f64..1.8, t in 0.0f64..60.0, sym in any::<bool>(),
                                  x in -3.0f64..3.0, p in -3.0f64..3.0) {
        let gauge = if sym { Gauge::Symmetric } else { Gauge::PositionOnly };
        let c = coefficients(&params_from_b0(b0, gauge, unit()).unwrap());
        let s = propagator(&c, t).unwrap();
        let out = evolve_unitary(&make_initial_state(x, -x, p, 0.5).unwrap(), &s).unwrap();
        prop_assert!((out.sigma().determinant() - 1.0).abs() < 1e-10);
        let bf = check_bona_fide(out.sigma()).unwrap();
        prop_assert!(bf.eigenvalues.iter().all(|v| (v - 1.0).abs() < BONA_FIDE_TOL));
    }

    #[test]
    fn channel_semigroup(a in arb_state(), t1 in 0.0f64..40.0, t2 in 0.0f64..40.0,
                         gamma in 0.01f64..2.0, m in 0.0f64..5.0) {
        let ch = ChannelParams::new(gamma, ThermalOccupancy::new(m).unwrap()).unwrap();
        let two_step = diffuse(&diffuse(&a, &ch, t1).unwrap(), &ch, t2).unwrap();
        let one_step = diffuse(&a, &ch, t1 + t2).unwrap();
        prop_assert!((two_step.sigma().as_matrix() - one_step.sigma().as_matrix()).amax() < 1e-10);
        prop_assert!((two_step.d().as_vector() - one_step.d().as_vector()).amax() < 1e-10);
    }

    #[test]
    fn channel_output_is_bona_fide(a in arb_state(), t in 0.0f64..100.0, m in 0.0f64..5.0) {
        let ch = ChannelParams::new(0.1, ThermalOccupancy::new(m).unwrap()).unwrap();
        let out = diffuse(&a, &ch, t).unwrap();
        prop_assert!(check_bona_fide(out.sigma()).unwrap().valid);
    }

    #[test]
    fn channel_never_lowers_fidelity(a in arb_state(), b in arb_state(), t in 0.0f64..50.0) {
        // Data processing: F(L rho1, L rho2) >= F(rho1, rho2) for a CPTP map.
        let ch = ChannelParams::new(0.3, ThermalOccupancy::new(1.0).unwrap()).unwrap();
        let before = fidelity(&a, &b).unwrap();
        let after = fidelity(&diffuse(&a, &ch, t).unwrap(), &diffuse(&b, &ch, t).unwrap()).unwrap();
        prop_assert!(after >= before - 1e-12);
    }
}
