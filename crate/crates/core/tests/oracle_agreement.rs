use nalgebra::DMatrix;
use ncphase_core::oracle::{
    fock_fidelity, grid_marginal, grid_moments, grid_norm, overlap, GridSpec, DEFAULT_CUTOFF,
};
use ncphase_core::*;

fn displaced_thermal(n: f64, d: [f64; 2]) -> GaussianState {
    GaussianState::new(
        FirstMoments::new(d.to_vec()).unwrap(),
        CovarianceMatrix::scaled_identity(1, 2.0 * n + 1.0).unwrap(),
    )
    .unwrap()
}

fn correlated_state() -> GaussianState {
    // S I S^T at B0 = 1, t = 0.7: genuinely correlated across the two modes.
    let c = coefficients(&params_from_b0(1.0, Gauge::PositionOnly, Units::default()).unwrap());
    let s = propagator(&c, 0.7).unwrap();
    evolve_unitary(&make_initial_state(0.4, -0.3, 0.2, 0.6).unwrap(), &s).unwrap()
}

#[test]
fn grid_normalisation() {
    let narrow = GridSpec::uniform(2, -10.0, 10.0, 257).unwrap();
    let wide = GridSpec::uniform(2, -16.0, 16.0, 257).unwrap();
    for nu in [1.0, 2.0, 3.5, 5.0] {
        let s = displaced_thermal((nu - 1.0) / 2.0, [0.0, 0.0]);
        assert!((grid_norm(&s, &narrow).unwrap() - 1.0).abs() < 1e-6, "nu = {nu}");
    }
    for nu in [5.0, 7.5, 10.0] {
        let s = displaced_thermal((nu - 1.0) / 2.0, [0.0, 0.0]);
        assert!((grid_norm(&s, &wide).unwrap() - 1.0).abs() < 1e-6, "nu = {nu}");
    }
    let two = GridSpec::default_for(2);
    assert!((grid_norm(&correlated_state(), &two).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn grid_moments_recover_the_two_mode_state() {
    let state = correlated_state();
    let (d, sigma) = grid_moments(&state, &GridSpec::default_for(2)).unwrap();
    assert!((d.as_vector() - state.d().as_vector()).amax() < 1e-6);
    assert!((sigma.as_matrix() - state.sigma().as_matrix()).amax() < 1e-6);
}

#[test]
fn partial_trace_matches_marginals() {
    let state = correlated_state();
    let reduced = reduce_to_mode(&state, 0).unwrap();
    let grid = GridSpec::default_for(2);
    let mut means = [0.0; 2];
    for (axis, mean) in means.iter_mut().enumerate() {
        let m = grid_marginal(&state, axis, &grid).unwrap();
        *mean = m.integrate(|x| x);
        let var = 2.0 * (m.integrate(|x| x * x) - *mean * *mean);
        assert!((var - reduced.sigma().as_matrix()[(axis, axis)]).abs() < 1e-6);
    }
    assert!((means[0] - reduced.d().as_slice()[0]).abs() < 1e-6);
    assert!((means[1] - reduced.d().as_slice()[1]).abs() < 1e-6);

    // The reduced state integrated on its own grid agrees with the same numbers.
    let (d1, s1) = grid_moments(&reduced, &GridSpec::default_for(1)).unwrap();
    assert!((d1.as_vector() - reduced.d().as_vector()).amax() < 1e-6);
    assert!((s1.as_matrix() - reduced.sigma().as_matrix()).amax() < 1e-6);
}

#[test]
fn formula_matches_fock_oracle() {
    let occupancies = [0.0, 0.5, 1.0, 2.0, 4.0];
    let shifts = [[0.0, 0.0], [1.0, 1.0], [-0.5, 1.5], [2.0, -1.0], [2.1, 2.1], [0.0, -3.0]];
    for &n1 in &occupancies {
        for &n2 in &occupancies {
            for d in shifts {
                let a = displaced_thermal(n1, d);
                let b = displaced_thermal(n2, [0.0, 0.0]);
                let formula = fidelity(&a, &b).unwrap();
                let oracle = fock_fidelity(&a, &b, DEFAULT_CUTOFF).unwrap();
                assert!(
                    (formula - oracle).abs() < 1e-6,
                    "n1 = {n1}, n2 = {n2}, d = {d:?}: {formula} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn overlap_with_a_pure_state_is_its_fidelity() {
    // For a pure rho1, F = Tr[rho1 rho2], which the phase-space overlap computes directly.
    let grid = GridSpec::uniform(2, -14.0, 14.0, 257).unwrap();
    let vacuum = displaced_thermal(0.0, [0.5, -1.0]);
    let squeezed = GaussianState::new(
        FirstMoments::new(vec![0.3, 0.2]).unwrap(),
        CovarianceMatrix::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0])).unwrap(),
    )
    .unwrap();
    for other in [displaced_thermal(2.0, [0.0, 0.0]), displaced_thermal(0.5, [1.0, 1.0])] {
        for pure in [&vacuum, &squeezed] {
            let ov = overlap(pure, &other, &grid).unwrap();
            let f = fidelity(pure, &other).unwrap();
            assert!((ov - f).abs() < 1e-6, "{ov} vs {f}");
        }
    }
}

#[test]
fn composed_trajectory_states_pass_the_grid_oracle() {
    let cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, 1.0, 0.0, 0.0), 1.0);
    let traj = composed_trajectory(&cfg).unwrap();
    // n_bar = 4 starts at sigma = 9 I; widen the box so the tails stay inside.
    let grid = GridSpec::uniform(2, -16.0, 16.0, 257).unwrap();
    for p in traj.iter().step_by(250) {
        let (d, s) = grid_moments(&p.state, &grid).unwrap();
        assert!((d.as_vector() - p.state.d().as_vector()).amax() < 1e-6);
        assert!((s.as_matrix() - p.state.sigma().as_matrix()).amax() < 1e-6);
    }
}
