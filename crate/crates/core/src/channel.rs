//! Markovian thermal diffusion and composed system trajectories.
//!
//! The channel drives a one-mode covariance matrix toward `(2 m + 1) I` at
//! rate `Gamma` and damps first moments at rate `Gamma / 2`:
//!
//! ```text
//! sigma(t) = e^{-Gamma t} sigma(0) + (1 - e^{-Gamma t}) (2 m + 1) I
//! d(t)     = e^{-Gamma t / 2} d(0)
//! ```
//!
//! Only mode 1 couples to the bath. A composed trajectory evolves the
//! two-mode state under the oscillator propagator, traces out mode 2, then
//! applies the diffusion envelope at the same `t`.

use nalgebra::DMatrix;

use crate::dynamics::{
    coefficients, evolve_unitary, params_from_b0, propagator, Gauge, NcParams, Units,
};
use crate::error::{invalid, Result};
use crate::exec::{map_indices, Execution};
use crate::gaussian::{
    reduce_to_mode, thermal_state, CovarianceMatrix, FirstMoments, GaussianState,
    ThermalOccupancy,
};
use crate::metrics::fidelity;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    gamma: f64,
    m_bar: ThermalOccupancy,
}

impl ChannelParams {
    pub fn new(gamma: f64, m_bar: ThermalOccupancy) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid(format!(
                "decay rate must be finite and positive, got {gamma}"
            )));
        }
        Ok(Self { gamma, m_bar })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m_bar(&self) -> ThermalOccupancy {
        self.m_bar
    }

    /// Fixed point of the channel.
    pub fn asymptotic_state(&self) -> GaussianState {
        thermal_state(self.m_bar)
    }
}

/// Closed-form action of the channel on a one-mode state.
pub fn diffuse(state: &GaussianState, channel: &ChannelParams, t: f64) -> Result<GaussianState> {
    if state.modes() != 1 {
        return Err(invalid(format!(
            "the thermal channel acts on one mode, state has {}",
            state.modes()
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    diffusion_envelope(state, channel, t, 1.0)
}

/// `prefactor * e^{-Gamma t} sigma + (1 - e^{-Gamma t}) (2 m + 1) I`.
fn diffusion_envelope(
    state: &GaussianState,
    channel: &ChannelParams,
    t: f64,
    prefactor: f64,
) -> Result<GaussianState> {
    let decay = (-channel.gamma * t).exp();
    let bath = (1.0 - decay) * channel.m_bar.variance();
    let sigma = state.sigma().as_matrix() * (prefactor * decay) + DMatrix::identity(2, 2) * bath;
    let d = state.d().as_vector() * (-0.5 * channel.gamma * t).exp();
    GaussianState::new(FirstMoments::from_vector(d)?, CovarianceMatrix::new(sigma)?)
}

/// How the system occupancy enters the composed trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CmScaling {
    /// Initial two-mode covariance `(2 n + 1) I`; unit prefactor on the
    /// decaying term.
    #[default]
    Physical,
    /// Initial two-mode covariance `I`; the decaying term is multiplied by
    /// `n` as printed in the original cooling equation. Requires `n >= 1`.
    Literal,
}

impl CmScaling {
    pub fn as_str(self) -> &'static str {
        match self {
            CmScaling::Physical => "physical",
            CmScaling::Literal => "literal",
        }
    }
}

impl std::str::FromStr for CmScaling {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(CmScaling::Physical),
            "literal" => Ok(CmScaling::Literal),
            other => Err(invalid(format!(
                "unknown cm scaling {other:?}; expected \"physical\" or \"literal\""
            ))),
        }
    }
}

/// Initial centre `(x0, y0, px0, py0)` of the two-mode state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialConditions {
    pub x0: f64,
    pub y0: f64,
    pub px0: f64,
    pub py0: f64,
}

impl InitialConditions {
    pub fn new(x0: f64, y0: f64, px0: f64, py0: f64) -> Self {
        Self { x0, y0, px0, py0 }
    }

    /// First moments in `(Q1, P1, Q2, P2)` order.
    pub fn moments(&self) -> [f64; 4] {
        [self.x0, self.px0, self.y0, self.py0]
    }
}

/// Where the noncommutative parameters come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NcSource {
    Field { b0: f64, gauge: Gauge },
    Explicit { theta: f64, zeta: f64 },
}

impl NcSource {
    pub fn resolve(&self, units: Units) -> Result<NcParams> {
        match *self {
            NcSource::Field { b0, gauge } => params_from_b0(b0, gauge, units),
            NcSource::Explicit { theta, zeta } => NcParams::new(theta, zeta, units),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub initial: InitialConditions,
    pub n_bar: ThermalOccupancy,
    pub channel: ChannelParams,
    pub nc: NcSource,
    pub units: Units,
    pub t_max: f64,
    pub dt: f64,
    pub cm_scaling: CmScaling,
}

impl TrajectoryConfig {
    /// Cooling setup: `Gamma = 0.1`, `n = 4`, `m = 2`, `dt = 0.05`,
    /// `t_max = 100`, position-only gauge, physical scaling.
    pub fn cooling(initial: InitialConditions, b0: f64) -> Self {
        Self {
            initial,
            n_bar: ThermalOccupancy::new(4.0).expect("constant"),
            channel: ChannelParams::new(0.1, ThermalOccupancy::new(2.0).expect("constant"))
                .expect("constant"),
            nc: NcSource::Field {
                b0,
                gauge: Gauge::PositionOnly,
            },
            units: Units::default(),
            t_max: 100.0,
            dt: 0.05,
            cm_scaling: CmScaling::Physical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.initial.moments().iter().all(|v| v.is_finite()) {
            return Err(invalid("initial parameters must be finite"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be finite and positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(invalid(format!(
                "t_max must be finite and positive, got {}",
                self.t_max
            )));
        }
        if self.dt >= self.t_max {
            return Err(invalid(format!(
                "dt = {} must be smaller than t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.cm_scaling == CmScaling::Literal && self.n_bar.get() < 1.0 {
            return Err(invalid(format!(
                "literal cm scaling needs n_bar >= 1 to stay physical, got {}",
                self.n_bar.get()
            )));
        }
        self.units.validate()
    }

    /// `floor(t_max / dt) + 1`.
    pub fn point_count(&self) -> usize {
        // Absorb round-off such as 100 / 0.05 = 1999.9999999999998.
        let ratio = self.t_max / self.dt;
        let steps = (ratio + ratio.abs() * 1e-12).floor();
        steps as usize + 1
    }

    /// `t_k = k dt`, computed by multiplication so the grid is exact in `k`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.point_count()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn initial_state(&self) -> Result<GaussianState> {
        let variance = match self.cm_scaling {
            CmScaling::Physical => self.n_bar.variance(),
            CmScaling::Literal => 1.0,
        };
        GaussianState::new(
            FirstMoments::new(self.initial.moments().to_vec())?,
            CovarianceMatrix::scaled_identity(2, variance)?,
        )
    }
}

/// One sample of the reduced system.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: GaussianState,
    /// Fidelity against the channel's asymptotic thermal state.
    pub fidelity: f64,
    /// Filled by [`crate::metrics::annotate_derivatives`].
    pub dfdt: Option<f64>,
}

pub fn composed_trajectory(config: &TrajectoryConfig) -> Result<Vec<TrajectoryPoint>> {
    composed_trajectory_with(config, Execution::default())
}

/// Every point is closed-form in `t`, so points are evaluated independently
/// and returned in ascending `t`.
pub fn composed_trajectory_with(
    config: &TrajectoryConfig,
    exec: Execution,
) -> Result<Vec<TrajectoryPoint>> {
    config.validate()?;
    let params = config.nc.resolve(config.units)?;
    let coeffs = coefficients(&params);
    let initial = config.initial_state()?;
    let reference = config.channel.asymptotic_state();
    let prefactor = match config.cm_scaling {
        CmScaling::Physical => 1.0,
        CmScaling::Literal => config.n_bar.get(),
    };

    let points = map_indices(config.point_count(), exec, |k| {
        let t = k as f64 * config.dt;
        let s = propagator(&coeffs, t)?;
        let evolved = evolve_unitary(&initial, &s)?;
        let reduced = reduce_to_mode(&evolved, 0)?;
        let state = diffusion_envelope(&reduced, &config.channel, t, prefactor)?;
        let fidelity = fidelity(&state, &reference)?;
        Ok(TrajectoryPoint {
            t,
            state,
            fidelity,
            dfdt: None,
        })
    });
    points.into_iter().collect()
}

/// Channel-only evolution of a one-mode state on the trajectory grid of
/// `config`; no oscillator dynamics.
pub fn diffusion_trajectory(
    state: &GaussianState,
    config: &TrajectoryConfig,
) -> Result<Vec<TrajectoryPoint>> {
    config.validate()?;
    let reference = config.channel.asymptotic_state();
    config
        .times()
        .into_iter()
        .map(|t| {
            let s = diffuse(state, &config.channel, t)?;
            let fidelity = fidelity(&s, &reference)?;
            Ok(TrajectoryPoint {
                t,
                state: s,
                fidelity,
                dfdt: None,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::check_bona_fide;
    use approx::assert_abs_diff_eq;

    fn occ(m: f64) -> ThermalOccupancy {
        ThermalOccupancy::new(m).unwrap()
    }

    fn sample_state() -> GaussianState {
        GaussianState::new(
            FirstMoments::new(vec![1.5, -0.5]).unwrap(),
            CovarianceMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 0.8, 0.8, 2.0])).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn diffuse_at_zero_is_identity() {
        let ch = ChannelParams::new(0.1, occ(2.0)).unwrap();
        let s = sample_state();
        assert_eq!(diffuse(&s, &ch, 0.0).unwrap(), s);
    }

    #[test]
    fn diffuse_reaches_bath() {
        let ch = ChannelParams::new(0.1, occ(2.0)).unwrap();
        let out = diffuse(&sample_state(), &ch, 1e6).unwrap();
        let target = DMatrix::identity(2, 2) * 5.0;
        assert!((out.sigma().as_matrix() - target).amax() < 1e-12);
        assert!(out.d().as_vector().amax() < 1e-12);
    }

    #[test]
    fn diffuse_half_life() {
        let gamma = 0.1;
        let ch = ChannelParams::new(gamma, occ(2.0)).unwrap();
        let s = sample_state();
        let out = diffuse(&s, &ch, std::f64::consts::LN_2 / gamma).unwrap();
        let expect = (s.sigma().as_matrix() + DMatrix::identity(2, 2) * 5.0) * 0.5;
        assert!((out.sigma().as_matrix() - expect).amax() < 1e-14);
        let expect_d = s.d().as_vector() / 2f64.sqrt();
        assert!((out.d().as_vector() - expect_d).amax() < 1e-14);
    }

    #[test]
    fn diffuse_rejects_bad_input() {
        let ch = ChannelParams::new(0.1, occ(2.0)).unwrap();
        assert!(diffuse(&sample_state(), &ch, -1.0).is_err());
        let two = crate::gaussian::make_initial_state(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(diffuse(&two, &ch, 1.0).is_err());
        assert!(ChannelParams::new(0.0, occ(1.0)).is_err());
        assert!(ChannelParams::new(f64::INFINITY, occ(1.0)).is_err());
    }

    #[test]
    fn first_point_is_initial_reduced_state() {
        let cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, 0.0, 1.0, 0.0), 0.0);
        let traj = composed_trajectory(&cfg).unwrap();
        assert_eq!(traj[0].t, 0.0);
        assert_eq!(traj[0].state.d().as_slice(), &[1.0, 1.0]);
        assert_eq!(
            traj[0].state.sigma().as_matrix(),
            &(DMatrix::identity(2, 2) * 9.0)
        );
    }

    #[test]
    fn grid_size_and_spacing() {
        let cfg = TrajectoryConfig::cooling(InitialConditions::default(), 0.0);
        assert_eq!(cfg.point_count(), 2001);
        let t = cfg.times();
        assert_eq!(t.len(), 2001);
        assert_abs_diff_eq!(t[2000], 100.0, epsilon = 1e-12);

        let mut odd = cfg;
        odd.t_max = 1.0;
        odd.dt = 0.3;
        assert_eq!(odd.point_count(), 4);
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = TrajectoryConfig::cooling(InitialConditions::default(), 0.0);
        let mut c = base;
        c.dt = 0.0;
        assert!(composed_trajectory(&c).is_err());
        let mut c = base;
        c.dt = 200.0;
        assert!(composed_trajectory(&c).is_err());
        let mut c = base;
        c.cm_scaling = CmScaling::Literal;
        c.n_bar = occ(0.5);
        assert!(composed_trajectory(&c).is_err());
        let mut c = base;
        c.nc = NcSource::Field {
            b0: 5.0,
            gauge: Gauge::Symmetric,
        };
        assert!(matches!(
            composed_trajectory(&c),
            Err(crate::Error::NoRealGauge { .. })
        ));
    }

    #[test]
    fn literal_scaling_starts_at_n_bar() {
        let mut cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, 0.0, 1.0, 0.0), 1.0);
        cfg.cm_scaling = CmScaling::Literal;
        cfg.t_max = 1.0;
        let traj = composed_trajectory(&cfg).unwrap();
        assert_eq!(
            traj[0].state.sigma().as_matrix(),
            &(DMatrix::identity(2, 2) * 4.0)
        );
        for p in &traj {
            assert!(check_bona_fide(p.state.sigma()).unwrap().valid);
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let mut cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, 0.0, 1.0, 0.0), 1.0);
        cfg.t_max = 20.0;
        let a = composed_trajectory_with(&cfg, Execution::Sequential).unwrap();
        let b = composed_trajectory_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cooling_without_field_lowers_symplectic_eigenvalue() {
        let cfg = TrajectoryConfig::cooling(InitialConditions::new(1.0, 0.0, 1.0, 0.0), 0.0);
        let traj = composed_trajectory(&cfg).unwrap();
        let nus: Vec<f64> = traj
            .iter()
            .map(|p| check_bona_fide(p.state.sigma()).unwrap().eigenvalues[0])
            .collect();
        assert!(nus.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
