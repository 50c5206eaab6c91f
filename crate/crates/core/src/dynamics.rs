//! Noncommutative oscillator mapped onto canonical phase space.
//!
//! The deformed algebra `[q1, q2] = i theta`, `[p1, p2] = i zeta` is
//! realised on canonical `(Q, P)` through
//!
//! ```text
//! q_i = nu Q_i - (theta / 2 nu hbar) eps_ij P_j
//! p_i = mu P_i + (zeta / 2 mu hbar) eps_ij Q_j
//! ```
//!
//! with `theta zeta = 4 hbar^2 mu nu (1 - mu nu)`. The isotropic oscillator
//! then becomes `alpha^2 Q^2 + beta^2 P^2 + gamma eps_ij P_i Q_j`, i.e. an
//! oscillator in an effective perpendicular field `B0`.

use nalgebra::Matrix4;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{CovarianceMatrix, FirstMoments, GaussianState};

/// Residual allowed on the gauge constraint when constructing [`NcParams`].
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Physical constants of the oscillator. All default to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
    pub q: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            m: 1.0,
            omega: 1.0,
            hbar: 1.0,
            q: 1.0,
        }
    }
}

impl Units {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("omega", self.omega),
            ("hbar", self.hbar),
            ("q", self.q),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// How an effective field is split between `theta` and `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// `zeta = 0`; all of `B0` comes from position noncommutativity.
    #[default]
    PositionOnly,
    /// `B0` shared equally between the `theta` and `zeta` terms.
    Symmetric,
}

impl Gauge {
    pub fn as_str(self) -> &'static str {
        match self {
            Gauge::PositionOnly => "position_only",
            Gauge::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position_only" => Ok(Gauge::PositionOnly),
            "symmetric" => Ok(Gauge::Symmetric),
            other => Err(invalid(format!(
                "unknown gauge {other:?}; expected \"position_only\" or \"symmetric\""
            ))),
        }
    }
}

/// Noncommutative parameters together with the map gauge and units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcParams {
    theta: f64,
    zeta: f64,
    mu: f64,
    nu: f64,
    units: Units,
}

impl NcParams {
    /// Picks the symmetric, identity-connected gauge via [`solve_gauge`].
    pub fn new(theta: f64, zeta: f64, units: Units) -> Result<Self> {
        units.validate()?;
        let (mu, nu) = solve_gauge(theta, zeta, units.hbar)?;
        Self::with_gauge(theta, zeta, mu, nu, units)
    }

    /// Explicit gauge parameters; the constraint residual must be below
    /// [`CONSTRAINT_TOL`].
    pub fn with_gauge(theta: f64, zeta: f64, mu: f64, nu: f64, units: Units) -> Result<Self> {
        units.validate()?;
        check_nc_pair(theta, zeta)?;
        if !(mu.is_finite() && mu > 0.0 && nu.is_finite() && nu > 0.0) {
            return Err(invalid(format!(
                "gauge parameters must be finite and positive, got mu = {mu}, nu = {nu}"
            )));
        }
        let residual = constraint_residual(theta, zeta, mu, nu, units.hbar);
        if residual >= CONSTRAINT_TOL {
            return Err(invalid(format!(
                "gauge constraint violated: |theta zeta - 4 hbar^2 mu nu (1 - mu nu)| = {residual:e}"
            )));
        }
        Ok(Self {
            theta,
            zeta,
            mu,
            nu,
            units,
        })
    }

    /// Commutative oscillator with unit constants.
    pub fn commutative() -> Self {
        Self {
            theta: 0.0,
            zeta: 0.0,
            mu: 1.0,
            nu: 1.0,
            units: Units::default(),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn units(&self) -> Units {
        self.units
    }

    pub fn constraint_residual(&self) -> f64 {
        constraint_residual(self.theta, self.zeta, self.mu, self.nu, self.units.hbar)
    }
}

fn check_nc_pair(theta: f64, zeta: f64) -> Result<()> {
    if !(theta.is_finite() && theta >= 0.0 && zeta.is_finite() && zeta >= 0.0) {
        return Err(invalid(format!(
            "theta and zeta must be finite and nonnegative, got theta = {theta}, zeta = {zeta}"
        )));
    }
    Ok(())
}

fn constraint_residual(theta: f64, zeta: f64, mu: f64, nu: f64, hbar: f64) -> f64 {
    let p = mu * nu;
    (theta * zeta - 4.0 * hbar * hbar * p * (1.0 - p)).abs()
}

/// Symmetric gauge `mu = nu` solving `theta zeta = 4 hbar^2 mu nu (1 - mu nu)`.
///
/// Takes the `+` root, `mu nu = [1 + sqrt(1 - theta zeta / hbar^2)] / 2`, so
/// that the commutative limit gives `mu = nu = 1`.
pub fn solve_gauge(theta: f64, zeta: f64, hbar: f64) -> Result<(f64, f64)> {
    check_nc_pair(theta, zeta)?;
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(invalid(format!("hbar must be finite and positive, got {hbar}")));
    }
    let k = theta * zeta / (hbar * hbar);
    if k > 1.0 {
        return Err(Error::NoRealGauge { theta, zeta, hbar });
    }
    let product = 0.5 * (1.0 + (1.0 - k).sqrt());
    let g = product.sqrt();
    Ok((g, g))
}

/// Constants of the mapped Hamiltonian and its motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoeffs {
    pub alpha2: f64,
    pub beta2: f64,
    /// In-plane rotation rate.
    pub gamma: f64,
    pub xi: f64,
    /// Oscillation frequency `omega sqrt((2 mu nu - 1)^2 + xi^2)`.
    pub big_omega: f64,
    /// Effective magnetic field.
    pub b0: f64,
}

impl DerivedCoeffs {
    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.beta2.sqrt()
    }

    /// `|2 alpha beta - Omega|`; zero up to round-off on the constraint surface.
    pub fn frequency_identity_residual(&self) -> f64 {
        (2.0 * (self.alpha2 * self.beta2).sqrt() - self.big_omega).abs()
    }
}

pub fn coefficients(params: &NcParams) -> DerivedCoeffs {
    let NcParams {
        theta,
        zeta,
        mu,
        nu,
        units,
    } = *params;
    let Units { m, omega, hbar, q } = units;
    let w2 = omega * omega;
    let h2 = hbar * hbar;

    let alpha2 = nu * nu * m * w2 / 2.0 + zeta * zeta / (8.0 * m * mu * mu * h2);
    let beta2 = mu * mu / (2.0 * m) + m * w2 * theta * theta / (8.0 * nu * nu * h2);
    let gamma = theta * m * w2 / (2.0 * hbar) + zeta / (2.0 * m * hbar);
    let xi = (m * omega * theta + zeta / (m * omega)) / (2.0 * hbar);
    let shift = 2.0 * mu * nu - 1.0;
    let big_omega = omega * (shift * shift + xi * xi).sqrt();
    let b0 = m * m * w2 * theta / (q * hbar) + zeta / (q * hbar);

    DerivedCoeffs {
        alpha2,
        beta2,
        gamma,
        xi,
        big_omega,
        b0,
    }
}

/// Inverts the effective-field relation for the requested gauge.
pub fn params_from_b0(b0: f64, gauge: Gauge, units: Units) -> Result<NcParams> {
    units.validate()?;
    if !(b0.is_finite() && b0 >= 0.0) {
        return Err(invalid(format!("B0 must be finite and nonnegative, got {b0}")));
    }
    let Units { m, omega, hbar, q } = units;
    let (theta, zeta) = match gauge {
        Gauge::PositionOnly => (b0 * q * hbar / (m * m * omega * omega), 0.0),
        Gauge::Symmetric => (
            0.5 * b0 * q * hbar / (m * m * omega * omega),
            0.5 * b0 * q * hbar,
        ),
    };
    NcParams::new(theta, zeta, units)
}

/// Symplectic map of `(Q1, P1, Q2, P2)` from time 0 to time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    matrix: Matrix4<f64>,
    t: f64,
}

impl Propagator {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
            t: 0.0,
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `max |S^T J S - J|`.
    pub fn symplectic_residual(&self) -> f64 {
        let j = symplectic_form4();
        (self.matrix.transpose() * j * self.matrix - j).amax()
    }
}

fn symplectic_form4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    j[(2, 3)] = 1.0;
    j[(3, 2)] = -1.0;
    j
}

/// Closed-form solution of the mapped equations of motion.
///
/// With `c = cos(Omega t)`, `s = sin(Omega t)`, `r = beta / alpha` and a
/// plane rotation by `gamma t`, the map factorises as
/// `S = R(gamma t) (x) M(Omega t)` where `M = [[c, r s], [-s / r, c]]` acts
/// within each `(Q_i, P_i)` pair and `R = [[cos, sin], [-sin, cos]]` mixes
/// the two modes.
pub fn propagator(coeffs: &DerivedCoeffs, t: f64) -> Result<Propagator> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    let alpha = coeffs.alpha();
    let beta = coeffs.beta();
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::DegenerateCoefficients(format!(
            "alpha = {alpha}, beta = {beta}; both must be positive"
        )));
    }
    let r = beta / alpha;
    let (s, c) = (coeffs.big_omega * t).sin_cos();
    let (sg, cg) = (coeffs.gamma * t).sin_cos();

    let inner = [[c, r * s], [-s / r, c]];
    let outer = [[cg, sg], [-sg, cg]];
    let matrix = Matrix4::from_fn(|i, j| outer[i / 2][j / 2] * inner[i % 2][j % 2]);
    Ok(Propagator { matrix, t })
}

/// Moment transport `d -> S d`, `sigma -> S sigma S^T`.
pub fn evolve_unitary(state: &GaussianState, s: &Propagator) -> Result<GaussianState> {
    if state.modes() != 2 {
        return Err(invalid(format!(
            "propagator acts on two modes, state has {}",
            state.modes()
        )));
    }
    let sm = s.matrix();
    let d = sm * nalgebra::Vector4::from_column_slice(state.d().as_slice());
    let sig = nalgebra::Matrix4::from_column_slice(state.sigma().as_matrix().as_slice());
    let out = sm * sig * sm.transpose();
    GaussianState::new(
        FirstMoments::new(d.as_slice().to_vec())?,
        CovarianceMatrix::symmetrized(nalgebra::DMatrix::from_column_slice(4, 4, out.as_slice()))?,
    )
}
