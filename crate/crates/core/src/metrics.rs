//! Fidelity between one-mode Gaussian states and the fidelity-decrease
//! witness.

use nalgebra::Matrix2;

use crate::channel::TrajectoryPoint;
use crate::error::{invalid, Error, Result};
use crate::gaussian::GaussianState;

/// `Det(sigma) - 1` products below zero by less than this are round-off
/// from pure states and are clamped.
pub const DELTA_CLAMP: f64 = 1e-9;

/// Default slope threshold of [`nonmarkov_witness`].
pub const DEFAULT_WITNESS_TOL: f64 = 1e-6;

/// Upper slack tolerated on fidelity values.
pub const FIDELITY_SLACK: f64 = 1e-12;

/// Relative tolerance when checking that a time grid is uniform.
const GRID_UNIFORMITY_TOL: f64 = 1e-9;

fn mat2(state: &GaussianState) -> Matrix2<f64> {
    let m = state.sigma().as_matrix();
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Uhlmann fidelity of two one-mode Gaussian states,
///
/// ```text
/// F = 2 exp(-d^T (s1 + s2)^{-1} d) / (sqrt(D + delta) - sqrt(delta))
/// D = det(s1 + s2),  delta = (det s1 - 1)(det s2 - 1),  d = d1 - d2
/// ```
///
/// The exponent carries no factor 1/2: with vacuum covariance `I` the
/// first moments are `sqrt(2)` times the coherent amplitude, and two
/// coherent states must give `exp(-|alpha - beta|^2) = exp(-|d|^2 / 2)`.
///
/// The denominator is evaluated as `D / (sqrt(D + delta) + sqrt(delta))` to
/// avoid cancellation for strongly mixed states.
pub fn fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.modes() != 1 || s2.modes() != 1 {
        return Err(invalid(format!(
            "fidelity is defined here for one-mode states, got {} and {} modes",
            s1.modes(),
            s2.modes()
        )));
    }
    let a = mat2(s1);
    let b = mat2(s2);
    let sum = a + b;
    let big_delta = sum.determinant();
    let mut delta = (a.determinant() - 1.0) * (b.determinant() - 1.0);
    if delta < 0.0 {
        if delta < -DELTA_CLAMP {
            return Err(Error::InvalidState(format!(
                "(det s1 - 1)(det s2 - 1) = {delta:e} is negative"
            )));
        }
        delta = 0.0;
    }
    let inv = sum.try_inverse().ok_or_else(|| {
        Error::NumericalDegeneracy("sum of covariance matrices is singular".into())
    })?;
    let d1 = s1.d().as_slice();
    let d2 = s2.d().as_slice();
    let diff = nalgebra::Vector2::new(d1[0] - d2[0], d1[1] - d2[1]);
    let exponent = -diff.dot(&(inv * diff));
    let prefactor = 2.0 * ((big_delta + delta).sqrt() + delta.sqrt()) / big_delta;
    Ok(prefactor * exponent.exp())
}

/// Fidelity samples against a fixed reference state.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries {
    t: Vec<f64>,
    values: Vec<f64>,
    reference: Option<GaussianState>,
}

impl FidelitySeries {
    /// A bare series with no reference state attached, e.g. for analysing
    /// externally produced data.
    pub fn new(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() != values.len() {
            return Err(invalid(format!(
                "time and fidelity columns differ in length: {} vs {}",
                t.len(),
                values.len()
            )));
        }
        if let Some(bad) = values
            .iter()
            .find(|f| !f.is_finite() || **f < 0.0 || **f > 1.0 + FIDELITY_SLACK)
        {
            return Err(invalid(format!("fidelity value {bad} outside [0, 1]")));
        }
        Ok(Self {
            t,
            values,
            reference: None,
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reference(&self) -> Option<&GaussianState> {
        self.reference.as_ref()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Common spacing, or an error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.t.len() < 2 {
            return Err(invalid("need at least two samples to define a step"));
        }
        let dt = self.t[1] - self.t[0];
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(dt > 0.0) {
            return Err(invalid(format!("time grid must increase, first step is {dt}")));
        }
        for (i, w) in self.t.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > GRID_UNIFORMITY_TOL * dt.max(1.0) {
                return Err(invalid(format!(
                    "time grid is not uniform: step {i} is {step}, expected {dt}"
                )));
            }
        }
        Ok(dt)
    }
}

pub fn fidelity_series(traj: &[TrajectoryPoint], reference: &GaussianState) -> Result<FidelitySeries> {
    if traj.is_empty() {
        return Err(invalid("trajectory is empty"));
    }
    let t = traj.iter().map(|p| p.t).collect();
    let values = traj
        .iter()
        .map(|p| fidelity(&p.state, reference))
        .collect::<Result<Vec<_>>>()?;
    let mut series = FidelitySeries::new(t, values)?;
    series.reference = Some(reference.clone());
    Ok(series)
}

/// Second-order finite differences: central in the interior, one-sided
/// three-point stencils at the ends.
pub fn numerical_derivative(series: &FidelitySeries) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 3 {
        return Err(invalid(format!("need at least 3 samples, got {n}")));
    }
    let dt = series.uniform_step()?;
    let f = series.values();
    let h2 = 2.0 * dt;
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2);
    out.extend(f.windows(3).map(|w| (w[2] - w[0]) / h2));
    out.push((3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2);
    Ok(out)
}

/// Fills `dfdt` on every point from the points' own fidelity column.
pub fn annotate_derivatives(points: &mut [TrajectoryPoint]) -> Result<()> {
    let series = FidelitySeries::new(
        points.iter().map(|p| p.t).collect(),
        points.iter().map(|p| p.fidelity).collect(),
    )?;
    let deriv = numerical_derivative(&series)?;
    for (p, v) in points.iter_mut().zip(deriv) {
        p.dfdt = Some(v);
    }
    Ok(())
}

/// Time windows over which the fidelity decreases.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Maximal, disjoint, ascending `(t_start, t_end)` windows.
    pub intervals: Vec<(f64, f64)>,
    /// Total fidelity lost over all windows.
    pub measure: f64,
    pub tol: f64,
}

impl WitnessReport {
    pub fn is_markovian(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Collects the sample steps whose slope `(F[i+1] - F[i]) / dt` is below
/// `-tol`, merges adjacent ones and sums the fidelity drop over each window.
pub fn nonmarkov_witness(series: &FidelitySeries, tol: f64) -> WitnessReport {
    let t = series.t();
    let f = series.values();
    let mut intervals = Vec::new();
    let mut measure = 0.0;
    let mut open: Option<usize> = None;

    let mut close = |start: usize, end: usize, intervals: &mut Vec<(f64, f64)>| {
        intervals.push((t[start], t[end]));
        measure += f[start] - f[end];
    };

    for i in 0..f.len().saturating_sub(1) {
        let slope = (f[i + 1] - f[i]) / (t[i + 1] - t[i]);
        let falling = slope < -tol;
        match (falling, open) {
            (true, None) => open = Some(i),
            (false, Some(start)) => {
                close(start, i, &mut intervals);
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        close(start, f.len() - 1, &mut intervals);
    }
    WitnessReport {
        intervals,
        measure,
        tol,
    }
}
