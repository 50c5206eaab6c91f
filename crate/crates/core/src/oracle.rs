//! Brute-force cross-checks for the closed-form Gaussian machinery.
//!
//! Two independent routes:
//!
//! - phase-space quadrature of the Wigner function on a uniform grid
//!   (trapezoidal rule), giving moments, marginals and overlaps;
//! - number-basis density matrices of displaced thermal states, giving the
//!   Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2` by
//!   eigendecomposition.
//!
//! Grid sums are accumulated per row of the leading axis and reduced in
//! row order, so results do not depend on thread scheduling.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indices, Execution};
use crate::gaussian::{CovarianceMatrix, FirstMoments, GaussianState};

/// Normalisation drift beyond which a grid is declared under-resolved.
pub const GRID_NORM_TOL: f64 = 1e-4;

/// Fewest points allowed per axis.
pub const MIN_POINTS_PER_AXIS: usize = 64;

/// Default number-basis cutoff.
pub const DEFAULT_CUTOFF: usize = 80;

/// Largest population allowed outside the truncated number basis.
pub const TRUNCATION_LIMIT: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.points {
            0.5 * self.step()
        } else {
            self.step()
        }
    }
}

/// Tensor-product grid, one axis per phase-space coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("grid needs at least one axis"));
        }
        for (k, a) in axes.iter().enumerate() {
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(invalid(format!(
                    "axis {k}: bounds ({}, {}) must be finite with min < max",
                    a.min, a.max
                )));
            }
            if a.points < MIN_POINTS_PER_AXIS {
                return Err(invalid(format!(
                    "axis {k}: {} points, need at least {MIN_POINTS_PER_AXIS}",
                    a.points
                )));
            }
        }
        Ok(Self { axes })
    }

    /// Same bounds and resolution on every axis.
    pub fn uniform(dim: usize, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::new(vec![Axis { min, max, points }; dim])
    }

    /// `[-10, 10]` per axis; 257 points for one mode, 65 for two.
    pub fn default_for(modes: usize) -> Self {
        let points = if modes <= 1 { 257 } else { 65 };
        Self::uniform(2 * modes, -10.0, 10.0, points).expect("valid default grid")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Same bounds with `2 (points - 1) + 1` points per axis, so the old
    /// nodes are a subset of the new.
    pub fn refined(&self) -> Self {
        Self {
            axes: self
                .axes
                .iter()
                .map(|a| Axis {
                    points: 2 * (a.points - 1) + 1,
                    ..*a
                })
                .collect(),
        }
    }
}

/// Trapezoidal integration of a vector-valued integrand. `f(point, weight,
/// acc)` must add `weight * integrand(point)` into `acc`.
fn integrate<F>(grid: &GridSpec, width: usize, exec: Execution, f: F) -> Vec<f64>
where
    F: Fn(&[f64], f64, &mut [f64]) + Sync + Send,
{
    let axes = grid.axes();
    let lead = axes[0];
    let rest = &axes[1..];
    let rows = map_indices(lead.points, exec, |i0| {
        let mut acc = vec![0.0; width];
        let mut idx = vec![0usize; rest.len()];
        let mut point = vec![0.0; axes.len()];
        point[0] = lead.node(i0);
        let w0 = lead.weight(i0);
        loop {
            let mut w = w0;
            for (k, (a, &i)) in rest.iter().zip(&idx).enumerate() {
                point[k + 1] = a.node(i);
                w *= a.weight(i);
            }
            f(&point, w, &mut acc);
            // odometer over the remaining axes
            let mut k = rest.len();
            loop {
                if k == 0 {
                    return acc;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < rest[k].points {
                    break;
                }
                idx[k] = 0;
            }
        }
    });
    let mut total = vec![0.0; width];
    for row in rows {
        for (t, r) in total.iter_mut().zip(row) {
            *t += r;
        }
    }
    total
}

fn check_dim(state: &GaussianState, grid: &GridSpec) -> Result<()> {
    if grid.dim() != 2 * state.modes() {
        return Err(invalid(format!(
            "grid has {} axes but the state lives in {} dimensions",
            grid.dim(),
            2 * state.modes()
        )));
    }
    Ok(())
}

fn check_norm(norm: f64) -> Result<()> {
    if (norm - 1.0).abs() > GRID_NORM_TOL || !norm.is_finite() {
        return Err(Error::GridResolution {
            norm,
            tolerance: GRID_NORM_TOL,
        });
    }
    Ok(())
}

/// Integral of the Wigner function over the grid.
pub fn grid_norm(state: &GaussianState, grid: &GridSpec) -> Result<f64> {
    check_dim(state, grid)?;
    let w = state.wigner()?;
    let total = integrate(grid, 1, Execution::default(), |r, wt, acc| {
        acc[0] += wt * w.eval_unchecked(r)
    });
    Ok(total[0])
}

pub fn grid_moments(state: &GaussianState, grid: &GridSpec) -> Result<(FirstMoments, CovarianceMatrix)> {
    grid_moments_with(state, grid, Execution::default())
}

/// `<R_k> = int W R_k` and `sigma_kl = 2 (int W R_k R_l - <R_k><R_l>)`.
pub fn grid_moments_with(
    state: &GaussianState,
    grid: &GridSpec,
    exec: Execution,
) -> Result<(FirstMoments, CovarianceMatrix)> {
    check_dim(state, grid)?;
    let n = grid.dim();
    let w = state.wigner()?;
    // layout: [norm, first moments (n), upper-triangular second moments]
    let width = 1 + n + n * (n + 1) / 2;
    let total = integrate(grid, width, exec, |r, wt, acc| {
        let v = wt * w.eval_unchecked(r);
        acc[0] += v;
        let mut slot = 1 + n;
        for i in 0..n {
            acc[1 + i] += v * r[i];
            for j in i..n {
                acc[slot] += v * r[i] * r[j];
                slot += 1;
            }
        }
    });
    check_norm(total[0])?;
    let first: Vec<f64> = total[1..=n].to_vec();
    let mut sigma = DMatrix::zeros(n, n);
    let mut slot = 1 + n;
    for i in 0..n {
        for j in i..n {
            let s = 2.0 * (total[slot] - first[i] * first[j]);
            sigma[(i, j)] = s;
            sigma[(j, i)] = s;
            slot += 1;
        }
    }
    Ok((FirstMoments::new(first)?, CovarianceMatrix::new(sigma)?))
}

/// Marginal density along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl Marginal {
    /// Trapezoidal integral of `density * g(x)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let h = self.x[1] - self.x[0];
        let n = self.x.len();
        self.x
            .iter()
            .zip(&self.density)
            .enumerate()
            .map(|(i, (&x, &p))| {
                let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
                w * p * g(x)
            })
            .sum()
    }
}

/// Integrates out every axis except `axis`.
pub fn grid_marginal(state: &GaussianState, axis: usize, grid: &GridSpec) -> Result<Marginal> {
    check_dim(state, grid)?;
    if axis >= grid.dim() {
        return Err(invalid(format!(
            "axis {axis} out of range for a {}-dimensional grid",
            grid.dim()
        )));
    }
    let w = state.wigner()?;
    let keep = grid.axes()[axis];
    let others: Vec<Axis> = grid
        .axes()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != axis)
        .map(|(_, a)| *a)
        .collect();
    let density = map_indices(keep.points, Execution::default(), |i| {
        let x = keep.node(i);
        let sub = GridSpec {
            axes: others.clone(),
        };
        let dim = grid.dim();
        integrate(&sub, 1, Execution::Sequential, |r, wt, acc| {
            let mut full = [0.0; 2 * crate::gaussian::MAX_MODES];
            let mut src = r.iter();
            for (k, slot) in full[..dim].iter_mut().enumerate() {
                *slot = if k == axis { x } else { *src.next().unwrap() };
            }
            acc[0] += wt * w.eval_unchecked(&full[..dim]);
        })[0]
    });
    let marginal = Marginal {
        x: (0..keep.points).map(|i| keep.node(i)).collect(),
        density,
    };
    check_norm(marginal.integrate(|_| 1.0))?;
    Ok(marginal)
}

/// `Tr[rho1 rho2] = (2 pi)^n int W1 W2`.
pub fn overlap(s1: &GaussianState, s2: &GaussianState, grid: &GridSpec) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(invalid(format!(
            "overlap needs equal mode counts, got {} and {}",
            s1.modes(),
            s2.modes()
        )));
    }
    check_dim(s1, grid)?;
    let w1 = s1.wigner()?;
    let w2 = s2.wigner()?;
    let total = integrate(grid, 3, Execution::default(), |r, wt, acc| {
        let a = w1.eval_unchecked(r);
        let b = w2.eval_unchecked(r);
        acc[0] += wt * a;
        acc[1] += wt * b;
        acc[2] += wt * a * b;
    });
    check_norm(total[0])?;
    check_norm(total[1])?;
    Ok((2.0 * PI).powi(s1.modes() as i32) * total[2])
}

/// Truncated number-basis density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub cutoff: usize,
    pub matrix: DMatrix<Complex64>,
    /// Population lost to the truncation, `1 - Tr rho`.
    pub trace_deficit: f64,
}

impl FockDensity {
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(n: usize) -> Self {
        let mut v = Vec::with_capacity(n + 1);
        v.push(0.0);
        for k in 1..=n {
            v.push(v[k - 1] + (k as f64).ln());
        }
        Self(v)
    }
}

/// `table[k][j] = L_j^{(k)}(x)` for `j + k < n`.
fn laguerre_table(n: usize, x: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let len = n - k;
            let kf = k as f64;
            let mut row = Vec::with_capacity(len);
            row.push(1.0);
            if len > 1 {
                row.push(1.0 + kf - x);
            }
            for j in 1..len.saturating_sub(1) {
                let jf = j as f64;
                let next = ((2.0 * jf + 1.0 + kf - x) * row[j] - (jf + kf) * row[j - 1]) / (jf + 1.0);
                row.push(next);
            }
            row
        })
        .collect()
}

/// Matrix elements `<m| D(alpha) |n>` for `m, n < cutoff`.
pub fn displacement_matrix(alpha: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return DMatrix::identity(cutoff, cutoff);
    }
    let lf = LogFactorials::new(cutoff);
    let lag = laguerre_table(cutoff, x);
    let ln_abs = x.sqrt().ln();
    let phase = alpha.arg();
    DMatrix::from_fn(cutoff, cutoff, |m, n| {
        let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
        let k = hi - lo;
        let log_mag = 0.5 * (lf.0[lo] - lf.0[hi]) - 0.5 * x + k as f64 * ln_abs;
        let value = log_mag.exp() * lag[k][lo];
        let angle = if m >= n {
            k as f64 * phase
        } else {
            // (-alpha*)^k
            k as f64 * (PI - phase)
        };
        Complex64::from_polar(value, angle)
    })
}

fn isotropic_occupancy(state: &GaussianState) -> Result<f64> {
    if state.modes() != 1 {
        return Err(Error::UnsupportedState(format!(
            "number-basis oracle handles one mode, got {}",
            state.modes()
        )));
    }
    let s = state.sigma().as_matrix();
    if (s[(0, 0)] - s[(1, 1)]).abs() > 1e-9 || s[(0, 1)].abs() > 1e-9 {
        return Err(Error::UnsupportedState(
            "only displaced thermal states (isotropic covariance) are supported".into(),
        ));
    }
    Ok(((s[(0, 0)] - 1.0) / 2.0).max(0.0))
}

/// `D(alpha) rho_th D(alpha)^dagger` with `alpha = (<Q> + i <P>) / sqrt 2`.
pub fn fock_density(state: &GaussianState, cutoff: usize) -> Result<FockDensity> {
    if cutoff == 0 {
        return Err(invalid("cutoff must be at least 1"));
    }
    let n_bar = isotropic_occupancy(state)?;
    let d = state.d().as_slice();
    let alpha = Complex64::new(d[0], d[1]) / SQRT_2;
    let ratio = n_bar / (n_bar + 1.0);
    let populations = DVector::from_fn(cutoff, |k, _| {
        Complex64::new(ratio.powi(k as i32) / (n_bar + 1.0), 0.0)
    });
    let disp = displacement_matrix(alpha, cutoff);
    let matrix = &disp * DMatrix::from_diagonal(&populations) * disp.adjoint();
    let trace_deficit = (1.0 - matrix.trace().re).max(0.0);
    if trace_deficit > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            deficit: trace_deficit,
            limit: TRUNCATION_LIMIT,
            cutoff,
        });
    }
    Ok(FockDensity {
        cutoff,
        matrix,
        trace_deficit,
    })
}

fn hermitian_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Squared Uhlmann fidelity of two displaced thermal states.
pub fn fock_fidelity(s1: &GaussianState, s2: &GaussianState, cutoff: usize) -> Result<f64> {
    let r1 = fock_density(s1, cutoff)?;
    let r2 = fock_density(s2, cutoff)?;
    let root = hermitian_sqrt(&r1.matrix);
    let inner = &root * &r2.matrix * &root;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let trace_root: f64 = inner
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok(trace_root * trace_root)
}
