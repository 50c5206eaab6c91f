//! Gaussian states as first moments plus covariance matrix.
//!
//! Units and conventions: `hbar = 1`, the vacuum covariance matrix is the
//! identity and pure states have `det(sigma) = 1`. The Wigner function of a
//! state with `n` modes is
//!
//! ```text
//! W(R) = exp[-(R - d)^T sigma^{-1} (R - d)] / (pi^n sqrt(det sigma))
//! ```
//!
//! so that `sigma_AB = <AB + BA> - 2<A><B>` and the per-quadrature variance
//! of `W` is `sigma_ii / 2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Entrywise symmetry tolerance for covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic eigenvalues may fall this far below one and still count as
/// physical; repeated propagator products accumulate round-off.
pub const BONA_FIDE_TOL: f64 = 1e-9;

/// Largest supported mode count.
pub const MAX_MODES: usize = 2;

/// First moments ordered `(Q1, P1, ..., Qn, Pn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstMoments(DVector<f64>);

impl FirstMoments {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(entries))
    }

    pub fn from_vector(entries: DVector<f64>) -> Result<Self> {
        if entries.is_empty() || !entries.len().is_multiple_of(2) {
            return Err(invalid(format!(
                "first moments need an even, nonzero length, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("first moments must be finite"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(modes: usize) -> Self {
        Self(DVector::zeros(2 * modes))
    }

    pub fn modes(&self) -> usize {
        self.0.len() / 2
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Symmetric `2n x 2n` matrix of symmetrised second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Validates shape, finiteness and symmetry. Physicality is checked
    /// separately by [`check_bona_fide`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(invalid(format!(
                "covariance matrix must be square with even dimension, got {r}x{c}"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("covariance matrix must be finite"));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let gap = (entries[(i, j)] - entries[(j, i)]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(invalid(format!(
                        "covariance matrix not symmetric: |s[{i},{j}] - s[{j},{i}]| = {gap:e}"
                    )));
                }
            }
        }
        Ok(Self(entries))
    }

    /// `(m + m^T) / 2` without the symmetry check; for products such as
    /// `S sigma S^T` that are symmetric up to round-off.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Result<Self> {
        let sym = (&m + m.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn identity(modes: usize) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn scaled_identity(modes: usize, scale: f64) -> Result<Self> {
        Self::new(DMatrix::identity(2 * modes, 2 * modes) * scale)
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }
}

/// Mean photon number of a thermal mode.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThermalOccupancy(f64);

impl ThermalOccupancy {
    pub fn new(mean_photons: f64) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(invalid(format!(
                "thermal occupancy must be finite and nonnegative, got {mean_photons}"
            )));
        }
        Ok(Self(mean_photons))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Isotropic variance `2 m + 1` of the thermal covariance matrix.
    pub fn variance(self) -> f64 {
        2.0 * self.0 + 1.0
    }
}

/// Block-diagonal symplectic form with blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A bona-fide Gaussian state of one or two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    d: FirstMoments,
    sigma: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(d: FirstMoments, sigma: CovarianceMatrix) -> Result<Self> {
        if d.modes() != sigma.modes() {
            return Err(invalid(format!(
                "first moments describe {} modes but covariance matrix {}",
                d.modes(),
                sigma.modes()
            )));
        }
        if d.modes() > MAX_MODES {
            return Err(invalid(format!(
                "at most {MAX_MODES} modes are supported, got {}",
                d.modes()
            )));
        }
        let report = check_bona_fide(&sigma)?;
        if !report.valid {
            return Err(Error::InvalidState(format!(
                "covariance matrix violates the uncertainty principle; symplectic eigenvalues {:?}",
                report.eigenvalues
            )));
        }
        Ok(Self { d, sigma })
    }

    pub fn modes(&self) -> usize {
        self.d.modes()
    }

    pub fn d(&self) -> &FirstMoments {
        &self.d
    }

    pub fn sigma(&self) -> &CovarianceMatrix {
        &self.sigma
    }

    /// Precomputes the inverse and normalisation for repeated evaluation.
    pub fn wigner(&self) -> Result<WignerFunction> {
        WignerFunction::new(self)
    }
}

/// Two-mode product Gaussian centred at `(x0, px0, y0, py0)` with unit
/// covariance.
pub fn make_initial_state(x0: f64, y0: f64, px0: f64, py0: f64) -> Result<GaussianState> {
    if ![x0, y0, px0, py0].iter().all(|v| v.is_finite()) {
        return Err(invalid("initial parameters must be finite"));
    }
    GaussianState::new(
        FirstMoments::new(vec![x0, px0, y0, py0])?,
        CovarianceMatrix::identity(2),
    )
}

/// Centred one-mode thermal state, `sigma = (2 m + 1) I`.
pub fn thermal_state(occupancy: ThermalOccupancy) -> GaussianState {
    GaussianState {
        d: FirstMoments::zeros(1),
        sigma: CovarianceMatrix(DMatrix::identity(2, 2) * occupancy.variance()),
    }
}

/// Partial trace onto one mode: pick its rows and columns.
pub fn reduce_to_mode(state: &GaussianState, mode: usize) -> Result<GaussianState> {
    if mode >= state.modes() {
        return Err(invalid(format!(
            "mode {mode} out of range for a {}-mode state",
            state.modes()
        )));
    }
    let k = 2 * mode;
    let d = state.d.as_vector().rows(k, 2).into_owned();
    let sigma = state.sigma.as_matrix().view((k, k), (2, 2)).into_owned();
    // A principal block of a bona-fide matrix is bona fide.
    Ok(GaussianState {
        d: FirstMoments(d),
        sigma: CovarianceMatrix(sigma),
    })
}

/// Symplectic spectrum and the resulting validity verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct BonaFide {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub valid: bool,
}

/// Symplectic eigenvalues (positive spectrum of `i Omega sigma`) and whether
/// `sigma + i Omega >= 0` holds.
///
/// One mode: `sqrt(det sigma)`. For two positive-definite modes the spectrum
/// is read off as the singular
/// values of the antisymmetric `sigma^{1/2} Omega sigma^{1/2}` (each appears
/// twice), which stays accurate near degenerate pure-state spectra. Indefinite
/// matrices are never bona fide; their values come from the determinant-based
/// invariants and only serve as a diagnostic.
pub fn check_bona_fide(sigma: &CovarianceMatrix) -> Result<BonaFide> {
    let m = sigma.as_matrix();
    let modes = sigma.modes();
    if modes > MAX_MODES {
        return Err(invalid(format!(
            "symplectic spectrum only implemented for up to {MAX_MODES} modes, got {modes}"
        )));
    }
    let eig = m.clone().symmetric_eigen();
    let positive_definite = eig.eigenvalues.iter().all(|&v| v > 0.0);
    let mut eigenvalues = if positive_definite && modes == 1 {
        vec![m.determinant().sqrt()]
    } else if positive_definite {
        let roots = eig.eigenvalues.map(f64::sqrt);
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
        let a = &root * symplectic_form(modes) * &root;
        let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        sv.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    } else {
        invariant_spectrum(m)
    };
    eigenvalues.sort_by(f64::total_cmp);
    let valid = positive_definite && eigenvalues.iter().all(|&v| v >= 1.0 - BONA_FIDE_TOL);
    Ok(BonaFide { eigenvalues, valid })
}

fn invariant_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 2 {
        return vec![m.determinant().max(0.0).sqrt()];
    }
    let a = m.view((0, 0), (2, 2)).determinant();
    let b = m.view((2, 2), (2, 2)).determinant();
    let c = m.view((0, 2), (2, 2)).determinant();
    let seralian = a + b + 2.0 * c;
    let disc = (seralian * seralian - 4.0 * m.determinant()).max(0.0).sqrt();
    vec![
        ((seralian - disc) / 2.0).max(0.0).sqrt(),
        ((seralian + disc) / 2.0).max(0.0).sqrt(),
    ]
}

/// Wigner function of `state` at the phase-space point `r`.
pub fn wigner_eval(state: &GaussianState, r: &[f64]) -> Result<f64> {
    state.wigner()?.eval(r)
}

/// Gaussian Wigner function with the inverse covariance cached.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    center: Vec<f64>,
    inverse: DMatrix<f64>,
    peak: f64,
}

impl WignerFunction {
    fn new(state: &GaussianState) -> Result<Self> {
        let sigma = state.sigma.as_matrix();
        let det = sigma.determinant();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(det > f64::EPSILON) {
            return Err(Error::NumericalDegeneracy(format!(
                "covariance determinant {det:e} is not positive"
            )));
        }
        let inverse = sigma.clone().try_inverse().ok_or_else(|| {
            Error::NumericalDegeneracy("covariance matrix is not invertible".into())
        })?;
        let n = state.modes() as i32;
        Ok(Self {
            center: state.d.as_slice().to_vec(),
            inverse,
            peak: 1.0 / (PI.powi(n) * det.sqrt()),
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Value at the centre, the global maximum.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn eval(&self, r: &[f64]) -> Result<f64> {
        if r.len() != self.dim() {
            return Err(invalid(format!(
                "phase-space point has dimension {}, expected {}",
                r.len(),
                self.dim()
            )));
        }
        Ok(self.eval_unchecked(r))
    }

    #[allow(clippy::needless_range_loop)]
    pub(crate) fn eval_unchecked(&self, r: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for i in 0..n {
            let di = r[i] - self.center[i];
            let mut row = 0.0;
            for j in 0..n {
                row += self.inverse[(i, j)] * (r[j] - self.center[j]);
            }
            quad += di * row;
        }
        self.peak * (-quad).exp()
    }
}
