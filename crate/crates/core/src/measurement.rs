//! Measurement operators, outcome statistics, density matrices and the noisy
//! linear measurement channel that feeds the state estimator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for completeness, density-matrix and covariance checks.
pub const MEAS_TOL: f64 = 1e-10;

/// A measurement operator `M_m` with its outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    pub matrix: DMatrix<Complex64>,
    pub label: String,
}

impl MeasurementOperator {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Self {
        Self { matrix, label: label.into() }
    }

    /// Projector `|k><k|` onto a computational basis state of a `dim`-level system.
    pub fn basis_projector(dim: usize, k: usize, label: impl Into<String>) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self::new(m, label)
    }

    /// Projector `|v><v|` onto a (normalised) vector.
    pub fn projector(v: &DVector<Complex64>, label: impl Into<String>) -> Self {
        Self::new(v * v.adjoint(), label)
    }

    /// The two qubit projectors `|0><0|` (outcome `a0`) and `|1><1|` (outcome `a1`).
    pub fn qubit_z_basis() -> [Self; 2] {
        [Self::basis_projector(2, 0, "a0"), Self::basis_projector(2, 1, "a1")]
    }

    fn check_dims(&self, state: &DVector<Complex64>) -> Result<()> {
        if self.matrix.ncols() != state.len() {
            return Err(Error::dims(
                format!("state of length {}", self.matrix.ncols()),
                format!("length {}", state.len()),
            ));
        }
        Ok(())
    }

    /// `<psi| M^dagger M |psi>`, unclamped.
    fn expectation(&self, state: &DVector<Complex64>) -> Result<f64> {
        self.check_dims(state)?;
        let projected = &self.matrix * state;
        Ok(projected.norm_squared())
    }
}

/// Probability of outcome `m`, clamped to `[0, 1]`.
pub fn outcome_probability(state: &DVector<Complex64>, op: &MeasurementOperator) -> Result<f64> {
    Ok(op.expectation(state)?.clamp(0.0, 1.0))
}

/// State after observing outcome `m`, `M|psi> / sqrt(p(m))`.
pub fn post_measurement_state(state: &DVector<Complex64>, op: &MeasurementOperator) -> Result<DVector<Complex64>> {
    let p = op.expectation(state)?;
    if p <= 0.0 {
        return Err(Error::InvalidOutcome { label: op.label.clone() });
    }
    Ok(&op.matrix * state / Complex64::new(p.sqrt(), 0.0))
}

/// Outcome of [`completeness_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completeness {
    pub complete: bool,
    /// `||sum M^dagger M - I||_F`
    pub defect: f64,
}

/// Checks `sum_m M_m^dagger M_m = I`.
pub fn completeness_check(ops: &[MeasurementOperator]) -> Completeness {
    let Some(first) = ops.first() else {
        return Completeness { complete: false, defect: f64::INFINITY };
    };
    let n = first.matrix.ncols();
    if ops.iter().any(|o| o.matrix.ncols() != n) {
        return Completeness { complete: false, defect: f64::INFINITY };
    }
    let sum = ops
        .iter()
        .fold(DMatrix::<Complex64>::zeros(n, n), |acc, o| acc + o.matrix.adjoint() * &o.matrix);
    let defect = (sum - DMatrix::identity(n, n)).norm();
    Completeness { complete: defect <= MEAS_TOL, defect }
}

/// A density operator `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`MEAS_TOL`].
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::dims("square matrix", format!("{}x{}", rho.nrows(), rho.ncols())));
        }
        let defect = (&rho - rho.adjoint()).norm();
        if defect > MEAS_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let dm = Self { rho };
        let trace = dm.trace();
        if (trace - 1.0).abs() > MEAS_TOL {
            return Err(Error::domain(format!("density matrix trace {trace}, expected 1")));
        }
        let min_eig = dm.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -MEAS_TOL {
            return Err(Error::domain(format!("density matrix has negative eigenvalue {min_eig}")));
        }
        Ok(dm)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect()
    }

    /// `tr(rho^2)`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}

/// `rho = sum_m p_m |psi_m><psi_m|`.
pub fn density_matrix(ensemble: &[(f64, DVector<Complex64>)]) -> Result<DensityMatrix> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::domain("empty ensemble"));
    };
    let n = first.len();
    let mut total = 0.0;
    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for (p, psi) in ensemble {
        if !(*p >= 0.0 && p.is_finite()) {
            return Err(Error::domain(format!("ensemble weight {p} is not a probability")));
        }
        if psi.len() != n {
            return Err(Error::dims(n, psi.len()));
        }
        total += p;
        rho += psi * psi.adjoint() * Complex64::new(*p, 0.0);
    }
    if (total - 1.0).abs() > MEAS_TOL {
        return Err(Error::domain(format!("ensemble weights sum to {total}, expected 1")));
    }
    DensityMatrix::new(rho)
}

/// `M / ||M||` with `||M|| = sqrt(<psi| M^dagger M |psi>)` on the reference state.
pub fn normalized_operator(op: &MeasurementOperator, reference: &DVector<Complex64>) -> Result<DMatrix<Complex64>> {
    let norm = op.expectation(reference)?.sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateOperator { label: op.label.clone() });
    }
    Ok(&op.matrix / Complex64::new(norm, 0.0))
}

/// The default observable of the projection channel: the first row of
/// `|0><0|` normalised on `|0>`, i.e. the row that reads the `alpha` component.
pub fn z_channel() -> DMatrix<f64> {
    let [m0, _] = MeasurementOperator::qubit_z_basis();
    let reference = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let m = normalized_operator(&m0, &reference).expect("|0><0| has unit norm on |0>");
    m.rows(0, 1).map(|c| c.re)
}

fn symmetric_psd_check(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims(format!("square {what}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(format!("{what} has non-finite entries")));
    }
    let asym = (m - m.transpose()).norm();
    if asym > MEAS_TOL {
        return Err(Error::domain(format!("{what} is not symmetric (defect {asym:.3e})")));
    }
    if m.nrows() > 0 {
        let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if min_eig < -MEAS_TOL {
            return Err(Error::domain(format!("{what} has negative eigenvalue {min_eig}")));
        }
    }
    Ok(())
}

/// State and measurement noise covariances plus the seed of the noise streams.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub state_cov: DMatrix<f64>,
    pub meas_cov: DMatrix<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(state_cov: DMatrix<f64>, meas_cov: DMatrix<f64>, seed: u64) -> Result<Self> {
        symmetric_psd_check(&state_cov, "state covariance Q")?;
        symmetric_psd_check(&meas_cov, "measurement covariance R")?;
        Ok(Self { state_cov, meas_cov, seed })
    }

    /// One-dimensional channel with variances `q` and `r`.
    pub fn scalar(q: f64, r: f64, seed: u64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, q), DMatrix::from_element(1, 1, r), seed)
    }

    /// No noise at all on an `n`-state, `m`-observable system.
    pub fn zero(n: usize, m: usize) -> Self {
        Self { state_cov: DMatrix::zeros(n, n), meas_cov: DMatrix::zeros(m, m), seed: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.state_cov.iter().all(|x| *x == 0.0) && self.meas_cov.iter().all(|x| *x == 0.0)
    }

    /// The same covariances multiplied by `factor^2` (a change of units).
    pub fn rescaled(&self, factor: f64) -> Self {
        let f2 = factor * factor;
        Self { state_cov: &self.state_cov * f2, meas_cov: &self.meas_cov * f2, seed: self.seed }
    }
}

/// Zero-mean Gaussian sampler for a fixed PSD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNoise {
    factor: DMatrix<f64>,
    zero: bool,
}

impl GaussianNoise {
    /// Factors `cov = L L^T` through its eigendecomposition, so singular
    /// covariances are fine.
    pub fn new(cov: &DMatrix<f64>) -> Self {
        let zero = cov.iter().all(|x| *x == 0.0);
        if zero || cov.nrows() == 0 {
            return Self { factor: DMatrix::zeros(cov.nrows(), cov.ncols()), zero: true };
        }
        let eig = SymmetricEigen::new(cov.clone());
        let roots = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Self { factor, zero }
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.factor.nrows();
        if self.zero {
            return DVector::zeros(n);
        }
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor * z
    }
}

/// `Y = M s + n` with `n ~ N(0, R)` drawn from `rng`. With `R = 0` the result
/// is exactly `M s`.
pub fn measure_with_noise<R: Rng + ?Sized>(
    state: &DVector<f64>,
    m_tilde: &DMatrix<f64>,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if m_tilde.ncols() != state.len() {
        return Err(Error::dims(format!("state of length {}", m_tilde.ncols()), state.len()));
    }
    if noise.meas_cov.nrows() != m_tilde.nrows() {
        return Err(Error::dims(
            format!("{0}x{0} measurement covariance", m_tilde.nrows()),
            format!("{0}x{0}", noise.meas_cov.nrows()),
        ));
    }
    let clean = m_tilde * state;
    let gauss = GaussianNoise::new(&noise.meas_cov);
    if gauss.is_zero() {
        return Ok(clean);
    }
    Ok(clean + gauss.sample(rng))
}
