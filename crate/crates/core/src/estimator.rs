//! Recursive least-squares / Kalman optimal state estimator (OSE).
//!
//! The recursion per step is
//!
//! ```text
//! x⁻ = A x̂                      P⁻ = A P Aᵀ (+ Q)
//! K  = P⁻ Mᵀ [B + M P⁻ Mᵀ]⁻¹    B = λI (noiseless) or R (noisy)
//! ε  = y − M x⁻
//! x̂  = x⁻ + K ε
//! P  = λ⁻¹ (I − K M) P⁻          (noiseless)
//! P  = (I − K M) P⁻              (noisy)
//! ```
//!
//! `P` is symmetrised after every update.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measurement::NoiseSpec;

pub const DEFAULT_LAMBDA: f64 = 0.99;
pub const DEFAULT_DELTA: f64 = 100.0;
/// Bracketed innovation matrices with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// How the noisy recursion accounts for state noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseForm {
    /// `P⁻ = A P Aᵀ + Q`, bracket `R + M P⁻ Mᵀ`.
    #[default]
    Full,
    /// State noise folded into the output: bracket `R + M Q Mᵀ + M P⁻ Mᵀ`, no `Q` in the prediction.
    Unique,
}

/// `(A, M, λ, δ, Q, R)` for one estimation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub a: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub lambda: f64,
    pub delta: f64,
    pub noise: Option<NoiseSpec>,
    pub noise_form: NoiseForm,
    /// Skip `P⁻ = A P Aᵀ` for time-invariant plants (`P⁻ = P`, plus `Q` when noisy).
    pub skip_covariance_predict: bool,
}

impl SystemModel {
    pub fn new(a: DMatrix<f64>, m: DMatrix<f64>, lambda: f64, delta: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("square A", format!("{}x{}", a.nrows(), a.ncols())));
        }
        if m.ncols() != a.nrows() {
            return Err(Error::dims(format!("M with {} columns", a.nrows()), m.ncols()));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::domain(format!("forgetting factor {lambda} outside (0, 1]")));
        }
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::domain(format!("initial covariance scale {delta} must be finite and nonzero")));
        }
        if a.iter().chain(m.iter()).any(|x| !x.is_finite()) {
            return Err(Error::domain("model matrices must be finite"));
        }
        Ok(Self { a, m, lambda, delta, noise: None, noise_form: NoiseForm::Full, skip_covariance_predict: false })
    }

    /// `A = 1`, `M = 1`.
    pub fn scalar(lambda: f64, delta: f64) -> Result<Self> {
        Self::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1), lambda, delta)
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Result<Self> {
        if noise.state_cov.nrows() != self.state_dim() {
            return Err(Error::dims(format!("{0}x{0} Q", self.state_dim()), noise.state_cov.nrows()));
        }
        if noise.meas_cov.nrows() != self.obs_dim() {
            return Err(Error::dims(format!("{0}x{0} R", self.obs_dim()), noise.meas_cov.nrows()));
        }
        self.noise = Some(noise);
        Ok(self)
    }

    pub fn with_noise_form(mut self, form: NoiseForm) -> Self {
        self.noise_form = form;
        self
    }

    pub fn with_skip_covariance_predict(mut self, skip: bool) -> Self {
        self.skip_covariance_predict = skip;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.m.nrows()
    }
}

/// Running estimate `x̂`, inverse-correlation matrix `P` and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub x_hat: DVector<f64>,
    pub p: DMatrix<f64>,
    pub t: usize,
}

/// Intermediate quantities of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub x_hat_prior: DVector<f64>,
    pub gain: DMatrix<f64>,
    pub innovation: DVector<f64>,
    pub y_hat: DVector<f64>,
}

/// `P = δI`, `x̂ = x0`, `t = 0`.
pub fn init(model: &SystemModel, x0: DVector<f64>) -> Result<EstimatorState> {
    if model.delta == 0.0 {
        return Err(Error::domain("initial covariance scale must be nonzero"));
    }
    if x0.len() != model.state_dim() {
        return Err(Error::dims(model.state_dim(), x0.len()));
    }
    let n = model.state_dim();
    Ok(EstimatorState { x_hat: x0, p: DMatrix::identity(n, n) * model.delta, t: 0 })
}

/// Initial estimate: an explicit vector, or the least-squares solution of `M x = y₁`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    Given(DVector<f64>),
    FirstObservation,
}

/// Minimum-norm least-squares solution of `M x = y`.
pub fn solve_observation(model: &SystemModel, y: &DVector<f64>) -> Result<DVector<f64>> {
    if y.len() != model.obs_dim() {
        return Err(Error::dims(model.obs_dim(), y.len()));
    }
    model
        .m
        .clone()
        .svd(true, true)
        .solve(y, 1e-14)
        .map_err(|e| Error::domain(format!("cannot solve first observation: {e}")))
}

fn symmetrize(p: &DMatrix<f64>) -> DMatrix<f64> {
    (p + p.transpose()) * 0.5
}

fn condition_number(s: &DMatrix<f64>) -> f64 {
    let sv = s.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn is_noisy(model: &SystemModel) -> bool {
    model.noise.is_some()
}

/// `P⁻` from the current `P`.
pub fn predict_covariance(p: &DMatrix<f64>, model: &SystemModel) -> DMatrix<f64> {
    let mut prior = if model.skip_covariance_predict { p.clone() } else { &model.a * p * model.a.transpose() };
    if let Some(noise) = &model.noise {
        if model.noise_form == NoiseForm::Full {
            prior += &noise.state_cov;
        }
    }
    symmetrize(&prior)
}

/// Gain for a given prior covariance `P⁻`.
pub fn gain_from_prior(p_prior: &DMatrix<f64>, model: &SystemModel) -> Result<DMatrix<f64>> {
    let m = &model.m;
    let bracket_base = match &model.noise {
        None => DMatrix::identity(model.obs_dim(), model.obs_dim()) * model.lambda,
        Some(noise) => match model.noise_form {
            NoiseForm::Full => noise.meas_cov.clone(),
            NoiseForm::Unique => &noise.meas_cov + m * &noise.state_cov * m.transpose(),
        },
    };
    let pm_t = p_prior * m.transpose();
    let bracket = bracket_base + m * &pm_t;
    let condition = condition_number(&bracket);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Singular { what: "innovation", condition });
    }
    let inv = bracket.clone().try_inverse().ok_or(Error::Singular { what: "innovation", condition })?;
    Ok(pm_t * inv)
}

/// Gain using the state's `P` as the prior covariance.
pub fn gain(est: &EstimatorState, model: &SystemModel) -> Result<DMatrix<f64>> {
    gain_from_prior(&est.p, model)
}

/// One predict/correct cycle.
pub fn step(est: &EstimatorState, model: &SystemModel, y: &DVector<f64>) -> Result<(EstimatorState, StepRecord)> {
    if y.len() != model.obs_dim() {
        return Err(Error::dims(model.obs_dim(), y.len()));
    }
    if est.x_hat.len() != model.state_dim() {
        return Err(Error::dims(model.state_dim(), est.x_hat.len()));
    }
    let x_prior = &model.a * &est.x_hat;
    let p_prior = predict_covariance(&est.p, model);
    let k = gain_from_prior(&p_prior, model)?;
    let y_hat = &model.m * &x_prior;
    let innovation = y - &y_hat;
    let x_hat = &x_prior + &k * &innovation;
    let n = model.state_dim();
    let mut p = (DMatrix::identity(n, n) - &k * &model.m) * p_prior;
    if !is_noisy(model) {
        p /= model.lambda;
    }
    let next = EstimatorState { x_hat, p: symmetrize(&p), t: est.t + 1 };
    Ok((next, StepRecord { x_hat_prior: x_prior, gain: k, innovation, y_hat }))
}

/// Which state the estimator tracks: Mode I the state itself (`α̂`), Mode II the
/// quantum-converted state (`μ̂`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Mode {
    #[default]
    I,
    II,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::I => "I",
            Mode::II => "II",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Mode::I),
            "II" | "ii" | "2" => Ok(Mode::II),
            other => Err(Error::domain(format!("unknown mode `{other}`"))),
        }
    }
}

/// Output of [`run_ose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub estimates: Vec<DVector<f64>>,
    /// First component of each estimate: `α̂_t` in Mode I, `μ̂_t` in Mode II.
    pub projections: Vec<f64>,
    pub records: Vec<StepRecord>,
    pub final_state: EstimatorState,
}

impl Trajectory {
    pub fn last_projection(&self) -> f64 {
        *self.projections.last().expect("trajectory is nonempty")
    }
}

/// Runs the recursion over an observation stream.
pub fn run_ose(model: &SystemModel, observations: &[DVector<f64>], mode: Mode, init_policy: &InitPolicy) -> Result<Trajectory> {
    let first = observations.first().ok_or_else(|| Error::domain("empty observation stream"))?;
    let x0 = match init_policy {
        InitPolicy::Given(x) => x.clone(),
        InitPolicy::FirstObservation => solve_observation(model, first)?,
    };
    let mut est = init(model, x0)?;
    let mut estimates = Vec::with_capacity(observations.len());
    let mut projections = Vec::with_capacity(observations.len());
    let mut records = Vec::with_capacity(observations.len());
    for y in observations {
        let (next, rec) = step(&est, model, y)?;
        projections.push(next.x_hat.get(0).copied().unwrap_or(0.0));
        estimates.push(next.x_hat.clone());
        records.push(rec);
        est = next;
    }
    Ok(Trajectory { mode, estimates, projections, records, final_state: est })
}

/// `x̂ = R⁻¹ r` with `R = Σ λ^{t−i} Mᵢᵀ Mᵢ`, `r = Σ λ^{t−i} Mᵢᵀ yᵢ`.
pub fn batch_least_squares(m_history: &[DMatrix<f64>], y_history: &[DVector<f64>], lambda: f64) -> Result<DVector<f64>> {
    if m_history.len() != y_history.len() {
        return Err(Error::dims(format!("{} observations", m_history.len()), y_history.len()));
    }
    let first = m_history.first().ok_or_else(|| Error::domain("empty history"))?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::domain(format!("forgetting factor {lambda} outside (0, 1]")));
    }
    let n = first.ncols();
    let mut r_mm = DMatrix::<f64>::zeros(n, n);
    let mut r_my = DVector::<f64>::zeros(n);
    let t = m_history.len();
    for (i, (m, y)) in m_history.iter().zip(y_history).enumerate() {
        if m.ncols() != n || m.nrows() != y.len() {
            return Err(Error::dims(format!("{}x{n} history entry", y.len()), format!("{}x{}", m.nrows(), m.ncols())));
        }
        let w = lambda.powi((t - 1 - i) as i32);
        r_mm += m.transpose() * m * w;
        r_my += m.transpose() * y * w;
    }
    let condition = condition_number(&r_mm);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::Singular { what: "correlation", condition });
    }
    r_mm.clone()
        .lu()
        .solve(&r_my)
        .ok_or(Error::Singular { what: "correlation", condition })
}

/// The recursion specialised to one state and one observable; per-pixel
/// workhorse with the same update formulas as [`step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarModel {
    pub a: f64,
    pub m: f64,
    pub lambda: f64,
    pub delta: f64,
    /// `(q, r)` when noisy.
    pub noise: Option<(f64, f64)>,
    pub noise_form: NoiseForm,
    pub skip_covariance_predict: bool,
}

/// `(x̂, P)` of a [`ScalarModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarState {
    pub x_hat: f64,
    pub p: f64,
}

impl ScalarModel {
    pub fn new(a: f64, m: f64, lambda: f64, delta: f64, noise: Option<(f64, f64)>) -> Result<Self> {
        SystemModel::new(DMatrix::from_element(1, 1, a), DMatrix::from_element(1, 1, m), lambda, delta)?;
        if let Some((q, r)) = noise {
            if !(q >= 0.0 && r >= 0.0 && q.is_finite() && r.is_finite()) {
                return Err(Error::domain(format!("noise variances ({q}, {r}) must be finite and nonnegative")));
            }
        }
        Ok(Self { a, m, lambda, delta, noise, noise_form: NoiseForm::Full, skip_covariance_predict: false })
    }

    pub fn init(&self, x0: f64) -> ScalarState {
        ScalarState { x_hat: x0, p: self.delta }
    }

    pub fn step(&self, est: ScalarState, y: f64) -> Result<ScalarState> {
        let x_prior = self.a * est.x_hat;
        let mut p_prior = if self.skip_covariance_predict { est.p } else { self.a * est.p * self.a };
        let base = match self.noise {
            None => self.lambda,
            Some((q, r)) => match self.noise_form {
                NoiseForm::Full => {
                    p_prior += q;
                    r
                }
                NoiseForm::Unique => r + self.m * q * self.m,
            },
        };
        let bracket = base + self.m * p_prior * self.m;
        if bracket == 0.0 || !bracket.is_finite() {
            return Err(Error::Singular { what: "innovation", condition: f64::INFINITY });
        }
        let k = p_prior * self.m / bracket;
        let x_hat = x_prior + k * (y - self.m * x_prior);
        let mut p = (1.0 - k * self.m) * p_prior;
        if self.noise.is_none() {
            p /= self.lambda;
        }
        Ok(ScalarState { x_hat, p })
    }

    /// Runs over `ys`, initialised from the first observation, and returns the final estimate.
    pub fn estimate(&self, ys: &[f64]) -> Result<f64> {
        let first = *ys.first().ok_or_else(|| Error::domain("empty observation stream"))?;
        if self.m == 0.0 {
            return Err(Error::Singular { what: "observation", condition: f64::INFINITY });
        }
        let mut est = self.init(first / self.m);
        for &y in ys {
            est = self.step(est, y)?;
        }
        Ok(est.x_hat)
    }

    pub fn to_system_model(&self) -> Result<SystemModel> {
        let mut model = SystemModel::new(
            DMatrix::from_element(1, 1, self.a),
            DMatrix::from_element(1, 1, self.m),
            self.lambda,
            self.delta,
        )?
        .with_noise_form(self.noise_form)
        .with_skip_covariance_predict(self.skip_covariance_predict);
        if let Some((q, r)) = self.noise {
            model = model.with_noise(NoiseSpec::scalar(q, r, 0)?)?;
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::measure_with_noise;
    use crate::rng::{stream, Purpose};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn init_examples() {
        let model = SystemModel::scalar(1.0, 100.0).unwrap();
        let est = init(&model, v(&[0.0])).unwrap();
        assert_eq!(est.p, DMatrix::from_element(1, 1, 100.0));
        assert_eq!(est.x_hat, v(&[0.0]));
        assert_eq!(est.t, 0);
        let two = SystemModel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2), 1.0, 1.0).unwrap();
        assert_eq!(init(&two, v(&[1.0, 0.0])).unwrap().p, DMatrix::identity(2, 2));
        assert!(SystemModel::scalar(1.0, 0.0).is_err());
        assert!(SystemModel::scalar(0.0, 1.0).is_err());
        assert!(SystemModel::scalar(1.5, 1.0).is_err());
    }

    #[test]
    fn gain_examples() {
        let model = SystemModel::scalar(1.0, 100.0).unwrap();
        let est = init(&model, v(&[0.0])).unwrap();
        assert_abs_diff_eq!(gain(&est, &model).unwrap()[(0, 0)], 100.0 / 101.0, epsilon = 1e-15);

        let zero_m = SystemModel::new(DMatrix::identity(1, 1), DMatrix::zeros(1, 1), 1.0, 100.0).unwrap();
        assert_eq!(gain(&est, &zero_m).unwrap()[(0, 0)], 0.0);

        let noisy = SystemModel::scalar(1.0, 100.0).unwrap().with_noise(NoiseSpec::scalar(0.0, 1.0, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(gain(&est, &noisy).unwrap()[(0, 0)], 100.0 / 101.0, epsilon = 1e-15);
    }

    #[test]
    fn gain_lambda_equals_gain_r() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, -0.2, 0.8]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]);
        let lambda = 0.7;
        let plain = SystemModel::new(a.clone(), m.clone(), lambda, 3.0).unwrap();
        let noisy = SystemModel::new(a, m, lambda, 3.0)
            .unwrap()
            .with_noise(NoiseSpec::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2) * lambda, 0).unwrap())
            .unwrap();
        let est = init(&plain, v(&[0.0, 0.0])).unwrap();
        assert_eq!(gain(&est, &plain).unwrap(), gain(&est, &noisy).unwrap());
    }

    #[test]
    fn singular_bracket_is_reported() {
        let model = SystemModel::scalar(1.0, 1.0)
            .unwrap()
            .with_noise(NoiseSpec::scalar(0.0, 0.0, 0).unwrap())
            .unwrap();
        let est = EstimatorState { x_hat: v(&[0.0]), p: DMatrix::zeros(1, 1), t: 0 };
        assert!(matches!(gain(&est, &model), Err(Error::Singular { .. })));
    }

    #[test]
    fn one_step_hand_recursion() {
        let model = SystemModel::scalar(1.0, 100.0).unwrap();
        let est = init(&model, v(&[0.0])).unwrap();
        let (next, rec) = step(&est, &model, &v(&[3.0])).unwrap();
        assert_abs_diff_eq!(next.x_hat[0], 300.0 / 101.0, epsilon = 1e-12);
        assert_abs_diff_eq!(next.x_hat[0], 2.970297, epsilon = 1e-6);
        assert_eq!(rec.innovation, v(&[3.0]));
        assert_eq!(rec.y_hat, v(&[0.0]));
        assert_abs_diff_eq!(next.p[(0, 0)], 100.0 / 101.0, epsilon = 1e-12);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn exact_init_is_fixed_point() {
        let a = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, -0.3, 1.0]);
        let model = SystemModel::new(a.clone(), m.clone(), 0.99, 100.0).unwrap();
        let mut x = v(&[1.0, -0.5]);
        let mut ys = Vec::new();
        let mut truth = Vec::new();
        for _ in 0..20 {
            x = &a * &x;
            ys.push(&m * &x);
            truth.push(x.clone());
        }
        let traj = run_ose(&model, &ys, Mode::I, &InitPolicy::Given(v(&[1.0, -0.5]))).unwrap();
        for (rec, (est, want)) in traj.records.iter().zip(traj.estimates.iter().zip(&truth)) {
            assert!(rec.innovation.norm() < 1e-12);
            assert!((est - want).norm() < 1e-12);
        }
    }

    #[test]
    fn first_observation_init_is_exact() {
        let model = SystemModel::new(DMatrix::identity(2, 2), DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), 1.0, 100.0).unwrap();
        let ys = vec![v(&[0.25]); 5];
        let traj = run_ose(&model, &ys, Mode::II, &InitPolicy::FirstObservation).unwrap();
        assert!(traj.projections.iter().all(|p| *p == 0.25));
        assert!(run_ose(&model, &[], Mode::I, &InitPolicy::FirstObservation).is_err());
    }

    #[test]
    fn covariance_stays_symmetric() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.3, 0.1, -0.2, 0.9, 0.05, 0.3, 0.1, 0.7]);
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.1, 0.7, 0.2, 1.0, -0.4]);
        let noise = NoiseSpec::new(DMatrix::identity(3, 3) * 1e-3, DMatrix::identity(2, 2) * 1e-2, 5).unwrap();
        let model = SystemModel::new(a, m, 0.95, 10.0).unwrap().with_noise(noise).unwrap();
        let mut est = init(&model, v(&[0.0, 0.0, 0.0])).unwrap();
        let mut rng = stream(5, Purpose::Estimation, 0, 0);
        for _ in 0..200 {
            let y = v(&[rng.random::<f64>(), rng.random::<f64>()]);
            est = step(&est, &model, &y).unwrap().0;
            assert!((&est.p - est.p.transpose()).norm() <= 1e-8);
        }
    }

    #[test]
    fn batch_examples() {
        let x = batch_least_squares(&[DMatrix::identity(1, 1)], &[v(&[4.2])], 1.0).unwrap();
        assert_eq!(x, v(&[4.2]));
        // normal equations on a stacked overdetermined system
        let ms = vec![
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        ];
        let ys = vec![v(&[1.0]), v(&[2.0]), v(&[4.0])];
        let stacked = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let rhs = v(&[1.0, 2.0, 4.0]);
        let ols = (stacked.transpose() * &stacked).try_inverse().unwrap() * stacked.transpose() * rhs;
        let batch = batch_least_squares(&ms, &ys, 1.0).unwrap();
        assert!((batch - &ols).norm() < 1e-12);
        assert_abs_diff_eq!(ols[0], 4.0 / 3.0, epsilon = 1e-12);
        assert!(batch_least_squares(&ms[..1], &ys[..1], 1.0).is_err());
    }

    #[test]
    fn rls_matches_batch_with_large_delta() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 0.5]);
        let m2 = DMatrix::from_row_slice(1, 2, &[-0.3, 1.0]);
        let model1 = SystemModel::new(DMatrix::identity(2, 2), m.clone(), 1.0, 1e6).unwrap();
        let model2 = SystemModel::new(DMatrix::identity(2, 2), m2.clone(), 1.0, 1e6).unwrap();
        let truth = v(&[0.7, -1.2]);
        let mut est = init(&model1, v(&[0.0, 0.0])).unwrap();
        let mut ms = Vec::new();
        let mut ys = Vec::new();
        let mut rng = stream(11, Purpose::Estimation, 0, 0);
        for t in 0..10 {
            let model = if t % 2 == 0 { &model1 } else { &model2 };
            let y = &model.m * &truth + v(&[0.01 * (rng.random::<f64>() - 0.5)]);
            est = step(&est, model, &y).unwrap().0;
            ms.push(model.m.clone());
            ys.push(y);
        }
        let batch = batch_least_squares(&ms, &ys, 1.0).unwrap();
        assert!((&est.x_hat - &batch).norm() / batch.norm() <= 1e-6);
    }

    #[test]
    fn scalar_fast_path_matches_matrix_form() {
        let cases = [
            ScalarModel::new(1.0, 1.0, 0.99, 100.0, None).unwrap(),
            ScalarModel::new(0.9, 2.0, 1.0, 5.0, None).unwrap(),
            ScalarModel::new(1.0, 1.0, 1.0, 100.0, Some((1e-4, 1e-2))).unwrap(),
            ScalarModel { noise_form: NoiseForm::Unique, ..ScalarModel::new(1.0, 1.0, 1.0, 100.0, Some((1e-4, 1e-2))).unwrap() },
            ScalarModel { skip_covariance_predict: true, ..ScalarModel::new(0.8, 1.0, 0.9, 10.0, None).unwrap() },
        ];
        let mut rng = stream(3, Purpose::Estimation, 0, 0);
        for sm in cases {
            let model = sm.to_system_model().unwrap();
            let mut s = sm.init(0.1);
            let mut e = init(&model, v(&[0.1])).unwrap();
            for _ in 0..30 {
                let y: f64 = rng.random();
                s = sm.step(s, y).unwrap();
                e = step(&e, &model, &v(&[y])).unwrap().0;
                assert_abs_diff_eq!(s.x_hat, e.x_hat[0], epsilon = 1e-12);
                assert_abs_diff_eq!(s.p, e.p[(0, 0)], epsilon = 1e-9 * e.p[(0, 0)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn scalar_estimate_exact_without_noise() {
        let sm = ScalarModel::new(1.0, 1.0, 0.99, 100.0, None).unwrap();
        assert_eq!(sm.estimate(&[0.625; 8]).unwrap(), 0.625);
        assert!(sm.estimate(&[]).is_err());
    }

    #[test]
    fn noisy_run_is_deterministic() {
        let noise = NoiseSpec::scalar(0.0, 0.01, 77).unwrap();
        let model = SystemModel::scalar(1.0, 100.0).unwrap().with_noise(noise.clone()).unwrap();
        let run = || {
            let ys: Vec<_> = (0..16)
                .map(|t| {
                    measure_with_noise(&v(&[0.4]), &model.m, &noise, &mut stream(77, Purpose::MeasurementNoise, 0, t))
                        .unwrap()
                })
                .collect();
            run_ose(&model, &ys, Mode::I, &InitPolicy::Given(v(&[0.0]))).unwrap()
        };
        assert_eq!(run(), run());
    }
}
