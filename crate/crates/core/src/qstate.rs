//! Qubit and qudit states, Bloch parametrisation, unitary evolution and the
//! classical/quantum converters used by the pole-to-pole projection scheme.
//!
//! Only the projection of a state onto the z axis of the Bloch sphere carries
//! information here. For a qubit built from Bloch angles that projection is
//! `alpha = cos(theta / 2)`; gray levels are mapped onto it through the
//! normalised scale `alpha = g / (2^B - 1)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on `|alpha|^2 + |beta|^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on `U^dagger U = I`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest supported bit depth for level-scaled quantities.
pub const MAX_BITS: u32 = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `2^B - 1`, the top gray level at `bits` bits.
pub fn full_scale(bits: u32) -> Result<f64> {
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::domain(format!("bit depth {bits} outside 1..={MAX_BITS}")));
    }
    Ok(((1u64 << bits) - 1) as f64)
}

/// A two-component amplitude vector that is not required to be normalised.
///
/// This is the operand type of the projection arithmetic: level-scaled
/// states (first component in `[0, 2^B - 1]`), converted states and
/// intermediate results all live here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Ket {
    pub const fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// A state whose first component sits at `level` on a scale where the
    /// ground state `|0>` has first component `unit`.
    ///
    /// The second component completes the norm to `unit` and is zero when the
    /// level lies outside `[0, unit]`.
    pub fn level(level: f64, unit: f64) -> Self {
        let rest = (unit * unit - level * level).max(0.0).sqrt();
        Self::real(level, rest)
    }

    /// The scaled ground state `unit * |0>`.
    pub fn ground(unit: f64) -> Self {
        Self::real(unit, 0.0)
    }

    /// `unit * |0> - self`, the quantum converter on a scale of `unit`.
    pub fn converted(&self, unit: f64) -> Self {
        Self::new(Complex64::new(unit, 0.0) - self.alpha, -self.beta)
    }

    /// Real part of the first component.
    pub fn first(&self) -> f64 {
        self.alpha.re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

/// A normalised single-qubit state `alpha |0> + beta |1>`.
///
/// The global phase is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitState {
    /// Builds a state, rejecting amplitudes whose norm is off by more than [`NORM_TOL`].
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// A state with real, non-negative first amplitude `alpha` and the
    /// second amplitude completing the norm.
    pub fn with_projection(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("projection {alpha} outside [0, 1]")));
        }
        Self::from_real(alpha, (1.0 - alpha * alpha).max(0.0).sqrt())
    }

    /// `|0>`, the north pole.
    pub fn zero() -> Self {
        Self { alpha: ONE, beta: ZERO }
    }

    /// `|1>`, the south pole.
    pub fn one() -> Self {
        Self { alpha: ZERO, beta: ONE }
    }

    /// `cos(theta/2) |0> + e^{i phi} sin(theta/2) |1>`.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::domain(format!("polar angle {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::domain(format!("azimuth {phi} outside [0, 2pi)")));
        }
        let half = theta / 2.0;
        Ok(Self {
            alpha: Complex64::new(half.cos(), 0.0),
            beta: Complex64::from_polar(half.sin(), phi),
        })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Projection onto the z axis, `|alpha|`.
    pub fn z_projection(&self) -> f64 {
        self.alpha.norm()
    }

    pub fn ket(&self) -> Ket {
        Ket::new(self.alpha, self.beta)
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_vec(vec![self.alpha, self.beta])
    }

    /// Swaps the amplitudes without renormalising (the swap preserves the norm).
    pub(crate) fn swapped(&self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }
}

/// Free-function form of [`QubitState::z_projection`].
pub fn z_projection(s: &QubitState) -> f64 {
    s.z_projection()
}

/// The classical converter `mu = (2^B - 1) - alpha` on level-scaled values.
pub fn classical_convert(alpha_level: f64, bits: u32) -> Result<f64> {
    let unit = full_scale(bits)?;
    if !(0.0..=unit).contains(&alpha_level) {
        return Err(Error::domain(format!("level {alpha_level} outside [0, {unit}]")));
    }
    Ok(unit - alpha_level)
}

/// The quantum converter `|0> - |psi>`.
///
/// The result is bookkeeping, not a physical state: it is not renormalised and
/// only its first component `1 - alpha` is ever read.
pub fn quantum_convert(s: &QubitState) -> Ket {
    s.ket().converted(1.0)
}

/// Maps gray level `g` onto a qubit with z projection `g / (2^B - 1)`.
pub fn encode_gray(g: u32, bits: u32) -> Result<QubitState> {
    let unit = full_scale(bits)?;
    if g as f64 > unit {
        return Err(Error::domain(format!("gray level {g} exceeds {unit}")));
    }
    let projection = g as f64 / unit;
    QubitState::from_bloch_angles(2.0 * projection.acos(), 0.0)
}

/// Inverse of [`encode_gray`]: nearest level to `z_projection * (2^B - 1)`.
pub fn decode_gray(s: &QubitState, bits: u32) -> Result<u32> {
    let unit = full_scale(bits)?;
    Ok((s.z_projection() * unit).round().clamp(0.0, unit) as u32)
}

/// A `2^B`-component amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditVector {
    bits: u32,
    amps: DVector<Complex64>,
}

/// Largest register handled by [`QuditVector`].
const MAX_QUDIT_BITS: u32 = 20;

impl QuditVector {
    pub fn new(bits: u32, amps: DVector<Complex64>) -> Result<Self> {
        if !(1..=MAX_QUDIT_BITS).contains(&bits) {
            return Err(Error::domain(format!("register width {bits} outside 1..={MAX_QUDIT_BITS}")));
        }
        let len = 1usize << bits;
        if amps.len() != len {
            return Err(Error::dims(len, amps.len()));
        }
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self { bits, amps })
    }

    /// `|k>` in a register of `bits` qubits.
    pub fn basis_state(bits: u32, k: usize) -> Result<Self> {
        if !(1..=MAX_QUDIT_BITS).contains(&bits) {
            return Err(Error::domain(format!("register width {bits} outside 1..={MAX_QUDIT_BITS}")));
        }
        let len = 1usize << bits;
        if k >= len {
            return Err(Error::domain(format!("basis index {k} outside 0..{len}")));
        }
        let mut amps = DVector::from_element(len, ZERO);
        amps[k] = ONE;
        Ok(Self { bits, amps })
    }

    pub fn from_qubit(s: &QubitState) -> Self {
        Self { bits: 1, amps: s.to_vector() }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Applies `U`, which must be unitary within [`UNITARY_TOL`].
    pub fn evolve(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        let n = self.amps.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", u.nrows(), u.ncols())));
        }
        let defect = unitarity_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { bits: self.bits, amps: u * &self.amps })
    }
}

/// Free-function form of [`QuditVector::evolve`].
pub fn evolve(state: &QuditVector, u: &DMatrix<Complex64>) -> Result<QuditVector> {
    state.evolve(u)
}

/// `||U^dagger U - I||_F`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols())).norm()
}

/// A Hermitian generator together with its action unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: DMatrix<Complex64>,
    hbar: f64,
}

impl Hamiltonian {
    pub fn new(matrix: DMatrix<Complex64>, hbar: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims("square matrix", format!("{}x{}", matrix.nrows(), matrix.ncols())));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
        }
        let defect = (&matrix - matrix.adjoint()).norm();
        if defect > NORM_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self { matrix, hbar })
    }

    /// `H` with `hbar = 1`.
    pub fn natural(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(matrix, 1.0)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `U = exp(-i H t / hbar)`, computed through the eigendecomposition of `H`.
pub fn unitary_from_hamiltonian(h: &Hamiltonian, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.matrix.clone());
    let phases = eig
        .eigenvalues
        .map(|e| Complex64::from_polar(1.0, -e * t / h.hbar));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bloch_poles_and_equator() {
        assert_eq!(QubitState::from_bloch_angles(0.0, 0.0).unwrap(), QubitState::zero());
        let south = QubitState::from_bloch_angles(PI, 0.0).unwrap();
        assert_abs_diff_eq!(south.alpha().norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(south.beta().re, 1.0, epsilon = 1e-15);
        let eq = QubitState::from_bloch_angles(PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(eq.alpha().re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(eq.beta().re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn bloch_angles_out_of_range() {
        assert!(QubitState::from_bloch_angles(-0.1, 0.0).is_err());
        assert!(QubitState::from_bloch_angles(PI + 1e-9, 0.0).is_err());
        assert!(QubitState::from_bloch_angles(1.0, 2.0 * PI).is_err());
        assert!(QubitState::from_bloch_angles(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn projection_values() {
        assert_eq!(QubitState::zero().z_projection(), 1.0);
        assert_eq!(QubitState::one().z_projection(), 0.0);
        // cos(pi/3)
        let s = QubitState::from_bloch_angles(2.0 * PI / 3.0, 0.0).unwrap();
        assert_abs_diff_eq!(z_projection(&s), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn unnormalised_amplitudes_rejected() {
        assert!(QubitState::from_real(0.6, 0.8).is_ok());
        assert!(QubitState::from_real(0.6, 0.7).is_err());
    }

    #[test]
    fn classical_converter() {
        assert_eq!(classical_convert(0.0, 8).unwrap(), 255.0);
        assert_eq!(classical_convert(1.0, 1).unwrap(), 0.0);
        assert_eq!(classical_convert(100.0, 8).unwrap(), 155.0);
        assert!(classical_convert(256.0, 8).is_err());
        assert!(classical_convert(-1.0, 8).is_err());
    }

    #[test]
    fn classical_converter_is_an_involution() {
        for bits in 1..=8 {
            let unit = full_scale(bits).unwrap() as u32;
            for x in 0..=unit {
                let once = classical_convert(x as f64, bits).unwrap();
                assert_eq!(classical_convert(once, bits).unwrap(), x as f64);
            }
        }
    }

    #[test]
    fn quantum_converter() {
        let z = quantum_convert(&QubitState::zero());
        assert_eq!(z, Ket::new(ZERO, ZERO));
        let s = QubitState::with_projection(0.3).unwrap();
        let m = quantum_convert(&s);
        assert_abs_diff_eq!(m.alpha.re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(m.beta.re, -0.953_939_201_416_945_6, epsilon = 1e-12);
        // not renormalised
        assert!((m.norm_sqr() - 1.0).abs() > 0.1);
        // twice on the first component returns it
        let back = m.converted(1.0);
        assert_eq!(back.alpha.re, 1.0 - (1.0 - 0.3));
    }

    #[test]
    fn basis_states() {
        let zero = QuditVector::basis_state(8, 0).unwrap();
        assert_eq!(zero.amplitudes().len(), 256);
        assert_eq!(zero.amplitudes()[0], ONE);
        let top = QuditVector::basis_state(8, 255).unwrap();
        assert_eq!(top.amplitudes()[255], ONE);
        assert_eq!(top.amplitudes().iter().filter(|a| **a == ZERO).count(), 255);
        let one = QuditVector::basis_state(1, 1).unwrap();
        assert_eq!(one.amplitudes().as_slice(), &[ZERO, ONE]);
        assert!(QuditVector::basis_state(8, 256).is_err());
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let h = Hamiltonian::natural(DMatrix::zeros(3, 3)).unwrap();
        let u = unitary_from_hamiltonian(&h, 2.5);
        assert_abs_diff_eq!((u - DMatrix::<Complex64>::identity(3, 3)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_hamiltonian_half_period() {
        let h = Hamiltonian::natural(DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)])))
            .unwrap();
        let u = unitary_from_hamiltonian(&h, PI);
        // e^{-i pi} = e^{i pi} = -1
        let expected = -DMatrix::<Complex64>::identity(2, 2);
        assert_abs_diff_eq!((u - expected).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(Hamiltonian::natural(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn evolve_identity_and_swap() {
        let zero = QuditVector::basis_state(1, 0).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(zero.evolve(&id).unwrap(), zero);
        let x = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert_eq!(evolve(&zero, &x).unwrap(), QuditVector::basis_state(1, 1).unwrap());
    }

    #[test]
    fn evolve_rejects_bad_operators() {
        let zero = QuditVector::basis_state(1, 0).unwrap();
        let wrong_size = DMatrix::<Complex64>::identity(4, 4);
        assert!(matches!(zero.evolve(&wrong_size), Err(Error::DimensionMismatch { .. })));
        let not_unitary = DMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(zero.evolve(&not_unitary), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn gray_encoding() {
        assert_eq!(encode_gray(255, 8).unwrap(), QubitState::zero());
        let bottom = encode_gray(0, 8).unwrap();
        assert_abs_diff_eq!(bottom.z_projection(), 0.0, epsilon = 1e-15);
        let mid = encode_gray(128, 8).unwrap();
        assert_abs_diff_eq!(mid.z_projection(), 128.0 / 255.0, epsilon = 1e-12);
        assert!(encode_gray(256, 8).is_err());
    }

    #[test]
    fn gray_encoding_round_trips_every_level() {
        for bits in 1..=10 {
            let unit = full_scale(bits).unwrap() as u32;
            for g in 0..=unit {
                let s = encode_gray(g, bits).unwrap();
                assert!((s.alpha().norm_sqr() + s.beta().norm_sqr() - 1.0).abs() <= NORM_TOL);
                assert_eq!(decode_gray(&s, bits).unwrap(), g);
            }
        }
    }
}
