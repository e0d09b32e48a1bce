//! Ordering, logic and arithmetic on z projections.
//!
//! States are ordered by `mu = 1 - z_projection`: the north pole `|0>` has
//! key 0 and the south pole `|1>` key 1. AND picks the operand with the
//! smaller key, OR the larger one, so on keys they behave exactly like the
//! fuzzy-logic min/max pair. Ties always resolve to the left operand.
//!
//! Arithmetic works on [`Ket`] operands in one of two domains. In the
//! [`Domain::Psi`] domain the amplitudes are combined as they are; in the
//! [`Domain::Mu`] domain every operand is first passed through the quantum
//! converter `unit * |0> - |psi>`. Only the first component of a result is
//! meaningful to consumers ([`pao_first`]).

use num_complex::Complex64;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::qstate::{full_scale, Ket, QubitState};

/// Ordering key `mu = 1 - z_projection` of a state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PaoKey(pub f64);

impl PaoKey {
    pub fn of(s: &QubitState) -> Self {
        PaoKey(1.0 - s.z_projection())
    }

    pub fn mu(self) -> f64 {
        self.0
    }
}

/// Swaps the amplitudes, `(alpha, beta) -> (beta, alpha)`.
pub fn pao_not(s: &QubitState) -> QubitState {
    s.swapped()
}

fn pick<'a>(a: &'a QubitState, b: &'a QubitState, want: Ordering) -> &'a QubitState {
    match PaoKey::of(b).partial_cmp(&PaoKey::of(a)) {
        Some(o) if o == want => b,
        _ => a,
    }
}

/// Minimum under the key order.
pub fn pao_and(a: &QubitState, b: &QubitState) -> QubitState {
    *pick(a, b, Ordering::Less)
}

/// Maximum under the key order.
pub fn pao_or(a: &QubitState, b: &QubitState) -> QubitState {
    *pick(a, b, Ordering::Greater)
}

/// `(a AND NOT b) OR (NOT a AND b)`.
pub fn pao_xor(a: &QubitState, b: &QubitState) -> QubitState {
    let left = pao_and(a, &pao_not(b));
    let right = pao_and(&pao_not(a), b);
    pao_or(&left, &right)
}

/// Arithmetic domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Amplitudes are used directly.
    Psi,
    /// Each operand is replaced by its converted form `unit * |0> - |psi>`.
    Mu,
}

/// Result of an arithmetic operation: two components for sums and
/// differences, four for products and quotients. Never renormalised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithVector {
    Pair([Complex64; 2]),
    Quad([Complex64; 4]),
}

impl ArithVector {
    pub fn components(&self) -> &[Complex64] {
        match self {
            ArithVector::Pair(c) => c,
            ArithVector::Quad(c) => c,
        }
    }

    pub fn len(&self) -> usize {
        self.components().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Real part of component 0.
    pub fn first(&self) -> f64 {
        self.components()[0].re
    }

    /// Reinterprets a two-component result as an operand for further
    /// arithmetic. Four-component results keep their first and third
    /// components, the `alpha`-weighted pair.
    pub fn as_ket(&self) -> Ket {
        match self {
            ArithVector::Pair([a, b]) => Ket::new(*a, *b),
            ArithVector::Quad([a, _, c, _]) => Ket::new(*a, *c),
        }
    }
}

/// First component of an arithmetic result, the only part consumers read.
pub fn pao_first(v: &ArithVector) -> f64 {
    v.first()
}

/// Complex quotient; real divisors divide each part directly so that real
/// operands give correctly rounded results.
fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 {
        Complex64::new(a.re / b.re, a.im / b.re)
    } else {
        a / b
    }
}

/// Projection arithmetic on a scale where `|0>` has first component `unit`.
///
/// `unit = 1` is the single-qubit case; `unit = 2^B - 1` operates directly on
/// level-scaled operands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaoArithmetic {
    unit: f64,
}

impl PaoArithmetic {
    pub fn qubit() -> Self {
        Self { unit: 1.0 }
    }

    pub fn levels(bits: u32) -> Result<Self> {
        Ok(Self { unit: full_scale(bits)? })
    }

    pub fn with_unit(unit: f64) -> Self {
        Self { unit }
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    fn lift(&self, k: &Ket, domain: Domain) -> Ket {
        match domain {
            Domain::Psi => *k,
            Domain::Mu => k.converted(self.unit),
        }
    }

    /// A constant operand whose first component reads as `value` in `domain`.
    pub fn constant(&self, value: f64, domain: Domain) -> Ket {
        match domain {
            Domain::Psi => Ket::real(value, 1.0),
            Domain::Mu => Ket::real(self.unit - value, -1.0),
        }
    }

    pub fn add(&self, a: &Ket, b: &Ket, domain: Domain) -> ArithVector {
        let (a, b) = (self.lift(a, domain), self.lift(b, domain));
        ArithVector::Pair([a.alpha + b.alpha, a.beta + b.beta])
    }

    pub fn sub(&self, a: &Ket, b: &Ket, domain: Domain) -> ArithVector {
        let (a, b) = (self.lift(a, domain), self.lift(b, domain));
        ArithVector::Pair([a.alpha - b.alpha, a.beta - b.beta])
    }

    pub fn mul(&self, a: &Ket, b: &Ket, domain: Domain) -> ArithVector {
        let (a, b) = (self.lift(a, domain), self.lift(b, domain));
        ArithVector::Quad([a.alpha * b.alpha, a.beta * b.alpha, a.alpha * b.beta, a.beta * b.beta])
    }

    /// Componentwise quotient; fails on the first zero denominator.
    pub fn div(&self, a: &Ket, b: &Ket, domain: Domain) -> Result<ArithVector> {
        let (a, b) = (self.lift(a, domain), self.lift(b, domain));
        if b.alpha == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero { component: 0 });
        }
        if b.beta == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero { component: 2 });
        }
        Ok(ArithVector::Quad([cdiv(a.alpha, b.alpha), cdiv(a.beta, b.alpha), cdiv(a.alpha, b.beta), cdiv(a.beta, b.beta)]))
    }

    /// Only component 0 of the quotient, which needs only `alpha_b != 0`.
    pub fn div_first(&self, a: &Ket, b: &Ket, domain: Domain) -> Result<f64> {
        let (a, b) = (self.lift(a, domain), self.lift(b, domain));
        if b.alpha == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero { component: 0 });
        }
        Ok(cdiv(a.alpha, b.alpha).re)
    }

    /// n-ary addition. In the `Mu` domain the constant becomes `n * unit`.
    pub fn sum(&self, operands: &[Ket], domain: Domain) -> ArithVector {
        let zero = Complex64::new(0.0, 0.0);
        let (a, b) = operands.iter().fold((zero, zero), |(a, b), k| {
            let k = self.lift(k, domain);
            (a + k.alpha, b + k.beta)
        });
        ArithVector::Pair([a, b])
    }
}

/// Qubit-scale addition.
pub fn q_add(a: &QubitState, b: &QubitState, domain: Domain) -> ArithVector {
    PaoArithmetic::qubit().add(&a.ket(), &b.ket(), domain)
}

/// Qubit-scale subtraction.
pub fn q_sub(a: &QubitState, b: &QubitState, domain: Domain) -> ArithVector {
    PaoArithmetic::qubit().sub(&a.ket(), &b.ket(), domain)
}

/// Qubit-scale (tensor-style) multiplication.
pub fn q_mul(a: &QubitState, b: &QubitState, domain: Domain) -> ArithVector {
    PaoArithmetic::qubit().mul(&a.ket(), &b.ket(), domain)
}

/// Qubit-scale componentwise division.
pub fn q_div(a: &QubitState, b: &QubitState, domain: Domain) -> Result<ArithVector> {
    PaoArithmetic::qubit().div(&a.ket(), &b.ket(), domain)
}
