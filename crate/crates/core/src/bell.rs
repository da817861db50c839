//! Two-qubit state algebra for the dialogue protocol.
//!
//! Every state is a pair `(h, t)`: the home qubit `h` stays with Bob, the
//! travel qubit `t` goes to Alice and back. Amplitudes are stored in the
//! order `|00⟩, |01⟩, |10⟩, |11⟩` with the home qubit as the first ket.
//!
//! The four encoding operators are the dense-coding dictionary
//!
//! ```text
//! U00 = I    U01 = σx    U10 = iσy    U11 = σz
//! ```
//!
//! and the Bell basis is generated from `ψ00 = (|01⟩ + |10⟩)/√2` by encoding
//! on the travel qubit: `ψ_{x,y} = (I ⊗ U_{x,y}) ψ00`. With that convention
//! `U_{i,j}` applied to the travel qubit of `ψ_{k,l}` yields `ψ_{i⊕k, j⊕l}`
//! up to a sign, which is what makes the XOR decoding rules work.

use std::fmt;
use std::ops::{BitXor, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RandomStream;

/// Tolerance used for state comparisons.
pub const STATE_TOLERANCE: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellError {
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("invalid two-bit label {0:?}")]
    InvalidLabel(String),
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
}

fn check_bit(b: u8) -> Result<bool, BellError> {
    match b {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(BellError::InvalidBit(other)),
    }
}

fn parse_label(s: &str) -> Result<u8, BellError> {
    let bytes = s.as_bytes();
    if bytes.len() != 2 {
        return Err(BellError::InvalidLabel(s.to_owned()));
    }
    let bit = |c: u8| match c {
        b'0' => Ok(0u8),
        b'1' => Ok(1u8),
        _ => Err(BellError::InvalidLabel(s.to_owned())),
    };
    Ok((bit(bytes[0])? << 1) | bit(bytes[1])?)
}

macro_rules! two_bit_label {
    ($name:ident, $hi:ident, $lo:ident) => {
        impl $name {
            /// All four values, in index order `00, 01, 10, 11`.
            pub const ALL: [$name; 4] = [$name(0), $name(1), $name(2), $name(3)];

            pub fn new($hi: u8, $lo: u8) -> Result<Self, BellError> {
                Ok(Self::from_bools(check_bit($hi)?, check_bit($lo)?))
            }

            pub const fn from_bools($hi: bool, $lo: bool) -> Self {
                $name((($hi as u8) << 1) | $lo as u8)
            }

            /// `index = 2·hi + lo`, in `0..4`.
            pub fn from_index(index: usize) -> Self {
                assert!(index < 4, "two-bit index out of range: {index}");
                $name(index as u8)
            }

            pub const fn index(self) -> usize {
                self.0 as usize
            }

            pub const fn $hi(self) -> u8 {
                self.0 >> 1
            }

            pub const fn $lo(self) -> u8 {
                self.0 & 1
            }
        }

        impl BitXor for $name {
            type Output = $name;

            fn bitxor(self, rhs: $name) -> $name {
                $name(self.0 ^ rhs.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", self.$hi(), self.$lo())
            }
        }

        impl std::str::FromStr for $name {
            type Err = BellError;

            fn from_str(s: &str) -> Result<Self, BellError> {
                parse_label(s).map($name)
            }
        }

        impl TryFrom<String> for $name {
            type Error = BellError;

            fn try_from(s: String) -> Result<Self, BellError> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.to_string()
            }
        }
    };
}

/// Two classical bits `(k, l)` selecting the encoding operator `U_{k,l}`.
///
/// Alice's `(i, j)` and Eve's `(k', l')` are values of this type as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliCode(u8);

two_bit_label!(PauliCode, k, l);

impl PauliCode {
    pub const IDENTITY: PauliCode = PauliCode(0b00);
    pub const X: PauliCode = PauliCode(0b01);
    /// `iσy`.
    pub const IY: PauliCode = PauliCode(0b10);
    pub const Z: PauliCode = PauliCode(0b11);

    /// The 2×2 matrix of `U_{k,l}`, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self.0 {
            0b00 => [[one, z], [z, one]],
            0b01 => [[z, one], [one, z]],
            0b10 => [[z, one], [-one, z]],
            _ => [[one, z], [z, -one]],
        }
    }
}

/// Bell-measurement outcome `(x, y)`, i.e. the label of `ψ_{x,y}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BellIndex(u8);

two_bit_label!(BellIndex, x, y);

impl From<PauliCode> for BellIndex {
    fn from(code: PauliCode) -> Self {
        BellIndex(code.0)
    }
}

impl From<BellIndex> for PauliCode {
    fn from(idx: BellIndex) -> Self {
        PauliCode(idx.0)
    }
}

/// A unit phase: one of `+1, −1, +i, −i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl Phase {
    // powers of i
    fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_exponent(e: u8) -> Phase {
        match e % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    // powers of i add
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

/// An encoding operator together with an exact global phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub code: PauliCode,
    pub phase: Phase,
}

impl PhasedPauli {
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let p = self.phase.to_complex();
        self.code.matrix().map(|row| row.map(|e| e * p))
    }
}

impl Mul for PhasedPauli {
    type Output = PhasedPauli;

    fn mul(self, rhs: PhasedPauli) -> PhasedPauli {
        let product = compose(self.code, rhs.code);
        PhasedPauli {
            code: product.code,
            phase: self.phase * rhs.phase * product.phase,
        }
    }
}

/// Product `outer · inner` of two encoding operators.
///
/// Writing `U_{k,l} = Z^k X^{k⊕l}`, moving the inner `Z` past the outer `X`
/// costs a sign, so the phase is `−1` exactly when the outer operator has an
/// `X` factor and the inner one has a `Z` factor.
pub fn compose(outer: PauliCode, inner: PauliCode) -> PhasedPauli {
    let outer_x = outer.k() ^ outer.l();
    let inner_z = inner.k();
    PhasedPauli {
        code: outer ^ inner,
        phase: if outer_x & inner_z == 1 {
            Phase::MinusOne
        } else {
            Phase::PlusOne
        },
    }
}

/// Recovers the partner's code from a Bell outcome and one's own code.
///
/// On single bits `|x − k|` is `x ⊕ k`.
pub fn decode_bits(outcome: BellIndex, own: PauliCode) -> PauliCode {
    PauliCode::from(outcome) ^ own
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Home,
    Travel,
}

/// Pure state of a (home, travel) qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    /// Builds a state, rejecting non-finite or non-normalized amplitudes.
    pub fn new(amps: [Complex64; 4]) -> Result<Self, BellError> {
        if let Some(index) = amps
            .iter()
            .position(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(BellError::NonFinite { index });
        }
        let state = TwoQubitState { amps };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > STATE_TOLERANCE {
            return Err(BellError::NotNormalized(n));
        }
        Ok(state)
    }

    /// Computational basis state `|home travel⟩`.
    pub fn basis(home: u8, travel: u8) -> Result<Self, BellError> {
        let idx = ((check_bit(home)? as usize) << 1) | check_bit(travel)? as usize;
        let mut amps = [Complex64::new(0.0, 0.0); 4];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(TwoQubitState { amps })
    }

    pub fn amps(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Equality up to a global phase: `|⟨self|other⟩| = 1` within `tol`.
    pub fn approx_eq_up_to_phase(&self, other: &TwoQubitState, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }

    /// Born probabilities of the four Bell outcomes, indexed by `BellIndex::index`.
    pub fn bell_probabilities(&self) -> [f64; 4] {
        BellIndex::ALL.map(|idx| bell_state(idx).inner(self).norm_sqr())
    }

    /// Probability that `target` reads 1 in the computational basis.
    pub fn prob_one(&self, target: Qubit) -> f64 {
        (0..4)
            .filter(|&i| bit_of(i, target) == 1)
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    /// Bit-exact fingerprint of the amplitudes, for trace comparisons.
    pub fn to_bits(&self) -> [u64; 8] {
        let mut out = [0u64; 8];
        for (i, a) in self.amps.iter().enumerate() {
            out[2 * i] = a.re.to_bits();
            out[2 * i + 1] = a.im.to_bits();
        }
        out
    }
}

fn bit_of(basis_index: usize, target: Qubit) -> u8 {
    match target {
        Qubit::Home => (basis_index >> 1) as u8 & 1,
        Qubit::Travel => basis_index as u8 & 1,
    }
}

/// `ψ00 = (|01⟩ + |10⟩)/√2`, the state Bob prepares every round.
pub fn psi00() -> TwoQubitState {
    let z = Complex64::new(0.0, 0.0);
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    TwoQubitState { amps: [z, s, s, z] }
}

/// `ψ_{x,y} = (I ⊗ U_{x,y}) ψ00`.
pub fn bell_state(idx: BellIndex) -> TwoQubitState {
    apply_pauli(&psi00(), PauliCode::from(idx), Qubit::Travel)
}

/// Applies `U_code` to one qubit of the pair.
pub fn apply_pauli(state: &TwoQubitState, code: PauliCode, target: Qubit) -> TwoQubitState {
    let m = code.matrix();
    let a = &state.amps;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    match target {
        Qubit::Travel => {
            for h in 0..2 {
                for t_out in 0..2 {
                    out[2 * h + t_out] = m[t_out][0] * a[2 * h] + m[t_out][1] * a[2 * h + 1];
                }
            }
        }
        Qubit::Home => {
            for t in 0..2 {
                for h_out in 0..2 {
                    out[2 * h_out + t] = m[h_out][0] * a[t] + m[h_out][1] * a[2 + t];
                }
            }
        }
    }
    TwoQubitState { amps: out }
}

/// Projective Bell measurement; the post-measurement state is `ψ_outcome`.
pub fn bell_measure(state: &TwoQubitState, rng: &mut RandomStream) -> (BellIndex, TwoQubitState) {
    let probs = state.bell_probabilities();
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= STATE_TOLERANCE);
    let idx = BellIndex::from_index(rng.sample_index(&probs));
    (idx, bell_state(idx))
}

/// Computational-basis measurement of one qubit with renormalized collapse.
pub fn measure_computational(
    state: &TwoQubitState,
    target: Qubit,
    rng: &mut RandomStream,
) -> (u8, TwoQubitState) {
    let p1 = state.prob_one(target);
    let bit = rng.sample_index(&[1.0 - p1, p1]) as u8;
    let p = if bit == 1 { p1 } else { 1.0 - p1 };
    let scale = 1.0 / p.sqrt();
    let mut amps = state.amps;
    for (i, a) in amps.iter_mut().enumerate() {
        *a = if bit_of(i, target) == bit {
            *a * scale
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    (bit, TwoQubitState { amps })
}
