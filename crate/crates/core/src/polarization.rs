//! Exact algebra of linearly polarized single-photon qubits.
//!
//! A state is a single real angle `a` standing for `cos(a)|0⟩ − sin(a)|1⟩`.
//! Rotations add angles, and two states whose angles differ by π are the same
//! physical state (global phase −1). Measurement follows the Born rule in a
//! basis given by its outcome-0 vector.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::ops::{Add, BitXor, Neg, Not, Sub};

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Two states are the same physical state when their angles agree mod π within this.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// Born probabilities this close to 0 or 1 are treated as certain.
pub const DETERMINISM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarizationError {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("bit value must be 0 or 1, got {0}")]
    InvalidBit(u8),
}

/// A rotation or polarization angle, canonical in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const QUARTER_PI: Angle = Angle(FRAC_PI_4);
    pub const HALF_PI: Angle = Angle(FRAC_PI_2);
    pub const PI: Angle = Angle(PI);

    pub fn new(radians: f64) -> Result<Self, PolarizationError> {
        canonicalize(radians)
    }

    /// `numerator · π / denominator`, canonicalized. `denominator` must be nonzero.
    pub fn pi_fraction(numerator: i64, denominator: i64) -> Self {
        assert!(denominator != 0, "pi_fraction with zero denominator");
        Self::wrap(numerator as f64 * PI / denominator as f64)
    }

    /// `(−1)^bit · π/4`, the quarter-turn used for key and shuffle encodings.
    pub fn signed_quarter(bit: Bit) -> Self {
        Self::wrap(bit.sign() * FRAC_PI_4)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    // Callers guarantee `x` is finite.
    fn wrap(x: f64) -> Self {
        debug_assert!(x.is_finite());
        let r = x.rem_euclid(TAU);
        // rem_euclid rounds tiny negatives up to exactly 2π
        Angle(if r >= TAU { 0.0 } else { r })
    }

    /// Distance to `other` modulo π, in `[0, π/2]`.
    pub fn distance_mod_pi(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).rem_euclid(PI);
        d.min(PI - d)
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::wrap(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::wrap(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::wrap(-self.0)
    }
}

impl TryFrom<f64> for Angle {
    type Error = PolarizationError;
    fn try_from(x: f64) -> Result<Self, Self::Error> {
        canonicalize(x)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        canonicalize(x).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reduce a real angle into `[0, 2π)`.
pub fn canonicalize(x: f64) -> Result<Angle, PolarizationError> {
    if !x.is_finite() {
        return Err(PolarizationError::NonFiniteAngle(x));
    }
    Ok(Angle::wrap(x))
}

/// A classical bit with addition modulo 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bit(bool);

impl Bit {
    pub const ZERO: Bit = Bit(false);
    pub const ONE: Bit = Bit(true);
    pub const BOTH: [Bit; 2] = [Bit::ZERO, Bit::ONE];

    pub fn new(value: u8) -> Result<Self, PolarizationError> {
        match value {
            0 => Ok(Bit::ZERO),
            1 => Ok(Bit::ONE),
            v => Err(PolarizationError::InvalidBit(v)),
        }
    }

    pub const fn from_bool(b: bool) -> Self {
        Bit(b)
    }

    pub const fn value(self) -> u8 {
        self.0 as u8
    }

    pub const fn is_one(self) -> bool {
        self.0
    }

    /// `(−1)^bit`
    pub fn sign(self) -> f64 {
        if self.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Bit(rng.random::<bool>())
    }
}

impl BitXor for Bit {
    type Output = Bit;
    fn bitxor(self, rhs: Bit) -> Bit {
        Bit(self.0 ^ rhs.0)
    }
}

impl Not for Bit {
    type Output = Bit;
    fn not(self) -> Bit {
        Bit(!self.0)
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        Bit(b)
    }
}

impl TryFrom<u8> for Bit {
    type Error = PolarizationError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Bit::new(v)
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.value())
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Bit::new(v).map_err(serde::de::Error::custom)
    }
}

/// The linear polarization state `cos(a)|0⟩ − sin(a)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarizationState {
    angle: Angle,
}

impl PolarizationState {
    /// `|0⟩`
    pub const ZERO: PolarizationState = PolarizationState { angle: Angle::ZERO };
    /// `|1⟩`, represented by `−|1⟩` at angle π/2.
    pub const ONE: PolarizationState = PolarizationState {
        angle: Angle::HALF_PI,
    };

    pub const fn new(angle: Angle) -> Self {
        PolarizationState { angle }
    }

    /// The computational basis state `|bit⟩`.
    pub fn basis_state(bit: Bit) -> Self {
        if bit.is_one() {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn angle(self) -> Angle {
        self.angle
    }

    /// Amplitudes on `|0⟩` and `|1⟩`.
    pub fn amplitudes(self) -> (f64, f64) {
        let a = self.angle.radians();
        (a.cos(), -a.sin())
    }

    pub fn rotate(self, delta: Angle) -> Self {
        PolarizationState {
            angle: self.angle + delta,
        }
    }

    /// Swap `|0⟩` and `|1⟩` by a quarter-turn rotation.
    ///
    /// Being a rotation, this commutes with every other rotation applied to the
    /// photon, which is what lets a stored photon be flipped after someone else
    /// has rotated it by an unknown angle.
    pub fn flip(self) -> Self {
        self.rotate(Angle::HALF_PI)
    }

    /// Swap the two amplitudes: `α|0⟩ + β|1⟩ ↦ β|0⟩ + α|1⟩`.
    ///
    /// This is a reflection, not a rotation, so it does not commute with
    /// rotations. It exists as the wrong reading of "flip" for negative controls.
    pub fn reflect_swap(self) -> Self {
        // cos(a')|0> - sin(a')|1> = -sin(a)|0> + cos(a)|1>  =>  a' = -a - π/2
        PolarizationState {
            angle: -self.angle - Angle::HALF_PI,
        }
    }

    /// Same physical state: angles equal modulo π within [`EQUIVALENCE_TOLERANCE`].
    pub fn equivalent(self, other: PolarizationState) -> bool {
        self.angle.distance_mod_pi(other.angle) < EQUIVALENCE_TOLERANCE
    }
}

/// Orthonormal measurement basis with outcome-0 vector at `beta` and
/// outcome-1 vector at `beta + π/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    beta: Angle,
}

impl MeasurementBasis {
    pub const fn new(beta: Angle) -> Self {
        MeasurementBasis { beta }
    }

    /// `{|0⟩, |1⟩}`
    pub const fn computational() -> Self {
        MeasurementBasis { beta: Angle::ZERO }
    }

    /// The ±π/4 basis with outcome 0 on the +π/4 vector.
    pub const fn diagonal() -> Self {
        MeasurementBasis {
            beta: Angle::QUARTER_PI,
        }
    }

    pub fn beta(self) -> Angle {
        self.beta
    }

    pub fn vector(self, outcome: Bit) -> PolarizationState {
        let angle = if outcome.is_one() {
            self.beta + Angle::HALF_PI
        } else {
            self.beta
        };
        PolarizationState::new(angle)
    }
}

/// Probability of outcome 0: `cos²(a − β)`.
pub fn born_probability(state: PolarizationState, basis: MeasurementBasis) -> f64 {
    let c = (state.angle.radians() - basis.beta.radians()).cos();
    (c * c).clamp(0.0, 1.0)
}

/// Result of one projective measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub outcome: Bit,
    pub post_state: PolarizationState,
    /// True when a random draw decided the outcome.
    pub random: bool,
}

/// Projective measurement. Consumes one uniform draw from `rng` unless the
/// outcome is certain within [`DETERMINISM_TOLERANCE`].
pub fn measure<R: Rng + ?Sized>(
    state: PolarizationState,
    basis: MeasurementBasis,
    rng: &mut R,
) -> Measurement {
    let p0 = born_probability(state, basis);
    let (outcome, random) = if p0 >= 1.0 - DETERMINISM_TOLERANCE {
        (Bit::ZERO, false)
    } else if p0 <= DETERMINISM_TOLERANCE {
        (Bit::ONE, false)
    } else {
        let u: f64 = rng.random();
        (Bit::from_bool(u >= p0), true)
    };
    Measurement {
        outcome,
        post_state: basis.vector(outcome),
        random,
    }
}
