//! Honest party state machines for the two blind-polarization protocols.
//!
//! Protocol 1 bounces one photon Alice → Bob → Alice → Bob. Each party hides
//! the basis behind a private rotation that is undone on the photon's next
//! visit, and Alice's final quarter-turn carries the key bit.
//!
//! Protocol 2 sends two photons. Bob's shuffle bit `s` decides which photon gets
//! the +π/4 offset, Alice forwards only one (blocking factor `b`), and Bob's
//! raw outcome is the prekey bit `l = s ⊕ k ⊕ b`. After Alice announces `b`,
//! Bob recovers `k = s ⊕ b ⊕ l`.
//!
//! Every step is a separate function so the harness can hand the pulses in
//! flight to an eavesdropper between any two steps.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarization::{measure, Angle, Bit, Measurement, MeasurementBasis, PolarizationState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Protocol {
    One,
    Two,
}

impl Protocol {
    pub fn number(self) -> u8 {
        match self {
            Protocol::One => 1,
            Protocol::Two => 2,
        }
    }
}

impl From<Protocol> for u8 {
    fn from(p: Protocol) -> u8 {
        p.number()
    }
}

impl TryFrom<u8> for Protocol {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Protocol::One),
            2 => Ok(Protocol::Two),
            other => Err(format!("unknown protocol {other}, expected 1 or 2")),
        }
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| format!("unknown protocol '{s}', expected 1 or 2"))?;
        Protocol::try_from(v)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Position of a pulse within its round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Single,
    First,
    Second,
}

impl Slot {
    /// Which protocol-2 pulse Alice lets through: `b = 0` forwards the first.
    pub fn transmitted(b: Bit) -> Slot {
        if b.is_one() {
            Slot::Second
        } else {
            Slot::First
        }
    }
}

/// A photon crossing the channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub id: u64,
    pub slot: Slot,
    pub state: PolarizationState,
}

impl Pulse {
    pub fn rotated(self, delta: Angle) -> Pulse {
        Pulse {
            state: self.state.rotate(delta),
            ..self
        }
    }
}

/// Alice's public statement of which protocol-2 pulse she forwarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub round: u64,
    pub b: Bit,
}

/// How a party draws its private angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AngleSource {
    /// Uniform on `[0, 2π)`.
    #[default]
    Continuous,
    /// Uniform over the multiples `jπ/K`, `j = 0..2K`.
    Grid(u32),
}

impl AngleSource {
    pub const DEFAULT_GRID: u32 = 8;

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Angle {
        match self {
            AngleSource::Continuous => {
                let x: f64 = rng.random::<f64>() * TAU;
                Angle::new(x).expect("finite draw")
            }
            AngleSource::Grid(k) => {
                let j = rng.random_range(0..2 * k);
                Angle::pi_fraction(j as i64, k as i64)
            }
        }
    }

    /// All grid points in `[0, 2π)`, or `None` for the continuous source.
    pub fn grid_points(self) -> Option<Vec<Angle>> {
        match self {
            AngleSource::Continuous => None,
            AngleSource::Grid(k) => Some(grid_points(k)),
        }
    }
}

pub fn grid_points(k: u32) -> Vec<Angle> {
    (0..2 * k as i64)
        .map(|j| Angle::pi_fraction(j, k as i64))
        .collect()
}

impl fmt::Display for AngleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleSource::Continuous => write!(f, "continuous"),
            AngleSource::Grid(k) => write!(f, "grid:{k}"),
        }
    }
}

impl FromStr for AngleSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "continuous" {
            return Ok(AngleSource::Continuous);
        }
        let k = s.strip_prefix("grid:").ok_or_else(|| {
            format!("invalid angle mode '{s}', expected 'continuous' or 'grid:K'")
        })?;
        let k: u32 = k.parse().map_err(|_| format!("invalid grid size '{k}'"))?;
        if k < 2 {
            return Err(format!("grid size must be at least 2, got {k}"));
        }
        Ok(AngleSource::Grid(k))
    }
}

impl Serialize for AngleSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AngleSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which computational-basis vector Bob calls `l = 0` in protocol 2.
///
/// The identity `l = s ⊕ k ⊕ b` fixes this once the blocking convention is
/// chosen; see [`crate::conventions`] for the derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeOrientation {
    /// `l = 0` on `|0⟩`.
    Direct,
    /// `l = 0` on `|1⟩`.
    Inverted,
}

impl OutcomeOrientation {
    pub const ALL: [OutcomeOrientation; 2] =
        [OutcomeOrientation::Direct, OutcomeOrientation::Inverted];

    /// Map a raw computational-basis outcome to the prekey label.
    pub fn label(self, outcome: Bit) -> Bit {
        match self {
            OutcomeOrientation::Direct => outcome,
            OutcomeOrientation::Inverted => !outcome,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum ProtocolError {
    #[error("{party} expected a {slot:?} pulse on leg {leg} but none arrived")]
    MissingPulse {
        party: &'static str,
        leg: u8,
        slot: Slot,
    },
    #[error("{party} expected {expected} pulse(s) on leg {leg}, got {got}")]
    PulseCount {
        party: &'static str,
        leg: u8,
        expected: usize,
        got: usize,
    },
}

/// Take exactly one pulse with the given slot out of a delivery.
pub(crate) fn take_slot(
    pulses: &[Pulse],
    slot: Slot,
    party: &'static str,
    leg: u8,
) -> Result<Pulse, ProtocolError> {
    pulses
        .iter()
        .copied()
        .find(|p| p.slot == slot)
        .ok_or(ProtocolError::MissingPulse { party, leg, slot })
}

/// Take the single pulse of a one-photon leg.
pub(crate) fn take_single(
    pulses: &[Pulse],
    party: &'static str,
    leg: u8,
) -> Result<Pulse, ProtocolError> {
    match pulses {
        [p] => Ok(*p),
        _ => Err(ProtocolError::PulseCount {
            party,
            leg,
            expected: 1,
            got: pulses.len(),
        }),
    }
}

/// Alice's private state in protocol 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1AliceState {
    pub theta: Angle,
    pub k: Bit,
}

impl P1AliceState {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, angles: AngleSource) -> Self {
        let theta = angles.sample(rng);
        let k = Bit::random(rng);
        P1AliceState { theta, k }
    }

    /// Prepare `|0⟩` and rotate it by θ.
    pub fn prepare(&self, id: u64) -> Pulse {
        Pulse {
            id,
            slot: Slot::Single,
            state: PolarizationState::ZERO.rotate(self.theta),
        }
    }

    /// Undo θ, then encode the key as `+π/4` for 0 or `−π/4` for 1.
    pub fn encode(&self, pulse: Pulse) -> Pulse {
        pulse
            .rotated(-self.theta)
            .rotated(Angle::signed_quarter(self.k))
    }
}

/// Bob's private state in protocol 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1BobState {
    pub phi: Angle,
}

impl P1BobState {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, angles: AngleSource) -> Self {
        P1BobState {
            phi: angles.sample(rng),
        }
    }

    pub fn rotate(&self, pulse: Pulse) -> Pulse {
        pulse.rotated(self.phi)
    }

    /// Undo φ and read the key in the ±π/4 basis (outcome 0 on +π/4, i.e. k = 0).
    pub fn decode<R: Rng + ?Sized>(&self, pulse: Pulse, rng: &mut R) -> Measurement {
        let state = pulse.state.rotate(-self.phi);
        measure(state, MeasurementBasis::diagonal(), rng)
    }
}

/// Alice's private state in protocol 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P2AliceState {
    pub theta1: Angle,
    pub theta2: Angle,
    pub k: Bit,
    pub b: Bit,
}

impl P2AliceState {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, angles: AngleSource) -> Self {
        let theta1 = angles.sample(rng);
        let theta2 = angles.sample(rng);
        let k = Bit::random(rng);
        let b = Bit::random(rng);
        P2AliceState {
            theta1,
            theta2,
            k,
            b,
        }
    }

    pub fn prepare(&self, id: u64) -> [Pulse; 2] {
        [
            Pulse {
                id,
                slot: Slot::First,
                state: PolarizationState::ZERO.rotate(self.theta1),
            },
            Pulse {
                id,
                slot: Slot::Second,
                state: PolarizationState::ZERO.rotate(self.theta2),
            },
        ]
    }

    /// Rotate pulse `i` by `−θᵢ + (−1)^k·π/4` and forward only the one selected by `b`.
    pub fn encode_block(&self, returned: &[Pulse]) -> Result<Pulse, ProtocolError> {
        let first = take_slot(returned, Slot::First, "alice", 2)?;
        let second = take_slot(returned, Slot::Second, "alice", 2)?;
        let key_turn = Angle::signed_quarter(self.k);
        let first = first.rotated(-self.theta1).rotated(key_turn);
        let second = second.rotated(-self.theta2).rotated(key_turn);
        Ok(match Slot::transmitted(self.b) {
            Slot::Second => second,
            _ => first,
        })
    }

    pub fn announce(&self, round: u64) -> Announcement {
        Announcement { round, b: self.b }
    }
}

/// Bob's private state in protocol 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P2BobState {
    pub phi: Angle,
    pub s: Bit,
}

impl P2BobState {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, angles: AngleSource) -> Self {
        let phi = angles.sample(rng);
        let s = Bit::random(rng);
        P2BobState { phi, s }
    }

    /// First pulse by `φ + (−1)^s·π/4`, second by `φ + (−1)^(s⊕1)·π/4`.
    pub fn shuffle(&self, first: Pulse, second: Pulse) -> (Pulse, Pulse) {
        (
            first.rotated(self.phi + Angle::signed_quarter(self.s)),
            second.rotated(self.phi + Angle::signed_quarter(!self.s)),
        )
    }

    /// Undo φ and measure in the computational basis. Returns the prekey bit `l`.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        pulse: Pulse,
        orientation: OutcomeOrientation,
        rng: &mut R,
    ) -> (Bit, Measurement) {
        prekey_measure(pulse.state.rotate(-self.phi), orientation, rng)
    }
}

/// Computational-basis measurement labelled with the protocol-2 prekey orientation.
pub fn prekey_measure<R: Rng + ?Sized>(
    state: PolarizationState,
    orientation: OutcomeOrientation,
    rng: &mut R,
) -> (Bit, Measurement) {
    let m = measure(state, MeasurementBasis::computational(), rng);
    (orientation.label(m.outcome), m)
}

/// `k = s ⊕ b ⊕ l`
pub fn p2_decode(s: Bit, b: Bit, l: Bit) -> Bit {
    s ^ b ^ l
}

/// Everything one round produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub protocol: Protocol,
    pub k_alice: Bit,
    /// `None` when the round aborted.
    pub k_bob: Option<Bit>,
    /// θ for protocol 1, (θ₁, θ₂) for protocol 2.
    pub theta: Vec<Angle>,
    pub phi: Angle,
    pub s: Option<Bit>,
    pub b: Option<Bit>,
    pub l: Option<Bit>,
    pub eve_guess: Option<Bit>,
    pub eve_active: bool,
    /// Bob's final measurement needed a random draw.
    pub bob_measurement_random: bool,
    pub aborted: Option<ProtocolError>,
}

impl RoundRecord {
    pub fn is_completed(&self) -> bool {
        self.k_bob.is_some()
    }

    /// `Some(true)` when Bob's key bit differs from Alice's.
    pub fn is_error(&self) -> Option<bool> {
        self.k_bob.map(|k| k != self.k_alice)
    }
}
