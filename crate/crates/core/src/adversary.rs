//! Eavesdropper strategies.
//!
//! A strategy sits on the channel and sees every leg of a round: Alice → Bob,
//! Bob → Alice, the final Alice → Bob photon, and for protocol 2 the public
//! announcement. It only ever receives messages; party secrets stay with the
//! parties.
//!
//! The impersonation strategies run the protocol separately with each party
//! and splice the two sessions. Against protocol 1 Eve returns Alice's own
//! photon unrotated, so Alice's encoded photon arrives at exactly ±π/4 and can
//! be read with certainty. Against protocol 2 Eve plays Bob with `s' = 0` and
//! learns `k ⊕ b`, then the announcement gives her `k`.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarization::{measure, Angle, Bit, MeasurementBasis, PolarizationState};
use crate::protocol::{
    prekey_measure, take_single, take_slot, AngleSource, Announcement, OutcomeOrientation,
    ProtocolError, Pulse, Slot,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error(transparent)]
    Delivery(#[from] ProtocolError),
    #[error("intercepted pulse on leg {leg} is not deterministic in eve's basis (p0 = {probability}); harness bug")]
    NonDeterministicIntercept { leg: u8, probability: f64 },
    #[error("hook called out of order: {0}")]
    OutOfOrder(&'static str),
    #[error("protocol-2 key guess needs the blocking announcement")]
    MissingAnnouncement,
}

/// The eavesdropper contract: one hook per channel leg plus the end-of-round guess.
///
/// Hooks are called in order `tap_leg1`, `tap_leg2`, `tap_leg3`,
/// `on_announcement` within a round. A strategy may keep pulses between hooks.
/// Returning fewer pulses than it received drops them, which aborts the round.
pub trait EveStrategy: Send {
    fn name(&self) -> &'static str;

    /// Whether this strategy interferes at all. Passive taps report `false`.
    fn is_active(&self) -> bool {
        true
    }

    /// Alice → Bob. Returns what Bob receives.
    fn tap_leg1(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError>;

    /// Bob → Alice. Returns what Alice receives.
    fn tap_leg2(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError>;

    /// Final Alice → Bob leg. Returns what Bob receives.
    fn tap_leg3(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError>;

    /// End of round. `announcement` is present for protocol 2. Returns Eve's key guess, if any.
    fn on_announcement(
        &mut self,
        announcement: Option<&Announcement>,
    ) -> Result<Option<Bit>, AdversaryError>;
}

/// Forwards everything untouched and guesses nothing.
#[derive(Debug, Default, Clone)]
pub struct Passive;

impl EveStrategy for Passive {
    fn name(&self) -> &'static str {
        "passive"
    }

    fn is_active(&self) -> bool {
        false
    }

    fn tap_leg1(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(pulses)
    }

    fn tap_leg2(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(pulses)
    }

    fn tap_leg3(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(pulses)
    }

    fn on_announcement(&mut self, _: Option<&Announcement>) -> Result<Option<Bit>, AdversaryError> {
        Ok(None)
    }
}

/// How Eve swaps `|0⟩` and `|1⟩` on a stored photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipSemantics {
    /// Quarter-turn rotation. Commutes with Bob's hidden rotation.
    #[default]
    Rotation,
    /// Amplitude swap. Wrong reading, kept as a negative control.
    Reflection,
}

impl FlipSemantics {
    pub fn apply(self, state: PolarizationState) -> PolarizationState {
        match self {
            FlipSemantics::Rotation => state.flip(),
            FlipSemantics::Reflection => state.reflect_swap(),
        }
    }
}

/// What Eve keeps during a protocol-1 impersonation round.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EveP1Memory {
    /// Alice's photon at angle θ, never measured.
    pub set1: Option<Pulse>,
    /// Basis state `|p⟩` Eve sent to Bob.
    pub set2_p: Option<Bit>,
    /// Eve's photon after Bob rotated it by φ.
    pub set2_returned: Option<Pulse>,
    pub measured_k: Option<Bit>,
}

/// Impersonation attack on protocol 1.
#[derive(Clone, Debug, Default)]
pub struct P1Impersonation {
    flip: FlipSemantics,
    forced_p: Option<Bit>,
    memory: EveP1Memory,
}

impl P1Impersonation {
    pub fn new(flip: FlipSemantics) -> Self {
        P1Impersonation {
            flip,
            ..Default::default()
        }
    }

    /// Fix Eve's `p` instead of drawing it, for exhaustive enumeration.
    pub fn scripted(flip: FlipSemantics, p: Bit) -> Self {
        P1Impersonation {
            flip,
            forced_p: Some(p),
            memory: EveP1Memory::default(),
        }
    }

    pub fn memory(&self) -> &EveP1Memory {
        &self.memory
    }
}

impl EveStrategy for P1Impersonation {
    fn name(&self) -> &'static str {
        "impersonation"
    }

    /// Keep Alice's photon, send Bob `|p⟩` with `p` uniform.
    fn tap_leg1(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let alice = take_single(&pulses, "eve", 1)?;
        let p = self.forced_p.unwrap_or_else(|| Bit::random(rng));
        self.memory.set1 = Some(alice);
        self.memory.set2_p = Some(p);
        Ok(vec![Pulse {
            state: PolarizationState::basis_state(p),
            ..alice
        }])
    }

    /// Keep Bob's rotated photon, hand Alice her own photon back.
    fn tap_leg2(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let bob = take_single(&pulses, "eve", 2)?;
        let set1 = self
            .memory
            .set1
            .ok_or(AdversaryError::OutOfOrder("tap_leg2 before tap_leg1"))?;
        self.memory.set2_returned = Some(bob);
        Ok(vec![set1])
    }

    /// Read k in the ±π/4 basis, then prepare Bob's photon from the stored one.
    fn tap_leg3(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let alice = take_single(&pulses, "eve", 3)?;
        let (stored, p) = match (self.memory.set2_returned, self.memory.set2_p) {
            (Some(s), Some(p)) => (s, p),
            _ => return Err(AdversaryError::OutOfOrder("tap_leg3 before tap_leg2")),
        };
        let reading = measure(alice.state, MeasurementBasis::diagonal(), rng);
        if reading.random {
            return Err(AdversaryError::NonDeterministicIntercept {
                leg: 3,
                probability: crate::polarization::born_probability(
                    alice.state,
                    MeasurementBasis::diagonal(),
                ),
            });
        }
        let k = reading.outcome;
        self.memory.measured_k = Some(k);

        let mut state = stored.state;
        if p.is_one() {
            state = self.flip.apply(state);
        }
        state = state.rotate(Angle::signed_quarter(k));
        Ok(vec![Pulse { state, ..alice }])
    }

    fn on_announcement(&mut self, _: Option<&Announcement>) -> Result<Option<Bit>, AdversaryError> {
        self.memory
            .measured_k
            .map(Some)
            .ok_or(AdversaryError::OutOfOrder("guess before tap_leg3"))
    }
}

/// Which stored Bob photon Eve forwards in protocol 2, and the sign of her
/// quarter-turn: the photon is rotated by `(−1)^(l' ⊕ sign)·π/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct E2Selection {
    pub pulse: Slot,
    pub sign: Bit,
}

impl E2Selection {
    /// Candidates in preference order. The first one is the literal reading:
    /// first stored pulse, rotated by `(−1)^(k⊕b)·π/4`.
    pub const CANDIDATES: [E2Selection; 4] = [
        E2Selection {
            pulse: Slot::First,
            sign: Bit::ZERO,
        },
        E2Selection {
            pulse: Slot::First,
            sign: Bit::ONE,
        },
        E2Selection {
            pulse: Slot::Second,
            sign: Bit::ZERO,
        },
        E2Selection {
            pulse: Slot::Second,
            sign: Bit::ONE,
        },
    ];
}

impl fmt::Display for E2Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = match self.pulse {
            Slot::First => "first",
            Slot::Second => "second",
            Slot::Single => "single",
        };
        let sign = if self.sign.is_one() { "-" } else { "+" };
        write!(f, "{slot} pulse, rotation {sign}(-1)^(k^b) pi/4")
    }
}

/// What Eve keeps during a protocol-2 impersonation round.
#[derive(Clone, Debug, PartialEq)]
pub struct EveP2Memory {
    /// θ₁′, θ₂′ of the photons Eve sent Bob.
    pub eve_angles: Option<(Angle, Angle)>,
    /// Alice's two photons.
    pub e1: Vec<Pulse>,
    /// Bob's two photons with Eve's angles removed.
    pub e2: Vec<Pulse>,
    pub s_prime: Bit,
    /// Eve's prekey reading, equal to `k ⊕ b`.
    pub l_prime: Option<Bit>,
}

impl Default for EveP2Memory {
    fn default() -> Self {
        EveP2Memory {
            eve_angles: None,
            e1: Vec::new(),
            e2: Vec::new(),
            s_prime: Bit::ZERO,
            l_prime: None,
        }
    }
}

/// Impersonation attack on protocol 2.
#[derive(Clone, Debug)]
pub struct P2Impersonation {
    orientation: OutcomeOrientation,
    selection: E2Selection,
    angles: AngleSource,
    forced_angles: Option<(Angle, Angle)>,
    memory: EveP2Memory,
}

impl P2Impersonation {
    pub fn new(
        orientation: OutcomeOrientation,
        selection: E2Selection,
        angles: AngleSource,
    ) -> Self {
        P2Impersonation {
            orientation,
            selection,
            angles,
            forced_angles: None,
            memory: EveP2Memory::default(),
        }
    }

    /// Fix θ₁′, θ₂′ instead of drawing them, for exhaustive enumeration.
    pub fn scripted(
        orientation: OutcomeOrientation,
        selection: E2Selection,
        eve_angles: (Angle, Angle),
    ) -> Self {
        P2Impersonation {
            forced_angles: Some(eve_angles),
            ..Self::new(orientation, selection, AngleSource::Continuous)
        }
    }

    pub fn memory(&self) -> &EveP2Memory {
        &self.memory
    }
}

impl EveStrategy for P2Impersonation {
    fn name(&self) -> &'static str {
        "impersonation"
    }

    /// Keep both of Alice's photons, send Bob fresh ones at θ₁′, θ₂′.
    fn tap_leg1(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let first = take_slot(&pulses, Slot::First, "eve", 1)?;
        let second = take_slot(&pulses, Slot::Second, "eve", 1)?;
        let (t1, t2) = match self.forced_angles {
            Some(a) => a,
            None => {
                let t1 = self.angles.sample(rng);
                let t2 = self.angles.sample(rng);
                (t1, t2)
            }
        };
        self.memory.e1 = vec![first, second];
        self.memory.eve_angles = Some((t1, t2));
        Ok(vec![
            Pulse {
                state: PolarizationState::ZERO.rotate(t1),
                ..first
            },
            Pulse {
                state: PolarizationState::ZERO.rotate(t2),
                ..second
            },
        ])
    }

    /// Strip θ′ from Bob's photons and keep them; send Alice her photons
    /// shuffled with `s' = 0`.
    fn tap_leg2(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let first = take_slot(&pulses, Slot::First, "eve", 2)?;
        let second = take_slot(&pulses, Slot::Second, "eve", 2)?;
        let (t1, t2) = self
            .memory
            .eve_angles
            .ok_or(AdversaryError::OutOfOrder("tap_leg2 before tap_leg1"))?;
        self.memory.e2 = vec![first.rotated(-t1), second.rotated(-t2)];

        let s = self.memory.s_prime;
        let a1 = take_slot(&self.memory.e1, Slot::First, "eve", 2)?;
        let a2 = take_slot(&self.memory.e1, Slot::Second, "eve", 2)?;
        Ok(vec![
            a1.rotated(Angle::signed_quarter(s)),
            a2.rotated(Angle::signed_quarter(!s)),
        ])
    }

    /// Read `l' = k ⊕ b` from Alice's surviving photon, then forward one stored
    /// Bob photon turned by the quarter-turn that reproduces `l = s ⊕ l'` at Bob.
    fn tap_leg3(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let alice = take_single(&pulses, "eve", 3)?;
        if self.memory.e2.is_empty() {
            return Err(AdversaryError::OutOfOrder("tap_leg3 before tap_leg2"));
        }
        let (l_prime, reading) = prekey_measure(alice.state, self.orientation, rng);
        if reading.random {
            return Err(AdversaryError::NonDeterministicIntercept {
                leg: 3,
                probability: crate::polarization::born_probability(
                    alice.state,
                    MeasurementBasis::computational(),
                ),
            });
        }
        self.memory.l_prime = Some(l_prime);

        let stored = take_slot(&self.memory.e2, self.selection.pulse, "eve", 3)?;
        let turn = Angle::signed_quarter(l_prime ^ self.selection.sign);
        // the other stored photon is discarded
        Ok(vec![Pulse {
            state: stored.state.rotate(turn),
            ..alice
        }])
    }

    /// `k = b ⊕ (k ⊕ b)`
    fn on_announcement(
        &mut self,
        announcement: Option<&Announcement>,
    ) -> Result<Option<Bit>, AdversaryError> {
        let l_prime = self
            .memory
            .l_prime
            .ok_or(AdversaryError::OutOfOrder("announcement before tap_leg3"))?;
        let ann = announcement.ok_or(AdversaryError::MissingAnnouncement)?;
        Ok(Some(ann.b ^ l_prime))
    }
}

/// Basis the intercept-resend baseline measures in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterceptBasis {
    #[default]
    Computational,
    /// Computational or ±π/4, chosen uniformly per round.
    Random,
}

/// Measure the final photon and resend the collapsed state.
#[derive(Clone, Debug, Default)]
pub struct InterceptResend {
    basis: InterceptBasis,
    guess: Option<Bit>,
}

impl InterceptResend {
    pub fn new(basis: InterceptBasis) -> Self {
        InterceptResend { basis, guess: None }
    }
}

impl EveStrategy for InterceptResend {
    fn name(&self) -> &'static str {
        "intercept-resend"
    }

    fn tap_leg1(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(pulses)
    }

    fn tap_leg2(
        &mut self,
        pulses: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(pulses)
    }

    fn tap_leg3(
        &mut self,
        pulses: Vec<Pulse>,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        let pulse = take_single(&pulses, "eve", 3)?;
        let basis = match self.basis {
            InterceptBasis::Computational => MeasurementBasis::computational(),
            InterceptBasis::Random => {
                if Bit::random(rng).is_one() {
                    MeasurementBasis::diagonal()
                } else {
                    MeasurementBasis::computational()
                }
            }
        };
        let m = measure(pulse.state, basis, rng);
        self.guess = Some(m.outcome);
        Ok(vec![Pulse {
            state: m.post_state,
            ..pulse
        }])
    }

    fn on_announcement(&mut self, _: Option<&Announcement>) -> Result<Option<Bit>, AdversaryError> {
        Ok(self.guess)
    }
}
