//! One round, leg by leg, with an optional tap between every pair of steps.

use rand::RngCore;

use crate::adversary::{AdversaryError, EveStrategy};
use crate::protocol::{
    p2_decode, take_single, take_slot, OutcomeOrientation, P1AliceState, P1BobState, P2AliceState,
    P2BobState, Protocol, ProtocolError, Pulse, RoundRecord, Slot,
};

/// The honest parties' secrets for one round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Parties {
    One {
        alice: P1AliceState,
        bob: P1BobState,
    },
    Two {
        alice: P2AliceState,
        bob: P2BobState,
    },
}

impl Parties {
    pub fn protocol(&self) -> Protocol {
        match self {
            Parties::One { .. } => Protocol::One,
            Parties::Two { .. } => Protocol::Two,
        }
    }
}

/// Randomness handed to a round: Eve's stream and Bob's detector stream.
pub struct RoundRng<'a> {
    pub eve: &'a mut dyn RngCore,
    pub measurement: &'a mut dyn RngCore,
}

fn tap(
    eve: &mut Option<&mut dyn EveStrategy>,
    leg: u8,
    pulses: Vec<Pulse>,
    rng: &mut dyn RngCore,
) -> Result<Vec<Pulse>, AdversaryError> {
    match eve {
        None => Ok(pulses),
        Some(e) => match leg {
            1 => e.tap_leg1(pulses, rng),
            2 => e.tap_leg2(pulses, rng),
            _ => e.tap_leg3(pulses, rng),
        },
    }
}

/// Run one round. A delivery a party cannot use aborts the round and is
/// recorded; an adversary error is returned.
pub fn execute_round(
    round: u64,
    parties: &Parties,
    mut eve: Option<&mut dyn EveStrategy>,
    orientation: OutcomeOrientation,
    rng: RoundRng<'_>,
) -> Result<RoundRecord, AdversaryError> {
    let eve_active = eve.as_ref().is_some_and(|e| e.is_active());
    let mut record = match parties {
        Parties::One { alice, bob } => RoundRecord {
            round,
            protocol: Protocol::One,
            k_alice: alice.k,
            k_bob: None,
            theta: vec![alice.theta],
            phi: bob.phi,
            s: None,
            b: None,
            l: None,
            eve_guess: None,
            eve_active,
            bob_measurement_random: false,
            aborted: None,
        },
        Parties::Two { alice, bob } => RoundRecord {
            round,
            protocol: Protocol::Two,
            k_alice: alice.k,
            k_bob: None,
            theta: vec![alice.theta1, alice.theta2],
            phi: bob.phi,
            s: Some(bob.s),
            b: Some(alice.b),
            l: None,
            eve_guess: None,
            eve_active,
            bob_measurement_random: false,
            aborted: None,
        },
    };

    let outcome = match parties {
        Parties::One { alice, bob } => run_p1(round, alice, bob, &mut eve, rng, &mut record),
        Parties::Two { alice, bob } => {
            run_p2(round, alice, bob, &mut eve, orientation, rng, &mut record)
        }
    };
    if let Err(abort) = outcome? {
        record.aborted = Some(abort);
    }
    Ok(record)
}

type Leg = Result<Result<(), ProtocolError>, AdversaryError>;

macro_rules! party {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(abort) => return Ok(Err(abort)),
        }
    };
}

fn run_p1(
    round: u64,
    alice: &P1AliceState,
    bob: &P1BobState,
    eve: &mut Option<&mut dyn EveStrategy>,
    rng: RoundRng<'_>,
    record: &mut RoundRecord,
) -> Leg {
    let sent = vec![alice.prepare(round)];
    let at_bob = tap(eve, 1, sent, rng.eve)?;
    let returned = vec![bob.rotate(party!(take_single(&at_bob, "bob", 1)))];
    let at_alice = tap(eve, 2, returned, rng.eve)?;
    let encoded = vec![alice.encode(party!(take_single(&at_alice, "alice", 2)))];
    let at_bob = tap(eve, 3, encoded, rng.eve)?;
    let m = bob.decode(party!(take_single(&at_bob, "bob", 3)), rng.measurement);

    record.k_bob = Some(m.outcome);
    record.bob_measurement_random = m.random;
    if let Some(e) = eve {
        record.eve_guess = e.on_announcement(None)?;
    }
    Ok(Ok(()))
}

fn run_p2(
    round: u64,
    alice: &P2AliceState,
    bob: &P2BobState,
    eve: &mut Option<&mut dyn EveStrategy>,
    orientation: OutcomeOrientation,
    rng: RoundRng<'_>,
    record: &mut RoundRecord,
) -> Leg {
    let sent = alice.prepare(round).to_vec();
    let at_bob = tap(eve, 1, sent, rng.eve)?;
    let first = party!(take_slot(&at_bob, Slot::First, "bob", 1));
    let second = party!(take_slot(&at_bob, Slot::Second, "bob", 1));
    let (first, second) = bob.shuffle(first, second);
    let at_alice = tap(eve, 2, vec![first, second], rng.eve)?;
    let forwarded = party!(alice.encode_block(&at_alice));
    let at_bob = tap(eve, 3, vec![forwarded], rng.eve)?;
    let (l, m) = bob.measure(
        party!(take_single(&at_bob, "bob", 3)),
        orientation,
        rng.measurement,
    );

    // announcement only after the last photon has reached Bob
    let announcement = alice.announce(round);
    record.l = Some(l);
    record.k_bob = Some(p2_decode(bob.s, announcement.b, l));
    record.bob_measurement_random = m.random;
    if let Some(e) = eve {
        record.eve_guess = e.on_announcement(Some(&announcement))?;
    }
    Ok(Ok(()))
}
