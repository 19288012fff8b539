//! Labelling conventions that the protocol identities leave open, derived by
//! exhaustive enumeration rather than assumed.
//!
//! The blocking convention is fixed by hand: `b = 0` forwards the first pulse.
//! Two things then follow from it:
//!
//! * which computational-basis vector Bob labels `l = 0`. Exactly one of the
//!   two labellings makes `l = s ⊕ k ⊕ b` hold in every honest round;
//! * which of Eve's stored protocol-2 photons she forwards and with which sign
//!   of quarter-turn, so that Bob still sees `l = s ⊕ k ⊕ b`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversaryError, E2Selection};
use crate::harness::{enumerate_with, StrategyKind};
use crate::protocol::{OutcomeOrientation, Protocol};

pub const BLOCKING_CONVENTION: &str = "b=0 forwards the first pulse, b=1 the second";

/// Grid used for the derivation: angles `jπ/2`.
const DERIVATION_GRID: u32 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConventionError {
    #[error("no outcome orientation satisfies l = s^k^b in every honest round")]
    NoConsistentOrientation,
    #[error("both outcome orientations satisfy l = s^k^b; enumeration is degenerate")]
    AmbiguousOrientation,
    #[error("no forwarding choice keeps the protocol-2 impersonation consistent")]
    NoConsistentSelection,
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub blocking: String,
    pub outcome_orientation: OutcomeOrientation,
    /// The forwarding choice Eve uses.
    pub e2_selection: E2Selection,
    /// Every forwarding choice that passed the enumeration.
    pub e2_consistent: Vec<E2Selection>,
}

pub fn derive_outcome_orientation() -> Result<OutcomeOrientation, ConventionError> {
    let mut consistent = Vec::new();
    for orientation in OutcomeOrientation::ALL {
        let table = enumerate_with(
            Protocol::Two,
            &StrategyKind::None,
            DERIVATION_GRID,
            orientation,
            E2Selection::CANDIDATES[0],
        )?;
        if table.all_passed() {
            consistent.push(orientation);
        }
    }
    match consistent.as_slice() {
        [one] => Ok(*one),
        [] => Err(ConventionError::NoConsistentOrientation),
        _ => Err(ConventionError::AmbiguousOrientation),
    }
}

/// All consistent forwarding choices, in [`E2Selection::CANDIDATES`] order.
pub fn consistent_e2_selections(
    orientation: OutcomeOrientation,
) -> Result<Vec<E2Selection>, ConventionError> {
    let mut ok = Vec::new();
    for candidate in E2Selection::CANDIDATES {
        let table = enumerate_with(
            Protocol::Two,
            &StrategyKind::impersonation(),
            DERIVATION_GRID,
            orientation,
            candidate,
        )?;
        if table.all_passed() {
            ok.push(candidate);
        }
    }
    Ok(ok)
}

pub fn derive() -> Result<Conventions, ConventionError> {
    let orientation = derive_outcome_orientation()?;
    let consistent = consistent_e2_selections(orientation)?;
    let selection = *consistent
        .first()
        .ok_or(ConventionError::NoConsistentSelection)?;
    Ok(Conventions {
        blocking: BLOCKING_CONVENTION.to_string(),
        outcome_orientation: orientation,
        e2_selection: selection,
        e2_consistent: consistent,
    })
}

/// [`derive`], computed once per process.
pub fn derived() -> Result<Conventions, ConventionError> {
    static CACHE: OnceLock<Result<Conventions, ConventionError>> = OnceLock::new();
    CACHE.get_or_init(derive).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::Bit;
    use crate::protocol::Slot;

    #[test]
    fn orientation_is_inverted_under_first_pulse_blocking() {
        assert_eq!(
            derive_outcome_orientation().unwrap(),
            OutcomeOrientation::Inverted
        );
    }

    #[test]
    fn literal_forwarding_choice_is_consistent() {
        let c = derive().unwrap();
        assert_eq!(
            c.e2_selection,
            E2Selection {
                pulse: Slot::First,
                sign: Bit::ZERO
            }
        );
        assert_eq!(
            c.e2_consistent,
            vec![
                E2Selection {
                    pulse: Slot::First,
                    sign: Bit::ZERO
                },
                E2Selection {
                    pulse: Slot::Second,
                    sign: Bit::ONE
                },
            ]
        );
        assert_eq!(derived().unwrap(), c);
    }
}
