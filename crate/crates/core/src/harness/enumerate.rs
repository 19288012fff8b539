//! Exhaustive oracle: every binary parameter against every grid angle.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{
    AdversaryError, E2Selection, EveStrategy, InterceptResend, P1Impersonation, P2Impersonation,
    Passive,
};
use crate::harness::config::StrategyKind;
use crate::harness::round::{execute_round, Parties, RoundRng};
use crate::polarization::{Angle, Bit};
use crate::protocol::{
    grid_points, OutcomeOrientation, P1AliceState, P1BobState, P2AliceState, P2BobState, Protocol,
    RoundRecord,
};

pub const CHECK_DECODE: &str = "decode=k";
pub const CHECK_PREKEY: &str = "l=s^k^b";
pub const CHECK_GUESS: &str = "guess=k";
pub const CHECK_DETERMINISTIC: &str = "deterministic";

const EXAMPLES_PER_ROW: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailedCase {
    pub bits: BTreeMap<String, Bit>,
    pub angles: BTreeMap<String, f64>,
    pub failed_checks: Vec<String>,
}

/// Results for one assignment of the binary parameters, over all grid angles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictRow {
    pub bits: BTreeMap<String, Bit>,
    pub cases: u64,
    pub failed: u64,
    pub failures_by_check: BTreeMap<String, u64>,
    pub examples: Vec<FailedCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictTable {
    pub protocol: Protocol,
    pub strategy: String,
    pub grid: u32,
    pub checks: Vec<String>,
    pub outcome_orientation: OutcomeOrientation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e2_selection: Option<E2Selection>,
    pub total_cases: u64,
    pub failed_cases: u64,
    pub rows: Vec<VerdictRow>,
}

impl VerdictTable {
    pub fn all_passed(&self) -> bool {
        self.failed_cases == 0 && self.total_cases > 0
    }
}

struct Layout {
    bits: Vec<&'static str>,
    angles: Vec<&'static str>,
    checks: Vec<&'static str>,
}

fn layout(protocol: Protocol, strategy: &StrategyKind) -> Layout {
    let impersonation = matches!(strategy, StrategyKind::Impersonation { .. });
    let guesses = impersonation || matches!(strategy, StrategyKind::InterceptResend { .. });
    let (mut bits, mut angles) = match protocol {
        Protocol::One => (vec!["k"], vec!["theta", "phi"]),
        Protocol::Two => (vec!["s", "k", "b"], vec!["theta1", "theta2", "phi"]),
    };
    if impersonation {
        match protocol {
            Protocol::One => bits.push("p"),
            Protocol::Two => angles.extend(["theta1_eve", "theta2_eve"]),
        }
    }
    let mut checks = vec![CHECK_DECODE];
    if protocol == Protocol::Two {
        checks.push(CHECK_PREKEY);
    }
    if guesses {
        checks.push(CHECK_GUESS);
    }
    checks.push(CHECK_DETERMINISTIC);
    Layout {
        bits,
        angles,
        checks,
    }
}

#[derive(Default)]
struct RowAcc {
    cases: u64,
    failed: u64,
    by_check: Vec<u64>,
    examples: Vec<(u64, FailedCase)>,
}

impl RowAcc {
    fn merge(mut self, other: RowAcc) -> RowAcc {
        self.cases += other.cases;
        self.failed += other.failed;
        if self.by_check.len() < other.by_check.len() {
            self.by_check.resize(other.by_check.len(), 0);
        }
        for (a, b) in self.by_check.iter_mut().zip(other.by_check) {
            *a += b;
        }
        self.examples.extend(other.examples);
        self.examples.sort_by_key(|(i, _)| *i);
        self.examples.truncate(EXAMPLES_PER_ROW);
        self
    }
}

/// Enumerate every combination with explicit conventions.
///
/// Grid `K` means angles `jπ/K` for `j = 0..2K`. `e2` is used by the
/// protocol-2 impersonation unless the strategy carries its own override.
pub fn enumerate_with(
    protocol: Protocol,
    strategy: &StrategyKind,
    grid: u32,
    orientation: OutcomeOrientation,
    e2: E2Selection,
) -> Result<VerdictTable, AdversaryError> {
    let lay = layout(protocol, strategy);
    let points = grid_points(grid);
    let m = points.len() as u64;
    let n_angle_cases = m.pow(lay.angles.len() as u32);
    let e2 = match strategy {
        StrategyKind::Impersonation { e2: Some(sel), .. } => *sel,
        _ => e2,
    };

    let mut rows = Vec::new();
    for bit_mask in 0..(1u32 << lay.bits.len()) {
        let bits: Vec<Bit> = (0..lay.bits.len())
            .map(|i| Bit::from_bool(bit_mask >> (lay.bits.len() - 1 - i) & 1 == 1))
            .collect();
        let acc = (0..n_angle_cases)
            .into_par_iter()
            .map(|idx| {
                let angles: Vec<Angle> = (0..lay.angles.len())
                    .map(|d| points[((idx / m.pow(d as u32)) % m) as usize])
                    .collect();
                let case_id = ((bit_mask as u64) << 48) ^ idx;
                let failed = run_case(
                    protocol,
                    strategy,
                    orientation,
                    e2,
                    &lay,
                    &bits,
                    &angles,
                    case_id,
                )?;
                let mut acc = RowAcc {
                    cases: 1,
                    by_check: vec![0; lay.checks.len()],
                    ..Default::default()
                };
                if failed.iter().any(|&f| f) {
                    acc.failed = 1;
                    for (c, f) in acc.by_check.iter_mut().zip(&failed) {
                        *c += *f as u64;
                    }
                    acc.examples.push((
                        idx,
                        FailedCase {
                            bits: named(&lay.bits, &bits),
                            angles: lay
                                .angles
                                .iter()
                                .zip(&angles)
                                .map(|(n, a)| (n.to_string(), a.radians()))
                                .collect(),
                            failed_checks: lay
                                .checks
                                .iter()
                                .zip(&failed)
                                .filter(|(_, f)| **f)
                                .map(|(n, _)| n.to_string())
                                .collect(),
                        },
                    ));
                }
                Ok::<_, AdversaryError>(acc)
            })
            .try_reduce(RowAcc::default, |a, b| Ok(a.merge(b)))?;

        let mut by_check = acc.by_check;
        by_check.resize(lay.checks.len(), 0);
        rows.push(VerdictRow {
            bits: named(&lay.bits, &bits),
            cases: acc.cases,
            failed: acc.failed,
            failures_by_check: lay
                .checks
                .iter()
                .map(|c| c.to_string())
                .zip(by_check)
                .collect(),
            examples: acc.examples.into_iter().map(|(_, c)| c).collect(),
        });
    }

    Ok(VerdictTable {
        protocol,
        strategy: strategy.name().to_string(),
        grid,
        checks: lay.checks.iter().map(|c| c.to_string()).collect(),
        outcome_orientation: orientation,
        e2_selection: (protocol == Protocol::Two
            && matches!(strategy, StrategyKind::Impersonation { .. }))
        .then_some(e2),
        total_cases: rows.iter().map(|r| r.cases).sum(),
        failed_cases: rows.iter().map(|r| r.failed).sum(),
        rows,
    })
}

fn named(names: &[&str], bits: &[Bit]) -> BTreeMap<String, Bit> {
    names
        .iter()
        .map(|n| n.to_string())
        .zip(bits.iter().copied())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_case(
    protocol: Protocol,
    strategy: &StrategyKind,
    orientation: OutcomeOrientation,
    e2: E2Selection,
    lay: &Layout,
    bits: &[Bit],
    angles: &[Angle],
    case_id: u64,
) -> Result<Vec<bool>, AdversaryError> {
    let (parties, p) = match protocol {
        Protocol::One => (
            Parties::One {
                alice: P1AliceState {
                    theta: angles[0],
                    k: bits[0],
                },
                bob: P1BobState { phi: angles[1] },
            },
            bits.get(1).copied(),
        ),
        Protocol::Two => (
            Parties::Two {
                alice: P2AliceState {
                    theta1: angles[0],
                    theta2: angles[1],
                    k: bits[1],
                    b: bits[2],
                },
                bob: P2BobState {
                    phi: angles[2],
                    s: bits[0],
                },
            },
            None,
        ),
    };

    let mut eve: Option<Box<dyn EveStrategy>> = match *strategy {
        StrategyKind::None => None,
        StrategyKind::Passive => Some(Box::new(Passive)),
        StrategyKind::Impersonation { flip, .. } => match protocol {
            Protocol::One => Some(Box::new(P1Impersonation::scripted(
                flip,
                p.unwrap_or(Bit::ZERO),
            ))),
            Protocol::Two => Some(Box::new(P2Impersonation::scripted(
                orientation,
                e2,
                (angles[3], angles[4]),
            ))),
        },
        StrategyKind::InterceptResend { basis } => Some(Box::new(InterceptResend::new(basis))),
    };

    let mut eve_rng = ChaCha8Rng::seed_from_u64(case_id);
    let mut meas_rng = ChaCha8Rng::seed_from_u64(!case_id);
    let record = execute_round(
        0,
        &parties,
        eve.as_mut().map(|e| e.as_mut() as &mut dyn EveStrategy),
        orientation,
        RoundRng {
            eve: &mut eve_rng,
            measurement: &mut meas_rng,
        },
    )?;
    Ok(lay.checks.iter().map(|c| !check(c, &record)).collect())
}

fn check(name: &str, r: &RoundRecord) -> bool {
    match name {
        CHECK_DECODE => r.k_bob == Some(r.k_alice),
        CHECK_PREKEY => match (r.s, r.b, r.l) {
            (Some(s), Some(b), Some(l)) => l == s ^ r.k_alice ^ b,
            _ => false,
        },
        CHECK_GUESS => r.eve_guess == Some(r.k_alice),
        CHECK_DETERMINISTIC => r.is_completed() && !r.bob_measurement_random,
        _ => unreachable!("unknown check {name}"),
    }
}
