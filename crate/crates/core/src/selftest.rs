//! Built-in correctness suite behind `blindqkd selftest`.

use crate::adversary::E2Selection;
use crate::harness::{enumerate_exhaustive, SimConfig, Simulator, StrategyKind};
use crate::polarization::Bit;
use crate::protocol::{Protocol, Slot};

#[derive(Clone, Debug, PartialEq)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const ROUNDS: u64 = 10_000;

fn enumeration(
    name: &str,
    protocol: Protocol,
    strategy: StrategyKind,
    grid: u32,
    expect_pass: bool,
) -> SelfCheck {
    let (passed, detail) = match enumerate_exhaustive(protocol, &strategy, grid) {
        Ok(t) => (
            t.all_passed() == expect_pass,
            format!("{}/{} cases failed", t.failed_cases, t.total_cases),
        ),
        Err(e) => (false, e.to_string()),
    };
    SelfCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn run(name: &str, protocol: Protocol, strategy: StrategyKind, want_eve: bool) -> SelfCheck {
    let outcome =
        Simulator::new(SimConfig::new(protocol, strategy, ROUNDS, 0x5eed)).and_then(|s| s.run());
    let (passed, detail) = match outcome {
        Ok(r) => {
            let eve_ok = !want_eve || r.eve_accuracy == Some(1.0);
            (
                r.qber == 0.0 && !r.detected && r.aborted == 0 && eve_ok,
                r.summary_line(),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    SelfCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_selftest() -> Vec<SelfCheck> {
    let wrong_e2 = StrategyKind::Impersonation {
        flip: Default::default(),
        e2: Some(E2Selection {
            pulse: Slot::First,
            sign: Bit::ONE,
        }),
    };
    vec![
        enumeration(
            "exhaustive protocol 1 honest (grid 8)",
            Protocol::One,
            StrategyKind::None,
            8,
            true,
        ),
        enumeration(
            "exhaustive protocol 2 honest (grid 8)",
            Protocol::Two,
            StrategyKind::None,
            8,
            true,
        ),
        enumeration(
            "exhaustive protocol 1 impersonation (grid 8)",
            Protocol::One,
            StrategyKind::impersonation(),
            8,
            true,
        ),
        enumeration(
            "exhaustive protocol 2 impersonation (grid 2)",
            Protocol::Two,
            StrategyKind::impersonation(),
            2,
            true,
        ),
        enumeration(
            "negative control: wrong forwarding choice is caught",
            Protocol::Two,
            wrong_e2,
            2,
            false,
        ),
        run(
            "protocol 1 honest run",
            Protocol::One,
            StrategyKind::None,
            false,
        ),
        run(
            "protocol 2 honest run",
            Protocol::Two,
            StrategyKind::None,
            false,
        ),
        run(
            "protocol 1 impersonation run",
            Protocol::One,
            StrategyKind::impersonation(),
            true,
        ),
        run(
            "protocol 2 impersonation run",
            Protocol::Two,
            StrategyKind::impersonation(),
            true,
        ),
    ]
}
