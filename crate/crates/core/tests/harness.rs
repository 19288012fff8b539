use rand::RngCore;

use blindqkd::adversary::{AdversaryError, EveStrategy, Passive};
use blindqkd::harness::{Parties, CHECK_GUESS};
use blindqkd::protocol::{AngleSource, Announcement, Pulse};
use blindqkd::{enumerate_exhaustive, Bit, Protocol, SimConfig, Simulator, StrategyKind, Tally};

fn sim(protocol: Protocol, strategy: StrategyKind, rounds: u64, seed: u64) -> Simulator {
    Simulator::new(SimConfig::new(protocol, strategy, rounds, seed)).unwrap()
}

#[test]
fn passive_tap_equals_no_tap() {
    for protocol in [Protocol::One, Protocol::Two] {
        let absent = sim(protocol, StrategyKind::None, 2000, 5)
            .records()
            .unwrap();
        let passive = sim(protocol, StrategyKind::Passive, 2000, 5)
            .records()
            .unwrap();
        assert_eq!(absent, passive);
        let s = sim(protocol, StrategyKind::None, 10, 5);
        for r in 0..10 {
            let mut tap = Passive;
            assert_eq!(
                s.run_round_with(r, Some(&mut tap)).unwrap(),
                s.run_round(r).unwrap()
            );
        }
    }
}

#[test]
fn honest_rounds_never_draw_at_the_detector() {
    for protocol in [Protocol::One, Protocol::Two] {
        let t = sim(protocol, StrategyKind::None, 20_000, 1)
            .tally()
            .unwrap();
        assert_eq!(t.bob_random, 0);
        assert_eq!(t.key.disagreements(), 0);
    }
}

#[test]
fn run_round_is_a_pure_function_of_seed_and_index() {
    let a = sim(Protocol::Two, StrategyKind::impersonation(), 100, 77);
    let b = sim(Protocol::Two, StrategyKind::impersonation(), 100, 77);
    let c = sim(Protocol::Two, StrategyKind::impersonation(), 100, 78);
    assert_eq!(a.run_round(42).unwrap(), b.run_round(42).unwrap());
    assert_eq!(a.records().unwrap()[42], b.run_round(42).unwrap());
    let differs = (0..100).any(|r| a.run_round(r).unwrap() != c.run_round(r).unwrap());
    assert!(differs);
}

#[test]
fn parties_are_independent_of_the_strategy() {
    let honest = sim(Protocol::Two, StrategyKind::None, 1, 3);
    let attacked = sim(Protocol::Two, StrategyKind::impersonation(), 1, 3);
    for r in 0..50 {
        assert_eq!(honest.parties(r), attacked.parties(r));
        assert!(matches!(honest.parties(r), Parties::Two { .. }));
    }
}

#[test]
fn protocol_two_records_satisfy_the_prekey_identity() {
    for r in sim(Protocol::Two, StrategyKind::None, 5000, 12)
        .records()
        .unwrap()
    {
        let (s, b, l) = (r.s.unwrap(), r.b.unwrap(), r.l.unwrap());
        assert_eq!(l, s ^ r.k_alice ^ b);
        assert_eq!(r.k_bob, Some(s ^ b ^ l));
        assert_eq!(r.theta.len(), 2);
    }
}

/// Swallows the final leg so Alice's or Bob's delivery is missing.
struct DropLeg3;

impl EveStrategy for DropLeg3 {
    fn name(&self) -> &'static str {
        "drop-leg3"
    }
    fn tap_leg1(
        &mut self,
        p: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(p)
    }
    fn tap_leg2(
        &mut self,
        p: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(p)
    }
    fn tap_leg3(
        &mut self,
        _: Vec<Pulse>,
        _: &mut dyn RngCore,
    ) -> Result<Vec<Pulse>, AdversaryError> {
        Ok(Vec::new())
    }
    fn on_announcement(&mut self, _: Option<&Announcement>) -> Result<Option<Bit>, AdversaryError> {
        Ok(None)
    }
}

#[test]
fn dropped_pulses_abort_rounds_and_are_counted() {
    for protocol in [Protocol::One, Protocol::Two] {
        let s = sim(protocol, StrategyKind::None, 100, 4);
        let records: Vec<_> = (0..100)
            .map(|r| s.run_round_with(r, Some(&mut DropLeg3)).unwrap())
            .collect();
        assert!(records
            .iter()
            .all(|r| r.aborted.is_some() && r.k_bob.is_none() && r.eve_active));
        let t = Tally::from_records(&records);
        assert_eq!((t.rounds, t.aborted, t.completed()), (100, 100, 0));
        assert!(t.qber().is_err());
    }
}

#[test]
fn intercept_resend_randomizes_bobs_detector() {
    let t = sim(Protocol::One, StrategyKind::intercept_resend(), 20_000, 8)
        .tally()
        .unwrap();
    assert_eq!(t.completed(), 20_000);
    // Outcomes count as deterministic within 1e-9 of certainty, which a
    // continuous angle hits only within ~3e-5 rad of a multiple of pi/4.
    assert!(t.bob_random >= 19_980, "{}", t.bob_random);
    assert_eq!(t.eve.total(), 20_000);
}

#[test]
fn tally_matches_records() {
    let s = sim(Protocol::One, StrategyKind::intercept_resend(), 4000, 21);
    let from_records = Tally::from_records(&s.records().unwrap());
    assert_eq!(from_records, s.tally().unwrap());
}

#[test]
fn grid_runs_stay_exact() {
    for protocol in [Protocol::One, Protocol::Two] {
        let cfg = SimConfig::new(protocol, StrategyKind::impersonation(), 5000, 2)
            .with_angles(AngleSource::Grid(8));
        let r = Simulator::new(cfg).unwrap().run().unwrap();
        assert_eq!((r.qber, r.eve_accuracy), (0.0, Some(1.0)));
        assert_eq!(r.config.angles, AngleSource::Grid(8));
    }
}

#[test]
fn enumeration_sizes_and_verdicts() {
    let t = enumerate_exhaustive(Protocol::Two, &StrategyKind::None, 4).unwrap();
    assert_eq!(t.total_cases, 8 * 8 * 8 * 8);
    assert_eq!(t.rows.len(), 8);
    assert!(t.all_passed());

    let t = enumerate_exhaustive(Protocol::One, &StrategyKind::impersonation(), 8).unwrap();
    assert_eq!(t.total_cases, 4 * 16 * 16);
    assert!(t.all_passed());

    let t = enumerate_exhaustive(Protocol::One, &StrategyKind::intercept_resend(), 2).unwrap();
    assert!(!t.all_passed());
    assert!(t.rows.iter().any(|r| r.failures_by_check[CHECK_GUESS] > 0));
    assert!(t.rows.iter().all(|r| !r.examples.is_empty()));

    assert!(enumerate_exhaustive(Protocol::One, &StrategyKind::None, 1).is_err());
}

#[test]
fn wrong_e2_selection_is_caught() {
    let c = blindqkd::conventions::derived().unwrap();
    let wrong = blindqkd::adversary::E2Selection::CANDIDATES
        .into_iter()
        .find(|s| !c.e2_consistent.contains(s))
        .unwrap();
    let strategy = StrategyKind::Impersonation {
        flip: Default::default(),
        e2: Some(wrong),
    };
    let t = enumerate_exhaustive(Protocol::Two, &strategy, 2).unwrap();
    assert!(t.failed_cases > 0);
    let r = sim(Protocol::Two, strategy, 5000, 6).run().unwrap();
    assert!(r.qber > 0.05);
    assert!(r.detected);
}
