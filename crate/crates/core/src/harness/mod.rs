//! Drives rounds through the tapped channel and aggregates the results.

mod config;
mod enumerate;
mod rng;
mod round;

pub use config::{ConfigEcho, ConfigError, SimConfig, StrategyKind};
pub use enumerate::{
    enumerate_with, FailedCase, VerdictRow, VerdictTable, CHECK_DECODE, CHECK_DETERMINISTIC,
    CHECK_GUESS, CHECK_PREKEY,
};
pub use rng::{RngDiscipline, Role};
pub use round::{execute_round, Parties, RoundRng};

use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::{AdversaryError, EveStrategy};
use crate::analysis::{AnalysisError, Tally};
use crate::conventions::{self, ConventionError, Conventions};
use crate::protocol::{P1AliceState, P1BobState, P2AliceState, P2BobState, Protocol, RoundRecord};
use crate::report::SimReport;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Conventions(#[from] ConventionError),
    #[error("round {round}: {source}")]
    Adversary { round: u64, source: AdversaryError },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub struct Simulator {
    config: SimConfig,
    conventions: Conventions,
    rng: RngDiscipline,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let conventions = conventions::derived()?;
        Ok(Simulator {
            rng: RngDiscipline::new(config.seed),
            config,
            conventions,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn conventions(&self) -> &Conventions {
        &self.conventions
    }

    /// Draw the honest parties' secrets for `round` from their own streams.
    pub fn parties(&self, round: u64) -> Parties {
        let mut alice = self.rng.stream(round, Role::Alice);
        let mut bob = self.rng.stream(round, Role::Bob);
        let angles = self.config.angles;
        match self.config.protocol {
            Protocol::One => Parties::One {
                alice: P1AliceState::draw(&mut alice, angles),
                bob: P1BobState::draw(&mut bob, angles),
            },
            Protocol::Two => Parties::Two {
                alice: P2AliceState::draw(&mut alice, angles),
                bob: P2BobState::draw(&mut bob, angles),
            },
        }
    }

    pub fn run_round(&self, round: u64) -> Result<RoundRecord, SimError> {
        let mut eve = self.config.strategy.instantiate(
            self.config.protocol,
            &self.conventions,
            self.config.angles,
        );
        self.run_round_with(
            round,
            eve.as_mut().map(|e| e.as_mut() as &mut dyn EveStrategy),
        )
    }

    /// Run `round` with a caller-supplied strategy in place of the configured one.
    pub fn run_round_with(
        &self,
        round: u64,
        eve: Option<&mut dyn EveStrategy>,
    ) -> Result<RoundRecord, SimError> {
        let parties = self.parties(round);
        let mut eve_rng = self.rng.stream(round, Role::Eve);
        let mut meas_rng = self.rng.stream(round, Role::Measurement);
        execute_round(
            round,
            &parties,
            eve,
            self.conventions.outcome_orientation,
            RoundRng {
                eve: &mut eve_rng,
                measurement: &mut meas_rng,
            },
        )
        .map_err(|source| SimError::Adversary { round, source })
    }

    /// All round records, in round order.
    pub fn records(&self) -> Result<Vec<RoundRecord>, SimError> {
        (0..self.config.rounds)
            .into_par_iter()
            .map(|r| self.run_round(r))
            .collect()
    }

    pub fn tally(&self) -> Result<Tally, SimError> {
        (0..self.config.rounds)
            .into_par_iter()
            .map(|r| {
                let mut t = Tally::default();
                t.record(&self.run_round(r)?);
                Ok(t)
            })
            .try_reduce(Tally::default, |a, b| Ok(a + b))
    }

    pub fn run(&self) -> Result<SimReport, SimError> {
        let tally = self.tally()?;
        self.report(&tally)
    }

    pub fn run_with_threads(&self, threads: usize) -> Result<SimReport, SimError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?;
        pool.install(|| self.run())
    }

    pub fn report(&self, tally: &Tally) -> Result<SimReport, SimError> {
        Ok(SimReport::from_tally(
            &self.config,
            &self.conventions,
            tally,
        )?)
    }
}

/// Exhaustive oracle under the derived conventions.
pub fn enumerate_exhaustive(
    protocol: Protocol,
    strategy: &StrategyKind,
    grid: u32,
) -> Result<VerdictTable, SimError> {
    if grid < 2 {
        return Err(ConfigError::GridTooSmall(grid).into());
    }
    let c = conventions::derived()?;
    enumerate_with(
        protocol,
        strategy,
        grid,
        c.outcome_orientation,
        c.e2_selection,
    )
    .map_err(|source| SimError::Adversary { round: 0, source })
}
