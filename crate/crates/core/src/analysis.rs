//! Statistics over round records: error rate, eavesdropper accuracy, plug-in
//! mutual information and the detection verdict.
//!
//! Everything is computed from integer tallies, so merging partial results
//! from parallel workers in any order gives identical numbers.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarization::Bit;
use crate::protocol::RoundRecord;

pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no completed rounds; error rate is undefined")]
    NoCompletedRounds,
    #[error("no eavesdropper guesses were recorded")]
    NoGuesses,
    #[error("detection threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
}

/// Joint counts of two bit sequences, `n[x][y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2 {
    pub n: [[u64; 2]; 2],
}

impl ConfusionMatrix2 {
    pub fn from_pairs<I: IntoIterator<Item = (Bit, Bit)>>(pairs: I) -> Self {
        let mut m = ConfusionMatrix2::default();
        for (x, y) in pairs {
            m.push(x, y);
        }
        m
    }

    pub fn push(&mut self, x: Bit, y: Bit) {
        self.n[x.value() as usize][y.value() as usize] += 1;
    }

    pub fn total(&self) -> u64 {
        self.n.iter().flatten().sum()
    }

    pub fn agreements(&self) -> u64 {
        self.n[0][0] + self.n[1][1]
    }

    pub fn disagreements(&self) -> u64 {
        self.n[0][1] + self.n[1][0]
    }

    pub fn transposed(&self) -> Self {
        ConfusionMatrix2 {
            n: [[self.n[0][0], self.n[1][0]], [self.n[0][1], self.n[1][1]]],
        }
    }
}

impl Add for ConfusionMatrix2 {
    type Output = ConfusionMatrix2;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ConfusionMatrix2 {
    fn add_assign(&mut self, rhs: Self) {
        for x in 0..2 {
            for y in 0..2 {
                self.n[x][y] += rhs.n[x][y];
            }
        }
    }
}

/// Plug-in estimate of `I(X;Y)` in bits, with `0·log 0 = 0`. Zero for an empty matrix.
pub fn mutual_information(m: &ConfusionMatrix2) -> f64 {
    let total = m.total();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    let row = [m.n[0][0] + m.n[0][1], m.n[1][0] + m.n[1][1]];
    let col = [m.n[0][0] + m.n[1][0], m.n[0][1] + m.n[1][1]];
    let mut info = 0.0;
    for (x, counts) in m.n.iter().enumerate() {
        for (y, &nxy) in counts.iter().enumerate() {
            if nxy == 0 {
                continue;
            }
            // p(x,y) / (p(x) p(y)) = n_xy * N / (n_x * n_y)
            let ratio = (nxy as f64 * t) / (row[x] as f64 * col[y] as f64);
            info += nxy as f64 / t * ratio.log2();
        }
    }
    info.clamp(0.0, 1.0)
}

/// Binary entropy `H(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Integer summary of a batch of rounds. Merging is associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub rounds: u64,
    pub aborted: u64,
    /// Alice's key against Bob's decoded key, completed rounds only.
    pub key: ConfusionMatrix2,
    /// Alice's key against Eve's guess, completed rounds with a guess.
    pub eve: ConfusionMatrix2,
    /// Completed rounds where Bob's final measurement needed a random draw.
    pub bob_random: u64,
}

impl Tally {
    pub fn record(&mut self, r: &RoundRecord) {
        self.rounds += 1;
        let Some(k_bob) = r.k_bob else {
            self.aborted += 1;
            return;
        };
        self.key.push(r.k_alice, k_bob);
        if let Some(g) = r.eve_guess {
            self.eve.push(r.k_alice, g);
        }
        if r.bob_measurement_random {
            self.bob_random += 1;
        }
    }

    pub fn from_records<'a, I: IntoIterator<Item = &'a RoundRecord>>(records: I) -> Self {
        let mut t = Tally::default();
        for r in records {
            t.record(r);
        }
        t
    }

    pub fn completed(&self) -> u64 {
        self.rounds - self.aborted
    }

    pub fn qber(&self) -> Result<f64, AnalysisError> {
        let n = self.key.total();
        if n == 0 {
            return Err(AnalysisError::NoCompletedRounds);
        }
        Ok(self.key.disagreements() as f64 / n as f64)
    }

    pub fn eve_accuracy(&self) -> Result<f64, AnalysisError> {
        let n = self.eve.total();
        if n == 0 {
            return Err(AnalysisError::NoGuesses);
        }
        Ok(self.eve.agreements() as f64 / n as f64)
    }
}

impl Add for Tally {
    type Output = Tally;
    fn add(self, rhs: Tally) -> Tally {
        Tally {
            rounds: self.rounds + rhs.rounds,
            aborted: self.aborted + rhs.aborted,
            key: self.key + rhs.key,
            eve: self.eve + rhs.eve,
            bob_random: self.bob_random + rhs.bob_random,
        }
    }
}

/// Fraction of completed rounds where Bob's key bit differs from Alice's.
pub fn qber(records: &[RoundRecord]) -> Result<f64, AnalysisError> {
    Tally::from_records(records).qber()
}

/// Fraction of guessed rounds where Eve's guess equals Alice's key bit.
pub fn eve_accuracy(records: &[RoundRecord]) -> Result<f64, AnalysisError> {
    Tally::from_records(records).eve_accuracy()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub qber: f64,
    pub threshold: f64,
    pub detected: bool,
}

/// Flags an eavesdropper iff `qber > threshold`.
pub fn detection_verdict(qber: f64, threshold: f64) -> Result<DetectionVerdict, AnalysisError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(AnalysisError::InvalidThreshold(threshold));
    }
    Ok(DetectionVerdict {
        qber,
        threshold,
        detected: qber > threshold,
    })
}
