use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{
    E2Selection, EveStrategy, FlipSemantics, InterceptBasis, InterceptResend, P1Impersonation,
    P2Impersonation, Passive,
};
use crate::analysis::DEFAULT_THRESHOLD;
use crate::conventions::Conventions;
use crate::protocol::{AngleSource, Protocol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(u32),
    #[error("detection threshold must lie in (0, 1), got {0}")]
    Threshold(f64),
    #[error("unknown attack '{0}', expected none, passive, impersonation or intercept-resend")]
    UnknownStrategy(String),
    #[error("intercept-resend is defined on the final leg of protocol 1 only")]
    InterceptResendNeedsProtocolOne,
}

/// Eavesdropper selection. `None` installs no strategy at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StrategyKind {
    #[default]
    None,
    Passive,
    Impersonation {
        flip: FlipSemantics,
        /// Override for the protocol-2 forwarding choice; `None` uses the derived one.
        e2: Option<E2Selection>,
    },
    InterceptResend {
        basis: InterceptBasis,
    },
}

impl StrategyKind {
    pub const fn impersonation() -> Self {
        StrategyKind::Impersonation {
            flip: FlipSemantics::Rotation,
            e2: None,
        }
    }

    pub const fn intercept_resend() -> Self {
        StrategyKind::InterceptResend {
            basis: InterceptBasis::Computational,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::Passive => "passive",
            StrategyKind::Impersonation { .. } => "impersonation",
            StrategyKind::InterceptResend { .. } => "intercept-resend",
        }
    }

    /// Non-default options, for the report's config echo.
    pub fn variant(&self) -> Option<String> {
        match self {
            StrategyKind::Impersonation { flip, e2 } => {
                let mut parts = Vec::new();
                if *flip != FlipSemantics::Rotation {
                    parts.push(format!("flip={flip:?}").to_lowercase());
                }
                if let Some(sel) = e2 {
                    parts.push(format!("e2={sel}"));
                }
                (!parts.is_empty()).then(|| parts.join(";"))
            }
            StrategyKind::InterceptResend {
                basis: InterceptBasis::Random,
            } => Some("basis=random".into()),
            _ => None,
        }
    }

    pub fn instantiate(
        &self,
        protocol: Protocol,
        conventions: &Conventions,
        angles: AngleSource,
    ) -> Option<Box<dyn EveStrategy>> {
        match *self {
            StrategyKind::None => None,
            StrategyKind::Passive => Some(Box::new(Passive)),
            StrategyKind::Impersonation { flip, e2 } => match protocol {
                Protocol::One => Some(Box::new(P1Impersonation::new(flip))),
                Protocol::Two => Some(Box::new(P2Impersonation::new(
                    conventions.outcome_orientation,
                    e2.unwrap_or(conventions.e2_selection),
                    angles,
                ))),
            },
            StrategyKind::InterceptResend { basis } => Some(Box::new(InterceptResend::new(basis))),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "none" => Ok(StrategyKind::None),
            "passive" => Ok(StrategyKind::Passive),
            "impersonation" => Ok(StrategyKind::impersonation()),
            "intercept-resend" => Ok(StrategyKind::intercept_resend()),
            other => Err(ConfigError::UnknownStrategy(other.to_string())),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub strategy: StrategyKind,
    pub rounds: u64,
    pub seed: u64,
    pub angles: AngleSource,
    pub threshold: f64,
}

impl SimConfig {
    pub fn new(protocol: Protocol, strategy: StrategyKind, rounds: u64, seed: u64) -> Self {
        SimConfig {
            protocol,
            strategy,
            rounds,
            seed,
            angles: AngleSource::Continuous,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn with_angles(mut self, angles: AngleSource) -> Self {
        self.angles = angles;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rounds == 0 {
            return Err(ConfigError::NoRounds);
        }
        if let AngleSource::Grid(k) = self.angles {
            if k < 2 {
                return Err(ConfigError::GridTooSmall(k));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        if matches!(self.strategy, StrategyKind::InterceptResend { .. })
            && self.protocol != Protocol::One
        {
            return Err(ConfigError::InterceptResendNeedsProtocolOne);
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            protocol: self.protocol,
            attack: self.strategy.name().to_string(),
            variant: self.strategy.variant(),
            rounds: self.rounds,
            seed: self.seed,
            angles: self.angles,
            threshold: self.threshold,
        }
    }
}

/// The configuration as written into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub protocol: Protocol,
    pub attack: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub rounds: u64,
    pub seed: u64,
    pub angles: AngleSource,
    pub threshold: f64,
}
