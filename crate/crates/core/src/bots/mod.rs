//! The canonical strategies and the evaluators they consult.

mod builtin;
mod evaluator;
mod mht;
mod naive;
mod perfect;
mod random;
mod uci;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builtin::{static_eval, BuiltinEvaluator, MATE};
pub use evaluator::{EvalError, Evaluator, EvaluatorSpec, Scored, ENGINE_ENV};
pub use mht::{MhtBot, PredictorBot, SquareWeights, PREDICTOR_SAMPLE, PREDICTOR_TOP_K};
pub use naive::NaiveBot;
pub use perfect::{PerfectInfoBot, PERFECT_SENSE_CENTER};
pub use random::RandomBot;
pub use uci::UciEvaluator;

use crate::arbiter::Strategy;
use crate::infoset::{ObservationModel, DEFAULT_SIZE_CAP};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    Random,
    Naive,
    Mht,
    Predictor,
    PerfectInfo,
}

fn default_pass_prob() -> f64 {
    0.25
}

/// Everything needed to build a bot for one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotSpec {
    pub name: String,
    pub kind: BotKind,
    /// Pass probability; only read by the random bot.
    #[serde(default = "default_pass_prob")]
    pub pass_prob: f64,
    #[serde(default)]
    pub evaluator: EvaluatorSpec,
    /// Information-set cap for the tracking bots.
    #[serde(default)]
    pub size_cap: Option<usize>,
    /// Evaluate at most this many boards (drawn at random) when picking the
    /// modal move. Unset means every board.
    #[serde(default)]
    pub move_sample: Option<usize>,
}

#[derive(Debug, Error)]
pub enum BotError {
    #[error("bot {name}: {reason}")]
    Config { name: String, reason: String },
    #[error("bot {name}: {source}")]
    Evaluator { name: String, source: EvalError },
}

impl BotSpec {
    pub fn new(name: impl Into<String>, kind: BotKind) -> BotSpec {
        BotSpec {
            name: name.into(),
            kind,
            pass_prob: default_pass_prob(),
            evaluator: EvaluatorSpec::default(),
            size_cap: None,
            move_sample: None,
        }
    }

    /// `RandomBotX` where X is the pass percentage.
    pub fn random(pass_prob: f64) -> BotSpec {
        let mut s = BotSpec::new(format!("RandomBot{}", (pass_prob * 100.0).round() as u32), BotKind::Random);
        s.pass_prob = pass_prob;
        s
    }

    pub fn naive() -> BotSpec {
        BotSpec::new("NaiveBot", BotKind::Naive)
    }

    pub fn mht() -> BotSpec {
        BotSpec::new("MHTBot", BotKind::Mht)
    }

    pub fn predictor() -> BotSpec {
        BotSpec::new("PredictorBot", BotKind::Predictor)
    }

    pub fn perfect_info() -> BotSpec {
        BotSpec::new("PerfectInfoBot", BotKind::PerfectInfo)
    }

    pub fn with_evaluator(mut self, evaluator: EvaluatorSpec) -> BotSpec {
        self.evaluator = evaluator;
        self
    }

    pub fn with_size_cap(mut self, cap: usize) -> BotSpec {
        self.size_cap = Some(cap);
        self
    }

    pub fn with_move_sample(mut self, n: usize) -> BotSpec {
        self.move_sample = Some(n);
        self
    }

    pub fn needs_ground_truth(&self) -> bool {
        matches!(self.kind, BotKind::Random | BotKind::PerfectInfo)
    }

    /// How this bot's information sets are counted by the metrics.
    pub fn observation_model(&self) -> ObservationModel {
        match self.kind {
            BotKind::PerfectInfo => ObservationModel::GroundTruth,
            _ => ObservationModel::Observations,
        }
    }

    pub fn validate(&self) -> Result<(), BotError> {
        let bad = |reason: String| Err(BotError::Config { name: self.name.clone(), reason });
        if self.name.trim().is_empty() {
            return bad("empty name".into());
        }
        if !(0.0..=1.0).contains(&self.pass_prob) {
            return bad(format!("pass_prob {} outside [0, 1]", self.pass_prob));
        }
        if self.size_cap == Some(0) || self.move_sample == Some(0) {
            return bad("size_cap and move_sample must be positive".into());
        }
        match self.evaluator {
            EvaluatorSpec::Builtin { depth: 0 } | EvaluatorSpec::External { depth: 0, .. } => {
                bad("evaluator depth must be at least 1".into())
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn Strategy>, BotError> {
        self.validate()?;
        let evaluator = || {
            self.evaluator
                .build()
                .map_err(|source| BotError::Evaluator { name: self.name.clone(), source })
        };
        let cap = self.size_cap.unwrap_or(DEFAULT_SIZE_CAP);
        let name = self.name.clone();
        Ok(match self.kind {
            BotKind::Random => Box::new(RandomBot::new(name, self.pass_prob, seed)),
            BotKind::Naive => Box::new(NaiveBot::new(name, evaluator()?, seed)),
            BotKind::Mht => Box::new(MhtBot::new(name, evaluator()?, seed, cap, self.move_sample)),
            BotKind::Predictor => {
                Box::new(PredictorBot::new(name, evaluator()?, seed, cap, self.move_sample))
            }
            BotKind::PerfectInfo => Box::new(PerfectInfoBot::new(name, evaluator()?)),
        })
    }
}

/// Uniform choice; `items` must not be empty.
pub(crate) fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())]
}
