use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::builtin::BuiltinEvaluator;
use super::uci::UciEvaluator;
use crate::board::{Board, MoveRequest};
use crate::infoset::FastBuild;

/// Environment variable naming an external engine binary.
pub const ENGINE_ENV: &str = "RBC_ENGINE_PATH";

/// A move with a side-to-move relative, centipawn-like score.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Scored {
    pub mv: MoveRequest,
    pub score: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("engine could not be started: {0}")]
    Spawn(String),
    #[error("engine protocol error: {0}")]
    Protocol(String),
}

/// Deterministic move scoring shared by the bots.
///
/// Implementations must answer for any board reachable in RBC, including
/// positions that are illegal in classical chess, and must prefer an
/// immediate capture of the opponent's king whenever one exists.
pub trait Evaluator: Send {
    fn name(&self) -> String;

    fn best_move(&mut self, board: &Board) -> Result<Scored, EvalError> {
        let mut top = self.top_k(board, 1)?;
        Ok(top.remove(0))
    }

    /// Up to `k` moves, best first, never empty.
    fn top_k(&mut self, board: &Board, k: usize) -> Result<Vec<Scored>, EvalError>;

    /// Called when a new game starts; drops per-game caches.
    fn new_game(&mut self) {}
}

/// Which evaluator a bot uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorSpec {
    Builtin { depth: u32 },
    External { path: PathBuf, depth: u32 },
}

impl Default for EvaluatorSpec {
    fn default() -> Self {
        EvaluatorSpec::Builtin { depth: 3 }
    }
}

impl EvaluatorSpec {
    pub fn build(&self) -> Result<Box<dyn Evaluator>, EvalError> {
        match self {
            EvaluatorSpec::Builtin { depth } => Ok(Box::new(BuiltinEvaluator::new(*depth))),
            EvaluatorSpec::External { path, depth } => {
                Ok(Box::new(UciEvaluator::spawn(path.clone(), *depth)?))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            EvaluatorSpec::Builtin { depth } => format!("builtin-d{depth}"),
            EvaluatorSpec::External { path, depth } => format!("{}-d{depth}", path.display()),
        }
    }
}

/// Per-game memo of evaluator answers keyed by board and list length.
#[derive(Default)]
pub(crate) struct Memo {
    entries: HashMap<(Board, usize), Vec<Scored>, FastBuild>,
}

impl Memo {
    const LIMIT: usize = 1 << 20;

    pub(crate) fn get(&self, board: &Board, k: usize) -> Option<&Vec<Scored>> {
        self.entries.get(&(*board, k))
    }

    pub(crate) fn put(&mut self, board: &Board, k: usize, value: Vec<Scored>) {
        if self.entries.len() >= Self::LIMIT {
            self.entries.clear();
        }
        self.entries.insert((*board, k), value);
    }

    pub(crate) fn clear(&mut self) {
        self.entries.clear();
    }
}
