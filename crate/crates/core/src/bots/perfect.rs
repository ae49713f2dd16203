use super::evaluator::Evaluator;
use crate::arbiter::{CaptureNotice, Strategy, StrategyError};
use crate::board::{request_space, Board, Color, MoveRequest, MoveResult, SenseResult, Square};

/// The sense is irrelevant to a bot that sees the board, so it is fixed.
pub const PERFECT_SENSE_CENTER: Square = Square::from_index(27); // d4

/// Plays the evaluator's best move on the true board.
pub struct PerfectInfoBot {
    name: String,
    evaluator: Box<dyn Evaluator>,
    color: Color,
    truth: Option<Board>,
}

impl PerfectInfoBot {
    pub fn new(name: impl Into<String>, evaluator: Box<dyn Evaluator>) -> PerfectInfoBot {
        PerfectInfoBot { name: name.into(), evaluator, color: Color::White, truth: None }
    }
}

impl Strategy for PerfectInfoBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn requires_ground_truth(&self) -> bool {
        true
    }

    fn handle_game_start(&mut self, color: Color, _initial: &Board) {
        self.color = color;
        self.truth = None;
        self.evaluator.new_game();
    }

    fn handle_ground_truth(&mut self, truth: &Board) {
        self.truth = Some(*truth);
    }

    fn handle_opponent_move(&mut self, _notice: Option<CaptureNotice>) {}

    fn choose_sense(&mut self) -> Result<Square, StrategyError> {
        Ok(PERFECT_SENSE_CENTER)
    }

    fn handle_sense_result(&mut self, _result: &SenseResult) {}

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError> {
        let truth = self.truth.ok_or_else(|| StrategyError::Other("no ground truth delivered".into()))?;
        let best = self
            .evaluator
            .best_move(&truth)
            .map_err(|e| StrategyError::Evaluator(e.to_string()))?;
        let space = request_space(&truth, self.color).map_err(|e| StrategyError::Other(e.to_string()))?;
        if space.contains(&best.mv) {
            Ok(best.mv)
        } else {
            log::warn!("{}: evaluator move {} not requestable, passing", self.name, best.mv);
            Ok(MoveRequest::Pass)
        }
    }

    fn handle_move_result(&mut self, _result: &MoveResult) {}
}
