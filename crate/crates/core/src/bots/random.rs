use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pick;
use crate::arbiter::{CaptureNotice, Strategy, StrategyError};
use crate::board::{request_space, Board, Color, MoveRequest, MoveResult, SenseResult, Square, SENSE_CENTERS};

/// Senses uniformly at random and plays a uniformly random request on the
/// true board, passing with a fixed probability.
pub struct RandomBot {
    name: String,
    pass_prob: f64,
    rng: ChaCha8Rng,
    color: Color,
    truth: Option<Board>,
}

impl RandomBot {
    pub fn new(name: impl Into<String>, pass_prob: f64, seed: u64) -> RandomBot {
        RandomBot {
            name: name.into(),
            pass_prob: pass_prob.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
            color: Color::White,
            truth: None,
        }
    }
}

impl Strategy for RandomBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn requires_ground_truth(&self) -> bool {
        true
    }

    fn handle_game_start(&mut self, color: Color, _initial: &Board) {
        self.color = color;
        self.truth = None;
    }

    fn handle_ground_truth(&mut self, truth: &Board) {
        self.truth = Some(*truth);
    }

    fn handle_opponent_move(&mut self, _notice: Option<CaptureNotice>) {}

    fn choose_sense(&mut self) -> Result<Square, StrategyError> {
        Ok(pick(&mut self.rng, &SENSE_CENTERS))
    }

    fn handle_sense_result(&mut self, _result: &SenseResult) {}

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError> {
        let truth = self.truth.ok_or_else(|| StrategyError::Other("no ground truth delivered".into()))?;
        if self.rng.gen_bool(self.pass_prob) {
            return Ok(MoveRequest::Pass);
        }
        let space = request_space(&truth, self.color).map_err(|e| StrategyError::Other(e.to_string()))?;
        let moves = &space[1..];
        if moves.is_empty() {
            return Ok(MoveRequest::Pass);
        }
        Ok(pick(&mut self.rng, moves))
    }

    fn handle_move_result(&mut self, _result: &MoveResult) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moves(bot: &mut RandomBot, n: usize) -> Vec<MoveRequest> {
        bot.handle_game_start(Color::White, &Board::initial());
        bot.handle_ground_truth(&Board::initial());
        (0..n).map(|_| bot.choose_move().unwrap()).collect()
    }

    #[test]
    fn pass_probability_extremes() {
        assert!(moves(&mut RandomBot::new("r", 1.0, 1), 500).iter().all(|m| m.is_pass()));
        assert!(moves(&mut RandomBot::new("r", 0.0, 1), 500).iter().all(|m| !m.is_pass()));
    }

    #[test]
    fn pass_fraction_within_binomial_bound() {
        let ms = moves(&mut RandomBot::new("r", 0.25, 9), 10_000);
        let passes = ms.iter().filter(|m| m.is_pass()).count() as f64 / 10_000.0;
        assert!((0.235..=0.265).contains(&passes), "{passes}");
    }

    #[test]
    fn moves_come_from_the_request_space() {
        let space = request_space(&Board::initial(), Color::White).unwrap();
        for m in moves(&mut RandomBot::new("r", 0.25, 3), 300) {
            assert!(space.contains(&m));
        }
    }

    #[test]
    fn sense_histogram_is_flat() {
        let mut bot = RandomBot::new("r", 0.25, 5);
        let mut counts = [0u32; 36];
        for _ in 0..36_000 {
            let c = bot.choose_sense().unwrap();
            counts[SENSE_CENTERS.iter().position(|&x| x == c).unwrap()] += 1;
        }
        // multinomial: sd = sqrt(36000 * 1/36 * 35/36) ~ 31.2
        let sd = (36_000.0f64 / 36.0 * 35.0 / 36.0).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 4.0 * sd, "{c}");
        }
    }

    #[test]
    fn refuses_to_move_without_truth() {
        let mut bot = RandomBot::new("r", 0.0, 1);
        bot.handle_game_start(Color::White, &Board::initial());
        assert!(bot.choose_move().is_err());
    }
}
