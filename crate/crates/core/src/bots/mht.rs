use std::collections::HashMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::evaluator::{EvalError, Evaluator, Scored};
use super::pick;
use crate::arbiter::{CaptureNotice, Strategy, StrategyError};
use crate::board::{
    block_mask, request_space, Bits, Board, Color, MoveRequest, MoveResult, SenseResult, Square, SENSE_CENTERS,
};
use crate::infoset::InfoSet;

/// Boards the predictor evaluates per sense.
pub const PREDICTOR_SAMPLE: usize = 512;
/// Moves per sampled board the predictor spreads weight over.
pub const PREDICTOR_TOP_K: usize = 5;

/// Exact information-set tracking with the recovery paths for sets that
/// were truncated by the cap.
struct Tracker {
    name: String,
    set: InfoSet,
}

impl Tracker {
    fn new(name: &str, color: Color, cap: usize) -> Tracker {
        Tracker { name: name.to_string(), set: InfoSet::with_cap(color, cap) }
    }

    fn opponent_moved(&mut self, notice: Option<CaptureNotice>) {
        if let Err(e) = self.set.expand_opponent_turn(notice) {
            log::warn!("{}: {e}; patching", self.name);
            self.set.patch_opponent_turn(notice);
        }
    }

    fn sensed(&mut self, result: &SenseResult) {
        if let Err(e) = self.set.filter_sense(result) {
            log::warn!("{}: {e}; patching", self.name);
            self.set.patch_sense(result);
        }
    }

    fn moved(&mut self, result: &MoveResult) {
        if let Err(e) = self.set.apply_own_move(result.requested, result) {
            log::warn!("{}: {e}; patching", self.name);
            self.set.patch_own_move(result);
        }
    }
}

/// The boards to evaluate: all of them, or a uniform sample of `cap`.
fn sample_boards<'a, R: Rng>(boards: &'a [Board], cap: Option<usize>, rng: &mut R) -> Vec<&'a Board> {
    match cap {
        Some(n) if n < boards.len() => index::sample(rng, boards.len(), n).into_iter().map(|i| &boards[i]).collect(),
        _ => boards.iter().collect(),
    }
}

/// Most frequent requestable move among `votes`; ties broken at random.
/// Falls back to less frequent moves when the leaders are not requestable.
pub(crate) fn modal_move<R: Rng>(votes: &[MoveRequest], space: &[MoveRequest], rng: &mut R) -> MoveRequest {
    let mut counts: HashMap<MoveRequest, usize> = HashMap::new();
    for &m in votes {
        *counts.entry(m).or_default() += 1;
    }
    let mut tally: Vec<(usize, MoveRequest)> =
        counts.into_iter().filter(|(m, _)| space.contains(m)).map(|(m, c)| (c, m)).collect();
    if tally.is_empty() {
        return MoveRequest::Pass;
    }
    // sorted so the random tie-break does not depend on hash order
    tally.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let top = tally[0].0;
    let leaders: Vec<MoveRequest> = tally.iter().take_while(|e| e.0 == top).map(|e| e.1).collect();
    pick(rng, &leaders)
}

/// Tracks the full information set, senses to minimize its expected size and
/// plays the move that is best on the most boards.
pub struct MhtBot {
    name: String,
    evaluator: Box<dyn Evaluator>,
    rng: ChaCha8Rng,
    color: Color,
    cap: usize,
    move_sample: Option<usize>,
    tracker: Tracker,
}

impl MhtBot {
    pub fn new(
        name: impl Into<String>,
        evaluator: Box<dyn Evaluator>,
        seed: u64,
        cap: usize,
        move_sample: Option<usize>,
    ) -> MhtBot {
        let name = name.into();
        MhtBot {
            tracker: Tracker::new(&name, Color::White, cap),
            name,
            evaluator,
            rng: ChaCha8Rng::seed_from_u64(seed),
            color: Color::White,
            cap,
            move_sample,
        }
    }
}

fn modal_best_move<R: Rng>(
    set: &InfoSet,
    color: Color,
    evaluator: &mut dyn Evaluator,
    sample: Option<usize>,
    rng: &mut R,
) -> Result<MoveRequest, StrategyError> {
    let boards = sample_boards(set.boards(), sample, rng);
    let mut votes = Vec::with_capacity(boards.len());
    for b in boards {
        votes.push(evaluator.best_move(b).map_err(|e| StrategyError::Evaluator(e.to_string()))?.mv);
    }
    // own pieces agree on every board, so any board gives the request space
    let space = request_space(&set.boards()[0], color).map_err(|e| StrategyError::Other(e.to_string()))?;
    Ok(modal_move(&votes, &space, rng))
}

impl Strategy for MhtBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn handle_game_start(&mut self, color: Color, _initial: &Board) {
        self.color = color;
        self.tracker = Tracker::new(&self.name, color, self.cap);
        self.evaluator.new_game();
    }

    fn handle_opponent_move(&mut self, notice: Option<CaptureNotice>) {
        self.tracker.opponent_moved(notice);
    }

    fn choose_sense(&mut self) -> Result<Square, StrategyError> {
        Ok(self.tracker.set.min_expected_sense(&mut self.rng))
    }

    fn handle_sense_result(&mut self, result: &SenseResult) {
        self.tracker.sensed(result);
    }

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError> {
        modal_best_move(&self.tracker.set, self.color, self.evaluator.as_mut(), self.move_sample, &mut self.rng)
    }

    fn handle_move_result(&mut self, result: &MoveResult) {
        self.tracker.moved(result);
    }

    fn tracked_infoset(&self) -> Option<&InfoSet> {
        Some(&self.tracker.set)
    }
}

/// Per-square weight of where the opponent is expected to move.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareWeights(pub [f64; 64]);

impl Default for SquareWeights {
    fn default() -> Self {
        SquareWeights([0.0; 64])
    }
}

impl SquareWeights {
    /// Spreads one unit of weight over the destinations of `top`, in
    /// proportion to how far each score is above the worst of them.
    pub fn add_top_k(&mut self, top: &[Scored]) {
        if top.is_empty() {
            return;
        }
        let min = top.iter().map(|s| s.score).min().unwrap();
        let total: f64 = top.iter().map(|s| (s.score - min) as f64).sum();
        for s in top {
            let w = if total > 0.0 { (s.score - min) as f64 / total } else { 1.0 / top.len() as f64 };
            if let Some(to) = s.mv.to_square() {
                self.0[to.index()] += w;
            }
        }
    }

    pub fn block_total(&self, center: Square) -> f64 {
        Bits(block_mask(center)).map(|s| self.0[s.index()]).sum()
    }

    /// Centers covering the most weight.
    pub fn best_centers(&self) -> Vec<Square> {
        let totals: Vec<f64> = SENSE_CENTERS.iter().map(|&c| self.block_total(c)).collect();
        let best = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SENSE_CENTERS.iter().zip(&totals).filter(|(_, &t)| t == best).map(|(&c, _)| c).collect()
    }
}

/// Opponent's likely destinations over a sample of the boards the owner
/// could have left behind.
pub fn predicted_weights<R: Rng>(
    snapshot: &[Board],
    evaluator: &mut dyn Evaluator,
    rng: &mut R,
) -> Result<(SquareWeights, usize), EvalError> {
    let boards = sample_boards(snapshot, Some(PREDICTOR_SAMPLE), rng);
    let mut weights = SquareWeights::default();
    for b in &boards {
        weights.add_top_k(&evaluator.top_k(b, PREDICTOR_TOP_K)?);
    }
    Ok((weights, boards.len()))
}

/// Moves like [`MhtBot`] but senses where the opponent's last move most
/// likely landed.
pub struct PredictorBot {
    name: String,
    evaluator: Box<dyn Evaluator>,
    rng: ChaCha8Rng,
    color: Color,
    cap: usize,
    move_sample: Option<usize>,
    tracker: Tracker,
    /// Boards right after the owner's last move, opponent to move.
    snapshot: Vec<Board>,
    last_sampled: usize,
}

impl PredictorBot {
    pub fn new(
        name: impl Into<String>,
        evaluator: Box<dyn Evaluator>,
        seed: u64,
        cap: usize,
        move_sample: Option<usize>,
    ) -> PredictorBot {
        let name = name.into();
        PredictorBot {
            tracker: Tracker::new(&name, Color::White, cap),
            name,
            evaluator,
            rng: ChaCha8Rng::seed_from_u64(seed),
            color: Color::White,
            cap,
            move_sample,
            snapshot: Vec::new(),
            last_sampled: 0,
        }
    }

    /// Boards evaluated by the most recent sense decision.
    pub fn last_sampled(&self) -> usize {
        self.last_sampled
    }
}

impl Strategy for PredictorBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn handle_game_start(&mut self, color: Color, initial: &Board) {
        self.color = color;
        self.tracker = Tracker::new(&self.name, color, self.cap);
        self.snapshot = if color == Color::Black { vec![*initial] } else { Vec::new() };
        self.last_sampled = 0;
        self.evaluator.new_game();
    }

    fn handle_opponent_move(&mut self, notice: Option<CaptureNotice>) {
        self.tracker.opponent_moved(notice);
    }

    fn choose_sense(&mut self) -> Result<Square, StrategyError> {
        if self.snapshot.is_empty() {
            // White's first turn: nothing has moved yet
            self.last_sampled = 0;
            return Ok(self.tracker.set.min_expected_sense(&mut self.rng));
        }
        let (weights, n) = predicted_weights(&self.snapshot, self.evaluator.as_mut(), &mut self.rng)
            .map_err(|e| StrategyError::Evaluator(e.to_string()))?;
        self.last_sampled = n;
        Ok(pick(&mut self.rng, &weights.best_centers()))
    }

    fn handle_sense_result(&mut self, result: &SenseResult) {
        self.tracker.sensed(result);
    }

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError> {
        modal_best_move(&self.tracker.set, self.color, self.evaluator.as_mut(), self.move_sample, &mut self.rng)
    }

    fn handle_move_result(&mut self, result: &MoveResult) {
        self.tracker.moved(result);
        self.snapshot = self.tracker.set.boards().to_vec();
    }

    fn tracked_infoset(&self) -> Option<&InfoSet> {
        Some(&self.tracker.set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{resolve, sense};
    use crate::bots::BuiltinEvaluator;

    fn mv(s: &str) -> MoveRequest {
        s.parse().unwrap()
    }

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    /// Replies with a fixed list regardless of the board.
    struct Canned(Vec<Scored>);

    impl Evaluator for Canned {
        fn name(&self) -> String {
            "canned".into()
        }
        fn top_k(&mut self, _board: &Board, k: usize) -> Result<Vec<Scored>, EvalError> {
            Ok(self.0.iter().take(k).copied().collect())
        }
    }

    /// Counts how often it is asked.
    struct Counting(usize);

    impl Evaluator for Counting {
        fn name(&self) -> String {
            "counting".into()
        }
        fn top_k(&mut self, _board: &Board, _k: usize) -> Result<Vec<Scored>, EvalError> {
            self.0 += 1;
            Ok(vec![Scored { mv: MoveRequest::Pass, score: 0 }])
        }
    }

    #[test]
    fn modal_move_takes_the_majority() {
        let space = request_space(&Board::initial(), Color::White).unwrap();
        let votes = [mv("e2e4"), mv("e2e4"), mv("d2d4")];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(modal_move(&votes, &space, &mut rng), mv("e2e4"));
    }

    #[test]
    fn modal_move_ties_are_fair() {
        let space = request_space(&Board::initial(), Color::White).unwrap();
        let votes = [mv("e2e4"), mv("e2e4"), mv("d2d4"), mv("d2d4"), mv("g1f3")];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let e4 = (0..n).filter(|_| modal_move(&votes, &space, &mut rng) == mv("e2e4")).count();
        let frac = e4 as f64 / n as f64;
        // binomial(10000, 0.5) has sd 0.005
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn modal_move_skips_unrequestable_leaders() {
        let space = request_space(&Board::initial(), Color::White).unwrap();
        let votes = [mv("e1e3"), mv("e1e3"), mv("e1e3"), mv("d2d4")];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(modal_move(&votes, &space, &mut rng), mv("d2d4"));
        assert_eq!(modal_move(&[mv("e1e3")], &space, &mut rng), MoveRequest::Pass);
    }

    #[test]
    fn weights_follow_the_normalized_scores() {
        let top = [
            Scored { mv: mv("e2e4"), score: 100 },
            Scored { mv: mv("d2d4"), score: 50 },
            Scored { mv: mv("c2c4"), score: 30 },
            Scored { mv: mv("b2b4"), score: 20 },
            Scored { mv: mv("a2a4"), score: 0 },
        ];
        let mut w = SquareWeights::default();
        w.add_top_k(&top);
        let expect = [("e4", 0.5), ("d4", 0.25), ("c4", 0.15), ("b4", 0.10), ("a4", 0.0)];
        for (s, x) in expect {
            assert!((w.0[sq(s).index()] - x).abs() < 1e-12, "{s}");
        }
        assert!((w.0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_scores_share_weight_evenly() {
        let top: Vec<Scored> = ["e2e4", "d2d4", "c2c4", "b2b4", "a2a4"]
            .iter()
            .map(|m| Scored { mv: mv(m), score: 7 })
            .collect();
        let mut w = SquareWeights::default();
        w.add_top_k(&top);
        for s in ["e4", "d4", "c4", "b4", "a4"] {
            assert!((w.0[sq(s).index()] - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn sense_covers_the_heaviest_square() {
        let top = vec![
            Scored { mv: mv("e7e5"), score: 90 },
            Scored { mv: mv("d7d6"), score: 10 },
            Scored { mv: mv("a7a6"), score: 0 },
        ];
        let mut bot = PredictorBot::new("p", Box::new(Canned(top)), 3, 1000, None);
        bot.handle_game_start(Color::Black, &Board::initial());
        let center = bot.choose_sense().unwrap();
        assert_ne!(block_mask(center) & sq("e5").bit(), 0, "{center}");
    }

    #[test]
    fn small_snapshots_are_used_whole() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut set = InfoSet::new(Color::Black);
        set.expand_opponent_turn(None).unwrap();
        let boards = set.boards().to_vec();
        let mut e = Counting(0);
        let (_, n) = predicted_weights(&boards, &mut e, &mut rng).unwrap();
        assert_eq!((n, e.0), (21, 21));
    }

    #[test]
    fn large_snapshots_are_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut set = InfoSet::new(Color::White);
        while set.len() <= PREDICTOR_SAMPLE {
            let (_, res) = resolve(&set.boards()[0], MoveRequest::Pass).unwrap();
            set.apply_own_move(MoveRequest::Pass, &res).unwrap();
            set.expand_opponent_turn(None).unwrap();
        }
        let mut e = Counting(0);
        let (_, n) = predicted_weights(set.boards(), &mut e, &mut rng).unwrap();
        assert_eq!((n, e.0), (PREDICTOR_SAMPLE, PREDICTOR_SAMPLE));
    }

    #[test]
    fn mht_tracks_a_quiet_game() {
        let mut bot = MhtBot::new("m", Box::new(BuiltinEvaluator::new(1)), 8, 100_000, None);
        bot.handle_game_start(Color::Black, &Board::initial());
        let (truth, _) = resolve(&Board::initial(), mv("e2e4")).unwrap();
        bot.handle_opponent_move(None);
        assert_eq!(bot.tracked_infoset().unwrap().len(), 21);
        let c = bot.choose_sense().unwrap();
        bot.handle_sense_result(&sense(&truth, c).unwrap());
        assert!(bot.tracked_infoset().unwrap().contains(&truth));
        let m = bot.choose_move().unwrap();
        assert!(request_space(&truth, Color::Black).unwrap().contains(&m));
    }
}
