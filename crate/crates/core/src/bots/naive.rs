use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::evaluator::Evaluator;
use super::pick;
use crate::arbiter::{CaptureNotice, Strategy, StrategyError};
use crate::board::{
    apply_result, block_mask, request_space, Bits, Board, CastlingRights, Color, MoveRequest, MoveResult, Piece,
    PieceKind, SenseResult, Square, SENSE_CENTERS,
};

const LIGHT_SQUARES: u64 = 0x55AA_55AA_55AA_55AA;

/// Keeps a single guessed board and plays the evaluator's move on it.
///
/// Senses where its knowledge is stalest: every square carries the number of
/// turns since it was last seen, own squares count as fresh.
pub struct NaiveBot {
    name: String,
    evaluator: Box<dyn Evaluator>,
    rng: ChaCha8Rng,
    color: Color,
    hypothesis: Board,
    ages: [u32; 64],
}

impl NaiveBot {
    pub fn new(name: impl Into<String>, evaluator: Box<dyn Evaluator>, seed: u64) -> NaiveBot {
        NaiveBot {
            name: name.into(),
            evaluator,
            rng: ChaCha8Rng::seed_from_u64(seed),
            color: Color::White,
            hypothesis: Board::initial(),
            ages: [0; 64],
        }
    }

    pub fn hypothesis(&self) -> &Board {
        &self.hypothesis
    }

    pub fn ages(&self) -> &[u32; 64] {
        &self.ages
    }

    /// Centers whose block has the highest total age.
    pub fn stalest_centers(&self) -> Vec<Square> {
        let total = |c: Square| Bits(block_mask(c)).map(|s| self.ages[s.index()]).sum::<u32>();
        let best = SENSE_CENTERS.iter().map(|&c| total(c)).max().unwrap_or(0);
        SENSE_CENTERS.iter().copied().filter(|&c| total(c) == best).collect()
    }

    fn pin_own_squares(&mut self) {
        for s in Bits(self.hypothesis.color_bb(self.color)) {
            self.ages[s.index()] = 0;
        }
    }

    /// Pieces of the opponent that exist at most once on a board in a normal
    /// game: the king, the queen and one bishop per square color. Seeing one
    /// removes its stale copies outside the block.
    fn forget_moved_unique_pieces(&mut self, result: &SenseResult, block: u64) {
        let opp = self.color.opposite();
        for &(sq, piece) in &result.contents {
            let Some(p) = piece.filter(|p| p.color == opp) else { continue };
            let region = match p.kind {
                PieceKind::King | PieceKind::Queen => !0u64,
                PieceKind::Bishop if sq.bit() & LIGHT_SQUARES != 0 => LIGHT_SQUARES,
                PieceKind::Bishop => !LIGHT_SQUARES,
                _ => continue,
            };
            for s in Bits(self.hypothesis.pieces(opp, p.kind) & region & !block) {
                self.hypothesis.clear(s);
            }
        }
    }

    /// Puts a lost opponent king back on the nearest free square outside
    /// the sensed block.
    fn replace_king(&mut self, last_seen: Square, block: u64) {
        let free = !self.hypothesis.occupied() & !block;
        let Some(best) = Bits(free).map(|s| s.distance(last_seen)).min() else { return };
        let nearest: Vec<Square> = Bits(free).filter(|s| s.distance(last_seen) == best).collect();
        let at = pick(&mut self.rng, &nearest);
        self.hypothesis.put(at, Piece::new(self.color.opposite(), PieceKind::King));
    }
}

impl Strategy for NaiveBot {
    fn name(&self) -> &str {
        &self.name
    }

    fn handle_game_start(&mut self, color: Color, initial: &Board) {
        self.color = color;
        self.hypothesis = *initial;
        self.ages = [0; 64];
        self.evaluator.new_game();
    }

    fn handle_opponent_move(&mut self, notice: Option<CaptureNotice>) {
        if let Some(n) = notice {
            self.hypothesis.clear(n.square);
            let mut rights = self.hypothesis.castling();
            rights.remove(CastlingRights::mask_for_square(n.square));
            self.hypothesis.set_castling(rights);
        }
        self.hypothesis.set_ep_square(None);
        self.hypothesis.set_side_to_move(self.color);
    }

    fn choose_sense(&mut self) -> Result<Square, StrategyError> {
        for a in self.ages.iter_mut() {
            *a += 1;
        }
        self.pin_own_squares();
        let centers = self.stalest_centers();
        Ok(pick(&mut self.rng, &centers))
    }

    fn handle_sense_result(&mut self, result: &SenseResult) {
        let opp = self.color.opposite();
        let block = block_mask(result.center);
        let king_before = self.hypothesis.king_square(opp);
        self.forget_moved_unique_pieces(result, block);
        for &(s, p) in &result.contents {
            self.hypothesis.set(s, p);
            self.ages[s.index()] = 0;
        }
        if !self.hypothesis.has_king(opp) {
            if let Some(k) = king_before {
                self.replace_king(k, block);
            }
        }
    }

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError> {
        let mut board = self.hypothesis;
        board.set_side_to_move(self.color);
        let best = self
            .evaluator
            .best_move(&board)
            .map_err(|e| StrategyError::Evaluator(e.to_string()))?;
        let space = request_space(&board, self.color).map_err(|e| StrategyError::Other(e.to_string()))?;
        Ok(if space.contains(&best.mv) { best.mv } else { MoveRequest::Pass })
    }

    fn handle_move_result(&mut self, result: &MoveResult) {
        let mut board = self.hypothesis;
        board.set_side_to_move(self.color);
        self.hypothesis = apply_result(&board, result);
        self.pin_own_squares();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::sense;
    use crate::bots::BuiltinEvaluator;

    fn bot(color: Color, start: &Board) -> NaiveBot {
        let mut b = NaiveBot::new("n", Box::new(BuiltinEvaluator::new(1)), 4);
        b.handle_game_start(color, start);
        b
    }

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    #[test]
    fn first_sense_avoids_own_pieces() {
        let mut b = bot(Color::White, &Board::initial());
        b.choose_sense().unwrap();
        let stale = b.stalest_centers();
        // every block free of own pieces has mean age 1 and is a candidate
        let expect: Vec<Square> = SENSE_CENTERS
            .iter()
            .copied()
            .filter(|&c| block_mask(c) & Board::initial().color_bb(Color::White) == 0)
            .collect();
        assert_eq!(stale, expect);
        assert!(stale.iter().all(|c| c.rank() >= 3));
        for _ in 0..50 {
            let mut fresh = bot(Color::White, &Board::initial());
            assert!(expect.contains(&fresh.choose_sense().unwrap()));
        }
    }

    #[test]
    fn sensing_resets_ages() {
        let mut b = bot(Color::White, &Board::initial());
        let c = b.choose_sense().unwrap();
        b.handle_sense_result(&sense(&Board::initial(), c).unwrap());
        for s in Bits(block_mask(c)) {
            assert_eq!(b.ages()[s.index()], 0);
        }
        assert!(!b.stalest_centers().contains(&c));
    }

    #[test]
    fn queen_seen_elsewhere_is_moved() {
        let mut b = bot(Color::White, &Board::initial());
        let truth = Board::from_fen("rnb1kbnr/pppppppp/8/8/7q/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap();
        b.handle_sense_result(&sense(&truth, sq("g4")).unwrap());
        let h = b.hypothesis();
        assert_eq!(h.pieces(Color::Black, PieceKind::Queen), sq("h4").bit());
        assert_eq!(h.piece_at(sq("d8")), None);
    }

    #[test]
    fn bishops_are_unique_per_square_color() {
        let mut b = bot(Color::White, &Board::initial());
        // the c8 bishop (light square) turns up on f5; the f8 bishop stays
        let truth = Board::from_fen("rn1qkbnr/pppppppp/8/5b2/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap();
        b.handle_sense_result(&sense(&truth, sq("f4")).unwrap());
        let h = b.hypothesis();
        assert_eq!(h.piece_at(sq("c8")), None);
        assert_eq!(h.piece_at(sq("f8")), Some(Piece::new(Color::Black, PieceKind::Bishop)));
        assert_eq!(h.pieces(Color::Black, PieceKind::Bishop).count_ones(), 2);
    }

    #[test]
    fn vanished_king_reappears_nearby() {
        let start = Board::from_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        // the king actually went to a8, far from where it was looked for
        let truth = Board::from_fen("k7/8/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        let mut b = bot(Color::White, &start);
        b.handle_sense_result(&sense(&truth, sq("e7")).unwrap());
        let k = b.hypothesis().king_square(Color::Black).unwrap();
        assert_eq!(block_mask(sq("e7")) & k.bit(), 0);
        assert_eq!(k.distance(sq("e8")), 2);
        assert_eq!(b.hypothesis().pieces(Color::Black, PieceKind::King).count_ones(), 1);
    }

    #[test]
    fn own_capture_clears_the_hypothesis() {
        let mut b = bot(Color::Black, &Board::initial());
        b.handle_opponent_move(Some(CaptureNotice { square: sq("d7") }));
        assert_eq!(b.hypothesis().piece_at(sq("d7")), None);
        assert_eq!(b.hypothesis().side_to_move(), Color::Black);
    }

    #[test]
    fn plays_the_evaluator_move_on_the_hypothesis() {
        let start = Board::from_fen("8/8/8/4k3/3P4/8/8/4K3 w - - 0 1").unwrap();
        let mut b = bot(Color::White, &start);
        let m = b.choose_move().unwrap();
        assert_eq!(m, "d4e5".parse().unwrap());
        assert!(request_space(&start, Color::White).unwrap().contains(&m));
    }
}
