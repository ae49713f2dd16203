//! Fixed-depth alpha-beta over pseudo-legal chess moves with king capture
//! as the terminal condition.

use super::evaluator::{EvalError, Evaluator, Memo, Scored};
use crate::board::standard::{is_attacked, make_move, pseudo_legal_moves, CastleRule};
use crate::board::{bishop_attacks, knight_attacks, rook_attacks, Bits, Board, Color, MoveRequest, PieceKind};

/// Score for capturing the opponent's king; material never comes close.
pub const MATE: i32 = 100_000;

const MOBILITY: i32 = 2;

fn value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 100,
        PieceKind::Knight => 320,
        PieceKind::Bishop => 330,
        PieceKind::Rook => 500,
        PieceKind::Queen => 900,
        PieceKind::King => 0,
    }
}

/// Material plus mobility, from the side to move's point of view.
pub fn static_eval(board: &Board) -> i32 {
    let occ = board.occupied();
    let mut total = [0i32; 2];
    for color in Color::ALL {
        let own = board.color_bb(color);
        let mut score = 0;
        for kind in PieceKind::ALL {
            let bb = board.pieces(color, kind);
            score += value(kind) * bb.count_ones() as i32;
            let reach = |from| match kind {
                PieceKind::Knight => knight_attacks(from),
                PieceKind::Bishop => bishop_attacks(from, occ),
                PieceKind::Rook => rook_attacks(from, occ),
                PieceKind::Queen => bishop_attacks(from, occ) | rook_attacks(from, occ),
                _ => 0,
            };
            if matches!(kind, PieceKind::Pawn | PieceKind::King) {
                continue;
            }
            for from in Bits(bb) {
                score += MOBILITY * (reach(from) & !own).count_ones() as i32;
            }
        }
        total[color.index()] = score;
    }
    let us = board.side_to_move();
    total[us.index()] - total[us.opposite().index()]
}

/// Deterministic search: moves are ordered by victim, attacker, then origin
/// and destination counted from the mover's side, so a color-flipped
/// position yields the mirrored answer.
pub struct BuiltinEvaluator {
    depth: u32,
    memo: Memo,
    scratch: Vec<MoveRequest>,
    stack: Vec<Vec<(u32, MoveRequest)>>,
    nodes: u64,
}

impl BuiltinEvaluator {
    pub fn new(depth: u32) -> BuiltinEvaluator {
        BuiltinEvaluator {
            depth: depth.max(1),
            memo: Memo::default(),
            scratch: Vec::with_capacity(128),
            stack: Vec::new(),
            nodes: 0,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Nodes visited since construction.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn ordered(&mut self, board: &Board, ply: usize) -> Vec<(u32, MoveRequest)> {
        if self.stack.len() <= ply {
            self.stack.resize_with(ply + 1, Vec::new);
        }
        let mut out = std::mem::take(&mut self.stack[ply]);
        out.clear();
        self.scratch.clear();
        pseudo_legal_moves(board, CastleRule::IgnoreCheck, &mut self.scratch);
        let us = board.side_to_move();
        let rel = |i: usize| if us == Color::White { i as u32 } else { (i ^ 56) as u32 };
        for &m in &self.scratch {
            let MoveRequest::Move { from, to, promotion } = m else { continue };
            let attacker = board.kind_at(from).map_or(0, |k| k.index() as u32);
            let victim = match board.kind_at(to) {
                Some(PieceKind::King) => 7,
                Some(k) => k.index() as u32 + 1,
                None if attacker == 0 && from.file() != to.file() => 1,
                None => 0,
            };
            let primary = if victim > 0 { (7 - victim) * 8 + attacker } else { 64 };
            let promo = match promotion {
                Some(PieceKind::Queen) | None => 0,
                Some(PieceKind::Rook) => 1,
                Some(PieceKind::Bishop) => 2,
                Some(_) => 3,
            };
            let key = (primary << 16) | (rel(from.index()) << 10) | (rel(to.index()) << 4) | promo;
            out.push((key, m));
        }
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    fn negamax(&mut self, board: &Board, depth: u32, mut alpha: i32, beta: i32, ply: usize) -> i32 {
        self.nodes += 1;
        let us = board.side_to_move();
        if !board.has_king(us) {
            return -MATE + ply as i32;
        }
        match board.king_square(us.opposite()) {
            None => return MATE - ply as i32,
            Some(k) if is_attacked(board, k, us) => return MATE - ply as i32 - 1,
            Some(_) => {}
        }
        if depth == 0 {
            return static_eval(board);
        }
        let moves = self.ordered(board, ply);
        if moves.is_empty() {
            self.stack[ply] = moves;
            return static_eval(board);
        }
        for &(_, m) in &moves {
            let child = make_move(board, m);
            let score = -self.negamax(&child, depth - 1, -beta, -alpha, ply + 1);
            if score >= beta {
                alpha = beta;
                break;
            }
            if score > alpha {
                alpha = score;
            }
        }
        self.stack[ply] = moves;
        alpha
    }

    fn search_root(&mut self, board: &Board, k: usize) -> Vec<Scored> {
        let us = board.side_to_move();
        if !board.has_king(us) {
            return vec![Scored { mv: MoveRequest::Pass, score: -MATE }];
        }
        let moves = self.ordered(board, 0);
        if moves.is_empty() {
            self.stack[0] = moves;
            return vec![Scored { mv: MoveRequest::Pass, score: static_eval(board) }];
        }
        let k = k.max(1);
        let mut top: Vec<Scored> = Vec::with_capacity(k + 1);
        for &(_, m) in &moves {
            let floor = if top.len() < k { -MATE - 1 } else { top[k - 1].score };
            let child = make_move(board, m);
            let score = -self.negamax(&child, self.depth - 1, -(MATE + 1), -floor, 1);
            if score > floor {
                // earlier moves stay ahead of later ones with the same score
                let at = top.iter().position(|s| s.score < score).unwrap_or(top.len());
                top.insert(at, Scored { mv: m, score });
                top.truncate(k);
            }
        }
        self.stack[0] = moves;
        top
    }
}

impl Evaluator for BuiltinEvaluator {
    fn name(&self) -> String {
        format!("builtin-d{}", self.depth)
    }

    fn top_k(&mut self, board: &Board, k: usize) -> Result<Vec<Scored>, EvalError> {
        if let Some(hit) = self.memo.get(board, k) {
            return Ok(hit.clone());
        }
        let top = self.search_root(board, k);
        self.memo.put(board, k, top.clone());
        Ok(top)
    }

    fn new_game(&mut self) {
        self.memo.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::{Piece, Square};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fen(s: &str) -> Board {
        Board::from_fen(s).unwrap()
    }

    fn mv(s: &str) -> MoveRequest {
        s.parse().unwrap()
    }

    #[test]
    fn takes_a_free_queen() {
        let b = fen("4k3/8/8/3q4/8/8/8/3RK3 w - - 0 1");
        let best = BuiltinEvaluator::new(1).best_move(&b).unwrap();
        assert_eq!(best.mv, mv("d1d5"));
        assert!(best.score > 400);
    }

    #[test]
    fn king_capture_beats_everything_at_any_depth() {
        // queen hanging on d5 as a decoy; the e8 king is on the rook's file
        let b = fen("4k3/8/8/3q4/8/8/8/4RK2 w - - 0 1");
        for depth in 1..=3 {
            let best = BuiltinEvaluator::new(depth).best_move(&b).unwrap();
            assert_eq!(best.mv, mv("e1e8"), "depth {depth}");
            assert_eq!(best.score, MATE - 1);
        }
    }

    #[test]
    fn avoids_leaving_king_capturable() {
        // depth 2 sees that grabbing the pawn lets the rook take the king
        let b = fen("4k3/8/8/8/8/8/3p4/r3K3 w - - 0 1");
        let best = BuiltinEvaluator::new(2).best_move(&b).unwrap();
        assert!(best.score > -MATE + 10, "{best:?}");
        let after = make_move(&b, best.mv);
        assert!(!is_attacked(&after, after.king_square(Color::White).unwrap(), Color::Black));
    }

    #[test]
    fn top_k_is_sorted_distinct_and_led_by_best_move() {
        let b = Board::initial();
        let mut e = BuiltinEvaluator::new(2);
        let top = e.top_k(&b, 5).unwrap();
        assert_eq!(top.len(), 5);
        assert!(top.windows(2).all(|w| w[0].score >= w[1].score));
        let distinct: std::collections::BTreeSet<_> = top.iter().map(|s| s.mv).collect();
        assert_eq!(distinct.len(), 5);
        let best = BuiltinEvaluator::new(2).best_move(&b).unwrap();
        assert_eq!(top[0], best);
    }

    #[test]
    fn top_k_scores_match_individual_searches() {
        let b = fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 0 1");
        let mut e = BuiltinEvaluator::new(2);
        let top = e.top_k(&b, 5).unwrap();
        for s in top {
            let child = make_move(&b, s.mv);
            let exact = -BuiltinEvaluator::new(2).negamax(&child, 1, -(MATE + 1), MATE + 1, 1);
            assert_eq!(exact, s.score, "{}", s.mv);
        }
    }

    #[test]
    fn memo_is_invisible() {
        let b = fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 0 1");
        let mut e = BuiltinEvaluator::new(3);
        let first = e.top_k(&b, 5).unwrap();
        assert_eq!(e.top_k(&b, 5).unwrap(), first);
        assert_eq!(BuiltinEvaluator::new(3).top_k(&b, 5).unwrap(), first);
    }

    fn random_position(rng: &mut ChaCha8Rng) -> Board {
        let mut b = Board::initial();
        let plies = rng.gen_range(4..30);
        for _ in 0..plies {
            let mut moves = Vec::new();
            pseudo_legal_moves(&b, CastleRule::IgnoreCheck, &mut moves);
            let us = b.side_to_move();
            let theirs_king = b.king_square(us.opposite()).unwrap();
            moves.retain(|m| m.to_square() != Some(theirs_king));
            if moves.is_empty() {
                break;
            }
            b = make_move(&b, moves[rng.gen_range(0..moves.len())]);
        }
        b
    }

    #[test]
    fn mirrored_positions_give_mirrored_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let b = random_position(&mut rng);
            let flipped = b.color_flipped();
            let mut e = BuiltinEvaluator::new(2);
            let a = e.best_move(&b).unwrap();
            let m = e.best_move(&flipped).unwrap();
            assert_eq!(m.mv, a.mv.flip_rank(), "{}", b.to_fen());
            assert_eq!(m.score, a.score);
            // from White's point of view the two scores are negatives of each other
            let pov = |board: &Board, s: i32| if board.side_to_move() == Color::White { s } else { -s };
            assert_eq!(pov(&b, a.score), -pov(&flipped, m.score));
        }
    }

    #[test]
    fn static_eval_is_antisymmetric() {
        let b = fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 0 1");
        let mut other = b;
        other.set_side_to_move(Color::Black);
        assert_eq!(static_eval(&b), -static_eval(&other));
        assert_eq!(static_eval(&Board::initial()), 0);
        let mut extra = Board::initial();
        extra.put(Square::new(4, 3).unwrap(), Piece::new(Color::White, PieceKind::Knight));
        assert!(static_eval(&extra) > 300);
    }
}
