//! Classical chess move generation.
//!
//! Kept separate from the RBC resolution code so it can serve as an oracle:
//! it has its own move application and its own castling/en-passant handling.
//! The pseudo-legal generator is also what the built-in evaluator searches.

use super::attacks::{
    between, bishop_attacks, king_attacks, knight_attacks, pawn_attacks, rook_attacks, Bits,
};
use super::{Board, CastlingRights, Color, MoveRequest, Piece, PieceKind, Square};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CastleRule {
    /// King may not castle out of, through, or into check.
    Classical,
    /// Only the squares between king and rook must be empty (check is ignored).
    IgnoreCheck,
}

/// Whether any piece of `by` attacks `sq`.
pub fn is_attacked(board: &Board, sq: Square, by: Color) -> bool {
    let occ = board.occupied();
    let them = |k| board.pieces(by, k);
    if pawn_attacks(by.opposite(), sq) & them(PieceKind::Pawn) != 0 {
        return true;
    }
    if knight_attacks(sq) & them(PieceKind::Knight) != 0 {
        return true;
    }
    if king_attacks(sq) & them(PieceKind::King) != 0 {
        return true;
    }
    let queens = them(PieceKind::Queen);
    if bishop_attacks(sq, occ) & (them(PieceKind::Bishop) | queens) != 0 {
        return true;
    }
    rook_attacks(sq, occ) & (them(PieceKind::Rook) | queens) != 0
}

pub fn in_check(board: &Board, color: Color) -> bool {
    board
        .king_square(color)
        .is_some_and(|k| is_attacked(board, k, color.opposite()))
}

/// Pseudo-legal moves for the side to move, ordered by origin then destination.
pub fn pseudo_legal_moves(board: &Board, rule: CastleRule, out: &mut Vec<MoveRequest>) {
    let us = board.side_to_move();
    let own = board.color_bb(us);
    let theirs = board.color_bb(us.opposite());
    let occ = own | theirs;
    for from in Bits(own) {
        let Some(kind) = board.kind_at(from) else { continue };
        let targets = match kind {
            PieceKind::Pawn => {
                let dr: i8 = if us == Color::White { 1 } else { -1 };
                let mut t = pawn_attacks(us, from) & theirs;
                if let Some(ep) = board.ep_square() {
                    t |= pawn_attacks(us, from) & ep.bit();
                }
                if let Some(one) = from.offset(0, dr) {
                    if occ & one.bit() == 0 {
                        t |= one.bit();
                        let start = if us == Color::White { 1 } else { 6 };
                        if from.rank() == start {
                            let two = from.offset(0, 2 * dr).expect("on board");
                            if occ & two.bit() == 0 {
                                t |= two.bit();
                            }
                        }
                    }
                }
                t
            }
            PieceKind::Knight => knight_attacks(from) & !own,
            PieceKind::Bishop => bishop_attacks(from, occ) & !own,
            PieceKind::Rook => rook_attacks(from, occ) & !own,
            PieceKind::Queen => (bishop_attacks(from, occ) | rook_attacks(from, occ)) & !own,
            PieceKind::King => (king_attacks(from) & !own) | castles(board, from, rule),
        };
        for to in Bits(targets) {
            if kind == PieceKind::Pawn && to.rank() == us.last_rank() {
                for p in PieceKind::PROMOTIONS {
                    out.push(MoveRequest::promoting(from, to, p));
                }
            } else {
                out.push(MoveRequest::new(from, to));
            }
        }
    }
}

fn castles(board: &Board, king: Square, rule: CastleRule) -> u64 {
    let us = board.side_to_move();
    let home: u8 = if us == Color::White { 0 } else { 56 };
    if king.index() != home as usize + 4 {
        return 0;
    }
    let them = us.opposite();
    let mut out = 0;
    for (kingside, rook_file, king_to, transit) in [(true, 7u8, 6u8, 5u8), (false, 0, 2, 3)] {
        if !board.castling().has(us, kingside) {
            continue;
        }
        let rook = Square::from_index(home + rook_file);
        if board.pieces(us, PieceKind::Rook) & rook.bit() == 0 {
            continue;
        }
        if between(king, rook) & board.occupied() != 0 {
            continue;
        }
        let to = Square::from_index(home + king_to);
        if rule == CastleRule::Classical {
            let path = [king, Square::from_index(home + transit), to];
            if path.iter().any(|&s| is_attacked(board, s, them)) {
                continue;
            }
        }
        out |= to.bit();
    }
    out
}

/// Plays a pseudo-legal move with classical semantics.
pub fn make_move(board: &Board, mv: MoveRequest) -> Board {
    let us = board.side_to_move();
    let them = us.opposite();
    let mut next = *board;
    next.set_side_to_move(them);
    next.set_ep_square(None);
    let MoveRequest::Move { from, to, promotion } = mv else {
        return next;
    };
    let kind = board.kind_at(from).expect("piece on origin");
    let mut rights = board.castling();

    if kind == PieceKind::Pawn && Some(to) == board.ep_square() && board.piece_at(to).is_none() {
        let victim = Square::new(to.file(), from.rank()).expect("on board");
        next.clear(victim);
    }
    if kind == PieceKind::King && from.file() == 4 && (to.file() == 6 || to.file() == 2) && from.rank() == to.rank() {
        let (rf, rt) = if to.file() == 6 { (7, 5) } else { (0, 3) };
        let rank = from.rank();
        next.clear(Square::new(rf, rank).expect("on board"));
        next.put(Square::new(rt, rank).expect("on board"), Piece::new(us, PieceKind::Rook));
    }
    next.clear(from);
    let placed = match promotion {
        Some(p) if kind == PieceKind::Pawn => p,
        _ => kind,
    };
    next.put(to, Piece::new(us, placed));

    for sq in [from, to] {
        rights.remove(CastlingRights::mask_for_square(sq));
    }
    next.set_castling(rights);

    if kind == PieceKind::Pawn && from.rank().abs_diff(to.rank()) == 2 {
        let adjacent_enemy = (to.file() > 0
            && next.piece_at(Square::new(to.file() - 1, to.rank()).unwrap())
                == Some(Piece::new(them, PieceKind::Pawn)))
            || (to.file() < 7
                && next.piece_at(Square::new(to.file() + 1, to.rank()).unwrap())
                    == Some(Piece::new(them, PieceKind::Pawn)));
        if adjacent_enemy {
            let mid = Square::new(to.file(), (from.rank() + to.rank()) / 2).unwrap();
            next.set_ep_square(Some(mid));
        }
    }
    next
}

/// Classical legal moves: check is respected and Pass is not a move.
pub fn standard_legal_moves(board: &Board) -> Vec<MoveRequest> {
    let us = board.side_to_move();
    if !board.has_king(us) {
        return Vec::new();
    }
    let mut pseudo = Vec::with_capacity(64);
    pseudo_legal_moves(board, CastleRule::Classical, &mut pseudo);
    pseudo.retain(|&m| !in_check(&make_move(board, m), us));
    pseudo
}

pub fn perft(board: &Board, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = standard_legal_moves(board);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|&m| perft(&make_move(board, m), depth - 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KIWIPETE: &str = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";

    #[test]
    fn perft_initial() {
        let b = Board::initial();
        assert_eq!(perft(&b, 1), 20);
        assert_eq!(perft(&b, 2), 400);
        assert_eq!(perft(&b, 3), 8_902);
    }

    #[test]
    fn perft_kiwipete() {
        // published reference counts
        let b = Board::from_fen(KIWIPETE).unwrap();
        assert_eq!(perft(&b, 1), 48);
        assert_eq!(perft(&b, 2), 2_039);
        assert_eq!(perft(&b, 3), 97_862);
    }

    #[test]
    fn perft_endgame_with_ep_and_promotion() {
        // "position 3" and "position 4" from the common perft suite
        let p3 = Board::from_fen("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1").unwrap();
        assert_eq!(perft(&p3, 1), 14);
        assert_eq!(perft(&p3, 2), 191);
        assert_eq!(perft(&p3, 3), 2_812);
        assert_eq!(perft(&p3, 4), 43_238);
        let p4 = Board::from_fen("r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1")
            .unwrap();
        assert_eq!(perft(&p4, 1), 6);
        assert_eq!(perft(&p4, 2), 264);
        assert_eq!(perft(&p4, 3), 9_467);
    }

    #[test]
    fn stalemate_has_no_moves() {
        let b = Board::from_fen("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(standard_legal_moves(&b).is_empty());
        assert!(!in_check(&b, Color::Black));
    }
}
