use serde::{Deserialize, Serialize};

use super::attacks::between;
use super::request::{is_castle, push_requests};
use super::{Board, BoardError, CastlingRights, Color, MoveRequest, Piece, PieceKind, Square};

/// The piece that actually moved, if any.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Taken {
    pub from: Square,
    pub landed: Square,
}

/// What the mover is told about its own move.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct MoveResult {
    pub requested: MoveRequest,
    pub taken: Option<Taken>,
    pub capture_square: Option<Square>,
}

impl MoveResult {
    fn nothing(requested: MoveRequest) -> MoveResult {
        MoveResult { requested, taken: None, capture_square: None }
    }
}

/// A pawn move to the last rank without a promotion piece promotes to a queen.
pub(crate) fn normalize(board: &Board, req: MoveRequest) -> MoveRequest {
    match req {
        MoveRequest::Move { from, to, promotion: None }
            if board.kind_at(from) == Some(PieceKind::Pawn)
                && board.color_at(from) == Some(board.side_to_move())
                && to.rank() == board.side_to_move().last_rank() =>
        {
            MoveRequest::promoting(from, to, PieceKind::Queen)
        }
        other => other,
    }
}

/// Applies a requested move under RBC rules for the side to move.
///
/// Blocked sliders capture the first opponent piece on their path, blocked
/// castles and pawn pushes do nothing, a diagonal pawn move onto an empty
/// square (without a matching en-passant square) does nothing, and a double
/// push whose far square is blocked advances one square.
pub fn resolve(board: &Board, req: MoveRequest) -> Result<(Board, MoveResult), BoardError> {
    let mover = board.side_to_move();
    if !board.has_king(mover) {
        return Err(BoardError::InvalidBoard(format!("{mover} has no king")));
    }
    let req = normalize(board, req);
    let mut space = Vec::with_capacity(64);
    push_requests(board, mover, &mut space);
    if !space.contains(&req) {
        return Err(BoardError::RejectedRequest(req));
    }
    Ok(resolve_requested(board, req))
}

/// [`resolve`] without the membership check; `req` must come from the request space.
pub(crate) fn resolve_requested(board: &Board, req: MoveRequest) -> (Board, MoveResult) {
    let mover = board.side_to_move();
    let opp = mover.opposite();
    let mut next = *board;
    next.set_ep_square(None);
    next.set_side_to_move(opp);

    let MoveRequest::Move { from, to, promotion } = req else {
        return (next, MoveResult::nothing(req));
    };
    let Some(kind) = board.kind_at(from) else {
        return (next, MoveResult::nothing(req));
    };
    let occupied = board.occupied();
    let theirs = board.color_bb(opp);

    let (landed, captured) = match kind {
        PieceKind::King => {
            if let Some(kingside) = is_castle(mover, kind, from, to) {
                let rook_from = Square::from_index(from.index() as u8 - 4 + if kingside { 7 } else { 0 });
                if between(from, rook_from) & occupied != 0 {
                    return (next, MoveResult::nothing(req));
                }
                let rook_to = Square::from_index(if kingside { to.index() - 1 } else { to.index() + 1 } as u8);
                next.clear(from);
                next.clear(rook_from);
                next.put(to, Piece::new(mover, PieceKind::King));
                next.put(rook_to, Piece::new(mover, PieceKind::Rook));
                let mut rights = next.castling();
                rights.remove_color(mover);
                next.set_castling(rights);
                let result = MoveResult {
                    requested: req,
                    taken: Some(Taken { from, landed: to }),
                    capture_square: None,
                };
                return (next, result);
            }
            (to, (theirs & to.bit() != 0).then_some(to))
        }
        PieceKind::Knight => (to, (theirs & to.bit() != 0).then_some(to)),
        PieceKind::Bishop | PieceKind::Rook | PieceKind::Queen => {
            let path = between(from, to) & theirs;
            if path == 0 {
                (to, (theirs & to.bit() != 0).then_some(to))
            } else {
                // first blocker counted from the origin
                let first = if to.index() > from.index() {
                    path.trailing_zeros()
                } else {
                    63 - path.leading_zeros()
                };
                let sq = Square::from_index(first as u8);
                (sq, Some(sq))
            }
        }
        PieceKind::Pawn => {
            let dr: i8 = if mover == Color::White { 1 } else { -1 };
            if to.file() == from.file() {
                let one = from.offset(0, dr).expect("pawn push stays on board");
                if occupied & one.bit() != 0 {
                    return (next, MoveResult::nothing(req));
                }
                if to == one || occupied & to.bit() != 0 {
                    (one, None)
                } else {
                    (to, None)
                }
            } else if theirs & to.bit() != 0 {
                (to, Some(to))
            } else if board.ep_square() == Some(to) {
                let victim = to.offset(0, -dr).expect("ep victim on board");
                (to, Some(victim))
            } else {
                return (next, MoveResult::nothing(req));
            }
        }
    };

    let moving = Piece::new(mover, kind);
    next.clear(from);
    if let Some(c) = captured {
        next.clear(c);
    }
    let placed = if kind == PieceKind::Pawn && landed.rank() == mover.last_rank() {
        Piece::new(mover, promotion.unwrap_or(PieceKind::Queen))
    } else {
        moving
    };
    next.put(landed, placed);

    let mut rights = next.castling();
    rights.remove(CastlingRights::mask_for_square(from));
    if let Some(c) = captured {
        rights.remove(CastlingRights::mask_for_square(c));
    }
    next.set_castling(rights);

    if kind == PieceKind::Pawn && from.rank().abs_diff(landed.rank()) == 2 {
        next.set_ep_square(double_push_ep(&next, mover, from, landed));
    }

    let result = MoveResult {
        requested: req,
        taken: Some(Taken { from, landed }),
        capture_square: captured,
    };
    (next, result)
}

/// Applies an observed result of the side to move's own move to a board that
/// may disagree with the truth about opponent pieces.
///
/// Whatever stands on the landing and capture squares is removed. Used to
/// keep hypotheses aligned with what the mover was told.
pub fn apply_result(board: &Board, result: &MoveResult) -> Board {
    let mover = board.side_to_move();
    let mut next = *board;
    next.set_ep_square(None);
    next.set_side_to_move(mover.opposite());
    let Some(Taken { from, landed }) = result.taken else {
        return next;
    };
    let Some(kind) = board.kind_at(from).filter(|_| board.color_at(from) == Some(mover)) else {
        return next;
    };
    let mut rights = next.castling();
    if let Some(kingside) = is_castle(mover, kind, from, landed) {
        let home = from.index() as u8 - 4;
        let rook_from = Square::from_index(home + if kingside { 7 } else { 0 });
        let rook_to = Square::from_index(home + if kingside { 5 } else { 3 });
        for s in [from, rook_from, landed, rook_to] {
            next.clear(s);
        }
        next.put(landed, Piece::new(mover, PieceKind::King));
        next.put(rook_to, Piece::new(mover, PieceKind::Rook));
        rights.remove_color(mover);
        next.set_castling(rights);
        return next;
    }
    if let Some(c) = result.capture_square {
        next.clear(c);
        rights.remove(CastlingRights::mask_for_square(c));
    }
    next.clear(from);
    next.clear(landed);
    let placed = match result.requested {
        MoveRequest::Move { promotion, .. } if kind == PieceKind::Pawn && landed.rank() == mover.last_rank() => {
            promotion.unwrap_or(PieceKind::Queen)
        }
        _ => kind,
    };
    next.put(landed, Piece::new(mover, placed));
    rights.remove(CastlingRights::mask_for_square(from));
    next.set_castling(rights);
    if kind == PieceKind::Pawn && from.rank().abs_diff(landed.rank()) == 2 {
        next.set_ep_square(double_push_ep(&next, mover, from, landed));
    }
    next
}

/// En-passant square after a double push, recorded only when an enemy pawn
/// stands beside the landed pawn and could take it.
pub(crate) fn double_push_ep(after: &Board, mover: Color, from: Square, landed: Square) -> Option<Square> {
    let enemy_pawns = after.pieces(mover.opposite(), PieceKind::Pawn);
    let beside = [landed.offset(-1, 0), landed.offset(1, 0)]
        .into_iter()
        .flatten()
        .any(|s| enemy_pawns & s.bit() != 0);
    beside.then(|| Square::from_index(((from.index() + landed.index()) / 2) as u8))
}
