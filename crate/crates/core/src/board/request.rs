use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::attacks::{
    between, bishop_attacks, king_attacks, knight_attacks, pawn_attacks, rook_attacks, Bits,
};
use super::{Board, BoardError, Color, PieceKind, Square};

/// A move a player commands. The arbiter decides what actually happens.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MoveRequest {
    Pass,
    Move {
        from: Square,
        to: Square,
        promotion: Option<PieceKind>,
    },
}

impl MoveRequest {
    pub fn new(from: Square, to: Square) -> MoveRequest {
        MoveRequest::Move { from, to, promotion: None }
    }

    pub fn promoting(from: Square, to: Square, kind: PieceKind) -> MoveRequest {
        MoveRequest::Move { from, to, promotion: Some(kind) }
    }

    pub fn from_square(&self) -> Option<Square> {
        match *self {
            MoveRequest::Pass => None,
            MoveRequest::Move { from, .. } => Some(from),
        }
    }

    pub fn to_square(&self) -> Option<Square> {
        match *self {
            MoveRequest::Pass => None,
            MoveRequest::Move { to, .. } => Some(to),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, MoveRequest::Pass)
    }

    /// Same request seen from the other side of the board.
    pub fn flip_rank(&self) -> MoveRequest {
        match *self {
            MoveRequest::Pass => MoveRequest::Pass,
            MoveRequest::Move { from, to, promotion } => MoveRequest::Move {
                from: from.flip_rank(),
                to: to.flip_rank(),
                promotion,
            },
        }
    }
}

impl fmt::Display for MoveRequest {
    /// UCI long algebraic; `0000` for a pass.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MoveRequest::Pass => f.write_str("0000"),
            MoveRequest::Move { from, to, promotion } => {
                write!(f, "{from}{to}")?;
                if let Some(p) = promotion {
                    write!(f, "{}", p.letter())?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MoveRequest {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BoardError::Parse { what: "move", input: s.to_string() };
        if s == "0000" || s.eq_ignore_ascii_case("pass") {
            return Ok(MoveRequest::Pass);
        }
        if !(s.len() == 4 || s.len() == 5) || !s.is_ascii() {
            return Err(err());
        }
        let from: Square = s[0..2].parse().map_err(|_| err())?;
        let to: Square = s[2..4].parse().map_err(|_| err())?;
        let promotion = match s[4..].chars().next() {
            None => None,
            Some(c) => match PieceKind::from_letter(c) {
                Some(k) if PieceKind::PROMOTIONS.contains(&k) => Some(k),
                _ => return Err(err()),
            },
        };
        Ok(MoveRequest::Move { from, to, promotion })
    }
}

impl Serialize for MoveRequest {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MoveRequest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every request `color` may command: opponent pieces are treated as unknown,
/// so only own pieces block. Pass comes first, then by origin, destination and
/// promotion piece.
pub fn request_space(board: &Board, color: Color) -> Result<Vec<MoveRequest>, BoardError> {
    if !board.has_king(color) {
        return Err(BoardError::InvalidBoard(format!("{color} has no king")));
    }
    let mut out = Vec::with_capacity(64);
    push_requests(board, color, &mut out);
    Ok(out)
}

pub(crate) fn push_requests(board: &Board, color: Color, out: &mut Vec<MoveRequest>) {
    out.push(MoveRequest::Pass);
    let own = board.color_bb(color);
    for from in Bits(own) {
        let Some(kind) = board.kind_at(from) else { continue };
        let targets = match kind {
            PieceKind::Pawn => pawn_targets(color, from, own),
            PieceKind::Knight => knight_attacks(from),
            PieceKind::Bishop => bishop_attacks(from, own),
            PieceKind::Rook => rook_attacks(from, own),
            PieceKind::Queen => bishop_attacks(from, own) | rook_attacks(from, own),
            PieceKind::King => king_attacks(from) | castle_targets(board, color, from),
        } & !own;
        let promotes = kind == PieceKind::Pawn;
        for to in Bits(targets) {
            if promotes && to.rank() == color.last_rank() {
                for p in PieceKind::PROMOTIONS {
                    out.push(MoveRequest::promoting(from, to, p));
                }
            } else {
                out.push(MoveRequest::new(from, to));
            }
        }
    }
}

fn pawn_targets(color: Color, from: Square, own: u64) -> u64 {
    let (dr, start) = match color {
        Color::White => (1, 1),
        Color::Black => (-1, 6),
    };
    let mut targets = pawn_attacks(color, from);
    if let Some(one) = from.offset(0, dr) {
        if own & one.bit() == 0 {
            targets |= one.bit();
            if from.rank() == start {
                if let Some(two) = from.offset(0, 2 * dr) {
                    targets |= two.bit();
                }
            }
        }
    }
    targets
}

pub(crate) fn castle_targets(board: &Board, color: Color, king: Square) -> u64 {
    let home = if color == Color::White { 0u8 } else { 56 };
    if king.index() != home as usize + 4 {
        return 0;
    }
    let own = board.color_bb(color);
    let rooks = board.pieces(color, PieceKind::Rook);
    let mut out = 0;
    for (kingside, rook_file, king_to) in [(true, 7u8, 6u8), (false, 0, 2)] {
        let rook = Square::from_index(home + rook_file);
        if board.castling().has(color, kingside)
            && rooks & rook.bit() != 0
            && between(king, rook) & own == 0
        {
            out |= Square::from_index(home + king_to).bit();
        }
    }
    out
}

/// Whether `from -> to` is a castling request by the king of `color`.
pub(crate) fn is_castle(color: Color, kind: PieceKind, from: Square, to: Square) -> Option<bool> {
    let home = if color == Color::White { 0u8 } else { 56 };
    if kind != PieceKind::King || from.index() != home as usize + 4 || to.rank() != from.rank() {
        return None;
    }
    match to.file() {
        6 => Some(true),
        2 => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn mv(s: &str) -> MoveRequest {
        s.parse().unwrap()
    }

    #[test]
    fn uci_text_round_trip() {
        for s in ["e2e4", "a7a8q", "e1g1", "0000", "h2h1n"] {
            assert_eq!(mv(s).to_string(), s);
        }
        assert!("e2e9".parse::<MoveRequest>().is_err());
        assert!("e7e8k".parse::<MoveRequest>().is_err());
    }

    #[test]
    fn initial_position_white() {
        let space: BTreeSet<_> = request_space(&Board::initial(), Color::White)
            .unwrap()
            .into_iter()
            .collect();
        for m in ["0000", "a2a3", "a2a4", "b1c3", "b2a3", "b2c3"] {
            assert!(space.contains(&mv(m)), "{m}");
        }
        // brute-force count of pawn requests: 8 single + 8 double + 14 diagonal
        let pawn_reqs = space
            .iter()
            .filter(|m| m.from_square().is_some_and(|s| s.rank() == 1))
            .count();
        assert_eq!(pawn_reqs, 30);
        assert!(!space.contains(&mv("a1a8")));
        assert!(!space.contains(&mv("e1g1")));
        // pass + 30 pawn + 4 knight
        assert_eq!(space.len(), 35);
    }

    #[test]
    fn lone_kings() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        let space = request_space(&b, Color::White).unwrap();
        assert_eq!(space[0], MoveRequest::Pass);
        assert_eq!(space.len(), 1 + 5);
    }

    #[test]
    fn own_piece_blocks_rook_ray() {
        let b = Board::from_fen("4k3/8/8/8/8/P7/8/R3K3 w - - 0 1").unwrap();
        let north: Vec<_> = request_space(&b, Color::White)
            .unwrap()
            .into_iter()
            .filter(|m| m.from_square() == Some("a1".parse().unwrap()))
            .filter(|m| m.to_square().unwrap().file() == 0)
            .collect();
        assert_eq!(north, vec![mv("a1a2")]);
    }

    #[test]
    fn opponent_pieces_do_not_block_requests() {
        let b = Board::from_fen("r3k3/8/8/8/8/8/8/R3K3 w Q - 0 1").unwrap();
        let space = request_space(&b, Color::White).unwrap();
        assert!(space.contains(&mv("a1a8")));
        assert!(space.contains(&mv("e1c1")));
    }

    #[test]
    fn promotions_enumerated_for_all_four_kinds() {
        let b = Board::from_fen("4k3/P7/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        let space = request_space(&b, Color::White).unwrap();
        let promos: Vec<_> = space
            .iter()
            .filter(|m| m.from_square() == Some("a7".parse().unwrap()))
            .collect();
        // a8 push and b8 diagonal, four pieces each
        assert_eq!(promos.len(), 8);
        assert!(promos.iter().all(|m| matches!(m, MoveRequest::Move { promotion: Some(_), .. })));
    }

    #[test]
    fn missing_king_is_invalid() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/8 w - - 0 1").unwrap();
        assert!(matches!(request_space(&b, Color::White), Err(BoardError::InvalidBoard(_))));
    }
}
