use serde::{Deserialize, Serialize};

use super::{Board, BoardError, Piece, Square};

/// The 36 centers whose 3x3 block lies fully on the board, in square order.
pub const SENSE_CENTERS: [Square; 36] = {
    let mut out = [Square::from_index(0); 36];
    let mut i = 0;
    let mut rank = 1;
    while rank <= 6 {
        let mut file = 1;
        while file <= 6 {
            out[i] = Square::from_index(rank * 8 + file);
            i += 1;
            file += 1;
        }
        rank += 1;
    }
    out
};

pub fn is_sense_center(sq: Square) -> bool {
    (1..=6).contains(&sq.file()) && (1..=6).contains(&sq.rank())
}

/// Ground truth of a 3x3 block, ordered by rank then file (lowest first).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SenseResult {
    pub center: Square,
    pub contents: [(Square, Option<Piece>); 9],
}

impl SenseResult {
    pub fn squares(&self) -> impl Iterator<Item = Square> + '_ {
        self.contents.iter().map(|(s, _)| *s)
    }

    /// Whether `board` shows exactly these contents on the block.
    pub fn matches(&self, board: &Board) -> bool {
        self.contents.iter().all(|&(s, p)| board.piece_at(s) == p)
    }
}

/// The nine squares around `center` in sensing order.
pub(crate) fn block(center: Square) -> [Square; 9] {
    let mut out = [center; 9];
    let mut i = 0;
    for dr in -1..=1 {
        for df in -1..=1 {
            out[i] = center.offset(df, dr).expect("interior center");
            i += 1;
        }
    }
    out
}

/// Bitboard of the 3x3 block around an interior center.
pub(crate) fn block_mask(center: Square) -> u64 {
    block(center).iter().fold(0, |m, s| m | s.bit())
}

pub fn sense(board: &Board, center: Square) -> Result<SenseResult, BoardError> {
    if !is_sense_center(center) {
        return Err(BoardError::InvalidSense(center));
    }
    let squares = block(center);
    let mut contents = [(center, None); 9];
    for (slot, sq) in contents.iter_mut().zip(squares) {
        *slot = (sq, board.piece_at(sq));
    }
    Ok(SenseResult { center, contents })
}
