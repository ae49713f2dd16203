//! Board representation and the RBC rules engine.
//!
//! The [`Board`] is a plain value: piece placement as bitboards plus side to
//! move, castling rights and en-passant square. Move counters are not part of
//! the board; the arbiter keeps them for draw bookkeeping.

mod attacks;
mod request;
mod resolve;
mod sense;
pub mod standard;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use attacks::{between, bishop_attacks, king_attacks, knight_attacks, pawn_attacks, rook_attacks};
pub use request::{request_space, MoveRequest};
pub use resolve::{apply_result, resolve, MoveResult, Taken};
pub(crate) use resolve::{normalize, resolve_requested};
pub(crate) use request::push_requests;
pub use sense::{is_sense_center, sense, SenseResult, SENSE_CENTERS};
pub(crate) use sense::{block, block_mask};
pub(crate) use attacks::Bits;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("request {0} is not in the request space")]
    RejectedRequest(MoveRequest),
    #[error("sense center {0} is not one of the 36 interior squares")]
    InvalidSense(Square),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub const ALL: [Color; 2] = [Color::White, Color::Black];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn opposite(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    /// Rank (0-based) that this color's pawns promote on.
    #[inline]
    pub fn last_rank(self) -> u8 {
        match self {
            Color::White => 7,
            Color::Black => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Black => "black",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A square index `rank * 8 + file`, a1 = 0, h8 = 63.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Square(u8);

impl Square {
    #[inline]
    pub const fn from_index(index: u8) -> Square {
        assert!(index < 64);
        Square(index)
    }

    pub fn new(file: u8, rank: u8) -> Option<Square> {
        (file < 8 && rank < 8).then(|| Square(rank * 8 + file))
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn file(self) -> u8 {
        self.0 & 7
    }

    #[inline]
    pub const fn rank(self) -> u8 {
        self.0 >> 3
    }

    #[inline]
    pub const fn bit(self) -> u64 {
        1u64 << self.0
    }

    pub fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        ((0..8).contains(&f) && (0..8).contains(&r)).then(|| Square((r * 8 + f) as u8))
    }

    /// Same square seen from the other side of the board.
    #[inline]
    pub const fn flip_rank(self) -> Square {
        Square(self.0 ^ 56)
    }

    /// King-step (Chebyshev) distance.
    pub fn distance(self, other: Square) -> u8 {
        let df = (self.file() as i8 - other.file() as i8).unsigned_abs();
        let dr = (self.rank() as i8 - other.rank() as i8).unsigned_abs();
        df.max(dr)
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0..64).map(Square)
    }

    pub fn name(self) -> String {
        format!("{}{}", (b'a' + self.file()) as char, self.rank() + 1)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank() + 1)
    }
}

impl fmt::Debug for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Square {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        let err = || BoardError::Parse { what: "square", input: s.to_string() };
        if b.len() != 2 {
            return Err(err());
        }
        let file = b[0].wrapping_sub(b'a');
        let rank = b[1].wrapping_sub(b'1');
        Square::new(file, rank).ok_or_else(err)
    }
}

impl Serialize for Square {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Square {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] = [
        PieceKind::Pawn,
        PieceKind::Knight,
        PieceKind::Bishop,
        PieceKind::Rook,
        PieceKind::Queen,
        PieceKind::King,
    ];
    pub const PROMOTIONS: [PieceKind; 4] =
        [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> PieceKind {
        Self::ALL[i]
    }

    /// Lower-case letter used in FEN and UCI promotion suffixes.
    pub fn letter(self) -> char {
        match self {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        }
    }

    pub fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        })
    }

    #[inline]
    pub fn is_slider(self) -> bool {
        matches!(self, PieceKind::Bishop | PieceKind::Rook | PieceKind::Queen)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub const fn new(color: Color, kind: PieceKind) -> Piece {
        Piece { color, kind }
    }

    /// FEN letter: upper case for White.
    pub fn fen_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }

    pub fn from_fen_char(c: char) -> Option<Piece> {
        let kind = PieceKind::from_letter(c)?;
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        Some(Piece { color, kind })
    }

    /// Dense code 1..=12; 0 is reserved for an empty square.
    #[inline]
    pub fn code(self) -> u8 {
        1 + (self.color.index() * 6 + self.kind.index()) as u8
    }

    pub fn from_code(code: u8) -> Option<Piece> {
        if code == 0 || code > 12 {
            return None;
        }
        let c = (code - 1) as usize;
        Some(Piece {
            color: Color::ALL[c / 6],
            kind: PieceKind::ALL[c % 6],
        })
    }
}

impl Serialize for Piece {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut buf = [0u8; 4];
        s.serialize_str(self.fen_char().encode_utf8(&mut buf))
    }
}

impl<'de> Deserialize<'de> for Piece {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Piece::from_fen_char(c)
                .ok_or_else(|| serde::de::Error::custom(format!("bad piece {s:?}"))),
            _ => Err(serde::de::Error::custom(format!("bad piece {s:?}"))),
        }
    }
}

/// Castling rights as four bits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct CastlingRights(u8);

impl CastlingRights {
    pub const WHITE_KINGSIDE: u8 = 1;
    pub const WHITE_QUEENSIDE: u8 = 2;
    pub const BLACK_KINGSIDE: u8 = 4;
    pub const BLACK_QUEENSIDE: u8 = 8;
    pub const ALL: CastlingRights = CastlingRights(15);
    pub const NONE: CastlingRights = CastlingRights(0);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> CastlingRights {
        CastlingRights(bits & 15)
    }

    pub fn flag(color: Color, kingside: bool) -> u8 {
        match (color, kingside) {
            (Color::White, true) => Self::WHITE_KINGSIDE,
            (Color::White, false) => Self::WHITE_QUEENSIDE,
            (Color::Black, true) => Self::BLACK_KINGSIDE,
            (Color::Black, false) => Self::BLACK_QUEENSIDE,
        }
    }

    pub fn has(self, color: Color, kingside: bool) -> bool {
        self.0 & Self::flag(color, kingside) != 0
    }

    pub fn remove(&mut self, flag: u8) {
        self.0 &= !flag;
    }

    pub fn remove_color(&mut self, color: Color) {
        self.remove(Self::flag(color, true) | Self::flag(color, false));
    }

    pub fn insert(&mut self, flag: u8) {
        self.0 |= flag & 15;
    }

    /// Rights that are lost when `sq` is vacated or captured on.
    pub(crate) fn mask_for_square(sq: Square) -> u8 {
        match sq.index() {
            0 => Self::WHITE_QUEENSIDE,
            7 => Self::WHITE_KINGSIDE,
            4 => Self::WHITE_KINGSIDE | Self::WHITE_QUEENSIDE,
            56 => Self::BLACK_QUEENSIDE,
            63 => Self::BLACK_KINGSIDE,
            60 => Self::BLACK_KINGSIDE | Self::BLACK_QUEENSIDE,
            _ => 0,
        }
    }
}

impl fmt::Display for CastlingRights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("-");
        }
        for (bit, c) in [(1, 'K'), (2, 'Q'), (4, 'k'), (8, 'q')] {
            if self.0 & bit != 0 {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// A complete RBC state: one hypothesis in an information set.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Board {
    colors: [u64; 2],
    kinds: [u64; 6],
    side_to_move: Color,
    castling: CastlingRights,
    ep_square: Option<Square>,
}

impl Hash for Board {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.zobrist());
    }
}

pub const INITIAL_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

impl Default for Board {
    fn default() -> Self {
        Board::initial()
    }
}

impl Board {
    pub fn empty() -> Board {
        Board {
            colors: [0; 2],
            kinds: [0; 6],
            side_to_move: Color::White,
            castling: CastlingRights::NONE,
            ep_square: None,
        }
    }

    pub fn initial() -> Board {
        Board::from_fen(INITIAL_FEN).expect("initial FEN parses")
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn ep_square(&self) -> Option<Square> {
        self.ep_square
    }

    pub fn set_side_to_move(&mut self, color: Color) {
        self.side_to_move = color;
    }

    pub fn set_castling(&mut self, rights: CastlingRights) {
        self.castling = rights;
    }

    pub fn set_ep_square(&mut self, sq: Option<Square>) {
        self.ep_square = sq;
    }

    #[inline]
    pub fn color_bb(&self, color: Color) -> u64 {
        self.colors[color.index()]
    }

    #[inline]
    pub fn kind_bb(&self, kind: PieceKind) -> u64 {
        self.kinds[kind.index()]
    }

    #[inline]
    pub fn pieces(&self, color: Color, kind: PieceKind) -> u64 {
        self.colors[color.index()] & self.kinds[kind.index()]
    }

    #[inline]
    pub fn occupied(&self) -> u64 {
        self.colors[0] | self.colors[1]
    }

    #[inline]
    pub fn color_at(&self, sq: Square) -> Option<Color> {
        let b = sq.bit();
        if self.colors[0] & b != 0 {
            Some(Color::White)
        } else if self.colors[1] & b != 0 {
            Some(Color::Black)
        } else {
            None
        }
    }

    #[inline]
    pub fn kind_at(&self, sq: Square) -> Option<PieceKind> {
        let b = sq.bit();
        if self.occupied() & b == 0 {
            return None;
        }
        PieceKind::ALL
            .into_iter()
            .find(|k| self.kinds[k.index()] & b != 0)
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let color = self.color_at(sq)?;
        let kind = self.kind_at(sq)?;
        Some(Piece { color, kind })
    }

    pub fn put(&mut self, sq: Square, piece: Piece) {
        self.clear(sq);
        self.colors[piece.color.index()] |= sq.bit();
        self.kinds[piece.kind.index()] |= sq.bit();
    }

    pub fn clear(&mut self, sq: Square) {
        let m = !sq.bit();
        for c in &mut self.colors {
            *c &= m;
        }
        for k in &mut self.kinds {
            *k &= m;
        }
    }

    /// Removes every piece of the given color and kind.
    pub fn remove_pieces(&mut self, color: Color, kind: PieceKind) {
        let m = !self.pieces(color, kind);
        for c in &mut self.colors {
            *c &= m;
        }
        for k in &mut self.kinds {
            *k &= m;
        }
    }

    pub fn set(&mut self, sq: Square, piece: Option<Piece>) {
        match piece {
            Some(p) => self.put(sq, p),
            None => self.clear(sq),
        }
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        let bb = self.pieces(color, PieceKind::King);
        (bb != 0).then(|| Square(bb.trailing_zeros() as u8))
    }

    pub fn has_king(&self, color: Color) -> bool {
        self.pieces(color, PieceKind::King) != 0
    }

    /// Piece codes indexed by square (0 = empty).
    pub fn mailbox(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                let code = Piece::new(color, kind).code();
                let mut bb = self.pieces(color, kind);
                while bb != 0 {
                    out[bb.trailing_zeros() as usize] = code;
                    bb &= bb - 1;
                }
            }
        }
        out
    }

    /// Zobrist hash over placement, side to move, castling rights and ep square.
    pub fn zobrist(&self) -> u64 {
        let mut h = 0u64;
        for color in Color::ALL {
            for kind in PieceKind::ALL {
                let table = &ZOBRIST.pieces[color.index() * 6 + kind.index()];
                let mut bb = self.pieces(color, kind);
                while bb != 0 {
                    h ^= table[bb.trailing_zeros() as usize];
                    bb &= bb - 1;
                }
            }
        }
        if self.side_to_move == Color::Black {
            h ^= ZOBRIST.black_to_move;
        }
        h ^= ZOBRIST.castling[self.castling.0 as usize];
        if let Some(ep) = self.ep_square {
            h ^= ZOBRIST.ep_file[ep.file() as usize];
        }
        h
    }

    pub fn key(&self) -> BoardKey {
        let mut bytes = [0u8; 34];
        let mb = self.mailbox();
        for (i, pair) in mb.chunks(2).enumerate() {
            bytes[i] = pair[0] | (pair[1] << 4);
        }
        bytes[32] = (self.side_to_move.index() as u8) | (self.castling.0 << 1);
        bytes[33] = self.ep_square.map_or(0xff, |s| s.0);
        BoardKey { hash: self.zobrist(), bytes }
    }

    pub fn from_key(key: &BoardKey) -> Board {
        let mut b = Board::empty();
        for i in 0..32 {
            let lo = key.bytes[i] & 15;
            let hi = key.bytes[i] >> 4;
            b.set(Square(2 * i as u8), Piece::from_code(lo));
            b.set(Square(2 * i as u8 + 1), Piece::from_code(hi));
        }
        b.side_to_move = Color::ALL[(key.bytes[32] & 1) as usize];
        b.castling = CastlingRights::from_bits(key.bytes[32] >> 1);
        b.ep_square = (key.bytes[33] != 0xff).then(|| Square(key.bytes[33]));
        b
    }

    /// Color-flipped copy: ranks mirrored, piece colors and side to move swapped.
    pub fn color_flipped(&self) -> Board {
        let mut out = Board::empty();
        for sq in Square::all() {
            if let Some(p) = self.piece_at(sq) {
                out.put(sq.flip_rank(), Piece::new(p.color.opposite(), p.kind));
            }
        }
        out.side_to_move = self.side_to_move.opposite();
        let c = self.castling.0;
        out.castling = CastlingRights(((c & 3) << 2) | ((c >> 2) & 3));
        out.ep_square = self.ep_square.map(Square::flip_rank);
        out
    }

    /// Checks the structural invariants of a game position.
    pub fn validate(&self) -> Result<(), BoardError> {
        for color in Color::ALL {
            let kings = self.pieces(color, PieceKind::King).count_ones();
            if kings > 1 {
                return Err(BoardError::InvalidBoard(format!("{color} has {kings} kings")));
            }
        }
        if !self.has_king(Color::White) && !self.has_king(Color::Black) {
            return Err(BoardError::InvalidBoard("no kings on board".into()));
        }
        const BACK_RANKS: u64 = 0xff00_0000_0000_00ff;
        if self.kind_bb(PieceKind::Pawn) & BACK_RANKS != 0 {
            return Err(BoardError::InvalidBoard("pawn on first or last rank".into()));
        }
        for color in Color::ALL {
            let home = if color == Color::White { 0u8 } else { 56 };
            for kingside in [true, false] {
                if !self.castling.has(color, kingside) {
                    continue;
                }
                let rook = Square(home + if kingside { 7 } else { 0 });
                let king = Square(home + 4);
                if self.piece_at(king) != Some(Piece::new(color, PieceKind::King))
                    || self.piece_at(rook) != Some(Piece::new(color, PieceKind::Rook))
                {
                    return Err(BoardError::InvalidBoard(format!(
                        "castling right {} without king and rook at home",
                        self.castling
                    )));
                }
            }
        }
        if let Some(ep) = self.ep_square {
            // the side that just moved is the opposite of side_to_move
            let mover = self.side_to_move.opposite();
            let (ep_rank, beyond) = match mover {
                Color::White => (2, ep.offset(0, 1)),
                Color::Black => (5, ep.offset(0, -1)),
            };
            let ok = ep.rank() == ep_rank
                && beyond.and_then(|s| self.piece_at(s)) == Some(Piece::new(mover, PieceKind::Pawn));
            if !ok {
                return Err(BoardError::InvalidBoard(format!("bad en-passant square {ep}")));
            }
        }
        Ok(())
    }

    /// Parses FEN text. Validation is relaxed: a missing king is accepted.
    pub fn from_fen(fen: &str) -> Result<Board, BoardError> {
        let err = || BoardError::Parse { what: "FEN", input: fen.to_string() };
        let mut fields = fen.split_whitespace();
        let placement = fields.next().ok_or_else(err)?;
        let mut board = Board::empty();
        let rows: Vec<&str> = placement.split('/').collect();
        if rows.len() != 8 {
            return Err(err());
        }
        for (i, row) in rows.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as u8;
                } else {
                    let p = Piece::from_fen_char(c).ok_or_else(err)?;
                    let sq = Square::new(file, rank).ok_or_else(err)?;
                    board.put(sq, p);
                    file += 1;
                }
                if file > 8 {
                    return Err(err());
                }
            }
            if file != 8 {
                return Err(err());
            }
        }
        board.side_to_move = match fields.next().unwrap_or("w") {
            "w" => Color::White,
            "b" => Color::Black,
            _ => return Err(err()),
        };
        let castling = fields.next().unwrap_or("-");
        if castling != "-" {
            for c in castling.chars() {
                let flag = match c {
                    'K' => CastlingRights::WHITE_KINGSIDE,
                    'Q' => CastlingRights::WHITE_QUEENSIDE,
                    'k' => CastlingRights::BLACK_KINGSIDE,
                    'q' => CastlingRights::BLACK_QUEENSIDE,
                    _ => return Err(err()),
                };
                board.castling.insert(flag);
            }
        }
        let ep = fields.next().unwrap_or("-");
        if ep != "-" {
            board.ep_square = Some(ep.parse().map_err(|_| err())?);
        }
        Ok(board)
    }

    /// FEN with placeholder move counters (`0 1`), which RBC boards do not track.
    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(90);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.piece_at(Square(rank * 8 + file)) {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from(b'0' + empty));
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from(b'0' + empty));
            }
            if rank > 0 {
                out.push('/');
            }
        }
        let side = if self.side_to_move == Color::White { 'w' } else { 'b' };
        let ep = self.ep_square.map_or("-".to_string(), |s| s.name());
        format!("{out} {side} {} {ep} 0 1", self.castling)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}

impl FromStr for Board {
    type Err = BoardError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Board::from_fen(s)
    }
}

/// Canonical identity of a board: a 64-bit hash plus the full serialization.
///
/// Ordering is by hash first, then bytes; equality is decided by the bytes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BoardKey {
    pub hash: u64,
    pub bytes: [u8; 34],
}

/// Winner when exactly one king remains, `None` while both are on the board.
pub fn game_over(board: &Board) -> Result<Option<Color>, BoardError> {
    match (board.has_king(Color::White), board.has_king(Color::Black)) {
        (true, true) => Ok(None),
        (true, false) => Ok(Some(Color::White)),
        (false, true) => Ok(Some(Color::Black)),
        (false, false) => Err(BoardError::InvalidBoard("no kings on board".into())),
    }
}

struct ZobristTables {
    pieces: [[u64; 64]; 12],
    black_to_move: u64,
    castling: [u64; 16],
    ep_file: [u64; 8],
}

const fn splitmix64(state: u64) -> (u64, u64) {
    let s = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = s;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    (s, z ^ (z >> 31))
}

const fn build_zobrist() -> ZobristTables {
    let mut state = 0x5eed_0f2b_c0de_u64;
    let mut pieces = [[0u64; 64]; 12];
    let mut p = 0;
    while p < 12 {
        let mut s = 0;
        while s < 64 {
            let (ns, v) = splitmix64(state);
            state = ns;
            pieces[p][s] = v;
            s += 1;
        }
        p += 1;
    }
    let (ns, black_to_move) = splitmix64(state);
    state = ns;
    let mut singles = [0u64; 4];
    let mut i = 0;
    while i < 4 {
        let (ns, v) = splitmix64(state);
        state = ns;
        singles[i] = v;
        i += 1;
    }
    let mut castling = [0u64; 16];
    let mut m = 0;
    while m < 16 {
        let mut v = 0;
        let mut b = 0;
        while b < 4 {
            if m & (1 << b) != 0 {
                v ^= singles[b];
            }
            b += 1;
        }
        castling[m] = v;
        m += 1;
    }
    let mut ep_file = [0u64; 8];
    let mut f = 0;
    while f < 8 {
        let (ns, v) = splitmix64(state);
        state = ns;
        ep_file[f] = v;
        f += 1;
    }
    ZobristTables { pieces, black_to_move, castling, ep_file }
}

static ZOBRIST: ZobristTables = build_zobrist();

/// Second, independent 64-bit mix of a board hash, used for set fingerprints.
#[inline]
pub(crate) fn remix(h: u64) -> u64 {
    splitmix64(h ^ 0xa076_1d64_78bd_642f).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_names_round_trip() {
        for sq in Square::all() {
            assert_eq!(sq.name().parse::<Square>().unwrap(), sq);
        }
        assert_eq!("e4".parse::<Square>().unwrap().index(), 28);
        assert!("i1".parse::<Square>().is_err());
        assert!("a9".parse::<Square>().is_err());
    }

    #[test]
    fn twelve_distinct_pieces() {
        let mut codes: Vec<u8> = Color::ALL
            .iter()
            .flat_map(|&c| PieceKind::ALL.iter().map(move |&k| Piece::new(c, k).code()))
            .collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 12);
        for c in codes {
            assert_eq!(Piece::from_code(c).unwrap().code(), c);
        }
    }

    #[test]
    fn fen_round_trip() {
        let fens = [
            INITIAL_FEN,
            "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
            "8/8/8/8/8/8/8/4K3 b - - 0 1",
            "rnbqkbnr/ppp1pppp/8/8/3pP3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1",
        ];
        for fen in fens {
            let b = Board::from_fen(fen).unwrap();
            assert_eq!(b.to_fen(), fen);
        }
    }

    #[test]
    fn king_missing_still_parses_but_fails_game_over_only_with_no_kings() {
        let b = Board::from_fen("4k3/8/8/8/8/8/8/8 w - - 0 1").unwrap();
        assert_eq!(game_over(&b), Ok(Some(Color::Black)));
        let none = Board::from_fen("8/8/8/8/8/8/8/8 w - - 0 1").unwrap();
        assert!(game_over(&none).is_err());
        assert_eq!(game_over(&Board::initial()), Ok(None));
    }

    #[test]
    fn key_round_trip_and_equality() {
        let b = Board::from_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R b Kq - 0 1")
            .unwrap();
        let k = b.key();
        assert_eq!(Board::from_key(&k), b);
        let mut other = b;
        other.set_castling(CastlingRights::ALL);
        assert_ne!(other.key(), k);
        assert_ne!(other.zobrist(), b.zobrist());
    }

    #[test]
    fn validate_rejects_broken_invariants() {
        assert!(Board::initial().validate().is_ok());
        let pawn_back = Board::from_fen("P3k3/8/8/8/8/8/8/4K3 w - - 0 1").unwrap();
        assert!(pawn_back.validate().is_err());
        let bad_castle = Board::from_fen("4k3/8/8/8/8/8/8/4K3 w K - 0 1").unwrap();
        assert!(bad_castle.validate().is_err());
        let good_ep = Board::from_fen("4k3/8/8/8/3pP3/8/8/4K3 b - e3 0 1").unwrap();
        assert!(good_ep.validate().is_ok());
        let bad_ep = Board::from_fen("4k3/8/8/8/3p4/8/8/4K3 b - e3 0 1").unwrap();
        assert!(bad_ep.validate().is_err());
    }

    #[test]
    fn color_flip_is_an_involution() {
        let b = Board::from_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w Kq - 0 1")
            .unwrap();
        assert_eq!(b.color_flipped().color_flipped(), b);
        assert_eq!(
            Board::initial().color_flipped().to_fen(),
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR b KQkq - 0 1"
        );
    }
}
