//! Precomputed attack tables and ray-scan slider attacks.

use super::{Color, Square};

const fn leaper_table(deltas: &[(i8, i8)]) -> [u64; 64] {
    let mut table = [0u64; 64];
    let mut sq = 0;
    while sq < 64 {
        let f = (sq % 8) as i8;
        let r = (sq / 8) as i8;
        let mut i = 0;
        while i < deltas.len() {
            let nf = f + deltas[i].0;
            let nr = r + deltas[i].1;
            if nf >= 0 && nf < 8 && nr >= 0 && nr < 8 {
                table[sq] |= 1u64 << (nr * 8 + nf);
            }
            i += 1;
        }
        sq += 1;
    }
    table
}

static KNIGHT: [u64; 64] = leaper_table(&[
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
]);

static KING: [u64; 64] = leaper_table(&[
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
]);

static PAWN: [[u64; 64]; 2] = [
    leaper_table(&[(-1, 1), (1, 1)]),
    leaper_table(&[(-1, -1), (1, -1)]),
];

// Direction order: N, E, NE, NW (increasing index) then S, W, SW, SE.
const DIRS: [(i8, i8); 8] = [(0, 1), (1, 0), (1, 1), (-1, 1), (0, -1), (-1, 0), (-1, -1), (1, -1)];

const fn ray_tables() -> [[u64; 64]; 8] {
    let mut rays = [[0u64; 64]; 8];
    let mut d = 0;
    while d < 8 {
        let mut sq = 0;
        while sq < 64 {
            let mut f = (sq % 8) as i8 + DIRS[d].0;
            let mut r = (sq / 8) as i8 + DIRS[d].1;
            while f >= 0 && f < 8 && r >= 0 && r < 8 {
                rays[d][sq] |= 1u64 << (r * 8 + f);
                f += DIRS[d].0;
                r += DIRS[d].1;
            }
            sq += 1;
        }
        d += 1;
    }
    rays
}

static RAYS: [[u64; 64]; 8] = ray_tables();

#[inline]
fn ray_attacks(sq: usize, occ: u64, dir: usize) -> u64 {
    let ray = RAYS[dir][sq];
    let blockers = ray & occ;
    if blockers == 0 {
        return ray;
    }
    let first = if dir < 4 {
        blockers.trailing_zeros() as usize
    } else {
        63 - blockers.leading_zeros() as usize
    };
    ray ^ RAYS[dir][first]
}

#[inline]
pub fn knight_attacks(sq: Square) -> u64 {
    KNIGHT[sq.index()]
}

#[inline]
pub fn king_attacks(sq: Square) -> u64 {
    KING[sq.index()]
}

/// Squares a pawn of `color` on `sq` attacks diagonally.
#[inline]
pub fn pawn_attacks(color: Color, sq: Square) -> u64 {
    PAWN[color.index()][sq.index()]
}

/// Rook attacks given blockers `occ`; each ray includes its first blocker.
#[inline]
pub fn rook_attacks(sq: Square, occ: u64) -> u64 {
    let s = sq.index();
    ray_attacks(s, occ, 0) | ray_attacks(s, occ, 1) | ray_attacks(s, occ, 4) | ray_attacks(s, occ, 5)
}

#[inline]
pub fn bishop_attacks(sq: Square, occ: u64) -> u64 {
    let s = sq.index();
    ray_attacks(s, occ, 2) | ray_attacks(s, occ, 3) | ray_attacks(s, occ, 6) | ray_attacks(s, occ, 7)
}

/// Squares strictly between two squares on a shared line; zero if not aligned.
pub fn between(a: Square, b: Square) -> u64 {
    let (a, b) = (a.index(), b.index());
    for ray in &RAYS {
        if ray[a] & (1u64 << b) != 0 {
            return ray[a] & !ray[b] & !(1u64 << b);
        }
    }
    0
}

/// Iterates set bits as squares, lowest index first.
pub(crate) struct Bits(pub u64);

impl Iterator for Bits {
    type Item = Square;
    #[inline]
    fn next(&mut self) -> Option<Square> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as u8;
        self.0 &= self.0 - 1;
        Some(Square::from_index(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &str) -> Square {
        s.parse().unwrap()
    }

    #[test]
    fn leaper_counts() {
        assert_eq!(knight_attacks(sq("a1")).count_ones(), 2);
        assert_eq!(knight_attacks(sq("d4")).count_ones(), 8);
        assert_eq!(king_attacks(sq("e1")).count_ones(), 5);
        assert_eq!(king_attacks(sq("h8")).count_ones(), 3);
        assert_eq!(pawn_attacks(Color::White, sq("a2")), sq("b3").bit());
        assert_eq!(pawn_attacks(Color::Black, sq("e7")), sq("d6").bit() | sq("f6").bit());
    }

    #[test]
    fn sliders_stop_at_first_blocker() {
        let occ = sq("a3").bit() | sq("c1").bit();
        let a = rook_attacks(sq("a1"), occ);
        assert_eq!(a, sq("a2").bit() | sq("a3").bit() | sq("b1").bit() | sq("c1").bit());
        assert_eq!(bishop_attacks(sq("d4"), 0).count_ones(), 13);
        let b = bishop_attacks(sq("e2"), sq("g4").bit());
        assert!(b & sq("g4").bit() != 0);
        assert!(b & sq("h5").bit() == 0);
    }

    #[test]
    fn between_squares() {
        assert_eq!(between(sq("e1"), sq("h1")), sq("f1").bit() | sq("g1").bit());
        assert_eq!(between(sq("a1"), sq("c3")), sq("b2").bit());
        assert_eq!(between(sq("a1"), sq("b3")), 0);
    }
}
