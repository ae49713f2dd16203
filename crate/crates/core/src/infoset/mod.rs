//! Multi-hypothesis tracking: the set of boards consistent with everything
//! one player has observed, and the partition arithmetic built on it.

mod hashing;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arbiter::CaptureNotice;
use crate::board::{
    apply_result, block, block_mask, is_sense_center, normalize, push_requests, remix,
    resolve_requested, Board, CastlingRights, Color, MoveRequest, MoveResult, Piece, PieceKind, SenseResult, Square, SENSE_CENTERS,
};

pub(crate) use hashing::FastBuild;

pub const DEFAULT_SIZE_CAP: usize = 4_000_000;

/// Boards handed to one parallel worker at a time during expansion.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoSetError {
    #[error("no board is consistent with the {0}")]
    Inconsistent(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Raised when an update produced more distinct boards than the size cap.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OverflowSignal {
    /// Half-moves applied to the set when the cap was first exceeded.
    pub halfmove: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    OwnSense,
    OwnMove,
    OpponentTurn,
}

/// How a player learns about the board when counting successor sets.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationModel {
    /// Only the RBC observation channels.
    Observations,
    /// The player is shown the true board after every action, so each
    /// distinct successor board is its own information set.
    GroundTruth,
}

/// Boards grouped by what a sense at `center` would reveal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensePartition {
    pub center: Square,
    pub classes: BTreeMap<[Option<Piece>; 9], usize>,
}

impl SensePartition {
    pub fn total(&self) -> usize {
        self.classes.values().sum()
    }

    /// Sum of squared class sizes; divided by the total this is the expected
    /// set size after sensing here.
    pub fn score(&self) -> u128 {
        self.classes.values().map(|&n| (n as u128) * (n as u128)).sum()
    }

    pub fn expected_size(&self) -> f64 {
        self.score() as f64 / self.total() as f64
    }
}

#[derive(Clone, Debug)]
pub struct InfoSet {
    owner: Color,
    /// Sorted and free of duplicates.
    boards: Vec<Board>,
    size_cap: usize,
    halfmoves: u32,
    overflow: Option<OverflowSignal>,
    patched: bool,
}

impl InfoSet {
    /// The singleton set holding the standard starting position.
    pub fn new(owner: Color) -> InfoSet {
        InfoSet::with_cap(owner, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(owner: Color, size_cap: usize) -> InfoSet {
        InfoSet {
            owner,
            boards: vec![Board::initial()],
            size_cap: size_cap.max(1),
            halfmoves: 0,
            overflow: None,
            patched: false,
        }
    }

    /// Builds a set from arbitrary hypotheses, checking that they agree on
    /// side to move and on the owner's pieces.
    pub fn from_boards(
        owner: Color,
        boards: impl IntoIterator<Item = Board>,
        size_cap: usize,
    ) -> Result<InfoSet, InfoSetError> {
        let mut boards: Vec<Board> = boards.into_iter().collect();
        boards.sort_unstable();
        boards.dedup();
        let set = InfoSet { owner, boards, size_cap: size_cap.max(1), halfmoves: 0, overflow: None, patched: false };
        set.check_invariants().map_err(InfoSetError::Precondition)?;
        Ok(set)
    }

    pub fn owner(&self) -> Color {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.boards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boards.is_empty()
    }

    pub fn boards(&self) -> &[Board] {
        &self.boards
    }

    pub fn contains(&self, board: &Board) -> bool {
        self.boards.binary_search(board).is_ok()
    }

    pub fn size_cap(&self) -> usize {
        self.size_cap
    }

    pub fn overflow(&self) -> Option<OverflowSignal> {
        self.overflow
    }

    /// Whether a recovery patch replaced an exact update.
    pub fn is_patched(&self) -> bool {
        self.patched
    }

    pub fn halfmoves(&self) -> u32 {
        self.halfmoves
    }

    pub fn side_to_move(&self) -> Color {
        self.boards[0].side_to_move()
    }

    /// Shared side to move, identical owner pieces, at least one board.
    pub fn check_invariants(&self) -> Result<(), String> {
        let Some(first) = self.boards.first() else {
            return Err("empty information set".into());
        };
        let own = |b: &Board| {
            let mut v = [b.color_bb(self.owner); 7];
            for (slot, kind) in v[1..].iter_mut().zip(PieceKind::ALL) {
                *slot = b.pieces(self.owner, kind);
            }
            v
        };
        let reference = own(first);
        for b in &self.boards {
            if b.side_to_move() != first.side_to_move() {
                return Err("boards disagree on side to move".into());
            }
            if own(b) != reference {
                return Err(format!("boards disagree on {} pieces", self.owner));
            }
        }
        Ok(())
    }

    fn require_to_move(&self, color: Color) -> Result<(), InfoSetError> {
        if self.boards.iter().any(|b| b.side_to_move() != color) {
            return Err(InfoSetError::Precondition(format!("{color} is not to move")));
        }
        Ok(())
    }

    fn replace(&mut self, boards: Vec<Board>, overflowed: bool) {
        self.boards = boards;
        self.halfmoves += 1;
        if overflowed && self.overflow.is_none() {
            self.overflow = Some(OverflowSignal { halfmove: self.halfmoves });
        }
    }

    /// Every opponent request on every board, kept when the capture it makes
    /// matches the notice (or makes no capture when there is none).
    ///
    /// Successors in which the owner's king was taken are dropped: the game
    /// would have ended. On error the set is left unchanged.
    pub fn expand_opponent_turn(&mut self, notice: Option<CaptureNotice>) -> Result<(), InfoSetError> {
        let owner = self.owner;
        let opp = owner.opposite();
        self.require_to_move(opp)?;
        let want = notice.map(|n| n.square);
        let (next, overflowed) = collect_capped(&self.boards, self.size_cap, |b, reqs, out| {
            reqs.clear();
            push_requests(b, opp, reqs);
            for &r in reqs.iter() {
                let (nb, res) = resolve_requested(b, r);
                if res.capture_square == want && nb.has_king(owner) {
                    out.push(nb);
                }
            }
        });
        if next.is_empty() {
            return Err(InfoSetError::Inconsistent("opponent's turn"));
        }
        self.replace(next, overflowed);
        Ok(())
    }

    /// Keeps the boards showing exactly the sensed contents.
    pub fn filter_sense(&mut self, result: &SenseResult) -> Result<(), InfoSetError> {
        if !is_sense_center(result.center) {
            return Err(InfoSetError::Precondition(format!("{} is not a sense center", result.center)));
        }
        let kept: Vec<Board> = self.boards.iter().copied().filter(|b| result.matches(b)).collect();
        if kept.is_empty() {
            return Err(InfoSetError::Inconsistent("sense result"));
        }
        self.boards = kept;
        Ok(())
    }

    /// Maps every board through the owner's request and keeps those whose
    /// result matches what the arbiter reported.
    pub fn apply_own_move(&mut self, req: MoveRequest, observed: &MoveResult) -> Result<(), InfoSetError> {
        self.require_to_move(self.owner)?;
        let first = self.boards[0];
        let req = normalize(&first, req);
        let mut space = Vec::with_capacity(64);
        push_requests(&first, self.owner, &mut space);
        if !space.contains(&req) {
            return Err(InfoSetError::Precondition(format!("{req} is not in the request space")));
        }
        let opp = self.owner.opposite();
        let mut continuing = Vec::with_capacity(self.boards.len());
        let mut ended = Vec::new();
        for b in &self.boards {
            let (nb, res) = resolve_requested(b, req);
            if res != *observed {
                continue;
            }
            if nb.has_king(opp) {
                continuing.push(nb);
            } else {
                ended.push(nb);
            }
        }
        // Boards where the opponent's king fell only survive when nothing else does:
        // then the game is over and the set is never used again.
        let mut next = if continuing.is_empty() { ended } else { continuing };
        if next.is_empty() {
            return Err(InfoSetError::Inconsistent("own move result"));
        }
        next.sort_unstable();
        next.dedup();
        self.replace(next, false);
        Ok(())
    }

    /// Recovery for a set that lost the true board (only possible after an
    /// overflow truncated it): forces every board to show the sensed block.
    pub fn patch_sense(&mut self, result: &SenseResult) {
        let opp = self.owner.opposite();
        let shown_king = result
            .contents
            .iter()
            .any(|(_, p)| *p == Some(Piece::new(opp, PieceKind::King)));
        let patched = self.boards.iter().map(|b| {
            let mut b = *b;
            if shown_king {
                b.remove_pieces(opp, PieceKind::King);
            }
            for &(s, p) in &result.contents {
                b.set(s, p);
            }
            b
        });
        self.install_patch(patched.collect(), false);
    }

    /// Recovery counterpart of [`InfoSet::apply_own_move`].
    pub fn patch_own_move(&mut self, observed: &MoveResult) {
        let next = self.boards.iter().map(|b| apply_result(b, observed)).collect();
        self.install_patch(next, true);
    }

    /// Recovery counterpart of [`InfoSet::expand_opponent_turn`]: every quiet
    /// opponent reply, with the noticed square emptied.
    pub fn patch_opponent_turn(&mut self, notice: Option<CaptureNotice>) {
        let owner = self.owner;
        let opp = owner.opposite();
        let (mut next, overflowed) = collect_capped(&self.boards, self.size_cap, |b, reqs, out| {
            reqs.clear();
            push_requests(b, opp, reqs);
            for &r in reqs.iter() {
                let (nb, res) = resolve_requested(b, r);
                if res.capture_square.is_none() {
                    out.push(nb);
                }
            }
        });
        if let Some(n) = notice {
            for b in &mut next {
                b.clear(n.square);
                let mut rights = b.castling();
                rights.remove(CastlingRights::mask_for_square(n.square));
                b.set_castling(rights);
            }
        }
        if overflowed && self.overflow.is_none() {
            self.overflow = Some(OverflowSignal { halfmove: self.halfmoves + 1 });
        }
        self.install_patch(next, true);
    }

    fn install_patch(&mut self, mut next: Vec<Board>, advance: bool) {
        let opp = self.owner.opposite();
        if next.iter().any(|b| b.has_king(opp)) {
            next.retain(|b| b.has_king(opp));
        }
        next.sort_unstable();
        next.dedup();
        self.boards = next;
        if advance {
            self.halfmoves += 1;
        }
        self.patched = true;
    }

    pub fn partitions(&self, center: Square) -> SensePartition {
        let squares = block(center);
        let mut classes = BTreeMap::new();
        for b in &self.boards {
            let mut key = [None; 9];
            for (slot, &sq) in key.iter_mut().zip(&squares) {
                *slot = b.piece_at(sq);
            }
            *classes.entry(key).or_insert(0) += 1;
        }
        SensePartition { center, classes }
    }

    /// Squares on which at least two boards differ.
    pub fn variable_squares(&self) -> u64 {
        let first = &self.boards[0];
        let mut diff = 0;
        for b in &self.boards[1..] {
            for c in Color::ALL {
                diff |= b.color_bb(c) ^ first.color_bb(c);
            }
            for k in PieceKind::ALL {
                diff |= b.kind_bb(k) ^ first.kind_bb(k);
            }
        }
        diff
    }

    /// Σ n_i² over the partition classes of each sense center, in
    /// [`SENSE_CENTERS`] order.
    pub fn sense_scores(&self) -> [u128; 36] {
        let n = self.boards.len() as u128;
        let mut scores = [n * n; 36];
        if self.boards.len() < 2 {
            return scores;
        }
        let variable = self.variable_squares();
        let active: Vec<(usize, Vec<usize>)> = SENSE_CENTERS
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| {
                let m = block_mask(c) & variable;
                (m != 0).then(|| (i, (0..64).filter(|s| m >> s & 1 != 0).collect()))
            })
            .collect();
        let mut counts: Vec<HashMap<u64, u64, FastBuild>> =
            active.iter().map(|_| HashMap::default()).collect();
        for b in &self.boards {
            let mb = b.mailbox();
            for ((_, squares), map) in active.iter().zip(counts.iter_mut()) {
                let key = squares.iter().fold(0u64, |k, &s| (k << 4) | mb[s] as u64);
                *map.entry(key).or_insert(0) += 1;
            }
        }
        for ((i, _), map) in active.iter().zip(&counts) {
            scores[*i] = map.values().map(|&c| (c as u128) * (c as u128)).sum();
        }
        scores
    }

    /// The center minimizing the expected post-sense set size, ties broken
    /// uniformly at random.
    pub fn min_expected_sense<R: Rng + ?Sized>(&self, rng: &mut R) -> Square {
        let scores = self.sense_scores();
        let best = *scores.iter().min().expect("36 centers");
        let ties: Vec<Square> = SENSE_CENTERS
            .iter()
            .zip(scores)
            .filter(|&(_, s)| s == best)
            .map(|(&c, _)| c)
            .collect();
        ties[rng.gen_range(0..ties.len())]
    }

    /// Number of distinct information sets (by content) one action can lead to.
    ///
    /// `None` when the set has overflowed, or when counting opponent replies
    /// would need more than `size_cap` successor entries.
    pub fn successor_infoset_count(&self, kind: ActionKind, model: ObservationModel) -> Option<u64> {
        if self.overflow.is_some() {
            return None;
        }
        let budget = self.size_cap;
        match (kind, model) {
            (ActionKind::OwnSense, ObservationModel::GroundTruth) => Some(self.boards.len() as u64),
            (ActionKind::OwnSense, ObservationModel::Observations) => Some(self.count_sense_successors()),
            (ActionKind::OwnMove, model) => self.count_move_successors(self.owner, model, budget),
            (ActionKind::OpponentTurn, model) => {
                self.count_move_successors(self.owner.opposite(), model, budget)
            }
        }
    }

    fn count_sense_successors(&self) -> u64 {
        if self.boards.len() == 1 {
            return 1;
        }
        let variable = self.variable_squares();
        let zs: Vec<u64> = self.boards.iter().map(Board::zobrist).collect();
        let mut seen: HashSet<Fingerprint, FastBuild> = HashSet::default();
        let mut mailboxes = None;
        for &c in &SENSE_CENTERS {
            let m = block_mask(c) & variable;
            if m == 0 {
                seen.insert(Fingerprint::of(zs.iter().copied()));
                continue;
            }
            let squares: Vec<usize> = (0..64).filter(|s| m >> s & 1 != 0).collect();
            let mbs = mailboxes.get_or_insert_with(|| self.boards.iter().map(Board::mailbox).collect::<Vec<_>>());
            let mut classes: HashMap<u64, Fingerprint, FastBuild> = HashMap::default();
            for (mb, &z) in mbs.iter().zip(&zs) {
                let key = squares.iter().fold(0u64, |k, &s| (k << 4) | mb[s] as u64);
                classes.entry(key).or_default().add(z);
            }
            seen.extend(classes.into_values());
        }
        seen.len() as u64
    }

    /// Successor sets after `mover` acts on every board with every request.
    ///
    /// Under the observation model the owner can tell results apart by the
    /// full move result (own move) or by the capture square (opponent move),
    /// and additionally by whether the game ended.
    fn count_move_successors(&self, mover: Color, model: ObservationModel, budget: usize) -> Option<u64> {
        let owner = self.owner;
        let mut seen: HashSet<Fingerprint, FastBuild> = HashSet::default();
        if mover == owner {
            // Own request spaces coincide across members, so the first board's
            // space is the union.
            let mut space = Vec::with_capacity(64);
            push_requests(&self.boards[0], owner, &mut space);
            for &req in &space {
                let mut groups: HashMap<(MoveResult, bool), Vec<u64>> = HashMap::new();
                for b in &self.boards {
                    let (nb, res) = resolve_requested(b, req);
                    match model {
                        ObservationModel::GroundTruth => {
                            seen.insert(Fingerprint::of([nb.zobrist()]));
                        }
                        ObservationModel::Observations => {
                            groups.entry((res, nb.has_king(mover.opposite()))).or_default().push(nb.zobrist());
                        }
                    }
                }
                for (_, mut zs) in groups {
                    zs.sort_unstable();
                    zs.dedup();
                    seen.insert(Fingerprint::of(zs));
                }
            }
        } else {
            let mut groups: HashMap<(Option<Square>, bool), Vec<u64>> = HashMap::new();
            let mut reqs = Vec::with_capacity(64);
            let mut entries = 0usize;
            for b in &self.boards {
                reqs.clear();
                push_requests(b, mover, &mut reqs);
                entries += reqs.len();
                if entries > budget {
                    return None;
                }
                for &r in &reqs {
                    let (nb, res) = resolve_requested(b, r);
                    match model {
                        ObservationModel::GroundTruth => {
                            seen.insert(Fingerprint::of([nb.zobrist()]));
                        }
                        ObservationModel::Observations => {
                            groups
                                .entry((res.capture_square, nb.has_king(owner)))
                                .or_default()
                                .push(nb.zobrist());
                        }
                    }
                }
            }
            for (_, mut zs) in groups {
                zs.sort_unstable();
                zs.dedup();
                seen.insert(Fingerprint::of(zs));
            }
        }
        Some(seen.len() as u64)
    }

    /// One FEN per line, ordered by board key.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut keyed: Vec<_> = self.boards.iter().map(|b| (b.key(), b)).collect();
        keyed.sort_unstable_by_key(|k| k.0);
        for (_, b) in keyed {
            writeln!(out, "{}", b.to_fen())?;
        }
        Ok(())
    }
}

/// Order-independent identity of a set of distinct boards.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Debug)]
struct Fingerprint {
    len: u64,
    sum: u64,
    mix: u64,
}

impl Fingerprint {
    fn add(&mut self, z: u64) {
        self.len += 1;
        self.sum = self.sum.wrapping_add(z);
        self.mix = self.mix.wrapping_add(remix(z));
    }

    fn of(zs: impl IntoIterator<Item = u64>) -> Fingerprint {
        let mut f = Fingerprint::default();
        for z in zs {
            f.add(z);
        }
        f
    }
}

/// Streams successors of `boards` into a deduplicated, sorted vector holding
/// at most `cap` boards. The flag reports whether anything was cut.
fn collect_capped<F>(boards: &[Board], cap: usize, successors: F) -> (Vec<Board>, bool)
where
    F: Fn(&Board, &mut Vec<MoveRequest>, &mut Vec<Board>) + Sync,
{
    let mut set: HashSet<Board, FastBuild> = HashSet::default();
    let mut overflowed = false;
    let batch = CHUNK * rayon::current_num_threads().max(1);
    'outer: for group in boards.chunks(batch) {
        let parts: Vec<Vec<Board>> = group
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut reqs = Vec::with_capacity(64);
                let mut out = Vec::with_capacity(chunk.len() * 8);
                for b in chunk {
                    successors(b, &mut reqs, &mut out);
                }
                out
            })
            .collect();
        for part in parts {
            for b in part {
                if set.len() >= cap && !set.contains(&b) {
                    overflowed = true;
                    break 'outer;
                }
                set.insert(b);
            }
        }
    }
    let mut out: Vec<Board> = set.into_iter().collect();
    out.sort_unstable();
    (out, overflowed)
}

#[cfg(test)]
mod tests;
