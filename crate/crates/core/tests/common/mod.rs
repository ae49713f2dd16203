//! Oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rbc_core::arbiter::CaptureNotice;
use rbc_core::board::standard::{make_move, standard_legal_moves};
use rbc_core::board::{
    request_space, resolve, sense, Board, Color, MoveRequest, MoveResult, Piece,
    SenseResult, Square, SENSE_CENTERS,
};
use rbc_core::infoset::InfoSet;

/// One half-turn as the mover experienced it.
#[derive(Clone, Debug)]
pub struct Step {
    pub color: Color,
    pub sense: SenseResult,
    pub request: MoveRequest,
    pub result: MoveResult,
}

/// A random game prefix played on the true board, with both players'
/// trackers updated along the way.
pub struct Prefix {
    pub truth: Board,
    pub steps: Vec<Step>,
    pub trackers: [InfoSet; 2],
}

impl Prefix {
    /// Capture notice the opponent of `step` received.
    pub fn notice(step: &Step) -> Option<CaptureNotice> {
        step.result.capture_square.map(|square| CaptureNotice { square })
    }

    /// `color`'s set after the whole prefix, expanded over the opponent's
    /// last half-turn when that came last.
    pub fn tracker_now(&self, color: Color) -> InfoSet {
        let mut set = self.trackers[color.index()].clone();
        if let Some(last) = self.steps.last() {
            if last.color != color {
                set.expand_opponent_turn(Prefix::notice(last)).expect("sound tracker");
            }
        }
        set
    }
}

/// Plays `plies` half-turns of uniformly random senses and requests, passing
/// with probability `pass_prob`. Stops early if a king falls.
pub fn random_prefix<R: Rng>(rng: &mut R, plies: usize, pass_prob: f64) -> Prefix {
    let mut truth = Board::initial();
    let mut trackers = [InfoSet::new(Color::White), InfoSet::new(Color::Black)];
    let mut steps: Vec<Step> = Vec::new();
    for ply in 0..plies {
        let color = if ply % 2 == 0 { Color::White } else { Color::Black };
        let set = &mut trackers[color.index()];
        if let Some(prev) = steps.last() {
            set.expand_opponent_turn(Prefix::notice(prev)).expect("expand");
        }
        let center = *SENSE_CENTERS.choose(rng).unwrap();
        let seen = sense(&truth, center).unwrap();
        set.filter_sense(&seen).expect("filter");
        let request = if rng.gen_bool(pass_prob) {
            MoveRequest::Pass
        } else {
            let space: Vec<MoveRequest> =
                request_space(&truth, color).unwrap().into_iter().filter(|r| !r.is_pass()).collect();
            *space.choose(rng).unwrap()
        };
        let (next, result) = resolve(&truth, request).unwrap();
        set.apply_own_move(request, &result).expect("own move");
        steps.push(Step { color, sense: seen, request, result });
        truth = next;
        if !truth.has_king(color.opposite()) {
            break;
        }
    }
    Prefix { truth, steps, trackers }
}

/// Every board `owner` could be facing after `steps`, found by walking all
/// opponent request sequences from the start and keeping those consistent
/// with what `owner` sensed, was told about its own moves and heard about
/// captures.
pub fn enumerate_consistent(owner: Color, steps: &[Step]) -> BTreeSet<Board> {
    let mut frontier = vec![Board::initial()];
    for step in steps {
        let mut next = Vec::new();
        for b in &frontier {
            if step.color == owner {
                if !step.sense.contents.iter().all(|&(s, p)| b.piece_at(s) == p) {
                    continue;
                }
                let (nb, res) = resolve(b, step.request).unwrap();
                if res == step.result {
                    next.push(nb);
                }
            } else {
                let heard = step.result.capture_square;
                for r in request_space(b, step.color).unwrap() {
                    let (nb, res) = resolve(b, r).unwrap();
                    if res.capture_square == heard && nb.has_king(owner) {
                        next.push(nb);
                    }
                }
            }
        }
        let dedup: BTreeSet<Board> = next.into_iter().collect();
        frontier = dedup.into_iter().collect();
    }
    frontier.into_iter().collect()
}

/// Σ nᵢ² over the partition a center induces, by grouping boards on the
/// literal contents of the sensed block.
pub fn brute_sense_score(boards: &[Board], center: Square) -> u128 {
    let mut groups: HashMap<[(Square, Option<Piece>); 9], u128> = HashMap::new();
    for b in boards {
        *groups.entry(sense(b, center).unwrap().contents).or_default() += 1;
    }
    groups.values().map(|n| n * n).sum()
}

/// Pre-sense sets of random games with between `min` and `max` boards.
pub fn harvest_sets<R: Rng>(rng: &mut R, want: usize, min: usize, max: usize) -> Vec<InfoSet> {
    let mut out = Vec::new();
    while out.len() < want {
        let plies = rng.gen_range(1..=9);
        let p = random_prefix(rng, plies, 0.3);
        if !p.truth.has_king(Color::White) || !p.truth.has_king(Color::Black) {
            continue;
        }
        let next = if p.steps.len() % 2 == 0 { Color::White } else { Color::Black };
        let set = p.tracker_now(next);
        if (min..=max).contains(&set.len()) {
            out.push(set);
        }
    }
    out
}

/// Plays random classical games and compares RBC resolution with classical
/// move application on `checks` legal moves. Returns the mismatches.
pub fn classical_agreement<R: Rng>(rng: &mut R, checks: usize) -> Vec<String> {
    let mut bad = Vec::new();
    let mut done = 0;
    let mut board = Board::initial();
    let mut plies = 0;
    while done < checks {
        let legal = standard_legal_moves(&board);
        if legal.is_empty() || plies > 120 {
            board = Board::initial();
            plies = 0;
            continue;
        }
        let mv = *legal.choose(rng).unwrap();
        let classical = make_move(&board, mv);
        match resolve(&board, mv) {
            Ok((rbc, res)) if rbc == classical && res.taken.is_some_and(|t| Some(t.landed) == mv.to_square()) => {}
            Ok((rbc, _)) => bad.push(format!("{} {mv}: {} vs {}", board.to_fen(), rbc.to_fen(), classical.to_fen())),
            Err(e) => bad.push(format!("{} {mv}: {e}", board.to_fen())),
        }
        done += 1;
        board = classical;
        plies += 1;
    }
    bad
}
