//! Complexity measurements taken from live games: information-set sizes,
//! successor-set branching and log-space game size.

mod report;

use serde::{Deserialize, Serialize};

use crate::arbiter::{CaptureNotice, GameObserver, Phase};
use crate::board::{Board, Color, MoveResult, SenseResult};
use crate::infoset::{ActionKind, InfoSet, ObservationModel};

pub use report::{
    aggregate, pass_sweep_rows, write_curves_csv, write_pass_sweep_csv, write_games_csv, write_series_csv, write_summary_csv,
    AggregateReport, CurvePoint, PassSweepRow, GameEntry, SeatSummary,
};

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LogSum {
    sum: f64,
    comp: f64,
}

impl LogSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// log10 of a set size once the opponent's knowledge of the owner's senses
/// is folded in: every earlier sense could have been any of 36 centers.
pub fn knowledge_expansion_exponent(pre_sense_size: u64, turn: u32) -> f64 {
    assert!(turn >= 1, "turns are numbered from 1");
    (pre_sense_size as f64).log10() + f64::from(turn - 1) * 36f64.log10()
}

/// One player's measurements for one of its own half-turns.
///
/// Counts are taken before the action they describe resolves. The opponent
/// count describes the opponent half-turn just before this one and is absent
/// on White's first turn.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TurnRow {
    pub ply: u32,
    pub color: Color,
    /// Full-move number from this player's point of view.
    pub turn: u32,
    pub pre_sense_size: Option<u64>,
    pub post_sense_size: Option<u64>,
    pub branch_opponent_turn: Option<u64>,
    pub branch_own_sense: Option<u64>,
    pub branch_own_move: Option<u64>,
    pub available: bool,
}

impl TurnRow {
    fn unavailable(ply: u32, color: Color) -> TurnRow {
        TurnRow {
            ply,
            color,
            turn: ply / 2 + 1,
            pre_sense_size: None,
            post_sense_size: None,
            branch_opponent_turn: None,
            branch_own_sense: None,
            branch_own_move: None,
            available: false,
        }
    }

    /// Sense times move: the branching of the player's own turn.
    pub fn turn_branching(&self) -> Option<f64> {
        Some(self.branch_own_sense? as f64 * self.branch_own_move? as f64)
    }

    /// Counts of the actions that can branch under `model`. A player shown
    /// the board learns nothing from sensing, so its sense is left out.
    pub fn action_counts(&self, model: ObservationModel) -> Vec<u64> {
        let mut out: Vec<u64> = self.branch_opponent_turn.into_iter().collect();
        if model == ObservationModel::Observations {
            out.extend(self.branch_own_sense);
        }
        out.extend(self.branch_own_move);
        out
    }

    pub fn action_mean(&self, model: ObservationModel) -> Option<f64> {
        let c = self.action_counts(model);
        (!c.is_empty()).then(|| c.iter().map(|&x| x as f64).sum::<f64>() / c.len() as f64)
    }

    pub fn action_geo_mean(&self, model: ObservationModel) -> Option<f64> {
        let c = self.action_counts(model);
        (!c.is_empty()).then(|| 10f64.powf(c.iter().map(|&x| (x as f64).log10()).sum::<f64>() / c.len() as f64))
    }
}

/// Game size for one player: log10 of the product of every per-action count.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct GameSize {
    pub log10: f64,
    /// False when some action had no count; `log10` is then a lower bound.
    pub complete: bool,
    pub actions: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricLedger {
    pub rows: Vec<TurnRow>,
    /// Times the true board was missing from a shadow set that had not
    /// overflowed. Always zero for a correct tracker.
    pub violations: u32,
    pub models: [ObservationModel; 2],
}

impl MetricLedger {
    pub fn new(models: [ObservationModel; 2]) -> MetricLedger {
        MetricLedger { rows: Vec::new(), violations: 0, models }
    }

    /// Appends a row after checking its invariants.
    pub fn record_turn(&mut self, row: TurnRow) {
        if row.available {
            let (pre, post) = (row.pre_sense_size.unwrap_or(0), row.post_sense_size.unwrap_or(0));
            assert!(pre >= 1 && post >= 1 && post <= pre, "sizes {pre} -> {post}");
            for c in [row.branch_opponent_turn, row.branch_own_sense, row.branch_own_move].into_iter().flatten() {
                assert!(c >= 1, "successor count {c}");
            }
        }
        self.rows.push(row);
    }

    pub fn rows_for(&self, color: Color) -> impl Iterator<Item = &TurnRow> {
        self.rows.iter().filter(move |r| r.color == color)
    }

    pub fn model(&self, color: Color) -> ObservationModel {
        self.models[color.index()]
    }

    pub fn game_size_log10(&self, color: Color) -> GameSize {
        let mut sum = LogSum::default();
        let mut complete = true;
        let mut actions = 0;
        for r in self.rows_for(color) {
            if !r.available {
                complete = false;
                continue;
            }
            for c in [r.branch_opponent_turn, r.branch_own_sense, r.branch_own_move].into_iter().flatten() {
                sum.add((c as f64).log10());
                actions += 1;
            }
        }
        GameSize { log10: sum.value(), complete, actions }
    }
}

struct Track {
    model: ObservationModel,
    cap: usize,
    set: Option<InfoSet>,
    pending_opponent: Option<u64>,
    /// The opponent count could not be taken, so the next row is unavailable.
    opponent_lost: bool,
    row: Option<TurnRow>,
}

impl Track {
    fn new(owner: Color, model: ObservationModel, cap: usize) -> Track {
        Track {
            model,
            cap,
            set: Some(InfoSet::with_cap(owner, cap)),
            pending_opponent: None,
            opponent_lost: false,
            row: None,
        }
    }

    /// A player shown the board knows exactly one board.
    fn set_for(&mut self, owner: Color, truth: &Board) {
        if self.model == ObservationModel::GroundTruth {
            self.set = InfoSet::from_boards(owner, [*truth], self.cap).ok();
        }
    }

    fn usable(&self) -> Option<&InfoSet> {
        self.set.as_ref().filter(|s| s.overflow().is_none())
    }

    fn count(&self, kind: ActionKind) -> Option<u64> {
        self.usable()?.successor_infoset_count(kind, self.model)
    }
}

/// Keeps a shadow information set for each player and records a
/// [`TurnRow`] per half-turn. Once a shadow set overflows its cap it is
/// dropped and later rows are marked unavailable.
pub struct MetricsObserver {
    tracks: [Track; 2],
    ledger: MetricLedger,
    ply: u32,
}

impl MetricsObserver {
    pub fn new(models: [ObservationModel; 2], size_cap: usize) -> MetricsObserver {
        MetricsObserver {
            tracks: [
                Track::new(Color::White, models[0], size_cap),
                Track::new(Color::Black, models[1], size_cap),
            ],
            ledger: MetricLedger::new(models),
            ply: 0,
        }
    }

    pub fn ledger(&self) -> &MetricLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> MetricLedger {
        self.ledger
    }

    /// The current shadow set of a player, if it is still tracked.
    pub fn shadow(&self, color: Color) -> Option<&InfoSet> {
        self.tracks[color.index()].set.as_ref()
    }

    fn check(&mut self, color: Color, truth: &Board) {
        if let Some(s) = self.tracks[color.index()].usable() {
            if !s.is_patched() && !s.contains(truth) {
                log::error!("shadow set of {color} lost the true board at ply {}", self.ply);
                self.ledger.violations += 1;
            }
        }
    }
}

impl GameObserver for MetricsObserver {
    fn on_turn_start(&mut self, mover: Color, truth: &Board, notice: Option<CaptureNotice>) {
        let other = mover.opposite();
        {
            let t = &mut self.tracks[other.index()];
            t.set_for(other, truth);
            let count = t.count(ActionKind::OpponentTurn);
            t.opponent_lost = count.is_none();
            t.pending_opponent = count;
        }

        let t = &mut self.tracks[mover.index()];
        if t.model == ObservationModel::Observations {
            if let Some(set) = t.set.as_mut() {
                if set.side_to_move() != mover && set.expand_opponent_turn(notice).is_err() {
                    t.set = None;
                }
            }
        }
        t.set_for(mover, truth);
        if t.set.as_ref().is_some_and(|s| s.overflow().is_some()) {
            t.set = None;
        }
        let first_turn = mover == Color::White && self.ply == 0;
        let mut row = TurnRow::unavailable(self.ply, mover);
        if let Some(s) = t.usable().filter(|_| first_turn || !t.opponent_lost) {
            row.pre_sense_size = Some(s.len() as u64);
            row.branch_opponent_turn = if first_turn { None } else { t.pending_opponent };
            row.branch_own_sense = s.successor_infoset_count(ActionKind::OwnSense, t.model);
            row.available = row.branch_own_sense.is_some();
        }
        t.pending_opponent = None;
        t.row = Some(row);
        self.check(mover, truth);
    }

    fn on_sense(&mut self, mover: Color, truth: &Board, result: &SenseResult) {
        let t = &mut self.tracks[mover.index()];
        if let Some(set) = t.set.as_mut() {
            if set.filter_sense(result).is_err() {
                t.set = None;
            }
        }
        let size = t.usable().map(|s| s.len() as u64);
        let count = t.count(ActionKind::OwnMove);
        if let Some(row) = t.row.as_mut() {
            row.post_sense_size = size;
            row.branch_own_move = count;
            row.available &= size.is_some() && count.is_some();
        }
        self.check(mover, truth);
    }

    fn on_move(&mut self, mover: Color, _before: &Board, after: &Board, result: &MoveResult) {
        let t = &mut self.tracks[mover.index()];
        match t.model {
            ObservationModel::Observations => {
                if let Some(set) = t.set.as_mut() {
                    if set.apply_own_move(result.requested, result).is_err() {
                        t.set = None;
                    }
                }
            }
            ObservationModel::GroundTruth => t.set_for(mover, after),
        }
        if let Some(mut row) = t.row.take() {
            if !row.available {
                row = TurnRow::unavailable(row.ply, row.color);
            }
            self.ledger.record_turn(row);
        }
        self.ply += 1;
        if after.has_king(Color::White) && after.has_king(Color::Black) {
            self.check(mover, after);
        }
    }
}

/// Counts, for strategies that track an information set, how often the true
/// board is missing from it.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct SoundnessObserver {
    pub checks: u64,
    pub violations: u64,
    /// Checks skipped because the set overflowed or was patched.
    pub skipped: u64,
}

impl GameObserver for SoundnessObserver {
    fn on_belief(&mut self, mover: Color, phase: Phase, belief: Option<&InfoSet>, truth: &Board) {
        let Some(set) = belief else { return };
        if set.overflow().is_some() || set.is_patched() {
            self.skipped += 1;
            return;
        }
        self.checks += 1;
        if !set.contains(truth) {
            log::error!("{mover} {phase:?}: true board missing from a set of {}", set.len());
            self.violations += 1;
        }
    }
}

/// Runs several observers on one game.
pub struct Fanout<'a>(pub Vec<&'a mut dyn GameObserver>);

impl GameObserver for Fanout<'_> {
    fn on_turn_start(&mut self, mover: Color, truth: &Board, notice: Option<CaptureNotice>) {
        self.0.iter_mut().for_each(|o| o.on_turn_start(mover, truth, notice));
    }
    fn on_sense(&mut self, mover: Color, truth: &Board, result: &SenseResult) {
        self.0.iter_mut().for_each(|o| o.on_sense(mover, truth, result));
    }
    fn on_move(&mut self, mover: Color, before: &Board, after: &Board, result: &MoveResult) {
        self.0.iter_mut().for_each(|o| o.on_move(mover, before, after, result));
    }
    fn on_belief(&mut self, mover: Color, phase: Phase, belief: Option<&InfoSet>, truth: &Board) {
        self.0.iter_mut().for_each(|o| o.on_belief(mover, phase, belief, truth));
    }
    fn on_game_end(&mut self, record: &crate::arbiter::GameRecord) {
        self.0.iter_mut().for_each(|o| o.on_game_end(record));
    }
}
