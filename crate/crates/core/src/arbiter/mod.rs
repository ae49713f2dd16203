//! The arbiter: runs one game, hands each player exactly its own
//! observations, and writes a replayable record.

mod record;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{
    game_over, request_space, resolve, sense, Board, Color, MoveRequest, MoveResult, PieceKind,
    SenseResult, Square,
};
use crate::infoset::InfoSet;

pub use record::{replay, GameRecord, HalfTurn, Outcome, RecordError, Termination};

/// Sent to a player when the opponent's move captured one of its pieces.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CaptureNotice {
    pub square: Square,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("evaluator failed: {0}")]
    Evaluator(String),
    #[error("{0}")]
    Other(String),
}

/// The decision interface every bot implements.
///
/// A strategy only ever sees its own color, the initial position, its sense
/// results, its move results and capture notices about its own pieces. The
/// true board is delivered through [`Strategy::handle_ground_truth`] only when
/// the seat was explicitly granted access.
pub trait Strategy: Send {
    fn name(&self) -> &str;

    /// Bots that play from the true board must be seated with a grant.
    fn requires_ground_truth(&self) -> bool {
        false
    }

    fn handle_game_start(&mut self, color: Color, initial: &Board);

    fn handle_ground_truth(&mut self, _truth: &Board) {}

    /// Called at the start of every own turn except White's first.
    fn handle_opponent_move(&mut self, notice: Option<CaptureNotice>);

    fn choose_sense(&mut self) -> Result<Square, StrategyError>;

    fn handle_sense_result(&mut self, result: &SenseResult);

    fn choose_move(&mut self) -> Result<MoveRequest, StrategyError>;

    fn handle_move_result(&mut self, result: &MoveResult);

    fn handle_game_end(&mut self, _winner: Option<Color>, _notice: Option<CaptureNotice>) {}

    /// The strategy's own information set, if it keeps one. Read by the
    /// arbiter for soundness checks; nothing flows back to the strategy.
    fn tracked_infoset(&self) -> Option<&InfoSet> {
        None
    }
}

/// A strategy in its chair, with or without access to the true board.
pub struct Seat<'a> {
    pub strategy: &'a mut dyn Strategy,
    pub ground_truth: bool,
}

impl<'a> Seat<'a> {
    pub fn new(strategy: &'a mut dyn Strategy) -> Seat<'a> {
        Seat { strategy, ground_truth: false }
    }

    pub fn with_ground_truth(strategy: &'a mut dyn Strategy) -> Seat<'a> {
        Seat { strategy, ground_truth: true }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DrawConfig {
    pub threefold: bool,
    pub fifty_move: bool,
    pub max_fullmoves: u32,
}

impl DrawConfig {
    pub const DEFAULT_MAX_FULLMOVES: u32 = 200;

    pub fn enabled() -> DrawConfig {
        DrawConfig { threefold: true, fifty_move: true, max_fullmoves: Self::DEFAULT_MAX_FULLMOVES }
    }

    pub fn disabled() -> DrawConfig {
        DrawConfig { threefold: false, fifty_move: false, max_fullmoves: Self::DEFAULT_MAX_FULLMOVES }
    }

    pub fn with_max_fullmoves(mut self, n: u32) -> DrawConfig {
        self.max_fullmoves = n;
        self
    }
}

impl Default for DrawConfig {
    fn default() -> Self {
        DrawConfig::disabled()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArbiterError {
    #[error("max_fullmoves must be at least 1")]
    BadDrawConfig,
    #[error("{0} needs ground truth but its seat has no grant")]
    MissingGrant(String),
}

/// Points in a half-turn at which an observer is told about a strategy's belief.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Phase {
    /// After the opponent's move was reported, before sensing.
    PreSense,
    PostSense,
    /// After the mover's own move result, when the game goes on.
    PostMove,
}

/// Harness-side hook with ground-truth access; never visible to strategies.
#[allow(unused_variables)]
pub trait GameObserver {
    fn on_turn_start(&mut self, mover: Color, truth: &Board, notice: Option<CaptureNotice>) {}
    fn on_sense(&mut self, mover: Color, truth: &Board, result: &SenseResult) {}
    fn on_move(&mut self, mover: Color, before: &Board, after: &Board, result: &MoveResult) {}
    fn on_belief(&mut self, mover: Color, phase: Phase, belief: Option<&InfoSet>, truth: &Board) {}
    fn on_game_end(&mut self, record: &GameRecord) {}
}

pub struct NoObserver;

impl GameObserver for NoObserver {}

/// Plays one game. Strategy failures forfeit the game rather than erroring.
pub fn play_game<'a>(
    white: Seat<'a>,
    black: Seat<'a>,
    draw: DrawConfig,
    seed: u64,
    observer: &mut dyn GameObserver,
) -> Result<GameRecord, ArbiterError> {
    if draw.max_fullmoves == 0 {
        return Err(ArbiterError::BadDrawConfig);
    }
    let mut seats = [white, black];
    for seat in &seats {
        if seat.strategy.requires_ground_truth() && !seat.ground_truth {
            return Err(ArbiterError::MissingGrant(seat.strategy.name().to_string()));
        }
    }

    let mut board = Board::initial();
    let mut record = GameRecord::new(
        seats[0].strategy.name().to_string(),
        seats[1].strategy.name().to_string(),
        seed,
        draw,
    );
    for color in Color::ALL {
        seats[color.index()].strategy.handle_game_start(color, &board);
    }

    let mut repetitions: HashMap<Board, u32> = HashMap::new();
    repetitions.insert(board, 1);
    let mut halfmove_clock = 0u32;
    let mut fullmoves_done = 0u32;
    let mut pending: Option<CaptureNotice> = None;
    let mut ply = 0u32;

    let (outcome, termination) = loop {
        let mover = board.side_to_move();
        let seat = &mut seats[mover.index()];

        if ply > 0 {
            seat.strategy.handle_opponent_move(pending);
        }
        observer.on_turn_start(mover, &board, pending);
        observer.on_belief(mover, Phase::PreSense, seat.strategy.tracked_infoset(), &board);
        if seat.ground_truth {
            seat.strategy.handle_ground_truth(&board);
        }

        let center = match seat.strategy.choose_sense() {
            Ok(c) => c,
            Err(e) => break forfeit(mover, format!("sense failed: {e}")),
        };
        let sensed = match sense(&board, center) {
            Ok(s) => s,
            Err(e) => break forfeit(mover, e.to_string()),
        };
        seat.strategy.handle_sense_result(&sensed);
        observer.on_sense(mover, &board, &sensed);
        observer.on_belief(mover, Phase::PostSense, seat.strategy.tracked_infoset(), &board);

        let request = match seat.strategy.choose_move() {
            Ok(m) => m,
            Err(e) => break forfeit(mover, format!("move failed: {e}")),
        };
        let legal = request_space(&board, mover).map(|s| s.contains(&request)).unwrap_or(false);
        if !legal {
            break forfeit(mover, format!("request {request} is not in the request space"));
        }
        let (next, result) = match resolve(&board, request) {
            Ok(r) => r,
            Err(e) => break forfeit(mover, e.to_string()),
        };
        seat.strategy.handle_move_result(&result);
        observer.on_move(mover, &board, &next, &result);

        let moved_pawn = result
            .taken
            .is_some_and(|t| board.kind_at(t.from) == Some(PieceKind::Pawn));
        let notice = result.capture_square.map(|square| CaptureNotice { square });
        record.entries.push(HalfTurn {
            ply,
            color: mover,
            sense: sensed,
            request,
            result,
            notice,
        });
        pending = notice;
        board = next;
        ply += 1;

        match game_over(&board) {
            Ok(Some(winner)) => break (Outcome::win(winner), Termination::KingCapture),
            Ok(None) => {}
            Err(e) => break forfeit(mover, e.to_string()),
        }
        observer.on_belief(mover, Phase::PostMove, seats[mover.index()].strategy.tracked_infoset(), &board);

        if moved_pawn || result.capture_square.is_some() {
            halfmove_clock = 0;
        } else {
            halfmove_clock += 1;
        }
        let seen = repetitions.entry(board).or_insert(0);
        *seen += 1;
        if draw.threefold && *seen >= 3 {
            break (Outcome::Draw, Termination::Threefold);
        }
        if draw.fifty_move && halfmove_clock >= 100 {
            break (Outcome::Draw, Termination::FiftyMove);
        }
        if mover == Color::Black {
            fullmoves_done += 1;
            if fullmoves_done >= draw.max_fullmoves {
                break (Outcome::TurnLimit, Termination::TurnLimit);
            }
        }
    };

    record.outcome = outcome;
    record.termination = termination;
    let winner = outcome.winner();
    let last_notice = match record.termination {
        Termination::KingCapture => pending,
        _ => None,
    };
    for color in Color::ALL {
        let notice = if Some(color) == winner { None } else { last_notice };
        seats[color.index()].strategy.handle_game_end(winner, notice);
    }
    observer.on_game_end(&record);
    Ok(record)
}

fn forfeit(loser: Color, reason: String) -> (Outcome, Termination) {
    log::warn!("{loser} forfeits: {reason}");
    (Outcome::win(loser.opposite()), Termination::Forfeit { loser, reason })
}
