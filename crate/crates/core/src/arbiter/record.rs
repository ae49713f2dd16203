use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CaptureNotice, DrawConfig};
use crate::board::{game_over, resolve, sense, Board, Color, MoveRequest, MoveResult, SenseResult};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    WhiteWin,
    BlackWin,
    Draw,
    TurnLimit,
}

impl Outcome {
    pub fn win(color: Color) -> Outcome {
        match color {
            Color::White => Outcome::WhiteWin,
            Color::Black => Outcome::BlackWin,
        }
    }

    pub fn winner(self) -> Option<Color> {
        match self {
            Outcome::WhiteWin => Some(Color::White),
            Outcome::BlackWin => Some(Color::Black),
            Outcome::Draw | Outcome::TurnLimit => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    KingCapture,
    Forfeit { loser: Color, reason: String },
    Threefold,
    FiftyMove,
    TurnLimit,
}

/// One half-turn as the arbiter saw it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HalfTurn {
    pub ply: u32,
    pub color: Color,
    pub sense: SenseResult,
    pub request: MoveRequest,
    pub result: MoveResult,
    /// Notice queued for the opponent by this move.
    pub notice: Option<CaptureNotice>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GameRecord {
    pub white: String,
    pub black: String,
    pub seed: u64,
    pub draw: DrawConfig,
    pub entries: Vec<HalfTurn>,
    pub outcome: Outcome,
    pub termination: Termination,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("corrupt record at ply {ply}: {reason}")]
    Corrupt { ply: u32, reason: String },
    #[error("malformed record line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("record is missing its {0} line")]
    Missing(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header { white: String, black: String, seed: u64, draw: DrawConfig },
    Turn(HalfTurn),
    Result { outcome: Outcome, termination: Termination, plies: u32 },
}

impl GameRecord {
    pub fn new(white: String, black: String, seed: u64, draw: DrawConfig) -> GameRecord {
        GameRecord {
            white,
            black,
            seed,
            draw,
            entries: Vec::new(),
            outcome: Outcome::TurnLimit,
            termination: Termination::TurnLimit,
        }
    }

    pub fn winner(&self) -> Option<Color> {
        self.outcome.winner()
    }

    /// Full moves started, counting White's half-turn.
    pub fn fullmoves(&self) -> u32 {
        (self.entries.len() as u32).div_ceil(2)
    }

    /// Writes the record as JSON lines: a header, one line per half-turn, a result.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), RecordError> {
        let header = Line::Header {
            white: self.white.clone(),
            black: self.black.clone(),
            seed: self.seed,
            draw: self.draw,
        };
        let put = |out: &mut W, line: &Line| -> Result<(), RecordError> {
            serde_json::to_writer(&mut *out, line)
                .map_err(|e| RecordError::Io(std::io::Error::other(e)))?;
            out.write_all(b"\n")?;
            Ok(())
        };
        put(&mut out, &header)?;
        for e in &self.entries {
            put(&mut out, &Line::Turn(e.clone()))?;
        }
        put(
            &mut out,
            &Line::Result {
                outcome: self.outcome,
                termination: self.termination.clone(),
                plies: self.entries.len() as u32,
            },
        )?;
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<GameRecord, RecordError> {
        let mut header = None;
        let mut entries = Vec::new();
        let mut result = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(&line).map_err(|source| RecordError::Parse { line: i + 1, source })?;
            match parsed {
                Line::Header { white, black, seed, draw } => header = Some((white, black, seed, draw)),
                Line::Turn(t) => entries.push(t),
                Line::Result { outcome, termination, .. } => result = Some((outcome, termination)),
            }
        }
        let (white, black, seed, draw) = header.ok_or(RecordError::Missing("header"))?;
        let (outcome, termination) = result.ok_or(RecordError::Missing("result"))?;
        Ok(GameRecord { white, black, seed, draw, entries, outcome, termination })
    }

    pub fn from_jsonl(text: &str) -> Result<GameRecord, RecordError> {
        GameRecord::read_jsonl(text.as_bytes())
    }
}

/// Replays every half-turn through the rules engine and returns the final board.
///
/// Each logged sense, move result and capture notice must match what the
/// rules produce; the first mismatch is reported as a corrupt record.
pub fn replay(record: &GameRecord) -> Result<Board, RecordError> {
    let mut board = Board::initial();
    for entry in &record.entries {
        let corrupt = |reason: String| RecordError::Corrupt { ply: entry.ply, reason };
        if let Ok(Some(_)) = game_over(&board) {
            return Err(corrupt("half-turn after the game ended".into()));
        }
        if entry.color != board.side_to_move() {
            return Err(corrupt(format!("{} logged but {} to move", entry.color, board.side_to_move())));
        }
        let sensed = sense(&board, entry.sense.center).map_err(|e| corrupt(e.to_string()))?;
        if sensed != entry.sense {
            return Err(corrupt("sense result does not match the board".into()));
        }
        let (next, result) = resolve(&board, entry.request).map_err(|e| corrupt(e.to_string()))?;
        if result != entry.result {
            return Err(corrupt(format!("move result for {} does not match", entry.request)));
        }
        let notice = result.capture_square.map(|square| CaptureNotice { square });
        if notice != entry.notice {
            return Err(corrupt("capture notice does not match".into()));
        }
        board = next;
    }
    if record.termination == Termination::KingCapture {
        let winner = game_over(&board).map_err(|e| RecordError::Corrupt {
            ply: record.entries.len() as u32,
            reason: e.to_string(),
        })?;
        if winner != record.outcome.winner() {
            return Err(RecordError::Corrupt {
                ply: record.entries.len() as u32,
                reason: "king-capture result does not match the final board".into(),
            });
        }
    }
    Ok(board)
}
