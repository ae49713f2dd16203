use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{knowledge_expansion_exponent, MetricLedger, TurnRow};
use crate::arbiter::Outcome;
use crate::board::Color;

/// One finished game as the aggregation sees it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameEntry {
    pub pairing: String,
    pub game: u32,
    pub white: String,
    pub black: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub termination: String,
    pub plies: u32,
    pub ledger: Option<MetricLedger>,
}

impl GameEntry {
    pub fn bot(&self, seat: Color) -> &str {
        match seat {
            Color::White => &self.white,
            Color::Black => &self.black,
        }
    }
}

/// Aggregates for one seat of one (white, black) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeatSummary {
    pub pairing: String,
    pub white: String,
    pub black: String,
    pub seat: String,
    pub bot: String,
    pub opponent: String,
    pub games: u32,
    pub wins: u32,
    pub losses: u32,
    pub draws: u32,
    pub mean_pre_sense_size: Option<f64>,
    pub mean_branch: Option<f64>,
    pub mean_branch_action: Option<f64>,
    pub mean_branch_action_geo: Option<f64>,
    pub mean_knowledge_exponent: Option<f64>,
    /// Half-turns behind the per-turn means above.
    pub turn_samples: u32,
    pub mean_log10_game_size: Option<f64>,
    /// Games with a complete size behind the mean above.
    pub game_size_samples: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub pairing: String,
    pub seat: String,
    pub bot: String,
    pub opponent: String,
    pub turn: u32,
    pub games: u32,
    pub mean_pre_sense_size: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateReport {
    pub seats: Vec<SeatSummary>,
    pub curves: Vec<CurvePoint>,
}

impl AggregateReport {
    pub fn seat(&self, white: &str, black: &str, seat: Color) -> Option<&SeatSummary> {
        self.seats.iter().find(|s| s.white == white && s.black == black && s.seat == seat.name())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0u32, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / f64::from(n))
}

/// Rows of one seat, per game, restricted to turns at which every game that
/// reached the turn has data.
fn usable_rows<'a>(per_game: &[Vec<&'a TurnRow>]) -> (Vec<&'a TurnRow>, BTreeMap<u32, u32>) {
    let mut turns: BTreeMap<u32, (u32, bool)> = BTreeMap::new();
    for rows in per_game {
        for r in rows {
            let e = turns.entry(r.turn).or_insert((0, true));
            e.0 += 1;
            e.1 &= r.available;
        }
    }
    let ok: BTreeMap<u32, u32> = turns.into_iter().filter(|(_, (_, a))| *a).map(|(t, (n, _))| (t, n)).collect();
    let rows = per_game.iter().flatten().copied().filter(|r| ok.contains_key(&r.turn)).collect();
    (rows, ok)
}

fn rows_of<'a>(games: &[&'a GameEntry], seat: Color) -> Vec<Vec<&'a TurnRow>> {
    games.iter().filter_map(|g| g.ledger.as_ref()).map(|l| l.rows_for(seat).collect()).collect()
}

fn curve(rows: &[&TurnRow], turns: &BTreeMap<u32, u32>) -> Vec<(u32, u32, f64)> {
    turns
        .iter()
        .filter_map(|(&t, &n)| {
            let m = mean(rows.iter().filter(|r| r.turn == t).filter_map(|r| r.pre_sense_size).map(|x| x as f64))?;
            Some((t, n, m))
        })
        .collect()
}

/// Per-cell and per-seat means, W-L-D tallies and pre-sense size curves.
/// Cells appear in the order of their first game.
pub fn aggregate(entries: &[GameEntry]) -> AggregateReport {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut cells: BTreeMap<(String, String), Vec<&GameEntry>> = BTreeMap::new();
    for e in entries {
        let key = (e.white.clone(), e.black.clone());
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().push(e);
    }
    let mut report = AggregateReport::default();
    for key in order {
        let games = &cells[&key];
        let pairing = games[0].pairing.clone();
        for seat in Color::ALL {
            let (mut wins, mut losses, mut draws) = (0, 0, 0);
            for g in games {
                match g.outcome.winner() {
                    Some(c) if c == seat => wins += 1,
                    Some(_) => losses += 1,
                    None => draws += 1,
                }
            }
            let per_game = rows_of(games, seat);
            let (rows, turns) = usable_rows(&per_game);
            let model = games.iter().find_map(|g| g.ledger.as_ref()).map(|l| l.model(seat));
            let sizes: Vec<f64> = games
                .iter()
                .filter_map(|g| g.ledger.as_ref())
                .map(|l| l.game_size_log10(seat))
                .filter(|s| s.complete)
                .map(|s| s.log10)
                .collect();
            let bot = games[0].bot(seat).to_string();
            let opponent = games[0].bot(seat.opposite()).to_string();
            report.seats.push(SeatSummary {
                pairing: pairing.clone(),
                white: key.0.clone(),
                black: key.1.clone(),
                seat: seat.name().to_string(),
                bot: bot.clone(),
                opponent: opponent.clone(),
                games: games.len() as u32,
                wins,
                losses,
                draws,
                mean_pre_sense_size: mean(rows.iter().filter_map(|r| r.pre_sense_size).map(|x| x as f64)),
                mean_branch: mean(rows.iter().filter_map(|r| r.turn_branching())),
                mean_branch_action: model.and_then(|m| mean(rows.iter().filter_map(|r| r.action_mean(m)))),
                mean_branch_action_geo: model.and_then(|m| mean(rows.iter().filter_map(|r| r.action_geo_mean(m)))),
                mean_knowledge_exponent: mean(
                    rows.iter().filter_map(|r| Some(knowledge_expansion_exponent(r.pre_sense_size?, r.turn))),
                ),
                turn_samples: rows.len() as u32,
                mean_log10_game_size: mean(sizes.iter().copied()),
                game_size_samples: sizes.len() as u32,
            });
            for (turn, n, m) in curve(&rows, &turns) {
                report.curves.push(CurvePoint {
                    pairing: pairing.clone(),
                    seat: seat.name().to_string(),
                    bot: bot.clone(),
                    opponent: opponent.clone(),
                    turn,
                    games: n,
                    mean_pre_sense_size: m,
                });
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PassSweepRow {
    pub turn: u32,
    pub pass_prob: f64,
    pub games: u32,
    pub mean_pre_sense_size: f64,
}

/// Pre-sense size curve of `bot` over `entries`, whichever color it played.
pub fn pass_sweep_rows(bot: &str, pass_prob: f64, entries: &[GameEntry]) -> Vec<PassSweepRow> {
    let mut per_game = Vec::new();
    for e in entries {
        let Some(l) = e.ledger.as_ref() else { continue };
        for seat in Color::ALL {
            if e.bot(seat) == bot {
                per_game.push(l.rows_for(seat).collect::<Vec<_>>());
            }
        }
    }
    let (rows, turns) = usable_rows(&per_game);
    curve(&rows, &turns)
        .into_iter()
        .map(|(turn, games, m)| PassSweepRow { turn, pass_prob, games, mean_pre_sense_size: m })
        .collect()
}

#[derive(Serialize)]
struct SeriesRow<'a> {
    pairing: &'a str,
    game: u32,
    turn: u32,
    player: &'a str,
    bot: &'a str,
    pre_sense_size: Option<u64>,
    post_sense_size: Option<u64>,
    branch_opponent_turn: Option<u64>,
    branch_own_sense: Option<u64>,
    branch_own_move: Option<u64>,
    available: bool,
}

#[derive(Serialize)]
struct GameRow<'a> {
    pairing: &'a str,
    game: u32,
    white: &'a str,
    black: &'a str,
    seed: u64,
    outcome: Outcome,
    termination: &'a str,
    plies: u32,
    white_log10_game_size: Option<f64>,
    white_game_size_complete: Option<bool>,
    black_log10_game_size: Option<f64>,
    black_game_size_complete: Option<bool>,
    shadow_violations: Option<u32>,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(out)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> csv::Result<()> {
    w.flush()?;
    Ok(())
}

/// Writes only the header when there are no rows, unlike serde-driven writing.
fn header_only<W: Write>(w: &mut csv::Writer<W>, header: &[&str]) -> csv::Result<()> {
    w.write_record(header)
}

pub fn write_series_csv<W: Write>(entries: &[GameEntry], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    let mut any = false;
    for e in entries {
        let Some(l) = e.ledger.as_ref() else { continue };
        for r in &l.rows {
            any = true;
            w.serialize(SeriesRow {
                pairing: &e.pairing,
                game: e.game,
                turn: r.turn,
                player: r.color.name(),
                bot: e.bot(r.color),
                pre_sense_size: r.pre_sense_size,
                post_sense_size: r.post_sense_size,
                branch_opponent_turn: r.branch_opponent_turn,
                branch_own_sense: r.branch_own_sense,
                branch_own_move: r.branch_own_move,
                available: r.available,
            })?;
        }
    }
    if !any {
        header_only(
            &mut w,
            &[
                "pairing",
                "game",
                "turn",
                "player",
                "bot",
                "pre_sense_size",
                "post_sense_size",
                "branch_opponent_turn",
                "branch_own_sense",
                "branch_own_move",
                "available",
            ],
        )?;
    }
    finish(w)
}

pub fn write_games_csv<W: Write>(entries: &[GameEntry], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    for e in entries {
        let size = |c: Color| e.ledger.as_ref().map(|l| l.game_size_log10(c));
        w.serialize(GameRow {
            pairing: &e.pairing,
            game: e.game,
            white: &e.white,
            black: &e.black,
            seed: e.seed,
            outcome: e.outcome,
            termination: &e.termination,
            plies: e.plies,
            white_log10_game_size: size(Color::White).map(|s| s.log10),
            white_game_size_complete: size(Color::White).map(|s| s.complete),
            black_log10_game_size: size(Color::Black).map(|s| s.log10),
            black_game_size_complete: size(Color::Black).map(|s| s.complete),
            shadow_violations: e.ledger.as_ref().map(|l| l.violations),
        })?;
    }
    if entries.is_empty() {
        header_only(
            &mut w,
            &[
                "pairing",
                "game",
                "white",
                "black",
                "seed",
                "outcome",
                "termination",
                "plies",
                "white_log10_game_size",
                "white_game_size_complete",
                "black_log10_game_size",
                "black_game_size_complete",
                "shadow_violations",
            ],
        )?;
    }
    finish(w)
}

pub fn write_summary_csv<W: Write>(report: &AggregateReport, out: W) -> csv::Result<()> {
    let mut w = writer(out);
    for s in &report.seats {
        w.serialize(s)?;
    }
    if report.seats.is_empty() {
        header_only(
            &mut w,
            &[
                "pairing",
                "white",
                "black",
                "seat",
                "bot",
                "opponent",
                "games",
                "wins",
                "losses",
                "draws",
                "mean_pre_sense_size",
                "mean_branch",
                "mean_branch_action",
                "mean_branch_action_geo",
                "mean_knowledge_exponent",
                "turn_samples",
                "mean_log10_game_size",
                "game_size_samples",
            ],
        )?;
    }
    finish(w)
}

pub fn write_curves_csv<W: Write>(report: &AggregateReport, out: W) -> csv::Result<()> {
    let mut w = writer(out);
    for c in &report.curves {
        w.serialize(c)?;
    }
    if report.curves.is_empty() {
        header_only(&mut w, &["pairing", "seat", "bot", "opponent", "turn", "games", "mean_pre_sense_size"])?;
    }
    finish(w)
}

pub fn write_pass_sweep_csv<W: Write>(rows: &[PassSweepRow], out: W) -> csv::Result<()> {
    let mut w = writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        header_only(&mut w, &["turn", "pass_prob", "games", "mean_pre_sense_size"])?;
    }
    finish(w)
}
