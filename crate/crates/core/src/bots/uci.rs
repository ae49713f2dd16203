//! External engine over the universal chess interface, with the built-in
//! search standing in for positions the engine cannot take and for the rest
//! of a game once the engine has failed.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use super::builtin::{BuiltinEvaluator, MATE};
use super::evaluator::{EvalError, Evaluator, Memo, Scored};
use crate::board::standard::{is_attacked, pseudo_legal_moves, CastleRule};
use crate::board::{Board, MoveRequest};

const MULTI_PV: usize = 5;
const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(10);
const DEFAULT_QUERY_TIMEOUT: Duration = Duration::from_secs(60);

struct Engine {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Engine {
    fn start(path: &PathBuf) -> Result<Engine, EvalError> {
        let mut child = Command::new(path)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EvalError::Spawn(format!("{}: {e}", path.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut engine = Engine { child, stdin, lines };
        engine.send("uci")?;
        engine.wait_for("uciok", HANDSHAKE_TIMEOUT)?;
        engine.send("setoption name Threads value 1")?;
        engine.send(&format!("setoption name MultiPV value {MULTI_PV}"))?;
        engine.send("isready")?;
        engine.wait_for("readyok", HANDSHAKE_TIMEOUT)?;
        Ok(engine)
    }

    fn send(&mut self, cmd: &str) -> Result<(), EvalError> {
        writeln!(self.stdin, "{cmd}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| EvalError::Protocol(format!("write failed: {e}")))
    }

    fn next_line(&self, deadline: Instant) -> Result<String, EvalError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(l) => Ok(l),
            Err(RecvTimeoutError::Timeout) => Err(EvalError::Protocol("engine timed out".into())),
            Err(RecvTimeoutError::Disconnected) => Err(EvalError::Protocol("engine exited".into())),
        }
    }

    fn wait_for(&mut self, token: &str, timeout: Duration) -> Result<(), EvalError> {
        let deadline = Instant::now() + timeout;
        loop {
            if self.next_line(deadline)?.trim() == token {
                return Ok(());
            }
        }
    }

    /// Runs one fixed-depth search and returns the principal variations' first
    /// moves, best first, plus the engine's bestmove token.
    fn search(&mut self, fen: &str, depth: u32, timeout: Duration) -> Result<(Vec<(String, i32)>, String), EvalError> {
        self.send("ucinewgame")?;
        self.send("isready")?;
        self.wait_for("readyok", timeout)?;
        self.send(&format!("position fen {fen}"))?;
        self.send(&format!("go depth {depth}"))?;
        let deadline = Instant::now() + timeout;
        let mut lines: Vec<Option<(String, i32)>> = vec![None; MULTI_PV];
        loop {
            let line = self.next_line(deadline)?;
            let mut words = line.split_whitespace();
            match words.next() {
                Some("bestmove") => {
                    let best = words.next().unwrap_or("(none)").to_string();
                    return Ok((lines.into_iter().flatten().collect(), best));
                }
                Some("info") => {
                    if let Some((idx, entry)) = parse_info(&line) {
                        if (1..=MULTI_PV).contains(&idx) {
                            lines[idx - 1] = Some(entry);
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "quit");
        let _ = self.stdin.flush();
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Pulls `(multipv index, (first pv move, score))` from an info line.
fn parse_info(line: &str) -> Option<(usize, (String, i32))> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let mut idx = 1;
    let mut score = None;
    let mut pv = None;
    let mut i = 1;
    while i < words.len() {
        match words[i] {
            "multipv" => {
                idx = words.get(i + 1)?.parse().ok()?;
                i += 2;
            }
            "score" => {
                let kind = *words.get(i + 1)?;
                let v: i32 = words.get(i + 2)?.parse().ok()?;
                score = Some(match kind {
                    "cp" => v,
                    "mate" if v > 0 => MATE - 2 * v,
                    "mate" => -MATE - 2 * v,
                    _ => return None,
                });
                i += 3;
            }
            "pv" => {
                pv = words.get(i + 1).map(|s| s.to_string());
                break;
            }
            _ => i += 1,
        }
    }
    Some((idx, (pv?, score?)))
}

pub struct UciEvaluator {
    path: PathBuf,
    depth: u32,
    timeout: Duration,
    engine: Option<Engine>,
    fallback: BuiltinEvaluator,
    memo: Memo,
    substitutions: u64,
}

impl UciEvaluator {
    /// Starts the engine; the built-in search used as a stand-in has depth 3.
    pub fn spawn(path: PathBuf, depth: u32) -> Result<UciEvaluator, EvalError> {
        let engine = Engine::start(&path)?;
        Ok(UciEvaluator {
            path,
            depth: depth.max(1),
            timeout: DEFAULT_QUERY_TIMEOUT,
            engine: Some(engine),
            fallback: BuiltinEvaluator::new(3),
            memo: Memo::default(),
            substitutions: 0,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> UciEvaluator {
        self.timeout = timeout;
        self
    }

    /// Whether the engine is still in use for this game.
    pub fn engine_alive(&self) -> bool {
        self.engine.is_some()
    }

    /// Queries answered by the built-in search instead of the engine.
    pub fn substitutions(&self) -> u64 {
        self.substitutions
    }

    fn substitute(&mut self, board: &Board, k: usize, why: &str) -> Result<Vec<Scored>, EvalError> {
        self.substitutions += 1;
        log::info!("engine substitute for {}: {why}", board.to_fen());
        self.fallback.top_k(board, k)
    }

    fn query(&mut self, board: &Board, k: usize) -> Result<Vec<Scored>, EvalError> {
        let us = board.side_to_move();
        let (Some(_), Some(their_king)) = (board.king_square(us), board.king_square(us.opposite())) else {
            return self.substitute(board, k, "missing king");
        };
        if is_attacked(board, their_king, us) {
            return self.substitute(board, k, "king can be captured");
        }
        let Some(engine) = self.engine.as_mut() else {
            return self.substitute(board, k, "engine unavailable");
        };
        let (lines, best) = match engine.search(&board.to_fen(), self.depth, self.timeout) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("engine {} failed, using the built-in search for the rest of the game: {e}", self.path.display());
                self.engine = None;
                return self.substitute(board, k, "engine failure");
            }
        };
        let mut legal = Vec::new();
        pseudo_legal_moves(board, CastleRule::IgnoreCheck, &mut legal);
        let mut out: Vec<Scored> = Vec::new();
        for (text, score) in lines {
            let Ok(mv) = text.parse::<MoveRequest>() else {
                return self.substitute(board, k, "unparsable move");
            };
            if !legal.contains(&mv) {
                return self.substitute(board, k, "engine move not playable");
            }
            if !out.iter().any(|s| s.mv == mv) {
                out.push(Scored { mv, score });
            }
        }
        if out.is_empty() {
            match best.parse::<MoveRequest>() {
                Ok(mv) if legal.contains(&mv) => out.push(Scored { mv, score: 0 }),
                _ => return self.substitute(board, k, "engine rejected the position"),
            }
        }
        out.sort_by_key(|s| std::cmp::Reverse(s.score));
        out.truncate(k.max(1));
        Ok(out)
    }
}

impl Evaluator for UciEvaluator {
    fn name(&self) -> String {
        format!("uci:{}-d{}", self.path.display(), self.depth)
    }

    fn top_k(&mut self, board: &Board, k: usize) -> Result<Vec<Scored>, EvalError> {
        if let Some(hit) = self.memo.get(board, k) {
            return Ok(hit.clone());
        }
        let top = self.query(board, k)?;
        self.memo.put(board, k, top.clone());
        Ok(top)
    }

    fn new_game(&mut self) {
        self.memo.clear();
        self.fallback.new_game();
        if self.engine.is_none() {
            match Engine::start(&self.path) {
                Ok(e) => self.engine = Some(e),
                Err(e) => log::warn!("engine restart failed: {e}"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mock(mode: &str) -> PathBuf {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
        let script = dir.join(format!("mock_uci_{mode}.sh"));
        assert!(script.exists(), "{}", script.display());
        script
    }

    #[test]
    fn info_lines_parse() {
        let (i, (m, s)) = parse_info("info depth 10 seldepth 12 multipv 2 score cp -35 nodes 100 pv e7e5 g1f3").unwrap();
        assert_eq!((i, m.as_str(), s), (2, "e7e5", -35));
        let (_, (_, s)) = parse_info("info depth 3 score mate 2 pv d1h5").unwrap();
        assert_eq!(s, MATE - 4);
        assert!(parse_info("info string hello").is_none());
    }

    #[test]
    fn mock_engine_answers_and_is_deterministic() {
        let mut e = UciEvaluator::spawn(mock("ok"), 10).unwrap();
        let b = Board::initial();
        let best = e.best_move(&b).unwrap();
        let mut legal = Vec::new();
        pseudo_legal_moves(&b, CastleRule::IgnoreCheck, &mut legal);
        assert!(legal.contains(&best.mv));
        let top = e.top_k(&b, 5).unwrap();
        assert_eq!(top.len(), 5);
        assert!(top.windows(2).all(|w| w[0].score >= w[1].score));
        let distinct: std::collections::BTreeSet<_> = top.iter().map(|s| s.mv).collect();
        assert_eq!(distinct.len(), 5);
        e.new_game();
        assert_eq!(e.top_k(&b, 5).unwrap(), top);
        assert_eq!(e.substitutions(), 0);
    }

    #[test]
    fn capturable_king_is_answered_by_the_builtin_search() {
        let mut e = UciEvaluator::spawn(mock("ok"), 10).unwrap();
        let b = Board::from_fen("4k3/8/8/8/8/8/8/4RK2 w - - 0 1").unwrap();
        assert_eq!(e.best_move(&b).unwrap().mv, "e1e8".parse().unwrap());
        assert_eq!(e.substitutions(), 1);
        assert!(e.engine_alive());
    }

    #[test]
    fn crash_switches_to_builtin_for_the_game() {
        let mut e = UciEvaluator::spawn(mock("crash"), 10).unwrap();
        let b = Board::initial();
        let best = e.best_move(&b).unwrap();
        assert!(!e.engine_alive());
        assert_eq!(best, BuiltinEvaluator::new(3).best_move(&b).unwrap());
    }

    #[test]
    fn silent_engine_times_out() {
        let mut e = UciEvaluator::spawn(mock("hang"), 10).unwrap().with_timeout(Duration::from_millis(300));
        e.best_move(&Board::initial()).unwrap();
        assert!(!e.engine_alive());
    }

    #[test]
    fn unplayable_answer_falls_back() {
        let mut e = UciEvaluator::spawn(mock("garbage"), 10).unwrap();
        e.best_move(&Board::initial()).unwrap();
        assert_eq!(e.substitutions(), 1);
        assert!(e.engine_alive());
    }

    #[test]
    fn missing_binary_is_a_spawn_error() {
        let err = UciEvaluator::spawn(PathBuf::from("/nonexistent/engine"), 5).err().unwrap();
        assert!(matches!(err, EvalError::Spawn(_)));
    }
}
