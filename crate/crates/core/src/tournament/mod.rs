//! Round-robin driver: plays every pairing on a thread pool, derives
//! per-game seeds from the master seed and writes records and CSVs.

mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{DrawPolicy, MetricsConfig, TournamentConfig};

use crate::arbiter::{play_game, GameObserver, GameRecord, Seat, Strategy, Termination};
use crate::bots::{BotError, BotKind, BotSpec};
use crate::metrics::{
    aggregate, pass_sweep_rows, write_curves_csv, write_pass_sweep_csv, write_games_csv, write_series_csv, write_summary_csv,
    AggregateReport, Fanout, PassSweepRow, GameEntry, MetricsObserver, SoundnessObserver,
};

#[derive(Debug, Error)]
pub enum TournamentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Bot(#[from] BotError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TournamentError + '_ {
    move |source| TournamentError::Io { path: path.to_path_buf(), source }
}

/// Seed of one game, independent of scheduling order.
pub fn game_seed(master: u64, white: &str, black: &str, game: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for name in [white, black] {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
    }
    h.update(game.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// One game to play.
#[derive(Clone, Debug)]
pub struct GameJob {
    /// Position in the tournament; fixes output order and file names.
    pub index: usize,
    pub pairing: String,
    /// Game number within its (white, black) cell.
    pub game: u32,
    pub white: BotSpec,
    pub black: BotSpec,
    pub seed: u64,
}

pub fn pairing_label(a: &str, b: &str) -> String {
    format!("{a} vs {b}")
}

/// Every game of the tournament in a fixed order. Each unordered pair plays
/// half its games with either bot as White.
pub fn schedule(cfg: &TournamentConfig) -> Vec<GameJob> {
    let mut jobs = Vec::new();
    let half = cfg.games_per_pairing / 2;
    for (i, j) in cfg.pairs() {
        let (a, b) = (&cfg.roster[i], &cfg.roster[j]);
        let pairing = pairing_label(&a.name, &b.name);
        // a self-pair has a single color cell holding all its games
        let cells = if i == j { vec![(a, b, 0..cfg.games_per_pairing)] } else { vec![(a, b, 0..half), (b, a, 0..half)] };
        for (white, black, games) in cells {
            for game in games {
                jobs.push(GameJob {
                    index: jobs.len(),
                    pairing: pairing.clone(),
                    game,
                    white: white.clone(),
                    black: black.clone(),
                    seed: game_seed(cfg.master_seed, &white.name, &black.name, game),
                });
            }
        }
    }
    jobs
}

/// What one game produced.
#[derive(Clone, Debug)]
pub struct GameOutput {
    pub job_index: usize,
    pub entry: GameEntry,
    pub record: GameRecord,
    pub soundness: SoundnessObserver,
}

fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::KingCapture => "king_capture",
        Termination::Forfeit { .. } => "forfeit",
        Termination::Threefold => "threefold",
        Termination::FiftyMove => "fifty_move",
        Termination::TurnLimit => "turn_limit",
    }
}

fn seat<'a>(spec: &BotSpec, s: &'a mut dyn Strategy) -> Seat<'a> {
    if spec.needs_ground_truth() {
        Seat::with_ground_truth(s)
    } else {
        Seat::new(s)
    }
}

/// Plays one scheduled game with the tournament's observers attached.
pub fn play_job(cfg: &TournamentConfig, job: &GameJob) -> Result<GameOutput, TournamentError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(job.seed);
    let mut white = job.white.build(seeds.next_u64())?;
    let mut black = job.black.build(seeds.next_u64())?;
    let draw = cfg.draw_config(&job.white, &job.black);
    let mut soundness = SoundnessObserver::default();
    let mut metrics = cfg.metrics.enabled.then(|| {
        MetricsObserver::new([job.white.observation_model(), job.black.observation_model()], cfg.metrics.size_cap)
    });
    let record = {
        let mut observers: Vec<&mut dyn GameObserver> = vec![&mut soundness];
        if let Some(m) = metrics.as_mut() {
            observers.push(m);
        }
        let mut fan = Fanout(observers);
        play_game(seat(&job.white, white.as_mut()), seat(&job.black, black.as_mut()), draw, job.seed, &mut fan)
            .map_err(|e| TournamentError::Config(e.to_string()))?
    };
    let entry = GameEntry {
        pairing: job.pairing.clone(),
        game: job.game,
        white: job.white.name.clone(),
        black: job.black.name.clone(),
        seed: job.seed,
        outcome: record.outcome,
        termination: termination_name(&record.termination).to_string(),
        plies: record.entries.len() as u32,
        ledger: metrics.map(MetricsObserver::into_ledger),
    };
    Ok(GameOutput { job_index: job.index, entry, record, soundness })
}

#[derive(Clone, Debug)]
pub struct GameFailure {
    pub pairing: String,
    pub white: String,
    pub black: String,
    pub game: u32,
    /// The failure came from an external engine.
    pub engine: bool,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct TournamentResult {
    pub games: Vec<GameOutput>,
    /// Games that could not be played.
    pub errors: Vec<GameFailure>,
    pub report: AggregateReport,
}

impl TournamentResult {
    pub fn entries(&self) -> Vec<GameEntry> {
        self.games.iter().map(|g| g.entry.clone()).collect()
    }

    pub fn soundness(&self) -> SoundnessObserver {
        self.games.iter().fold(SoundnessObserver::default(), |mut acc, g| {
            acc.checks += g.soundness.checks;
            acc.violations += g.soundness.violations;
            acc.skipped += g.soundness.skipped;
            acc
        })
    }

    /// Times a metrics shadow set lost the true board; always zero unless there is a bug.
    pub fn shadow_violations(&self) -> u64 {
        self.games.iter().filter_map(|g| g.entry.ledger.as_ref()).map(|l| u64::from(l.violations)).sum()
    }

    pub fn forfeits(&self) -> usize {
        self.games.iter().filter(|g| g.entry.termination == "forfeit").count()
    }
}

/// Plays the given jobs on a pool of `width` threads; results come back in
/// job order whatever the scheduling.
pub fn play_jobs(cfg: &TournamentConfig, jobs: &[GameJob]) -> TournamentResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .expect("thread pool");
    let results: Vec<Result<GameOutput, TournamentError>> =
        pool.install(|| jobs.par_iter().map(|j| play_job(cfg, j)).collect());
    let mut out = TournamentResult::default();
    for (r, job) in results.into_iter().zip(jobs) {
        match r {
            Ok(g) => out.games.push(g),
            Err(e) => {
                log::error!("{} game {}: {e}", job.pairing, job.game);
                out.errors.push(GameFailure {
                    pairing: job.pairing.clone(),
                    white: job.white.name.clone(),
                    black: job.black.name.clone(),
                    game: job.game,
                    engine: matches!(e, TournamentError::Bot(BotError::Evaluator { .. })),
                    message: e.to_string(),
                });
            }
        }
    }
    out.report = aggregate(&out.entries());
    out
}

/// Plays the whole tournament without touching the disk.
pub fn run_in_memory(cfg: &TournamentConfig) -> Result<TournamentResult, TournamentError> {
    cfg.validate()?;
    Ok(play_jobs(cfg, &schedule(cfg)))
}

/// Plays the tournament and writes every artifact under `output_dir`.
pub fn run(cfg: &TournamentConfig) -> Result<TournamentResult, TournamentError> {
    let result = run_in_memory(cfg)?;
    write_artifacts(cfg, &result)?;
    Ok(result)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, TournamentError> {
    Ok(BufWriter::new(fs::File::create(path).map_err(io_err(path))?))
}

fn safe(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

pub fn write_artifacts(cfg: &TournamentConfig, result: &TournamentResult) -> Result<(), TournamentError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let ledgers = dir.join("ledgers");
    fs::create_dir_all(&ledgers).map_err(io_err(&ledgers))?;
    let records = dir.join("records");
    if cfg.write_records {
        fs::create_dir_all(&records).map_err(io_err(&records))?;
    }
    for g in &result.games {
        let stem = format!("{:05}_{}_vs_{}_{}", g.job_index, safe(&g.entry.white), safe(&g.entry.black), g.entry.game);
        if cfg.write_records {
            let p = records.join(format!("{stem}.jsonl"));
            let mut f = create(&p)?;
            g.record.write_jsonl(&mut f).map_err(|e| TournamentError::Config(e.to_string()))?;
            f.flush().map_err(io_err(&p))?;
        }
        let p = ledgers.join(format!("{stem}.json"));
        let mut f = create(&p)?;
        serde_json::to_writer(&mut f, &g.entry).map_err(|source| TournamentError::Json { path: p.clone(), source })?;
        f.flush().map_err(io_err(&p))?;
    }
    let entries = result.entries();
    write_csvs(dir, &entries, &result.report)?;
    let p = dir.join("config.toml");
    fs::write(&p, cfg.to_toml()).map_err(io_err(&p))?;
    Ok(())
}

fn write_csvs(dir: &Path, entries: &[GameEntry], report: &AggregateReport) -> Result<(), TournamentError> {
    write_series_csv(entries, create(&dir.join("series.csv"))?)?;
    write_games_csv(entries, create(&dir.join("games.csv"))?)?;
    write_summary_csv(report, create(&dir.join("summary.csv"))?)?;
    write_curves_csv(report, create(&dir.join("curves.csv"))?)?;
    Ok(())
}

/// Rebuilds the CSVs of an earlier run from its stored ledgers.
pub fn report(dir: &Path) -> Result<AggregateReport, TournamentError> {
    let ledgers = dir.join("ledgers");
    let mut paths: Vec<PathBuf> = fs::read_dir(&ledgers)
        .map_err(io_err(&ledgers))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut entries = Vec::with_capacity(paths.len());
    for p in paths {
        let text = fs::read_to_string(&p).map_err(io_err(&p))?;
        entries.push(serde_json::from_str(&text).map_err(|source| TournamentError::Json { path: p.clone(), source })?);
    }
    let report = aggregate(&entries);
    write_csvs(dir, &entries, &report)?;
    Ok(report)
}

/// The tracking bot's pre-sense sizes against random opponents passing
/// with each probability.
#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<PassSweepRow>,
    pub runs: Vec<(f64, TournamentResult)>,
}

/// The bot whose information set a sweep measures: the first MHT bot in
/// the roster, or a default one.
pub fn sweep_subject(cfg: &TournamentConfig) -> BotSpec {
    cfg.roster.iter().find(|b| b.kind == BotKind::Mht).cloned().unwrap_or_else(BotSpec::mht)
}

pub fn pass_sweep_in_memory(cfg: &TournamentConfig, probs: &[f64]) -> Result<SweepResult, TournamentError> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(TournamentError::Config(format!("pass probability {p} outside [0, 1]")));
    }
    let subject = sweep_subject(cfg);
    let mut out = SweepResult::default();
    for &p in probs {
        let mut c = cfg.clone();
        let mut opponent = BotSpec::random(p);
        opponent.evaluator = subject.evaluator.clone();
        c.pairings = vec![[subject.name.clone(), opponent.name.clone()]];
        c.roster = vec![subject.clone(), opponent];
        c.metrics.enabled = true;
        let result = run_in_memory(&c)?;
        out.rows.extend(pass_sweep_rows(&subject.name, p, &result.entries()));
        out.runs.push((p, result));
    }
    Ok(out)
}

/// Runs the sweep and writes `pass_sweep.csv` plus each probability's artifacts.
pub fn pass_sweep(cfg: &TournamentConfig, probs: &[f64]) -> Result<SweepResult, TournamentError> {
    let sweep = pass_sweep_in_memory(cfg, probs)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (p, result) in &sweep.runs {
        let mut c = cfg.clone();
        c.output_dir = dir.join(format!("pass_{:03}", (p * 100.0).round() as u32));
        write_artifacts(&c, result)?;
    }
    write_pass_sweep_csv(&sweep.rows, create(&dir.join("pass_sweep.csv"))?)?;
    Ok(sweep)
}
