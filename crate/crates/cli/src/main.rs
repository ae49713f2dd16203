use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rbc_core::arbiter::{play_game, NoObserver, Seat, Termination};
use rbc_core::bots::{BotError, BotSpec, EvaluatorSpec, ENGINE_ENV};
use rbc_core::tournament::{self, TournamentConfig, TournamentError, TournamentResult};

const EXIT_CONFIG: u8 = 2;
const EXIT_ENGINE: u8 = 3;
const EXIT_FORFEIT: u8 = 4;

#[derive(Parser)]
#[command(name = "rbc", version, about = "Reconnaissance blind chess games, tournaments and metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print its record as JSON lines.
    Play(PlayArgs),
    /// Run a round robin described by a TOML file.
    Tournament {
        config: PathBuf,
        #[command(flatten)]
        over: Overrides,
    },
    /// Play the tracking bot against random bots with several pass probabilities.
    Sweep {
        config: PathBuf,
        /// Comma separated pass probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,1")]
        probs: Vec<f64>,
        #[command(flatten)]
        over: Overrides,
    },
    /// Rebuild the CSVs of an earlier run from its ledgers.
    Report { dir: PathBuf },
}

#[derive(clap::Args)]
struct PlayArgs {
    /// random[P], naive, mht, predictor or perfect (P is the pass percentage, default 25)
    #[arg(long)]
    white: String,
    #[arg(long)]
    black: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search depth of the evaluator.
    #[arg(long, default_value_t = 3)]
    depth: u32,
    /// External UCI engine used instead of the built-in search.
    #[arg(long, env = ENGINE_ENV)]
    engine: Option<PathBuf>,
    /// Apply the threefold and fifty-move rules.
    #[arg(long)]
    draws: bool,
    #[arg(long, default_value_t = 200)]
    max_fullmoves: u32,
    /// Write the record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Overrides {
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    games: Option<u32>,
}

impl Overrides {
    fn apply(self, cfg: &mut TournamentConfig) {
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        if let Some(d) = self.output_dir {
            cfg.output_dir = d;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(g) = self.games {
            cfg.games_per_pairing = g;
        }
    }
}

fn parse_bot(text: &str) -> Result<BotSpec, String> {
    let lower = text.to_ascii_lowercase();
    Ok(match lower.as_str() {
        "naive" => BotSpec::naive(),
        "mht" => BotSpec::mht(),
        "predictor" => BotSpec::predictor(),
        "perfect" | "perfect_info" => BotSpec::perfect_info(),
        _ => {
            let Some(rest) = lower.strip_prefix("random") else {
                return Err(format!("unknown bot {text}"));
            };
            let pct: u32 = if rest.is_empty() { 25 } else { rest.parse().map_err(|_| format!("bad pass percentage in {text}"))? };
            BotSpec::random(pct as f64 / 100.0)
        }
    })
}

enum Failure {
    Config(String),
    Engine(String),
}

impl From<TournamentError> for Failure {
    fn from(e: TournamentError) -> Failure {
        match e {
            TournamentError::Bot(BotError::Evaluator { .. }) => Failure::Engine(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

fn play(args: PlayArgs) -> Result<u8, Failure> {
    let PlayArgs { white, black, seed, depth, engine, draws, max_fullmoves, out } = args;
    let evaluator = match engine {
        Some(path) => EvaluatorSpec::External { path, depth },
        None => EvaluatorSpec::Builtin { depth },
    };
    let mut specs = [parse_bot(&white).map_err(Failure::Config)?, parse_bot(&black).map_err(Failure::Config)?];
    if specs[0].name == specs[1].name {
        specs[1].name.push_str("-2");
    }
    let mut bots = Vec::new();
    for (i, spec) in specs.iter_mut().enumerate() {
        *spec = spec.clone().with_evaluator(evaluator.clone());
        bots.push(spec.build(seed.wrapping_add(i as u64)).map_err(|e| Failure::from(TournamentError::Bot(e)))?);
    }
    let [w, b] = &mut bots[..] else { unreachable!() };
    let seat = |spec: &BotSpec, s| if spec.needs_ground_truth() { Seat::with_ground_truth(s) } else { Seat::new(s) };
    let base = if draws { rbc_core::arbiter::DrawConfig::enabled() } else { rbc_core::arbiter::DrawConfig::disabled() };
    let record = play_game(
        seat(&specs[0], w.as_mut()),
        seat(&specs[1], b.as_mut()),
        base.with_max_fullmoves(max_fullmoves),
        seed,
        &mut NoObserver,
    )
    .map_err(|e| Failure::Config(e.to_string()))?;
    let written = match out {
        Some(p) => File::create(&p).map_err(|e| e.to_string()).and_then(|f| {
            let mut f = BufWriter::new(f);
            record.write_jsonl(&mut f).map_err(|e| e.to_string())?;
            f.flush().map_err(|e| e.to_string())
        }),
        None => record.write_jsonl(std::io::stdout().lock()).map_err(|e| e.to_string()),
    };
    written.map_err(Failure::Config)?;
    eprintln!("{:?} by {:?} after {} plies", record.outcome, record.termination, record.entries.len());
    Ok(if matches!(record.termination, Termination::Forfeit { .. }) { EXIT_FORFEIT } else { 0 })
}

fn tournament_status(result: &TournamentResult) -> u8 {
    for f in &result.errors {
        eprintln!("game {} of {} ({} as White) failed: {}", f.game, f.pairing, f.white, f.message);
    }
    let s = result.soundness();
    eprintln!(
        "{} games, {} failed, {} forfeits, {} soundness checks with {} violations, {} shadow violations",
        result.games.len(),
        result.errors.len(),
        result.forfeits(),
        s.checks,
        s.violations,
        result.shadow_violations()
    );
    if result.errors.iter().any(|f| f.engine) {
        EXIT_ENGINE
    } else if !result.errors.is_empty() {
        EXIT_CONFIG
    } else if result.forfeits() > 0 {
        EXIT_FORFEIT
    } else {
        0
    }
}

fn load(path: &Path, over: Overrides) -> Result<TournamentConfig, Failure> {
    let mut cfg = TournamentConfig::load(path)?;
    over.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Play(args) => play(args),
        Command::Tournament { config, over } => {
            let cfg = load(&config, over)?;
            let result = tournament::run(&cfg)?;
            eprintln!("wrote {}", cfg.output_dir.display());
            Ok(tournament_status(&result))
        }
        Command::Sweep { config, probs, over } => {
            let cfg = load(&config, over)?;
            let sweep = tournament::pass_sweep(&cfg, &probs)?;
            eprintln!("wrote {}", cfg.output_dir.join("pass_sweep.csv").display());
            Ok(sweep.runs.iter().map(|(_, r)| tournament_status(r)).max().unwrap_or(0))
        }
        Command::Report { dir } => {
            let report = tournament::report(&dir)?;
            eprintln!("{} seat rows, {} curve points", report.seats.len(), report.curves.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Engine(m)) => {
            eprintln!("engine error: {m}");
            ExitCode::from(EXIT_ENGINE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bot_names() {
        assert_eq!(parse_bot("MHT").unwrap().name, "MHTBot");
        assert_eq!(parse_bot("random").unwrap().pass_prob, 0.25);
        assert_eq!(parse_bot("random50").unwrap().name, "RandomBot50");
        assert_eq!(parse_bot("random0").unwrap().pass_prob, 0.0);
        assert!(parse_bot("randomx").is_err());
        assert!(parse_bot("stockfish").is_err());
    }

    #[test]
    fn cli_parses() {
        Cli::try_parse_from(["rbc", "play", "--white", "mht", "--black", "random"]).unwrap();
        Cli::try_parse_from(["rbc", "sweep", "c.toml", "--probs", "0,0.5"]).unwrap();
        assert!(Cli::try_parse_from(["rbc", "play"]).is_err());
    }
}
