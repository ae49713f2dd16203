use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TournamentError;
use crate::arbiter::DrawConfig;
use crate::bots::{BotKind, BotSpec};

/// When the threefold and fifty-move rules apply.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawPolicy {
    /// Only in games with a perfect-information player.
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Keep shadow information sets and write per-turn metrics.
    pub enabled: bool,
    /// Cap for each shadow set; past it a player's metrics are unavailable.
    pub size_cap: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { enabled: true, size_cap: 200_000 }
    }
}

fn default_games() -> u32 {
    10
}

fn default_parallelism() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("rbc-out")
}

fn default_max_fullmoves() -> u32 {
    DrawConfig::DEFAULT_MAX_FULLMOVES
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub roster: Vec<BotSpec>,
    #[serde(default = "default_games")]
    pub games_per_pairing: u32,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub draw_policy: DrawPolicy,
    #[serde(default = "default_max_fullmoves")]
    pub max_fullmoves: u32,
    #[serde(default)]
    pub metrics: MetricsConfig,
    /// Write one JSON-lines record per game under `records/`.
    #[serde(default = "default_true")]
    pub write_records: bool,
    /// Unordered pairs to play; every pair (self-pairs included) when empty.
    #[serde(default)]
    pub pairings: Vec<[String; 2]>,
}

impl TournamentConfig {
    pub fn new(roster: Vec<BotSpec>) -> TournamentConfig {
        TournamentConfig {
            roster,
            games_per_pairing: default_games(),
            master_seed: 0,
            parallelism: default_parallelism(),
            output_dir: default_output(),
            draw_policy: DrawPolicy::Auto,
            max_fullmoves: default_max_fullmoves(),
            metrics: MetricsConfig::default(),
            write_records: true,
            pairings: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<TournamentConfig, TournamentError> {
        let cfg: TournamentConfig = toml::from_str(text).map_err(|e| TournamentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<TournamentConfig, TournamentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TournamentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn spec(&self, name: &str) -> Option<&BotSpec> {
        self.roster.iter().find(|b| b.name == name)
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        let bad = |m: String| Err(TournamentError::Config(m));
        if self.roster.is_empty() {
            return bad("roster is empty".into());
        }
        if self.games_per_pairing == 0 || !self.games_per_pairing.is_multiple_of(2) {
            return bad(format!("games_per_pairing must be even and positive, got {}", self.games_per_pairing));
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.max_fullmoves == 0 {
            return bad("max_fullmoves must be at least 1".into());
        }
        if self.metrics.size_cap == 0 {
            return bad("metrics.size_cap must be positive".into());
        }
        let mut names = BTreeSet::new();
        for b in &self.roster {
            if !names.insert(b.name.as_str()) {
                return bad(format!("duplicate roster name {}", b.name));
            }
            b.validate().map_err(|e| TournamentError::Config(e.to_string()))?;
        }
        for [a, b] in &self.pairings {
            for n in [a, b] {
                if !names.contains(n.as_str()) {
                    return bad(format!("pairing names unknown bot {n}"));
                }
            }
        }
        Ok(())
    }

    /// Unordered pairs in play order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        if self.pairings.is_empty() {
            let n = self.roster.len();
            return (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        }
        let index = |name: &str| self.roster.iter().position(|b| b.name == name).expect("validated");
        self.pairings.iter().map(|[a, b]| (index(a), index(b))).collect()
    }

    pub fn draw_config(&self, white: &BotSpec, black: &BotSpec) -> DrawConfig {
        let on = match self.draw_policy {
            DrawPolicy::Always => true,
            DrawPolicy::Never => false,
            DrawPolicy::Auto => white.kind == BotKind::PerfectInfo || black.kind == BotKind::PerfectInfo,
        };
        let base = if on { DrawConfig::enabled() } else { DrawConfig::disabled() };
        base.with_max_fullmoves(self.max_fullmoves)
    }
}
