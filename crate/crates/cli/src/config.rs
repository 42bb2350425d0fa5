//! Experiment configuration: presets, `key = value` files and flag overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Case1L1,
    Case1Bandit,
    Case2L1,
    Case2Bandit,
    DesignDiagnostics,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Case1L1,
        Preset::Case1Bandit,
        Preset::Case2L1,
        Preset::Case2Bandit,
        Preset::DesignDiagnostics,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Case1L1 => "case1-l1",
            Preset::Case1Bandit => "case1-bandit",
            Preset::Case2L1 => "case2-l1",
            Preset::Case2Bandit => "case2-bandit",
            Preset::DesignDiagnostics => "design-diagnostics",
            Preset::Custom => "custom",
        }
    }

    /// What `sweep` runs for this preset.
    pub fn default_mode(self) -> Option<Mode> {
        match self {
            Preset::Case1L1 | Preset::Case2L1 => Some(Mode::Estimate),
            Preset::Case1Bandit | Preset::Case2Bandit => Some(Mode::Bandit),
            Preset::DesignDiagnostics => Some(Mode::Design),
            Preset::Custom => None,
        }
    }

    /// Whether arms are drawn from the sphere (and so change with the seed).
    pub fn sphere_arms(self) -> bool {
        matches!(self, Preset::Case2L1 | Preset::Case2Bandit)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown preset `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Design,
    Estimate,
    Bandit,
}

/// Keys accepted in config files (flags use the same names with `-`).
pub const KEYS: [&str; 16] = [
    "preset", "d", "s", "k", "sigma", "delta", "n", "n_grid", "reps", "seed", "r_max", "m",
    "scale", "out", "actions", "theta",
];

/// Ordered `(key, value)` pairs; later entries win.
pub type Settings = Vec<(String, String)>;

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parse `key = value` lines. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Settings> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {lineno}: expected `key = value`, got `{line}`"
            )));
        };
        let key = normalize_key(key);
        let value = value.trim();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "line {lineno}: unknown key `{key}`"
            )));
        }
        if value.is_empty() {
            return Err(CliError::Config(format!(
                "line {lineno}: missing value for `{key}`"
            )));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

pub fn parse_config_file(path: &Path) -> Result<Settings> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub mode: Mode,
    pub d: usize,
    pub s: usize,
    /// Arm count for sphere presets.
    pub k: usize,
    pub sigma: f64,
    pub delta: f64,
    /// Bandit horizon before `scale` is applied.
    pub horizon: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub base_seed: u64,
    /// `None` means the default bound computed from the instance.
    pub r_max: Option<f64>,
    pub m: f64,
    pub scale: usize,
    pub output_dir: PathBuf,
    pub actions_path: Option<PathBuf>,
    pub theta_path: Option<PathBuf>,
}

fn default_grid(n: usize) -> Vec<usize> {
    if n < 10 {
        return vec![n];
    }
    (1..=10).map(|j| j * n / 10).collect()
}

impl ExperimentConfig {
    /// Defaults for a preset, before any overrides.
    pub fn preset_defaults(preset: Preset, mode: Mode) -> Self {
        let (d, horizon) = match preset {
            Preset::Case1L1 | Preset::DesignDiagnostics | Preset::Custom => (10, 10_000),
            Preset::Case1Bandit => (10, 400_000),
            Preset::Case2L1 | Preset::Case2Bandit => (30, 10_000),
        };
        Self {
            preset,
            mode,
            d,
            s: 2,
            k: 3 * d,
            sigma: 0.1,
            delta: 0.05,
            horizon,
            n_grid: default_grid(10_000),
            reps: if preset == Preset::DesignDiagnostics {
                1
            } else {
                30
            },
            base_seed: 0,
            r_max: None,
            m: 1.0,
            scale: 1,
            output_dir: PathBuf::from("results"),
            actions_path: None,
            theta_path: None,
        }
    }

    /// Apply preset defaults, then `settings` in order. `mode` comes from the
    /// subcommand; `None` means the preset's own.
    pub fn resolve(mode: Option<Mode>, settings: &[(String, String)]) -> Result<Self> {
        for (key, _) in settings {
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("unknown key `{key}`")));
            }
        }
        let last = |key: &str| {
            settings
                .iter()
                .rev()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let preset = match last("preset") {
            Some(p) => p.parse().map_err(CliError::Config)?,
            None if mode == Some(Mode::Design) => Preset::DesignDiagnostics,
            None => return Err(CliError::Config("no preset given (use --preset)".into())),
        };
        let mode = match mode.or(preset.default_mode()) {
            Some(m) => m,
            None => {
                return Err(CliError::Config(format!(
                    "preset `{preset}` needs an explicit command: design, estimate or bandit"
                )))
            }
        };
        if preset == Preset::DesignDiagnostics && mode != Mode::Design {
            return Err(CliError::Config(
                "preset `design-diagnostics` only runs with `design`".into(),
            ));
        }

        let mut cfg = Self::preset_defaults(preset, mode);
        let mut k_set = false;
        let mut grid_set = false;
        for (key, value) in settings {
            let bad = |what: &str| {
                CliError::Config(format!("invalid value `{value}` for `{key}`: {what}"))
            };
            let uint = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad("expected a nonnegative integer"))
            };
            let real = || value.parse::<f64>().map_err(|_| bad("expected a number"));
            match key.as_str() {
                "preset" => {}
                "d" => {
                    if preset == Preset::Custom {
                        return Err(CliError::Config(
                            "`d` is read from the actions file for preset `custom`".into(),
                        ));
                    }
                    cfg.d = uint()?;
                }
                "s" => cfg.s = uint()?,
                "k" => {
                    if !preset.sphere_arms() {
                        return Err(CliError::Config(format!(
                            "`k` does not apply to preset `{preset}`"
                        )));
                    }
                    cfg.k = uint()?;
                    k_set = true;
                }
                "sigma" => cfg.sigma = real()?,
                "delta" => cfg.delta = real()?,
                "n" => {
                    let n = uint()?;
                    cfg.horizon = n;
                    if !grid_set {
                        cfg.n_grid = default_grid(n);
                    }
                }
                "n_grid" => {
                    let mut grid = value
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad("expected a comma-separated list of integers"))?;
                    grid.sort_unstable();
                    grid.dedup();
                    cfg.n_grid = grid;
                    grid_set = true;
                }
                "reps" => cfg.reps = uint()?,
                "seed" => {
                    cfg.base_seed = value
                        .parse()
                        .map_err(|_| bad("expected a nonnegative integer"))?
                }
                "r_max" => cfg.r_max = if value == "auto" { None } else { Some(real()?) },
                "m" => cfg.m = real()?,
                "scale" => cfg.scale = uint()?,
                "out" => cfg.output_dir = PathBuf::from(value),
                "actions" | "theta" => {
                    if preset != Preset::Custom {
                        return Err(CliError::Config(format!(
                            "`{key}` only applies to preset `custom`"
                        )));
                    }
                    let path = Some(PathBuf::from(value));
                    if key == "actions" {
                        cfg.actions_path = path;
                    } else {
                        cfg.theta_path = path;
                    }
                }
                _ => unreachable!("keys checked above"),
            }
        }
        if preset.sphere_arms() && !k_set {
            cfg.k = 3 * cfg.d;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if self.preset != Preset::Custom && self.d < 2 {
            return fail(format!("d must be at least 2, got {}", self.d));
        }
        if self.s == 0 {
            return fail("s must be at least 1".into());
        }
        if self.preset.sphere_arms() && self.k < self.d {
            return fail(format!(
                "k = {} arms cannot span dimension {}",
                self.k, self.d
            ));
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return fail(format!("r_max must be positive, got {r}"));
            }
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return fail(format!("m must be positive, got {}", self.m));
        }
        if self.scale == 0 {
            return fail("scale must be at least 1".into());
        }
        if self.mode == Mode::Bandit && self.horizon == 0 {
            return fail("n must be at least 1".into());
        }
        if self.mode == Mode::Estimate && (self.n_grid.is_empty() || self.n_grid[0] == 0) {
            return fail("the n grid must hold positive sample sizes".into());
        }
        if self.preset == Preset::Custom {
            if self.actions_path.is_none() {
                return fail("preset `custom` needs an actions file".into());
            }
            if self.mode != Mode::Design && self.theta_path.is_none() {
                return fail("preset `custom` needs a theta file".into());
            }
        }
        Ok(())
    }

    /// Horizon after dividing by `scale`.
    pub fn effective_horizon(&self) -> usize {
        (self.horizon / self.scale).max(1)
    }

    pub fn seed_for_rep(&self, rep: usize) -> u64 {
        self.base_seed.wrapping_add(rep as u64)
    }
}
