//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{ChannelEnv, Fading};
use crate::error::{Error, Result};
use crate::topology::cell_side_km;

/// Parameter swept along the x-axis of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    L,
    N,
    Tau,
    H,
    GammaR,
    BetaDb,
}

impl SweepVar {
    pub fn key(self) -> &'static str {
        match self {
            SweepVar::L => "l",
            SweepVar::N => "n",
            SweepVar::Tau => "tau",
            SweepVar::H => "h",
            SweepVar::GammaR => "gamma_r",
            SweepVar::BetaDb => "beta_db",
        }
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "l" | "l_km" => SweepVar::L,
            "n" => SweepVar::N,
            "tau" => SweepVar::Tau,
            "h" => SweepVar::H,
            "gamma_r" => SweepVar::GammaR,
            "beta_db" => SweepVar::BetaDb,
            _ => return Err(Error::Config(format!("cannot sweep over `{s}`"))),
        })
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    /// Empty means "the configured value only".
    pub values: Vec<f64>,
}

/// Every knob of one experiment. Defaults are the reference parameter set:
/// 1000 Zipf files, 1.2 MHz links, 23 dBm, -174 dBm/Hz, α = 2.6, -70 dB
/// residual SI, 4 dB shadowing, 5-50 MB files, 1000 drops.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub h: usize,
    pub m: usize,
    pub gamma_r: f64,
    pub beta_db: f64,
    pub tau: usize,
    pub w_hz: f64,
    pub noise_dbm_hz: f64,
    pub alpha: f64,
    pub pt_dbm: f64,
    pub a_km: f64,
    pub l_km: f64,
    pub shadow_db: f64,
    pub file_min_mb: f64,
    pub file_max_mb: f64,
    pub drops: usize,
    pub seed: Option<u64>,
    pub fading_samples: usize,
    pub fading: Fading,
    pub sweep: Sweep,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 500,
            h: 1,
            m: 1000,
            gamma_r: 1.0,
            beta_db: -70.0,
            tau: 1,
            w_hz: 1.2e6,
            noise_dbm_hz: -174.0,
            alpha: 2.6,
            pt_dbm: 23.0,
            a_km: 1.0,
            l_km: 0.2,
            shadow_db: 4.0,
            file_min_mb: 5.0,
            file_max_mb: 50.0,
            drops: 1000,
            seed: None,
            fading_samples: 200,
            fading: Fading::Rayleigh,
            sweep: Sweep {
                var: SweepVar::L,
                values: Vec::new(),
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_count(key: &str, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::Config(format!(
            "`{key}` must be a non-negative integer, got {value}"
        )))
    }
}

impl ScenarioConfig {
    /// Sets one parameter by its configuration key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "n" => self.n = parse(key, value)?,
            "h" => self.h = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "gamma_r" => self.gamma_r = parse(key, value)?,
            "beta_db" => self.beta_db = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "W_hz" => self.w_hz = parse(key, value)?,
            "noise_dbm_hz" => self.noise_dbm_hz = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "pt_dbm" => self.pt_dbm = parse(key, value)?,
            "a_km" => self.a_km = parse(key, value)?,
            "l_km" | "l" => self.l_km = parse(key, value)?,
            "shadow_db" => self.shadow_db = parse(key, value)?,
            "file_min_mb" => self.file_min_mb = parse(key, value)?,
            "file_max_mb" => self.file_max_mb = parse(key, value)?,
            "drops" => self.drops = parse(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            "fading_samples" => self.fading_samples = parse(key, value)?,
            "fading" => {
                self.fading = match value {
                    "rayleigh" => Fading::Rayleigh,
                    "none" | "deterministic" => Fading::Deterministic,
                    _ => return Err(Error::Config(format!("unknown fading model `{value}`"))),
                }
            }
            "sweep_var" => self.sweep.var = value.parse()?,
            "sweep_values" => {
                self.sweep.values = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| parse(key, v))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got `{line}`", no + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {}", no + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e))))
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(key, value)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (`seed = N` or --seed)".into()))
    }

    /// Sweep grid; the current value of the swept parameter when no grid is set.
    pub fn grid(&self) -> Vec<f64> {
        if !self.sweep.values.is_empty() {
            return self.sweep.values.clone();
        }
        vec![match self.sweep.var {
            SweepVar::L => self.l_km,
            SweepVar::N => self.n as f64,
            SweepVar::Tau => self.tau as f64,
            SweepVar::H => self.h as f64,
            SweepVar::GammaR => self.gamma_r,
            SweepVar::BetaDb => self.beta_db,
        }]
    }

    /// Copy of the configuration at one sweep point.
    pub fn at(&self, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = self.clone();
        match self.sweep.var {
            SweepVar::L => cfg.l_km = value,
            SweepVar::N => cfg.n = parse_count("n", value)?,
            SweepVar::Tau => cfg.tau = parse_count("tau", value)?,
            SweepVar::H => cfg.h = parse_count("h", value)?,
            SweepVar::GammaR => cfg.gamma_r = value,
            SweepVar::BetaDb => cfg.beta_db = value,
        }
        Ok(cfg)
    }

    /// Range checks on a single point, without requiring a seed.
    pub fn validate_point(&self) -> Result<()> {
        let side = cell_side_km(self.a_km);
        let checks: [(bool, String); 13] = [
            (self.m >= 1, format!("m must be >= 1, got {}", self.m)),
            (
                self.h >= 1 && self.h <= self.m,
                format!("h must be in 1..=m, got {}", self.h),
            ),
            (
                self.gamma_r >= 0.0,
                format!("gamma_r must be >= 0, got {}", self.gamma_r),
            ),
            (
                self.beta_db <= 0.0,
                format!("beta_db must be <= 0 dB, got {}", self.beta_db),
            ),
            (self.tau >= 1, format!("tau must be >= 1, got {}", self.tau)),
            (
                self.w_hz > 0.0,
                format!("W_hz must be positive, got {}", self.w_hz),
            ),
            (
                self.alpha >= 2.0,
                format!("alpha must be >= 2, got {}", self.alpha),
            ),
            (
                self.a_km > 0.0,
                format!("a_km must be positive, got {}", self.a_km),
            ),
            (
                self.l_km > 0.0 && self.l_km <= side * (1.0 + 1e-12),
                format!("l_km must lie in (0, {side}], got {}", self.l_km),
            ),
            (
                self.shadow_db >= 0.0,
                format!("shadow_db must be >= 0, got {}", self.shadow_db),
            ),
            (
                self.file_min_mb > 0.0 && self.file_min_mb <= self.file_max_mb,
                format!(
                    "file size range [{}, {}] MB is empty",
                    self.file_min_mb, self.file_max_mb
                ),
            ),
            (self.drops >= 1, "drops must be >= 1".to_string()),
            (
                self.fading_samples >= 1,
                "fading_samples must be >= 1".to_string(),
            ),
        ];
        match checks.into_iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config(msg)),
            None => Ok(()),
        }
    }

    /// Checks the seed and every sweep point.
    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        for v in self.grid() {
            self.at(v)?.validate_point()?;
        }
        Ok(())
    }

    pub fn channel_env(&self) -> Result<ChannelEnv> {
        ChannelEnv::from_link_budget(
            self.pt_dbm,
            self.noise_dbm_hz,
            self.w_hz,
            self.alpha,
            self.beta_db,
            self.shadow_db,
            self.fading,
        )
        .map_err(|e| Error::Config(strip_prefix(&e)))
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) | Error::InvalidArgument(msg) => msg.clone(),
        other => other.to_string(),
    }
}
