//! Scenario configuration: a flat `key = value` file (TOML syntax, `#`
//! comments) where every key is optional.
//!
//! | key          | default          | meaning                                              |
//! |--------------|------------------|------------------------------------------------------|
//! | `system`     | `"stable-zeros"` | `stable-zeros`, `no-zeros`, `unstable-zero`, `from-file` |
//! | `N`          | `10`             | past window length                                   |
//! | `L`          | `"auto"`         | delay; `auto` uses the inherent delay of the model   |
//! | `data_length`| `512`            | offline samples; `T + 1 = data_length - N - L`       |
//! | `seed`       | `1`              | master seed                                          |
//! | `horizon`    | `300`            | number of online estimates                           |
//! | `init_guess` | `"random"`       | `zero` or `random`                                   |
//! | `init_scale` | `1.0`            | standard deviation of a random initial guess         |
//! | `rank_tol`   | `1e-8`           | rank decisions                                       |
//! | `y_trunc`    | `1e-4`           | truncation of `Y`                                    |
//! | `ls_trunc`   | `1e-3`           | truncation of `U_p V_null`                           |
//! | `pe_tol`     | `rank_tol`       | rank cutoff of the excitation check                  |
//! | `data_file`  | none             | offline CSV (`from-file` only)                       |
//! | `online_file`| none             | online CSV with true inputs (`from-file` only)       |
//! | `state_dim`  | none             | state dimension `n` (`from-file` only)               |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uirecon_core::{ExampleSystem, ToleranceSet};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SystemChoice {
    Example(ExampleSystem),
    FromFile,
}

impl fmt::Display for SystemChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemChoice::Example(sys) => write!(f, "{sys}"),
            SystemChoice::FromFile => f.write_str("from-file"),
        }
    }
}

impl FromStr for SystemChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        if key == "fromfile" {
            return Ok(SystemChoice::FromFile);
        }
        s.parse::<ExampleSystem>()
            .map(SystemChoice::Example)
            .map_err(|_| {
                CliError::Config(format!(
                    "unknown system '{s}' (expected stable-zeros, no-zeros, unstable-zero or from-file)"
                ))
            })
    }
}

impl From<SystemChoice> for String {
    fn from(s: SystemChoice) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for SystemChoice {
    type Error = CliError;
    fn try_from(s: String) -> Result<Self, CliError> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DelayChoice {
    Auto,
    Fixed(usize),
}

impl fmt::Display for DelayChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelayChoice::Auto => f.write_str("auto"),
            DelayChoice::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for DelayChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DelayChoice::Auto);
        }
        s.parse().map(DelayChoice::Fixed).map_err(|_| {
            CliError::Config(format!(
                "L must be a nonnegative integer or 'auto', got '{s}'"
            ))
        })
    }
}

impl From<DelayChoice> for String {
    fn from(d: DelayChoice) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DelayChoice {
    type Error = CliError;
    fn try_from(s: String) -> Result<Self, CliError> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitGuess {
    Zero,
    SeededRandom { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub system: SystemChoice,
    #[serde(rename = "N")]
    pub past: usize,
    #[serde(rename = "L")]
    pub delay: DelayChoice,
    pub data_length: usize,
    pub seed: u64,
    pub tolerances: ToleranceSetEcho,
    pub pe_tol: f64,
    pub horizon: usize,
    pub init_guess: InitGuess,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub online_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_dim: Option<usize>,
}

/// Serializable mirror of [`ToleranceSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceSetEcho {
    pub rank_tol: f64,
    pub y_trunc: f64,
    pub ls_trunc: f64,
}

impl From<ToleranceSet> for ToleranceSetEcho {
    fn from(t: ToleranceSet) -> Self {
        Self {
            rank_tol: t.rank_tol,
            y_trunc: t.y_trunc,
            ls_trunc: t.ls_trunc,
        }
    }
}

impl ToleranceSetEcho {
    pub fn to_core(self) -> ToleranceSet {
        ToleranceSet {
            rank_tol: self.rank_tol,
            y_trunc: self.y_trunc,
            ls_trunc: self.ls_trunc,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let tol = ToleranceSet::default();
        Self {
            system: SystemChoice::Example(ExampleSystem::StableZeros),
            past: 10,
            delay: DelayChoice::Auto,
            data_length: 512,
            seed: 1,
            tolerances: tol.into(),
            pe_tol: tol.rank_tol,
            horizon: 300,
            init_guess: InitGuess::SeededRandom { scale: 1.0 },
            data_file: None,
            online_file: None,
            state_dim: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<SystemChoice>,
    #[serde(rename = "N")]
    past: Option<usize>,
    #[serde(rename = "L")]
    delay: Option<RawDelay>,
    data_length: Option<usize>,
    seed: Option<u64>,
    horizon: Option<usize>,
    init_guess: Option<String>,
    init_scale: Option<f64>,
    rank_tol: Option<f64>,
    y_trunc: Option<f64>,
    ls_trunc: Option<f64>,
    pe_tol: Option<f64>,
    data_file: Option<PathBuf>,
    online_file: Option<PathBuf>,
    state_dim: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawDelay {
    Int(usize),
    Text(String),
}

impl ScenarioConfig {
    /// Parse a config file body. Relative file paths stay relative; see
    /// [`ScenarioConfig::load`] for path resolution.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        let mut cfg = ScenarioConfig::default();
        if let Some(s) = raw.system {
            cfg.system = s;
        }
        if let Some(n) = raw.past {
            cfg.past = n;
        }
        if let Some(d) = raw.delay {
            cfg.delay = match d {
                RawDelay::Int(l) => DelayChoice::Fixed(l),
                RawDelay::Text(s) => s.parse()?,
            };
        }
        if let Some(v) = raw.data_length {
            cfg.data_length = v;
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(v) = raw.horizon {
            cfg.horizon = v;
        }
        let scale = raw.init_scale.unwrap_or(1.0);
        cfg.init_guess = match raw.init_guess.as_deref() {
            None | Some("random") => InitGuess::SeededRandom { scale },
            Some("zero") => InitGuess::Zero,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "init_guess must be 'zero' or 'random', got '{other}'"
                )))
            }
        };
        let mut tol = cfg.tolerances;
        if let Some(v) = raw.rank_tol {
            tol.rank_tol = v;
            cfg.pe_tol = v;
        }
        if let Some(v) = raw.y_trunc {
            tol.y_trunc = v;
        }
        if let Some(v) = raw.ls_trunc {
            tol.ls_trunc = v;
        }
        cfg.tolerances = tol;
        if let Some(v) = raw.pe_tol {
            cfg.pe_tol = v;
        }
        cfg.data_file = raw.data_file;
        cfg.online_file = raw.online_file;
        cfg.state_dim = raw.state_dim;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; `data_file` and `online_file` are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for file in [&mut cfg.data_file, &mut cfg.online_file]
            .into_iter()
            .flatten()
        {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Checks that need no system model. `N >= n` is checked once the
    /// system is known.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.past == 0 {
            return Err(CliError::Config("N must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(CliError::Config("horizon must be positive".into()));
        }
        if self.data_length == 0 {
            return Err(CliError::Config("data_length must be positive".into()));
        }
        self.tolerances
            .to_core()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.pe_tol.is_finite() && self.pe_tol >= 0.0) {
            return Err(CliError::Config(format!(
                "pe_tol must be finite and nonnegative, got {}",
                self.pe_tol
            )));
        }
        if let InitGuess::SeededRandom { scale } = self.init_guess {
            if !(scale.is_finite() && scale >= 0.0) {
                return Err(CliError::Config(format!(
                    "init_scale must be finite and nonnegative, got {scale}"
                )));
            }
        }
        if self.system == SystemChoice::FromFile {
            if self.data_file.is_none() || self.online_file.is_none() {
                return Err(CliError::Config(
                    "system 'from-file' needs data_file and online_file".into(),
                ));
            }
            if self.state_dim.is_none() {
                return Err(CliError::Config(
                    "system 'from-file' needs state_dim".into(),
                ));
            }
            if self.delay == DelayChoice::Auto {
                return Err(CliError::Config(
                    "L = 'auto' needs a model; set L explicitly for 'from-file'".into(),
                ));
            }
        }
        Ok(())
    }
}
