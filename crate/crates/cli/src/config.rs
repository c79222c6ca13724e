//! Scenario configuration from flags and an optional `key=value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use smqsl::qsl::EntropySpec;
use smqsl::BlochVector;
use thiserror::Error;

/// Keys accepted in config files, spelled as the long flags.
pub const KEYS: [&str; 17] = [
    "r",
    "theta",
    "phi",
    "gamma",
    "omega",
    "eta",
    "length",
    "j",
    "delta",
    "p",
    "entropy",
    "q-grid",
    "tau-grid",
    "out",
    "grid-step",
    "refined",
    "bound",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: expected key=value, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("{origin}: {field}: {message}")]
    Field {
        origin: Origin,
        field: &'static str,
        message: String,
    },
    #[error("missing required parameter {0:?}")]
    Missing(&'static str),
}

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Flag,
    File { line: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag => write!(f, "command line"),
            Origin::File { line } => write!(f, "config line {line}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Ad,
    Pt,
    Xxz,
    AdDiagnostics,
}

/// Speed series used for the amplitude-damping bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedBound {
    /// Twice the Kraus speed.
    Kraus,
    /// The Schatten speed itself.
    Schatten,
}

/// `start:stop:step` with inclusive start. The stop value is included when it
/// lies on the lattice up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, found {text:?}"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("{s:?} is not a number"));
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if ![start, stop, step].iter().all(|v| v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        if !(step > 0.0) {
            return Err(format!("step {step} must be positive"));
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        Ok(Self { start, stop, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        // Rounded to 12 significant digits so `0.1 + 2 · 0.1` reads back as `0.3`.
        (0..=n)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                format!("{v:.11e}").parse().expect("formatted float parses")
            })
            .collect()
    }
}

pub fn parse_entropy(text: &str) -> Result<EntropySpec, String> {
    match text.trim() {
        "renyi" => Ok(EntropySpec::Renyi),
        "tsallis" => Ok(EntropySpec::Tsallis),
        other => {
            let z = other
                .strip_prefix("sme:")
                .ok_or_else(|| format!("expected renyi, tsallis or sme:<z>, found {other:?}"))?;
            let z: f64 = z.parse().map_err(|_| format!("{z:?} is not a number"))?;
            if !(z > 0.0 && z <= 1.0) {
                return Err(format!("z = {z} must lie in (0, 1]"));
            }
            Ok(EntropySpec::SharmaMittal(z))
        }
    }
}

/// Raw values keyed by flag name, file entries first, flags overriding.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<&'static str, (String, Origin)>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                text: content.to_string(),
            })?;
            let key = key.trim().replace('_', "-");
            let known = KEYS.iter().find(|k| **k == key).ok_or(ConfigError::UnknownKey {
                line: line_no,
                key: key.clone(),
            })?;
            raw.values
                .insert(known, (value.trim().to_string(), Origin::File { line: line_no }));
        }
        Ok(raw)
    }

    /// Sets `key` from a flag, overriding any file value.
    pub fn set_flag(&mut self, key: &'static str, value: Option<String>) {
        debug_assert!(KEYS.contains(&key));
        if let Some(v) = value {
            self.values.insert(key, (v, Origin::Flag));
        }
    }

    fn get(&self, key: &'static str) -> Option<&(String, Origin)> {
        self.values.get(key)
    }

    fn parse_with<T>(
        &self,
        key: &'static str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|(text, origin)| {
                parse(text).map_err(|message| ConfigError::Field {
                    origin: *origin,
                    field: key,
                    message,
                })
            })
            .transpose()
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, |s| {
            let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err("value must be finite".into())
            }
        })
    }

    fn required(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.number(key)?.ok_or(ConfigError::Missing(key))
    }

    fn field_error(&self, key: &'static str, message: String) -> ConfigError {
        let origin = self.get(key).map(|(_, o)| *o).unwrap_or(Origin::Flag);
        ConfigError::Field {
            origin,
            field: key,
            message,
        }
    }
}

/// Fully validated scenario settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub model: Model,
    pub entropy: Option<EntropySpec>,
    pub q_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    AmplitudeDamping {
        bloch: BlochVector,
        gamma: f64,
        bound: SpeedBound,
    },
    Pt {
        bloch: BlochVector,
        omega: f64,
        eta: f64,
        refined: bool,
    },
    Xxz {
        length: usize,
        j: f64,
        delta: f64,
        p: f64,
    },
}

impl ScenarioConfig {
    pub fn from_raw(scenario: Scenario, raw: &RawConfig) -> Result<Self, ConfigError> {
        let bloch = || -> Result<BlochVector, ConfigError> {
            let r = raw.required("r")?;
            let theta = raw.required("theta")?;
            let phi = raw.number("phi")?.unwrap_or(0.0);
            BlochVector::new(r, theta, phi).map_err(|e| raw.field_error("r", e.to_string()))
        };
        let positive = |key: &'static str| -> Result<f64, ConfigError> {
            let v = raw.required(key)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(raw.field_error(key, format!("{v} must be positive")))
            }
        };
        let model = match scenario {
            Scenario::Ad | Scenario::AdDiagnostics => {
                let bound = raw
                    .parse_with("bound", |s| match s {
                        "kraus" => Ok(SpeedBound::Kraus),
                        "schatten" => Ok(SpeedBound::Schatten),
                        _ => Err(format!("expected kraus or schatten, found {s:?}")),
                    })?
                    .unwrap_or(SpeedBound::Kraus);
                Model::AmplitudeDamping {
                    bloch: bloch()?,
                    gamma: positive("gamma")?,
                    bound,
                }
            }
            Scenario::Pt => {
                let eta = raw.required("eta")?;
                if eta < 0.0 {
                    return Err(raw.field_error("eta", format!("{eta} must be non-negative")));
                }
                let refined = raw
                    .parse_with("refined", |s| match s {
                        "true" | "1" | "yes" => Ok(true),
                        "false" | "0" | "no" => Ok(false),
                        _ => Err(format!("expected true or false, found {s:?}")),
                    })?
                    .unwrap_or(false);
                Model::Pt {
                    bloch: bloch()?,
                    omega: positive("omega")?,
                    eta,
                    refined,
                }
            }
            Scenario::Xxz => {
                let length = raw
                    .parse_with("length", |s| {
                        let l: usize = s.parse().map_err(|_| format!("{s:?} is not a whole number"))?;
                        if (2..=smqsl::dynamics::MAX_SITES).contains(&l) {
                            Ok(l)
                        } else {
                            Err(format!("length {l} outside 2..={}", smqsl::dynamics::MAX_SITES))
                        }
                    })?
                    .ok_or(ConfigError::Missing("length"))?;
                let p = raw.required("p")?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(raw.field_error("p", format!("{p} outside [0, 1]")));
                }
                Model::Xxz {
                    length,
                    j: raw.required("j")?,
                    delta: raw.required("delta")?,
                    p,
                }
            }
        };

        let grid = |key: &'static str| raw.parse_with(key, GridSpec::parse)?.ok_or(ConfigError::Missing(key));
        let tau_grid = grid("tau-grid")?.values();
        let diagnostics = scenario == Scenario::AdDiagnostics;
        if let Some(&t) = tau_grid.iter().find(|&&t| t < 0.0 || (!diagnostics && t == 0.0)) {
            let bound = if diagnostics { "non-negative" } else { "positive" };
            return Err(raw.field_error("tau-grid", format!("time {t} must be {bound}")));
        }
        let (entropy, q_grid) = if diagnostics {
            (None, Vec::new())
        } else {
            let entropy = raw
                .parse_with("entropy", parse_entropy)?
                .ok_or(ConfigError::Missing("entropy"))?;
            let q_grid = grid("q-grid")?.values();
            if let Some(&q) = q_grid.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
                return Err(raw.field_error("q-grid", format!("q = {q} outside (0, 1)")));
            }
            (Some(entropy), q_grid)
        };
        let grid_step = raw.number("grid-step")?;
        if let Some(h) = grid_step {
            if !(h > 0.0) {
                return Err(raw.field_error("grid-step", format!("{h} must be positive")));
            }
        }
        let out = raw.get("out").map(|(s, _)| PathBuf::from(s));
        Ok(Self {
            scenario,
            model,
            entropy,
            q_grid,
            tau_grid,
            out,
            grid_step,
        })
    }
}
