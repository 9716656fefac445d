//! Per-command JSON configuration with defaults, path-aware parse errors
//! and semantic validation.

use std::fmt;

use cqm_core::barrier::BarrierPotential;
use cqm_core::rotor::{IntrinsicMoments, Orientation};
use nalgebra::Matrix3;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Schema violation located by a JSON path such as `alphas[2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Deserializes a config document, reporting the path of the first
/// offending field.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })
}

/// Width parameter that may be infinite (written `"inf"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(pub f64);

impl Alpha {
    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// File-name tag: `0.25`, `16`, `inf`.
    pub fn tag(&self) -> String {
        if self.0.is_finite() { format!("{}", self.0) } else { "inf".into() }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() { s.serialize_f64(self.0) } else { s.serialize_str("inf") }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Alpha(x)),
            Raw::Str(s) if s == "inf" => Ok(Alpha(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierConfig {
    pub v0: f64,
    pub length: f64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        Self { v0: 1.0, length: 8.0 }
    }
}

impl BarrierConfig {
    pub fn build(&self, path: &str) -> Result<BarrierPotential, ConfigError> {
        BarrierPotential::new(self.v0, self.length).map_err(|e| ConfigError::at(path, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(ConfigError::at(path, "need finite bounds with max > min"));
        }
        if self.n < 2 {
            return Err(ConfigError::at(format!("{path}.n"), "need at least 2 points"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        cqm_core::barrier::linspace(self.min, self.max, self.n)
    }
}

fn check_alphas(alphas: &[Alpha], allow_inf: bool) -> Result<(), ConfigError> {
    if alphas.is_empty() {
        return Err(ConfigError::at("alphas", "list must not be empty"));
    }
    for (i, a) in alphas.iter().enumerate() {
        let ok = a.0 > 0.0 && (allow_inf || a.is_finite());
        if !ok {
            return Err(ConfigError::at(format!("alphas[{i}]"), format!("alpha must be positive, got {}", a.tag())));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig1Config {
    pub barrier: BarrierConfig,
    pub alphas: Vec<Alpha>,
    pub x_grid: GridConfig,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            barrier: BarrierConfig::default(),
            alphas: [0.25, 1.0, 2.0, 8.0].map(Alpha).to_vec(),
            x_grid: GridConfig { min: -10.0, max: 18.0, n: 561 },
        }
    }
}

impl Fig1Config {
    pub fn validate(&self) -> Result<BarrierPotential, ConfigError> {
        check_alphas(&self.alphas, false)?;
        self.x_grid.validate("x_grid")?;
        self.barrier.build("barrier")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Icm,
    Cm,
    Qm,
    QmAvg,
    Cqm,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Icm => "icm",
            Mode::Cm => "cm",
            Mode::Qm => "qm",
            Mode::QmAvg => "qm_avg",
            Mode::Cqm => "cqm",
        }
    }

    /// Modes whose curve does not depend on the width parameter.
    pub fn alpha_free(&self) -> bool {
        matches!(self, Mode::Icm | Mode::Qm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2Config {
    pub barrier: BarrierConfig,
    pub alphas: Vec<Alpha>,
    pub modes: Vec<Mode>,
    pub k_grid: GridConfig,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            barrier: BarrierConfig::default(),
            alphas: vec![Alpha(0.25), Alpha(1.0), Alpha(4.0), Alpha(16.0), Alpha(64.0), Alpha(f64::INFINITY)],
            modes: vec![Mode::Icm, Mode::Cm, Mode::Qm, Mode::QmAvg, Mode::Cqm],
            k_grid: GridConfig { min: 0.01, max: 3.0, n: 300 },
        }
    }
}

impl Fig2Config {
    pub fn validate(&self) -> Result<BarrierPotential, ConfigError> {
        check_alphas(&self.alphas, true)?;
        if self.modes.is_empty() {
            return Err(ConfigError::at("modes", "list must not be empty"));
        }
        self.k_grid.validate("k_grid")?;
        if !(self.k_grid.min > 0.0) {
            return Err(ConfigError::at("k_grid.min", "wave numbers must be positive"));
        }
        self.barrier.build("barrier")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotorConfig {
    pub moments: [f64; 3],
    pub lbar0: [f64; 3],
    /// Initial orientation, rows of a rotation matrix.
    pub orientation0: [[f64; 3]; 3],
    pub periods: f64,
    pub samples_per_period: usize,
    pub tol: f64,
    pub crosscheck_periods: f64,
    pub crosscheck_samples: usize,
    /// Symmetric top run alongside the main one to check the precession
    /// rate; `null` skips it.
    pub precession_moments: Option<[f64; 3]>,
    pub svg: bool,
}

impl Default for RotorConfig {
    fn default() -> Self {
        Self {
            moments: [1.0, 2.0, 3.0],
            lbar0: [0.4, 1.0, 0.7],
            orientation0: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            periods: 1000.0,
            samples_per_period: 10,
            tol: 1e-12,
            crosscheck_periods: 10.0,
            crosscheck_samples: 201,
            precession_moments: Some([2.0, 2.0, 1.0]),
            svg: true,
        }
    }
}

impl RotorConfig {
    pub fn validate(&self) -> Result<(IntrinsicMoments, Orientation), ConfigError> {
        let [a, b, c] = self.moments;
        let m = IntrinsicMoments::new(a, b, c).map_err(|e| ConfigError::at("moments", e.to_string()))?;
        let rows = self.orientation0;
        let r = Matrix3::from_fn(|i, j| rows[i][j]);
        let o = Orientation::new(r).map_err(|e| ConfigError::at("orientation0", e.to_string()))?;
        if self.lbar0.iter().any(|x| !x.is_finite()) || self.lbar0.iter().all(|x| *x == 0.0) {
            return Err(ConfigError::at("lbar0", "angular momentum must be finite and nonzero"));
        }
        if !(self.periods > 0.0 && self.periods.is_finite()) {
            return Err(ConfigError::at("periods", "must be positive"));
        }
        if self.samples_per_period == 0 {
            return Err(ConfigError::at("samples_per_period", "must be positive"));
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return Err(ConfigError::at("tol", "must lie in (0, 1e-3)"));
        }
        if !(self.crosscheck_periods > 0.0 && self.crosscheck_periods.is_finite()) {
            return Err(ConfigError::at("crosscheck_periods", "must be positive"));
        }
        if self.crosscheck_samples < 2 {
            return Err(ConfigError::at("crosscheck_samples", "need at least 2 samples"));
        }
        Ok((m, o))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    SquareRoot,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelityConfig {
    pub alpha: f64,
    pub kbar: f64,
    pub threshold: f64,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        Self { alpha: 400.0, kbar: 1.0, threshold: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub barrier: BarrierConfig,
    pub alpha: f64,
    pub kbars: Vec<f64>,
    pub tolerance: f64,
    pub formula: Formula,
    pub points_per_wavelength: f64,
    pub fidelity: FidelityConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            barrier: BarrierConfig::default(),
            alpha: 400.0,
            kbars: vec![1.1, 1.3, 1.5, 1.7, 2.0],
            tolerance: 0.02,
            formula: Formula::SquareRoot,
            points_per_wavelength: 40.0,
            fidelity: FidelityConfig::default(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<BarrierPotential, ConfigError> {
        let quasi_mono = |alpha: f64, k: f64| 1.0 / (2.0 * alpha).sqrt() < k / 4.0;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ConfigError::at("alpha", "must be positive and finite"));
        }
        if self.kbars.is_empty() {
            return Err(ConfigError::at("kbars", "list must not be empty"));
        }
        for (i, &k) in self.kbars.iter().enumerate() {
            if !(k > 0.0 && k.is_finite()) || !quasi_mono(self.alpha, k) {
                return Err(ConfigError::at(
                    format!("kbars[{i}]"),
                    "must be positive with wave-number spread below kbar/4",
                ));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(ConfigError::at("tolerance", "must be positive"));
        }
        if !(self.points_per_wavelength >= 10.0) {
            return Err(ConfigError::at("points_per_wavelength", "must be at least 10"));
        }
        let f = &self.fidelity;
        if !(f.alpha > 0.0 && f.kbar > 0.0 && quasi_mono(f.alpha, f.kbar)) {
            return Err(ConfigError::at("fidelity", "need positive alpha and kbar with spread below kbar/4"));
        }
        if !(f.threshold > 0.0 && f.threshold <= 1.0) {
            return Err(ConfigError::at("fidelity.threshold", "must lie in (0, 1]"));
        }
        self.barrier.build("barrier")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraEntry {
    /// Name of a shipped fixture or path to a fixture file.
    pub fixture: String,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgebraReportConfig {
    pub entries: Vec<AlgebraEntry>,
}

impl Default for AlgebraReportConfig {
    fn default() -> Self {
        let e = |f: &str, d: &[f64]| AlgebraEntry { fixture: f.into(), density: d.to_vec() };
        Self {
            entries: vec![
                e("so3", &[0.0, 0.0, 1.0]),
                e("spin1", &[0.0, 0.0, 1.0]),
                e("r6", &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
                e("rma", &[1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ],
        }
    }
}

impl AlgebraReportConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            return Err(ConfigError::at("entries", "list must not be empty"));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.density.iter().any(|x| !x.is_finite()) {
                return Err(ConfigError::at(format!("entries[{i}].density"), "values must be finite"));
            }
        }
        Ok(())
    }
}
