use std::path::PathBuf;
use std::str::FromStr;

use crate::highlights::TrainConfig;
use crate::model::ValidationConfig;
use crate::summary::{ControlBasis, GridConfig, CONTROL_RADIUS_M};
use crate::team::TeamAssignerConfig;
use crate::tracking::TrackerConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
}

/// Field-registration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub min_keypoints: usize,
    pub min_keypoint_score: f64,
    /// Frames a homography stays usable without a refresh.
    pub carry_frames: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { min_keypoints: 6, min_keypoint_score: 0.5, carry_frames: 125 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub clips: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub fps: u32,
    pub emit_tracks: bool,
    pub memory_log: Option<PathBuf>,
    pub memory_log_every: u64,
    pub validation: ValidationConfig,
    pub persons: TrackerConfig,
    pub ball: TrackerConfig,
    pub team: TeamAssignerConfig,
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub control_radius_m: f64,
    pub control_basis: ControlBasis,
    /// Tracks updated in fewer frames are left out of the rosters.
    pub roster_min_frames: u64,
    pub training: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            clips: None,
            model: None,
            output_dir: PathBuf::from("out"),
            fps: 25,
            emit_tracks: true,
            memory_log: None,
            memory_log_every: 1000,
            validation: ValidationConfig::default(),
            persons: TrackerConfig::default(),
            ball: TrackerConfig::ball(),
            team: TeamAssignerConfig::default(),
            geometry: GeometryConfig::default(),
            grid: GridConfig::default(),
            control_radius_m: CONTROL_RADIUS_M,
            control_basis: ControlBasis::Ball,
            roster_min_frames: 25,
            training: TrainConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue { key: key.into(), reason: e.to_string() })
}

fn ranged<T: FromStr + PartialOrd + std::fmt::Display + Copy>(
    key: &str,
    value: &str,
    lo: T,
    hi: T,
) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let v: T = parse(key, value)?;
    if v.partial_cmp(&lo).is_none() || v < lo || v > hi {
        return Err(ConfigError::BadValue { key: key.into(), reason: format!("{v} outside [{lo}, {hi}]") });
    }
    Ok(v)
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Every accepted key, in documentation order.
    pub const KEYS: &'static [&'static str] = &[
        "input",
        "clips",
        "model",
        "output_dir",
        "fps",
        "emit_tracks",
        "memory_log",
        "memory_log_every",
        "validation.confidence_floor",
        "validation.embedding_dim",
        "tracker.n_init",
        "tracker.max_age",
        "tracker.appearance_gate",
        "tracker.gallery_cap",
        "tracker.iou_gate",
        "tracker.gate_threshold",
        "tracker.hard_gate",
        "tracker.hard_gate_min_confidence",
        "tracker.process_scale",
        "ball.n_init",
        "ball.max_age",
        "ball.gate_threshold",
        "ball.process_scale",
        "jersey.min_observations",
        "jersey.min_confidence",
        "team.k",
        "team.window",
        "team.refresh_frames",
        "team.grass_sample_pixels",
        "team.min_foreground",
        "team.goalkeeper_max_depth_m",
        "team.seed",
        "geometry.min_keypoints",
        "geometry.min_keypoint_score",
        "geometry.carry_frames",
        "summary.grid_cols",
        "summary.grid_rows",
        "summary.control_radius_m",
        "summary.control_basis",
        "summary.roster_min_frames",
        "highlights.learning_rate",
        "highlights.epochs",
        "highlights.l2",
        "highlights.seed",
    ];

    /// Applies one `key = value` setting, range-checking the value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "input" => self.input = path(value),
            "clips" => self.clips = path(value),
            "model" => self.model = path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "fps" => self.fps = ranged(key, value, 1, 1000)?,
            "emit_tracks" => self.emit_tracks = parse(key, value)?,
            "memory_log" => self.memory_log = path(value),
            "memory_log_every" => self.memory_log_every = ranged(key, value, 1, u64::MAX)?,
            "validation.confidence_floor" => self.validation.confidence_floor = ranged(key, value, 0.0, 1.0)?,
            "validation.embedding_dim" => {
                let d: usize = ranged(key, value, 0, 1 << 16)?;
                self.validation.embedding_dim = (d > 0).then_some(d);
            }
            "tracker.n_init" => self.persons.n_init = ranged(key, value, 1, 1000)?,
            "tracker.max_age" => self.persons.max_age = ranged(key, value, 1, 100_000)?,
            "tracker.appearance_gate" => self.persons.appearance_gate = ranged(key, value, 0.0, 2.0)?,
            "tracker.gallery_cap" => self.persons.gallery_cap = ranged(key, value, 1, 100_000)?,
            "tracker.iou_gate" => self.persons.iou_gate = ranged(key, value, 0.0, 1.0)?,
            "tracker.gate_threshold" => self.persons.gate_threshold = ranged(key, value, 0.0, 1e9)?,
            "tracker.hard_gate" => self.persons.hard_gate = parse(key, value)?,
            "tracker.hard_gate_min_confidence" => self.persons.hard_gate_min_confidence = ranged(key, value, 0.0, 1.0)?,
            "tracker.process_scale" => self.persons.process_scale = ranged(key, value, 1e-6, 1e6)?,
            "ball.n_init" => self.ball.n_init = ranged(key, value, 1, 1000)?,
            "ball.max_age" => self.ball.max_age = ranged(key, value, 1, 100_000)?,
            "ball.gate_threshold" => self.ball.gate_threshold = ranged(key, value, 0.0, f64::INFINITY)?,
            "ball.process_scale" => self.ball.process_scale = ranged(key, value, 1e-6, 1e6)?,
            "jersey.min_observations" => {
                let n = ranged(key, value, 1, 1_000_000)?;
                self.persons.number_rules.min_observations = n;
            }
            "jersey.min_confidence" => self.persons.number_rules.min_confidence = ranged(key, value, 0.0, 1.0)?,
            "team.k" => self.team.kmeans.k = ranged(key, value, 2, 64)?,
            "team.window" => self.team.window = ranged(key, value, 10, 10_000_000)?,
            "team.refresh_frames" => self.team.refresh_frames = ranged(key, value, 1, u64::MAX)?,
            "team.grass_sample_pixels" => self.team.grass_sample_pixels = ranged(key, value, 1000, 100_000_000)?,
            "team.min_foreground" => self.team.min_foreground = ranged(key, value, 0.0, 1.0)?,
            "team.goalkeeper_max_depth_m" => {
                self.team.label_rules.goalkeeper_max_depth_m = ranged(key, value, 0.0, 105.0)?;
            }
            "team.seed" => self.team.kmeans.seed = parse(key, value)?,
            "geometry.min_keypoints" => self.geometry.min_keypoints = ranged(key, value, 4, 17)?,
            "geometry.min_keypoint_score" => self.geometry.min_keypoint_score = ranged(key, value, 0.0, 1.0)?,
            "geometry.carry_frames" => self.geometry.carry_frames = ranged(key, value, 0, u64::MAX)?,
            "summary.grid_cols" => self.grid.cols = ranged(key, value, 1, 1000)?,
            "summary.grid_rows" => self.grid.rows = ranged(key, value, 1, 1000)?,
            "summary.control_radius_m" => self.control_radius_m = ranged(key, value, 0.0, 200.0)?,
            "summary.control_basis" => {
                self.control_basis = match value {
                    "ball" => ControlBasis::Ball,
                    "player" => ControlBasis::Player,
                    other => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            reason: format!("expected `ball` or `player`, got `{other}`"),
                        })
                    }
                }
            }
            "summary.roster_min_frames" => self.roster_min_frames = parse(key, value)?,
            "highlights.learning_rate" => self.training.learning_rate = ranged(key, value, 1e-12, 1e3)?,
            "highlights.epochs" => self.training.epochs = ranged(key, value, 1, 10_000_000)?,
            "highlights.l2" => self.training.l2 = ranged(key, value, 0.0, 1e3)?,
            "highlights.seed" => self.training.seed = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::BadValue { key: kv.to_string(), reason: "expected key=value".into() })?;
        self.set(k, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_overrides() {
        let mut c = PipelineConfig::default();
        c.apply_text("# comment\nfps = 30\ntracker.hard_gate = false  # inline\n\nsummary.control_basis = player\n")
            .unwrap();
        assert_eq!(c.fps, 30);
        assert!(!c.persons.hard_gate);
        assert_eq!(c.control_basis, ControlBasis::Player);
        c.apply_override("emit_tracks=false").unwrap();
        assert!(!c.emit_tracks);
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        let mut c = PipelineConfig::default();
        assert_eq!(c.set("tracker.nope", "1"), Err(ConfigError::UnknownKey("tracker.nope".into())));
        assert!(matches!(c.set("tracker.iou_gate", "1.5"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.set("fps", "abc"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.set("team.min_foreground", "NaN"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(c.apply_text("fps 25"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn every_listed_key_is_accepted() {
        let samples = [("input", "x"), ("output_dir", "o"), ("summary.control_basis", "ball")];
        for key in PipelineConfig::KEYS {
            let mut c = PipelineConfig::default();
            let value = samples.iter().find(|(k, _)| k == key).map_or("1", |(_, v)| *v);
            let value = if key.ends_with("hard_gate") || *key == "emit_tracks" { "true" } else { value };
            let value = if *key == "team.window" {
                "100"
            } else if *key == "team.grass_sample_pixels" {
                "2000"
            } else if *key == "team.k" || *key == "geometry.min_keypoints" {
                "5"
            } else {
                value
            };
            assert!(c.set(key, value).is_ok(), "{key}");
        }
    }
}
