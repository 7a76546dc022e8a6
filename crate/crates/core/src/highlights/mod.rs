//! Clip-level highlight classification: pooling of per-second features, a
//! softmax head trained from scratch, and interval extraction.

mod softmax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use softmax::{
    classify_clip, classify_pooled, loss_and_gradient, train_clip_classifier, train_pooled, Gradient, SoftmaxModel,
    TrainConfig,
};

/// Per-second feature rows in one clip.
pub const CLIP_ROWS: usize = 8;
pub const DEFAULT_FEATURE_DIM: usize = 512;

#[derive(Debug, Error)]
pub enum HighlightError {
    #[error("clip must have {CLIP_ROWS} rows of equal length, got {0} rows")]
    BadClipShape(usize),
    #[error("clip contains a non-finite value")]
    NonFinite,
    #[error("training data covers fewer than two classes")]
    DegenerateDataset,
    #[error("feature dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bad model file: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighlightClass {
    Shooting,
    CornerKick,
    Penalty,
    FreeKick,
    Injury,
    Substitution,
    NormalPlay,
}

impl HighlightClass {
    pub const COUNT: usize = 7;
    pub const ALL: [HighlightClass; 7] = [
        HighlightClass::Shooting,
        HighlightClass::CornerKick,
        HighlightClass::Penalty,
        HighlightClass::FreeKick,
        HighlightClass::Injury,
        HighlightClass::Substitution,
        HighlightClass::NormalPlay,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HighlightClass::Shooting => "shooting",
            HighlightClass::CornerKick => "corner_kick",
            HighlightClass::Penalty => "penalty",
            HighlightClass::FreeKick => "free_kick",
            HighlightClass::Injury => "injury",
            HighlightClass::Substitution => "substitution",
            HighlightClass::NormalPlay => "normal_play",
        }
    }
}

/// Eight one-per-second feature vectors starting at `start_frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSample {
    pub start_frame: u64,
    pub features: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<HighlightClass>,
}

impl ClipSample {
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), HighlightError> {
        let d = self.dim();
        if self.features.len() != CLIP_ROWS || d == 0 || self.features.iter().any(|r| r.len() != d) {
            return Err(HighlightError::BadClipShape(self.features.len()));
        }
        if self.features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HighlightError::NonFinite);
        }
        Ok(())
    }
}

/// Frames covered by one clip at `fps`.
pub fn clip_span_frames(fps: u32) -> u64 {
    CLIP_ROWS as u64 * u64::from(fps)
}

/// Column-wise mean of the clip's rows.
pub fn pool_clip(clip: &ClipSample) -> Result<Vec<f64>, HighlightError> {
    clip.validate()?;
    let mut out = vec![0.0; clip.dim()];
    for row in &clip.features {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    for o in &mut out {
        *o /= CLIP_ROWS as f64;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightInterval {
    pub class: HighlightClass,
    pub start_frame: u64,
    pub end_frame: u64,
}

/// Drops normal play and merges touching or overlapping intervals of the same
/// class. Output is sorted by start frame, then class.
pub fn extract_highlight_intervals(clips: &[HighlightInterval]) -> Vec<HighlightInterval> {
    let mut merged: Vec<HighlightInterval> = Vec::new();
    for class in HighlightClass::ALL.into_iter().filter(|&c| c != HighlightClass::NormalPlay) {
        let mut spans: Vec<(u64, u64)> =
            clips.iter().filter(|c| c.class == class).map(|c| (c.start_frame, c.end_frame)).collect();
        spans.sort_unstable();
        let mut current: Option<(u64, u64)> = None;
        for (s, e) in spans {
            current = match current {
                Some((cs, ce)) if s <= ce.saturating_add(1) => Some((cs, ce.max(e))),
                Some((cs, ce)) => {
                    merged.push(HighlightInterval { class, start_frame: cs, end_frame: ce });
                    Some((s, e))
                }
                None => Some((s, e)),
            };
        }
        if let Some((cs, ce)) = current {
            merged.push(HighlightInterval { class, start_frame: cs, end_frame: ce });
        }
    }
    merged.sort_by_key(|i| (i.start_frame, i.class));
    merged
}
