//! Tracking-by-detection: Kalman motion model, gated cascaded association
//! with a team-aware hard gate, and track lifecycle management.

mod assignment;
mod association;
mod kalman;
mod track;
mod tracker;

use thiserror::Error;

pub use assignment::{solve_assignment, AssociationResult, CostMatrix};
pub use association::{appearance_distance, cascade_match, hard_gate_blocks};
pub use kalman::{KalmanFilter, KalmanState, Matrix8, Vector8, CHI2_95_4DOF};
pub use track::{Track, TrackStatus, TAIL_LEN};
pub use tracker::{FrameTracks, TrackIdAllocator, TrackSnapshot, Tracker, TrackerState};

use crate::jersey::NumberRules;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackingError {
    #[error("innovation covariance is numerically singular")]
    SingularInnovation,
    #[error("appearance gallery is empty")]
    EmptyGallery,
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame {0} arrived out of order")]
    OutOfOrderFrame(u64),
}

/// Cost used in the cascade stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociationMetric {
    /// Cosine distance to the track's embedding gallery.
    Appearance,
    /// Squared Mahalanobis distance only.
    Motion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Consecutive hits before a tentative track is confirmed.
    pub n_init: u32,
    /// Frames a confirmed track may go unmatched before deletion.
    pub max_age: u32,
    pub appearance_gate: f64,
    pub gallery_cap: usize,
    /// Largest admissible `1 − IoU` in the IoU round.
    pub iou_gate: f64,
    /// Mahalanobis gate on squared distance.
    pub gate_threshold: f64,
    pub hard_gate: bool,
    pub hard_gate_min_confidence: f64,
    pub metric: AssociationMetric,
    /// Process-noise multiplier handed to the Kalman filter.
    pub process_scale: f64,
    pub number_rules: NumberRules,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            n_init: 3,
            max_age: 30,
            appearance_gate: 0.25,
            gallery_cap: 100,
            iou_gate: 0.7,
            gate_threshold: CHI2_95_4DOF,
            hard_gate: true,
            hard_gate_min_confidence: 0.7,
            metric: AssociationMetric::Appearance,
            process_scale: 1.0,
            number_rules: NumberRules::default(),
        }
    }
}

impl TrackerConfig {
    /// Ball tracking: there is one ball, so motion distance ranks candidates
    /// without gating them, and kicks are absorbed by a larger process noise.
    pub fn ball() -> Self {
        Self {
            metric: AssociationMetric::Motion,
            hard_gate: false,
            gallery_cap: 0,
            gate_threshold: f64::INFINITY,
            process_scale: 10.0,
            ..Self::default()
        }
    }
}
