//! Streaming analytics for broadcast soccer footage.
//!
//! The engine consumes per-frame detector output (boxes, appearance
//! embeddings, jersey-number guesses, field keypoints) and produces
//! identity-stable tracks, team labels, field-coordinate positions,
//! highlight intervals and a whole-match summary. A deterministic match
//! simulator supplies ground truth for verification.

pub mod geometry;
pub mod highlights;
pub mod jersey;
pub mod model;
pub mod pipeline;
pub mod sim;
pub mod summary;
pub mod team;
pub mod tracking;

pub use model::{BoundingBox, Detection, DetectionClass, FieldModel, FrameRecord};
