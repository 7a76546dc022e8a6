//! Keypoint refinement, image→field homography, projection and the camera
//! footprint on the pitch.

mod footprint;
mod homography;
mod keypoint;

use thiserror::Error;

pub use footprint::{camera_footprint, polygon_area};
pub use homography::{estimate_homography, project_point, reprojection_error, Correspondence, Homography};
pub use keypoint::refine_keypoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("need at least 4 correspondences, got {0}")]
    InsufficientPoints(usize),
    #[error("degenerate point configuration")]
    DegenerateConfiguration,
    #[error("point maps to infinity")]
    DegenerateProjection,
    #[error("score patch has no peak")]
    NoPeak,
    #[error("score patch must be square with odd side >= 3")]
    InvalidPatch,
    #[error("empty correspondence list")]
    Empty,
}
