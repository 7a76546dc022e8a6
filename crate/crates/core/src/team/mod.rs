//! Kit-color team assignment: grass-adaptive segmentation, upper/lower
//! color features, K-means grouping and role labeling.

mod assigner;
mod color;
mod feature;
mod grass;
mod kmeans;
mod labels;
mod segment;

use thiserror::Error;

pub use assigner::{TeamAssigner, TeamAssignerConfig};
pub use color::{hsv_to_rgb, hsv_to_rgb8, hue_in_window, rgb8_to_hsv, rgb_to_hsv, Hsv};
pub use feature::{extract_color_feature, ColorFeature, HalfColor, FEATURE_DIM};
pub use grass::{estimate_grass_model, GrassModel, HUE_BINS, MIN_CHROMA, MIN_SAMPLE_PIXELS, MIN_SUPPORT};
pub use kmeans::{cluster_teams, Clustering, KMeansConfig};
pub use labels::{group_of_track, label_clusters, Group, GroupLabel, GroupVotes, LabelRules, MemberInfo, Team};
pub use segment::{segment_person, Mask, MIN_COMPONENT_FRACTION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TeamError {
    #[error("need at least {needed} pixels to model the grass, got {found}")]
    InsufficientSample { found: usize, needed: usize },
    #[error("no grass found (support {support:.3})")]
    NoGrassFound { support: f64 },
    #[error("foreground ratio {ratio:.3} below {needed}")]
    InsufficientForeground { ratio: f64, needed: f64 },
    #[error("need at least {needed} samples to cluster, got {found}")]
    TooFewSamples { found: usize, needed: usize },
    #[error("feature vectors differ in length")]
    DimensionMismatch,
}
