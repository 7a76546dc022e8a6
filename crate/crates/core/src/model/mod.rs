//! Domain types, the standard pitch model, and ingestion of the
//! newline-delimited observation stream.

mod field;
mod stream;
mod types;

pub use field::{
    standard_field_model, FieldModel, Zone, CENTER_CIRCLE_RADIUS_M, KEYPOINT_COUNT, PENALTY_AREA_DEPTH_M,
    PENALTY_AREA_HALF_WIDTH_M, PITCH_LENGTH_M, PITCH_WIDTH_M,
};
pub use stream::{
    parse_observation_stream, serialize_observation_stream, validate_frame, InvariantViolation, ObservationReader,
    StreamError, ValidatedFrame, ValidationConfig, EMBEDDING_NORM_TOLERANCE,
};
pub use types::{
    BoundingBox, Detection, DetectionClass, FrameRecord, KeypointObservation, NumberObservation, RgbPatch,
};
