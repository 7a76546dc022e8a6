use std::collections::HashSet;
use std::io::BufRead;

use thiserror::Error;

use super::field::KEYPOINT_COUNT;
use super::types::{Detection, FrameRecord};

/// Embeddings whose norm strays further than this from 1 are rejected
/// instead of renormalized.
pub const EMBEDDING_NORM_TOLERANCE: f64 = 0.10;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("line {line_no}: malformed record: {reason}")]
    MalformedRecord { line_no: usize, reason: String },
    #[error("frame index {0} does not increase")]
    NonMonotonicFrameIndex(u64),
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invariant violated at {field}: {reason}")]
pub struct InvariantViolation {
    pub field: String,
    pub reason: String,
}

impl InvariantViolation {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        Self { field: field.to_string(), reason: reason.into() }
    }
}

/// Lazily decodes newline-delimited frame records.
///
/// Blank lines are skipped. Embeddings are renormalized to unit length on
/// the way in.
pub struct ObservationReader<R> {
    inner: R,
    line_no: usize,
    last_frame: Option<u64>,
    buf: String,
    failed: bool,
}

impl<R: BufRead> ObservationReader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner, line_no: 0, last_frame: None, buf: String::new(), failed: false }
    }

    fn decode(&mut self) -> Result<FrameRecord, StreamError> {
        let line_no = self.line_no;
        let mut record: FrameRecord = serde_json::from_str(self.buf.trim())
            .map_err(|e| StreamError::MalformedRecord { line_no, reason: e.to_string() })?;
        for (i, det) in record.detections.iter_mut().enumerate() {
            normalize_embedding(det).map_err(|reason| StreamError::MalformedRecord {
                line_no,
                reason: format!("detection {i}: {reason}"),
            })?;
        }
        if let Some(last) = self.last_frame {
            if record.frame_index <= last {
                return Err(StreamError::NonMonotonicFrameIndex(record.frame_index));
            }
        }
        self.last_frame = Some(record.frame_index);
        Ok(record)
    }
}

impl<R: BufRead> Iterator for ObservationReader<R> {
    type Item = Result<FrameRecord, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line_no += 1;
                    if self.buf.trim().is_empty() {
                        continue;
                    }
                    let out = self.decode();
                    if out.is_err() {
                        self.failed = true;
                    }
                    return Some(out);
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
        }
    }
}

/// Parses a whole in-memory stream. See [`ObservationReader`] for the lazy form.
pub fn parse_observation_stream(bytes: &[u8]) -> Result<Vec<FrameRecord>, StreamError> {
    ObservationReader::new(bytes).collect()
}

/// Serializes records back to the line format, one per line.
pub fn serialize_observation_stream(records: &[FrameRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}

fn normalize_embedding(det: &mut Detection) -> Result<(), String> {
    let Some(emb) = det.embedding.as_mut() else {
        return Ok(());
    };
    let norm = emb.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > EMBEDDING_NORM_TOLERANCE {
        return Err(format!("embedding norm {norm} too far from 1"));
    }
    if norm != 1.0 {
        for v in emb.iter_mut() {
            *v = (f64::from(*v) / norm) as f32;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub confidence_floor: f64,
    /// Required embedding length, when set.
    pub embedding_dim: Option<usize>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { confidence_floor: 0.3, embedding_dim: Some(128) }
    }
}

/// A frame whose invariants have been checked and whose low-confidence
/// detections have been dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedFrame(FrameRecord);

impl ValidatedFrame {
    pub fn record(&self) -> &FrameRecord {
        &self.0
    }

    pub fn into_record(self) -> FrameRecord {
        self.0
    }

    pub fn frame_index(&self) -> u64 {
        self.0.frame_index
    }

    pub fn detections(&self) -> &[Detection] {
        &self.0.detections
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

pub fn validate_frame(frame: FrameRecord, cfg: &ValidationConfig) -> Result<ValidatedFrame, InvariantViolation> {
    for det in &frame.detections {
        let b = &det.bbox;
        if !(b.x.is_finite() && b.y.is_finite()) {
            return Err(InvariantViolation::new("bbox", "non-finite origin"));
        }
        if !(b.w.is_finite() && b.w > 0.0) {
            return Err(InvariantViolation::new("bbox.w", format!("width {} must be positive", b.w)));
        }
        if !(b.h.is_finite() && b.h > 0.0) {
            return Err(InvariantViolation::new("bbox.h", format!("height {} must be positive", b.h)));
        }
        if !in_unit(det.confidence) {
            return Err(InvariantViolation::new("confidence", format!("{} outside [0,1]", det.confidence)));
        }
        if let Some(n) = det.number_obs {
            if n.value > 99 {
                return Err(InvariantViolation::new("number.value", format!("{} outside 0..=99", n.value)));
            }
            if !in_unit(n.conf) {
                return Err(InvariantViolation::new("number.conf", format!("{} outside [0,1]", n.conf)));
            }
        }
        if let Some(p) = &det.patch {
            if p.w == 0 || p.h == 0 || p.rgb.len() != p.w * p.h * 3 {
                return Err(InvariantViolation::new("patch", "pixel buffer does not match w x h x 3"));
            }
        }
        if let Some(e) = &det.embedding {
            if let Some(dim) = cfg.embedding_dim {
                if e.len() != dim {
                    return Err(InvariantViolation::new("embedding", format!("length {} != {dim}", e.len())));
                }
            }
            let norm = e.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(InvariantViolation::new("embedding", format!("norm {norm} is not unit")));
            }
        }
    }

    let mut seen = HashSet::new();
    for kp in &frame.keypoints {
        if kp.id == 0 || kp.id as usize > KEYPOINT_COUNT {
            return Err(InvariantViolation::new("keypoints.id", format!("{} outside 1..=17", kp.id)));
        }
        if !seen.insert(kp.id) {
            return Err(InvariantViolation::new("keypoints", format!("duplicate id {}", kp.id)));
        }
        if !(kp.x.is_finite() && kp.y.is_finite()) || !in_unit(kp.score) {
            return Err(InvariantViolation::new("keypoints", format!("keypoint {} out of range", kp.id)));
        }
        if let Some(patch) = &kp.score_patch {
            let side = patch.len();
            if side % 2 == 0 || patch.iter().any(|row| row.len() != side) {
                return Err(InvariantViolation::new("keypoints.patch", "score patch must be square with odd side"));
            }
        }
    }

    let mut frame = frame;
    frame.detections.retain(|d| d.confidence >= cfg.confidence_floor);
    Ok(ValidatedFrame(frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::{BoundingBox, DetectionClass, KeypointObservation};

    const TWO_DETECTIONS: &str = r#"{"frame": 3, "ts_ms": 120, "detections": [
        {"bbox": [10, 20, 8, 20], "class": "player", "conf": 0.9, "number": {"value": 10, "conf": 0.8}},
        {"bbox": [50.5, 60, 4, 4], "class": "ball", "conf": 0.7}], "keypoints": [{"id": 7, "x": 100.0, "y": 200.0, "score": 0.9}]}"#;

    #[test]
    fn empty_input_is_empty_sequence() {
        assert!(parse_observation_stream(b"").unwrap().is_empty());
        assert!(parse_observation_stream(b"\n\n").unwrap().is_empty());
    }

    #[test]
    fn parses_two_detections() {
        let line = TWO_DETECTIONS.replace('\n', " ");
        let frames = parse_observation_stream(line.as_bytes()).unwrap();
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(f.frame_index, 3);
        assert_eq!(f.ts_ms, 120);
        assert_eq!(f.detections.len(), 2);
        assert_eq!(f.detections[0].bbox, BoundingBox::new(10.0, 20.0, 8.0, 20.0));
        assert_eq!(f.detections[0].class, DetectionClass::Player);
        assert_eq!(f.detections[0].number_obs.unwrap().value, 10);
        assert_eq!(f.detections[1].class, DetectionClass::Ball);
        assert_eq!(f.keypoints[0].id, 7);
    }

    #[test]
    fn missing_frame_key_reports_line() {
        let input = "{\"frame\": 0, \"ts_ms\": 0}\n\n{\"ts_ms\": 40, \"detections\": []}\n";
        let mut reader = ObservationReader::new(input.as_bytes());
        assert!(reader.next().unwrap().is_ok());
        match reader.next().unwrap() {
            Err(StreamError::MalformedRecord { line_no, reason }) => {
                assert_eq!(line_no, 3);
                assert!(reason.contains("frame"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(reader.next().is_none());
    }

    #[test]
    fn rejects_non_monotonic_frames() {
        let input = "{\"frame\": 5, \"ts_ms\": 0}\n{\"frame\": 5, \"ts_ms\": 40}\n";
        let err = parse_observation_stream(input.as_bytes()).unwrap_err();
        assert!(matches!(err, StreamError::NonMonotonicFrameIndex(5)));
    }

    #[test]
    fn renormalizes_embeddings_within_tolerance() {
        let input = r#"{"frame": 0, "ts_ms": 0, "detections": [{"bbox": [0,0,1,1], "class": "player", "conf": 1.0, "embedding": [0.6, 0.8, 0.1]}]}"#;
        let frames = parse_observation_stream(input.as_bytes()).unwrap();
        let e = frames[0].detections[0].embedding.as_ref().unwrap();
        let n: f64 = e.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-6);

        let bad = r#"{"frame": 0, "ts_ms": 0, "detections": [{"bbox": [0,0,1,1], "class": "player", "conf": 1.0, "embedding": [2.0, 0.0]}]}"#;
        assert!(matches!(
            parse_observation_stream(bad.as_bytes()),
            Err(StreamError::MalformedRecord { line_no: 1, .. })
        ));
    }

    fn frame_with(dets: Vec<Detection>, kps: Vec<KeypointObservation>) -> FrameRecord {
        FrameRecord { frame_index: 0, ts_ms: 0, detections: dets, keypoints: kps }
    }

    fn cfg() -> ValidationConfig {
        ValidationConfig { confidence_floor: 0.3, embedding_dim: None }
    }

    #[test]
    fn zero_width_is_rejected() {
        let d = Detection::new(BoundingBox::new(0.0, 0.0, 0.0, 5.0), DetectionClass::Player, 0.9);
        let err = validate_frame(frame_with(vec![d], vec![]), &cfg()).unwrap_err();
        assert_eq!(err.field, "bbox.w");
    }

    #[test]
    fn low_confidence_is_dropped() {
        let keep = Detection::new(BoundingBox::new(0.0, 0.0, 4.0, 5.0), DetectionClass::Player, 0.9);
        let drop = Detection::new(BoundingBox::new(0.0, 0.0, 4.0, 5.0), DetectionClass::Player, 0.1);
        let v = validate_frame(frame_with(vec![keep, drop], vec![]), &cfg()).unwrap();
        assert_eq!(v.detections().len(), 1);
        assert_eq!(v.detections()[0].confidence, 0.9);
    }

    #[test]
    fn duplicate_keypoints_rejected() {
        let kp = KeypointObservation { id: 7, x: 1.0, y: 2.0, score: 0.9, score_patch: None };
        let err = validate_frame(frame_with(vec![], vec![kp.clone(), kp]), &cfg()).unwrap_err();
        assert_eq!(err.field, "keypoints");
    }

    #[test]
    fn even_score_patch_rejected() {
        let kp = KeypointObservation { id: 1, x: 1.0, y: 2.0, score: 0.9, score_patch: Some(vec![vec![0.0; 4]; 4]) };
        assert_eq!(validate_frame(frame_with(vec![], vec![kp]), &cfg()).unwrap_err().field, "keypoints.patch");
    }

    #[test]
    fn number_out_of_range_rejected() {
        let mut d = Detection::new(BoundingBox::new(0.0, 0.0, 4.0, 5.0), DetectionClass::Player, 0.9);
        d.number_obs = Some(crate::model::types::NumberObservation { value: 100, conf: 0.5 });
        assert_eq!(validate_frame(frame_with(vec![d], vec![]), &cfg()).unwrap_err().field, "number.value");
    }
}
