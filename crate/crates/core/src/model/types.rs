use serde::{Deserialize, Serialize};

/// Axis-aligned box in image pixels, top-left anchored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Builds a box from center, aspect ratio (w/h) and height.
    pub fn from_xyah(cx: f64, cy: f64, aspect: f64, h: f64) -> Self {
        let w = aspect * h;
        Self { x: cx - w / 2.0, y: cy - h / 2.0, w, h }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn aspect(&self) -> f64 {
        self.w / self.h
    }

    /// (cx, cy, a, h), the Kalman measurement space.
    pub fn to_xyah(&self) -> [f64; 4] {
        let (cx, cy) = self.center();
        [cx, cy, self.aspect(), self.h]
    }

    /// Ground-contact point: bottom-center of the box.
    pub fn bottom_center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let x1 = self.x.max(other.x);
        let y1 = self.y.max(other.y);
        let x2 = (self.x + self.w).min(other.x + other.w);
        let y2 = (self.y + self.h).min(other.y + other.h);
        let inter = (x2 - x1).max(0.0) * (y2 - y1).max(0.0);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

impl From<[f64; 4]> for BoundingBox {
    fn from(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionClass {
    Player,
    Referee,
    Ball,
}

impl DetectionClass {
    pub fn is_person(self) -> bool {
        !matches!(self, DetectionClass::Ball)
    }
}

/// Raw RGB pixel grid cropped around a detection, row-major, 3 bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgbPatch {
    pub w: usize,
    pub h: usize,
    pub rgb: Vec<u8>,
}

impl RgbPatch {
    pub fn new(w: usize, h: usize, rgb: Vec<u8>) -> Self {
        Self { w, h, rgb }
    }

    pub fn filled(w: usize, h: usize, color: [u8; 3]) -> Self {
        let rgb = std::iter::repeat_n(color, w * h).flatten().collect();
        Self { w, h, rgb }
    }

    pub fn len(&self) -> usize {
        self.w * self.h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.w + col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, color: [u8; 3]) {
        let i = 3 * (row * self.w + col);
        self.rgb[i..i + 3].copy_from_slice(&color);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.rgb.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

/// A jersey-number guess emitted by the upstream recognizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberObservation {
    pub value: u32,
    pub conf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    #[serde(rename = "class")]
    pub class: DetectionClass,
    #[serde(rename = "conf")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<RgbPatch>,
    #[serde(rename = "number", default, skip_serializing_if = "Option::is_none")]
    pub number_obs: Option<NumberObservation>,
}

impl Detection {
    pub fn new(bbox: BoundingBox, class: DetectionClass, confidence: f64) -> Self {
        Self { bbox, class, confidence, embedding: None, patch: None, number_obs: None }
    }

    pub fn with_embedding(mut self, embedding: Vec<f32>) -> Self {
        self.embedding = Some(embedding);
        self
    }
}

/// A field keypoint located by the upstream keypoint model. `score_patch`,
/// when present, is the square score map centered on (`x`, `y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointObservation {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub score: f64,
    #[serde(rename = "patch", default, skip_serializing_if = "Option::is_none")]
    pub score_patch: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    pub ts_ms: i64,
    #[serde(default)]
    pub detections: Vec<Detection>,
    #[serde(default)]
    pub keypoints: Vec<KeypointObservation>,
}

impl FrameRecord {
    pub fn empty(frame_index: u64, ts_ms: i64) -> Self {
        Self { frame_index, ts_ms, detections: Vec::new(), keypoints: Vec::new() }
    }

    /// One JSON line, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame records always serialize")
    }
}
