use crate::team::{Group, Hsv};

use super::SimError;

/// Solid shirt and shorts colors of one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kit {
    pub shirt: Hsv,
    pub shorts: Hsv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kits {
    pub team_a: Kit,
    pub team_b: Kit,
    pub goalkeeper_a: Kit,
    pub goalkeeper_b: Kit,
    pub referee: Kit,
    /// The two mowing-stripe shades of the pitch.
    pub grass: [Hsv; 2],
}

impl Kits {
    pub fn of(&self, group: Group) -> Kit {
        match group {
            Group::TeamA => self.team_a,
            Group::TeamB => self.team_b,
            Group::GoalkeeperA => self.goalkeeper_a,
            Group::GoalkeeperB => self.goalkeeper_b,
            Group::Referee | Group::Unknown => self.referee,
        }
    }
}

const fn hsv(h: f64, s: f64, v: f64) -> Hsv {
    Hsv { h, s, v }
}

impl Default for Kits {
    fn default() -> Self {
        Self {
            team_a: Kit { shirt: hsv(0.0, 0.85, 0.85), shorts: hsv(0.0, 0.0, 0.95) },
            team_b: Kit { shirt: hsv(220.0, 0.85, 0.8), shorts: hsv(230.0, 0.8, 0.35) },
            goalkeeper_a: Kit { shirt: hsv(60.0, 0.9, 0.9), shorts: hsv(60.0, 0.9, 0.9) },
            goalkeeper_b: Kit { shirt: hsv(300.0, 0.8, 0.8), shorts: hsv(300.0, 0.8, 0.8) },
            referee: Kit { shirt: hsv(0.0, 0.0, 0.08), shorts: hsv(0.0, 0.0, 0.08) },
            grass: [hsv(105.0, 0.6, 0.5), hsv(115.0, 0.6, 0.5)],
        }
    }
}

/// Broadcast camera on the halfway line that pans to follow the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    /// Camera center in field meters (x, y, height).
    pub position: [f64; 3],
    pub focal_px: f64,
    pub width_px: f64,
    pub height_px: f64,
    /// Largest pan of the aim point away from the halfway line, meters.
    pub pan_range_m: f64,
    /// Per-frame smoothing factor of the pan toward its target.
    pub pan_gain: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            position: [52.5, -60.0, 45.0],
            focal_px: 4100.0,
            width_px: 7680.0,
            height_px: 4320.0,
            pan_range_m: 6.0,
            pan_gain: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Gaussian noise on each bbox coordinate, pixels.
    pub detection_sigma_px: f64,
    pub miss_probability: f64,
    /// Expected false-positive person detections per frame.
    pub false_positive_rate: f64,
    /// Spherical noise magnitude added to unit identity embeddings.
    pub embedding_noise: f64,
    /// Probability that a jersey-number observation is correct.
    pub number_accuracy: f64,
    /// Probability that a player detection carries a number observation.
    pub number_visibility: f64,
    pub keypoint_sigma_px: f64,
    pub keypoint_visibility: f64,
    /// Uniform per-pixel hue jitter in patches, degrees.
    pub hue_jitter_deg: f64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            detection_sigma_px: 0.0,
            miss_probability: 0.0,
            false_positive_rate: 0.0,
            embedding_noise: 0.0,
            number_accuracy: 1.0,
            number_visibility: 1.0,
            keypoint_sigma_px: 0.0,
            keypoint_visibility: 1.0,
            hue_jitter_deg: 0.0,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            detection_sigma_px: 1.0,
            miss_probability: 0.02,
            false_positive_rate: 0.0,
            embedding_noise: 0.1,
            number_accuracy: 0.9,
            number_visibility: 0.3,
            keypoint_sigma_px: 0.5,
            keypoint_visibility: 1.0,
            hue_jitter_deg: 3.0,
        }
    }
}

/// Highlight clip stream settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    pub dim: usize,
    /// Per-coordinate noise; class prototypes sit 10σ apart.
    pub sigma: f64,
    /// Probability that a clip starts a non-normal-play event.
    pub event_rate: f64,
    /// Seeds the class prototypes, shared across matches so one trained
    /// model applies to every simulation.
    pub prototype_seed: u64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self { dim: 512, sigma: 0.1, event_rate: 0.15, prototype_seed: 0xc11b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub players_per_team: usize,
    pub duration_frames: u64,
    pub fps: u32,
    pub camera: CameraConfig,
    pub kits: Kits,
    pub noise: NoiseConfig,
    pub clips: ClipConfig,
    pub embedding_dim: usize,
    /// Patch width and height in pixels.
    pub patch_size: (usize, usize),
    /// Side of the keypoint score patches; 0 disables them.
    pub keypoint_patch: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            players_per_team: 11,
            duration_frames: 3000,
            fps: 25,
            camera: CameraConfig::default(),
            kits: Kits::default(),
            noise: NoiseConfig::default(),
            clips: ClipConfig::default(),
            embedding_dim: 128,
            patch_size: (10, 16),
            keypoint_patch: 7,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(1..=11).contains(&self.players_per_team) {
            return bad(format!("players_per_team must be in 1..=11, got {}", self.players_per_team));
        }
        if self.fps == 0 {
            return bad("fps must be positive".into());
        }
        let n = &self.noise;
        for (name, p) in [
            ("miss_probability", n.miss_probability),
            ("number_accuracy", n.number_accuracy),
            ("number_visibility", n.number_visibility),
            ("keypoint_visibility", n.keypoint_visibility),
            ("event_rate", self.clips.event_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be a probability, got {p}"));
            }
        }
        for (name, s) in [
            ("detection_sigma_px", n.detection_sigma_px),
            ("false_positive_rate", n.false_positive_rate),
            ("embedding_noise", n.embedding_noise),
            ("keypoint_sigma_px", n.keypoint_sigma_px),
            ("hue_jitter_deg", n.hue_jitter_deg),
            ("clip sigma", self.clips.sigma),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("{name} must be non-negative, got {s}"));
            }
        }
        if self.embedding_dim == 0 || self.clips.dim == 0 {
            return bad("dimensions must be positive".into());
        }
        let (pw, ph) = self.patch_size;
        if pw < 8 || ph < 16 {
            return bad(format!("patch must be at least 8x16, got {pw}x{ph}"));
        }
        if self.keypoint_patch != 0 && (self.keypoint_patch < 3 || self.keypoint_patch.is_multiple_of(2)) {
            return bad(format!("keypoint patch side must be odd and >= 3, got {}", self.keypoint_patch));
        }
        let c = &self.camera;
        if !(c.focal_px > 0.0 && c.width_px > 0.0 && c.height_px > 0.0 && c.position[2] > 0.0) {
            return bad("camera needs positive focal length, image size and height".into());
        }
        Ok(())
    }
}
