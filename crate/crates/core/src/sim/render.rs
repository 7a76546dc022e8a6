use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::config::{Kit, SimConfig};
use super::world::{Identity, TruthFrame};
use crate::model::{
    standard_field_model, BoundingBox, Detection, DetectionClass, FrameRecord, KeypointObservation, NumberObservation,
    RgbPatch,
};
use crate::team::{hsv_to_rgb8, Group, Hsv};

/// Radius of the quadratic keypoint score bump, pixels.
const SCORE_RADIUS_PX: f64 = 4.0;
const STRIPE_M: f64 = 5.25;

/// Per-frame corruption stream, independent of how many frames were drawn
/// before.
pub(crate) fn frame_rng(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e01_5e00_c0ff_ee00);
    rng.set_stream(frame_index);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    } else {
        0.0
    }
}

/// Turns ground truth into detector-style observations.
#[derive(Debug, Clone)]
pub struct Renderer {
    config: SimConfig,
    seed: u64,
}

impl Renderer {
    pub fn new(config: SimConfig, seed: u64) -> Self {
        Self { config, seed }
    }

    fn jitter(&self, rng: &mut ChaCha8Rng, c: Hsv) -> [u8; 3] {
        let j = self.config.noise.hue_jitter_deg;
        if j > 0.0 {
            hsv_to_rgb8(Hsv { h: (c.h + rng.random_range(-j..=j)).rem_euclid(360.0), ..c })
        } else {
            hsv_to_rgb8(c)
        }
    }

    /// Grass background with an upright kit-colored body in the middle.
    fn patch(&self, rng: &mut ChaCha8Rng, kit: Option<Kit>, field_x: f64) -> RgbPatch {
        let (w, h) = self.config.patch_size;
        let grass = self.config.kits.grass[((field_x / STRIPE_M).floor().rem_euclid(2.0)) as usize];
        let (c0, c1) = (w * 3 / 10, w * 7 / 10);
        let split = 1 + (h - 2) / 2;
        let mut patch = RgbPatch::filled(w, h, [0, 0, 0]);
        for r in 0..h {
            for c in 0..w {
                let color = match kit {
                    Some(k) if (1..h - 1).contains(&r) && (c0..c1).contains(&c) => {
                        if r < split {
                            k.shirt
                        } else {
                            k.shorts
                        }
                    }
                    _ => grass,
                };
                patch.set_pixel(r, c, self.jitter(rng, color));
            }
        }
        patch
    }

    fn noisy_box(&self, rng: &mut ChaCha8Rng, b: &BoundingBox) -> BoundingBox {
        let s = self.config.noise.detection_sigma_px;
        let x = b.x + gaussian(rng, s);
        let y = b.y + gaussian(rng, s);
        let w = (b.w + gaussian(rng, s)).max(1.0);
        let h = (b.h + gaussian(rng, s)).max(1.0);
        BoundingBox::new(x, y, w, h)
    }

    fn embedding(&self, rng: &mut ChaCha8Rng, prototype: &[f32]) -> Vec<f32> {
        let sigma = self.config.noise.embedding_noise;
        if sigma == 0.0 {
            return prototype.to_vec();
        }
        let per = sigma / (prototype.len() as f64).sqrt();
        let v: Vec<f64> = prototype.iter().map(|&p| f64::from(p) + gaussian(rng, per)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| (x / n) as f32).collect()
    }

    fn number(&self, rng: &mut ChaCha8Rng, truth: u8) -> Option<NumberObservation> {
        let n = &self.config.noise;
        if !rng.random_bool(n.number_visibility) {
            return None;
        }
        let value = if rng.random_bool(n.number_accuracy) {
            u32::from(truth)
        } else {
            let v = rng.random_range(0..99u32);
            if v >= u32::from(truth) {
                v + 1
            } else {
                v
            }
        };
        Some(NumberObservation { value, conf: rng.random_range(0.5..=1.0) })
    }

    fn keypoints(&self, rng: &mut ChaCha8Rng, truth: &TruthFrame) -> Vec<KeypointObservation> {
        let cam = &self.config.camera;
        let noise = &self.config.noise;
        let g = truth.homography.try_inverse().expect("truth homography is invertible");
        let side = self.config.keypoint_patch;
        let mut out = Vec::new();
        for (id, (fx, fy)) in standard_field_model().keypoints() {
            let p = g * nalgebra::Vector3::new(fx, fy, 1.0);
            let (u, v) = (p.x / p.z, p.y / p.z);
            if !rng.random_bool(noise.keypoint_visibility)
                || !(0.0..cam.width_px).contains(&u)
                || !(0.0..cam.height_px).contains(&v)
            {
                continue;
            }
            let (nu, nv) = (u + gaussian(rng, noise.keypoint_sigma_px), v + gaussian(rng, noise.keypoint_sigma_px));
            let score = rng.random_range(0.6..=1.0);
            if side == 0 {
                out.push(KeypointObservation { id, x: nu, y: nv, score, score_patch: None });
                continue;
            }
            let (cx, cy) = (nu.round(), nv.round());
            let half = (side / 2) as f64;
            let patch = (0..side)
                .map(|r| {
                    (0..side)
                        .map(|c| {
                            let dx = cx + c as f64 - half - nu;
                            let dy = cy + r as f64 - half - nv;
                            1.0 - (dx * dx + dy * dy) / (SCORE_RADIUS_PX * SCORE_RADIUS_PX)
                        })
                        .collect()
                })
                .collect();
            out.push(KeypointObservation { id, x: cx, y: cy, score, score_patch: Some(patch) });
        }
        out
    }

    /// Observations for one frame; depends only on the frame and the seed.
    pub fn render(&self, truth: &TruthFrame, identities: &[Identity]) -> FrameRecord {
        let mut rng = frame_rng(self.seed, truth.frame_index);
        let noise = self.config.noise;
        let mut detections = Vec::with_capacity(truth.persons.len() + 1);
        for p in &truth.persons {
            if rng.random_bool(noise.miss_probability) {
                continue;
            }
            let ident = identities.iter().find(|i| i.id == p.id).expect("person has an identity");
            let class = if p.group == Group::Referee { DetectionClass::Referee } else { DetectionClass::Player };
            let mut d = Detection::new(self.noisy_box(&mut rng, &p.bbox), class, rng.random_range(0.6..=1.0));
            d.embedding = Some(self.embedding(&mut rng, &ident.prototype));
            d.patch = Some(self.patch(&mut rng, Some(self.config.kits.of(p.group)), p.pos.0));
            d.number_obs = ident.number.and_then(|n| self.number(&mut rng, n));
            detections.push(d);
        }
        if !rng.random_bool(noise.miss_probability) {
            let b = self.noisy_box(&mut rng, &truth.ball.bbox);
            detections.push(Detection::new(b, DetectionClass::Ball, rng.random_range(0.6..=1.0)));
        }
        let rate = noise.false_positive_rate;
        let extra = rate.floor() as usize + usize::from(rng.random_bool(rate.fract()));
        for _ in 0..extra {
            let cam = &self.config.camera;
            let h = rng.random_range(20.0..45.0);
            let bbox = BoundingBox::new(
                rng.random_range(0.0..cam.width_px - h),
                rng.random_range(0.0..cam.height_px - h),
                0.4 * h,
                h,
            );
            let mut d = Detection::new(bbox, DetectionClass::Player, rng.random_range(0.3..0.6));
            let unit = Normal::new(0.0, 1.0).expect("unit normal");
            let v: Vec<f64> = (0..self.config.embedding_dim).map(|_| unit.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            d.embedding = Some(v.iter().map(|x| (x / n) as f32).collect());
            d.patch = Some(self.patch(&mut rng, None, 0.0));
            detections.push(d);
        }
        detections.shuffle(&mut rng);
        let keypoints = self.keypoints(&mut rng, truth);
        FrameRecord { frame_index: truth.frame_index, ts_ms: truth.ts_ms, detections, keypoints }
    }
}
