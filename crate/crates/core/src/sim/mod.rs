//! Synthetic match generator and scoring oracle.

mod camera;
mod clips;
mod config;
mod render;
mod score;
mod world;

use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use camera::BroadcastCamera;
pub use clips::{clip_labels, generate_clip_dataset, schedule_from_labels, ClipPrototypes};
pub use config::{CameraConfig, ClipConfig, Kit, Kits, NoiseConfig, SimConfig};
pub use render::Renderer;
pub use score::{
    score_tracks, truth_boxes, ScoredBox, TrackMetrics, TrackScorer, BALL_TRUTH_ID, MOSTLY_TRACKED, SCORE_IOU_GATE,
};
pub use world::{
    Identity, TruthBall, TruthFrame, TruthPerson, World, BALL_BOX_M, MAX_ACCEL_MPS2, MAX_SPEED_MPS, PASS_SPEED_MPS,
    PLAYER_ASPECT, PLAYER_HEIGHT_M,
};

use crate::highlights::{clip_span_frames, ClipSample, HighlightClass, HighlightInterval};
use crate::model::FrameRecord;
use crate::summary::{possession_rates, PossessionRates};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// Everything the simulator knows that the pipeline has to recover.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub config: SimConfig,
    pub identities: Vec<Identity>,
    pub frames: Vec<TruthFrame>,
    pub events: Vec<HighlightInterval>,
    pub clip_labels: Vec<HighlightClass>,
}

impl GroundTruth {
    pub fn possession(&self) -> Option<PossessionRates> {
        possession_rates(self.frames.iter().map(|f| f.controller))
    }
}

/// Frame-by-frame generator; memory does not grow with match length.
#[derive(Debug, Clone)]
pub struct MatchSimulator {
    config: SimConfig,
    world: World,
    renderer: Renderer,
    clip_labels: Vec<HighlightClass>,
    produced: u64,
}

impl MatchSimulator {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut ident_rng = ChaCha8Rng::seed_from_u64(config.seed);
        ident_rng.set_stream(2);
        let identities = world::make_identities(&config, &mut ident_rng);
        let mut clip_rng = ChaCha8Rng::seed_from_u64(config.seed);
        clip_rng.set_stream(3);
        let clip_labels = clip_labels(config.duration_frames, config.fps, config.clips.event_rate, &mut clip_rng);
        Ok(Self {
            config,
            world: World::new(&config, identities, world::world_rng(config.seed)),
            renderer: Renderer::new(config, config.seed),
            clip_labels,
            produced: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn identities(&self) -> &[Identity] {
        self.world.identities()
    }

    pub fn clip_labels(&self) -> &[HighlightClass] {
        &self.clip_labels
    }

    pub fn events(&self) -> Vec<HighlightInterval> {
        schedule_from_labels(&self.clip_labels, self.config.fps)
    }

    /// Clip feature samples following the event schedule, generated lazily.
    pub fn clips(&self) -> impl Iterator<Item = ClipSample> + '_ {
        let protos = ClipPrototypes::new(&self.config.clips);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(4);
        let span = clip_span_frames(self.config.fps);
        self.clip_labels.iter().enumerate().map(move |(i, &class)| protos.sample(class, i as u64 * span, &mut rng))
    }
}

impl Iterator for MatchSimulator {
    type Item = (TruthFrame, FrameRecord);

    fn next(&mut self) -> Option<Self::Item> {
        if self.produced >= self.config.duration_frames {
            return None;
        }
        self.produced += 1;
        let truth = self.world.next_frame();
        let record = self.renderer.render(&truth, self.world.identities());
        Some((truth, record))
    }
}

/// Runs a whole match in memory.
pub fn simulate_match(config: SimConfig) -> Result<(GroundTruth, Vec<FrameRecord>, Vec<ClipSample>), SimError> {
    let mut sim = MatchSimulator::new(config)?;
    let clips: Vec<ClipSample> = sim.clips().collect();
    let identities = sim.identities().to_vec();
    let events = sim.events();
    let clip_labels = sim.clip_labels().to_vec();
    let (frames, records): (Vec<TruthFrame>, Vec<FrameRecord>) = sim.by_ref().unzip();
    Ok((GroundTruth { config, identities, frames, events, clip_labels }, records, clips))
}

/// Re-renders ground truth under different noise and seed.
pub fn corrupt_ground_truth(truth: &GroundTruth, noise: &NoiseConfig, seed: u64) -> Vec<FrameRecord> {
    let renderer = Renderer::new(SimConfig { noise: *noise, ..truth.config }, seed);
    truth.frames.iter().map(|f| renderer.render(f, &truth.identities)).collect()
}

/// Reads ground-truth frames written one JSON object per line.
pub fn read_truth_frames<R: BufRead>(reader: R) -> impl Iterator<Item = Result<TruthFrame, String>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(serde_json::from_str(&l).map_err(|e| format!("line {}: {e}", i + 1))),
        Err(e) => Some(Err(format!("line {}: {e}", i + 1))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DetectionClass, PITCH_LENGTH_M, PITCH_WIDTH_M};
    use crate::team::Group;

    fn short(frames: u64, noise: NoiseConfig) -> SimConfig {
        SimConfig { duration_frames: frames, noise, ..Default::default() }
    }

    #[test]
    fn deterministic_streams() {
        let a: Vec<String> =
            MatchSimulator::new(short(50, NoiseConfig::default())).unwrap().map(|(_, r)| r.to_json_line()).collect();
        let b: Vec<String> =
            MatchSimulator::new(short(50, NoiseConfig::default())).unwrap().map(|(_, r)| r.to_json_line()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn default_frame_counts() {
        for (_, r) in MatchSimulator::new(short(200, NoiseConfig::default())).unwrap() {
            let persons = r.detections.iter().filter(|d| d.class.is_person()).count();
            let balls = r.detections.iter().filter(|d| d.class == DetectionClass::Ball).count();
            assert!(persons <= 23 && balls <= 1);
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let mut cfg = short(30, NoiseConfig::none());
        cfg.keypoint_patch = 0;
        let (gt, records, _) = simulate_match(cfg).unwrap();
        for (t, r) in gt.frames.iter().zip(&records) {
            assert_eq!(r.detections.len(), 24);
            for p in &t.persons {
                let ident = gt.identities.iter().find(|i| i.id == p.id).unwrap();
                let d = r.detections.iter().find(|d| d.embedding.as_deref() == Some(&ident.prototype[..])).unwrap();
                assert_eq!(d.bbox, p.bbox);
                if let Some(n) = ident.number {
                    assert_eq!(d.number_obs.unwrap().value, u32::from(n));
                }
            }
            let ball = r.detections.iter().find(|d| d.class == DetectionClass::Ball).unwrap();
            assert_eq!(ball.bbox, t.ball.bbox);
            assert_eq!(r.keypoints.len(), 17);
        }
    }

    #[test]
    fn all_missed() {
        let noise = NoiseConfig { miss_probability: 1.0, ..NoiseConfig::default() };
        assert!(MatchSimulator::new(short(20, noise)).unwrap().all(|(_, r)| r.detections.is_empty()));
    }

    #[test]
    fn miss_rate_statistics() {
        let noise = NoiseConfig { miss_probability: 0.1, ..NoiseConfig::none() };
        let (gt, records, _) = simulate_match(short(420, noise)).unwrap();
        let expected: usize = gt.frames.iter().map(|f| f.persons.len() + 1).sum();
        let seen: usize = records.iter().map(|r| r.detections.len()).sum();
        assert!(expected >= 10_000);
        let rate = 1.0 - seen as f64 / expected as f64;
        assert!((rate - 0.1).abs() < 0.01, "{rate}");
    }

    #[test]
    fn truth_invariants() {
        let (gt, _, clips) = simulate_match(short(1500, NoiseConfig::default())).unwrap();
        let dt = 1.0 / 25.0;
        for w in gt.frames.windows(2) {
            for (a, b) in w[0].persons.iter().zip(&w[1].persons) {
                let v = (a.pos.0 - b.pos.0).hypot(a.pos.1 - b.pos.1) / dt;
                assert!(v <= MAX_SPEED_MPS + 1e-9);
            }
        }
        for f in &gt.frames {
            for p in f.persons.iter().map(|p| p.pos).chain([f.ball.pos]) {
                assert!((-2.0..=PITCH_LENGTH_M + 2.0).contains(&p.0) && (-2.0..=PITCH_WIDTH_M + 2.0).contains(&p.1));
            }
        }
        assert_eq!(gt.identities.iter().filter(|i| i.group == Group::Referee).count(), 1);
        assert_eq!(clips.len(), 7);
        let r = gt.possession().unwrap();
        assert!((r.team_a + r.team_b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrupt_matches_streaming_render() {
        let (gt, records, _) = simulate_match(short(10, NoiseConfig::default())).unwrap();
        assert_eq!(corrupt_ground_truth(&gt, &gt.config.noise, gt.config.seed), records);
    }

    #[test]
    fn truth_json_round_trip() {
        let (gt, _, _) = simulate_match(short(3, NoiseConfig::default())).unwrap();
        let text: String = gt.frames.iter().map(|f| serde_json::to_string(f).unwrap() + "\n").collect();
        let back: Vec<TruthFrame> = read_truth_frames(text.as_bytes()).collect::<Result<_, _>>().unwrap();
        for (a, b) in back.iter().zip(&gt.frames) {
            assert_eq!(a.persons, b.persons);
            assert!((a.homography - b.homography).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg =
            SimConfig { noise: NoiseConfig { miss_probability: 1.5, ..Default::default() }, ..Default::default() };
        assert!(matches!(MatchSimulator::new(cfg), Err(SimError::InvalidConfig(_))));
    }
}
