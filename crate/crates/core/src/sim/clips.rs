use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::ClipConfig;
use crate::highlights::{
    clip_span_frames, extract_highlight_intervals, ClipSample, HighlightClass, HighlightInterval, CLIP_ROWS,
};

/// Per-class feature means, pairwise about 10σ apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipPrototypes {
    means: Vec<Vec<f64>>,
    sigma: f64,
}

impl ClipPrototypes {
    pub fn new(config: &ClipConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.prototype_seed);
        // Random directions in high dimension are nearly orthogonal, so a
        // radius of 10σ/√2 puts every pair about 10σ apart.
        let radius = 10.0 * config.sigma / std::f64::consts::SQRT_2;
        let means = (0..HighlightClass::COUNT)
            .map(|_| {
                let v: Vec<f64> = (0..config.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| radius * x / n).collect()
            })
            .collect();
        Self { means, sigma: config.sigma }
    }

    pub fn mean(&self, class: HighlightClass) -> &[f64] {
        &self.means[class.index()]
    }

    /// Eight noisy per-second rows around the class mean.
    pub fn sample(&self, class: HighlightClass, start_frame: u64, rng: &mut ChaCha8Rng) -> ClipSample {
        let mean = self.mean(class);
        let features = (0..CLIP_ROWS)
            .map(|_| {
                mean.iter()
                    .map(|m| m + self.sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                    .collect()
            })
            .collect();
        ClipSample { start_frame, features, label: Some(class) }
    }
}

/// Label of every full clip in a match, in order.
pub fn clip_labels(duration_frames: u64, fps: u32, event_rate: f64, rng: &mut ChaCha8Rng) -> Vec<HighlightClass> {
    let n = (duration_frames / clip_span_frames(fps)) as usize;
    let mut labels = vec![HighlightClass::NormalPlay; n];
    let mut i = 0;
    while i < n {
        if rng.random_bool(event_rate) {
            let class = HighlightClass::ALL[rng.random_range(0..HighlightClass::COUNT - 1)];
            let len = rng.random_range(1..=2);
            for l in labels.iter_mut().skip(i).take(len) {
                *l = class;
            }
            i += len;
        } else {
            i += 1;
        }
    }
    labels
}

/// Event intervals implied by per-clip labels.
pub fn schedule_from_labels(labels: &[HighlightClass], fps: u32) -> Vec<HighlightInterval> {
    let span = clip_span_frames(fps);
    let per_clip: Vec<HighlightInterval> = labels
        .iter()
        .enumerate()
        .map(|(i, &class)| HighlightInterval {
            class,
            start_frame: i as u64 * span,
            end_frame: (i as u64 + 1) * span - 1,
        })
        .collect();
    extract_highlight_intervals(&per_clip)
}

/// Balanced labeled dataset, `per_class` clips of every class.
pub fn generate_clip_dataset(per_class: usize, config: &ClipConfig, seed: u64) -> Vec<ClipSample> {
    let protos = ClipPrototypes::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * HighlightClass::COUNT);
    for i in 0..per_class {
        for class in HighlightClass::ALL {
            out.push(protos.sample(class, (i * HighlightClass::COUNT + class.index()) as u64, &mut rng));
        }
    }
    out
}
