use std::collections::HashMap;

use super::TruthFrame;
use crate::model::BoundingBox;
use crate::tracking::{solve_assignment, CostMatrix};

/// Minimum IoU for a ground-truth box and a track box to be matched.
pub const SCORE_IOU_GATE: f64 = 0.5;
/// Share of its frames a ground-truth identity must be matched in to count
/// as mostly tracked.
pub const MOSTLY_TRACKED: f64 = 0.8;

/// Identity the ball carries in scored ground truth.
pub const BALL_TRUTH_ID: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub id: u64,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrackMetrics {
    pub id_switches: usize,
    pub mostly_tracked: f64,
    /// RMS distance between matched box centers, pixels.
    pub position_rmse_px: f64,
    pub matched: usize,
    pub ground_truth_boxes: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct IdentityStats {
    frames: usize,
    matched: usize,
    last_track: Option<u64>,
    switches: usize,
}

/// Streaming tracker scoring against ground truth.
#[derive(Debug, Clone, Default)]
pub struct TrackScorer {
    stats: HashMap<u64, IdentityStats>,
    sq_err: f64,
    matched: usize,
    gt_boxes: usize,
}

impl TrackScorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Matches one frame's boxes. A ground-truth identity keeps last
    /// frame's track while their IoU stays above the gate; the remaining
    /// boxes are matched by minimum `1 − IoU` under the gate.
    pub fn add_frame(&mut self, truth: &[ScoredBox], tracks: &[ScoredBox]) {
        self.gt_boxes += truth.len();
        let mut matches = Vec::with_capacity(truth.len());
        let mut truth_free = vec![true; truth.len()];
        let mut track_free = vec![true; tracks.len()];
        for (i, g) in truth.iter().enumerate() {
            let Some(prev) = self.stats.get(&g.id).and_then(|s| s.last_track) else { continue };
            if let Some(j) = tracks.iter().position(|t| t.id == prev) {
                if track_free[j] && g.bbox.iou(&tracks[j].bbox) >= SCORE_IOU_GATE {
                    matches.push((i, j));
                    truth_free[i] = false;
                    track_free[j] = false;
                }
            }
        }
        let rest_truth: Vec<usize> = (0..truth.len()).filter(|&i| truth_free[i]).collect();
        let rest_tracks: Vec<usize> = (0..tracks.len()).filter(|&j| track_free[j]).collect();
        let mut cost = CostMatrix::new(rest_truth.len(), rest_tracks.len(), f64::INFINITY);
        for (a, &i) in rest_truth.iter().enumerate() {
            for (b, &j) in rest_tracks.iter().enumerate() {
                let iou = truth[i].bbox.iou(&tracks[j].bbox);
                if iou >= SCORE_IOU_GATE {
                    cost.set(a, b, 1.0 - iou);
                }
            }
        }
        let result = solve_assignment(&cost, 1.0 - SCORE_IOU_GATE);
        matches.extend(result.matches.into_iter().map(|(a, b)| (rest_truth[a], rest_tracks[b])));

        for g in truth {
            self.stats.entry(g.id).or_default().frames += 1;
        }
        for (i, j) in matches {
            let (g, t) = (&truth[i], &tracks[j]);
            let s = self.stats.get_mut(&g.id).expect("inserted above");
            s.matched += 1;
            if s.last_track.is_some_and(|prev| prev != t.id) {
                s.switches += 1;
            }
            s.last_track = Some(t.id);
            let (a, b) = (g.bbox.center(), t.bbox.center());
            self.sq_err += (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
            self.matched += 1;
        }
    }

    /// ID switches per ground-truth identity, ordered by identity.
    pub fn switches_by_identity(&self) -> Vec<(u64, usize)> {
        let mut v: Vec<(u64, usize)> = self.stats.iter().map(|(&id, s)| (id, s.switches)).collect();
        v.sort_unstable();
        v
    }

    pub fn finish(&self) -> TrackMetrics {
        let n = self.stats.len();
        let mostly = self.stats.values().filter(|s| s.matched as f64 >= MOSTLY_TRACKED * s.frames as f64).count();
        TrackMetrics {
            id_switches: self.stats.values().map(|s| s.switches).sum(),
            mostly_tracked: if n == 0 { 1.0 } else { mostly as f64 / n as f64 },
            position_rmse_px: if self.matched == 0 { 0.0 } else { (self.sq_err / self.matched as f64).sqrt() },
            matched: self.matched,
            ground_truth_boxes: self.gt_boxes,
        }
    }
}

/// Ground-truth boxes of one frame, ball included.
pub fn truth_boxes(frame: &TruthFrame) -> Vec<ScoredBox> {
    frame
        .persons
        .iter()
        .map(|p| ScoredBox { id: p.id, bbox: p.bbox })
        .chain(std::iter::once(ScoredBox { id: BALL_TRUTH_ID, bbox: frame.ball.bbox }))
        .collect()
}

/// Scores frame-aligned sequences of ground-truth and tracker boxes.
pub fn score_tracks(truth: &[Vec<ScoredBox>], tracks: &[Vec<ScoredBox>]) -> TrackMetrics {
    let mut scorer = TrackScorer::new();
    for (g, t) in truth.iter().zip(tracks) {
        scorer.add_frame(g, t);
    }
    scorer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(n: usize, ids: impl Fn(usize, u64) -> u64) -> (Vec<Vec<ScoredBox>>, Vec<Vec<ScoredBox>>) {
        let mut g = Vec::new();
        let mut t = Vec::new();
        for f in 0..n {
            let boxes: Vec<ScoredBox> = (1..=3u64)
                .map(|id| ScoredBox { id, bbox: BoundingBox::new(100.0 * id as f64 + f as f64, 50.0, 10.0, 30.0) })
                .collect();
            t.push(boxes.iter().map(|b| ScoredBox { id: ids(f, b.id), bbox: b.bbox }).collect());
            g.push(boxes);
        }
        (g, t)
    }

    #[test]
    fn perfect_tracking() {
        let (g, t) = frames(20, |_, id| id);
        let m = score_tracks(&g, &t);
        assert_eq!(m.id_switches, 0);
        assert_eq!(m.mostly_tracked, 1.0);
        assert_eq!(m.position_rmse_px, 0.0);
    }

    #[test]
    fn swap_and_back_counts_two_per_identity() {
        let (g, t) = frames(10, |f, id| if f == 5 && id <= 2 { 3 - id } else { id });
        assert_eq!(score_tracks(&g, &t).id_switches, 4);
    }

    #[test]
    fn unmatched_frames_do_not_break_continuity() {
        let (g, mut t) = frames(10, |_, id| id);
        for frame in t.iter_mut().take(7).skip(3) {
            frame.clear();
        }
        let m = score_tracks(&g, &t);
        assert_eq!(m.id_switches, 0);
        assert_eq!(m.mostly_tracked, 0.0);
    }

    #[test]
    fn overlapping_pair_keeps_previous_matches() {
        let a = BoundingBox::new(100.0, 50.0, 10.0, 30.0);
        let b = BoundingBox::new(101.0, 50.0, 10.0, 30.0);
        let mut scorer = TrackScorer::new();
        scorer.add_frame(&[ScoredBox { id: 1, bbox: a }], &[ScoredBox { id: 10, bbox: a }]);
        scorer.add_frame(&[ScoredBox { id: 2, bbox: b }], &[ScoredBox { id: 20, bbox: b }]);
        // Track 20 now sits slightly closer to identity 1 than track 10 does.
        let truth = [ScoredBox { id: 1, bbox: a }, ScoredBox { id: 2, bbox: b }];
        let tracks = [
            ScoredBox { id: 10, bbox: BoundingBox::new(101.5, 50.0, 10.0, 30.0) },
            ScoredBox { id: 20, bbox: BoundingBox::new(100.2, 50.0, 10.0, 30.0) },
        ];
        scorer.add_frame(&truth, &tracks);
        assert_eq!(scorer.finish().id_switches, 0);
    }

    #[test]
    fn random_relabeling_matches_direct_count() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n_ids = 6u64;
        let n_frames = 40;
        let perms: Vec<Vec<u64>> = (0..n_frames)
            .map(|_| {
                let mut p: Vec<u64> = (100..100 + n_ids).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        let g: Vec<Vec<ScoredBox>> = (0..n_frames)
            .map(|f| {
                (1..=n_ids)
                    .map(|id| ScoredBox { id, bbox: BoundingBox::new(50.0 * id as f64, f as f64, 10.0, 30.0) })
                    .collect()
            })
            .collect();
        let t: Vec<Vec<ScoredBox>> = g
            .iter()
            .zip(&perms)
            .map(|(frame, p)| frame.iter().map(|b| ScoredBox { id: p[(b.id - 1) as usize], bbox: b.bbox }).collect())
            .collect();
        let mut expected = 0;
        for f in 1..n_frames {
            expected += perms[f].iter().zip(&perms[f - 1]).filter(|(a, b)| a != b).count();
        }
        assert_eq!(score_tracks(&g, &t).id_switches, expected);
    }
}
