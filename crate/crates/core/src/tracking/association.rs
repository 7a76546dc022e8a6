//! Gated, age-cascaded association of tracks with detections.

use std::borrow::Borrow;

use super::assignment::{solve_assignment, AssociationResult, CostMatrix};
use super::kalman::KalmanFilter;
use super::track::{Track, TrackStatus};
use super::{AssociationMetric, TrackerConfig, TrackingError};
use crate::model::Detection;
use crate::team::GroupLabel;

/// Smallest cosine distance (1 − dot) between `query` and any gallery member.
pub fn appearance_distance<'a, I>(query: &[f32], gallery: I) -> Result<f64, TrackingError>
where
    I: IntoIterator<Item = &'a [f32]>,
{
    let mut best: Option<f32> = None;
    for member in gallery {
        if member.len() != query.len() {
            return Err(TrackingError::DimensionMismatch { expected: query.len(), found: member.len() });
        }
        let dot: f32 = member.iter().zip(query).map(|(a, b)| a * b).sum();
        let d = 1.0 - dot;
        best = Some(best.map_or(d, |b: f32| b.min(d)));
    }
    best.map(|d| f64::from(d).clamp(0.0, 2.0)).ok_or(TrackingError::EmptyGallery)
}

/// True when both sides carry confident group labels that disagree.
pub fn hard_gate_blocks(track: &GroupLabel, detection: Option<&GroupLabel>, min_confidence: f64) -> bool {
    match detection {
        Some(d) => track.is_confident(min_confidence) && d.is_confident(min_confidence) && track.group != d.group,
        None => false,
    }
}

struct Candidates<'a, D> {
    tracks: &'a [Track],
    detections: &'a [D],
    labels: &'a [Option<GroupLabel>],
    kf: &'a KalmanFilter,
    config: &'a TrackerConfig,
}

impl<D: Borrow<Detection>> Candidates<'_, D> {
    fn blocked(&self, t: usize, d: usize) -> bool {
        self.config.hard_gate
            && hard_gate_blocks(&self.tracks[t].group(), self.labels[d].as_ref(), self.config.hard_gate_min_confidence)
    }

    /// Cascade-stage cost: appearance (or motion) distance, masked by the
    /// Mahalanobis gate and the hard gate.
    fn gated_cost(&self, track_idx: &[usize], det_idx: &[usize]) -> Result<CostMatrix, TrackingError> {
        let mut cost = CostMatrix::new(track_idx.len(), det_idx.len(), f64::INFINITY);
        for (r, &t) in track_idx.iter().enumerate() {
            let track = &self.tracks[t];
            for (c, &d) in det_idx.iter().enumerate() {
                if self.blocked(t, d) {
                    continue;
                }
                let det: &Detection = self.detections[d].borrow();
                let gate = self.kf.gating_distance(&track.state, &det.bbox)?;
                if gate > self.config.gate_threshold {
                    continue;
                }
                let value = match self.config.metric {
                    AssociationMetric::Motion => gate,
                    AssociationMetric::Appearance => match &det.embedding {
                        Some(e) if !track.gallery_is_empty() => appearance_distance(e, track.gallery())?,
                        _ => continue,
                    },
                };
                cost.set(r, c, value);
            }
        }
        Ok(cost)
    }

    fn iou_cost(&self, track_idx: &[usize], det_idx: &[usize]) -> CostMatrix {
        let mut cost = CostMatrix::new(track_idx.len(), det_idx.len(), f64::INFINITY);
        for (r, &t) in track_idx.iter().enumerate() {
            let tb = self.tracks[t].state.bbox();
            for (c, &d) in det_idx.iter().enumerate() {
                if !self.blocked(t, d) {
                    cost.set(r, c, 1.0 - tb.iou(&self.detections[d].borrow().bbox));
                }
            }
        }
        cost
    }
}

fn stage_max_cost(config: &TrackerConfig) -> f64 {
    match config.metric {
        AssociationMetric::Appearance => config.appearance_gate,
        AssociationMetric::Motion => config.gate_threshold,
    }
}

/// Matching cascade followed by an IoU round.
///
/// Confirmed tracks are matched in order of increasing time since their
/// last update, so recently seen tracks claim detections first. Tentative
/// tracks and confirmed tracks missed for exactly one frame then compete
/// for the leftovers on `1 − IoU`. Row indices in the result refer to
/// `tracks`, column indices to `detections`.
pub fn cascade_match<D: Borrow<Detection>>(
    tracks: &[Track],
    detections: &[D],
    labels: &[Option<GroupLabel>],
    kf: &KalmanFilter,
    config: &TrackerConfig,
) -> Result<AssociationResult, TrackingError> {
    assert_eq!(detections.len(), labels.len(), "one label slot per detection");
    let cand = Candidates { tracks, detections, labels, kf, config };
    let max_cost = stage_max_cost(config);

    let mut matches = Vec::new();
    let mut unmatched_dets: Vec<usize> = (0..detections.len()).collect();
    let mut matched_track = vec![false; tracks.len()];

    for level in 1..=config.max_age {
        if unmatched_dets.is_empty() {
            break;
        }
        let level_tracks: Vec<usize> = (0..tracks.len())
            .filter(|&t| tracks[t].status == TrackStatus::Confirmed && tracks[t].time_since_update == level)
            .collect();
        if level_tracks.is_empty() {
            continue;
        }
        let cost = cand.gated_cost(&level_tracks, &unmatched_dets)?;
        let res = solve_assignment(&cost, max_cost);
        let mut taken = vec![false; unmatched_dets.len()];
        for (r, c) in res.matches {
            matches.push((level_tracks[r], unmatched_dets[c]));
            matched_track[level_tracks[r]] = true;
            taken[c] = true;
        }
        unmatched_dets = unmatched_dets.iter().zip(&taken).filter(|(_, &t)| !t).map(|(&d, _)| d).collect();
    }

    let mut iou_tracks = Vec::new();
    let mut unmatched_tracks = Vec::new();
    for (t, track) in tracks.iter().enumerate() {
        if matched_track[t] || track.status == TrackStatus::Deleted {
            continue;
        }
        if track.status == TrackStatus::Tentative || track.time_since_update == 1 {
            iou_tracks.push(t);
        } else {
            unmatched_tracks.push(t);
        }
    }

    let cost = cand.iou_cost(&iou_tracks, &unmatched_dets);
    let res = solve_assignment(&cost, config.iou_gate);
    for &(r, c) in &res.matches {
        matches.push((iou_tracks[r], unmatched_dets[c]));
    }
    unmatched_tracks.extend(res.unmatched_tracks.iter().map(|&r| iou_tracks[r]));
    let unmatched_detections: Vec<usize> = res.unmatched_detections.iter().map(|&c| unmatched_dets[c]).collect();

    matches.sort_unstable();
    unmatched_tracks.sort_unstable();
    let mut unmatched_detections = unmatched_detections;
    unmatched_detections.sort_unstable();
    Ok(AssociationResult { matches, unmatched_tracks, unmatched_detections })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f32]) -> Vec<f32> {
        let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn identical_vectors_distance_zero() {
        let a = unit(&[1.0, 2.0, 3.0]);
        assert!(appearance_distance(&a, [a.as_slice()]).unwrap().abs() < 1e-6);
    }

    #[test]
    fn orthogonal_vectors_distance_one() {
        let a = [1.0f32, 0.0];
        let b = [0.0f32, 1.0];
        assert!((appearance_distance(&a, [&b[..]]).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn min_over_gallery() {
        let q = unit(&[0.3, 0.4, 0.5]);
        let e1 = [1.0f32, 0.0, 0.0];
        assert!(appearance_distance(&q, [&e1[..], q.as_slice()]).unwrap() < 1e-6);
    }

    #[test]
    fn empty_gallery_and_mismatch() {
        let q = [1.0f32, 0.0];
        assert_eq!(appearance_distance(&q, std::iter::empty()), Err(TrackingError::EmptyGallery));
        assert!(matches!(
            appearance_distance(&q, [&[1.0f32, 0.0, 0.0][..]]),
            Err(TrackingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hard_gate_rule() {
        use crate::team::Group;
        let a = GroupLabel::new(Group::TeamA, 0.9);
        let b = GroupLabel::new(Group::TeamB, 0.9);
        let weak_b = GroupLabel::new(Group::TeamB, 0.6);
        assert!(hard_gate_blocks(&a, Some(&b), 0.7));
        assert!(!hard_gate_blocks(&a, Some(&a), 0.7));
        assert!(!hard_gate_blocks(&a, Some(&weak_b), 0.7));
        assert!(!hard_gate_blocks(&a, None, 0.7));
        assert!(!hard_gate_blocks(&GroupLabel::unknown(), Some(&b), 0.7));
    }

    mod cascade {
        use super::super::*;
        use crate::model::{BoundingBox, DetectionClass};
        use crate::team::Group;
        use crate::tracking::assignment::solve_assignment;

        fn track(id: u64, bbox: BoundingBox, tsu: u32, kf: &KalmanFilter) -> Track {
            let mut t = Track::new(id, DetectionClass::Player, kf.initiate(&bbox), 100);
            t.status = TrackStatus::Confirmed;
            t.time_since_update = tsu;
            t.push_embedding(&[1.0, 0.0]);
            t
        }

        fn det(bbox: BoundingBox, e: [f32; 2]) -> Detection {
            Detection::new(bbox, DetectionClass::Player, 0.9).with_embedding(e.to_vec())
        }

        fn b(x: f64) -> BoundingBox {
            BoundingBox::new(x, 100.0, 20.0, 50.0)
        }

        #[test]
        fn single_level_equals_one_assignment() {
            let kf = KalmanFilter::default();
            let cfg = TrackerConfig::default();
            let tracks: Vec<Track> = (0..3).map(|i| track(i, b(100.0 * i as f64), 1, &kf)).collect();
            let s = 0.05f32;
            let dets = vec![
                det(b(101.0), [1.0 - s, (2.0 * s).sqrt()]),
                det(b(199.0), [1.0, 0.0]),
                det(b(300.5), [(1.0 - 4.0 * s * s).sqrt(), 2.0 * s]),
            ];
            let labels = vec![None; 3];
            let got = cascade_match(&tracks, &dets, &labels, &kf, &cfg).unwrap();
            let cand = Candidates { tracks: &tracks, detections: &dets, labels: &labels, kf: &kf, config: &cfg };
            let cost = cand.gated_cost(&[0, 1, 2], &[0, 1, 2]).unwrap();
            let mut direct = solve_assignment(&cost, cfg.appearance_gate).matches;
            direct.sort_unstable();
            assert!(!direct.is_empty());
            assert_eq!(got.matches, direct);
        }

        #[test]
        fn younger_track_wins_ties() {
            let kf = KalmanFilter::default();
            let cfg = TrackerConfig::default();
            let tracks = vec![track(1, b(100.0), 5, &kf), track(2, b(100.0), 1, &kf)];
            let dets = vec![det(b(100.0), [1.0, 0.0])];
            let got = cascade_match(&tracks, &dets, &[None], &kf, &cfg).unwrap();
            assert_eq!(got.matches, vec![(1, 0)]);
            assert_eq!(got.unmatched_tracks, vec![0]);
        }

        #[test]
        fn confident_disagreeing_labels_never_match() {
            let kf = KalmanFilter::default();
            let cfg = TrackerConfig::default();
            let mut t = track(1, b(100.0), 1, &kf);
            for _ in 0..5 {
                t.record_group(Some(&GroupLabel::new(Group::TeamA, 0.9)), 0.7);
            }
            let dets = vec![det(b(100.0), [1.0, 0.0])];
            let got = cascade_match(&[t], &dets, &[Some(GroupLabel::new(Group::TeamB, 0.9))], &kf, &cfg).unwrap();
            assert!(got.matches.is_empty());
            assert_eq!(got.unmatched_detections, vec![0]);
        }
    }
}
