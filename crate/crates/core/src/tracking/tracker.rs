use std::borrow::Borrow;

use super::assignment::AssociationResult;
use super::association::cascade_match;
use super::kalman::KalmanFilter;
use super::track::{Track, TrackStatus};
use super::{TrackerConfig, TrackingError};
use crate::jersey::NumberEstimate;
use crate::model::{BoundingBox, Detection, DetectionClass, ValidatedFrame};
use crate::team::GroupLabel;

/// Hands out match-unique track ids.
#[derive(Debug, Clone)]
pub struct TrackIdAllocator {
    next: u64,
}

impl Default for TrackIdAllocator {
    fn default() -> Self {
        Self { next: 1 }
    }
}

impl TrackIdAllocator {
    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

/// Multi-object tracker for one object category.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    kf: KalmanFilter,
    tracks: Vec<Track>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        let kf = KalmanFilter::default().with_process_scale(config.process_scale);
        Self { config, kf, tracks: Vec::new() }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn kalman(&self) -> &KalmanFilter {
        &self.kf
    }

    pub fn predict(&mut self) {
        for t in &mut self.tracks {
            t.state = self.kf.predict(&t.state);
            t.age += 1;
            t.time_since_update += 1;
        }
    }

    /// Associates `detections` with the (already predicted) tracks and
    /// applies the lifecycle rules. `labels[i]` is the group observed for
    /// `detections[i]`, if any.
    pub fn update<D: Borrow<Detection>>(
        &mut self,
        detections: &[D],
        labels: &[Option<GroupLabel>],
        ids: &mut TrackIdAllocator,
    ) -> Result<AssociationResult, TrackingError> {
        let result = cascade_match(&self.tracks, detections, labels, &self.kf, &self.config)?;

        for &(t, d) in &result.matches {
            let det: &Detection = detections[d].borrow();
            let track = &mut self.tracks[t];
            track.state = self.kf.update(&track.state, &det.bbox)?;
            track.hits += 1;
            track.time_since_update = 0;
            track.class = det.class;
            if let Some(e) = &det.embedding {
                track.push_embedding(e);
            }
            track.record_group(labels[d].as_ref(), self.config.hard_gate_min_confidence);
            if let Some(n) = det.number_obs {
                track.record_number(n.value, n.conf);
            }
            if track.status == TrackStatus::Tentative && track.hits >= self.config.n_init {
                track.status = TrackStatus::Confirmed;
            }
        }
        for &t in &result.unmatched_tracks {
            let track = &mut self.tracks[t];
            if track.status == TrackStatus::Tentative || track.time_since_update > self.config.max_age {
                track.status = TrackStatus::Deleted;
            }
        }
        for t in &mut self.tracks {
            t.push_tail();
        }
        for &d in &result.unmatched_detections {
            let det: &Detection = detections[d].borrow();
            let mut track = Track::new(ids.next_id(), det.class, self.kf.initiate(&det.bbox), self.config.gallery_cap);
            if let Some(e) = &det.embedding {
                track.push_embedding(e);
            }
            track.record_group(labels[d].as_ref(), self.config.hard_gate_min_confidence);
            if let Some(n) = det.number_obs {
                track.record_number(n.value, n.conf);
            }
            if self.config.n_init <= 1 {
                track.status = TrackStatus::Confirmed;
            }
            self.tracks.push(track);
        }
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);
        Ok(result)
    }

    pub fn step<D: Borrow<Detection>>(
        &mut self,
        detections: &[D],
        labels: &[Option<GroupLabel>],
        ids: &mut TrackIdAllocator,
    ) -> Result<AssociationResult, TrackingError> {
        self.predict();
        self.update(detections, labels, ids)
    }
}

/// Per-frame view of one track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSnapshot {
    pub id: u64,
    pub class: DetectionClass,
    pub bbox: BoundingBox,
    pub group: GroupLabel,
    pub number: NumberEstimate,
    pub tail: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTracks {
    pub frame_index: u64,
    /// Confirmed person tracks updated in this frame.
    pub persons: Vec<TrackSnapshot>,
    pub ball: Option<TrackSnapshot>,
}

/// Tracking state for a whole match: people and the ball, sharing one id
/// space.
#[derive(Debug, Clone)]
pub struct TrackerState {
    persons: Tracker,
    ball: Tracker,
    ids: TrackIdAllocator,
    last_frame: Option<u64>,
}

impl TrackerState {
    pub fn new(persons: TrackerConfig, ball: TrackerConfig) -> Self {
        Self {
            persons: Tracker::new(persons),
            ball: Tracker::new(ball),
            ids: TrackIdAllocator::default(),
            last_frame: None,
        }
    }

    pub fn persons(&self) -> &Tracker {
        &self.persons
    }

    pub fn ball(&self) -> &Tracker {
        &self.ball
    }

    /// Advances both trackers by one frame. `labels` is aligned with the
    /// frame's detections; entries for ball detections are ignored.
    pub fn step(
        &mut self,
        frame: &ValidatedFrame,
        labels: &[Option<GroupLabel>],
    ) -> Result<FrameTracks, TrackingError> {
        let index = frame.frame_index();
        if let Some(last) = self.last_frame {
            if index <= last {
                return Err(TrackingError::OutOfOrderFrame(index));
            }
        }
        self.last_frame = Some(index);
        let dets = frame.detections();
        assert_eq!(dets.len(), labels.len(), "one label slot per detection");

        let (mut person_dets, mut person_labels) = (Vec::new(), Vec::new());
        let mut ball_dets = Vec::new();
        for (d, l) in dets.iter().zip(labels) {
            if d.class.is_person() {
                person_dets.push(d);
                person_labels.push(*l);
            } else {
                ball_dets.push(d);
            }
        }
        let ball_labels = vec![None; ball_dets.len()];

        self.persons.step(&person_dets, &person_labels, &mut self.ids)?;
        self.ball.step(&ball_dets, &ball_labels, &mut self.ids)?;

        let rules = self.persons.config().number_rules;
        let snapshot = |t: &Track| TrackSnapshot {
            id: t.id,
            class: t.class,
            bbox: t.bbox(),
            group: t.group(),
            number: t.number(&rules),
            tail: t.tail().collect(),
        };
        let persons = self
            .persons
            .tracks()
            .iter()
            .filter(|t| t.status == TrackStatus::Confirmed && t.time_since_update == 0)
            .map(snapshot)
            .collect();
        let ball = self
            .ball
            .tracks()
            .iter()
            .filter(|t| t.time_since_update == 0)
            .max_by(|a, b| {
                (a.status == TrackStatus::Confirmed)
                    .cmp(&(b.status == TrackStatus::Confirmed))
                    .then(a.hits.cmp(&b.hits))
                    .then(b.id.cmp(&a.id))
            })
            .map(snapshot);
        Ok(FrameTracks { frame_index: index, persons, ball })
    }
}
