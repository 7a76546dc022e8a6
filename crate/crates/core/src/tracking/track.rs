use std::collections::VecDeque;

use super::kalman::KalmanState;
use crate::jersey::{NumberEstimate, NumberRules, NumberVotes};
use crate::model::{BoundingBox, DetectionClass};
use crate::team::{group_of_track, Group, GroupLabel, GroupVotes};

/// Number of recent centers kept for drawing motion tails.
pub const TAIL_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub class: DetectionClass,
    pub state: KalmanState,
    pub status: TrackStatus,
    pub hits: u32,
    pub age: u32,
    /// Frames since the last matched detection (0 right after an update).
    pub time_since_update: u32,
    gallery: VecDeque<Vec<f32>>,
    gallery_cap: usize,
    tail: VecDeque<(f64, f64)>,
    group_votes: GroupVotes,
    settled_group: Option<Group>,
    numbers: NumberVotes,
}

impl Track {
    pub(crate) fn new(id: u64, class: DetectionClass, state: KalmanState, gallery_cap: usize) -> Self {
        let mut t = Self {
            id,
            class,
            state,
            status: TrackStatus::Tentative,
            hits: 1,
            age: 1,
            time_since_update: 0,
            gallery: VecDeque::new(),
            gallery_cap,
            tail: VecDeque::with_capacity(TAIL_LEN),
            group_votes: GroupVotes::new(),
            settled_group: None,
            numbers: NumberVotes::new(),
        };
        t.push_tail();
        t
    }

    /// Consecutive frames without a match.
    pub fn misses(&self) -> u32 {
        self.time_since_update
    }

    pub fn bbox(&self) -> BoundingBox {
        self.state.bbox()
    }

    pub fn gallery(&self) -> impl Iterator<Item = &[f32]> {
        self.gallery.iter().map(Vec::as_slice)
    }

    pub fn gallery_len(&self) -> usize {
        self.gallery.len()
    }

    pub fn gallery_is_empty(&self) -> bool {
        self.gallery.is_empty()
    }

    pub(crate) fn push_embedding(&mut self, e: &[f32]) {
        if self.gallery_cap == 0 {
            return;
        }
        if self.gallery.len() == self.gallery_cap {
            // Reuse the evicted buffer.
            let mut old = self.gallery.pop_front().unwrap();
            old.clear();
            old.extend_from_slice(e);
            self.gallery.push_back(old);
        } else {
            self.gallery.push_back(e.to_vec());
        }
    }

    pub fn tail(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.tail.iter().copied()
    }

    pub(crate) fn push_tail(&mut self) {
        if self.tail.len() == TAIL_LEN {
            self.tail.pop_front();
        }
        self.tail.push_back((self.state.mean[0], self.state.mean[1]));
    }

    pub fn group(&self) -> GroupLabel {
        group_of_track(&self.group_votes)
    }

    /// Folds one per-frame group observation into the track's vote. When the
    /// confident majority flips to a different group the jersey votes are
    /// discarded, since they were most likely gathered on another player.
    pub(crate) fn record_group(&mut self, label: Option<&GroupLabel>, min_confidence: f64) {
        let Some(label) = label.filter(|l| l.group != Group::Unknown) else {
            return;
        };
        self.group_votes.add(label.group);
        let current = self.group();
        if current.is_confident(min_confidence) {
            if let Some(prev) = self.settled_group {
                if prev != current.group {
                    self.numbers.reset();
                }
            }
            self.settled_group = Some(current.group);
        }
    }

    pub(crate) fn record_number(&mut self, value: u32, confidence: f64) {
        // Out-of-range values were rejected during validation.
        let _ = self.numbers.add(value, confidence);
    }

    pub fn number(&self, rules: &NumberRules) -> NumberEstimate {
        self.numbers.infer(rules)
    }

    pub fn number_votes(&self) -> &NumberVotes {
        &self.numbers
    }
}
