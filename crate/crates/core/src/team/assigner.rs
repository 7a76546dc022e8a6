//! Online team assignment over a stream of person detections.

use std::collections::VecDeque;

use super::feature::{extract_color_feature, FEATURE_DIM};
use super::grass::{estimate_grass_model, GrassModel};
use super::kmeans::{cluster_teams, KMeansConfig};
use super::labels::{label_clusters, Group, GroupLabel, LabelRules, MemberInfo};
use super::segment::segment_person;
use crate::model::{Detection, DetectionClass, FieldModel};
use crate::tracking::{solve_assignment, CostMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeamAssignerConfig {
    pub kmeans: KMeansConfig,
    /// Observations kept for clustering; the first fit waits until it is full.
    pub window: usize,
    /// Frames between re-fits on the current window.
    pub refresh_frames: u64,
    /// Pixels pooled from patches before the grass model is estimated.
    pub grass_sample_pixels: usize,
    pub min_foreground: f64,
    pub label_rules: LabelRules,
}

impl Default for TeamAssignerConfig {
    fn default() -> Self {
        Self {
            kmeans: KMeansConfig::default(),
            window: 3000,
            refresh_frames: 5000,
            grass_sample_pixels: 20_000,
            min_foreground: 0.05,
            label_rules: LabelRules::default(),
        }
    }
}

#[derive(Debug, Clone)]
struct Sample {
    feature: [f64; FEATURE_DIM],
    field_pos: Option<(f64, f64)>,
    detector_referee: bool,
}

#[derive(Debug, Clone)]
struct Fitted {
    centroids: Vec<Vec<f64>>,
    groups: Vec<Group>,
}

/// Grass model, feature window and current cluster-to-role mapping.
#[derive(Debug, Clone)]
pub struct TeamAssigner {
    config: TeamAssignerConfig,
    field: FieldModel,
    grass: Option<GrassModel>,
    grass_pixels: Vec<[u8; 3]>,
    window: VecDeque<Sample>,
    fitted: Option<Fitted>,
    last_fit_frame: u64,
    fits: usize,
}

impl TeamAssigner {
    pub fn new(config: TeamAssignerConfig, field: FieldModel) -> Self {
        Self {
            config,
            field,
            grass: None,
            grass_pixels: Vec::new(),
            window: VecDeque::with_capacity(config.window),
            fitted: None,
            last_fit_frame: 0,
            fits: 0,
        }
    }

    pub fn grass(&self) -> Option<&GrassModel> {
        self.grass.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    pub fn fit_count(&self) -> usize {
        self.fits
    }

    /// Current role of every cluster, in cluster order.
    pub fn cluster_groups(&self) -> Option<&[Group]> {
        self.fitted.as_ref().map(|f| f.groups.as_slice())
    }

    /// Feeds one detection and returns its label once a model exists.
    /// `field_pos` is the detection's ground point in field meters, if known.
    pub fn observe(&mut self, frame_index: u64, det: &Detection, field_pos: Option<(f64, f64)>) -> Option<GroupLabel> {
        if !det.class.is_person() {
            return None;
        }
        let patch = det.patch.as_ref()?;
        let Some(grass) = self.grass else {
            self.grass_pixels.extend(patch.pixels());
            if self.grass_pixels.len() >= self.config.grass_sample_pixels {
                // A failed estimate starts a fresh sample.
                self.grass = estimate_grass_model(&self.grass_pixels).ok();
                self.grass_pixels = Vec::new();
            }
            return None;
        };
        let mask = segment_person(patch, &grass);
        let feature = extract_color_feature(patch, &mask, self.config.min_foreground).ok()?.to_vector();

        if self.window.len() == self.config.window {
            self.window.pop_front();
        }
        self.window.push_back(Sample { feature, field_pos, detector_referee: det.class == DetectionClass::Referee });

        let due = match self.fitted {
            None => self.window.len() >= self.config.window,
            Some(_) => frame_index.saturating_sub(self.last_fit_frame) >= self.config.refresh_frames,
        };
        if due {
            self.fit(frame_index);
        }
        let fitted = self.fitted.as_ref()?;
        let (cluster, conf) = super::kmeans::nearest_two(&feature, &fitted.centroids);
        Some(GroupLabel::new(fitted.groups[cluster], conf))
    }

    fn fit(&mut self, frame_index: u64) {
        let features: Vec<&[f64]> = self.window.iter().map(|s| s.feature.as_slice()).collect();
        let Ok(clustering) = cluster_teams(&features, &self.config.kmeans) else {
            return;
        };
        self.last_fit_frame = frame_index;
        self.fits += 1;
        let members: Vec<MemberInfo> = self
            .window
            .iter()
            .zip(&clustering.assignment)
            .map(|(s, &cluster)| MemberInfo { cluster, field_pos: s.field_pos, detector_referee: s.detector_referee })
            .collect();
        let fresh = label_clusters(clustering.centroids.len(), &members, &self.field, &self.config.label_rules);
        let groups = match &self.fitted {
            // Keep roles stable across refits by matching new centroids to old ones.
            Some(old) => inherit_groups(&old.centroids, &old.groups, &clustering.centroids, &fresh),
            None => fresh,
        };
        self.fitted = Some(Fitted { centroids: clustering.centroids, groups });
    }
}

fn inherit_groups(old: &[Vec<f64>], old_groups: &[Group], new: &[Vec<f64>], fresh: &[Group]) -> Vec<Group> {
    let mut cost = CostMatrix::new(old.len(), new.len(), 0.0);
    for (i, a) in old.iter().enumerate() {
        for (j, b) in new.iter().enumerate() {
            cost.set(i, j, a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
        }
    }
    let result = solve_assignment(&cost, f64::INFINITY);
    let mut groups = fresh.to_vec();
    for (i, j) in result.matches {
        groups[j] = old_groups[i];
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{standard_field_model, BoundingBox, RgbPatch};

    const GREEN: [u8; 3] = [40, 150, 50];

    fn person(shirt: [u8; 3], shorts: [u8; 3], class: DetectionClass) -> Detection {
        let mut p = RgbPatch::filled(10, 16, GREEN);
        for r in 1..15 {
            for c in 3..7 {
                p.set_pixel(r, c, if r < 8 { shirt } else { shorts });
            }
        }
        let mut d = Detection::new(BoundingBox::new(0.0, 0.0, 10.0, 16.0), class, 0.9);
        d.patch = Some(p);
        d
    }

    #[test]
    fn labels_five_kits() {
        let cfg = TeamAssignerConfig { window: 200, grass_sample_pixels: 1600, ..Default::default() };
        let mut ta = TeamAssigner::new(cfg, standard_field_model());
        type Kit = ([u8; 3], [u8; 3], (f64, f64), DetectionClass);
        let kits: [Kit; 5] = [
            ([220, 20, 20], [250, 250, 250], (30.0, 30.0), DetectionClass::Player),
            ([20, 60, 220], [10, 10, 90], (70.0, 30.0), DetectionClass::Player),
            ([230, 230, 20], [230, 230, 20], (4.0, 34.0), DetectionClass::Player),
            ([220, 20, 220], [220, 20, 220], (101.0, 34.0), DetectionClass::Player),
            ([15, 15, 15], [15, 15, 15], (50.0, 40.0), DetectionClass::Referee),
        ];
        let expect = [Group::TeamA, Group::TeamB, Group::GoalkeeperA, Group::GoalkeeperB, Group::Referee];
        let mut last = Vec::new();
        for frame in 0..40u64 {
            last.clear();
            for (shirt, shorts, pos, class) in kits {
                let copies = if class == DetectionClass::Referee || pos.0 < 10.0 || pos.0 > 95.0 { 1 } else { 10 };
                for _ in 0..copies {
                    last.push(ta.observe(frame, &person(shirt, shorts, class), Some(pos)));
                }
            }
        }
        assert!(ta.is_fitted());
        assert!(ta.grass().is_some());
        let got: Vec<Group> = [0, 10, 20, 21, 22].iter().map(|&i| last[i].unwrap().group).collect();
        assert_eq!(got, expect);
        assert!(last.iter().all(|l| l.unwrap().confidence > 0.9));
    }

    #[test]
    fn refit_keeps_roles() {
        let old = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]];
        let groups = vec![Group::TeamA, Group::TeamB, Group::Referee];
        let new = vec![vec![0.1, 9.9], vec![0.2, 0.1], vec![9.8, 0.0]];
        let fresh = vec![Group::TeamA, Group::TeamB, Group::Referee];
        assert_eq!(inherit_groups(&old, &groups, &new, &fresh), vec![Group::Referee, Group::TeamA, Group::TeamB]);
    }
}
