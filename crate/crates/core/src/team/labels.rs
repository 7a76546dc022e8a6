use serde::{Deserialize, Serialize};

use crate::model::FieldModel;

/// Role a person plays on the pitch, as inferred from kit color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    TeamA,
    TeamB,
    Referee,
    GoalkeeperA,
    GoalkeeperB,
    Unknown,
}

impl Group {
    pub const ALL: [Group; 6] =
        [Group::TeamA, Group::TeamB, Group::Referee, Group::GoalkeeperA, Group::GoalkeeperB, Group::Unknown];

    fn index(self) -> usize {
        Group::ALL.iter().position(|&g| g == self).unwrap()
    }

    /// The side this role plays for; goalkeepers count for their team.
    pub fn team(self) -> Option<Team> {
        match self {
            Group::TeamA | Group::GoalkeeperA => Some(Team::A),
            Group::TeamB | Group::GoalkeeperB => Some(Team::B),
            Group::Referee | Group::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::TeamA => "team_a",
            Group::TeamB => "team_b",
            Group::Referee => "referee",
            Group::GoalkeeperA => "goalkeeper_a",
            Group::GoalkeeperB => "goalkeeper_b",
            Group::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Team {
    A,
    B,
}

impl Team {
    pub fn other(self) -> Team {
        match self {
            Team::A => Team::B,
            Team::B => Team::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupLabel {
    pub group: Group,
    pub confidence: f64,
}

impl GroupLabel {
    pub fn new(group: Group, confidence: f64) -> Self {
        if group == Group::Unknown {
            Self::unknown()
        } else {
            Self { group, confidence: confidence.clamp(0.0, 1.0) }
        }
    }

    pub fn unknown() -> Self {
        Self { group: Group::Unknown, confidence: 0.0 }
    }

    pub fn is_confident(&self, min_confidence: f64) -> bool {
        self.group != Group::Unknown && self.confidence >= min_confidence
    }
}

/// Per-track tally of per-frame group observations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupVotes {
    counts: [u32; 6],
}

impl GroupVotes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, group: Group) {
        self.counts[group.index()] += 1;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn count(&self, group: Group) -> u32 {
        self.counts[group.index()]
    }
}

/// Majority vote over a track's observations; ties resolve in declaration
/// order. Confidence is the majority fraction.
pub fn group_of_track(votes: &GroupVotes) -> GroupLabel {
    let total = votes.total();
    if total == 0 {
        return GroupLabel::unknown();
    }
    let (best, n) =
        Group::ALL
            .iter()
            .map(|&g| (g, votes.count(g)))
            .fold((Group::Unknown, 0), |acc, (g, c)| if c > acc.1 { (g, c) } else { acc });
    GroupLabel::new(best, f64::from(n) / f64::from(total))
}

/// Tunables for turning clusters into roles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRules {
    /// A goalkeeper cluster's mean position must be this close to its goal line.
    pub goalkeeper_max_depth_m: f64,
}

impl Default for LabelRules {
    fn default() -> Self {
        Self { goalkeeper_max_depth_m: 25.0 }
    }
}

/// Evidence about one clustered observation used for labeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberInfo {
    pub cluster: usize,
    pub field_pos: Option<(f64, f64)>,
    pub detector_referee: bool,
}

/// Maps each of `k` clusters to a role.
///
/// The two largest clusters are the teams, team A being the one with the
/// smaller mean x. Among the rest, the cluster sitting nearest each goal
/// line is that side's goalkeeper; everything left over is the referee.
/// The detector's referee class only settles leftovers that the position
/// rule cannot separate.
pub fn label_clusters(k: usize, members: &[MemberInfo], field: &FieldModel, rules: &LabelRules) -> Vec<Group> {
    let mut size = vec![0usize; k];
    let mut pos_sum = vec![(0.0f64, 0usize); k];
    let mut referee_hits = vec![0usize; k];
    for m in members {
        if m.cluster >= k {
            continue;
        }
        size[m.cluster] += 1;
        if let Some((x, _)) = m.field_pos {
            pos_sum[m.cluster].0 += x;
            pos_sum[m.cluster].1 += 1;
        }
        if m.detector_referee {
            referee_hits[m.cluster] += 1;
        }
    }
    let mean_x = |c: usize| (pos_sum[c].1 > 0).then(|| pos_sum[c].0 / pos_sum[c].1 as f64);

    let mut labels = vec![Group::Unknown; k];
    let mut order: Vec<usize> = (0..k).filter(|&c| size[c] > 0).collect();
    order.sort_by(|&a, &b| size[b].cmp(&size[a]).then(a.cmp(&b)));

    if order.len() >= 2 {
        let (c0, c1) = (order[0], order[1]);
        let a_first = match (mean_x(c0), mean_x(c1)) {
            (Some(x0), Some(x1)) => x0 <= x1,
            _ => true,
        };
        let (a, b) = if a_first { (c0, c1) } else { (c1, c0) };
        labels[a] = Group::TeamA;
        labels[b] = Group::TeamB;
    } else if let Some(&c) = order.first() {
        labels[c] = Group::TeamA;
    }

    let mut rest: Vec<usize> = order.iter().skip(2).copied().collect();
    let positioned: Vec<(usize, f64)> = rest.iter().filter_map(|&c| mean_x(c).map(|x| (c, x))).collect();

    let keeper_a = positioned
        .iter()
        .filter(|&&(_, x)| x <= rules.goalkeeper_max_depth_m)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(c, _)| c);
    if let Some(c) = keeper_a {
        labels[c] = Group::GoalkeeperA;
    }
    let keeper_b = positioned
        .iter()
        .filter(|&&(c, x)| Some(c) != keeper_a && field.length_m - x <= rules.goalkeeper_max_depth_m)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(c, _)| c);
    if let Some(c) = keeper_b {
        labels[c] = Group::GoalkeeperB;
    }
    rest.retain(|&c| Some(c) != keeper_a && Some(c) != keeper_b);

    let have_positions = !positioned.is_empty();
    let referee_frac = |c: usize| referee_hits[c] as f64 / size[c] as f64;
    if rest.len() == 1 && have_positions {
        labels[rest[0]] = Group::Referee;
    } else if !rest.is_empty() {
        let flagged: Vec<usize> = rest.iter().copied().filter(|&c| referee_frac(c) >= 0.5).collect();
        if !flagged.is_empty() {
            for c in flagged {
                labels[c] = Group::Referee;
            }
        } else if have_positions {
            for c in rest {
                labels[c] = Group::Referee;
            }
        } else if let Some(&c) = rest.iter().max_by(|&&a, &&b| referee_hits[a].cmp(&referee_hits[b]).then(b.cmp(&a))) {
            if referee_hits[c] > 0 {
                labels[c] = Group::Referee;
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::standard_field_model;

    #[test]
    fn unanimous_vote() {
        let mut v = GroupVotes::new();
        for _ in 0..7 {
            v.add(Group::TeamA);
        }
        assert_eq!(group_of_track(&v), GroupLabel::new(Group::TeamA, 1.0));
    }

    #[test]
    fn six_four_vote() {
        let mut v = GroupVotes::new();
        for _ in 0..6 {
            v.add(Group::TeamA);
        }
        for _ in 0..4 {
            v.add(Group::TeamB);
        }
        let l = group_of_track(&v);
        assert_eq!(l.group, Group::TeamA);
        assert!((l.confidence - 0.6).abs() < 1e-12);
    }

    #[test]
    fn no_votes_is_unknown() {
        let l = group_of_track(&GroupVotes::new());
        assert_eq!(l.group, Group::Unknown);
        assert_eq!(l.confidence, 0.0);
    }

    fn members(sizes: &[(usize, usize, f64)]) -> Vec<MemberInfo> {
        let mut out = Vec::new();
        for &(cluster, n, x) in sizes {
            for _ in 0..n {
                out.push(MemberInfo { cluster, field_pos: Some((x, 34.0)), detector_referee: false });
            }
        }
        out
    }

    #[test]
    fn largest_clusters_are_teams() {
        let m = members(&[(0, 1, 50.0), (1, 10, 60.0), (2, 1, 5.0), (3, 9, 40.0), (4, 1, 100.0)]);
        let l = label_clusters(5, &m, &standard_field_model(), &LabelRules::default());
        assert_eq!(l[3], Group::TeamA);
        assert_eq!(l[1], Group::TeamB);
        assert_eq!(l[2], Group::GoalkeeperA);
        assert_eq!(l[4], Group::GoalkeeperB);
        assert_eq!(l[0], Group::Referee);
    }

    #[test]
    fn singleton_near_left_goal_is_keeper_a() {
        let m = members(&[(0, 10, 40.0), (1, 9, 60.0), (2, 1, 8.0), (3, 1, 52.0), (4, 1, 55.0)]);
        let l = label_clusters(5, &m, &standard_field_model(), &LabelRules::default());
        assert_eq!(l[2], Group::GoalkeeperA);
        assert_eq!(l[3], Group::Referee);
        assert_eq!(l[4], Group::Referee);
    }

    #[test]
    fn detector_referee_breaks_ties_without_positions() {
        let mut m: Vec<MemberInfo> = (0..5)
            .flat_map(|c| {
                let n = [10, 9, 2, 2, 2][c];
                std::iter::repeat_n(MemberInfo { cluster: c, field_pos: None, detector_referee: false }, n)
            })
            .collect();
        for mi in m.iter_mut().filter(|mi| mi.cluster == 3) {
            mi.detector_referee = true;
        }
        let l = label_clusters(5, &m, &standard_field_model(), &LabelRules::default());
        assert_eq!(l[0], Group::TeamA);
        assert_eq!(l[1], Group::TeamB);
        assert_eq!(l[3], Group::Referee);
        assert_eq!(l[2], Group::Unknown);
        assert_eq!(l[4], Group::Unknown);
    }

    #[test]
    fn goalkeepers_count_for_their_team() {
        assert_eq!(Group::GoalkeeperA.team(), Some(Team::A));
        assert_eq!(Group::GoalkeeperB.team(), Some(Team::B));
        assert_eq!(Group::Referee.team(), None);
    }
}
