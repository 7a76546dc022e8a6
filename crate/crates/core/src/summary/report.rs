use serde::{Deserialize, Serialize};

use super::control::{
    nearest_in_radius, rates_from_counts, ControlGrid, PlayerSample, PossessionRates, CONTROL_RADIUS_M,
};
use super::heatmap::{GridConfig, HeatmapGrid};
use crate::highlights::HighlightInterval;
use crate::team::Team;

/// Which position places a controlled frame on the zone grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlBasis {
    #[default]
    Ball,
    Player,
}

/// Online possession, heatmap and zone-control counters for one match.
#[derive(Debug, Clone)]
pub struct SummaryAccumulator {
    pub grid: GridConfig,
    pub radius_m: f64,
    pub basis: ControlBasis,
    frames: u64,
    previous: Option<Team>,
    team_a: u64,
    team_b: u64,
    heatmap: HeatmapGrid,
    control: ControlGrid,
}

impl SummaryAccumulator {
    pub fn new(grid: GridConfig, basis: ControlBasis) -> Self {
        Self {
            grid,
            radius_m: CONTROL_RADIUS_M,
            basis,
            frames: 0,
            previous: None,
            team_a: 0,
            team_b: 0,
            heatmap: HeatmapGrid::new(grid.cols, grid.rows),
            control: ControlGrid::new(grid.cols, grid.rows),
        }
    }

    /// Records one frame and returns its controlling team.
    pub fn observe(&mut self, ball: Option<(f64, f64)>, players: &[PlayerSample]) -> Option<Team> {
        self.frames += 1;
        let ball_cell = ball.and_then(|b| self.heatmap.add(&self.grid, b));
        let nearest = ball.and_then(|b| nearest_in_radius(b, players, self.radius_m));
        let controller = nearest.map(|(_, t)| t).or(self.previous);
        self.previous = controller;
        let team = controller?;
        match team {
            Team::A => self.team_a += 1,
            Team::B => self.team_b += 1,
        }
        let cell = match self.basis {
            ControlBasis::Ball => ball_cell,
            ControlBasis::Player => nearest.and_then(|(p, _)| self.grid.cell_of(p.pos)),
        };
        if let Some(c) = cell {
            self.control.add(team, c);
        }
        Some(team)
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn possession(&self) -> Option<PossessionRates> {
        rates_from_counts(self.team_a, self.team_b)
    }

    pub fn heatmap(&self) -> &HeatmapGrid {
        &self.heatmap
    }

    pub fn control(&self) -> &ControlGrid {
        &self.control
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PossessionField {
    Rates(PossessionRates),
    NoData(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSection {
    pub cols: usize,
    pub rows: usize,
    pub cell_length_m: f64,
    pub cell_width_m: f64,
    /// `counts[row][col]`, rows along the y axis.
    pub counts: Vec<Vec<u64>>,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneControl {
    pub cols: usize,
    pub rows: usize,
    pub basis: ControlBasis,
    pub team_a: Vec<Vec<f64>>,
    pub team_b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub track: u64,
    pub number: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Rosters {
    pub team_a: Vec<RosterEntry>,
    pub team_b: Vec<RosterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub frames: u64,
    pub possession: PossessionField,
    pub heatmap: HeatmapSection,
    pub control_by_zone: ZoneControl,
    pub highlights: Vec<HighlightInterval>,
    pub rosters: Rosters,
}

impl MatchSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn possession_rates(&self) -> Option<PossessionRates> {
        match self.possession {
            PossessionField::Rates(r) => Some(r),
            PossessionField::NoData(_) => None,
        }
    }
}

/// Assembles the summary. Rosters are sorted by track id.
pub fn build_summary(acc: &SummaryAccumulator, highlights: &[HighlightInterval], rosters: &Rosters) -> MatchSummary {
    let grid = &acc.grid;
    let control = acc.control();
    let fractions = |team_a: bool| -> Vec<Vec<f64>> {
        (0..grid.rows)
            .map(|r| {
                (0..grid.cols)
                    .map(|c| {
                        let (a, b) = control.fractions((c, r));
                        if team_a {
                            a
                        } else {
                            b
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mut rosters = rosters.clone();
    rosters.team_a.sort_by_key(|e| e.track);
    rosters.team_b.sort_by_key(|e| e.track);
    MatchSummary {
        frames: acc.frames(),
        possession: acc.possession().map_or_else(|| PossessionField::NoData("no data".into()), PossessionField::Rates),
        heatmap: HeatmapSection {
            cols: grid.cols,
            rows: grid.rows,
            cell_length_m: grid.length_m / grid.cols as f64,
            cell_width_m: grid.width_m / grid.rows as f64,
            counts: acc.heatmap().row_counts(),
            dropped: acc.heatmap().dropped,
        },
        control_by_zone: ZoneControl {
            cols: grid.cols,
            rows: grid.rows,
            basis: acc.basis,
            team_a: fractions(true),
            team_b: fractions(false),
        },
        highlights: highlights.to_vec(),
        rosters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highlights::HighlightClass;
    use crate::team::Group;

    #[test]
    fn empty_match() {
        let acc = SummaryAccumulator::new(GridConfig::default(), ControlBasis::Ball);
        let s = build_summary(&acc, &[], &Rosters::default());
        assert_eq!(s.possession, PossessionField::NoData("no data".into()));
        assert_eq!(s.heatmap.counts.len(), 14);
        assert!(s.heatmap.counts.iter().all(|r| r.len() == 21 && r.iter().all(|&c| c == 0)));
        let json = s.to_json();
        assert!(json.contains("\"possession\": \"no data\""));
        assert_eq!(MatchSummary::from_json(&json).unwrap().to_json(), json);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let mut acc = SummaryAccumulator::new(GridConfig::default(), ControlBasis::Ball);
        let players = [
            PlayerSample { track_id: 4, pos: (10.0, 10.0), group: Group::TeamA },
            PlayerSample { track_id: 7, pos: (80.0, 50.0), group: Group::TeamB },
        ];
        for i in 0..30 {
            let ball = if i % 3 == 0 { (10.5, 10.2) } else { (79.0 + i as f64 * 0.01, 50.3) };
            acc.observe(Some(ball), &players);
        }
        acc.observe(None, &players);
        let hl = [HighlightInterval { class: HighlightClass::Shooting, start_frame: 0, end_frame: 199 }];
        let rosters = Rosters {
            team_a: vec![RosterEntry { track: 9, number: Some(10) }, RosterEntry { track: 4, number: None }],
            team_b: vec![],
        };
        let s = build_summary(&acc, &hl, &rosters);
        assert_eq!(s.frames, 31);
        let r = s.possession_rates().unwrap();
        assert!((r.team_a + r.team_b - 1.0).abs() < 1e-12);
        assert_eq!(s.rosters.team_a[0].track, 4);
        let json = s.to_json();
        assert_eq!(MatchSummary::from_json(&json).unwrap().to_json(), json);
        assert_eq!(acc.heatmap().total(), 30);
    }

    #[test]
    fn player_basis_uses_controller_cell() {
        let mut acc = SummaryAccumulator::new(GridConfig::default(), ControlBasis::Player);
        let players = [PlayerSample { track_id: 1, pos: (4.0, 1.0), group: Group::TeamA }];
        acc.observe(Some((6.0, 1.0)), &players);
        assert_eq!(acc.control().counts((0, 0)), (1, 0));
        assert_eq!(acc.control().counts((1, 0)), (0, 0));
    }
}
