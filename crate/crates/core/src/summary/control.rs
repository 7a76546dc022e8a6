use serde::{Deserialize, Serialize};

use crate::team::{Group, Team};

/// Contact radius for attributing the ball to a player.
pub const CONTROL_RADIUS_M: f64 = 3.0;

/// One player's ground position and role in a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerSample {
    pub track_id: u64,
    pub pos: (f64, f64),
    pub group: Group,
}

/// Team of the nearest player within `radius` of the ball, else `previous`.
/// Goalkeepers count for their team; referees and unlabeled players are
/// ignored. Equal distances go to the lower track id.
pub fn frame_controller(
    ball: Option<(f64, f64)>,
    players: &[PlayerSample],
    previous: Option<Team>,
    radius: f64,
) -> Option<Team> {
    match ball {
        Some(ball) => nearest_in_radius(ball, players, radius).map(|(_, t)| t).or(previous),
        None => previous,
    }
}

/// Nearest team player within `radius` of the ball, with their team.
pub(crate) fn nearest_in_radius(
    ball: (f64, f64),
    players: &[PlayerSample],
    radius: f64,
) -> Option<(&PlayerSample, Team)> {
    let mut best: Option<(f64, &PlayerSample, Team)> = None;
    for p in players {
        let Some(team) = p.group.team() else {
            continue;
        };
        let d = (p.pos.0 - ball.0).hypot(p.pos.1 - ball.1);
        if d > radius {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bp, _)) => d < bd || (d == bd && p.track_id < bp.track_id),
        };
        if better {
            best = Some((d, p, team));
        }
    }
    best.map(|(_, p, t)| (p, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PossessionRates {
    pub team_a: f64,
    pub team_b: f64,
}

/// Share of attributed frames per team; `None` when no frame is attributed.
pub fn possession_rates(controllers: impl IntoIterator<Item = Option<Team>>) -> Option<PossessionRates> {
    let (mut a, mut b) = (0u64, 0u64);
    for c in controllers.into_iter().flatten() {
        match c {
            Team::A => a += 1,
            Team::B => b += 1,
        }
    }
    rates_from_counts(a, b)
}

pub(crate) fn rates_from_counts(a: u64, b: u64) -> Option<PossessionRates> {
    let total = a + b;
    (total > 0).then(|| PossessionRates { team_a: a as f64 / total as f64, team_b: b as f64 / total as f64 })
}

/// Per-cell counts of frames controlled by each team.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlGrid {
    pub cols: usize,
    pub rows: usize,
    team_a: Vec<u64>,
    team_b: Vec<u64>,
}

impl ControlGrid {
    pub fn new(cols: usize, rows: usize) -> Self {
        Self { cols, rows, team_a: vec![0; cols * rows], team_b: vec![0; cols * rows] }
    }

    pub fn add(&mut self, team: Team, cell: (usize, usize)) {
        let i = cell.1 * self.cols + cell.0;
        match team {
            Team::A => self.team_a[i] += 1,
            Team::B => self.team_b[i] += 1,
        }
    }

    pub fn counts(&self, cell: (usize, usize)) -> (u64, u64) {
        let i = cell.1 * self.cols + cell.0;
        (self.team_a[i], self.team_b[i])
    }

    /// Team fractions in a cell; both zero when nothing was counted there.
    pub fn fractions(&self, cell: (usize, usize)) -> (f64, f64) {
        let (a, b) = self.counts(cell);
        rates_from_counts(a, b).map_or((0.0, 0.0), |r| (r.team_a, r.team_b))
    }
}

/// Accumulates per-frame `(controller, cell)` pairs. Frames without a
/// controller or a cell are skipped.
pub fn control_distribution(
    cols: usize,
    rows: usize,
    frames: impl IntoIterator<Item = (Option<Team>, Option<(usize, usize)>)>,
) -> ControlGrid {
    let mut grid = ControlGrid::new(cols, rows);
    for (team, cell) in frames {
        if let (Some(t), Some(c)) = (team, cell) {
            grid.add(t, c);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: u64, x: f64, group: Group) -> PlayerSample {
        PlayerSample { track_id: id, pos: (x, 0.0), group }
    }

    #[test]
    fn nearest_within_radius() {
        let players = [p(1, 1.0, Group::TeamA), p(2, 5.0, Group::TeamB)];
        assert_eq!(frame_controller(Some((0.0, 0.0)), &players, None, 3.0), Some(Team::A));
    }

    #[test]
    fn carry_over_when_nobody_close() {
        let players = [p(1, 4.0, Group::TeamA)];
        assert_eq!(frame_controller(Some((0.0, 0.0)), &players, Some(Team::B), 3.0), Some(Team::B));
        assert_eq!(frame_controller(None, &players, Some(Team::B), 3.0), Some(Team::B));
        assert_eq!(frame_controller(Some((0.0, 0.0)), &players, None, 3.0), None);
    }

    #[test]
    fn tie_goes_to_lower_id() {
        let players = [p(9, 2.0, Group::TeamA), p(3, -2.0, Group::TeamB)];
        assert_eq!(frame_controller(Some((0.0, 0.0)), &players, None, 3.0), Some(Team::B));
    }

    #[test]
    fn referee_ignored_keeper_counts() {
        let players = [p(1, 0.5, Group::Referee), p(2, 1.0, Group::GoalkeeperB), p(3, 1.5, Group::TeamA)];
        assert_eq!(frame_controller(Some((0.0, 0.0)), &players, None, 3.0), Some(Team::B));
    }

    #[test]
    fn rates() {
        assert_eq!(possession_rates(vec![Some(Team::A); 10]), Some(PossessionRates { team_a: 1.0, team_b: 0.0 }));
        let mixed = std::iter::repeat_n(Some(Team::A), 300).chain(std::iter::repeat_n(Some(Team::B), 300));
        assert_eq!(possession_rates(mixed.chain([None])), Some(PossessionRates { team_a: 0.5, team_b: 0.5 }));
        assert_eq!(possession_rates(vec![None, None]), None);
    }

    #[test]
    fn zone_fractions() {
        let frames = vec![
            (Some(Team::A), Some((0, 0))),
            (Some(Team::A), Some((0, 0))),
            (Some(Team::B), Some((0, 0))),
            (Some(Team::B), Some((3, 1))),
            (None, Some((2, 2))),
        ];
        let g = control_distribution(4, 3, frames);
        let (a, b) = g.fractions((0, 0));
        assert!((a - 2.0 / 3.0).abs() < 1e-15 && (a + b - 1.0).abs() < 1e-15);
        assert_eq!(g.fractions((3, 1)), (0.0, 1.0));
        assert_eq!(g.fractions((2, 2)), (0.0, 0.0));
    }
}
