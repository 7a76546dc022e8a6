use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::camera::BroadcastCamera;
use super::config::SimConfig;
use crate::model::{BoundingBox, PITCH_LENGTH_M, PITCH_WIDTH_M};
use crate::summary::{frame_controller, PlayerSample, CONTROL_RADIUS_M};
use crate::team::{Group, Team};

pub const PLAYER_HEIGHT_M: f64 = 1.8;
pub const PLAYER_ASPECT: f64 = 0.4;
/// Height used to size the ball box.
pub const BALL_BOX_M: f64 = 0.5;
pub const MAX_SPEED_MPS: f64 = 9.0;
pub const MAX_ACCEL_MPS2: f64 = 5.0;
pub const PASS_SPEED_MPS: f64 = 15.0;
pub const TEAMMATE_PASS_PROB: f64 = 0.8;

/// Outfield anchors of the side defending x = 0, in fill order.
const OUTFIELD_ANCHORS: [(f64, f64); 10] = [
    (18.0, 26.0),
    (18.0, 42.0),
    (35.0, 26.0),
    (35.0, 42.0),
    (48.0, 24.0),
    (48.0, 44.0),
    (18.0, 10.0),
    (18.0, 58.0),
    (35.0, 10.0),
    (35.0, 58.0),
];
const KEEPER_ANCHOR: (f64, f64) = (4.0, 34.0);

/// A person in the simulation with their true role and appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub id: u64,
    pub group: Group,
    pub number: Option<u8>,
    /// Unit-norm appearance prototype.
    pub prototype: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthPerson {
    pub id: u64,
    pub group: Group,
    pub pos: (f64, f64),
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthBall {
    pub pos: (f64, f64),
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFrame {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    pub ts_ms: i64,
    pub persons: Vec<TruthPerson>,
    pub ball: TruthBall,
    /// Image → field homography of this frame's camera.
    #[serde(with = "row_major")]
    pub homography: Matrix3<f64>,
    /// Team in control of the ball under the possession rule.
    pub controller: Option<Team>,
}

#[derive(Debug, Clone)]
struct Agent {
    group: Group,
    anchor: (f64, f64),
    pos: (f64, f64),
    vel: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
enum Ball {
    Held { holder: usize, release_frame: u64 },
    Flight { receiver: usize, since: u64 },
}

fn attack_dir(group: Group) -> f64 {
    match group.team() {
        Some(Team::B) => -1.0,
        _ => 1.0,
    }
}

fn mirror(p: (f64, f64)) -> (f64, f64) {
    (PITCH_LENGTH_M - p.0, PITCH_WIDTH_M - p.1)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Builds the roster: team A keeper and outfield, team B likewise, then the
/// referee. Ids start at 1 in that order.
pub(crate) fn make_identities(config: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<Identity> {
    let n = config.players_per_team;
    let mut out = Vec::new();
    for (keeper, outfield) in [(Group::GoalkeeperA, Group::TeamA), (Group::GoalkeeperB, Group::TeamB)] {
        let mut numbers: Vec<u8> = (2..=99).collect();
        for i in (1..numbers.len()).rev() {
            numbers.swap(i, rng.random_range(0..=i));
        }
        for i in 0..n {
            let (group, number) = if i == 0 { (keeper, 1) } else { (outfield, numbers[i - 1]) };
            out.push(Identity { id: 0, group, number: Some(number), prototype: Vec::new() });
        }
    }
    out.push(Identity { id: 0, group: Group::Referee, number: None, prototype: Vec::new() });
    for (i, ident) in out.iter_mut().enumerate() {
        ident.id = i as u64 + 1;
        let v: Vec<f64> = (0..config.embedding_dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        ident.prototype = v.iter().map(|x| (x / norm) as f32).collect();
    }
    out
}

/// Player and ball motion plus the panning camera.
#[derive(Debug, Clone)]
pub struct World {
    identities: Vec<Identity>,
    agents: Vec<Agent>,
    ball_pos: (f64, f64),
    ball: Ball,
    camera: BroadcastCamera,
    rng: ChaCha8Rng,
    fps: f64,
    frame: u64,
    controller: Option<Team>,
}

impl World {
    pub fn new(config: &SimConfig, identities: Vec<Identity>, rng: ChaCha8Rng) -> Self {
        let mut agents = Vec::with_capacity(identities.len());
        let mut outfield_idx = [0usize; 2];
        for ident in &identities {
            let anchor = match ident.group {
                Group::GoalkeeperA => KEEPER_ANCHOR,
                Group::GoalkeeperB => mirror(KEEPER_ANCHOR),
                Group::TeamA => {
                    outfield_idx[0] += 1;
                    OUTFIELD_ANCHORS[outfield_idx[0] - 1]
                }
                Group::TeamB => {
                    outfield_idx[1] += 1;
                    mirror(OUTFIELD_ANCHORS[outfield_idx[1] - 1])
                }
                _ => (PITCH_LENGTH_M / 2.0, PITCH_WIDTH_M / 2.0 + 10.0),
            };
            agents.push(Agent { group: ident.group, anchor, pos: anchor, vel: (0.0, 0.0) });
        }
        let mut world = Self {
            identities,
            agents,
            ball_pos: (PITCH_LENGTH_M / 2.0, PITCH_WIDTH_M / 2.0),
            ball: Ball::Held { holder: 0, release_frame: 0 },
            camera: BroadcastCamera::new(config.camera),
            rng,
            fps: f64::from(config.fps),
            frame: 0,
            controller: None,
        };
        // Kick-off: the most advanced team-A outfielder starts with the ball.
        let starter = (0..world.agents.len())
            .filter(|&i| world.agents[i].group == Group::TeamA)
            .max_by(|&a, &b| world.agents[a].pos.0.total_cmp(&world.agents[b].pos.0))
            .unwrap_or(0);
        world.agents[starter].pos = (PITCH_LENGTH_M / 2.0 - 0.5, PITCH_WIDTH_M / 2.0);
        world.ball = Ball::Held { holder: starter, release_frame: world.hold_time() };
        world.ball_pos = world.held_ball_pos(starter);
        world
    }

    pub fn identities(&self) -> &[Identity] {
        &self.identities
    }

    fn hold_time(&mut self) -> u64 {
        self.frame + (self.rng.random_range(1.5..4.0) * self.fps) as u64
    }

    fn held_ball_pos(&self, holder: usize) -> (f64, f64) {
        let a = &self.agents[holder];
        (a.pos.0 + 0.5 * attack_dir(a.group), a.pos.1)
    }

    fn pick_receiver(&mut self, holder: usize) -> usize {
        let own = self.agents[holder].group.team();
        let to_mate = self.rng.random_bool(TEAMMATE_PASS_PROB);
        let pool: Vec<usize> = (0..self.agents.len())
            .filter(|&i| i != holder)
            .filter(|&i| match self.agents[i].group.team() {
                Some(t) => (Some(t) == own) == to_mate,
                None => false,
            })
            .collect();
        if pool.is_empty() {
            return holder;
        }
        pool[self.rng.random_range(0..pool.len())]
    }

    fn step_ball(&mut self) {
        match self.ball {
            Ball::Held { holder, release_frame } => {
                if self.frame >= release_frame {
                    let receiver = self.pick_receiver(holder);
                    self.ball = if receiver == holder {
                        let t = self.hold_time();
                        Ball::Held { holder, release_frame: t }
                    } else {
                        Ball::Flight { receiver, since: self.frame }
                    };
                }
            }
            Ball::Flight { receiver, since } => {
                let target = self.agents[receiver].pos;
                let d = dist(self.ball_pos, target);
                let step = PASS_SPEED_MPS / self.fps;
                if d <= step.max(0.6) || self.frame - since > (4.0 * self.fps) as u64 {
                    let t = self.hold_time();
                    self.ball = Ball::Held { holder: receiver, release_frame: t };
                } else {
                    self.ball_pos.0 += step * (target.0 - self.ball_pos.0) / d;
                    self.ball_pos.1 += step * (target.1 - self.ball_pos.1) / d;
                }
            }
        }
        if let Ball::Held { holder, .. } = self.ball {
            self.ball_pos = self.held_ball_pos(holder);
        }
        self.ball_pos.0 = self.ball_pos.0.clamp(-1.0, PITCH_LENGTH_M + 1.0);
        self.ball_pos.1 = self.ball_pos.1.clamp(-1.0, PITCH_WIDTH_M + 1.0);
    }

    fn targets(&self) -> Vec<(f64, f64)> {
        let ball = self.ball_pos;
        let (shift_x, shift_y) = (ball.0 - PITCH_LENGTH_M / 2.0, ball.1 - PITCH_WIDTH_M / 2.0);
        let holder = match self.ball {
            Ball::Held { holder, .. } => Some(holder),
            Ball::Flight { .. } => None,
        };
        let holder_team = holder.and_then(|h| self.agents[h].group.team());
        // Nearest outfielder of the defending side closes down the ball.
        let presser = holder_team.and_then(|t| {
            (0..self.agents.len())
                .filter(|&i| {
                    let g = self.agents[i].group;
                    g.team() == Some(t.other()) && matches!(g, Group::TeamA | Group::TeamB)
                })
                .min_by(|&a, &b| dist(self.agents[a].pos, ball).total_cmp(&dist(self.agents[b].pos, ball)))
        });
        let receiver = match self.ball {
            Ball::Flight { receiver, .. } => Some(receiver),
            Ball::Held { .. } => None,
        };
        self.agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if Some(i) == holder {
                    (a.pos.0 + 6.0 * attack_dir(a.group), a.anchor.1 + 0.5 * (a.pos.1 - a.anchor.1))
                } else if Some(i) == receiver {
                    a.pos
                } else if Some(i) == presser {
                    if dist(a.pos, ball) > 1.5 {
                        ball
                    } else {
                        a.pos
                    }
                } else {
                    match a.group {
                        Group::GoalkeeperA | Group::GoalkeeperB => (a.anchor.0, a.anchor.1 + 0.3 * shift_y),
                        Group::Referee => (ball.0 - 8.0, ball.1 + 10.0),
                        _ => (a.anchor.0 + 0.35 * shift_x, a.anchor.1 + 0.25 * shift_y),
                    }
                }
            })
            .collect()
    }

    fn step_agents(&mut self) {
        const PULL: f64 = 1.0;
        const DAMPING: f64 = 1.5;
        const AGITATION: f64 = 1.0;
        let dt = 1.0 / self.fps;
        let max_dv = MAX_ACCEL_MPS2 * dt;
        let targets = self.targets();
        for (a, t) in self.agents.iter_mut().zip(targets) {
            let nx: f64 = StandardNormal.sample(&mut self.rng);
            let ny: f64 = StandardNormal.sample(&mut self.rng);
            let mut dvx = (PULL * (t.0 - a.pos.0) - DAMPING * a.vel.0) * dt + AGITATION * dt.sqrt() * nx;
            let mut dvy = (PULL * (t.1 - a.pos.1) - DAMPING * a.vel.1) * dt + AGITATION * dt.sqrt() * ny;
            let dv = dvx.hypot(dvy);
            if dv > max_dv {
                dvx *= max_dv / dv;
                dvy *= max_dv / dv;
            }
            let (mut vx, mut vy) = (a.vel.0 + dvx, a.vel.1 + dvy);
            let speed = vx.hypot(vy);
            if speed > MAX_SPEED_MPS {
                vx *= MAX_SPEED_MPS / speed;
                vy *= MAX_SPEED_MPS / speed;
            }
            let x = (a.pos.0 + vx * dt).clamp(0.3, PITCH_LENGTH_M - 0.3);
            let y = (a.pos.1 + vy * dt).clamp(0.3, PITCH_WIDTH_M - 0.3);
            a.vel = ((x - a.pos.0) / dt, (y - a.pos.1) / dt);
            a.pos = (x, y);
        }
    }

    fn person_box(&self, pos: (f64, f64)) -> BoundingBox {
        let (u0, v0) = self.camera.project(pos.0, pos.1, 0.0);
        let (_, v1) = self.camera.project(pos.0, pos.1, PLAYER_HEIGHT_M);
        let h = v0 - v1;
        let w = PLAYER_ASPECT * h;
        BoundingBox::new(u0 - w / 2.0, v1, w, h)
    }

    fn ball_box(&self, pos: (f64, f64)) -> BoundingBox {
        let (u, v) = self.camera.project(pos.0, pos.1, 0.0);
        let (_, top) = self.camera.project(pos.0, pos.1, BALL_BOX_M);
        let s = v - top;
        BoundingBox::new(u - s / 2.0, v - s / 2.0, s, s)
    }

    /// Renders the current state, then advances one frame.
    pub fn next_frame(&mut self) -> TruthFrame {
        let persons: Vec<TruthPerson> = self
            .agents
            .iter()
            .zip(&self.identities)
            .map(|(a, ident)| TruthPerson { id: ident.id, group: a.group, pos: a.pos, bbox: self.person_box(a.pos) })
            .collect();
        let samples: Vec<PlayerSample> =
            persons.iter().map(|p| PlayerSample { track_id: p.id, pos: p.pos, group: p.group }).collect();
        self.controller = frame_controller(Some(self.ball_pos), &samples, self.controller, CONTROL_RADIUS_M);
        let frame = TruthFrame {
            frame_index: self.frame,
            ts_ms: (self.frame as f64 * 1000.0 / self.fps).round() as i64,
            persons,
            ball: TruthBall { pos: self.ball_pos, bbox: self.ball_box(self.ball_pos) },
            homography: self.camera.image_to_field(),
            controller: self.controller,
        };
        self.frame += 1;
        self.step_agents();
        self.step_ball();
        self.camera.follow(self.ball_pos.0);
        frame
    }
}

pub(crate) fn world_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

mod row_major {
    use nalgebra::Matrix3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Matrix3<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: [f64; 9] = std::array::from_fn(|i| m[(i / 3, i % 3)]);
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix3<f64>, D::Error> {
        let v = <[f64; 9]>::deserialize(d)?;
        Ok(Matrix3::from_row_slice(&v))
    }
}
