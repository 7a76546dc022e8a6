/// Number of semantic keypoints defined on the pitch.
pub const KEYPOINT_COUNT: usize = 17;

pub const PITCH_LENGTH_M: f64 = 105.0;
pub const PITCH_WIDTH_M: f64 = 68.0;
pub const CENTER_CIRCLE_RADIUS_M: f64 = 9.15;
pub const PENALTY_AREA_DEPTH_M: f64 = 16.5;
pub const PENALTY_AREA_HALF_WIDTH_M: f64 = 20.16;

/// Rectangular named region of the pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub name: &'static str,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Zone {
    /// Half-open containment, closed on the far pitch edge.
    pub fn contains(&self, x: f64, y: f64, field: &FieldModel) -> bool {
        let in_x = x >= self.x_min && (x < self.x_max || (self.x_max >= field.length_m && x <= self.x_max));
        let in_y = y >= self.y_min && (y < self.y_max || (self.y_max >= field.width_m && y <= self.y_max));
        in_x && in_y
    }
}

/// Overhead pitch model in meters, origin at the corner of keypoint 1.
/// x runs along the touchline, y along the goal line.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldModel {
    pub length_m: f64,
    pub width_m: f64,
    keypoints: [(f64, f64); KEYPOINT_COUNT],
    pub zones: Vec<Zone>,
}

impl FieldModel {
    /// Field coordinates of keypoint `id` (1-based).
    pub fn keypoint(&self, id: u32) -> Option<(f64, f64)> {
        let idx = (id as usize).checked_sub(1)?;
        self.keypoints.get(idx).copied()
    }

    pub fn keypoints(&self) -> impl Iterator<Item = (u32, (f64, f64))> + '_ {
        self.keypoints.iter().enumerate().map(|(i, &p)| (i as u32 + 1, p))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.length_m).contains(&x) && (0.0..=self.width_m).contains(&y)
    }

    pub fn zone_of(&self, x: f64, y: f64) -> Option<&Zone> {
        self.zones.iter().find(|z| z.contains(x, y, self))
    }
}

impl Default for FieldModel {
    fn default() -> Self {
        standard_field_model()
    }
}

/// The 105 x 68 m pitch with its 17 keypoints: corners (1-4), halfway-line
/// ends (5-6), center mark (7), center circle on the halfway line (8-9),
/// left penalty-area corners (10-13) and right penalty-area corners (14-17).
pub fn standard_field_model() -> FieldModel {
    let l = PITCH_LENGTH_M;
    let w = PITCH_WIDTH_M;
    let mid_x = l / 2.0;
    let mid_y = w / 2.0;
    let pa_lo = mid_y - PENALTY_AREA_HALF_WIDTH_M;
    let pa_hi = mid_y + PENALTY_AREA_HALF_WIDTH_M;
    let keypoints = [
        (0.0, 0.0),
        (l, 0.0),
        (l, w),
        (0.0, w),
        (mid_x, 0.0),
        (mid_x, w),
        (mid_x, mid_y),
        (mid_x, mid_y - CENTER_CIRCLE_RADIUS_M),
        (mid_x, mid_y + CENTER_CIRCLE_RADIUS_M),
        (0.0, pa_lo),
        (PENALTY_AREA_DEPTH_M, pa_lo),
        (PENALTY_AREA_DEPTH_M, pa_hi),
        (0.0, pa_hi),
        (l - PENALTY_AREA_DEPTH_M, pa_lo),
        (l, pa_lo),
        (l, pa_hi),
        (l - PENALTY_AREA_DEPTH_M, pa_hi),
    ];
    let third = l / 3.0;
    let zones = vec![
        Zone { name: "left_third", x_min: 0.0, x_max: third, y_min: 0.0, y_max: w },
        Zone { name: "middle_third", x_min: third, x_max: 2.0 * third, y_min: 0.0, y_max: w },
        Zone { name: "right_third", x_min: 2.0 * third, x_max: l, y_min: 0.0, y_max: w },
    ];
    FieldModel { length_m: l, width_m: w, keypoints, zones }
}
