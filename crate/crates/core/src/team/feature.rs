use super::color::rgb8_to_hsv;
use super::segment::Mask;
use super::TeamError;
use crate::model::RgbPatch;

/// Length of [`ColorFeature::to_vector`].
pub const FEATURE_DIM: usize = 14;

/// Mean color of one half (jersey or shorts) of a segmented person.
/// Hue is kept as the mean of its unit-circle embedding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HalfColor {
    pub hue_cos: f64,
    pub hue_sin: f64,
    pub s: f64,
    pub v: f64,
    pub rgb: [f64; 3],
}

impl HalfColor {
    /// Mean hue in degrees, or `None` when the hue vector cancels out.
    pub fn mean_hue(&self) -> Option<f64> {
        let n = self.hue_cos.hypot(self.hue_sin);
        (n > 1e-9).then(|| self.hue_sin.atan2(self.hue_cos).to_degrees().rem_euclid(360.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorFeature {
    pub upper: HalfColor,
    pub lower: HalfColor,
    pub foreground_ratio: f64,
}

impl ColorFeature {
    pub fn to_vector(&self) -> [f64; FEATURE_DIM] {
        let half = |h: &HalfColor| [h.hue_cos, h.hue_sin, h.s, h.v, h.rgb[0], h.rgb[1], h.rgb[2]];
        let (u, l) = (half(&self.upper), half(&self.lower));
        let mut out = [0.0; FEATURE_DIM];
        out[..7].copy_from_slice(&u);
        out[7..].copy_from_slice(&l);
        out
    }
}

#[derive(Default)]
struct Acc {
    n: usize,
    cos: f64,
    sin: f64,
    s: f64,
    v: f64,
    rgb: [f64; 3],
}

impl Acc {
    fn push(&mut self, px: [u8; 3]) {
        let c = rgb8_to_hsv(px);
        let rad = c.h.to_radians();
        self.n += 1;
        self.cos += rad.cos();
        self.sin += rad.sin();
        self.s += c.s;
        self.v += c.v;
        for (acc, &p) in self.rgb.iter_mut().zip(&px) {
            *acc += f64::from(p) / 255.0;
        }
    }

    fn mean(&self) -> Option<HalfColor> {
        if self.n == 0 {
            return None;
        }
        let n = self.n as f64;
        Some(HalfColor {
            hue_cos: self.cos / n,
            hue_sin: self.sin / n,
            s: self.s / n,
            v: self.v / n,
            rgb: self.rgb.map(|c| c / n),
        })
    }
}

/// Mean HSV/RGB of the foreground, split into upper and lower halves at the
/// vertical midpoint of the mask's occupied rows.
pub fn extract_color_feature(patch: &RgbPatch, mask: &Mask, min_foreground: f64) -> Result<ColorFeature, TeamError> {
    assert_eq!((patch.w, patch.h), (mask.w, mask.h), "mask must match patch");
    let count = mask.count();
    let ratio = if patch.is_empty() { 0.0 } else { count as f64 / patch.len() as f64 };
    let Some((top, bottom)) = mask.row_bounds() else {
        return Err(TeamError::InsufficientForeground { ratio, needed: min_foreground });
    };
    if ratio < min_foreground {
        return Err(TeamError::InsufficientForeground { ratio, needed: min_foreground });
    }
    let split = (top + bottom).div_ceil(2);
    let (mut upper, mut lower) = (Acc::default(), Acc::default());
    for r in top..=bottom {
        for c in 0..patch.w {
            if mask.get(r, c) {
                if r < split {
                    upper.push(patch.pixel(r, c));
                } else {
                    lower.push(patch.pixel(r, c));
                }
            }
        }
    }
    let (u, l) = match (upper.mean(), lower.mean()) {
        (Some(u), Some(l)) => (u, l),
        (Some(u), None) => (u, u),
        (None, Some(l)) => (l, l),
        (None, None) => unreachable!("mask has foreground rows"),
    };
    Ok(ColorFeature { upper: u, lower: l, foreground_ratio: ratio })
}
