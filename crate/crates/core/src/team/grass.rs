use super::color::{hue_in_window, rgb8_to_hsv, Hsv};
use super::TeamError;

pub const HUE_BINS: usize = 36;
const BIN_WIDTH: f64 = 360.0 / HUE_BINS as f64;
/// Hue range considered plausible for turf.
pub const GREEN_HUE_RANGE: (f64, f64) = (60.0, 180.0);
/// Pixels below this saturation or value have no reliable hue.
pub const MIN_CHROMA: f64 = 0.1;
pub const MIN_SAMPLE_PIXELS: usize = 1000;
pub const MIN_SUPPORT: f64 = 0.3;
/// Window growth stops at bins holding less than this fraction of the mode.
pub const EXPANSION_FRACTION: f64 = 0.1;

/// Adaptive HSV threshold describing the pitch surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassModel {
    pub hue_lo: f64,
    pub hue_hi: f64,
    pub sat_min: f64,
    pub val_min: f64,
    /// Fraction of the sample matched by the final predicate.
    pub support: f64,
}

impl GrassModel {
    pub fn matches_hsv(&self, c: Hsv) -> bool {
        hue_in_window(c.h, self.hue_lo, self.hue_hi) && c.s >= self.sat_min && c.v >= self.val_min
    }

    pub fn matches(&self, px: [u8; 3]) -> bool {
        self.matches_hsv(rgb8_to_hsv(px))
    }
}

fn bin_of(hue: f64) -> usize {
    ((hue / BIN_WIDTH) as usize).min(HUE_BINS - 1)
}

fn in_green_range(bin: usize) -> bool {
    let lo = bin as f64 * BIN_WIDTH;
    lo >= GREEN_HUE_RANGE.0 && lo + BIN_WIDTH <= GREEN_HUE_RANGE.1
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).floor() as usize;
    sorted[idx]
}

/// Estimates the grass threshold from a pixel sample.
///
/// A 36-bin hue histogram over chromatic pixels in the green range is
/// built; the window starts at the modal bin and grows while neighbouring
/// bins keep at least 10% of the mode's mass. Saturation and value floors
/// are the 25th percentiles among pixels inside the window.
pub fn estimate_grass_model(pixels: &[[u8; 3]]) -> Result<GrassModel, TeamError> {
    if pixels.len() < MIN_SAMPLE_PIXELS {
        return Err(TeamError::InsufficientSample { found: pixels.len(), needed: MIN_SAMPLE_PIXELS });
    }
    let hsv: Vec<Hsv> = pixels.iter().map(|&p| rgb8_to_hsv(p)).collect();
    let mut hist = [0usize; HUE_BINS];
    for c in &hsv {
        if c.s >= MIN_CHROMA && c.v >= MIN_CHROMA {
            let b = bin_of(c.h);
            if in_green_range(b) {
                hist[b] += 1;
            }
        }
    }
    let (mode, &mode_mass) =
        hist.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).expect("non-empty histogram");
    if mode_mass == 0 {
        return Err(TeamError::NoGrassFound { support: 0.0 });
    }
    let keep = |b: usize| in_green_range(b) && hist[b] as f64 >= EXPANSION_FRACTION * mode_mass as f64;
    let mut lo = mode;
    while lo > 0 && keep(lo - 1) {
        lo -= 1;
    }
    let mut hi = mode;
    while hi + 1 < HUE_BINS && keep(hi + 1) {
        hi += 1;
    }
    let hue_lo = lo as f64 * BIN_WIDTH;
    let hue_hi = (hi + 1) as f64 * BIN_WIDTH;

    let matched: Vec<&Hsv> =
        hsv.iter().filter(|c| c.s >= MIN_CHROMA && c.v >= MIN_CHROMA && hue_in_window(c.h, hue_lo, hue_hi)).collect();
    let mut sats: Vec<f64> = matched.iter().map(|c| c.s).collect();
    let mut vals: Vec<f64> = matched.iter().map(|c| c.v).collect();
    sats.sort_by(f64::total_cmp);
    vals.sort_by(f64::total_cmp);
    let mut model =
        GrassModel { hue_lo, hue_hi, sat_min: percentile(&sats, 0.25), val_min: percentile(&vals, 0.25), support: 0.0 };
    let hits = hsv.iter().filter(|&&c| model.matches_hsv(c)).count();
    model.support = hits as f64 / hsv.len() as f64;
    if model.support < MIN_SUPPORT {
        return Err(TeamError::NoGrassFound { support: model.support });
    }
    Ok(model)
}
