use super::grass::GrassModel;
use crate::model::RgbPatch;

/// Components smaller than this fraction of the patch are discarded.
pub const MIN_COMPONENT_FRACTION: f64 = 0.01;

/// Binary foreground mask over a patch, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub w: usize,
    pub h: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(w: usize, h: usize) -> Self {
        Self { w, h, bits: vec![false; w * h] }
    }

    pub fn full(w: usize, h: usize) -> Self {
        Self { w, h, bits: vec![true; w * h] }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.w + col]
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.bits[row * self.w + col] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// First and last rows containing foreground.
    pub fn row_bounds(&self) -> Option<(usize, usize)> {
        let mut rows = (0..self.h).filter(|&r| (0..self.w).any(|c| self.get(r, c)));
        let first = rows.next()?;
        let last = rows.next_back().unwrap_or(first);
        Some((first, last))
    }
}

/// Foreground = pixels not matching the grass model, minus 4-connected
/// components covering less than 1% of the patch.
pub fn segment_person(patch: &RgbPatch, grass: &GrassModel) -> Mask {
    let (w, h) = (patch.w, patch.h);
    let mut mask = Mask::new(w, h);
    for r in 0..h {
        for c in 0..w {
            mask.set(r, c, !grass.matches(patch.pixel(r, c)));
        }
    }
    remove_small_components(&mut mask, MIN_COMPONENT_FRACTION * (w * h) as f64);
    mask
}

fn remove_small_components(mask: &mut Mask, min_size: f64) {
    let (w, h) = (mask.w, mask.h);
    let mut label = vec![usize::MAX; w * h];
    let mut stack = Vec::new();
    let mut members = Vec::new();
    for start in 0..w * h {
        if !mask.bits[start] || label[start] != usize::MAX {
            continue;
        }
        members.clear();
        stack.push(start);
        label[start] = start;
        while let Some(i) = stack.pop() {
            members.push(i);
            let (r, c) = (i / w, i % w);
            let mut visit = |j: usize| {
                if mask.bits[j] && label[j] == usize::MAX {
                    label[j] = start;
                    stack.push(j);
                }
            };
            if r > 0 {
                visit(i - w);
            }
            if r + 1 < h {
                visit(i + w);
            }
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < w {
                visit(i + 1);
            }
        }
        if (members.len() as f64) < min_size {
            for &i in &members {
                mask.bits[i] = false;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grass() -> GrassModel {
        GrassModel { hue_lo: 90.0, hue_hi: 140.0, sat_min: 0.3, val_min: 0.3, support: 1.0 }
    }

    const GREEN: [u8; 3] = [40, 150, 50];
    const RED: [u8; 3] = [210, 25, 30];

    #[test]
    fn all_grass_is_empty() {
        let p = RgbPatch::filled(10, 20, GREEN);
        assert!(segment_person(&p, &grass()).is_empty());
    }

    #[test]
    fn red_block_on_green() {
        let mut p = RgbPatch::filled(10, 20, GREEN);
        for r in 3..15 {
            for c in 2..6 {
                p.set_pixel(r, c, RED);
            }
        }
        let m = segment_person(&p, &grass());
        for r in 0..20 {
            for c in 0..10 {
                assert_eq!(m.get(r, c), (3..15).contains(&r) && (2..6).contains(&c));
            }
        }
        assert_eq!(m.row_bounds(), Some((3, 14)));
    }

    #[test]
    fn speckles_below_one_percent_removed() {
        // 20 x 20 patch: 1% = 4 px. A 3-px speck goes, a 4-px one stays.
        let mut p = RgbPatch::filled(20, 20, GREEN);
        for c in 0..3 {
            p.set_pixel(0, c, RED);
        }
        for c in 10..14 {
            p.set_pixel(10, c, RED);
        }
        let m = segment_person(&p, &grass());
        assert_eq!(m.count(), 4);
        assert!(m.get(10, 10));
    }
}
