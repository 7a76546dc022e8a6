/// HSV triple: hue in degrees [0, 360), saturation and value in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB → HSV for channels in [0, 1]. Achromatic colors get hue 0.
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> Hsv {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    Hsv { h: h.rem_euclid(360.0), s, v }
}

pub fn rgb8_to_hsv(px: [u8; 3]) -> Hsv {
    rgb_to_hsv(f64::from(px[0]) / 255.0, f64::from(px[1]) / 255.0, f64::from(px[2]) / 255.0)
}

/// HSV → RGB in [0, 1].
pub fn hsv_to_rgb(c: Hsv) -> [f64; 3] {
    let h = c.h.rem_euclid(360.0) / 60.0;
    let chroma = c.v * c.s;
    let x = chroma * (1.0 - (h.rem_euclid(2.0) - 1.0).abs());
    let m = c.v - chroma;
    let (r, g, b) = match h as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    [r + m, g + m, b + m]
}

pub fn hsv_to_rgb8(c: Hsv) -> [u8; 3] {
    hsv_to_rgb(c).map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// True when `hue` lies in the (possibly wrapping) window [lo, hi).
pub fn hue_in_window(hue: f64, lo: f64, hi: f64) -> bool {
    let width = (hi - lo).rem_euclid(360.0);
    if width == 0.0 && hi != lo {
        return true;
    }
    (hue - lo).rem_euclid(360.0) < width
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primaries() {
        let red = rgb_to_hsv(1.0, 0.0, 0.0);
        assert_eq!((red.h, red.s, red.v), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv(0.0, 1.0, 0.0).h, 120.0);
        assert_eq!(rgb_to_hsv(0.0, 0.0, 1.0).h, 240.0);
        let gray = rgb_to_hsv(0.5, 0.5, 0.5);
        assert_eq!((gray.h, gray.s, gray.v), (0.0, 0.0, 0.5));
        assert!((rgb_to_hsv(1.0, 0.0, 0.5).h - 330.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_on_grid() {
        // 10 x 10 x 10 = 1000 colors spanning the cube.
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let rgb = [i as f64 / 9.0, j as f64 / 9.0, k as f64 / 9.0];
                    let back = hsv_to_rgb(rgb_to_hsv(rgb[0], rgb[1], rgb[2]));
                    for c in 0..3 {
                        assert!((back[c] - rgb[c]).abs() <= 1e-6, "{rgb:?} -> {back:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn wrapping_window() {
        assert!(hue_in_window(100.0, 90.0, 130.0));
        assert!(!hue_in_window(130.0, 90.0, 130.0));
        assert!(hue_in_window(5.0, 350.0, 20.0));
        assert!(hue_in_window(355.0, 350.0, 20.0));
        assert!(!hue_in_window(30.0, 350.0, 20.0));
    }
}
