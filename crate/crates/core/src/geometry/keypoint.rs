use nalgebra::{SMatrix, SVector};

use super::GeometryError;

/// Refines a coarse keypoint from the score patch centred on it.
///
/// The patch argmax is located, then a quadratic surface is fitted by least
/// squares to its 3×3 neighbourhood and the surface's stationary point gives
/// the sub-pixel offset (clamped to ±0.5 px per axis). A peak on the patch
/// border, or a neighbourhood that is not a maximum, keeps the integer peak.
pub fn refine_keypoint(patch: &[Vec<f64>], coarse: (f64, f64)) -> Result<(f64, f64), GeometryError> {
    let s = patch.len();
    if s < 3 || s.is_multiple_of(2) || patch.iter().any(|row| row.len() != s) {
        return Err(GeometryError::InvalidPatch);
    }
    let half = (s / 2) as f64;
    let mut best = (0, 0, f64::NEG_INFINITY);
    let mut lowest = f64::INFINITY;
    for (r, row) in patch.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::InvalidPatch);
            }
            if v > best.2 {
                best = (r, c, v);
            }
            lowest = lowest.min(v);
        }
    }
    if best.2 <= lowest {
        return Err(GeometryError::NoPeak);
    }
    let (r, c, _) = best;
    let mut offset = (0.0, 0.0);
    if r > 0 && c > 0 && r + 1 < s && c + 1 < s {
        offset = quadratic_offset(|dy, dx| patch[(r as i64 + dy) as usize][(c as i64 + dx) as usize]);
    }
    Ok((coarse.0 + c as f64 - half + offset.0, coarse.1 + r as f64 - half + offset.1))
}

/// Stationary point of `a + b·x + c·y + d·x² + e·y² + f·xy` fitted to the 3×3
/// samples around the origin. Returns (x, y) offsets.
fn quadratic_offset(sample: impl Fn(i64, i64) -> f64) -> (f64, f64) {
    let mut design = SMatrix::<f64, 9, 6>::zeros();
    let mut values = SVector::<f64, 9>::zeros();
    let mut i = 0;
    for dy in -1..=1i64 {
        for dx in -1..=1i64 {
            let (x, y) = (dx as f64, dy as f64);
            design.set_row(i, &nalgebra::RowSVector::<f64, 6>::from_row_slice(&[1.0, x, y, x * x, y * y, x * y]));
            values[i] = sample(dy, dx);
            i += 1;
        }
    }
    let normal = design.transpose() * design;
    let Some(coef) = normal.cholesky().map(|ch| ch.solve(&(design.transpose() * values))) else {
        return (0.0, 0.0);
    };
    let (b, c, d, e, f) = (coef[1], coef[2], coef[3], coef[4], coef[5]);
    // Hessian [[2d, f], [f, 2e]] must be negative definite for a maximum.
    let det = 4.0 * d * e - f * f;
    if d >= 0.0 || det <= 0.0 {
        return (0.0, 0.0);
    }
    let x = (-2.0 * e * b + f * c) / det;
    let y = (-2.0 * d * c + f * b) / det;
    (x.clamp(-0.5, 0.5), y.clamp(-0.5, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(side: usize, peak: (f64, f64)) -> Vec<Vec<f64>> {
        let half = (side / 2) as f64;
        (0..side)
            .map(|r| {
                (0..side)
                    .map(|c| {
                        let (x, y) = (c as f64 - half - peak.0, r as f64 - half - peak.1);
                        1.0 - 0.1 * x * x - 0.07 * y * y + 0.02 * x * y
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn centred_symmetric_peak() {
        let p = surface(5, (0.0, 0.0));
        assert_eq!(refine_keypoint(&p, (100.0, 50.0)).unwrap(), (100.0, 50.0));
    }

    #[test]
    fn recovers_subpixel_peak() {
        let p = surface(7, (0.3, -0.2));
        let (x, y) = refine_keypoint(&p, (10.0, 20.0)).unwrap();
        assert!((x - 10.3).abs() < 1e-6 && (y - 19.8).abs() < 1e-6, "{x} {y}");
    }

    #[test]
    fn peak_away_from_centre() {
        let p = surface(7, (-1.6, 2.4));
        let (x, y) = refine_keypoint(&p, (0.0, 0.0)).unwrap();
        assert!((x + 1.6).abs() < 1e-6 && (y - 2.4).abs() < 1e-6);
    }

    #[test]
    fn constant_patch_has_no_peak() {
        let p = vec![vec![0.4; 5]; 5];
        assert_eq!(refine_keypoint(&p, (0.0, 0.0)), Err(GeometryError::NoPeak));
    }

    #[test]
    fn border_peak_is_not_refined() {
        let mut p = vec![vec![0.0; 5]; 5];
        p[0][3] = 1.0;
        p[1][3] = 0.5;
        assert_eq!(refine_keypoint(&p, (0.0, 0.0)).unwrap(), (1.0, -2.0));
    }

    #[test]
    fn rejects_even_or_ragged() {
        assert_eq!(refine_keypoint(&vec![vec![1.0; 4]; 4], (0.0, 0.0)), Err(GeometryError::InvalidPatch));
        assert_eq!(
            refine_keypoint(&[vec![1.0; 3], vec![1.0; 2], vec![1.0; 3]], (0.0, 0.0)),
            Err(GeometryError::InvalidPatch)
        );
    }
}
