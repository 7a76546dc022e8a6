use nalgebra::Vector3;

use super::{GeometryError, Homography};
use crate::model::{PITCH_LENGTH_M, PITCH_WIDTH_M};

/// Affine function `a·x + b·y + c` on image coordinates.
type HalfPlane = [f64; 3];

fn eval(f: &HalfPlane, p: (f64, f64)) -> f64 {
    f[0] * p.0 + f[1] * p.1 + f[2]
}

/// Sutherland–Hodgman pass keeping the part of `poly` where `f ≥ 0`.
fn clip(poly: &[(f64, f64)], f: &HalfPlane) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, &cur) in poly.iter().enumerate() {
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (fc, fp) = (eval(f, cur), eval(f, prev));
        if fc >= 0.0 {
            if fp < 0.0 {
                out.push(intersect(prev, cur, fp, fc));
            }
            out.push(cur);
        } else if fp >= 0.0 {
            out.push(intersect(prev, cur, fp, fc));
        }
    }
    out
}

fn intersect(a: (f64, f64), b: (f64, f64), fa: f64, fb: f64) -> (f64, f64) {
    let t = fa / (fa - fb);
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// Signed shoelace area; positive for counterclockwise vertex order.
pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

/// Part of the pitch seen by the camera, as a counterclockwise polygon in
/// field meters. Empty when the view misses the pitch.
///
/// The image rectangle is clipped against the pre-images of the four
/// touch/goal lines, which are straight lines in the image, and the result
/// is projected. Clipping before projecting keeps image regions beyond the
/// horizon from folding onto the pitch.
pub fn camera_footprint(h: &Homography, width: f64, height: f64) -> Result<Vec<(f64, f64)>, GeometryError> {
    let m = &h.matrix;
    let inv = m.try_inverse().ok_or(GeometryError::DegenerateProjection)?;
    let centre = inv * Vector3::new(PITCH_LENGTH_M / 2.0, PITCH_WIDTH_M / 2.0, 1.0);
    if centre.z.abs() < 1e-9 {
        return Err(GeometryError::DegenerateProjection);
    }
    // Orient the half-planes so the pitch side has positive homogeneous w.
    let sign = centre.z.signum();
    let row = |r: usize| [m[(r, 0)] * sign, m[(r, 1)] * sign, m[(r, 2)] * sign];
    let (u, v, w) = (row(0), row(1), row(2));
    let planes: [HalfPlane; 4] = [
        u,
        [PITCH_LENGTH_M * w[0] - u[0], PITCH_LENGTH_M * w[1] - u[1], PITCH_LENGTH_M * w[2] - u[2]],
        v,
        [PITCH_WIDTH_M * w[0] - v[0], PITCH_WIDTH_M * w[1] - v[1], PITCH_WIDTH_M * w[2] - v[2]],
    ];
    let mut poly = vec![(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)];
    for f in &planes {
        if poly.is_empty() {
            break;
        }
        poly = clip(&poly, f);
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(poly.len());
    for p in poly {
        let (x, y) = h.to_field(p)?;
        let q = (x.clamp(0.0, PITCH_LENGTH_M), y.clamp(0.0, PITCH_WIDTH_M));
        if out.last().is_none_or(|l: &(f64, f64)| (l.0 - q.0).hypot(l.1 - q.1) > 1e-9) {
            out.push(q);
        }
    }
    while out.len() > 1 {
        let (a, b) = (out[0], out[out.len() - 1]);
        if (a.0 - b.0).hypot(a.1 - b.1) > 1e-9 {
            break;
        }
        out.pop();
    }
    if out.len() < 3 {
        return Ok(Vec::new());
    }
    if polygon_area(&out) < 0.0 {
        out.reverse();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};

    /// Field→image map of a pinhole camera at `eye` looking at `target`.
    fn pinhole(eye: [f64; 3], target: [f64; 3], f: f64, w: f64, hgt: f64) -> Matrix3<f64> {
        let e = Vector3::from(eye);
        let fwd = (Vector3::from(target) - e).normalize();
        let right = fwd.cross(&Vector3::z()).normalize();
        let down = fwd.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), fwd.transpose()]);
        let t = -(r * e);
        let k = Matrix3::new(f, 0.0, w / 2.0, 0.0, f, hgt / 2.0, 0.0, 0.0, 1.0);
        let rt = Matrix3::from_columns(&[r.column(0).into_owned(), r.column(1).into_owned(), t]);
        k * rt
    }

    #[test]
    fn identity_on_pitch_sized_image() {
        let poly = camera_footprint(&Homography::identity(), 105.0, 68.0).unwrap();
        assert_eq!(poly.len(), 4);
        assert!((polygon_area(&poly) - 105.0 * 68.0).abs() < 1e-9);
        for corner in [(0.0, 0.0), (105.0, 0.0), (105.0, 68.0), (0.0, 68.0)] {
            assert!(poly.contains(&corner));
        }
    }

    #[test]
    fn partial_view_with_horizon() {
        let (w, hgt) = (1920.0, 1080.0);
        let g = pinhole([52.5, -30.0, 20.0], [52.5, 20.0, 0.0], 1000.0, w, hgt);
        let h = Homography::from_matrix(g.try_inverse().unwrap()).unwrap();
        let poly = camera_footprint(&h, w, hgt).unwrap();
        assert!(poly.len() >= 3);
        for &(x, y) in &poly {
            assert!((-1e-9..=105.0 + 1e-9).contains(&x) && (-1e-9..=68.0 + 1e-9).contains(&y));
        }
        let area = polygon_area(&poly);
        assert!(area > 0.0);

        // Monte-Carlo oracle: fraction of the pitch whose image lands inside the frame.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut hits = 0;
        for _ in 0..n {
            let q = Vector3::new(rng.random_range(0.0..105.0), rng.random_range(0.0..68.0), 1.0);
            let p = g * q;
            if p.z > 0.0 {
                let (x, y) = (p.x / p.z, p.y / p.z);
                if (0.0..w).contains(&x) && (0.0..hgt).contains(&y) {
                    hits += 1;
                }
            }
        }
        let mc = hits as f64 / n as f64 * 105.0 * 68.0;
        assert!((area - mc).abs() / mc < 0.02, "{area} vs {mc}");
    }

    #[test]
    fn view_missing_pitch_is_empty() {
        let m = Matrix3::new(1.0, 0.0, 500.0, 0.0, 1.0, 500.0, 0.0, 0.0, 1.0);
        assert!(camera_footprint(&Homography::from_matrix(m).unwrap(), 100.0, 100.0).unwrap().is_empty());
    }
}
