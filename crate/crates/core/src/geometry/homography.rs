use nalgebra::{DMatrix, Matrix3, Vector3};

use super::GeometryError;

/// One image pixel ↔ field meter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub image: (f64, f64),
    pub field: (f64, f64),
}

impl Correspondence {
    pub fn new(image: (f64, f64), field: (f64, f64)) -> Self {
        Self { image, field }
    }
}

/// Image→field projective map, scaled to unit Frobenius norm with h₃₃ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    pub matrix: Matrix3<f64>,
    /// RMS reprojection error of the fit, in pixels.
    pub rms_error: f64,
    pub n_points: usize,
    pub frame_index: u64,
}

const MAX_CONDITION: f64 = 1e12;
const MIN_W: f64 = 1e-9;

fn canonical(m: Matrix3<f64>) -> Matrix3<f64> {
    let m = m / m.norm();
    if m[(2, 2)] < 0.0 {
        -m
    } else {
        m
    }
}

fn dehomogenize(p: Vector3<f64>) -> Result<(f64, f64), GeometryError> {
    if p.z.abs() < MIN_W || !p.x.is_finite() || !p.y.is_finite() {
        return Err(GeometryError::DegenerateProjection);
    }
    Ok((p.x / p.z, p.y / p.z))
}

impl Homography {
    /// Wraps a matrix, applying the canonical scale. Fails when it is not
    /// invertible.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, GeometryError> {
        if !m.iter().all(|v| v.is_finite()) || m.norm() == 0.0 {
            return Err(GeometryError::DegenerateConfiguration);
        }
        let matrix = canonical(m);
        let sv = matrix.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        if lo <= 0.0 || hi / lo >= MAX_CONDITION {
            return Err(GeometryError::DegenerateConfiguration);
        }
        Ok(Self { matrix, rms_error: 0.0, n_points: 4, frame_index: 0 })
    }

    pub fn identity() -> Self {
        Self::from_matrix(Matrix3::identity()).expect("identity is invertible")
    }

    /// Image pixel → field meters.
    pub fn to_field(&self, p: (f64, f64)) -> Result<(f64, f64), GeometryError> {
        dehomogenize(self.matrix * Vector3::new(p.0, p.1, 1.0))
    }

    /// Field meters → image pixel.
    pub fn to_image(&self, q: (f64, f64)) -> Result<(f64, f64), GeometryError> {
        let inv = self.matrix.try_inverse().ok_or(GeometryError::DegenerateProjection)?;
        dehomogenize(inv * Vector3::new(q.0, q.1, 1.0))
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.matrix;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }
}

pub fn project_point(h: &Homography, image: (f64, f64)) -> Result<(f64, f64), GeometryError> {
    h.to_field(image)
}

/// Similarity moving the centroid to the origin with mean distance √2.
fn normalizer(points: impl Iterator<Item = (f64, f64)> + Clone) -> Result<Matrix3<f64>, GeometryError> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (cx, cy) = (sx / n, sy / n);
    let mean = points.map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
    if !mean.is_finite() || mean <= 0.0 {
        return Err(GeometryError::DegenerateConfiguration);
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn apply(t: &Matrix3<f64>, p: (f64, f64)) -> (f64, f64) {
    (t[(0, 0)] * p.0 + t[(0, 2)], t[(1, 1)] * p.1 + t[(1, 2)])
}

/// Normalized direct linear transform from image to field coordinates.
pub fn estimate_homography(pairs: &[Correspondence]) -> Result<Homography, GeometryError> {
    let n = pairs.len();
    if n < 4 {
        return Err(GeometryError::InsufficientPoints(n));
    }
    let t_img = normalizer(pairs.iter().map(|c| c.image))?;
    let t_fld = normalizer(pairs.iter().map(|c| c.field))?;

    // Zero rows keep the system at least 9×9 so all nine singular vectors exist.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, c) in pairs.iter().enumerate() {
        let (x, y) = apply(&t_img, c.image);
        let (u, v) = apply(&t_fld, c.field);
        let r = 2 * i;
        for (j, val) in [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u].into_iter().enumerate() {
            a[(r, j)] = val;
        }
        for (j, val) in [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v].into_iter().enumerate() {
            a[(r + 1, j)] = val;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(GeometryError::DegenerateConfiguration)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = |k: usize| svd.singular_values[order[k]];
    let (s1, s8, s9) = (sigma(0), sigma(7), sigma(8));
    if s1.is_nan() || s1 <= 0.0 || (s8 - s9).abs() <= 1e-9 * s1 {
        return Err(GeometryError::DegenerateConfiguration);
    }
    let h = v_t.row(order[8]);
    let h_norm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_fld_inv = t_fld.try_inverse().ok_or(GeometryError::DegenerateConfiguration)?;
    let mut out = Homography::from_matrix(t_fld_inv * h_norm * t_img)?;
    out.n_points = n;
    out.rms_error = reprojection_error(&out, pairs)?;
    Ok(out)
}

/// RMS pixel distance between observed image points and field points mapped
/// back into the image.
pub fn reprojection_error(h: &Homography, pairs: &[Correspondence]) -> Result<f64, GeometryError> {
    if pairs.is_empty() {
        return Err(GeometryError::Empty);
    }
    let mut sum = 0.0;
    for c in pairs {
        let (x, y) = h.to_image(c.field)?;
        sum += (x - c.image.0).powi(2) + (y - c.image.1).powi(2);
    }
    Ok((sum / pairs.len() as f64).sqrt())
}
