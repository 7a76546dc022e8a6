use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};

use super::config::CameraConfig;
use crate::model::{PITCH_LENGTH_M, PITCH_WIDTH_M};

/// Pinhole broadcast camera with a horizontal pan.
#[derive(Debug, Clone)]
pub struct BroadcastCamera {
    config: CameraConfig,
    aim_x: f64,
    projection: Matrix3x4<f64>,
}

impl BroadcastCamera {
    pub fn new(config: CameraConfig) -> Self {
        let mut cam = Self { config, aim_x: PITCH_LENGTH_M / 2.0, projection: Matrix3x4::zeros() };
        cam.rebuild();
        cam
    }

    pub fn config(&self) -> &CameraConfig {
        &self.config
    }

    pub fn aim_x(&self) -> f64 {
        self.aim_x
    }

    /// Eases the aim point toward the ball, within the pan range.
    pub fn follow(&mut self, ball_x: f64) {
        let half = PITCH_LENGTH_M / 2.0;
        let target = half + ((ball_x - half) * 0.15).clamp(-self.config.pan_range_m, self.config.pan_range_m);
        self.aim_x += self.config.pan_gain * (target - self.aim_x);
        self.rebuild();
    }

    fn rebuild(&mut self) {
        let c = &self.config;
        let eye = Vector3::from(c.position);
        let fwd = (Vector3::new(self.aim_x, PITCH_WIDTH_M / 2.0, 0.0) - eye).normalize();
        let right = fwd.cross(&Vector3::z()).normalize();
        let down = fwd.cross(&right);
        let r = Matrix3::from_rows(&[right.transpose(), down.transpose(), fwd.transpose()]);
        let t = -(r * eye);
        let k = Matrix3::new(c.focal_px, 0.0, c.width_px / 2.0, 0.0, c.focal_px, c.height_px / 2.0, 0.0, 0.0, 1.0);
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        rt.set_column(3, &t);
        self.projection = k * rt;
    }

    /// Image pixel of a 3-D field point (meters, z up).
    pub fn project(&self, x: f64, y: f64, z: f64) -> (f64, f64) {
        let p = self.projection * Vector4::new(x, y, z, 1.0);
        (p.x / p.z, p.y / p.z)
    }

    /// Ground plane → image map.
    pub fn field_to_image(&self) -> Matrix3<f64> {
        let p = &self.projection;
        Matrix3::from_columns(&[p.column(0).into_owned(), p.column(1).into_owned(), p.column(3).into_owned()])
    }

    /// Image → ground plane map, unit Frobenius norm, h₃₃ ≥ 0.
    pub fn image_to_field(&self) -> Matrix3<f64> {
        let h = self.field_to_image().try_inverse().expect("camera is above the pitch");
        let h = h / h.norm();
        if h[(2, 2)] < 0.0 {
            -h
        } else {
            h
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_pitch_in_view() {
        let config = CameraConfig::default();
        let cam = BroadcastCamera::new(config);
        for (x, y) in [(0.0, 0.0), (105.0, 0.0), (105.0, 68.0), (0.0, 68.0)] {
            let (u, v) = cam.project(x, y, 0.0);
            assert!((0.0..config.width_px).contains(&u) && (0.0..config.height_px).contains(&v), "{x},{y} -> {u},{v}");
        }
        let (_, top) = cam.project(52.5, 68.0, 1.8);
        let (_, bottom) = cam.project(52.5, 68.0, 0.0);
        assert!(bottom - top > 50.0);
    }

    #[test]
    fn ground_homography_agrees_with_projection() {
        let mut cam = BroadcastCamera::new(CameraConfig::default());
        cam.follow(100.0);
        let g = cam.field_to_image();
        let h = cam.image_to_field();
        let (u, v) = cam.project(30.0, 20.0, 0.0);
        let p = g * Vector3::new(30.0, 20.0, 1.0);
        assert!((p.x / p.z - u).abs() < 1e-9 && (p.y / p.z - v).abs() < 1e-9);
        let q = h * Vector3::new(u, v, 1.0);
        assert!((q.x / q.z - 30.0).abs() < 1e-9 && (q.y / q.z - 20.0).abs() < 1e-9);
    }
}
