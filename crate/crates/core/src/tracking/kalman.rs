//! Constant-velocity Kalman filter over (cx, cy, a, h) box space.
//!
//! The state is `[cx, cy, a, h, vx, vy, va, vh]`; noise scales follow the
//! usual deep-association tracker convention of being proportional to the
//! box height.

use nalgebra::{SMatrix, SVector};

use super::TrackingError;
use crate::model::BoundingBox;

pub type Vector8 = SVector<f64, 8>;
pub type Matrix8 = SMatrix<f64, 8, 8>;
type Matrix4x8 = SMatrix<f64, 4, 8>;
pub type Matrix4 = SMatrix<f64, 4, 4>;
pub type Vector4 = SVector<f64, 4>;

/// 0.95 quantile of the chi-square distribution with 4 degrees of freedom.
pub const CHI2_95_4DOF: f64 = 9.4877;

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: Vector8,
    pub covariance: Matrix8,
}

impl KalmanState {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_xyah(self.mean[0], self.mean[1], self.mean[2], self.mean[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanFilter {
    pub std_weight_position: f64,
    pub std_weight_velocity: f64,
    /// Multiplier on the process noise standard deviations.
    pub process_scale: f64,
    motion: Matrix8,
    observation: Matrix4x8,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(1.0 / 20.0, 1.0 / 160.0, 1.0)
    }
}

impl KalmanFilter {
    pub fn new(std_weight_position: f64, std_weight_velocity: f64, process_scale: f64) -> Self {
        let mut motion = Matrix8::identity();
        for i in 0..4 {
            motion[(i, i + 4)] = 1.0;
        }
        let observation = Matrix4x8::identity();
        Self { std_weight_position, std_weight_velocity, process_scale, motion, observation }
    }

    pub fn with_process_scale(self, process_scale: f64) -> Self {
        Self { process_scale, ..self }
    }

    pub fn initiate(&self, bbox: &BoundingBox) -> KalmanState {
        let m = bbox.to_xyah();
        let mut mean = Vector8::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&Vector4::from(m));
        let h = m[3];
        let p = self.std_weight_position * h;
        let v = self.std_weight_velocity * h;
        let std = [2.0 * p, 2.0 * p, 1e-2, 2.0 * p, 10.0 * v, 10.0 * v, 1e-5, 10.0 * v];
        let covariance = Matrix8::from_diagonal(&Vector8::from(std.map(|s| s * s)));
        KalmanState { mean, covariance }
    }

    fn process_noise(&self, h: f64) -> Matrix8 {
        let p = self.std_weight_position * h * self.process_scale;
        let v = self.std_weight_velocity * h * self.process_scale;
        let std = [p, p, 1e-2, p, v, v, 1e-5, v];
        Matrix8::from_diagonal(&Vector8::from(std.map(|s| s * s)))
    }

    fn measurement_noise(&self, h: f64) -> Matrix4 {
        let p = self.std_weight_position * h;
        Matrix4::from_diagonal(&Vector4::new(p * p, p * p, 1e-1 * 1e-1, p * p))
    }

    pub fn predict(&self, state: &KalmanState) -> KalmanState {
        let mean = self.motion * state.mean;
        let covariance = self.motion * state.covariance * self.motion.transpose() + self.process_noise(state.mean[3]);
        KalmanState { mean, covariance: symmetrize(covariance) }
    }

    /// Predicted measurement distribution (mean, innovation covariance).
    pub fn project(&self, state: &KalmanState) -> (Vector4, Matrix4) {
        let mean = self.observation * state.mean;
        let cov =
            self.observation * state.covariance * self.observation.transpose() + self.measurement_noise(state.mean[3]);
        (mean, symmetrize4(cov))
    }

    pub fn update(&self, state: &KalmanState, measurement: &BoundingBox) -> Result<KalmanState, TrackingError> {
        let (proj_mean, proj_cov) = self.project(state);
        let chol = proj_cov.cholesky().ok_or(TrackingError::SingularInnovation)?;
        // K = P Hᵀ S⁻¹, computed as (S⁻¹ H P)ᵀ since S and P are symmetric.
        let pht = state.covariance * self.observation.transpose();
        let gain = chol.solve(&pht.transpose()).transpose();
        let innovation = Vector4::from(measurement.to_xyah()) - proj_mean;
        let mean = state.mean + gain * innovation;
        let covariance = state.covariance - gain * proj_cov * gain.transpose();
        Ok(KalmanState { mean, covariance: symmetrize(covariance) })
    }

    /// Squared Mahalanobis distance of the box under the predicted
    /// measurement distribution.
    pub fn gating_distance(&self, state: &KalmanState, measurement: &BoundingBox) -> Result<f64, TrackingError> {
        let (mean, cov) = self.project(state);
        let d = Vector4::from(measurement.to_xyah()) - mean;
        mahalanobis_sq(&cov, &d)
    }
}

pub(crate) fn mahalanobis_sq(cov: &Matrix4, d: &Vector4) -> Result<f64, TrackingError> {
    let chol = cov.cholesky().ok_or(TrackingError::SingularInnovation)?;
    let z = chol.l().solve_lower_triangular(d).ok_or(TrackingError::SingularInnovation)?;
    Ok(z.norm_squared())
}

fn symmetrize(m: Matrix8) -> Matrix8 {
    (m + m.transpose()) * 0.5
}

fn symmetrize4(m: Matrix4) -> Matrix4 {
    (m + m.transpose()) * 0.5
}
