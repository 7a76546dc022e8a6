//! Track-level jersey number inference by confidence-weighted voting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_JERSEY_NUMBER: u32 = 99;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JerseyError {
    #[error("jersey number {0} outside 0..=99")]
    ValueOutOfRange(u32),
    #[error("observation confidence {0} outside [0,1]")]
    ConfidenceOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberRules {
    pub min_observations: u32,
    pub min_confidence: f64,
}

impl Default for NumberRules {
    fn default() -> Self {
        Self { min_observations: 3, min_confidence: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberEstimate {
    /// `None` when the evidence is too thin or too split.
    pub value: Option<u8>,
    pub confidence: f64,
    pub observation_count: u32,
}

impl NumberEstimate {
    pub fn unknown() -> Self {
        Self { value: None, confidence: 0.0, observation_count: 0 }
    }
}

/// Per-track accumulated vote weight for each number.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberVotes {
    weights: [f64; 100],
    count: u32,
}

impl Default for NumberVotes {
    fn default() -> Self {
        Self { weights: [0.0; 100], count: 0 }
    }
}

impl NumberVotes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: u32, confidence: f64) -> Result<(), JerseyError> {
        if value > MAX_JERSEY_NUMBER {
            return Err(JerseyError::ValueOutOfRange(value));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(JerseyError::ConfidenceOutOfRange(confidence));
        }
        self.weights[value as usize] += confidence;
        self.count += 1;
        Ok(())
    }

    pub fn weight(&self, value: u32) -> f64 {
        self.weights.get(value as usize).copied().unwrap_or(0.0)
    }

    pub fn observation_count(&self) -> u32 {
        self.count
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Weighted vote: argmax weight (ties go to the lower number),
    /// confidence = top weight / total weight.
    pub fn infer(&self, rules: &NumberRules) -> NumberEstimate {
        let total: f64 = self.weights.iter().sum();
        let (best, top) =
            self.weights
                .iter()
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
        let confidence = if total > 0.0 { (top / total).clamp(0.0, 1.0) } else { 0.0 };
        let known = self.count >= rules.min_observations && total > 0.0 && confidence >= rules.min_confidence;
        NumberEstimate { value: known.then_some(best as u8), confidence, observation_count: self.count }
    }
}
