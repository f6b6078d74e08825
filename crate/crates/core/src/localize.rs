//! Simulated pose tracking.
//!
//! Pose estimates are the true pose plus Gaussian noise, with occasional
//! dropouts. Each sample draws from its own ChaCha stream keyed by
//! `(seed, index)`, so any sample can be regenerated on its own. A quality
//! score derived from the error drives a three-state tracking machine and
//! the user guidance text.

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom;

/// Horizontal error at which quality reaches zero.
pub const QUALITY_FLOOR: f64 = 0.5;
pub const TRACKED_MIN_QUALITY: f64 = 0.7;
pub const LIMITED_MIN_QUALITY: f64 = 0.2;
/// Quality needed to leave `NoPose`.
pub const RECOVER_MIN_QUALITY: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalizeError {
    #[error("invalid noise model: {0}")]
    InvalidModel(String),
    #[error("no samples with a pose estimate")]
    NoValidSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-axis standard deviation in x and z.
    pub sigma_xy: f64,
    pub sigma_y: f64,
    pub dropout_prob: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { sigma_xy: 0.0478, sigma_y: 0.0, dropout_prob: 0.0, seed: 42 }
    }
}

impl NoiseModel {
    pub fn new(sigma_xy: f64, sigma_y: f64, dropout_prob: f64, seed: u64) -> Result<Self, LocalizeError> {
        let model = Self { sigma_xy, sigma_y, dropout_prob, seed };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), LocalizeError> {
        if !(self.sigma_xy >= 0.0 && self.sigma_xy.is_finite()) || !(self.sigma_y >= 0.0 && self.sigma_y.is_finite()) {
            return Err(LocalizeError::InvalidModel("sigmas must be finite and non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(LocalizeError::InvalidModel("dropout probability must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Per-axis sigma whose expected horizontal error equals `mean_error`
    /// (the radial error of isotropic 2D noise is Rayleigh distributed).
    pub fn sigma_for_mean_error(mean_error: f64) -> f64 {
        mean_error / (std::f64::consts::PI / 2.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingSample {
    pub true_pose: DVec3,
    pub estimated_pose: Option<DVec3>,
    pub quality: f64,
    /// Horizontal error; absent on dropout.
    pub error: Option<f64>,
}

pub fn quality_from_error(error: f64) -> f64 {
    (1.0 - error / QUALITY_FLOOR).clamp(0.0, 1.0)
}

/// Sample number `index` of the stream defined by `model.seed`.
pub fn simulate_estimate(true_pose: DVec3, model: &NoiseModel, index: u64) -> TrackingSample {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(index);
    let dropout: f64 = rng.random();
    if dropout < model.dropout_prob {
        return TrackingSample { true_pose, estimated_pose: None, quality: 0.0, error: None };
    }
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let noise = DVec3::new(normal() * model.sigma_xy, normal() * model.sigma_y, normal() * model.sigma_xy);
    let estimate = true_pose + noise;
    let error = geom::xz(estimate).distance(geom::xz(true_pose));
    TrackingSample { true_pose, estimated_pose: Some(estimate), quality: quality_from_error(error), error: Some(error) }
}

/// `n` samples of a stationary pose, indices `0..n`.
pub fn sample_series(true_pose: DVec3, model: &NoiseModel, n: u64) -> Vec<TrackingSample> {
    (0..n).map(|i| simulate_estimate(true_pose, model, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub mean_error: f64,
    pub rms_error: f64,
    pub max_error: f64,
    /// Samples with an estimate.
    pub sample_count: usize,
    pub dropouts: usize,
}

pub fn error_report(samples: &[TrackingSample]) -> Result<ErrorReport, LocalizeError> {
    let errors: Vec<f64> = samples.iter().filter_map(|s| s.error).collect();
    if errors.is_empty() {
        return Err(LocalizeError::NoValidSamples);
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let max = errors.iter().copied().fold(0.0, f64::max);
    Ok(ErrorReport {
        mean_error: mean,
        // rounding can leave rms one ulp below the mean when all errors are equal
        rms_error: rms.max(mean),
        max_error: max,
        sample_count: errors.len(),
        dropouts: samples.len() - errors.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrackingState {
    #[default]
    Tracked,
    Limited,
    NoPose,
}

impl TrackingState {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tracked => "TRACKED",
            Self::Limited => "LIMITED",
            Self::NoPose => "NO_POSE",
        }
    }
}

impl std::fmt::Display for TrackingState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn update_state(prev: TrackingState, quality: f64) -> TrackingState {
    if prev == TrackingState::NoPose && quality < RECOVER_MIN_QUALITY {
        return TrackingState::NoPose;
    }
    if quality >= TRACKED_MIN_QUALITY {
        TrackingState::Tracked
    } else if quality >= LIMITED_MIN_QUALITY {
        TrackingState::Limited
    } else {
        TrackingState::NoPose
    }
}

/// User guidance for one tracking state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Feedback {
    pub keys: &'static [&'static str],
    pub text: &'static str,
}

pub const GUIDANCE_MOVE_SMOOTHLY: &str = "move_smoothly";
pub const GUIDANCE_FEATURE_RICH: &str = "feature_rich_areas";
pub const GUIDANCE_LIGHTING: &str = "improve_lighting";
pub const GUIDANCE_RESCAN: &str = "rescan";

const LIMITED_FEEDBACK: Feedback = Feedback {
    keys: &[GUIDANCE_MOVE_SMOOTHLY, GUIDANCE_FEATURE_RICH],
    text: "Tracking is limited. Move the device smoothly and point it at areas with more visual detail.",
};

const NO_POSE_FEEDBACK: Feedback = Feedback {
    keys: &[GUIDANCE_LIGHTING, GUIDANCE_RESCAN],
    text: "Tracking lost. Improve the lighting and slowly scan the surroundings again.",
};

pub fn feedback(state: TrackingState) -> Option<Feedback> {
    match state {
        TrackingState::Tracked => None,
        TrackingState::Limited => Some(LIMITED_FEEDBACK),
        TrackingState::NoPose => Some(NO_POSE_FEEDBACK),
    }
}

/// Guidance text; empty when tracking is stable.
pub fn feedback_message(state: TrackingState) -> &'static str {
    feedback(state).map_or("", |f| f.text)
}
