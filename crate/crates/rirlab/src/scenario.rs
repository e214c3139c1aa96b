//! Calibration scenarios: time and level decalibration of generated samples.
//!
//! Level decalibration applies a random gain to the dry speech before
//! convolution. Time decalibration strips the natural propagation delay from
//! the convolved output and prepends a random silence. The RIR itself is
//! never modified.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::room::Rir;

pub const GAIN_RANGE_DB: (f64, f64) = (-6.0, 6.0);

/// One cell of the calibration grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub time_calibrated: bool,
    pub level_calibrated: bool,
}

impl ScenarioSpec {
    /// The four crossed scenarios, fully calibrated first.
    pub fn all_four() -> [ScenarioSpec; 4] {
        [
            ScenarioSpec { time_calibrated: true, level_calibrated: true },
            ScenarioSpec { time_calibrated: true, level_calibrated: false },
            ScenarioSpec { time_calibrated: false, level_calibrated: true },
            ScenarioSpec { time_calibrated: false, level_calibrated: false },
        ]
    }

    pub fn name(&self) -> &'static str {
        match (self.time_calibrated, self.level_calibrated) {
            (true, true) => "fully_calibrated",
            (true, false) => "time_calibrated",
            (false, true) => "level_calibrated",
            (false, false) => "uncalibrated",
        }
    }

    pub fn from_name(name: &str) -> Option<ScenarioSpec> {
        Self::all_four().into_iter().find(|s| s.name() == name)
    }
}

/// The randomisation actually applied to one sample under one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecalibrationDraw {
    /// Leading silence of the emitted waveform, samples. For time-calibrated
    /// scenarios this is the natural delay round(tau_d * fs).
    pub delta_samples: usize,
    /// Gain applied to the dry speech, dB. Zero when level-calibrated.
    pub gain_db: f64,
}

/// Upper bound (inclusive) of the random silence draw, samples.
pub fn max_delta_samples(r_max: f64, sample_rate: u32, speed_of_sound: f64) -> usize {
    (r_max * f64::from(sample_rate) / speed_of_sound).floor() as usize
}

/// Apply the level-calibration dimension to dry speech.
///
/// Uncalibrated draws G ~ U(-6, 6) dB and scales by 10^(G/20) before
/// convolution; calibrated passes the input through with gain 0.
pub fn apply_level<R: Rng>(speech: &[f64], spec: ScenarioSpec, rng: &mut R) -> (Vec<f64>, f64) {
    if spec.level_calibrated {
        return (speech.to_vec(), 0.0);
    }
    let gain_db = rng.gen_range(GAIN_RANGE_DB.0..GAIN_RANGE_DB.1);
    let lin = 10f64.powf(gain_db / 20.0);
    (speech.iter().map(|s| s * lin).collect(), gain_db)
}

/// Apply the time-calibration dimension to the convolved (wet) signal.
///
/// Uncalibrated strips the first round(tau_d * fs) samples and prepends
/// delta ~ U{0, ..., floor(r_max * fs / c)} zeros, restoring the original
/// length. Calibrated returns the input untouched and reports the natural
/// delay.
pub fn apply_time<R: Rng>(
    wet: &[f64],
    tau_d: f64,
    sample_rate: u32,
    spec: ScenarioSpec,
    rng: &mut R,
    r_max: f64,
    speed_of_sound: f64,
) -> Result<(Vec<f64>, usize)> {
    let natural = (tau_d * f64::from(sample_rate)).round() as usize;
    if natural >= wet.len() {
        return Err(Error::DelayExceedsSignal);
    }
    if spec.time_calibrated {
        return Ok((wet.to_vec(), natural));
    }
    let max_delta = max_delta_samples(r_max, sample_rate, speed_of_sound);
    let delta = rng.gen_range(0..=max_delta);
    let mut out = vec![0.0; wet.len()];
    let body = &wet[natural..];
    let take = body.len().min(wet.len().saturating_sub(delta));
    out[delta..delta + take].copy_from_slice(&body[..take]);
    Ok((out, delta))
}

/// Full per-sample pipeline for one scenario:
/// `apply_level -> convolve -> apply_time`.
pub fn build_sample<R1: Rng, R2: Rng>(
    speech: &[f64],
    rir: &Rir,
    spec: ScenarioSpec,
    level_rng: &mut R1,
    time_rng: &mut R2,
    r_max: f64,
    speed_of_sound: f64,
) -> Result<(Vec<f64>, DecalibrationDraw)> {
    let (dry, gain_db) = apply_level(speech, spec, level_rng);
    let wet = crate::convolve::convolve(&dry, rir.sample_rate, rir)?;
    let (out, delta_samples) = apply_time(
        &wet,
        rir.tau_d,
        rir.sample_rate,
        spec,
        time_rng,
        r_max,
        speed_of_sound,
    )?;
    Ok((out, DecalibrationDraw { delta_samples, gain_db }))
}
