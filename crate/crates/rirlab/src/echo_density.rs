//! Normalised echo density profile and mixing time.
//!
//! Per frame, the fraction of samples whose magnitude exceeds the local
//! (window-weighted) standard deviation is normalised by erfc(1/sqrt(2)),
//! so a stationary Gaussian signal scores 1. The mixing time is the first
//! sustained crossing of that profile over a threshold near 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::room::Rir;

/// erfc(1/sqrt(2)): Gaussian tail fraction beyond one standard deviation.
pub const GAUSSIAN_TAIL_FRACTION: f64 = 0.317_310_507_862_914_1;

pub const DEFAULT_WINDOW_LEN: f64 = 0.020;
pub const DEFAULT_HOP: f64 = 0.002;
pub const DEFAULT_MIXING_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoDensityProfile {
    /// Frame centers, seconds. The first frame is centered on the direct
    /// arrival.
    pub times: Vec<f64>,
    /// Normalised echo density per frame.
    pub eta: Vec<f64>,
    pub window_len: f64,
    pub hop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingTime {
    pub t_mix: f64,
    pub threshold_used: f64,
    pub found: bool,
}

/// Compute the normalised echo density profile of an RIR.
pub fn echo_density(rir: &Rir, window_len: f64, hop: f64) -> Result<EchoDensityProfile> {
    if rir.samples.is_empty() {
        return Err(Error::EmptyRir);
    }
    if window_len < 0.005 {
        return Err(Error::InvalidConfig(format!(
            "window_len {window_len} s below the 5 ms minimum"
        )));
    }
    if hop <= 0.0 {
        return Err(Error::InvalidConfig("hop must be > 0".into()));
    }
    let fs = f64::from(rir.sample_rate);
    let win = (window_len * fs).round() as usize;
    if win < 32 {
        return Err(Error::WindowTooShort(win));
    }
    let half = win / 2;
    let hop_samples = ((hop * fs).round() as usize).max(1);

    // Hann weights normalised to unit sum.
    let mut weights: Vec<f64> = (0..win)
        .map(|i| {
            let u = i as f64 / (win - 1) as f64;
            0.5 * (1.0 - (std::f64::consts::TAU * u).cos())
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= wsum;
    }

    let start = (rir.tau_d * fs).round() as usize;
    let mut times = Vec::new();
    let mut eta = Vec::new();
    let mut center = start;
    while center + half < rir.samples.len() {
        let lo = center.saturating_sub(half);
        let frame = &rir.samples[lo..(center + win - half).min(rir.samples.len())];
        let woff = half - (center - lo); // leading weights skipped when clipped
        let mut var = 0.0;
        for (i, &s) in frame.iter().enumerate() {
            var += weights[woff + i] * s * s;
        }
        let sigma = var.sqrt();
        let mut above = 0.0;
        for (i, &s) in frame.iter().enumerate() {
            if s.abs() > sigma {
                above += weights[woff + i];
            }
        }
        times.push(center as f64 / fs);
        eta.push(above / GAUSSIAN_TAIL_FRACTION);
        center += hop_samples;
    }
    Ok(EchoDensityProfile { times, eta, window_len, hop })
}

/// Locate the earliest sustained threshold crossing of the profile.
///
/// A crossing counts when eta reaches the threshold and the next two frames
/// stay above 0.9x of it; single-frame spikes from sparse strong reflections
/// are rejected.
pub fn mixing_time(profile: &EchoDensityProfile, threshold: f64) -> Result<MixingTime> {
    if profile.eta.is_empty() {
        return Err(Error::InvalidConfig("empty echo density profile".into()));
    }
    if !(threshold > 0.0 && threshold <= 1.2) {
        return Err(Error::InvalidConfig(format!(
            "mixing threshold {threshold} outside (0, 1.2]"
        )));
    }
    for i in 0..profile.eta.len() {
        if profile.eta[i] >= threshold {
            let sustained = i + 2 < profile.eta.len()
                && profile.eta[i + 1] >= 0.9 * threshold
                && profile.eta[i + 2] >= 0.9 * threshold;
            if sustained {
                return Ok(MixingTime {
                    t_mix: profile.times[i],
                    threshold_used: threshold,
                    found: true,
                });
            }
        }
    }
    Ok(MixingTime { t_mix: 0.0, threshold_used: threshold, found: false })
}

/// Write a profile as two-column CSV (time_s, eta).
pub fn write_profile_csv<W: std::io::Write>(
    profile: &EchoDensityProfile,
    mut out: W,
) -> Result<()> {
    writeln!(out, "time_s,eta")?;
    for (t, e) in profile.times.iter().zip(&profile.eta) {
        writeln!(out, "{t},{e}")?;
    }
    Ok(())
}
