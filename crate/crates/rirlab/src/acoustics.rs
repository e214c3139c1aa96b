//! Broadband acoustic metrics: DRR, C50, and Schroeder T60.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::room::Rir;

/// Relative tail energy below which a ratio is reported as unbounded.
const UNBOUNDED_TAIL_FRACTION: f64 = 1e-12;

/// Metric summary for one RIR. `None` for a dB field means the denominator
/// energy vanished (the +inf case); it is written as an empty CSV cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcousticMetrics {
    pub drr_db: Option<f64>,
    pub c50_db: Option<f64>,
    pub t60_schroeder: Option<f64>,
    pub t60_sabine: f64,
}

/// Direct-to-reverberant ratio in dB, splitting energy at `t_d`.
///
/// Returns `None` when the tail holds less than 1e-12 of the total energy.
pub fn drr(rir: &Rir, t_d: f64) -> Result<Option<f64>> {
    if rir.samples.is_empty() {
        return Err(Error::EmptyRir);
    }
    let fs = f64::from(rir.sample_rate);
    // Direct part covers t <= t_d inclusive.
    let split = (((t_d * fs).floor() as usize).saturating_add(1)).min(rir.samples.len());
    let direct: f64 = rir.samples[..split].iter().map(|s| s * s).sum();
    let tail: f64 = rir.samples[split..].iter().map(|s| s * s).sum();
    Ok(energy_ratio_db(direct, tail))
}

/// Clarity index C50: energy in the 50 ms after the arrival over all later
/// energy, in dB.
pub fn c50(rir: &Rir, arrival: f64) -> Result<Option<f64>> {
    if rir.samples.is_empty() {
        return Err(Error::EmptyRir);
    }
    let fs = f64::from(rir.sample_rate);
    let n = rir.samples.len();
    let start = ((arrival * fs).round() as usize).min(n);
    let split = (((arrival + 0.05) * fs).round() as usize).min(n);
    let early: f64 = rir.samples[start..split].iter().map(|s| s * s).sum();
    let late: f64 = rir.samples[split..].iter().map(|s| s * s).sum();
    Ok(energy_ratio_db(early, late))
}

fn energy_ratio_db(num: f64, den: f64) -> Option<f64> {
    let total = num + den;
    if total <= 0.0 || den < UNBOUNDED_TAIL_FRACTION * total {
        None
    } else {
        Some(10.0 * (num / den).log10())
    }
}

/// Schroeder reverberation time from backward-integrated energy decay.
///
/// The decay curve is fit by least squares over its [-5, -25] dB segment and
/// extrapolated to 60 dB. Trailing exact zeros are excluded so zero-padded
/// variants do not fake a decay.
pub fn schroeder_t60(rir: &Rir) -> Result<f64> {
    if rir.samples.is_empty() {
        return Err(Error::EmptyRir);
    }
    let last_nonzero = match rir.samples.iter().rposition(|&s| s != 0.0) {
        Some(i) => i,
        None => return Err(Error::InsufficientDecay),
    };
    let samples = &rir.samples[..=last_nonzero];
    let fs = f64::from(rir.sample_rate);

    // Backward energy integration.
    let mut edc = vec![0.0; samples.len()];
    let mut acc = 0.0;
    for (i, &s) in samples.iter().enumerate().rev() {
        acc += s * s;
        edc[i] = acc;
    }
    let total = edc[0];
    if total <= 0.0 {
        return Err(Error::InsufficientDecay);
    }

    let db = |e: f64| 10.0 * (e / total).log10();
    let i5 = edc.iter().position(|&e| db(e) <= -5.0);
    let i25 = edc.iter().position(|&e| db(e) <= -25.0);
    let (Some(i5), Some(i25)) = (i5, i25) else {
        return Err(Error::InsufficientDecay);
    };
    // Demand a usable fit segment; a bare impulse collapses to a few samples.
    if i25 <= i5 || (i25 - i5) as f64 / fs < 0.010 {
        return Err(Error::InsufficientDecay);
    }

    // Least-squares line through (t, dB) over the segment.
    let n = (i25 - i5 + 1) as f64;
    let mut st = 0.0;
    let mut sy = 0.0;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for i in i5..=i25 {
        let t = i as f64 / fs;
        let y = db(edc[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if denom <= 0.0 {
        return Err(Error::InsufficientDecay);
    }
    let slope = (n * sty - st * sy) / denom; // dB per second, negative
    if slope >= 0.0 {
        return Err(Error::InsufficientDecay);
    }
    // T60 = 3x the time to fall 20 dB along the fit.
    Ok(3.0 * (-20.0 / slope))
}
