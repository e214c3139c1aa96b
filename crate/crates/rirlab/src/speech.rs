//! Dry speech sources: a synthetic speech-like generator for desk-scale runs
//! and ingestion of an external corpus of anechoic WAV recordings.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::gaussian;

/// Target RMS of the active (non-pause) regions of synthetic speech.
pub const SPEECH_RMS_REF: f64 = 0.05;

/// Opening-click level relative to the rest of the synthetic signal's peak.
pub const ONSET_ANCHOR_GAIN: f64 = 160.0;

/// Generate a speech-like test signal: a drifting-f0 pulse train shaped by
/// formant resonators, amplitude-modulated into utterances with pauses.
///
/// The signal opens mid-utterance at full amplitude, so the waveform onset
/// stays tied to the propagation delay after convolution; pauses cover at
/// least a fifth of the duration; active-region RMS is normalised to
/// [`SPEECH_RMS_REF`].
pub fn synth_speech<R: Rng>(rng: &mut R, duration_s: f64, sample_rate: u32) -> Vec<f64> {
    assert!(duration_s > 0.0, "duration must be positive");
    let fs = f64::from(sample_rate);
    let total = (duration_s * fs).round() as usize;

    // Utterance/pause schedule. The first segment is always voiced so the
    // signal starts active.
    let mut voiced = vec![false; total];
    let mut t = 0usize;
    let mut is_voiced = true;
    while t < total {
        let dur_s = if is_voiced {
            rng.gen_range(0.35..0.8)
        } else {
            rng.gen_range(0.3..0.55)
        };
        let dur = ((dur_s * fs) as usize).max(1);
        let end = (t + dur).min(total);
        if is_voiced {
            for v in &mut voiced[t..end] {
                *v = true;
            }
        }
        t = end;
        is_voiced = !is_voiced;
    }

    // Glottal-style excitation: impulse train with drifting f0, softened by
    // two one-pole lowpasses for a falling source spectrum.
    let mut f0 = rng.gen_range(110.0..220.0);
    let mut phase = 1.0f64; // fire a pulse at the very first voiced sample
    let mut excitation = vec![0.0; total];
    for (i, e) in excitation.iter_mut().enumerate() {
        f0 += gaussian(rng) * 0.02;
        f0 = f0.clamp(90.0, 250.0);
        if voiced[i] {
            phase += f0 / fs;
            if phase >= 1.0 {
                phase -= 1.0;
                *e = 1.0;
            }
            // Light aspiration noise.
            *e += 0.02 * gaussian(rng);
        } else {
            phase = 1.0;
        }
    }
    let lp = |x: &mut [f64], cutoff_hz: f64| {
        let a = (-std::f64::consts::TAU * cutoff_hz / fs).exp();
        let b = 1.0 - a;
        let mut y = 0.0;
        for v in x.iter_mut() {
            y = b * *v + a * y;
            *v = y;
        }
    };
    lp(&mut excitation, 900.0);
    lp(&mut excitation, 900.0);

    // Three formant resonators in cascade.
    let formants = [
        (rng.gen_range(350.0..800.0), rng.gen_range(60.0..110.0)),
        (rng.gen_range(900.0..2000.0), rng.gen_range(80.0..140.0)),
        (rng.gen_range(2200.0..3200.0), rng.gen_range(100.0..180.0)),
    ];
    let mut signal = excitation;
    for (freq, bw) in formants {
        let r = (-std::f64::consts::PI * bw / fs).exp();
        let theta = std::f64::consts::TAU * freq / fs;
        let a1 = -2.0 * r * theta.cos();
        let a2 = r * r;
        let b0 = 1.0 - r;
        let mut y1 = 0.0;
        let mut y2 = 0.0;
        for v in signal.iter_mut() {
            let y = b0 * *v - a1 * y1 - a2 * y2;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }

    // Utterance envelope: 10 ms edge ramps everywhere except the signal
    // start, plus a slow syllabic modulation.
    let ramp = (0.010 * fs) as usize;
    let mut env = vec![0.0; total];
    let mut i = 0;
    while i < total {
        if !voiced[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < total && voiced[i] {
            i += 1;
        }
        let end = i;
        for (j, e) in env.iter_mut().enumerate().take(end).skip(start) {
            let mut v = 1.0f64;
            if start > 0 && j < start + ramp {
                v = v.min((j - start) as f64 / ramp as f64);
            }
            if end < total && j + ramp > end {
                v = v.min((end - j) as f64 / ramp as f64);
            }
            *e = v;
        }
    }
    let syll_rate = rng.gen_range(2.5..4.0);
    let syll_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    for (i, (v, e)) in signal.iter_mut().zip(&env).enumerate() {
        let m = 1.0 - 0.25 * (std::f64::consts::TAU * syll_rate * i as f64 / fs + syll_phase).sin();
        *v *= e * m;
    }

    // Normalise active-region RMS.
    let active: Vec<f64> = signal
        .iter()
        .zip(&env)
        .filter(|(_, &e)| e > 0.01)
        .map(|(s, _)| *s)
        .collect();
    let rms = (active.iter().map(|s| s * s).sum::<f64>() / active.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        let k = SPEECH_RMS_REF / rms;
        for v in &mut signal {
            *v *= k;
        }
    }

    // Anchor the onset: the opening sample is a plosive-like click standing
    // above the rest of the signal, so the direct arrival dominates the
    // convolved waveform's peak even under heavy reverberant gain and the
    // propagation delay is recoverable by a relative threshold detector.
    let peak = signal.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if !signal.is_empty() {
        signal[0] = ONSET_ANCHOR_GAIN * peak;
    }
    signal
}

/// Windowed-sinc resampler. Output length is `floor(len * out_rate / in_rate)`.
pub fn resample(input: &[f64], in_rate: u32, out_rate: u32) -> Vec<f64> {
    if in_rate == out_rate || input.is_empty() {
        return input.to_vec();
    }
    let ratio = f64::from(in_rate) / f64::from(out_rate);
    let out_len = (input.len() as u128 * out_rate as u128 / in_rate as u128) as usize;
    // Anti-aliasing cutoff at 45% of the lower rate, width widened when
    // decimating.
    let cutoff = 0.45 * ratio.recip().min(1.0);
    let half = (32.0 * ratio.max(1.0)).ceil() as isize;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let center = n as f64 * ratio;
        let lo = (center.floor() as isize - half).max(0);
        let hi = (center.floor() as isize + half).min(input.len() as isize - 1);
        let mut acc = 0.0;
        for k in lo..=hi {
            let u = k as f64 - center;
            let sinc = if u.abs() < 1e-12 {
                1.0
            } else {
                let x = std::f64::consts::PI * 2.0 * cutoff * u;
                x.sin() / x
            };
            let w = 0.5 * (1.0 + (std::f64::consts::PI * u / (half as f64 + 1.0)).cos());
            acc += input[k as usize] * 2.0 * cutoff * sinc * w;
        }
        out.push(acc);
    }
    out
}

/// One corpus recording, indexed at ingest time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusItem {
    pub path: PathBuf,
    /// Relative path inside the corpus root; ordering key.
    pub rel: String,
    /// Non-overlapping segments of the target duration available.
    pub n_segments: usize,
}

/// Index over a directory of anechoic speech WAV files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub items: Vec<CorpusItem>,
    pub target_rate: u32,
    pub segment_len: usize,
}

impl CorpusIndex {
    /// Scan a directory (recursively) for WAV files, resampling lengths to
    /// the target rate and segmenting into non-overlapping chunks.
    pub fn ingest<P: AsRef<Path>>(
        dir: P,
        target_rate: u32,
        segment_duration_s: f64,
    ) -> Result<Self> {
        let root = dir.as_ref();
        let segment_len = (segment_duration_s * f64::from(target_rate)).round() as usize;
        let mut files = Vec::new();
        collect_wavs(root, root, &mut files)?;
        files.sort_by(|a, b| a.1.cmp(&b.1));

        let mut items = Vec::new();
        for (path, rel) in files {
            let reader = hound::WavReader::open(&path)?;
            let in_len = reader.duration() as usize;
            let in_rate = reader.spec().sample_rate;
            let out_len = (in_len as u128 * target_rate as u128 / in_rate as u128) as usize;
            let n_segments = out_len / segment_len;
            if n_segments > 0 {
                items.push(CorpusItem { path, rel, n_segments });
            }
        }
        if items.is_empty() {
            return Err(Error::CorpusUnavailable(format!(
                "no usable WAV files of at least {segment_duration_s} s under {}",
                root.display()
            )));
        }
        Ok(Self { items, target_rate, segment_len })
    }

    pub fn total_segments(&self) -> usize {
        self.items.iter().map(|i| i.n_segments).sum()
    }

    /// Map a flat segment index to (item, segment within item).
    pub fn locate(&self, flat: usize) -> Option<(usize, usize)> {
        let mut rest = flat;
        for (i, item) in self.items.iter().enumerate() {
            if rest < item.n_segments {
                return Some((i, rest));
            }
            rest -= item.n_segments;
        }
        None
    }

    /// Load one segment, resampled to the target rate.
    pub fn load_segment(&self, item: usize, segment: usize) -> Result<Vec<f64>> {
        let it = &self.items[item];
        if segment >= it.n_segments {
            return Err(Error::InvalidConfig(format!(
                "segment {segment} out of range for {}",
                it.rel
            )));
        }
        let (samples, in_rate) = crate::wav::read_mono(&it.path)?;
        let resampled = resample(&samples, in_rate, self.target_rate);
        let start = segment * self.segment_len;
        Ok(resampled[start..start + self.segment_len].to_vec())
    }
}

fn collect_wavs(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, String)>) -> Result<()> {
    if !dir.is_dir() {
        return Err(Error::CorpusUnavailable(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_wavs(root, &path, out)?;
        } else if path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("wav"))
            .unwrap_or(false)
        {
            let rel = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .to_string_lossy()
                .into_owned();
            out.push((path, rel));
        }
    }
    Ok(())
}
