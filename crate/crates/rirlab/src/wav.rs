//! Mono WAV read/write helpers (16-bit PCM and 32-bit float).

use std::path::Path;

use crate::error::Result;

/// Write a mono 32-bit float WAV. Samples are written as-is (no scaling).
pub fn write_mono_f32<P: AsRef<Path>>(path: P, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        writer.write_sample(s as f32)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Write a mono 16-bit PCM WAV after scaling by `scale`. Values are clamped
/// to the representable range; the caller records `scale` so absolute level
/// stays recoverable.
pub fn write_mono_i16<P: AsRef<Path>>(
    path: P,
    samples: &[f64],
    sample_rate: u32,
    scale: f64,
) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        let v = (s * scale * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Peak-normalization scale targeting 0.99 full scale. Returns 1.0 for silence.
pub fn peak_scale(samples: &[f64]) -> f64 {
    let peak = samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak > 0.0 {
        0.99 / peak
    } else {
        1.0
    }
}

/// Read a WAV as mono f64 samples. Multichannel input is averaged down.
pub fn read_mono<P: AsRef<Path>>(path: P) -> Result<(Vec<f64>, u32)> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let mut out = Vec::with_capacity(reader.len() as usize / channels.max(1));
    match spec.sample_format {
        hound::SampleFormat::Float => {
            let mut frame = Vec::with_capacity(channels);
            for s in reader.samples::<f32>() {
                frame.push(s? as f64);
                if frame.len() == channels {
                    out.push(frame.iter().sum::<f64>() / channels as f64);
                    frame.clear();
                }
            }
        }
        hound::SampleFormat::Int => {
            let full_scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            let mut frame = Vec::with_capacity(channels);
            for s in reader.samples::<i32>() {
                frame.push(s? as f64 / full_scale);
                if frame.len() == channels {
                    out.push(frame.iter().sum::<f64>() / channels as f64);
                    frame.clear();
                }
            }
        }
    }
    Ok((out, spec.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = vec![0.0, 0.5, -0.25, 1.5];
        write_mono_f32(&path, &x, 16000).unwrap();
        let (y, rate) = read_mono(&path).unwrap();
        assert_eq!(rate, 16000);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn i16_scale_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let x = vec![0.1, -0.4, 0.02];
        let scale = peak_scale(&x);
        write_mono_i16(&path, &x, 16000, scale).unwrap();
        let (y, _) = read_mono(&path).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / scale).abs() < 1e-3);
        }
    }
}
