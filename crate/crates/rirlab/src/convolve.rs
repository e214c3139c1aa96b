//! FFT-based linear convolution.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::room::Rir;

/// Full linear convolution of a signal with an RIR.
///
/// Output length is `len(signal) + len(rir) - 1`.
pub fn convolve(signal: &[f64], signal_rate: u32, rir: &Rir) -> Result<Vec<f64>> {
    if signal.is_empty() || rir.samples.is_empty() {
        return Err(Error::InvalidConfig("convolution inputs must be non-empty".into()));
    }
    if signal_rate != rir.sample_rate {
        return Err(Error::SampleRateMismatch(signal_rate, rir.sample_rate));
    }
    Ok(convolve_one_many(signal, &[&rir.samples]).pop().expect("one kernel"))
}

/// Convolve one signal with several kernels, sharing the signal FFT.
///
/// This is the hot path of dataset generation: one speech segment against the
/// four RIR variants.
pub fn convolve_one_many(signal: &[f64], kernels: &[&[f64]]) -> Vec<Vec<f64>> {
    let max_kernel = kernels.iter().map(|k| k.len()).max().unwrap_or(0);
    if max_kernel == 0 || signal.is_empty() {
        return kernels.iter().map(|_| Vec::new()).collect();
    }
    let out_len = signal.len() + max_kernel - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut sig_f: Vec<Complex<f64>> = signal
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    fwd.process(&mut sig_f);

    kernels
        .iter()
        .map(|kernel| {
            let mut k_f: Vec<Complex<f64>> = kernel
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
                .take(n)
                .collect();
            fwd.process(&mut k_f);
            for (a, b) in k_f.iter_mut().zip(&sig_f) {
                *a *= b;
            }
            inv.process(&mut k_f);
            let scale = 1.0 / n as f64;
            k_f[..signal.len() + kernel.len() - 1]
                .iter()
                .map(|c| c.re * scale)
                .collect()
        })
        .collect()
}
