//! Criterion benches: parallel vs sequential dataset generation and the
//! shared-FFT convolution hot path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

use rirlab::convolve::{convolve_one_many, convolve};
use rirlab::dataset::{generate, DatasetConfig};
use rirlab::room::Rir;
use rirlab::run_with_threads;

fn bench_dataset(c: &mut Criterion) {
    let cfg = DatasetConfig {
        n: 4,
        duration_s: 0.5,
        r_min: 1.0,
        r_max: 4.0,
        folds: 4,
        seed: 7,
        ..DatasetConfig::default()
    };
    let mut group = c.benchmark_group("dataset_generate");
    group.sample_size(10);
    for threads in [1usize, 0] {
        let label = if threads == 1 { "sequential" } else { "parallel_default" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &threads, |b, &threads| {
            b.iter(|| {
                let dir = tempfile::tempdir().unwrap();
                run_with_threads(threads, || generate(&cfg, dir.path()).unwrap())
            });
        });
    }
    group.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let mut rng = rirlab::rng::substream(1, 0, "bench");
    let speech: Vec<f64> = (0..160_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let kernels: Vec<Vec<f64>> =
        (0..4).map(|_| (0..8000).map(|_| rng.gen_range(-0.1..0.1)).collect()).collect();
    let kernel_refs: Vec<&[f64]> = kernels.iter().map(|k| k.as_slice()).collect();

    let mut group = c.benchmark_group("convolution");
    group.sample_size(10);
    group.bench_function("shared_fft_4_kernels", |b| {
        b.iter(|| convolve_one_many(&speech, &kernel_refs))
    });
    group.bench_function("independent_4_kernels", |b| {
        b.iter(|| {
            kernels
                .iter()
                .map(|k| {
                    let rir = Rir {
                        samples: k.clone(),
                        sample_rate: 16_000,
                        tau_d: 0.0,
                        room_ref: None,
                        pair_ref: None,
                    };
                    convolve(&speech, 16_000, &rir).unwrap()
                })
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_dataset, bench_convolution);
criterion_main!(benches);
