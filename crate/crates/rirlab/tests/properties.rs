//! Randomized invariant checks over the numeric core.

use proptest::prelude::*;

use rirlab::decompose::{decompose, DEFAULT_FADE, DEFAULT_GUARD};
use rirlab::echo_density::{echo_density, GAUSSIAN_TAIL_FRACTION};
use rirlab::estimators::{onset_delay_estimate, DEFAULT_ONSET_THRESHOLD};
use rirlab::eval::{mae, quantile, relative_mae, ribbon};
use rirlab::room::Rir;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, len)
}

proptest! {
    #[test]
    fn mae_scales_with_both_arguments(
        y in finite_vec(1..40),
        e in finite_vec(1..40),
        k in 0.01f64..50.0,
    ) {
        let n = y.len().min(e.len());
        let y = &y[..n];
        let pred: Vec<f64> = y.iter().zip(e).map(|(a, b)| a + b).collect();
        let base = mae(y, &pred).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * k).collect();
        let ps: Vec<f64> = pred.iter().map(|v| v * k).collect();
        let scaled = mae(&ys, &ps).unwrap();
        prop_assert!((scaled - k * base).abs() <= 1e-9 * (1.0 + k * base));
    }

    #[test]
    fn relative_mae_is_scale_invariant(
        y in proptest::collection::vec(0.5f64..50.0, 1..40),
        e in finite_vec(1..40),
        k in 0.01f64..50.0,
    ) {
        let n = y.len().min(e.len());
        let y = &y[..n];
        let pred: Vec<f64> = y.iter().zip(e).map(|(a, b)| a + b).collect();
        let base = relative_mae(y, &pred).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * k).collect();
        let ps: Vec<f64> = pred.iter().map(|v| v * k).collect();
        let scaled = relative_mae(&ys, &ps).unwrap();
        prop_assert!((scaled - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn quantile_is_monotone_and_bounded(
        mut xs in finite_vec(1..60),
        p in 0.0f64..=1.0,
        q in 0.0f64..=1.0,
    ) {
        xs.sort_by(f64::total_cmp);
        let lo = p.min(q);
        let hi = p.max(q);
        let a = quantile(&xs, lo);
        let b = quantile(&xs, hi);
        prop_assert!(a <= b + 1e-12);
        prop_assert!(xs[0] - 1e-12 <= a && b <= xs[xs.len() - 1] + 1e-12);
    }

    #[test]
    fn ribbon_bins_partition_the_samples(
        cov in finite_vec(2..80),
        n_bins in 2usize..12,
    ) {
        let errs: Vec<f64> = cov.iter().map(|c| c.abs() * 0.5 + 1.0).collect();
        let bins = ribbon(&cov, &errs, n_bins).unwrap();
        prop_assert_eq!(bins.len(), n_bins);
        let total: usize = bins.iter().map(|b| b.count).sum();
        prop_assert_eq!(total, cov.len());
        let lo = cov.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cov.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((bins[0].lo - lo).abs() <= 1e-9 * (1.0 + lo.abs()));
        prop_assert!((bins[n_bins - 1].hi - hi).abs() <= 1e-9 * (1.0 + hi.abs()));
    }

    #[test]
    fn onset_estimate_ignores_gain(
        delay in 10usize..400,
        gain in 0.01f64..100.0,
    ) {
        let mut x = vec![0.0f64; 1000];
        x[delay] = 0.7;
        x[delay + 5] = -0.4;
        let a = onset_delay_estimate(&x, 16_000, 343.0, DEFAULT_ONSET_THRESHOLD).unwrap();
        let scaled: Vec<f64> = x.iter().map(|s| s * gain).collect();
        let b = onset_delay_estimate(&scaled, 16_000, 343.0, DEFAULT_ONSET_THRESHOLD).unwrap();
        prop_assert_eq!(a.r_hat, b.r_hat);
    }
}

proptest! {
    // The decomposition and echo density cases run a full RIR pipeline, so
    // keep the case count low.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_commutes_with_scaling(
        seed in 0u64..1000,
        scale in 0.1f64..40.0,
        t_mix in 0.05f64..0.12,
    ) {
        let mut r = rirlab::rng::substream(seed, 0, "prop-decompose");
        let samples: Vec<f64> =
            (0..3000).map(|_| rirlab::util::gaussian(&mut r)).collect();
        let rir = Rir {
            samples,
            sample_rate: 16_000,
            tau_d: 0.01,
            room_ref: None,
            pair_ref: None,
        };
        let scaled_rir = Rir {
            samples: rir.samples.iter().map(|s| s * scale).collect(),
            ..rir.clone()
        };
        let a = decompose(&rir, t_mix, DEFAULT_GUARD, DEFAULT_FADE).unwrap();
        let b = decompose(&scaled_rir, t_mix, DEFAULT_GUARD, DEFAULT_FADE).unwrap();
        for name in rirlab::decompose::VARIANT_NAMES {
            let va = &a.get(name).unwrap().samples;
            let vb = &b.get(name).unwrap().samples;
            for (x, y) in va.iter().zip(vb) {
                prop_assert!((x * scale - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn echo_density_stays_in_range(seed in 0u64..1000) {
        let mut r = rirlab::rng::substream(seed, 0, "prop-eta");
        let samples: Vec<f64> =
            (0..4000).map(|_| rirlab::util::gaussian(&mut r)).collect();
        let rir = Rir {
            samples,
            sample_rate: 16_000,
            tau_d: 0.0,
            room_ref: None,
            pair_ref: None,
        };
        let p = echo_density(&rir, 0.02, 0.002).unwrap();
        for &eta in &p.eta {
            prop_assert!(eta >= 0.0);
            prop_assert!(eta <= 1.0 / GAUSSIAN_TAIL_FRACTION + 1e-12);
        }
    }
}
