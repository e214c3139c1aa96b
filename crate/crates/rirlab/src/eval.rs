//! Evaluation statistics: MAE, relative MAE, bootstrap CIs, correlations,
//! ribbon tables, and the scenario x variant results matrix.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::rng::substream;

pub const DEFAULT_CI_LEVEL: f64 = 0.95;
pub const DEFAULT_BOOTSTRAP_B: usize = 2000;
pub const DEFAULT_RIBBON_BINS: usize = 10;

/// Mean absolute error in meters.
pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    Ok(y_true.iter().zip(y_pred).map(|(t, p)| (t - p).abs()).sum::<f64>() / y_true.len() as f64)
}

/// Mean of |y - y_hat| / y; requires strictly positive truths.
pub fn relative_mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.iter().any(|&t| t <= 0.0) {
        return Err(Error::NonPositiveTruth);
    }
    Ok(y_true.iter().zip(y_pred).map(|(t, p)| (t - p).abs() / t).sum::<f64>()
        / y_true.len() as f64)
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap CI for the mean of `errors`.
pub fn bootstrap_ci<R: Rng>(
    errors: &[f64],
    level: f64,
    b: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if errors.len() < 2 {
        return Err(Error::TooFewSamples(errors.len()));
    }
    if !(0.0..1.0).contains(&level) || b == 0 {
        return Err(Error::InvalidConfig(format!("bad bootstrap params level={level} B={b}")));
    }
    let n = errors.len();
    let mut means = Vec::with_capacity(b);
    for _ in 0..b {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += errors[rng.gen_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile(&means, alpha), quantile(&means, 1.0 - alpha)))
}

/// Product-moment correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation: Pearson on mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson_r(&ranks(x), &ranks(y))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            out[k] = mid;
        }
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

/// Equal-width bins over the covariate range with per-bin error quartiles.
/// Empty bins are emitted with count 0 and empty statistics.
pub fn ribbon(covariate: &[f64], abs_errors: &[f64], n_bins: usize) -> Result<Vec<RibbonBin>> {
    if covariate.len() != abs_errors.len() || covariate.is_empty() {
        return Err(Error::LengthMismatch(covariate.len(), abs_errors.len()));
    }
    if n_bins < 2 {
        return Err(Error::InvalidConfig("ribbon needs n_bins >= 2".into()));
    }
    let lo = covariate.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = covariate.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for (&c, &e) in covariate.iter().zip(abs_errors) {
        let b = if width > 0.0 {
            (((c - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        };
        buckets[b].push(e);
    }
    Ok(buckets
        .into_iter()
        .enumerate()
        .map(|(b, mut errs)| {
            errs.sort_by(f64::total_cmp);
            let stat = |p: f64| if errs.is_empty() { None } else { Some(quantile(&errs, p)) };
            RibbonBin {
                lo: lo + b as f64 * width,
                hi: lo + (b + 1) as f64 * width,
                count: errs.len(),
                median: stat(0.5),
                q1: stat(0.25),
                q3: stat(0.75),
            }
        })
        .collect())
}

/// One prediction row of the external CSV interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sample_id: u64,
    pub scenario: String,
    pub variant: String,
    pub method: String,
    pub r_true: f64,
    pub r_hat: f64,
}

pub fn write_predictions_csv<W: std::io::Write>(preds: &[Prediction], mut out: W) -> Result<()> {
    writeln!(out, "sample_id,scenario,variant,method,r_true,r_hat")?;
    for p in preds {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.sample_id, p.scenario, p.variant, p.method, p.r_true, p.r_hat
        )?;
    }
    Ok(())
}

pub fn read_predictions_csv<R: std::io::BufRead>(input: R) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::InvalidConfig(format!(
                "predictions line {}: expected 6 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let parse_f = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("predictions line {}: bad number {s:?}", lineno + 1))
            })
        };
        out.push(Prediction {
            sample_id: fields[0].trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("predictions line {}: bad id", lineno + 1))
            })?,
            scenario: fields[1].trim().to_string(),
            variant: fields[2].trim().to_string(),
            method: fields[3].trim().to_string(),
            r_true: parse_f(fields[4])?,
            r_hat: parse_f(fields[5])?,
        });
    }
    Ok(out)
}

/// One cell of the results matrix. Cells with no predictions carry `n = 0`
/// and null statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub scenario: String,
    pub variant: String,
    pub method: String,
    pub n: usize,
    pub mae_m: Option<f64>,
    pub mae_ci_lo: Option<f64>,
    pub mae_ci_hi: Option<f64>,
    pub rel_mae_pct: Option<f64>,
    pub pearson_r: Option<f64>,
    /// Auxiliary fold-wise statistics: mean of per-fold MAEs with a
    /// t-interval across folds.
    pub fold_mae_mean: Option<f64>,
    pub fold_ci_lo: Option<f64>,
    pub fold_ci_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonTable {
    pub scenario: String,
    pub variant: String,
    pub method: String,
    pub covariate: String,
    pub bins: Vec<RibbonBin>,
    /// Samples whose covariate was an unbounded sentinel (for example a
    /// reverberant-free DRR), excluded from the bins.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cells: Vec<MatrixCell>,
    pub ribbons: Vec<RibbonTable>,
}

pub const COVARIATE_NAMES: [&str; 4] = ["distance", "drr", "c50", "t60"];

/// Two-sided 97.5 % Student-t critical values for small degrees of freedom;
/// the normal value is close enough past 30.
fn t_critical_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::INFINITY
    } else if df <= 30 {
        TABLE[df - 1]
    } else {
        1.96
    }
}

/// Build the full results matrix and ribbon tables from predictions plus the
/// manifest that supplies per-sample folds and covariates.
///
/// The bootstrap RNG is keyed per cell from `seed`, so the report is
/// reproducible regardless of cell evaluation order.
pub fn build_matrix(
    predictions: &[Prediction],
    manifest: &Manifest,
    seed: u64,
) -> Result<EvalReport> {
    let mut groups: BTreeMap<(String, String, String), Vec<&Prediction>> = BTreeMap::new();
    let mut scenarios: Vec<String> = Vec::new();
    let mut variants: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let push_unique = |list: &mut Vec<String>, v: &str| {
        if !list.iter().any(|x| x == v) {
            list.push(v.to_string());
        }
    };
    for p in predictions {
        manifest.record(p.sample_id)?;
        push_unique(&mut scenarios, &p.scenario);
        push_unique(&mut variants, &p.variant);
        push_unique(&mut methods, &p.method);
        groups
            .entry((p.scenario.clone(), p.variant.clone(), p.method.clone()))
            .or_default()
            .push(p);
    }
    scenarios.sort();
    variants.sort();
    methods.sort();

    let mut cells = Vec::new();
    let mut ribbons = Vec::new();
    for scenario in &scenarios {
        for variant in &variants {
            for method in &methods {
                let key = (scenario.clone(), variant.clone(), method.clone());
                let Some(preds) = groups.get(&key) else {
                    cells.push(MatrixCell {
                        scenario: scenario.clone(),
                        variant: variant.clone(),
                        method: method.clone(),
                        n: 0,
                        mae_m: None,
                        mae_ci_lo: None,
                        mae_ci_hi: None,
                        rel_mae_pct: None,
                        pearson_r: None,
                        fold_mae_mean: None,
                        fold_ci_lo: None,
                        fold_ci_hi: None,
                    });
                    continue;
                };
                let (cell, cell_ribbons) =
                    evaluate_cell(scenario, variant, method, preds, manifest, seed)?;
                cells.push(cell);
                ribbons.extend(cell_ribbons);
            }
        }
    }
    Ok(EvalReport { cells, ribbons })
}

fn evaluate_cell(
    scenario: &str,
    variant: &str,
    method: &str,
    preds: &[&Prediction],
    manifest: &Manifest,
    seed: u64,
) -> Result<(MatrixCell, Vec<RibbonTable>)> {
    let y_true: Vec<f64> = preds.iter().map(|p| p.r_true).collect();
    let y_pred: Vec<f64> = preds.iter().map(|p| p.r_hat).collect();
    let errors: Vec<f64> = y_true.iter().zip(&y_pred).map(|(t, p)| (t - p).abs()).collect();

    let mae_m = mae(&y_true, &y_pred)?;
    let rel_pct = relative_mae(&y_true, &y_pred)? * 100.0;
    let (ci_lo, ci_hi) = if errors.len() >= 2 {
        let stage = format!("ci:{scenario}:{variant}:{method}");
        let mut rng = substream(seed, 0, &stage);
        let (lo, hi) = bootstrap_ci(&errors, DEFAULT_CI_LEVEL, DEFAULT_BOOTSTRAP_B, &mut rng)?;
        (Some(lo), Some(hi))
    } else {
        (None, None)
    };
    let pearson = pearson_r(&y_true, &y_pred).ok();

    // Fold-wise MAE across the manifest's CV folds.
    let mut by_fold: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (p, &e) in preds.iter().zip(&errors) {
        by_fold.entry(manifest.record(p.sample_id)?.fold).or_default().push(e);
    }
    let fold_maes: Vec<f64> =
        by_fold.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let (fold_mean, fold_lo, fold_hi) = if fold_maes.len() >= 2 {
        let k = fold_maes.len() as f64;
        let mean = fold_maes.iter().sum::<f64>() / k;
        let var = fold_maes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let half = t_critical_975(fold_maes.len() - 1) * (var / k).sqrt();
        (Some(mean), Some(mean - half), Some(mean + half))
    } else {
        (fold_maes.first().copied(), None, None)
    };

    let mut ribbons = Vec::new();
    for covariate in COVARIATE_NAMES {
        let mut cov = Vec::new();
        let mut errs = Vec::new();
        let mut excluded = 0usize;
        for (p, &e) in preds.iter().zip(&errors) {
            let rec = manifest.record(p.sample_id)?;
            let value = match covariate {
                "distance" => Some(rec.r),
                "drr" => rec.metrics.drr_db,
                "c50" => rec.metrics.c50_db,
                "t60" => rec.metrics.t60_schroeder,
                _ => unreachable!(),
            };
            match value {
                Some(v) => {
                    cov.push(v);
                    errs.push(e);
                }
                None => excluded += 1,
            }
        }
        if cov.is_empty() {
            continue;
        }
        ribbons.push(RibbonTable {
            scenario: scenario.to_string(),
            variant: variant.to_string(),
            method: method.to_string(),
            covariate: covariate.to_string(),
            bins: ribbon(&cov, &errs, DEFAULT_RIBBON_BINS)?,
            excluded,
        });
    }

    Ok((
        MatrixCell {
            scenario: scenario.to_string(),
            variant: variant.to_string(),
            method: method.to_string(),
            n: preds.len(),
            mae_m: Some(mae_m),
            mae_ci_lo: ci_lo,
            mae_ci_hi: ci_hi,
            rel_mae_pct: Some(rel_pct),
            pearson_r: pearson,
            fold_mae_mean: fold_mean,
            fold_ci_lo: fold_lo,
            fold_ci_hi: fold_hi,
        },
        ribbons,
    ))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_matrix_csv<W: std::io::Write>(report: &EvalReport, mut out: W) -> Result<()> {
    writeln!(
        out,
        "scenario,variant,method,mae_m,mae_ci_lo,mae_ci_hi,rel_mae_pct,pearson_r,n,fold_mae_mean,fold_ci_lo,fold_ci_hi"
    )?;
    for c in &report.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.scenario,
            c.variant,
            c.method,
            opt(c.mae_m),
            opt(c.mae_ci_lo),
            opt(c.mae_ci_hi),
            opt(c.rel_mae_pct),
            opt(c.pearson_r),
            c.n,
            opt(c.fold_mae_mean),
            opt(c.fold_ci_lo),
            opt(c.fold_ci_hi),
        )?;
    }
    Ok(())
}

/// Write one `ribbon_<covariate>.csv` table.
pub fn write_ribbon_csv<W: std::io::Write>(
    report: &EvalReport,
    covariate: &str,
    mut out: W,
) -> Result<()> {
    writeln!(
        out,
        "scenario,variant,method,bin_lo,bin_hi,count,median_abs_err,q1,q3,excluded"
    )?;
    for table in report.ribbons.iter().filter(|t| t.covariate == covariate) {
        for bin in &table.bins {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                table.scenario,
                table.variant,
                table.method,
                bin.lo,
                bin.hi,
                bin.count,
                opt(bin.median),
                opt(bin.q1),
                opt(bin.q3),
                table.excluded,
            )?;
        }
    }
    Ok(())
}
