//! Dataset generation: matched scenario x variant corpora with a manifest.
//!
//! Every record is produced from keyed RNG sub-streams, so generation is
//! reproducible bit-exactly from the global seed regardless of thread count
//! or resume state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::{self, AcousticMetrics};
use crate::convolve::convolve_one_many;
use crate::decompose::{decompose, RirVariantSet, DEFAULT_FADE, DEFAULT_GUARD, VARIANT_NAMES};
use crate::echo_density::{
    echo_density, mixing_time, DEFAULT_HOP, DEFAULT_MIXING_THRESHOLD, DEFAULT_WINDOW_LEN,
};
use crate::error::{Error, Result};
use crate::ism::{required_image_order, simulate_rir, MAX_ADAPTIVE_ORDER};
use crate::rng::substream;
use crate::room::{sabine_t60, RoomSpec, SimConfig, SourceReceiverPair};
use crate::sampling::sample_configuration;
use crate::scenario::{apply_time, DecalibrationDraw, ScenarioSpec, GAIN_RANGE_DB};
use crate::speech::{synth_speech, CorpusIndex};
use crate::wav;

pub const MANIFEST_VERSION: u32 = 1;

/// Attempts at drawing a workable configuration for one record before
/// giving up.
const CONFIG_ATTEMPTS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Number of records; must be divisible by `folds`.
    pub n: usize,
    pub duration_s: f64,
    pub sample_rate: u32,
    /// Distance range the targets are drawn from, meters.
    pub r_min: f64,
    pub r_max: f64,
    pub folds: usize,
    pub seed: u64,
    /// Width of the accepted band above each distance target.
    pub distance_tol: f64,
    pub speed_of_sound: f64,
    pub frac_delay_taps: u32,
    pub guard_s: f64,
    pub fade_s: f64,
    /// Write float32 waveforms instead of peak-scaled 16-bit PCM.
    pub float32: bool,
    /// Directory of anechoic speech WAVs; synthetic speech when absent.
    pub speech_dir: Option<PathBuf>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            n: 25,
            duration_s: 10.0,
            sample_rate: 16_000,
            r_min: 1.0,
            r_max: 11.0,
            folds: 5,
            seed: 0,
            distance_tol: 0.05,
            speed_of_sound: 343.0,
            frac_delay_taps: 81,
            guard_s: DEFAULT_GUARD,
            fade_s: DEFAULT_FADE,
            float32: false,
            speech_dir: None,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be > 0".into()));
        }
        if self.folds == 0 || self.n % self.folds != 0 {
            return Err(Error::IndivisibleN(self.n, self.folds));
        }
        if self.duration_s <= 0.0 {
            return Err(Error::InvalidConfig("duration_s must be > 0".into()));
        }
        if !(self.r_min >= 1.0 && self.r_max > self.r_min) {
            return Err(Error::InvalidConfig(format!(
                "bad distance range [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.distance_tol <= 0.0 {
            return Err(Error::InvalidConfig("distance_tol must be > 0".into()));
        }
        Ok(())
    }

    fn duration_samples(&self) -> usize {
        (self.duration_s * f64::from(self.sample_rate)).round() as usize
    }
}

/// One written waveform: path relative to the dataset root, and the factor
/// the float signal was multiplied by before 16-bit quantization (1.0 for
/// float32 storage). Dividing the decoded audio by it restores absolute
/// level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub peak_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: u64,
    pub room: RoomSpec,
    pub pair: SourceReceiverPair,
    /// True source-microphone distance, meters.
    pub r: f64,
    pub tau_d: f64,
    pub t_mix: f64,
    pub t60_sabine: f64,
    pub fold: usize,
    pub speech_ref: String,
    /// Calibration draw actually applied, keyed by scenario name.
    pub draws: BTreeMap<String, DecalibrationDraw>,
    /// scenario name -> variant name -> written file.
    pub files: BTreeMap<String, BTreeMap<String, FileEntry>>,
    pub rir_file: FileEntry,
    pub metrics: AcousticMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub global_seed: u64,
    pub config: DatasetConfig,
    pub records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Manifest> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)?;
        use std::io::Write;
        writeln!(w)?;
        Ok(())
    }

    pub fn record(&self, id: u64) -> Result<&SampleRecord> {
        self.records
            .binary_search_by_key(&id, |r| r.id)
            .map(|i| &self.records[i])
            .map_err(|_| Error::UnknownSampleId(id))
    }
}

/// Uniform random permutation of 0..n partitioned into k equal blocks.
pub fn assign_folds<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k == 0 || n % k != 0 {
        return Err(Error::IndivisibleN(n, k));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let block = n / k;
    let mut folds = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos / block;
    }
    Ok(folds)
}

/// Generate the full dataset under `out_dir` and write `manifest.json` and
/// `metrics.csv` there.
///
/// If a manifest from a previous interrupted run is present with the same
/// seed and config, records whose files all exist are kept as-is and only
/// the missing ones are regenerated (byte-identically, by determinism).
pub fn generate(cfg: &DatasetConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let corpus = match &cfg.speech_dir {
        Some(dir) => Some(CorpusIndex::ingest(dir, cfg.sample_rate, cfg.duration_s)?),
        None => None,
    };
    if let Some(c) = &corpus {
        if c.total_segments() < cfg.n {
            eprintln!(
                "warning: corpus has {} segments for {} records; segments will repeat",
                c.total_segments(),
                cfg.n
            );
        }
    }

    std::fs::create_dir_all(out_dir.join("rir"))?;
    for spec in ScenarioSpec::all_four() {
        for variant in VARIANT_NAMES {
            std::fs::create_dir_all(out_dir.join(spec.name()).join(variant))?;
        }
    }

    // Resume: keep prior records whose files are all on disk.
    let mut reused: BTreeMap<u64, SampleRecord> = BTreeMap::new();
    let manifest_path = out_dir.join("manifest.json");
    if manifest_path.exists() {
        if let Ok(prev) = Manifest::load(&manifest_path) {
            if prev.global_seed == cfg.seed && prev.config == *cfg {
                for rec in prev.records {
                    if rec.id < cfg.n as u64 && record_files_exist(&rec, out_dir) {
                        reused.insert(rec.id, rec);
                    }
                }
            }
        }
    }

    let todo: Vec<u64> = (0..cfg.n as u64).filter(|id| !reused.contains_key(id)).collect();
    let fresh = map_ids(&todo, |id| generate_record(cfg, corpus.as_ref(), out_dir, id))?;

    let mut records: Vec<SampleRecord> = reused.into_values().chain(fresh).collect();
    records.sort_by_key(|r| r.id);

    let folds = assign_folds(cfg.n, cfg.folds, &mut substream(cfg.seed, 0, "folds"))?;
    for rec in &mut records {
        rec.fold = folds[rec.id as usize];
    }

    let manifest =
        Manifest { version: MANIFEST_VERSION, global_seed: cfg.seed, config: cfg.clone(), records };
    manifest.save(&manifest_path)?;
    let metrics_file = std::fs::File::create(out_dir.join("metrics.csv"))?;
    write_metrics_csv(&manifest, std::io::BufWriter::new(metrics_file))?;
    Ok(manifest)
}

fn record_files_exist(rec: &SampleRecord, out_dir: &Path) -> bool {
    if !out_dir.join(&rec.rir_file.path).exists() {
        return false;
    }
    rec.files
        .values()
        .flat_map(|by_variant| by_variant.values())
        .all(|f| out_dir.join(&f.path).exists())
}

#[cfg(feature = "parallel")]
fn map_ids<F>(ids: &[u64], f: F) -> Result<Vec<SampleRecord>>
where
    F: Fn(u64) -> Result<SampleRecord> + Sync + Send,
{
    use rayon::prelude::*;
    ids.par_iter().map(|&id| f(id)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ids<F>(ids: &[u64], f: F) -> Result<Vec<SampleRecord>>
where
    F: Fn(u64) -> Result<SampleRecord> + Sync + Send,
{
    ids.iter().map(|&id| f(id)).collect()
}

/// Simulate a room whose echo density reaches the mixing threshold and
/// whose boundaries admit the decomposition.
fn simulate_workable(
    cfg: &DatasetConfig,
    target: f64,
    config_rng: &mut impl Rng,
) -> Result<(RoomSpec, SourceReceiverPair, crate::room::Rir, f64, RirVariantSet)> {
    for _ in 0..CONFIG_ATTEMPTS {
        // An exhausted rejection budget for a hard target (a long distance
        // needs a large room) just burns one attempt.
        let (room, pair) = match sample_configuration(config_rng, target, cfg.distance_tol) {
            Ok(drawn) => drawn,
            Err(Error::GeometryInfeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut sim = SimConfig {
            sample_rate: cfg.sample_rate,
            speed_of_sound: cfg.speed_of_sound,
            max_image_order: 0,
            frac_delay_taps: cfg.frac_delay_taps,
            seed: cfg.seed,
        };
        let mut order = required_image_order(&room, &pair, &sim);
        loop {
            sim.max_image_order = order;
            let rir = simulate_rir(&room, &pair, &sim)?;
            let profile = echo_density(&rir, DEFAULT_WINDOW_LEN, DEFAULT_HOP)?;
            let mix = mixing_time(&profile, DEFAULT_MIXING_THRESHOLD)?;
            if mix.found {
                match decompose(&rir, mix.t_mix, cfg.guard_s, cfg.fade_s) {
                    Ok(set) => return Ok((room, pair, rir, mix.t_mix, set)),
                    Err(Error::BoundaryOrderViolation(_)) => break,
                    Err(e) => return Err(e),
                }
            }
            // A denser image lattice extends the tail; past the cap the
            // configuration is abandoned instead.
            if order >= MAX_ADAPTIVE_ORDER {
                break;
            }
            order = (order + 10).min(MAX_ADAPTIVE_ORDER);
        }
    }
    Err(Error::GeometryInfeasible(format!(
        "no mixable configuration near target {target:.2} m after {CONFIG_ATTEMPTS} attempts"
    )))
}

fn generate_record(
    cfg: &DatasetConfig,
    corpus: Option<&CorpusIndex>,
    out_dir: &Path,
    id: u64,
) -> Result<SampleRecord> {
    let fs = cfg.sample_rate;
    let dur = cfg.duration_samples();

    let target = substream(cfg.seed, id, "target").gen_range(cfg.r_min..cfg.r_max);
    let mut config_rng = substream(cfg.seed, id, "config");
    let (room, pair, rir, t_mix, variants) = simulate_workable(cfg, target, &mut config_rng)?;

    let (speech, speech_ref) = match corpus {
        Some(c) => {
            let flat = substream(cfg.seed, id, "speech").gen_range(0..c.total_segments());
            let (item, segment) = c.locate(flat).expect("flat index in range");
            let audio = c.load_segment(item, segment)?;
            (audio, format!("corpus:{}#{}", c.items[item].rel, segment))
        }
        None => {
            let mut rng = substream(cfg.seed, id, "speech");
            (synth_speech(&mut rng, cfg.duration_s, fs), format!("synth:{}:{}", cfg.seed, id))
        }
    };
    let mut speech = speech;
    speech.resize(dur, 0.0);

    let gain_db = substream(cfg.seed, id, "gain").gen_range(GAIN_RANGE_DB.0..GAIN_RANGE_DB.1);
    let lin = 10f64.powf(gain_db / 20.0);
    let decal_speech: Vec<f64> = speech.iter().map(|s| s * lin).collect();

    let kernels: Vec<&[f64]> = VARIANT_NAMES
        .iter()
        .map(|name| variants.get(name).expect("known variant").samples.as_slice())
        .collect();
    let wet_cal = convolve_one_many(&speech, &kernels);
    let wet_decal = convolve_one_many(&decal_speech, &kernels);

    let mut files = BTreeMap::new();
    let mut draws = BTreeMap::new();
    for spec in ScenarioSpec::all_four() {
        let wet_set = if spec.level_calibrated { &wet_cal } else { &wet_decal };
        let mut by_variant = BTreeMap::new();
        let mut delta_applied = None;
        for (v, variant) in VARIANT_NAMES.iter().enumerate() {
            // A fresh keyed stream per call makes every variant of every
            // scenario see the same delta draw.
            let mut delay_rng = substream(cfg.seed, id, "delay");
            let (mut out, delta) = apply_time(
                &wet_set[v],
                rir.tau_d,
                fs,
                spec,
                &mut delay_rng,
                cfg.r_max,
                cfg.speed_of_sound,
            )?;
            delta_applied = Some(delta);
            out.truncate(dur);
            let rel = format!("{}/{}/{:05}.wav", spec.name(), variant, id);
            let full_path = out_dir.join(&rel);
            let peak_scale = if cfg.float32 {
                wav::write_mono_f32(&full_path, &out, fs)?;
                1.0
            } else {
                let scale = wav::peak_scale(&out);
                wav::write_mono_i16(&full_path, &out, fs, scale)?;
                scale
            };
            by_variant.insert(variant.to_string(), FileEntry { path: rel, peak_scale });
        }
        files.insert(spec.name().to_string(), by_variant);
        draws.insert(
            spec.name().to_string(),
            DecalibrationDraw {
                delta_samples: delta_applied.expect("at least one variant"),
                gain_db: if spec.level_calibrated { 0.0 } else { gain_db },
            },
        );
    }

    let rir_rel = format!("rir/{id:05}.wav");
    wav::write_mono_f32(out_dir.join(&rir_rel), &rir.samples, fs)?;

    let metrics = AcousticMetrics {
        drr_db: acoustics::drr(&rir, variants.boundaries.t_d)?,
        c50_db: acoustics::c50(&rir, rir.tau_d)?,
        t60_schroeder: acoustics::schroeder_t60(&rir).ok(),
        t60_sabine: sabine_t60(&room)?,
    };

    Ok(SampleRecord {
        id,
        r: pair.distance,
        tau_d: rir.tau_d,
        t_mix,
        t60_sabine: metrics.t60_sabine,
        fold: 0, // assigned globally after generation
        speech_ref,
        draws,
        files,
        rir_file: FileEntry { path: rir_rel, peak_scale: 1.0 },
        metrics,
        room,
        pair,
    })
}

/// Per-record acoustic summary table.
pub fn write_metrics_csv<W: std::io::Write>(manifest: &Manifest, mut out: W) -> Result<()> {
    writeln!(out, "id,r,tau_d,t_mix,fold,drr_db,c50_db,t60_schroeder,t60_sabine,volume")?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for rec in &manifest.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            rec.id,
            rec.r,
            rec.tau_d,
            rec.t_mix,
            rec.fold,
            opt(rec.metrics.drr_db),
            opt(rec.metrics.c50_db),
            opt(rec.metrics.t60_schroeder),
            rec.metrics.t60_sabine,
            rec.room.volume(),
        )?;
    }
    Ok(())
}
