//! Command-line front end for the rirlab toolkit.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 infeasible geometry.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rirlab::dataset::{generate, DatasetConfig, Manifest};
use rirlab::decompose::VARIANT_NAMES;
use rirlab::echo_density::{
    echo_density, mixing_time, write_profile_csv, DEFAULT_HOP, DEFAULT_MIXING_THRESHOLD,
    DEFAULT_WINDOW_LEN,
};
use rirlab::eval::{
    build_matrix, read_predictions_csv, write_matrix_csv, write_predictions_csv, write_ribbon_csv,
    COVARIATE_NAMES,
};
use rirlab::room::{Point3, Rir, RoomSpec, SimConfig, SourceReceiverPair};

#[derive(Parser)]
#[command(name = "rirlab", version, about = "Room acoustics simulation and evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a shoebox RIR and write it as WAV plus a JSON sidecar.
    Simulate(SimulateArgs),
    /// Split an RIR into its four variants at the mixing time.
    Decompose(DecomposeArgs),
    /// Compute acoustic metrics (DRR, C50, T60) for an RIR.
    Metrics(MetricsArgs),
    /// Generate a matched scenario x variant dataset with a manifest.
    Dataset(DatasetArgs),
    /// Evaluate predictions into a results matrix and ribbon tables.
    Eval(EvalArgs),
    /// Run the built-in analytic baselines over a dataset.
    Baselines(BaselinesArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Room dimensions as WxLxH in meters, e.g. 6x5x3.
    #[arg(long)]
    room: String,
    /// Uniform absorption coefficient for all six surfaces.
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Per-surface absorption (wall_x0,wall_x1,wall_y0,wall_y1,floor,ceiling);
    /// overrides --alpha.
    #[arg(long)]
    absorption: Option<String>,
    /// Source position x,y,z in meters.
    #[arg(long)]
    src: String,
    /// Microphone position x,y,z in meters.
    #[arg(long)]
    mic: String,
    #[arg(long, default_value_t = 16_000)]
    fs: u32,
    /// Per-axis image order; 0 picks it from the room's Sabine T60.
    #[arg(long, default_value_t = 0)]
    order: u32,
    #[arg(long)]
    seed: Option<u64>,
    /// Output WAV path; a .json sidecar is written next to it.
    #[arg(long, default_value = "rir.wav")]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input RIR WAV.
    input: PathBuf,
    /// JSON sidecar holding tau_d; defaults to <input>.json.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Ground-truth propagation delay in seconds, overriding the sidecar.
    #[arg(long)]
    tau_d: Option<f64>,
    /// Output directory for the variant WAVs and boundaries.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Input RIR WAV.
    input: PathBuf,
    /// JSON sidecar holding tau_d (and optionally the room); defaults to
    /// <input>.json.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Ground-truth propagation delay in seconds, overriding the sidecar.
    #[arg(long)]
    tau_d: Option<f64>,
    /// Also write the echo density profile CSV here.
    #[arg(long)]
    echo_density_csv: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    /// JSON config mirroring the generation parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    /// Directory of anechoic speech WAVs (synthetic speech when omitted).
    #[arg(long)]
    speech_dir: Option<PathBuf>,
    /// Store float32 WAVs instead of peak-scaled 16-bit PCM.
    #[arg(long)]
    float32: bool,
    /// Worker threads for generation; 0 = logical cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Predictions CSV (sample_id,scenario,variant,method,r_true,r_hat).
    #[arg(long, conflicts_with = "builtin_baselines")]
    predictions: Option<PathBuf>,
    /// Run the built-in onset-delay and prior-median baselines instead.
    #[arg(long)]
    builtin_baselines: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results_matrix.csv, ribbon tables, report.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BaselinesArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output predictions CSV.
    #[arg(long, default_value = "predictions.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use rirlab::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::GeometryInfeasible(_)) | Some(E::DegenerateRoom) => 4,
        // A WAV that cannot be opened is a data error like any other missing
        // file; one that opens but fails to parse is malformed input.
        Some(E::Wav(hound::Error::IoError(_))) => 3,
        Some(E::InvalidConfig(_))
        | Some(E::IndivisibleN(..))
        | Some(E::WindowTooShort(_))
        | Some(E::Wav(_)) => 2,
        Some(_) => 3,
        // Non-library failures (bad flags, malformed numbers) are usage
        // errors; missing or unreadable files are data errors.
        None if err.downcast_ref::<std::io::Error>().is_some() => 3,
        None if err.downcast_ref::<serde_json::Error>().is_some() => 3,
        None => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Baselines(args) => cmd_baselines(args),
    }
}

/// Seed resolution: explicit flag, then RIRLAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("RIRLAB_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("RIRLAB_SEED must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

fn parse_triple(s: &str, sep: char, what: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(sep).collect();
    if parts.len() != 3 {
        bail!("{what} must have three '{sep}'-separated components, got {s:?}");
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.trim().parse().with_context(|| format!("bad number {p:?} in {what}"))?;
    }
    Ok(out)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let [w, l, h] = parse_triple(&args.room, 'x', "--room")?;
    let absorption = match &args.absorption {
        Some(list) => {
            let parts: Vec<&str> = list.split(',').collect();
            if parts.len() != 6 {
                bail!("--absorption needs six comma-separated values");
            }
            let mut a = [0.0; 6];
            for (o, p) in a.iter_mut().zip(&parts) {
                *o = p.trim().parse().with_context(|| format!("bad absorption {p:?}"))?;
            }
            a
        }
        None => [args.alpha; 6],
    };
    let room = RoomSpec::new(w, l, h, absorption)?;
    let [sx, sy, sz] = parse_triple(&args.src, ',', "--src")?;
    let [mx, my, mz] = parse_triple(&args.mic, ',', "--mic")?;
    let pair = SourceReceiverPair::new(Point3::new(sx, sy, sz), Point3::new(mx, my, mz));

    let mut cfg = SimConfig {
        sample_rate: args.fs,
        seed: resolve_seed(args.seed)?,
        ..SimConfig::default()
    };
    cfg.max_image_order = if args.order == 0 {
        rirlab::ism::required_image_order(&room, &pair, &cfg)
    } else {
        args.order
    };

    let rir = rirlab::ism::simulate_rir(&room, &pair, &cfg)?;
    rirlab::wav::write_mono_f32(&args.out, &rir.samples, cfg.sample_rate)?;

    let sidecar = sidecar_path(&args.out);
    let doc = serde_json::json!({
        "room": room,
        "pair": pair,
        "config": cfg,
        "tau_d": rir.tau_d,
        "duration_s": rir.duration(),
    });
    std::fs::write(&sidecar, format!("{:#}\n", doc))?;
    println!(
        "wrote {} ({} samples) and {}",
        args.out.display(),
        rir.samples.len(),
        sidecar.display()
    );
    Ok(())
}

fn sidecar_path(wav: &Path) -> PathBuf {
    let mut p = wav.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Load an RIR plus its ground-truth delay from WAV + sidecar/flag.
fn load_rir(input: &Path, sidecar: Option<&Path>, tau_d: Option<f64>) -> Result<(Rir, serde_json::Value)> {
    let (samples, sample_rate) = rirlab::wav::read_mono(input)?;
    let default_sidecar = sidecar_path(input);
    let sidecar = sidecar.map(Path::to_path_buf).unwrap_or(default_sidecar);
    let doc: serde_json::Value = if sidecar.exists() {
        serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?
    } else {
        serde_json::Value::Null
    };
    let tau_d = match tau_d.or_else(|| doc.get("tau_d").and_then(|v| v.as_f64())) {
        Some(t) => t,
        None => bail!(
            "no propagation delay available: pass --tau-d or provide the {} sidecar",
            sidecar.display()
        ),
    };
    Ok((Rir { samples, sample_rate, tau_d, room_ref: None, pair_ref: None }, doc))
}

fn cmd_decompose(args: DecomposeArgs) -> Result<()> {
    let (rir, _) = load_rir(&args.input, args.sidecar.as_deref(), args.tau_d)?;
    let profile = echo_density(&rir, DEFAULT_WINDOW_LEN, DEFAULT_HOP)?;
    let mix = mixing_time(&profile, DEFAULT_MIXING_THRESHOLD)?;
    if !mix.found {
        bail!(rirlab::Error::BoundaryOrderViolation(
            "echo density never reaches the mixing threshold; simulate a longer RIR".into()
        ));
    }
    let set = rirlab::decompose::decompose(
        &rir,
        mix.t_mix,
        rirlab::decompose::DEFAULT_GUARD,
        rirlab::decompose::DEFAULT_FADE,
    )?;

    std::fs::create_dir_all(&args.out)?;
    for name in VARIANT_NAMES {
        let variant = set.get(name).expect("known variant");
        let path = args.out.join(format!("{name}.wav"));
        rirlab::wav::write_mono_f32(&path, &variant.samples, variant.sample_rate)?;
    }
    let boundaries_path = args.out.join("boundaries.json");
    std::fs::write(&boundaries_path, format!("{:#}\n", serde_json::json!(set.boundaries)))?;

    let b = set.boundaries;
    println!(
        "tau_d = {:.1} ms, t_d = {:.1} ms, t_mix = {:.1} milliseconds",
        b.tau_d * 1e3,
        b.t_d * 1e3,
        b.t_mix * 1e3
    );
    println!("wrote 4 variants and {}", boundaries_path.display());
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let (rir, doc) = load_rir(&args.input, args.sidecar.as_deref(), args.tau_d)?;
    let profile = echo_density(&rir, DEFAULT_WINDOW_LEN, DEFAULT_HOP)?;
    let mix = mixing_time(&profile, DEFAULT_MIXING_THRESHOLD)?;
    let t_d = rir.tau_d + rirlab::decompose::DEFAULT_GUARD;

    let t60_sabine = doc
        .get("room")
        .filter(|r| !r.is_null())
        .map(|r| -> Result<f64> {
            let room: RoomSpec = serde_json::from_value(r.clone())?;
            Ok(rirlab::room::sabine_t60(&room)?)
        })
        .transpose()?;

    let report = serde_json::json!({
        "drr_db": rirlab::acoustics::drr(&rir, t_d)?,
        "c50_db": rirlab::acoustics::c50(&rir, rir.tau_d)?,
        "t60_schroeder": rirlab::acoustics::schroeder_t60(&rir).ok(),
        "t60_sabine": t60_sabine,
        "tau_d": rir.tau_d,
        "t_mix": if mix.found { Some(mix.t_mix) } else { None },
    });
    println!("{report:#}");

    if let Some(csv) = &args.echo_density_csv {
        let file = std::fs::File::create(csv)?;
        write_profile_csv(&profile, std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn cmd_dataset(args: DatasetArgs) -> Result<()> {
    let mut cfg: DatasetConfig = match &args.config {
        Some(path) => serde_json::from_str(
            &std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?,
        )?,
        None => DatasetConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if args.seed.is_some() || std::env::var_os("RIRLAB_SEED").is_some() {
        cfg.seed = resolve_seed(args.seed)?;
    }
    if let Some(d) = args.duration {
        cfg.duration_s = d;
    }
    if let Some(r) = args.r_min {
        cfg.r_min = r;
    }
    if let Some(r) = args.r_max {
        cfg.r_max = r;
    }
    if let Some(k) = args.folds {
        cfg.folds = k;
    }
    if let Some(dir) = &args.speech_dir {
        cfg.speech_dir = Some(dir.clone());
    }
    if args.float32 {
        cfg.float32 = true;
    }

    let manifest = rirlab::run_with_threads(args.threads, || generate(&cfg, &args.out))?;
    println!(
        "wrote {} records ({} waveforms) under {}",
        manifest.records.len(),
        manifest.records.len() * 16,
        args.out.display()
    );
    Ok(())
}

fn cmd_baselines(args: BaselinesArgs) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let root = args.manifest.parent().unwrap_or(Path::new("."));
    let preds = rirlab::baselines::builtin_baseline_predictions(&manifest, root)?;
    let file = std::fs::File::create(&args.out)?;
    write_predictions_csv(&preds, std::io::BufWriter::new(file))?;
    println!("wrote {} predictions to {}", preds.len(), args.out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let preds = if args.builtin_baselines {
        let root = args.manifest.parent().unwrap_or(Path::new("."));
        rirlab::baselines::builtin_baseline_predictions(&manifest, root)?
    } else {
        let path = args
            .predictions
            .as_ref()
            .ok_or_else(|| anyhow!("pass --predictions <csv> or --builtin-baselines"))?;
        let file = std::fs::File::open(path)
            .map_err(rirlab::Error::from)
            .with_context(|| format!("opening {}", path.display()))?;
        read_predictions_csv(std::io::BufReader::new(file))?
    };

    let seed = resolve_seed(args.seed)?;
    let report = build_matrix(&preds, &manifest, seed)?;

    std::fs::create_dir_all(&args.out)?;
    let matrix_path = args.out.join("results_matrix.csv");
    write_matrix_csv(&report, std::io::BufWriter::new(std::fs::File::create(&matrix_path)?))?;
    for covariate in COVARIATE_NAMES {
        let path = args.out.join(format!("ribbon_{covariate}.csv"));
        write_ribbon_csv(&report, covariate, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    let json_path = args.out.join("report.json");
    serde_json::to_writer_pretty(
        std::io::BufWriter::new(std::fs::File::create(&json_path)?),
        &report,
    )?;
    println!("wrote {} and ribbon tables under {}", matrix_path.display(), args.out.display());
    Ok(())
}
