//! Command-line pipeline: synthesize or ingest highD-format recordings,
//! extract ALKS scenarios into a database, filter against the operational
//! design domain, export OpenSCENARIO/OpenDRIVE documents and validate by
//! kinematic replay.
//!
//! All diagnostics go to standard error; machine-readable output goes to
//! files or standard output. Exit code 0 means no errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use alks_scenarios::db;
use alks_scenarios::detect::DetectionConfig;
use alks_scenarios::export::{export_scenario_dir, ToolProfile};
use alks_scenarios::extract::{extract_all, filter_odd, OddConfig, ScenarioKind, ScenarioRecord};
use alks_scenarios::highd::{
    canonicalize, discover_recordings, load_recording, Recording, RecordingPaths,
};
use alks_scenarios::replay::replay;
use alks_scenarios::stats::{compare_trace, summarize, ComparisonReport};
use alks_scenarios::synth::{read_plant_file, synthesize_recording, write_highd_csv};

#[derive(Parser)]
#[command(
    name = "alks-scenarios",
    version,
    about = "Extract, export and validate ALKS test scenarios from highD-format recordings"
)]
struct Cli {
    /// Worker threads for per-recording / per-scenario parallelism.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..=256))]
    jobs: u16,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan recordings for scenarios and write the scenario database.
    Extract(ExtractArgs),
    /// Keep only scenarios inside the ALKS operational design domain.
    Filter(FilterArgs),
    /// Render database records as OpenSCENARIO + OpenDRIVE directories.
    Export(ExportArgs),
    /// Replay database records and compare them against the recordings.
    ReplayValidate(ReplayArgs),
    /// Summarize a scenario database (counts, histograms, extrema).
    Stats(StatsArgs),
    /// Generate a synthetic recording with planted scenarios.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Directories containing recording CSV triples.
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Output database file (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Peak deceleration a brake maneuver must reach, m/s².
    #[arg(long = "brake-threshold", default_value_t = 2.0)]
    brake_threshold: f64,
    /// Hysteresis bound locating brake maneuver extents, m/s².
    #[arg(long = "brake-edge", default_value_t = 0.2)]
    brake_edge: f64,
    /// Lateral-velocity threshold for lane-change bounds, m/s.
    #[arg(long = "lc-threshold", default_value_t = 0.2)]
    lc_threshold: f64,
    /// Minimum lateral variation range for swerving, m.
    #[arg(long = "swerve-range", default_value_t = 1.2)]
    swerve_range: f64,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Maximum initial ego velocity, km/h.
    #[arg(long = "max-ego-speed", default_value_t = 70.0)]
    max_ego_speed: f64,
    /// Minimum brake peak deceleration, m/s².
    #[arg(long = "min-peak-decel", default_value_t = 2.0)]
    min_peak_decel: f64,
    /// Minimum swerve lateral range, m.
    #[arg(long = "min-swerve-range", default_value_t = 1.2)]
    min_swerve_range: f64,
    /// Optional cut-in time-headway ceiling, s.
    #[arg(long = "max-thw")]
    max_thw: Option<f64>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    db: PathBuf,
    /// Tool profile: generic, esmini or carla.
    #[arg(long, value_parser = parse_profile)]
    profile: ToolProfile,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    db: PathBuf,
    /// Directories containing the source recordings.
    #[arg(long = "recordings", required = true, num_args = 1..)]
    recordings: Vec<PathBuf>,
    /// Simulation timestep in seconds, (0, 0.1].
    #[arg(long, default_value_t = 0.04, value_parser = parse_timestep)]
    timestep: f64,
    /// Output report file (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Optional directory for per-scenario trace CSV dumps.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    db: PathBuf,
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for gnuplot-compatible histogram tables.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    /// Thresholds used for the post-filter counts.
    #[arg(long = "max-ego-speed", default_value_t = 70.0)]
    max_ego_speed: f64,
    #[arg(long = "min-peak-decel", default_value_t = 2.0)]
    min_peak_decel: f64,
    #[arg(long = "min-swerve-range", default_value_t = 1.2)]
    min_swerve_range: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// Plant specification file (JSON array of plant specs).
    #[arg(long)]
    plants: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for the CSV triple and the ground-truth ledger.
    #[arg(long)]
    out: PathBuf,
    /// Recording id used in file names and metadata.
    #[arg(long = "recording-id", default_value_t = 1)]
    recording_id: u32,
}

fn parse_profile(s: &str) -> Result<ToolProfile, String> {
    ToolProfile::by_name(s)
        .ok_or_else(|| format!("unknown profile `{s}` (expected generic, esmini or carla)"))
}

fn parse_timestep(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v <= 0.1 {
        Ok(v)
    } else {
        Err(format!("timestep {v} outside (0, 0.1]"))
    }
}

fn main() {
    let cli = Cli::parse();
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build_global()
        .ok();
    let result = match cli.command {
        Command::Extract(args) => cmd_extract(args),
        Command::Filter(args) => cmd_filter(args),
        Command::Export(args) => cmd_export(args),
        Command::ReplayValidate(args) => cmd_replay_validate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Synth(args) => cmd_synth(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn collect_recordings(inputs: &[PathBuf]) -> Result<Vec<RecordingPaths>> {
    let mut all = Vec::new();
    for dir in inputs {
        let found =
            discover_recordings(dir).with_context(|| format!("scanning {}", dir.display()))?;
        if found.is_empty() {
            eprintln!("warning: no recordings found in {}", dir.display());
        }
        all.extend(found);
    }
    Ok(all)
}

fn load_canonical(paths: &RecordingPaths) -> Result<Recording> {
    let (recording, warnings) =
        load_recording(&paths.recording_meta, &paths.tracks_meta, &paths.tracks)
            .with_context(|| format!("loading {}", paths.tracks.display()))?;
    for w in &warnings {
        eprintln!("warning: {}: {w}", paths.tracks.display());
    }
    let (canonical, canon_warnings) = canonicalize(&recording);
    for w in &canon_warnings {
        eprintln!("warning: {}: {w}", paths.tracks.display());
    }
    Ok(canonical)
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let config = DetectionConfig {
        brake_peak_threshold: args.brake_threshold,
        brake_edge_threshold: args.brake_edge,
        lc_lateral_velocity_threshold: args.lc_threshold,
        swerve_range_threshold: args.swerve_range,
    };
    config.validate().map_err(|e| anyhow::anyhow!(e))?;

    let recordings = collect_recordings(&args.inputs)?;
    let results: Vec<Result<_>> = recordings
        .par_iter()
        .map(|paths| {
            let canonical = load_canonical(paths)?;
            Ok(extract_all(&canonical, &config))
        })
        .collect();

    let mut scenarios: Vec<ScenarioRecord> = Vec::new();
    let mut skips = alks_scenarios::extract::SkipSummary::default();
    let mut anomalies = 0usize;
    for result in results {
        let extraction = result?;
        scenarios.extend(extraction.scenarios);
        skips.merge(&extraction.skips);
        anomalies += extraction.lane_change_anomalies;
    }
    db::sort_records(&mut scenarios);
    db::write_db(&args.out, &scenarios)
        .with_context(|| format!("writing {}", args.out.display()))?;

    if scenarios.is_empty() {
        eprintln!("warning: empty scenario database");
    }
    // Machine-readable run summary.
    println!("recordings={}", recordings.len());
    println!("scenarios_total={}", scenarios.len());
    for kind in [ScenarioKind::Brake, ScenarioKind::CutIn, ScenarioKind::Swerve] {
        let count = scenarios.iter().filter(|s| s.kind() == kind).count();
        println!("scenarios_{kind}={count}");
    }
    for (reason, count) in &skips.counts {
        println!("skipped_{reason}={count}");
    }
    println!("lane_change_anomalies={anomalies}");
    Ok(())
}

fn odd_config(max_ego: f64, min_peak: f64, min_range: f64, max_thw: Option<f64>) -> OddConfig {
    OddConfig {
        max_ego_velocity_kmh: max_ego,
        min_peak_deceleration: min_peak,
        min_swerve_range: min_range,
        max_cutin_thw: max_thw,
    }
}

fn cmd_filter(args: FilterArgs) -> Result<()> {
    let records =
        db::read_db(&args.db).with_context(|| format!("reading {}", args.db.display()))?;
    let odd = odd_config(
        args.max_ego_speed,
        args.min_peak_decel,
        args.min_swerve_range,
        args.max_thw,
    );
    let kept = filter_odd(&records, &odd);
    db::write_db(&args.out, &kept)?;
    println!("scenarios_in={}", records.len());
    println!("scenarios_kept={}", kept.len());
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let records = db::read_db(&args.db)?;
    std::fs::create_dir_all(&args.out)?;
    let dirs: Vec<Result<PathBuf>> = records
        .par_iter()
        .map(|record| {
            export_scenario_dir(record, &args.profile, &args.out)
                .with_context(|| format!("exporting {}", record.label()))
        })
        .collect();
    let mut count = 0usize;
    for dir in dirs {
        dir?;
        count += 1;
    }
    println!("exported={count}");
    println!("profile={}", args.profile.name);
    Ok(())
}

fn cmd_replay_validate(args: ReplayArgs) -> Result<()> {
    let records = db::read_db(&args.db)?;
    let recordings = collect_recordings(&args.recordings)?;

    // Index canonical recordings by id; only load what the database needs.
    let needed: std::collections::BTreeSet<u32> =
        records.iter().map(|r| r.road().recording_id).collect();
    let mut by_id: BTreeMap<u32, Recording> = BTreeMap::new();
    for paths in &recordings {
        let canonical = load_canonical(paths)?;
        if needed.contains(&canonical.meta.recording_id) {
            by_id.insert(canonical.meta.recording_id, canonical);
        }
    }

    if let Some(dir) = &args.traces {
        std::fs::create_dir_all(dir)?;
    }

    let reports: Vec<Result<ComparisonReport>> = records
        .par_iter()
        .map(|record| {
            let recording_id = record.road().recording_id;
            let recording = by_id.get(&recording_id).with_context(|| {
                format!(
                    "no recording with id {recording_id} among the inputs (scenario {})",
                    record.label()
                )
            })?;
            let track = recording.track(record.challenger().id).with_context(|| {
                format!(
                    "recording {recording_id} has no track {} (scenario {})",
                    record.challenger().id,
                    record.label()
                )
            })?;
            let trace = replay(record, args.timestep)
                .with_context(|| format!("replaying {}", record.label()))?;
            if let Some(dir) = &args.traces {
                let path = dir.join(format!("{}.csv", record.label()));
                db::write_atomic(&path, trace.to_csv().as_bytes())?;
            }
            compare_trace(record, &trace, track)
                .with_context(|| format!("comparing {}", record.label()))
        })
        .collect();

    let mut lines = Vec::new();
    let mut v_sum = 0.0;
    let mut lat_sum = 0.0;
    for report in reports {
        let report = report?;
        v_sum += report.rmse_velocity_kmh;
        lat_sum += report.rmse_lateral_m;
        lines.push(serde_json::to_string(&report)?);
    }
    lines.sort();
    let mut body = lines.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    db::write_atomic(&args.out, body.as_bytes())?;

    let n = records.len().max(1) as f64;
    println!("scenarios={}", records.len());
    println!("mean_rmse_velocity_kmh={:.6}", v_sum / n);
    println!("mean_rmse_lateral_m={:.6}", lat_sum / n);
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let records = db::read_db(&args.db)?;
    let odd = odd_config(
        args.max_ego_speed,
        args.min_peak_decel,
        args.min_swerve_range,
        None,
    );
    let report = summarize(&records, &odd);
    let line = serde_json::to_string(&report)?;
    match &args.out {
        Some(path) => db::write_atomic(path, format!("{line}\n").as_bytes())?,
        None => println!("{line}"),
    }
    if let Some(dir) = &args.gnuplot {
        std::fs::create_dir_all(dir)?;
        for (name, hist) in [
            ("brake_initial_distance", &report.brake_initial_distance),
            ("brake_peak_deceleration", &report.brake_peak_deceleration),
            ("cutin_initial_distance", &report.cutin_initial_distance),
            ("cutin_thw", &report.cutin_thw),
            ("swerve_lateral_range", &report.swerve_lateral_range),
        ] {
            db::write_atomic(
                &dir.join(format!("{name}.dat")),
                hist.gnuplot_table().as_bytes(),
            )?;
        }
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let plants = read_plant_file(&args.plants)
        .with_context(|| format!("reading {}", args.plants.display()))?;
    if plants.is_empty() {
        bail!("plant file {} is empty", args.plants.display());
    }
    let meta = alks_scenarios::synth::default_synthetic_meta(args.recording_id);
    let (recording, ledger) = synthesize_recording(&plants, &meta, args.seed)?;
    let paths = write_highd_csv(&recording, &args.out)?;
    let ledger_path = args
        .out
        .join(format!("{:02}_ledger.jsonl", args.recording_id));
    db::write_atomic(&ledger_path, ledger.to_jsonl().as_bytes())?;
    println!("recording_meta={}", paths.recording_meta.display());
    println!("tracks_meta={}", paths.tracks_meta.display());
    println!("tracks={}", paths.tracks.display());
    println!("ledger={}", ledger_path.display());
    println!("planted={}", ledger.entries.len());
    println!("tracks_generated={}", recording.tracks.len());
    Ok(())
}
