//! Quantitative validation (velocity / lateral RMSE between replay and
//! source recording) and exposure statistics over the scenario database.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::extract::{OddConfig, ScenarioKind, ScenarioRecord};
use crate::highd::Track;
use crate::replay::SimTrace;
use crate::units::ms_to_kmh;

/// Maps the simulation time base onto recording frames: the simulation
/// trigger time corresponds to the recorded maneuver start frame (the only
/// anchor the two share), and the comparison covers the maneuver interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentWindow {
    /// Recorded frame mapped onto the trigger time.
    pub start_frame: i64,
    pub frame_rate: f64,
    /// Compared interval length, seconds.
    pub duration: f64,
}

fn resample(track: &Track, frame: f64, channel: impl Fn(&crate::highd::KinematicState) -> f64) -> Option<f64> {
    let lo = frame.floor() as i64;
    let hi = frame.ceil() as i64;
    let a = track.state_at(lo)?;
    if lo == hi {
        return Some(channel(a));
    }
    let b = track.state_at(hi)?;
    let w = frame - lo as f64;
    Some(channel(a) * (1.0 - w) + channel(b) * w)
}

fn rmse(diffs: &[f64]) -> Result<f64, StatsError> {
    if diffs.len() < 2 {
        return Err(StatsError::EmptyOverlap);
    }
    let mean_sq = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
    Ok(mean_sq.sqrt())
}

/// RMSE between the simulated and recorded challenger velocity over the
/// maneuver interval, in km/h. The recording is resampled onto the
/// simulation grid by linear interpolation.
pub fn rmse_velocity(
    sim: &SimTrace,
    recorded: &Track,
    window: &AlignmentWindow,
) -> Result<f64, StatsError> {
    let diffs = collect_diffs(sim, recorded, window, Channel::Velocity);
    rmse(&diffs).map(ms_to_kmh)
}

/// RMSE between the simulated and recorded challenger lateral position over
/// the maneuver interval, in meters.
pub fn rmse_lateral(
    sim: &SimTrace,
    recorded: &Track,
    window: &AlignmentWindow,
) -> Result<f64, StatsError> {
    let diffs = collect_diffs(sim, recorded, window, Channel::Lateral);
    rmse(&diffs)
}

#[derive(Clone, Copy)]
enum Channel {
    Velocity,
    Lateral,
}

fn collect_diffs(
    sim: &SimTrace,
    recorded: &Track,
    window: &AlignmentWindow,
    channel: Channel,
) -> Vec<f64> {
    let mut diffs = Vec::new();
    for s in &sim.challenger_states {
        let tau = s.t - sim.trigger_time;
        if tau < -1e-9 || tau > window.duration + 1e-9 {
            continue;
        }
        let frame = window.start_frame as f64 + tau * window.frame_rate;
        let rec = match channel {
            Channel::Velocity => resample(recorded, frame, |st| st.vx),
            Channel::Lateral => resample(recorded, frame, |st| st.y),
        };
        if let Some(rec) = rec {
            let sim_value = match channel {
                Channel::Velocity => s.v,
                Channel::Lateral => s.y,
            };
            diffs.push(sim_value - rec);
        }
    }
    diffs
}

/// Per-scenario comparison between replay and source recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario_ref: String,
    pub rmse_velocity_kmh: f64,
    pub rmse_lateral_m: f64,
    pub n_samples: usize,
    pub aligned_start: f64,
    pub aligned_end: f64,
}

/// Builds the comparison report for one scenario: replays are aligned by
/// mapping the trigger time onto the recorded maneuver start frame and
/// compared over the maneuver interval only.
pub fn compare_trace(
    record: &ScenarioRecord,
    trace: &SimTrace,
    recorded_challenger: &Track,
) -> Result<ComparisonReport, StatsError> {
    let window = AlignmentWindow {
        start_frame: record.start_frame(),
        frame_rate: record.road().frame_rate,
        duration: trace.maneuver_end_time - trace.trigger_time,
    };
    let diffs = collect_diffs(trace, recorded_challenger, &window, Channel::Velocity);
    let n_samples = diffs.len();
    Ok(ComparisonReport {
        scenario_ref: record.label(),
        rmse_velocity_kmh: rmse_velocity(trace, recorded_challenger, &window)?,
        rmse_lateral_m: rmse_lateral(trace, recorded_challenger, &window)?,
        n_samples,
        aligned_start: trace.trigger_time,
        aligned_end: trace.maneuver_end_time,
    })
}

/// Histogram over half-open bins `[origin + k*w, origin + (k+1)*w)`;
/// values landing on an edge fall into the upper bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub unit: String,
}

impl Histogram {
    pub fn sample_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Renders a gnuplot-compatible table: `bin_lo bin_hi count` per line.
    pub fn gnuplot_table(&self) -> String {
        let mut out = format!("# bin_lo bin_hi count ({})\n", self.unit);
        for (i, count) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {}\n",
                self.bin_edges[i],
                self.bin_edges[i + 1],
                count
            ));
        }
        out
    }
}

/// Bins `values` with the given width, anchored at `origin`. Bins span from
/// the origin (or below, when values are smaller) to the largest value;
/// an empty input yields an empty histogram. Non-finite values are an
/// error, not silently dropped.
pub fn histogram(values: &[f64], bin_width: f64, origin: f64) -> Result<Histogram, StatsError> {
    if !(bin_width > 0.0) {
        return Err(StatsError::BadBinWidth { value: bin_width });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { index });
    }
    if values.is_empty() {
        return Ok(Histogram {
            bin_edges: Vec::new(),
            counts: Vec::new(),
            unit: String::new(),
        });
    }
    let bin_of = |v: f64| ((v - origin) / bin_width).floor() as i64;
    let k_lo = values.iter().map(|v| bin_of(*v)).min().unwrap().min(0);
    let k_hi = values.iter().map(|v| bin_of(*v)).max().unwrap();
    let n_bins = (k_hi - k_lo + 1) as usize;
    let mut counts = vec![0u64; n_bins];
    for v in values {
        counts[(bin_of(*v) - k_lo) as usize] += 1;
    }
    let bin_edges = (k_lo..=k_hi + 1)
        .map(|k| origin + k as f64 * bin_width)
        .collect();
    Ok(Histogram {
        bin_edges,
        counts,
        unit: String::new(),
    })
}

fn histogram_with_unit(
    values: &[f64],
    bin_width: f64,
    origin: f64,
    unit: &str,
) -> Result<Histogram, StatsError> {
    let mut h = histogram(values, bin_width, origin)?;
    h.unit = unit.to_string();
    Ok(h)
}

/// Counts per scenario type before and after ODD filtering.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeCount {
    pub total: u64,
    pub after_filter: u64,
}

/// Exposure statistics over a scenario database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub counts: BTreeMap<String, TypeCount>,
    pub brake_initial_distance: Histogram,
    pub brake_peak_deceleration: Histogram,
    pub cutin_initial_distance: Histogram,
    pub cutin_thw: Histogram,
    pub swerve_lateral_range: Histogram,
    /// Largest observed peak deceleration across brake scenarios, m/s².
    pub max_peak_deceleration: Option<f64>,
    pub min_cutin_thw: Option<f64>,
    pub max_cutin_thw: Option<f64>,
}

/// Summarizes a database: counts per type (total and after applying `odd`),
/// parameter histograms and extrema.
pub fn summarize(db: &[ScenarioRecord], odd: &OddConfig) -> StatsReport {
    let filtered = crate::extract::filter_odd(db, odd);
    let mut counts: BTreeMap<String, TypeCount> = BTreeMap::new();
    for kind in [ScenarioKind::Brake, ScenarioKind::CutIn, ScenarioKind::Swerve] {
        counts.insert(kind.to_string(), TypeCount::default());
    }
    for record in db {
        counts.entry(record.kind().to_string()).or_default().total += 1;
    }
    for record in &filtered {
        counts
            .entry(record.kind().to_string())
            .or_default()
            .after_filter += 1;
    }

    let brake_distances: Vec<f64> = db
        .iter()
        .filter_map(|r| match r {
            ScenarioRecord::Brake(s) => Some(s.initial_distance),
            _ => None,
        })
        .collect();
    let brake_peaks: Vec<f64> = db
        .iter()
        .filter_map(|r| match r {
            ScenarioRecord::Brake(s) => Some(s.peak_deceleration),
            _ => None,
        })
        .collect();
    let cutin_distances: Vec<f64> = db
        .iter()
        .filter_map(|r| match r {
            ScenarioRecord::CutIn(s) => Some(s.initial_distance),
            _ => None,
        })
        .collect();
    let cutin_thws: Vec<f64> = db
        .iter()
        .filter_map(|r| match r {
            ScenarioRecord::CutIn(s) => Some(s.thw0),
            _ => None,
        })
        .collect();
    let swerve_ranges: Vec<f64> = db
        .iter()
        .filter_map(|r| match r {
            ScenarioRecord::Swerve(s) => Some(s.lateral_range),
            _ => None,
        })
        .collect();

    StatsReport {
        counts,
        brake_initial_distance: histogram_with_unit(&brake_distances, 5.0, 0.0, "m")
            .unwrap_or_else(|_| empty_histogram("m")),
        brake_peak_deceleration: histogram_with_unit(&brake_peaks, 0.25, 0.0, "m/s^2")
            .unwrap_or_else(|_| empty_histogram("m/s^2")),
        cutin_initial_distance: histogram_with_unit(&cutin_distances, 5.0, 0.0, "m")
            .unwrap_or_else(|_| empty_histogram("m")),
        cutin_thw: histogram_with_unit(&cutin_thws, 0.25, 0.0, "s")
            .unwrap_or_else(|_| empty_histogram("s")),
        swerve_lateral_range: histogram_with_unit(&swerve_ranges, 0.1, 0.0, "m")
            .unwrap_or_else(|_| empty_histogram("m")),
        max_peak_deceleration: fold_max(&brake_peaks),
        min_cutin_thw: fold_min(&cutin_thws),
        max_cutin_thw: fold_max(&cutin_thws),
    }
}

fn empty_histogram(unit: &str) -> Histogram {
    Histogram {
        bin_edges: Vec::new(),
        counts: Vec::new(),
        unit: unit.to_string(),
    }
}

fn fold_max(values: &[f64]) -> Option<f64> {
    values.iter().copied().reduce(f64::max)
}

fn fold_min(values: &[f64]) -> Option<f64> {
    values.iter().copied().reduce(f64::min)
}
