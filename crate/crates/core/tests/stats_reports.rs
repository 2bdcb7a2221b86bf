//! Database summarization and the RMSE invariants.

mod common;

use common::{brake_record, cutin_record, swerve_record};

use alks_scenarios::extract::OddConfig;
use alks_scenarios::highd::{KinematicState, Track};
use alks_scenarios::replay::{SimState, SimTrace};
use alks_scenarios::stats::{histogram, rmse_lateral, rmse_velocity, summarize, AlignmentWindow};

#[test]
fn summarize_counts_total_and_filtered() {
    // Three cut-ins, one of which passes the 70 km/h ego filter.
    let db = vec![cutin_record(65.0), cutin_record(75.0), cutin_record(80.0)];
    let report = summarize(&db, &OddConfig::default());
    assert_eq!(report.counts["cut_in"].total, 3);
    assert_eq!(report.counts["cut_in"].after_filter, 1);
    assert_eq!(report.counts["brake"].total, 0);
    assert_eq!(report.cutin_initial_distance.sample_count(), 3);
    assert!(report.max_peak_deceleration.is_none());
}

#[test]
fn summarize_empty_database_is_all_zero() {
    let report = summarize(&[], &OddConfig::default());
    for kind in ["brake", "cut_in", "swerve"] {
        assert_eq!(report.counts[kind].total, 0);
        assert_eq!(report.counts[kind].after_filter, 0);
    }
    assert!(report.brake_initial_distance.is_empty());
    assert!(report.min_cutin_thw.is_none());
}

#[test]
fn summarize_histogram_totals_match_draw_counts() {
    let db = vec![
        brake_record(60.0, 2.4),
        brake_record(62.0, 2.9),
        brake_record(64.0, 3.1),
        cutin_record(61.0),
        swerve_record(58.0, 1.5),
    ];
    let report = summarize(&db, &OddConfig::default());
    assert_eq!(report.brake_initial_distance.sample_count(), 3);
    assert_eq!(report.brake_peak_deceleration.sample_count(), 3);
    assert_eq!(report.cutin_thw.sample_count(), 1);
    assert_eq!(report.swerve_lateral_range.sample_count(), 1);
    assert_eq!(report.max_peak_deceleration, Some(3.1));
}

#[test]
fn uniform_histogram_counts_within_five_sigma() {
    // 1000 deterministic low-discrepancy samples in [0, 10).
    let values: Vec<f64> = (0..1000)
        .map(|i| (i as f64 * 0.6180339887498949).fract() * 10.0)
        .collect();
    let h = histogram(&values, 1.0, 0.0).unwrap();
    assert_eq!(h.counts.len(), 10);
    let sigma = (1000.0f64 * 0.1 * 0.9).sqrt();
    for count in &h.counts {
        assert!(
            (*count as f64 - 100.0).abs() <= 5.0 * sigma,
            "count {count} outside 5 sigma"
        );
    }
}

fn flat_track(values: &[(f64, f64)]) -> Track {
    // (vx, y) per frame starting at frame 0.
    let states = values
        .iter()
        .enumerate()
        .map(|(i, (vx, y))| KinematicState {
            frame: i as i64,
            x: i as f64,
            y: *y,
            vx: *vx,
            vy: 0.0,
            ax: 0.0,
            ay: 0.0,
            lane_id: 1,
            lane_offset: 0.0,
            preceding_id: None,
            following_id: None,
            thw: None,
            dhw: None,
        })
        .collect();
    Track {
        vehicle_id: 1,
        states,
    }
}

fn trace_of(values: &[(f64, f64)]) -> SimTrace {
    // One sample per recorded frame at 25 Hz.
    let states: Vec<SimState> = values
        .iter()
        .enumerate()
        .map(|(i, (v, y))| SimState {
            t: i as f64 * 0.04,
            x: i as f64,
            y: *y,
            v: *v,
        })
        .collect();
    SimTrace {
        timestep: 0.04,
        trigger_time: 0.0,
        maneuver_end_time: (values.len() - 1) as f64 * 0.04,
        ego_states: states.clone(),
        challenger_states: states,
        ego_length: 4.5,
        challenger_length: 4.5,
    }
}

#[test]
fn rmse_zero_iff_identical_and_offset_exact() {
    let series: Vec<(f64, f64)> = (0..50).map(|i| (15.0 + 0.01 * i as f64, 2.0)).collect();
    let window = AlignmentWindow {
        start_frame: 0,
        frame_rate: 25.0,
        duration: 49.0 * 0.04,
    };
    let trace = trace_of(&series);
    let track = flat_track(&series);
    assert_eq!(rmse_velocity(&trace, &track, &window).unwrap(), 0.0);
    assert_eq!(rmse_lateral(&trace, &track, &window).unwrap(), 0.0);

    // Constant offset of 1 km/h in velocity, 0.25 m lateral.
    let offset: Vec<(f64, f64)> = series
        .iter()
        .map(|(v, y)| (v + 1.0 / 3.6, y + 0.25))
        .collect();
    let shifted = trace_of(&offset);
    let v = rmse_velocity(&shifted, &track, &window).unwrap();
    assert!((v - 1.0).abs() < 1e-9, "rmse {v}");
    let lat = rmse_lateral(&shifted, &track, &window).unwrap();
    assert!((lat - 0.25).abs() < 1e-12);
}

#[test]
fn rmse_is_symmetric_and_scale_equivariant() {
    let base: Vec<(f64, f64)> = (0..50)
        .map(|i| (15.0 + (i as f64 * 0.3).sin(), 2.0 + (i as f64 * 0.2).cos()))
        .collect();
    let other: Vec<(f64, f64)> = (0..50)
        .map(|i| (15.0 + (i as f64 * 0.25).cos(), 2.0 + (i as f64 * 0.15).sin()))
        .collect();
    let window = AlignmentWindow {
        start_frame: 0,
        frame_rate: 25.0,
        duration: 49.0 * 0.04,
    };

    // Symmetry: swapping simulated and recorded series leaves RMSE alone.
    let ab = rmse_velocity(&trace_of(&base), &flat_track(&other), &window).unwrap();
    let ba = rmse_velocity(&trace_of(&other), &flat_track(&base), &window).unwrap();
    assert!((ab - ba).abs() < 1e-12);

    // Scale equivariance: scaling both deviations from a common reference
    // by c scales the RMSE by |c|.
    let c = 3.0;
    let scaled_sim: Vec<(f64, f64)> = base.iter().map(|(v, y)| (15.0 + c * (v - 15.0), *y)).collect();
    let scaled_rec: Vec<(f64, f64)> = other.iter().map(|(v, y)| (15.0 + c * (v - 15.0), *y)).collect();
    let scaled = rmse_velocity(&trace_of(&scaled_sim), &flat_track(&scaled_rec), &window).unwrap();
    assert!((scaled - c * ab).abs() < 1e-9);
}

#[test]
fn rmse_needs_overlap() {
    let series: Vec<(f64, f64)> = (0..50).map(|_| (15.0, 2.0)).collect();
    let trace = trace_of(&series);
    // Recording window far away from the trace's frames.
    let track = flat_track(&series);
    let window = AlignmentWindow {
        start_frame: 10_000,
        frame_rate: 25.0,
        duration: 1.0,
    };
    assert!(rmse_velocity(&trace, &track, &window).is_err());
}
