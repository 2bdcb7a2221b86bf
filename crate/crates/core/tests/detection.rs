//! Detector behavior on hand-built canonical tracks: threshold edges,
//! event bounds, anomalies and the detection invariants.

use std::collections::BTreeMap;

use alks_scenarios::detect::{
    detect_brake_maneuvers, detect_lane_changes, detect_swerving, DetectionConfig,
};
use alks_scenarios::highd::{
    CoordinateFrame, DrivingDirection, KinematicState, Recording, RecordingMeta, Track,
    VehicleClass, VehicleMeta,
};
use alks_scenarios::models::CubicBrakeProfile;

const RATE: f64 = 25.0;

fn meta() -> RecordingMeta {
    RecordingMeta {
        recording_id: 9,
        frame_rate: RATE,
        upper_lane_markings: vec![8.0, 11.75, 15.5, 19.25],
        lower_lane_markings: vec![25.0, 28.75, 32.5, 36.25],
        measurement_area_length: 420.0,
        speed_limit: None,
    }
}

/// Builds one canonical track from per-frame closures.
fn track(
    id: u64,
    frames: std::ops::Range<i64>,
    mut state_fn: impl FnMut(i64, f64) -> (f64, f64, f64, f64, f64, f64),
) -> (VehicleMeta, Track) {
    let geometry = meta().lane_geometry(DrivingDirection::Lower);
    let states = frames
        .map(|frame| {
            let t = frame as f64 / RATE;
            let (x, y, vx, vy, ax, ay) = state_fn(frame, t);
            let lane_id = geometry.assign_lane(y);
            KinematicState {
                frame,
                x,
                y,
                vx,
                vy,
                ax,
                ay,
                lane_id,
                lane_offset: geometry.offset_from_center(lane_id, y).unwrap_or(0.0),
                preceding_id: None,
                following_id: None,
                thw: None,
                dhw: None,
            }
        })
        .collect();
    (
        VehicleMeta {
            vehicle_id: id,
            class: VehicleClass::Car,
            length: 4.5,
            width: 2.0,
            direction: DrivingDirection::Lower,
        },
        Track {
            vehicle_id: id,
            states,
        },
    )
}

fn recording(entries: Vec<(VehicleMeta, Track)>) -> Recording {
    let mut vehicles = BTreeMap::new();
    let mut tracks = BTreeMap::new();
    for (v, t) in entries {
        vehicles.insert(v.vehicle_id, v);
        tracks.insert(t.vehicle_id, t);
    }
    Recording {
        meta: meta(),
        vehicles,
        tracks,
        frame: CoordinateFrame::Canonical,
    }
}

/// Cubic brake profile between two constant-speed phases, frame-aligned.
fn braking_track(id: u64, v0: f64, vf: f64, duration_s: f64, start_frame: i64) -> (VehicleMeta, Track) {
    let profile = CubicBrakeProfile::new(v0, vf, duration_s).unwrap();
    let end_frame = start_frame + (duration_s * RATE) as i64;
    track(id, 0..end_frame + 100, move |frame, _| {
        let tau = (frame - start_frame) as f64 / RATE;
        if frame < start_frame {
            (v0 * tau, 1.875, v0, 0.0, 0.0, 0.0)
        } else if frame <= end_frame {
            (
                profile.distance_until(tau).unwrap(),
                1.875,
                profile.velocity(tau).unwrap(),
                0.0,
                profile.acceleration(tau),
                0.0,
            )
        } else {
            let over = tau - duration_s;
            (
                profile.total_distance() + vf * over,
                1.875,
                vf,
                0.0,
                0.0,
                0.0,
            )
        }
    })
}

#[test]
fn planted_brake_recovers_bounds_and_peak() {
    let rec = recording(vec![braking_track(1, 19.44, 13.89, 4.0, 100)]);
    let events = detect_brake_maneuvers(&rec, &DetectionConfig::default());
    assert_eq!(events.len(), 1);
    let e = &events[0];
    // Duration within 2 frames of the planted 4.0 s maneuver.
    let duration = (e.end_frame - e.start_frame) as f64 / RATE;
    assert!((duration - 4.0).abs() <= 2.0 / RATE + 1e-9, "duration {duration}");
    assert!((e.peak_deceleration - 2.08).abs() <= 0.1);
    assert!(e.v_end < e.v_start);
    // Re-checkable invariant: at least one supra-threshold frame inside.
    let track = rec.track(1).unwrap();
    assert!((e.start_frame..=e.end_frame)
        .any(|f| -track.state_at(f).unwrap().ax >= 2.0));
}

#[test]
fn mild_coasting_is_not_a_brake_maneuver() {
    // Constant -0.5 m/s² never crosses the 2 m/s² peak threshold.
    let rec = recording(vec![track(1, 0..200, |_, t| {
        (20.0 * t - 0.25 * t * t, 1.875, 20.0 - 0.5 * t, 0.0, -0.5, 0.0)
    })]);
    assert!(detect_brake_maneuvers(&rec, &DetectionConfig::default()).is_empty());
}

#[test]
fn constant_velocity_track_has_no_events() {
    let rec = recording(vec![track(1, 0..200, |_, t| {
        (22.0 * t, 1.875, 22.0, 0.0, 0.0, 0.0)
    })]);
    let config = DetectionConfig::default();
    assert!(detect_brake_maneuvers(&rec, &config).is_empty());
    assert!(detect_lane_changes(&rec, &config).events.is_empty());
    assert!(detect_swerving(&rec, &config).is_empty());
}

/// Sinusoidal lane change in the time domain at constant speed.
fn lane_change_track(
    id: u64,
    y_from: f64,
    y_to: f64,
    start_frame: i64,
    duration_s: f64,
    total_frames: i64,
) -> (VehicleMeta, Track) {
    let amp = (y_to - y_from) / 2.0;
    let omega = std::f64::consts::PI / duration_s;
    track(id, 0..total_frames, move |frame, t| {
        let tau = (frame - start_frame) as f64 / RATE;
        let (y, vy, ay) = if tau <= 0.0 {
            (y_from, 0.0, 0.0)
        } else if tau >= duration_s {
            (y_to, 0.0, 0.0)
        } else {
            (
                y_from + amp * (1.0 - (omega * tau).cos()),
                amp * omega * (omega * tau).sin(),
                amp * omega * omega * (omega * tau).cos(),
            )
        };
        (15.0 * t, y, 15.0, vy, 0.0, ay)
    })
}

#[test]
fn single_lane_change_bounds_within_two_frames() {
    // Lane 1 center to lane 2 center, 4 s sinusoid planted at frame 100.
    let rec = recording(vec![lane_change_track(1, 1.875, 5.625, 100, 4.0, 300)]);
    let scan = detect_lane_changes(&rec, &DetectionConfig::default());
    assert!(scan.anomalies.is_empty());
    assert_eq!(scan.events.len(), 1);
    let e = &scan.events[0];
    assert_eq!((e.source_lane_id, e.target_lane_id), (1, 2));
    assert!((e.start_frame - 100).abs() <= 2, "start {}", e.start_frame);
    assert!((e.end_frame - 200).abs() <= 2, "end {}", e.end_frame);
    assert!(e.start_frame < e.cross_frame && e.cross_frame <= e.end_frame);
}

#[test]
fn double_lane_change_yields_two_events() {
    // Out at frame 100, back at frame 350, well separated.
    let rec = recording(vec![track(1, 0..600, |frame, t| {
        let phase = |start: i64, from: f64, to: f64, frame: i64| {
            let tau = (frame - start) as f64 / RATE;
            let amp = (to - from) / 2.0;
            let omega = std::f64::consts::PI / 4.0;
            if tau <= 0.0 {
                (from, 0.0)
            } else if tau >= 4.0 {
                (to, 0.0)
            } else {
                (
                    from + amp * (1.0 - (omega * tau).cos()),
                    amp * omega * (omega * tau).sin(),
                )
            }
        };
        let (y, vy) = if frame < 300 {
            phase(100, 1.875, 5.625, frame)
        } else {
            phase(350, 5.625, 1.875, frame)
        };
        (15.0 * t, y, 15.0, vy, 0.0, 0.0)
    })]);
    let scan = detect_lane_changes(&rec, &DetectionConfig::default());
    assert_eq!(scan.events.len(), 2, "{:?}", scan.events);
    assert_eq!(
        (scan.events[0].source_lane_id, scan.events[0].target_lane_id),
        (1, 2)
    );
    assert_eq!(
        (scan.events[1].source_lane_id, scan.events[1].target_lane_id),
        (2, 1)
    );
    // Events of the same vehicle must not overlap.
    assert!(scan.events[0].end_frame <= scan.events[1].start_frame);
}

#[test]
fn boundary_jitter_is_not_a_lane_change() {
    // A vehicle hugging a marking with slow lateral wobble crosses the
    // lane boundary repeatedly without ever moving at lane-change speed.
    let rec = recording(vec![track(1, 0..500, |_, t| {
        let y = 3.75 + 0.08 * (0.8 * t).sin();
        let vy = 0.08 * 0.8 * (0.8 * t).cos();
        (18.0 * t, y, 18.0, vy, 0.0, 0.0)
    })]);
    let scan = detect_lane_changes(&rec, &DetectionConfig::default());
    assert!(scan.events.is_empty(), "{:?}", scan.events);

    // Lowering the threshold below the wobble speed admits the crossings.
    let loose = DetectionConfig {
        lc_lateral_velocity_threshold: 0.02,
        ..DetectionConfig::default()
    };
    assert!(!detect_lane_changes(&rec, &loose).events.is_empty());
}

#[test]
fn multi_lane_jump_is_an_anomaly() {
    // Teleports two lanes within one frame.
    let rec = recording(vec![track(1, 0..100, |frame, t| {
        let y = if frame < 50 { 1.875 } else { 9.375 };
        (15.0 * t, y, 15.0, 0.0, 0.0, 0.0)
    })]);
    let scan = detect_lane_changes(&rec, &DetectionConfig::default());
    assert!(scan.events.is_empty());
    assert_eq!(scan.anomalies.len(), 1);
    assert_eq!(scan.anomalies[0].frame, 50);
}

fn swerve_track(id: u64, range: f64, lane_center: f64, frames: i64) -> (VehicleMeta, Track) {
    let amp = range / 2.0;
    let omega = 1.4;
    track(id, 0..frames, move |_, t| {
        (
            16.0 * t,
            lane_center - amp * (omega * t).cos(),
            16.0,
            amp * omega * (omega * t).sin(),
            0.0,
            amp * omega * omega * (omega * t).cos(),
        )
    })
}

#[test]
fn swerve_range_threshold_splits_events() {
    // 1.4 m range within one lane: detected with the range recovered.
    let rec = recording(vec![swerve_track(1, 1.4, 1.875, 300)]);
    let events = detect_swerving(&rec, &DetectionConfig::default());
    assert_eq!(events.len(), 1);
    assert!((events[0].lateral_range - 1.4).abs() <= 0.05);

    // 1.0 m range stays below the 1.2 m threshold.
    let rec = recording(vec![swerve_track(1, 1.0, 1.875, 300)]);
    assert!(detect_swerving(&rec, &DetectionConfig::default()).is_empty());
}

#[test]
fn brake_threshold_monotonicity() {
    let rec = recording(vec![
        braking_track(1, 19.44, 13.89, 4.0, 100),
        braking_track(2, 20.0, 14.0, 3.0, 50),
    ]);
    let mut last_count = usize::MAX;
    for peak in [1.0, 2.0, 2.5, 3.5] {
        let config = DetectionConfig {
            brake_peak_threshold: peak,
            ..DetectionConfig::default()
        };
        let count = detect_brake_maneuvers(&rec, &config).len();
        assert!(count <= last_count, "raising threshold increased events");
        last_count = count;
    }
    assert_eq!(last_count, 0);
}

#[test]
fn detection_is_translation_invariant() {
    let rec = recording(vec![braking_track(1, 19.44, 13.89, 4.0, 100)]);
    let mut shifted = rec.clone();
    for track in shifted.tracks.values_mut() {
        for state in &mut track.states {
            state.frame += 1000;
        }
    }
    let config = DetectionConfig::default();
    let base = detect_brake_maneuvers(&rec, &config);
    let moved = detect_brake_maneuvers(&shifted, &config);
    assert_eq!(base.len(), moved.len());
    for (a, b) in base.iter().zip(&moved) {
        assert_eq!(a.start_frame + 1000, b.start_frame);
        assert_eq!(a.end_frame + 1000, b.end_frame);
        assert_eq!(a.peak_deceleration, b.peak_deceleration);
    }
}

#[test]
fn finite_difference_velocity_consistency() {
    // On analytic tracks the stored vx agrees with frame-difference
    // velocity for at least 95% of samples.
    let rec = recording(vec![
        braking_track(1, 19.44, 13.89, 4.0, 100),
        lane_change_track(2, 1.875, 5.625, 100, 4.0, 300),
    ]);
    for track in rec.tracks.values() {
        let mut ok = 0usize;
        let mut total = 0usize;
        for w in track.states.windows(2) {
            let fd = (w[1].x - w[0].x) * RATE;
            total += 1;
            if (fd - w[0].vx).abs() < 0.5 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * total as f64);
    }
}
