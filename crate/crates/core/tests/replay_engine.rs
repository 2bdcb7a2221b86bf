//! Replay-engine semantics: trigger timing, maneuver evolution, endpoint
//! matching, determinism and error paths.

mod common;

use alks_scenarios::error::ReplayError;
use alks_scenarios::extract::{
    BrakeScenario, CutInScenario, RoadContext, ScenarioRecord, VehicleInfo,
};
use alks_scenarios::highd::{DrivingDirection, VehicleClass};
use alks_scenarios::models::resolve_trigger_timing;
use alks_scenarios::replay::{gap_at, replay};

fn road() -> RoadContext {
    RoadContext {
        recording_id: 1,
        direction: DrivingDirection::Lower,
        lane_markings: vec![0.0, 3.75, 7.5, 11.25],
        speed_limit: None,
        frame_rate: 25.0,
    }
}

fn car(id: u64) -> VehicleInfo {
    VehicleInfo {
        id,
        length: 4.5,
        width: 2.0,
        class: VehicleClass::Car,
    }
}

/// Reference brake scenario: trigger at 30 m, ego 20 m/s, challenger
/// braking 15 -> 10 m/s over 4 s, so the back-calculated gap is 55 m.
fn reference_brake() -> ScenarioRecord {
    let (trigger_time_s, initial_gap) = resolve_trigger_timing(30.0, 20.0, 15.0);
    ScenarioRecord::Brake(BrakeScenario {
        road: road(),
        ego: car(1),
        challenger: car(2),
        start_frame: 100,
        end_frame: 200,
        v_ego0: 20.0,
        v_ch0: 15.0,
        initial_distance: 30.0,
        trigger_distance: 30.0,
        brake_duration: 4.0,
        v_ch_final: 10.0,
        peak_deceleration: 1.875,
        lane_id: 1,
        lane_center_y: 1.875,
        trigger_time_s,
        initial_gap,
    })
}

/// Cut-in at constant 15 m/s traveling 80 m; the faster challenger opens
/// the gap toward the 25 m trigger distance.
fn reference_cutin() -> ScenarioRecord {
    let (trigger_time_s, initial_gap) = resolve_trigger_timing(25.0, 14.0, 15.0);
    ScenarioRecord::CutIn(CutInScenario {
        road: road(),
        ego: car(1),
        challenger: car(2),
        start_frame: 100,
        cross_frame: 160,
        end_frame: 233,
        v_ego0: 14.0,
        v_ch0: 15.0,
        initial_distance: 25.0,
        trigger_distance: 25.0,
        relative_lane: 1,
        initial_lane_offset: 0.0,
        cutin_distance: 80.0,
        v_ch_final: 15.0,
        final_lane_offset: 0.0,
        thw0: 25.0 / 14.0,
        source_lane_id: 2,
        target_lane_id: 1,
        source_lane_center: 5.625,
        target_lane_center: 1.875,
        trigger_time_s,
        initial_gap,
    })
}

#[test]
fn brake_trigger_time_and_initial_gap() {
    let record = reference_brake();
    let trace = replay(&record, 0.04).unwrap();
    assert!((trace.trigger_time - 5.0).abs() <= 0.04 + 1e-9);
    // Back-calculated gap 30 + 5 * (20 - 15) = 55 m at t = 0.
    assert!((gap_at(&trace, 0.0).unwrap() - 55.0).abs() < 1e-6);
    // Gap at the trigger equals the trigger distance within one step of
    // relative motion.
    let gap = gap_at(&trace, trace.trigger_time).unwrap();
    assert!((gap - 30.0).abs() <= 5.0 * 0.04 + 1e-9, "gap {gap}");
    // The ego holds its speed over the whole trace by construction.
    assert!(trace.ego_states.iter().all(|s| s.v == 20.0));
}

#[test]
fn brake_velocity_midpoint() {
    let record = reference_brake();
    let trace = replay(&record, 0.04).unwrap();
    // Cubic midpoint: halfway through the 4 s maneuver the challenger
    // does (15 + 10) / 2 m/s.
    let t_mid = trace.trigger_time + 2.0;
    let idx = (t_mid / trace.timestep).round() as usize;
    let v = trace.challenger_states[idx].v;
    assert!((v - 12.5).abs() <= 0.02, "v {v}");
}

#[test]
fn cutin_completion_time_and_endpoint() {
    // Constant 15 m/s challenger traveling 80 m: completion at
    // trigger_time + 80/15 s.
    let record = reference_cutin();
    let ScenarioRecord::CutIn(s) = &record else {
        panic!("wrong kind")
    };
    let travel = s.cutin_distance;
    let dt = 0.04;
    let trace = replay(&record, dt).unwrap();
    let expected_completion = trace.trigger_time + travel / 15.0;
    assert!(
        (trace.maneuver_end_time - expected_completion).abs() <= 2.0 * dt,
        "completion {} vs {}",
        trace.maneuver_end_time,
        expected_completion
    );

    // Endpoint matching: the first sample at or past completion sits at
    // the final lane center plus offset, exactly.
    let target = s.target_lane_center + s.final_lane_offset;
    let after = trace
        .challenger_states
        .iter()
        .find(|st| st.t >= trace.maneuver_end_time)
        .unwrap();
    assert!(
        (after.y - target).abs() <= 1e-6,
        "endpoint {} vs {}",
        after.y,
        target
    );
    // Before the maneuver it sits on the source lane center.
    assert!((trace.challenger_states[0].y - s.source_lane_center).abs() <= 1e-9);

    // Opening-gap trigger (challenger faster than ego) still fires at 5 s.
    assert!((trace.trigger_time - 5.0).abs() <= dt + 1e-9);
}

#[test]
fn replay_is_deterministic() {
    let record = reference_brake();
    let a = replay(&record, 0.02).unwrap();
    let b = replay(&record, 0.02).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn gap_query_outside_trace_is_an_error() {
    let record = reference_brake();
    let trace = replay(&record, 0.04).unwrap();
    let end = trace.end_time();
    assert!(matches!(
        gap_at(&trace, end + 1.0),
        Err(ReplayError::TimeOutOfRange { .. })
    ));
    assert!(gap_at(&trace, -0.5).is_err());
}

#[test]
fn bad_timestep_is_rejected() {
    let record = reference_brake();
    assert!(matches!(
        replay(&record, 0.0),
        Err(ReplayError::BadTimestep { .. })
    ));
    assert!(matches!(
        replay(&record, 0.2),
        Err(ReplayError::BadTimestep { .. })
    ));
    assert!(replay(&record, 0.1).is_ok());
}

#[test]
fn inconsistent_trigger_parameters_error_out() {
    // Equal speeds with a starting gap above the trigger distance: the
    // gap never reaches the trigger, which must be reported.
    let mut record = reference_brake();
    if let ScenarioRecord::Brake(s) = &mut record {
        s.v_ego0 = s.v_ch0;
        s.initial_gap = s.trigger_distance + 10.0;
    }
    assert!(matches!(
        replay(&record, 0.04),
        Err(ReplayError::TriggerNeverFired { .. })
    ));
}

#[test]
fn trace_csv_has_the_documented_columns() {
    let record = reference_brake();
    let trace = replay(&record, 0.04).unwrap();
    let csv = trace.to_csv();
    assert!(csv.starts_with("t,ego_x,ego_y,ego_v,ch_x,ch_y,ch_v\n"));
    assert_eq!(csv.lines().count(), trace.ego_states.len() + 1);
}

#[test]
fn trace_ends_two_seconds_after_completion() {
    let record = reference_brake();
    let trace = replay(&record, 0.04).unwrap();
    let expected_end = trace.maneuver_end_time + 2.0;
    assert!(trace.end_time() >= expected_end - 1e-9);
    assert!(trace.end_time() <= expected_end + 0.05);
}

#[test]
fn swerve_replay_oscillates_over_the_planted_range() {
    let record = common::swerve_record(60.0, 1.4);
    let trace = replay(&record, 0.04).unwrap();
    // Time-triggered maneuver: the oscillation starts at the configured
    // initialization time.
    assert_eq!(trace.trigger_time, 5.0);

    let ys: Vec<f64> = trace.challenger_states.iter().map(|s| s.y).collect();
    let y_min = ys.iter().copied().fold(f64::MAX, f64::min);
    let y_max = ys.iter().copied().fold(f64::MIN, f64::max);
    assert!((y_max - y_min - 1.4).abs() < 0.01, "range {}", y_max - y_min);

    // Starts and ends at the oscillation rest point, two full periods in.
    let first = trace.challenger_states.first().unwrap().y;
    let last = trace.challenger_states.last().unwrap().y;
    assert!((first - last).abs() < 0.01);
    assert_eq!(trace, replay(&record, 0.04).unwrap());
}
