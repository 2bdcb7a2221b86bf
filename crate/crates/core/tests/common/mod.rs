//! Shared record fixtures for the integration tests.
#![allow(dead_code)]

use alks_scenarios::extract::{
    BrakeScenario, CutInScenario, RoadContext, ScenarioRecord, SwerveRelation, SwerveScenario,
    VehicleInfo,
};
use alks_scenarios::highd::{DrivingDirection, VehicleClass};
use alks_scenarios::models::resolve_trigger_timing;
use alks_scenarios::units::kmh_to_ms;

pub fn road() -> RoadContext {
    RoadContext {
        recording_id: 1,
        direction: DrivingDirection::Lower,
        lane_markings: vec![0.0, 3.75, 7.5, 11.25],
        speed_limit: None,
        frame_rate: 25.0,
    }
}

pub fn car(id: u64) -> VehicleInfo {
    VehicleInfo {
        id,
        length: 4.5,
        width: 2.0,
        class: VehicleClass::Car,
    }
}

/// Brake record with configurable ego speed (km/h) and peak deceleration.
pub fn brake_record(v_ego_kmh: f64, peak: f64) -> ScenarioRecord {
    let v_ego0 = kmh_to_ms(v_ego_kmh);
    let (trigger_time_s, initial_gap) = resolve_trigger_timing(40.0, v_ego0, 15.0);
    ScenarioRecord::Brake(BrakeScenario {
        road: road(),
        ego: car(1),
        challenger: car(2),
        start_frame: 100,
        end_frame: 200,
        v_ego0,
        v_ch0: 15.0,
        initial_distance: 40.0,
        trigger_distance: 40.0,
        brake_duration: 4.0,
        v_ch_final: 11.0,
        peak_deceleration: peak,
        lane_id: 1,
        lane_center_y: 1.875,
        trigger_time_s,
        initial_gap,
    })
}

/// Cut-in record with configurable ego speed (km/h).
pub fn cutin_record(v_ego_kmh: f64) -> ScenarioRecord {
    let v_ego0 = kmh_to_ms(v_ego_kmh);
    let (trigger_time_s, initial_gap) = resolve_trigger_timing(25.0, v_ego0, 15.0);
    ScenarioRecord::CutIn(CutInScenario {
        road: road(),
        ego: car(1),
        challenger: car(2),
        start_frame: 100,
        cross_frame: 150,
        end_frame: 200,
        v_ego0,
        v_ch0: 15.0,
        initial_distance: 25.0,
        trigger_distance: 25.0,
        relative_lane: 1,
        initial_lane_offset: 0.0,
        cutin_distance: 80.0,
        v_ch_final: 15.0,
        final_lane_offset: 0.0,
        thw0: 25.0 / v_ego0,
        source_lane_id: 2,
        target_lane_id: 1,
        source_lane_center: 5.625,
        target_lane_center: 1.875,
        trigger_time_s,
        initial_gap,
    })
}

/// Swerve record with configurable ego speed (km/h) and lateral range.
pub fn swerve_record(v_ego_kmh: f64, range: f64) -> ScenarioRecord {
    ScenarioRecord::Swerve(SwerveScenario {
        road: road(),
        ego: car(1),
        challenger: car(2),
        relation: SwerveRelation::Lead,
        start_frame: 0,
        end_frame: 250,
        lateral_range: range,
        max_lateral_acceleration: 1.2,
        v_ego0: kmh_to_ms(v_ego_kmh),
        v_ch0: kmh_to_ms(v_ego_kmh),
        initial_distance: 30.0,
        ego_lane_id: 1,
        ego_lane_center: 1.875,
        ch_lane_id: 1,
        ch_lane_center: 1.875,
        trigger_time_s: 5.0,
    })
}
