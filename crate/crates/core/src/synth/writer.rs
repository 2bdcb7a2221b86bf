//! Emits the exact highD CSV layout consumed by the ingest module, so
//! synthesized recordings round-trip through `load_recording`.

use std::fmt::Write as _;
use std::path::Path;

use crate::db::write_atomic;
use crate::error::SynthError;
use crate::highd::{DrivingDirection, Recording, RecordingPaths, Track, VehicleMeta};

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    num(v.unwrap_or(0.0))
}

fn opt_id(v: Option<u64>) -> String {
    v.unwrap_or(0).to_string()
}

/// Writes `NN_recordingMeta.csv`, `NN_tracksMeta.csv` and `NN_tracks.csv`
/// into `dir` and returns their paths.
///
/// Expects a raw-frame recording (the on-disk format stores image-plane
/// coordinates). `load_recording` on the result reproduces the input up to
/// the 1e-6 formatting granularity.
pub fn write_highd_csv(recording: &Recording, dir: &Path) -> Result<RecordingPaths, SynthError> {
    let io_err = |source: std::io::Error| SynthError::Io {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(io_err)?;

    let id = recording.meta.recording_id;
    let paths = RecordingPaths {
        recording_meta: dir.join(format!("{id:02}_recordingMeta.csv")),
        tracks_meta: dir.join(format!("{id:02}_tracksMeta.csv")),
        tracks: dir.join(format!("{id:02}_tracks.csv")),
    };

    write_atomic(&paths.recording_meta, recording_meta_csv(recording).as_bytes())
        .map_err(io_err)?;
    write_atomic(&paths.tracks_meta, tracks_meta_csv(recording).as_bytes()).map_err(io_err)?;
    write_atomic(&paths.tracks, tracks_csv(recording).as_bytes()).map_err(io_err)?;
    Ok(paths)
}

fn recording_meta_csv(recording: &Recording) -> String {
    let meta = &recording.meta;
    let frame_count = recording
        .tracks
        .values()
        .map(|t| t.last_frame() + 1)
        .max()
        .unwrap_or(0);
    let duration = frame_count as f64 / meta.frame_rate;
    let num_vehicles = recording.vehicles.len();
    let num_trucks = recording
        .vehicles
        .values()
        .filter(|v| v.class == crate::highd::VehicleClass::Truck)
        .count();
    let num_cars = num_vehicles - num_trucks;
    let total_distance: f64 = recording
        .tracks
        .values()
        .map(|t| {
            (t.states.last().map_or(0.0, |s| s.x) - t.states.first().map_or(0.0, |s| s.x)).abs()
        })
        .sum();
    let total_time: f64 = recording
        .tracks
        .values()
        .map(|t| t.states.len() as f64 / meta.frame_rate)
        .sum();
    let markings =
        |m: &[f64]| m.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";");

    let mut out = String::new();
    out.push_str(
        "id,frameRate,locationId,speedLimit,month,weekDay,startTime,duration,\
         totalDrivenDistance,totalDrivenTime,numVehicles,numCars,numTrucks,\
         upperLaneMarkings,lowerLaneMarkings,measurementAreaLength\n",
    );
    let _ = writeln!(
        out,
        "{},{},1,{},1,1,00:00,{},{},{},{},{},{},{},{},{}",
        meta.recording_id,
        num(meta.frame_rate),
        num(meta.speed_limit.unwrap_or(-1.0)),
        num(duration),
        num(total_distance),
        num(total_time),
        num_vehicles,
        num_cars,
        num_trucks,
        markings(&meta.upper_lane_markings),
        markings(&meta.lower_lane_markings),
        num(meta.measurement_area_length),
    );
    out
}

fn tracks_meta_csv(recording: &Recording) -> String {
    let mut out = String::new();
    out.push_str(
        "id,width,height,initialFrame,finalFrame,numFrames,class,drivingDirection,\
         traveledDistance,minXVelocity,maxXVelocity,meanXVelocity,minDHW,minTHW,minTTC,\
         numLaneChanges\n",
    );
    for (id, vehicle) in &recording.vehicles {
        let Some(track) = recording.tracks.get(id) else {
            continue;
        };
        let speeds: Vec<f64> = track.states.iter().map(|s| s.vx.abs()).collect();
        let v_min = speeds.iter().copied().fold(f64::MAX, f64::min);
        let v_max = speeds.iter().copied().fold(f64::MIN, f64::max);
        let v_mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
        let traveled = (track.states.last().unwrap().x - track.states.first().unwrap().x).abs();
        let min_pos = |vals: Vec<f64>| {
            vals.into_iter()
                .filter(|v| *v > 0.0)
                .fold(f64::MAX, f64::min)
        };
        let min_dhw = min_pos(track.states.iter().filter_map(|s| s.dhw).collect());
        let min_thw = min_pos(track.states.iter().filter_map(|s| s.thw).collect());
        let lane_changes = track
            .states
            .windows(2)
            .filter(|w| w[0].lane_id != w[1].lane_id)
            .count();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            id,
            num(vehicle.length),
            num(vehicle.width),
            track.first_frame(),
            track.last_frame(),
            track.states.len(),
            vehicle.class.label(),
            vehicle.direction.flag(),
            num(traveled),
            num(if v_min == f64::MAX { 0.0 } else { v_min }),
            num(if v_max == f64::MIN { 0.0 } else { v_max }),
            num(v_mean),
            num(if min_dhw == f64::MAX { 0.0 } else { min_dhw }),
            num(if min_thw == f64::MAX { 0.0 } else { min_thw }),
            num(0.0),
            lane_changes,
        );
    }
    out
}

/// Adjacent-lane neighbor ids of one vehicle at one frame, driver frame.
#[derive(Debug, Clone, Copy, Default)]
struct SideNeighbors {
    left_preceding: Option<u64>,
    left_alongside: Option<u64>,
    left_following: Option<u64>,
    right_preceding: Option<u64>,
    right_alongside: Option<u64>,
    right_following: Option<u64>,
}

fn side_neighbors(
    recording: &Recording,
    vehicle: &VehicleMeta,
    track_state: &crate::highd::KinematicState,
) -> SideNeighbors {
    let direction = vehicle.direction;
    // Travel axis sign and the raw lane id one step to the driver's left.
    let (ahead_sign, left_delta) = match direction {
        DrivingDirection::Lower => (1.0, -1),
        DrivingDirection::Upper => (-1.0, 1),
    };
    let my_center = track_state.x + vehicle.length / 2.0;
    let frame = track_state.frame;
    let mut result = SideNeighbors::default();

    // (distance ahead, id) candidates per slot.
    let mut slots: [Option<(f64, u64)>; 6] = [None; 6];
    for (other_id, other_track) in &recording.tracks {
        if *other_id == vehicle.vehicle_id {
            continue;
        }
        let Some(other_meta) = recording.vehicles.get(other_id) else {
            continue;
        };
        if other_meta.direction != direction {
            continue;
        }
        let Some(other) = other_track.state_at(frame) else {
            continue;
        };
        let lane_delta = other.lane_id - track_state.lane_id;
        let side = if lane_delta == left_delta {
            0 // left
        } else if lane_delta == -left_delta {
            1 // right
        } else {
            continue;
        };
        let other_center = other.x + other_meta.length / 2.0;
        let d = (other_center - my_center) * ahead_sign;
        let half_sum = (vehicle.length + other_meta.length) / 2.0;
        let slot = if d >= half_sum {
            0 // preceding
        } else if d <= -half_sum {
            2 // following
        } else {
            1 // alongside
        };
        let idx = side * 3 + slot;
        let better = match slots[idx] {
            Some((best, _)) => d.abs() < best,
            None => true,
        };
        if better {
            slots[idx] = Some((d.abs(), *other_id));
        }
    }
    result.left_preceding = slots[0].map(|(_, id)| id);
    result.left_alongside = slots[1].map(|(_, id)| id);
    result.left_following = slots[2].map(|(_, id)| id);
    result.right_preceding = slots[3].map(|(_, id)| id);
    result.right_alongside = slots[4].map(|(_, id)| id);
    result.right_following = slots[5].map(|(_, id)| id);
    result
}

fn tracks_csv(recording: &Recording) -> String {
    let mut out = String::new();
    out.push_str(
        "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,\
         frontSightDistance,backSightDistance,dhw,thw,ttc,precedingXVelocity,\
         precedingId,followingId,leftPrecedingId,leftAlongsideId,leftFollowingId,\
         rightPrecedingId,rightAlongsideId,rightFollowingId,laneId\n",
    );
    for (id, track) in &recording.tracks {
        let vehicle = &recording.vehicles[id];
        for state in &track.states {
            let preceding_state = state
                .preceding_id
                .and_then(|pid| recording.tracks.get(&pid))
                .and_then(|t: &Track| t.state_at(state.frame));
            let preceding_vx = preceding_state.map_or(0.0, |p| p.vx);
            let ttc = match (state.dhw, preceding_state) {
                (Some(dhw), Some(p)) => {
                    let closing = state.vx.abs() - p.vx.abs();
                    if closing > 0.0 {
                        dhw / closing
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            };
            let sides = side_neighbors(recording, vehicle, state);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                state.frame,
                id,
                num(state.x),
                num(state.y),
                num(vehicle.length),
                num(vehicle.width),
                num(state.vx),
                num(state.vy),
                num(state.ax),
                num(state.ay),
                num(0.0),
                num(0.0),
                opt(state.dhw),
                opt(state.thw),
                num(ttc),
                num(preceding_vx),
                opt_id(state.preceding_id),
                opt_id(state.following_id),
                opt_id(sides.left_preceding),
                opt_id(sides.left_alongside),
                opt_id(sides.left_following),
                opt_id(sides.right_preceding),
                opt_id(sides.right_alongside),
                opt_id(sides.right_following),
                state.lane_id,
            );
        }
    }
    out
}
