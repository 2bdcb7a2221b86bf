//! Synthetic highD-format recordings with planted, exactly-known scenarios.
//!
//! The generator realizes each plant with the same closed-form maneuver
//! primitives used by export and replay, computes every channel (positions,
//! velocities, accelerations) analytically rather than by differencing, and
//! returns a ground-truth ledger mapping each plant to the scenario record
//! the extraction pipeline is expected to produce. This allows end-to-end
//! verification of the pipeline without access to the licensed dataset.

mod writer;

pub use writer::write_highd_csv;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::extract::{
    BrakeScenario, CutInScenario, RoadContext, ScenarioRecord, SwerveRelation, SwerveScenario,
    VehicleInfo,
};
use crate::highd::{
    CoordinateFrame, DrivingDirection, KinematicState, LaneGeometry, Recording, RecordingMeta,
    Track, VehicleClass, VehicleMeta,
};
use crate::models::{resolve_trigger_timing, CubicBrakeProfile, SinusoidalLaneChange};

/// Constant-speed lead-in before a planted maneuver starts, seconds.
const PRE_ROLL_S: f64 = 2.0;
/// Constant-speed tail after a planted maneuver ends, seconds.
const POST_ROLL_S: f64 = 2.0;
/// Idle gap between consecutive plant blocks, seconds.
const BLOCK_GAP_S: f64 = 1.0;
/// Longitudinal safety margin to the measurement-area edges, meters.
const AREA_MARGIN: f64 = 2.0;

/// Parameters for one planted "Lead Vehicle Brake" scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrakePlant {
    pub v_ego: f64,
    pub v_ch: f64,
    /// Bumper gap at maneuver start, m.
    pub initial_distance: f64,
    pub brake_duration: f64,
    pub v_ch_final: f64,
    #[serde(default = "default_lane")]
    pub lane: i32,
    #[serde(default = "default_direction")]
    pub direction: DrivingDirection,
}

/// Parameters for one planted "Cut-In" scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutInPlant {
    pub v_ego: f64,
    pub v_ch: f64,
    /// Bumper gap at maneuver start, m.
    pub initial_distance: f64,
    /// +1 places the challenger one lane to the ego's left.
    pub relative_lane: i32,
    pub initial_lane_offset: f64,
    /// Longitudinal travel during the lane change, m. Rounded so the
    /// implied maneuver duration is a whole number of frames.
    pub cutin_distance: f64,
    pub v_ch_final: f64,
    pub final_lane_offset: f64,
    #[serde(default = "default_lane")]
    pub ego_lane: i32,
    #[serde(default = "default_direction")]
    pub direction: DrivingDirection,
}

/// Parameters for one planted swerving-vehicle scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwervePlant {
    pub lateral_range: f64,
    pub max_lateral_acceleration: f64,
    pub v_ego: f64,
    pub v_ch: f64,
    /// Bumper gap at observation start, m.
    pub initial_distance: f64,
    pub relation: SwerveRelation,
    #[serde(default = "default_lane")]
    pub lane: i32,
    #[serde(default = "default_direction")]
    pub direction: DrivingDirection,
}

fn default_lane() -> i32 {
    1
}

fn default_direction() -> DrivingDirection {
    DrivingDirection::Lower
}

/// The maneuver payload of a plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantManeuver {
    Brake(BrakePlant),
    CutIn(CutInPlant),
    Swerve(SwervePlant),
}

/// One entry of a synthesis request: an optional maneuver plus background
/// traffic and measurement noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    #[serde(default)]
    pub maneuver: Option<PlantManeuver>,
    /// Constant-velocity vehicles added in lanes unused by any plant.
    #[serde(default)]
    pub background_traffic: u32,
    /// Half-width of the uniform zero-mean noise added to the stored
    /// positions (not to the analytic velocity/acceleration channels), m.
    #[serde(default)]
    pub noise_amplitude: f64,
}

impl PlantSpec {
    pub fn brake(plant: BrakePlant) -> Self {
        PlantSpec {
            maneuver: Some(PlantManeuver::Brake(plant)),
            background_traffic: 0,
            noise_amplitude: 0.0,
        }
    }

    pub fn cut_in(plant: CutInPlant) -> Self {
        PlantSpec {
            maneuver: Some(PlantManeuver::CutIn(plant)),
            background_traffic: 0,
            noise_amplitude: 0.0,
        }
    }

    pub fn swerve(plant: SwervePlant) -> Self {
        PlantSpec {
            maneuver: Some(PlantManeuver::Swerve(plant)),
            background_traffic: 0,
            noise_amplitude: 0.0,
        }
    }
}

/// Reads a JSON plant-spec file (an array of [`PlantSpec`] objects).
pub fn read_plant_file(path: &std::path::Path) -> Result<Vec<PlantSpec>, SynthError> {
    let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| SynthError::InvalidPlant {
        index: 0,
        detail: format!("{}: {e}", path.display()),
    })
}

/// Ground truth for one planted maneuver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Index into the plant list passed to [`synthesize_recording`].
    pub plant_index: usize,
    /// The scenario record the extraction pipeline is expected to produce,
    /// including the exact event frame bounds.
    pub expected: ScenarioRecord,
}

/// Ground-truth ledger for a synthesized recording.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    /// Serializes the ledger as JSON lines, one entry per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("ledger serializes"));
            out.push('\n');
        }
        out
    }
}

/// A default recording layout for synthetic data: 25 Hz, three 3.75 m lanes
/// per carriageway, 420 m measurement area.
pub fn default_synthetic_meta(recording_id: u32) -> RecordingMeta {
    RecordingMeta {
        recording_id,
        frame_rate: 25.0,
        upper_lane_markings: vec![8.0, 11.75, 15.5, 19.25],
        lower_lane_markings: vec![25.0, 28.75, 32.5, 36.25],
        measurement_area_length: 420.0,
        speed_limit: None,
    }
}

/// Canonical-frame state under construction, without neighbor relations.
#[derive(Debug, Clone)]
struct RawState {
    frame: i64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    ax: f64,
    ay: f64,
}

#[derive(Debug, Clone)]
struct BuildVehicle {
    meta: VehicleMeta,
    states: Vec<RawState>,
}

struct Builder<'a> {
    meta: &'a RecordingMeta,
    rng: ChaCha8Rng,
    vehicles: Vec<BuildVehicle>,
    next_id: u64,
    next_frame: i64,
    used_lanes: std::collections::BTreeSet<(DrivingDirection, i32)>,
    ledger: Ledger,
}

impl<'a> Builder<'a> {
    fn frames(&self, seconds: f64) -> i64 {
        (seconds * self.meta.frame_rate).round() as i64
    }

    fn draw_car(&mut self, id: u64, direction: DrivingDirection) -> VehicleMeta {
        VehicleMeta {
            vehicle_id: id,
            class: VehicleClass::Car,
            length: self.rng.gen_range(4.2..5.2),
            width: self.rng.gen_range(1.8..2.05),
            direction,
        }
    }

    fn lane_geometry(&self, direction: DrivingDirection) -> Result<LaneGeometry, String> {
        let geometry = self.meta.lane_geometry(direction);
        if geometry.lane_count() == 0 {
            return Err(format!("carriageway {direction:?} has no lanes"));
        }
        Ok(geometry)
    }
}

/// Generates a raw-frame recording realizing the given plants, together
/// with the ground-truth ledger.
///
/// Plants are laid out in disjoint consecutive time blocks, so they never
/// interact; the same seed always produces a byte-identical recording.
pub fn synthesize_recording(
    plants: &[PlantSpec],
    meta: &RecordingMeta,
    seed: u64,
) -> Result<(Recording, Ledger), SynthError> {
    meta.validate().map_err(|detail| SynthError::InvalidPlant {
        index: 0,
        detail: format!("recording meta: {detail}"),
    })?;

    let mut builder = Builder {
        meta,
        rng: ChaCha8Rng::seed_from_u64(seed),
        vehicles: Vec::new(),
        next_id: 1,
        next_frame: 0,
        used_lanes: std::collections::BTreeSet::new(),
        ledger: Ledger::default(),
    };

    // Reserve plant lanes up front so background traffic avoids them.
    for (index, spec) in plants.iter().enumerate() {
        match &spec.maneuver {
            Some(PlantManeuver::Brake(p)) => {
                builder.used_lanes.insert((p.direction, p.lane));
            }
            Some(PlantManeuver::CutIn(p)) => {
                builder.used_lanes.insert((p.direction, p.ego_lane));
                builder
                    .used_lanes
                    .insert((p.direction, p.ego_lane + p.relative_lane));
            }
            Some(PlantManeuver::Swerve(p)) => {
                builder.used_lanes.insert((p.direction, p.lane));
                builder
                    .used_lanes
                    .insert((p.direction, side_ego_lane(p, meta, index)?));
            }
            None => {}
        }
    }

    for (index, spec) in plants.iter().enumerate() {
        match &spec.maneuver {
            Some(PlantManeuver::Brake(p)) => plant_brake(&mut builder, index, p)?,
            Some(PlantManeuver::CutIn(p)) => plant_cutin(&mut builder, index, p)?,
            Some(PlantManeuver::Swerve(p)) => plant_swerve(&mut builder, index, p)?,
            None => {}
        }
    }

    let recording_end = builder.next_frame.max(builder.frames(8.0));
    let total_background: u32 = plants.iter().map(|s| s.background_traffic).sum();
    add_background(&mut builder, total_background, recording_end)?;

    let noise: f64 = plants
        .iter()
        .map(|s| s.noise_amplitude)
        .fold(0.0, f64::max);

    Ok(assemble(builder, noise))
}

fn side_ego_lane(
    plant: &SwervePlant,
    meta: &RecordingMeta,
    index: usize,
) -> Result<i32, SynthError> {
    match plant.relation {
        SwerveRelation::Lead => Ok(plant.lane),
        SwerveRelation::Side => {
            let lanes = meta.lane_geometry(plant.direction).lane_count() as i32;
            if plant.lane > 1 {
                Ok(plant.lane - 1)
            } else if plant.lane < lanes {
                Ok(plant.lane + 1)
            } else {
                Err(SynthError::InvalidPlant {
                    index,
                    detail: "side swerve needs an adjacent lane".to_string(),
                })
            }
        }
    }
}

/// Closed-form longitudinal motion: constant speed, one cubic transition,
/// constant speed again.
struct LongitudinalPlan {
    profile: CubicBrakeProfile,
    /// Frame at which the transition starts.
    start_frame: i64,
    /// Frame at which the transition ends.
    end_frame: i64,
    /// Position of the vehicle center at `start_frame`.
    x_at_start: f64,
    frame_rate: f64,
}

impl LongitudinalPlan {
    fn constant(v: f64, anchor_frame: i64, x_at_anchor: f64, frame_rate: f64) -> Self {
        LongitudinalPlan {
            profile: CubicBrakeProfile {
                v0: v,
                vf: v,
                duration: 1.0,
            },
            start_frame: anchor_frame,
            end_frame: anchor_frame,
            x_at_start: x_at_anchor,
            frame_rate,
        }
    }

    fn x(&self, frame: i64) -> f64 {
        let t = (frame - self.start_frame) as f64 / self.frame_rate;
        let span = (self.end_frame - self.start_frame) as f64 / self.frame_rate;
        if t <= 0.0 {
            self.x_at_start + self.profile.v0 * t
        } else if t >= span {
            self.x_at_start + self.profile.total_distance_over(span)
                + self.profile.vf * (t - span)
        } else {
            self.x_at_start + self.profile.distance_until(t).unwrap_or(0.0)
        }
    }

    fn v(&self, frame: i64) -> f64 {
        let t = (frame - self.start_frame) as f64 / self.frame_rate;
        let span = (self.end_frame - self.start_frame) as f64 / self.frame_rate;
        if t <= 0.0 {
            self.profile.v0
        } else if t >= span {
            self.profile.vf
        } else {
            self.profile.velocity(t).unwrap_or(self.profile.vf)
        }
    }

    fn a(&self, frame: i64) -> f64 {
        let t = (frame - self.start_frame) as f64 / self.frame_rate;
        let span = (self.end_frame - self.start_frame) as f64 / self.frame_rate;
        if t <= 0.0 || t >= span {
            0.0
        } else {
            self.profile.acceleration(t)
        }
    }
}

impl CubicBrakeProfile {
    fn total_distance_over(&self, span: f64) -> f64 {
        if span <= 0.0 {
            0.0
        } else if (span - self.duration).abs() < 1e-9 {
            self.total_distance()
        } else {
            self.distance_until(span.min(self.duration)).unwrap_or(0.0)
                + self.vf * (span - self.duration).max(0.0)
        }
    }
}

fn shift_to_fit(
    index: usize,
    area: f64,
    extents: &mut [(&mut LongitudinalPlan, f64)],
    frames: std::ops::RangeInclusive<i64>,
) -> Result<(), SynthError> {
    let mut x_min = f64::MAX;
    let mut x_max = f64::MIN;
    for (plan, half_len) in extents.iter() {
        for f in [*frames.start(), *frames.end()] {
            // Longitudinal motion is monotone, so the extremes sit at the
            // block bounds.
            x_min = x_min.min(plan.x(f) - half_len);
            x_max = x_max.max(plan.x(f) + half_len);
        }
    }
    let needed = x_max - x_min + 2.0 * AREA_MARGIN;
    if needed > area {
        return Err(SynthError::DoesNotFit {
            index,
            needed,
            available: area,
        });
    }
    let shift = AREA_MARGIN - x_min;
    for (plan, _) in extents.iter_mut() {
        plan.x_at_start += shift;
    }
    Ok(())
}

fn plant_brake(builder: &mut Builder, index: usize, plant: &BrakePlant) -> Result<(), SynthError> {
    let invalid = |detail: String| SynthError::InvalidPlant { index, detail };
    if !(plant.initial_distance > 0.0) {
        return Err(invalid("initial distance must be positive".to_string()));
    }
    if !(plant.brake_duration > 0.0) || plant.v_ch_final >= plant.v_ch {
        return Err(invalid(
            "brake needs positive duration and a final velocity below the initial one".to_string(),
        ));
    }
    let geometry = builder.lane_geometry(plant.direction).map_err(&invalid)?;
    let lane_center = geometry
        .lane_center(plant.lane)
        .ok_or_else(|| invalid(format!("lane {} does not exist", plant.lane)))?;

    let rate = builder.meta.frame_rate;
    let pre = builder.frames(PRE_ROLL_S);
    let maneuver = (plant.brake_duration * rate).round().max(1.0) as i64;
    let duration_used = maneuver as f64 / rate;
    let post = builder.frames(POST_ROLL_S);

    let f0 = builder.next_frame;
    let f1 = f0 + pre;
    let f2 = f1 + maneuver;
    let f3 = f2 + post;
    builder.next_frame = f3 + builder.frames(BLOCK_GAP_S);

    let ego_id = builder.next_id;
    let ch_id = builder.next_id + 1;
    builder.next_id += 2;
    let ego_meta = builder.draw_car(ego_id, plant.direction);
    let ch_meta = builder.draw_car(ch_id, plant.direction);

    let profile = CubicBrakeProfile::new(plant.v_ch, plant.v_ch_final, duration_used)
        .map_err(|e| invalid(e.to_string()))?;
    let mut ch_plan = LongitudinalPlan {
        profile,
        start_frame: f1,
        end_frame: f2,
        x_at_start: 0.0,
        frame_rate: rate,
    };
    let center_gap = plant.initial_distance + (ego_meta.length + ch_meta.length) / 2.0;
    let mut ego_plan = LongitudinalPlan::constant(plant.v_ego, f1, -center_gap, rate);

    // The follower must stay behind through the whole block.
    for f in f0..=f3 {
        let gap = (ch_plan.x(f) - ch_meta.length / 2.0) - (ego_plan.x(f) + ego_meta.length / 2.0);
        if gap <= 0.3 {
            return Err(invalid(format!(
                "ego reaches the challenger at frame {f} (gap {gap:.2} m)"
            )));
        }
    }

    shift_to_fit(
        index,
        builder.meta.measurement_area_length,
        &mut [
            (&mut ch_plan, ch_meta.length / 2.0),
            (&mut ego_plan, ego_meta.length / 2.0),
        ],
        f0..=f3,
    )?;

    for (meta, plan) in [(&ego_meta, &ego_plan), (&ch_meta, &ch_plan)] {
        let states = (f0..=f3)
            .map(|f| RawState {
                frame: f,
                x: plan.x(f),
                y: lane_center,
                vx: plan.v(f),
                vy: 0.0,
                ax: plan.a(f),
                ay: 0.0,
            })
            .collect();
        builder.vehicles.push(BuildVehicle {
            meta: (*meta).clone(),
            states,
        });
    }

    let (trigger_time_s, initial_gap) =
        resolve_trigger_timing(plant.initial_distance, plant.v_ego, plant.v_ch);
    builder.ledger.entries.push(LedgerEntry {
        plant_index: index,
        expected: ScenarioRecord::Brake(BrakeScenario {
            road: road_context(builder.meta, plant.direction),
            ego: info(&ego_meta),
            challenger: info(&ch_meta),
            start_frame: f1,
            end_frame: f2,
            v_ego0: plant.v_ego,
            v_ch0: plant.v_ch,
            initial_distance: plant.initial_distance,
            trigger_distance: plant.initial_distance,
            brake_duration: duration_used,
            v_ch_final: plant.v_ch_final,
            peak_deceleration: profile.peak_deceleration(),
            lane_id: plant.lane,
            lane_center_y: lane_center,
            trigger_time_s,
            initial_gap,
        }),
    });
    Ok(())
}

fn plant_cutin(builder: &mut Builder, index: usize, plant: &CutInPlant) -> Result<(), SynthError> {
    let invalid = |detail: String| SynthError::InvalidPlant { index, detail };
    if !(plant.initial_distance > 0.0) || !(plant.cutin_distance > 0.0) {
        return Err(invalid(
            "cut-in needs positive initial distance and travel".to_string(),
        ));
    }
    if plant.relative_lane != 1 && plant.relative_lane != -1 {
        return Err(invalid(format!(
            "relative lane must be -1 or +1, got {}",
            plant.relative_lane
        )));
    }
    if !(plant.v_ch > 0.0) || !(plant.v_ch_final > 0.0) || !(plant.v_ego > 0.0) {
        return Err(invalid("vehicle velocities must be positive".to_string()));
    }
    let geometry = builder.lane_geometry(plant.direction).map_err(&invalid)?;
    let target_lane = plant.ego_lane;
    let source_lane = plant.ego_lane + plant.relative_lane;
    let target_center = geometry
        .lane_center(target_lane)
        .ok_or_else(|| invalid(format!("ego lane {target_lane} does not exist")))?;
    let source_center = geometry
        .lane_center(source_lane)
        .ok_or_else(|| invalid(format!("source lane {source_lane} does not exist")))?;
    for (name, lane, offset) in [
        ("initial", source_lane, plant.initial_lane_offset),
        ("final", target_lane, plant.final_lane_offset),
    ] {
        let width = geometry.lane_width(lane).unwrap_or(0.0);
        if offset.abs() > width / 2.0 - 0.3 {
            return Err(invalid(format!(
                "{name} lane offset {offset} leaves lane {lane} (width {width})"
            )));
        }
    }

    let rate = builder.meta.frame_rate;
    // The speed change runs over the same window as the lateral maneuver;
    // its duration follows from the traveled distance.
    let duration = 2.0 * plant.cutin_distance / (plant.v_ch + plant.v_ch_final);
    let maneuver = (duration * rate).round().max(1.0) as i64;
    let duration_used = maneuver as f64 / rate;
    let travel_used = duration_used * (plant.v_ch + plant.v_ch_final) / 2.0;

    let pre = builder.frames(PRE_ROLL_S);
    let post = builder.frames(POST_ROLL_S);
    let f0 = builder.next_frame;
    let f1 = f0 + pre;
    let f2 = f1 + maneuver;
    let f3 = f2 + post;
    builder.next_frame = f3 + builder.frames(BLOCK_GAP_S);

    let ego_id = builder.next_id;
    let ch_id = builder.next_id + 1;
    builder.next_id += 2;
    let ego_meta = builder.draw_car(ego_id, plant.direction);
    let ch_meta = builder.draw_car(ch_id, plant.direction);

    let profile = CubicBrakeProfile {
        v0: plant.v_ch,
        vf: plant.v_ch_final,
        duration: duration_used,
    };
    let mut ch_plan = LongitudinalPlan {
        profile,
        start_frame: f1,
        end_frame: f2,
        x_at_start: 0.0,
        frame_rate: rate,
    };
    let center_gap = plant.initial_distance + (ego_meta.length + ch_meta.length) / 2.0;
    let mut ego_plan = LongitudinalPlan::constant(plant.v_ego, f1, -center_gap, rate);

    for f in f0..=f3 {
        let gap = (ch_plan.x(f) - ch_meta.length / 2.0) - (ego_plan.x(f) + ego_meta.length / 2.0);
        if gap <= 0.3 {
            return Err(invalid(format!(
                "ego reaches the challenger at frame {f} (gap {gap:.2} m)"
            )));
        }
    }

    shift_to_fit(
        index,
        builder.meta.measurement_area_length,
        &mut [
            (&mut ch_plan, ch_meta.length / 2.0),
            (&mut ego_plan, ego_meta.length / 2.0),
        ],
        f0..=f3,
    )?;

    let d0 = source_center + plant.initial_lane_offset;
    let df = target_center + plant.final_lane_offset;
    let lateral = SinusoidalLaneChange {
        d0,
        df,
        travel: travel_used,
    };

    // Ego: constant speed, lane center of the target lane.
    let ego_states = (f0..=f3)
        .map(|f| RawState {
            frame: f,
            x: ego_plan.x(f),
            y: target_center,
            vx: plant.v_ego,
            vy: 0.0,
            ax: 0.0,
            ay: 0.0,
        })
        .collect();
    builder.vehicles.push(BuildVehicle {
        meta: ego_meta.clone(),
        states: ego_states,
    });

    // Challenger: sinusoidal lateral profile driven by longitudinal travel,
    // with all derivative channels analytic.
    let half_amp = (df - d0) / 2.0;
    let omega = std::f64::consts::PI / travel_used;
    let mut cross_frame = None;
    let ch_states: Vec<RawState> = (f0..=f3)
        .map(|f| {
            let (y, vy, ay);
            if f <= f1 {
                y = d0;
                vy = 0.0;
                ay = 0.0;
            } else if f >= f2 {
                y = df;
                vy = 0.0;
                ay = 0.0;
            } else {
                let tau = (f - f1) as f64 / rate;
                let s = profile.distance_until(tau).unwrap_or(0.0);
                let v = profile.velocity(tau).unwrap_or(plant.v_ch_final);
                let a = profile.acceleration(tau);
                let phase = omega * s;
                y = lateral.lateral_unchecked(s);
                vy = half_amp * omega * phase.sin() * v;
                ay = half_amp * omega * (phase.cos() * omega * v * v + phase.sin() * a);
            }
            if cross_frame.is_none() && geometry.assign_lane(y) == target_lane && f >= f1 {
                cross_frame = Some(f);
            }
            RawState {
                frame: f,
                x: ch_plan.x(f),
                y,
                vx: ch_plan.v(f),
                vy,
                ax: ch_plan.a(f),
                ay,
            }
        })
        .collect();
    builder.vehicles.push(BuildVehicle {
        meta: ch_meta.clone(),
        states: ch_states,
    });

    let (trigger_time_s, initial_gap) =
        resolve_trigger_timing(plant.initial_distance, plant.v_ego, plant.v_ch);
    builder.ledger.entries.push(LedgerEntry {
        plant_index: index,
        expected: ScenarioRecord::CutIn(CutInScenario {
            road: road_context(builder.meta, plant.direction),
            ego: info(&ego_meta),
            challenger: info(&ch_meta),
            start_frame: f1,
            cross_frame: cross_frame.unwrap_or(f2),
            end_frame: f2,
            v_ego0: plant.v_ego,
            v_ch0: plant.v_ch,
            initial_distance: plant.initial_distance,
            trigger_distance: plant.initial_distance,
            relative_lane: plant.relative_lane,
            initial_lane_offset: plant.initial_lane_offset,
            cutin_distance: travel_used,
            v_ch_final: plant.v_ch_final,
            final_lane_offset: plant.final_lane_offset,
            thw0: plant.initial_distance / plant.v_ego,
            source_lane_id: source_lane,
            target_lane_id: target_lane,
            source_lane_center: source_center,
            target_lane_center: target_center,
            trigger_time_s,
            initial_gap,
        }),
    });
    Ok(())
}

fn plant_swerve(builder: &mut Builder, index: usize, plant: &SwervePlant) -> Result<(), SynthError> {
    let invalid = |detail: String| SynthError::InvalidPlant { index, detail };
    if !(plant.lateral_range > 0.0) || !(plant.max_lateral_acceleration > 0.0) {
        return Err(invalid(
            "swerve needs positive range and lateral acceleration".to_string(),
        ));
    }
    let geometry = builder.lane_geometry(plant.direction).map_err(&invalid)?;
    let lane_center = geometry
        .lane_center(plant.lane)
        .ok_or_else(|| invalid(format!("lane {} does not exist", plant.lane)))?;
    let width = geometry.lane_width(plant.lane).unwrap_or(0.0);
    let amplitude = plant.lateral_range / 2.0;
    if amplitude > width / 2.0 - 0.2 {
        return Err(invalid(format!(
            "range {} does not fit within lane width {width}",
            plant.lateral_range
        )));
    }
    let ego_lane = side_ego_lane(plant, builder.meta, index)?;
    let ego_center = geometry
        .lane_center(ego_lane)
        .ok_or_else(|| invalid(format!("ego lane {ego_lane} does not exist")))?;

    let rate = builder.meta.frame_rate;
    // Two full oscillation periods; the frequency follows from the lateral
    // acceleration at the turning points.
    let omega = (plant.max_lateral_acceleration / amplitude).sqrt();
    let maneuver = (4.0 * std::f64::consts::PI / omega * rate).round().max(2.0) as i64;
    let duration_used = maneuver as f64 / rate;
    let omega_used = 4.0 * std::f64::consts::PI / duration_used;

    let pre = builder.frames(PRE_ROLL_S);
    let post = builder.frames(POST_ROLL_S);
    let f0 = builder.next_frame;
    let f1 = f0 + pre;
    let f2 = f1 + maneuver;
    let f3 = f2 + post;
    builder.next_frame = f3 + builder.frames(BLOCK_GAP_S);

    let ego_id = builder.next_id;
    let ch_id = builder.next_id + 1;
    builder.next_id += 2;
    let ego_meta = builder.draw_car(ego_id, plant.direction);
    let ch_meta = builder.draw_car(ch_id, plant.direction);

    let mut ch_plan = LongitudinalPlan::constant(plant.v_ch, f0, 0.0, rate);
    let center_gap = plant.initial_distance + (ego_meta.length + ch_meta.length) / 2.0;
    let mut ego_plan = LongitudinalPlan::constant(plant.v_ego, f0, -center_gap, rate);

    for f in f0..=f3 {
        let gap = (ch_plan.x(f) - ch_meta.length / 2.0) - (ego_plan.x(f) + ego_meta.length / 2.0);
        if gap <= 0.3 {
            return Err(invalid(format!(
                "ego reaches the swerving vehicle at frame {f} (gap {gap:.2} m)"
            )));
        }
    }

    shift_to_fit(
        index,
        builder.meta.measurement_area_length,
        &mut [
            (&mut ch_plan, ch_meta.length / 2.0),
            (&mut ego_plan, ego_meta.length / 2.0),
        ],
        f0..=f3,
    )?;

    let ego_states = (f0..=f3)
        .map(|f| RawState {
            frame: f,
            x: ego_plan.x(f),
            y: ego_center,
            vx: plant.v_ego,
            vy: 0.0,
            ax: 0.0,
            ay: 0.0,
        })
        .collect();
    builder.vehicles.push(BuildVehicle {
        meta: ego_meta.clone(),
        states: ego_states,
    });

    // y = center - A cos(w t) starts and ends at rest at the right turning
    // point of the oscillation.
    let ch_states = (f0..=f3)
        .map(|f| {
            let (y, vy, ay);
            if f <= f1 || f >= f2 {
                y = lane_center - amplitude;
                vy = 0.0;
                ay = 0.0;
            } else {
                let tau = (f - f1) as f64 / rate;
                let phase = omega_used * tau;
                y = lane_center - amplitude * phase.cos();
                vy = amplitude * omega_used * phase.sin();
                ay = amplitude * omega_used * omega_used * phase.cos();
            }
            RawState {
                frame: f,
                x: ch_plan.x(f),
                y,
                vx: plant.v_ch,
                vy,
                ax: 0.0,
                ay,
            }
        })
        .collect();
    builder.vehicles.push(BuildVehicle {
        meta: ch_meta.clone(),
        states: ch_states,
    });

    builder.ledger.entries.push(LedgerEntry {
        plant_index: index,
        expected: ScenarioRecord::Swerve(SwerveScenario {
            road: road_context(builder.meta, plant.direction),
            ego: info(&ego_meta),
            challenger: info(&ch_meta),
            relation: plant.relation,
            start_frame: f0,
            end_frame: f3,
            lateral_range: plant.lateral_range,
            max_lateral_acceleration: amplitude * omega_used * omega_used,
            v_ego0: plant.v_ego,
            v_ch0: plant.v_ch,
            initial_distance: plant.initial_distance,
            ego_lane_id: ego_lane,
            ego_lane_center: ego_center,
            ch_lane_id: plant.lane,
            ch_lane_center: lane_center,
            trigger_time_s: crate::models::DEFAULT_TRIGGER_TIME,
        }),
    });
    Ok(())
}

fn add_background(
    builder: &mut Builder,
    count: u32,
    recording_end: i64,
) -> Result<(), SynthError> {
    if count == 0 {
        return Ok(());
    }
    // Background vehicles cycle through lanes unused by any plant so they
    // can never interfere with an ego/challenger pair.
    let mut free: Vec<(DrivingDirection, i32)> = Vec::new();
    for direction in [DrivingDirection::Upper, DrivingDirection::Lower] {
        let lanes = builder.meta.lane_geometry(direction).lane_count() as i32;
        for lane in 1..=lanes {
            if !builder.used_lanes.contains(&(direction, lane)) {
                free.push((direction, lane));
            }
        }
    }
    if free.is_empty() {
        return Err(SynthError::InvalidPlant {
            index: 0,
            detail: "no free lanes left for background traffic".to_string(),
        });
    }

    let area = builder.meta.measurement_area_length;
    let rate = builder.meta.frame_rate;
    for i in 0..count {
        let (direction, lane) = free[i as usize % free.len()];
        let geometry = builder.meta.lane_geometry(direction);
        let lane_center = geometry.lane_center(lane).unwrap();
        let v = builder.rng.gen_range(22.0..33.0);
        let span = area - 2.0 * AREA_MARGIN;
        let travel_frames = ((span / v) * rate).floor() as i64;
        let latest_entry = (recording_end - travel_frames.min(recording_end)).max(0);
        let entry = if latest_entry > 0 {
            builder.rng.gen_range(0..latest_entry)
        } else {
            0
        };
        let exit = (entry + travel_frames).min(recording_end);
        if exit - entry < 2 {
            continue;
        }

        let id = builder.next_id;
        builder.next_id += 1;
        let mut meta = builder.draw_car(id, direction);
        if builder.rng.gen_bool(0.25) {
            meta.class = VehicleClass::Truck;
            meta.length = builder.rng.gen_range(10.0..16.0);
            meta.width = builder.rng.gen_range(2.4..2.55);
        }

        let states = (entry..=exit)
            .map(|f| RawState {
                frame: f,
                x: AREA_MARGIN + v * (f - entry) as f64 / rate,
                y: lane_center,
                vx: v,
                vy: 0.0,
                ax: 0.0,
                ay: 0.0,
            })
            .collect();
        builder.vehicles.push(BuildVehicle { meta, states });
    }
    Ok(())
}

/// Same-lane neighbor relations of one vehicle at one frame, canonical
/// frame: `(preceding_id, following_id, dhw, thw)`.
type NeighborInfo = (Option<u64>, Option<u64>, Option<f64>, Option<f64>);

/// Computes preceding/following relations and headways per (id, frame).
fn compute_neighbors(
    vehicles: &[BuildVehicle],
    meta: &RecordingMeta,
) -> BTreeMap<(u64, i64), NeighborInfo> {
    // (id, x center, length, lane, vx), grouped by (direction, frame).
    type Entry = (u64, f64, f64, i32, f64);
    let mut by_frame: BTreeMap<(u8, i64), Vec<Entry>> = BTreeMap::new();
    for v in vehicles {
        let geometry = meta.lane_geometry(v.meta.direction);
        for s in &v.states {
            by_frame
                .entry((v.meta.direction.flag(), s.frame))
                .or_default()
                .push((
                    v.meta.vehicle_id,
                    s.x,
                    v.meta.length,
                    geometry.assign_lane(s.y),
                    s.vx,
                ));
        }
    }

    let mut out = BTreeMap::new();
    for ((_, frame), mut entries) in by_frame {
        entries.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for (i, &(id, x, len, lane, vx)) in entries.iter().enumerate() {
            let preceding = entries[i + 1..]
                .iter()
                .find(|e| e.3 == lane)
                .map(|e| (e.0, e.1, e.2));
            let following = entries[..i].iter().rev().find(|e| e.3 == lane).map(|e| e.0);
            let (preceding_id, dhw) = match preceding {
                Some((pid, px, plen)) => {
                    let gap = (px - plen / 2.0) - (x + len / 2.0);
                    (Some(pid), Some(gap.max(0.0)))
                }
                None => (None, None),
            };
            let thw = match (dhw, vx > 0.0) {
                (Some(gap), true) => Some(gap / vx),
                _ => None,
            };
            out.insert((id, frame), (preceding_id, following, dhw, thw));
        }
    }
    out
}

fn road_context(meta: &RecordingMeta, direction: DrivingDirection) -> RoadContext {
    let geometry = meta.lane_geometry(direction);
    RoadContext {
        recording_id: meta.recording_id,
        direction,
        lane_markings: geometry.marking_offsets().to_vec(),
        speed_limit: meta.speed_limit,
        frame_rate: meta.frame_rate,
    }
}

fn info(meta: &VehicleMeta) -> VehicleInfo {
    VehicleInfo {
        id: meta.vehicle_id,
        length: meta.length,
        width: meta.width,
        class: meta.class,
    }
}

/// Raw-frame lane numbering as used by the dataset: lanes count from the
/// top of the image, with ids 2..=M between the upper markings and
/// M+2..=M+L between the lower ones.
fn raw_lane_id(meta: &RecordingMeta, direction: DrivingDirection, y_img: f64) -> i32 {
    match direction {
        DrivingDirection::Upper => {
            let m = &meta.upper_lane_markings;
            let mut lane = 2;
            for (j, marking) in m.iter().enumerate().take(m.len().saturating_sub(1)).skip(1) {
                if y_img >= *marking {
                    lane = (j + 2) as i32;
                }
            }
            lane.min(m.len() as i32)
        }
        DrivingDirection::Lower => {
            let upper_count = meta.upper_lane_markings.len() as i32;
            let m = &meta.lower_lane_markings;
            let mut lane = upper_count + 2;
            for (j, marking) in m.iter().enumerate().take(m.len().saturating_sub(1)).skip(1) {
                if y_img >= *marking {
                    lane = upper_count + (j + 2) as i32;
                }
            }
            lane.min(upper_count + m.len() as i32)
        }
    }
}

/// Converts the canonical build states into a raw image-frame recording,
/// adding positional noise last so every other channel stays analytic.
fn assemble(mut builder: Builder, noise: f64) -> (Recording, Ledger) {
    let meta = builder.meta.clone();
    let neighbors = compute_neighbors(&builder.vehicles, &meta);
    let area = meta.measurement_area_length;

    let mut vehicles = BTreeMap::new();
    let mut tracks = BTreeMap::new();

    // Draw noise in a stable order: vehicles as created, frames ascending.
    for v in &builder.vehicles {
        let id = v.meta.vehicle_id;
        vehicles.insert(id, v.meta.clone());
        let direction = v.meta.direction;
        let (y_base, y_sign) = match direction {
            DrivingDirection::Upper => (meta.upper_lane_markings[0], 1.0),
            DrivingDirection::Lower => (*meta.lower_lane_markings.last().unwrap(), -1.0),
        };
        let half_len = v.meta.length / 2.0;
        let half_wid = v.meta.width / 2.0;

        let states = v
            .states
            .iter()
            .map(|s| {
                // Invert the canonicalization: center in image coordinates,
                // then the stored corner position.
                let (x_img, vx, ax) = match direction {
                    DrivingDirection::Upper => (area - s.x, -s.vx, -s.ax),
                    DrivingDirection::Lower => (s.x, s.vx, s.ax),
                };
                let y_img = y_base + y_sign * s.y;
                let vy = y_sign * s.vy;
                let ay = y_sign * s.ay;
                let (nx, ny) = if noise > 0.0 {
                    (
                        builder.rng.gen_range(-noise..=noise),
                        builder.rng.gen_range(-noise..=noise),
                    )
                } else {
                    (0.0, 0.0)
                };
                let (preceding_id, following_id, dhw, thw) = neighbors
                    .get(&(id, s.frame))
                    .copied()
                    .unwrap_or((None, None, None, None));
                KinematicState {
                    frame: s.frame,
                    x: x_img - half_len + nx,
                    y: y_img - half_wid + ny,
                    vx,
                    vy,
                    ax,
                    ay,
                    lane_id: raw_lane_id(&meta, direction, y_img),
                    lane_offset: 0.0,
                    preceding_id,
                    following_id,
                    thw,
                    dhw,
                }
            })
            .collect();
        tracks.insert(
            id,
            Track {
                vehicle_id: id,
                states,
            },
        );
    }

    (
        Recording {
            meta,
            vehicles,
            tracks,
            frame: CoordinateFrame::RawImage,
        },
        builder.ledger,
    )
}
