//! Assembly of ego/challenger pairs around detected events into concrete,
//! fully parameterized scenario records, plus the ALKS operational-design-
//! domain filter.
//!
//! Every emitted scenario is a pure function of the source recording given
//! `(ego_id, challenger_id, start_frame)`: all parameters are sampled from
//! the canonical tracks at the event bounds. Distances are bumper-to-bumper
//! (challenger rear to ego front), matching the dataset's headway
//! semantics.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::detect::{BrakeEvent, LaneChangeEvent, SwerveEvent};
use crate::error::ExtractError;
use crate::highd::{CoordinateFrame, DrivingDirection, Recording, VehicleClass, VehicleMeta};
use crate::models::resolve_trigger_timing;
use crate::units::kmh_to_ms;

/// Static description of one scenario participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleInfo {
    pub id: u64,
    pub length: f64,
    pub width: f64,
    pub class: VehicleClass,
}

impl VehicleInfo {
    fn from_meta(meta: &VehicleMeta) -> Self {
        VehicleInfo {
            id: meta.vehicle_id,
            length: meta.length,
            width: meta.width,
            class: meta.class,
        }
    }
}

/// Road-localization data carried by every scenario so that export and
/// replay are self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadContext {
    pub recording_id: u32,
    pub direction: DrivingDirection,
    /// Canonical lane-marking offsets of this carriageway, ascending from
    /// the driver's rightmost marking at 0.
    pub lane_markings: Vec<f64>,
    /// Posted speed limit in m/s, if any.
    pub speed_limit: Option<f64>,
    pub frame_rate: f64,
}

impl RoadContext {
    fn from_recording(recording: &Recording, direction: DrivingDirection) -> Self {
        let geometry = recording.meta.lane_geometry(direction);
        RoadContext {
            recording_id: recording.meta.recording_id,
            direction,
            lane_markings: geometry.marking_offsets().to_vec(),
            speed_limit: recording.meta.speed_limit,
            frame_rate: recording.meta.frame_rate,
        }
    }

    pub fn lane_count(&self) -> usize {
        self.lane_markings.len().saturating_sub(1)
    }

    pub fn lane_center(&self, lane_id: i32) -> Option<f64> {
        if lane_id < 1 || lane_id as usize > self.lane_count() {
            return None;
        }
        let i = (lane_id - 1) as usize;
        Some(0.5 * (self.lane_markings[i] + self.lane_markings[i + 1]))
    }
}

/// Concrete "Lead Vehicle Brake" scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrakeScenario {
    pub road: RoadContext,
    pub ego: VehicleInfo,
    pub challenger: VehicleInfo,
    /// Frame of maneuver initiation in the source recording.
    pub start_frame: i64,
    pub end_frame: i64,
    /// Initial ego velocity, m/s.
    pub v_ego0: f64,
    /// Initial challenging vehicle velocity, m/s.
    pub v_ch0: f64,
    /// Bumper gap at maneuver start, m.
    pub initial_distance: f64,
    /// Gap at which the simulated brake action fires; equals
    /// `initial_distance` by construction.
    pub trigger_distance: f64,
    /// Challenging vehicle brake duration, s.
    pub brake_duration: f64,
    /// Final challenging vehicle velocity, m/s.
    pub v_ch_final: f64,
    pub peak_deceleration: f64,
    pub lane_id: i32,
    pub lane_center_y: f64,
    /// Simulation time at which the trigger distance is reached.
    pub trigger_time_s: f64,
    /// Back-calculated bumper gap at simulation t = 0.
    pub initial_gap: f64,
}

/// Concrete "Cut-In" scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutInScenario {
    pub road: RoadContext,
    pub ego: VehicleInfo,
    pub challenger: VehicleInfo,
    pub start_frame: i64,
    pub cross_frame: i64,
    pub end_frame: i64,
    pub v_ego0: f64,
    pub v_ch0: f64,
    /// Longitudinal bumper gap at maneuver start, m.
    pub initial_distance: f64,
    pub trigger_distance: f64,
    /// +1 when the challenger starts one lane to the ego's left.
    pub relative_lane: i32,
    /// Signed offset from the source lane center at maneuver start, m.
    pub initial_lane_offset: f64,
    /// Longitudinal distance traveled by the challenger during the change, m.
    pub cutin_distance: f64,
    pub v_ch_final: f64,
    pub final_lane_offset: f64,
    /// Time headway of the ego at maneuver start, s.
    pub thw0: f64,
    pub source_lane_id: i32,
    pub target_lane_id: i32,
    pub source_lane_center: f64,
    pub target_lane_center: f64,
    pub trigger_time_s: f64,
    pub initial_gap: f64,
}

/// Spatial relation of the swerving challenger to the ego.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwerveRelation {
    Lead,
    Side,
}

/// Concrete "Swerving Lead/Side Vehicle" scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwerveScenario {
    pub road: RoadContext,
    pub ego: VehicleInfo,
    pub challenger: VehicleInfo,
    pub relation: SwerveRelation,
    pub start_frame: i64,
    pub end_frame: i64,
    pub lateral_range: f64,
    pub max_lateral_acceleration: f64,
    pub v_ego0: f64,
    pub v_ch0: f64,
    /// Bumper gap at the start of the observation overlap, m.
    pub initial_distance: f64,
    pub ego_lane_id: i32,
    pub ego_lane_center: f64,
    pub ch_lane_id: i32,
    pub ch_lane_center: f64,
    pub trigger_time_s: f64,
}

/// Tagged union over the three scenario types; one line of the scenario
/// database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioRecord {
    Brake(BrakeScenario),
    CutIn(CutInScenario),
    Swerve(SwerveScenario),
}

/// Scenario type discriminant used in reports and file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Brake,
    CutIn,
    Swerve,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Brake => "brake",
            ScenarioKind::CutIn => "cut_in",
            ScenarioKind::Swerve => "swerve",
        })
    }
}

impl ScenarioRecord {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioRecord::Brake(_) => ScenarioKind::Brake,
            ScenarioRecord::CutIn(_) => ScenarioKind::CutIn,
            ScenarioRecord::Swerve(_) => ScenarioKind::Swerve,
        }
    }

    pub fn road(&self) -> &RoadContext {
        match self {
            ScenarioRecord::Brake(s) => &s.road,
            ScenarioRecord::CutIn(s) => &s.road,
            ScenarioRecord::Swerve(s) => &s.road,
        }
    }

    pub fn ego(&self) -> &VehicleInfo {
        match self {
            ScenarioRecord::Brake(s) => &s.ego,
            ScenarioRecord::CutIn(s) => &s.ego,
            ScenarioRecord::Swerve(s) => &s.ego,
        }
    }

    pub fn challenger(&self) -> &VehicleInfo {
        match self {
            ScenarioRecord::Brake(s) => &s.challenger,
            ScenarioRecord::CutIn(s) => &s.challenger,
            ScenarioRecord::Swerve(s) => &s.challenger,
        }
    }

    pub fn start_frame(&self) -> i64 {
        match self {
            ScenarioRecord::Brake(s) => s.start_frame,
            ScenarioRecord::CutIn(s) => s.start_frame,
            ScenarioRecord::Swerve(s) => s.start_frame,
        }
    }

    pub fn end_frame(&self) -> i64 {
        match self {
            ScenarioRecord::Brake(s) => s.end_frame,
            ScenarioRecord::CutIn(s) => s.end_frame,
            ScenarioRecord::Swerve(s) => s.end_frame,
        }
    }

    pub fn v_ego0(&self) -> f64 {
        match self {
            ScenarioRecord::Brake(s) => s.v_ego0,
            ScenarioRecord::CutIn(s) => s.v_ego0,
            ScenarioRecord::Swerve(s) => s.v_ego0,
        }
    }

    /// Stable identifier used in report lines and output directory names.
    pub fn label(&self) -> String {
        format!(
            "rec{:02}_{}_{}_{}_{}",
            self.road().recording_id,
            self.kind(),
            self.start_frame(),
            self.ego().id,
            self.challenger().id
        )
    }

    /// Deterministic database ordering.
    pub fn sort_key(&self) -> (u32, i64, u64) {
        (
            self.road().recording_id,
            self.start_frame(),
            self.challenger().id,
        )
    }
}

/// ALKS operational-design-domain bounds used by [`filter_odd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddConfig {
    /// Maximum initial ego velocity, km/h.
    pub max_ego_velocity_kmh: f64,
    /// Minimum peak deceleration for brake scenarios, m/s².
    pub min_peak_deceleration: f64,
    /// Minimum lateral range for swerve scenarios, m.
    pub min_swerve_range: f64,
    /// Optional criticality ceiling on the cut-in time headway, s.
    /// Disabled by default.
    pub max_cutin_thw: Option<f64>,
}

impl Default for OddConfig {
    fn default() -> Self {
        OddConfig {
            max_ego_velocity_kmh: 70.0,
            min_peak_deceleration: 2.0,
            min_swerve_range: 1.2,
            max_cutin_thw: None,
        }
    }
}

/// Why an event produced no scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// No follower present to act as ego.
    NoEgo,
    /// Ego track does not cover the event interval.
    EgoNotVisible,
    /// Ego changed lanes during the event.
    EgoLaneChanged,
    /// Event start or end touches the edge of the vehicle's visible track,
    /// so the maneuver did not complete inside the measurement area.
    NotCompletedInArea,
    /// Challenger left the target lane again within a second of finishing.
    ChallengerReDeparted,
    /// Challenger was not ahead of the ego at maneuver start.
    NonPositiveGap,
    /// Ego velocity unusable for headway computation.
    BadEgoVelocity,
    /// Observation overlap shorter than required.
    OverlapTooShort,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SkipReason::NoEgo => "no_ego",
            SkipReason::EgoNotVisible => "ego_not_visible",
            SkipReason::EgoLaneChanged => "ego_lane_changed",
            SkipReason::NotCompletedInArea => "not_completed_in_area",
            SkipReason::ChallengerReDeparted => "challenger_re_departed",
            SkipReason::NonPositiveGap => "non_positive_gap",
            SkipReason::BadEgoVelocity => "bad_ego_velocity",
            SkipReason::OverlapTooShort => "overlap_too_short",
        };
        f.write_str(s)
    }
}

/// Counted skip reasons for one extraction pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkipSummary {
    pub counts: BTreeMap<SkipReason, u64>,
}

impl SkipSummary {
    fn bump(&mut self, reason: SkipReason) {
        *self.counts.entry(reason).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn merge(&mut self, other: &SkipSummary) {
        for (reason, n) in &other.counts {
            *self.counts.entry(*reason).or_insert(0) += n;
        }
    }
}

impl fmt::Display for SkipSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (reason, n) in &self.counts {
            writeln!(f, "skipped {reason}={n}")?;
        }
        Ok(())
    }
}

/// Exclusion window after a finished lane change within which the
/// challenger must stay in the target lane; separates completed changes
/// from aborts and double changes.
const RE_DEPARTURE_WINDOW_S: f64 = 1.0;

/// Minimum observation overlap for swerve scenarios.
const SWERVE_MIN_OVERLAP_S: f64 = 3.0;

fn bumper_gap(
    leader_x: f64,
    leader_len: f64,
    follower_x: f64,
    follower_len: f64,
) -> f64 {
    (leader_x - leader_len / 2.0) - (follower_x + follower_len / 2.0)
}

/// Builds "Lead Vehicle Brake" scenarios around detected brake events.
///
/// The ego is the braking vehicle's follower (via the following relation)
/// at maneuver start. Events are skipped when no ego exists, the ego does
/// not hold its lane, or the maneuver does not complete inside the
/// measurement area.
pub fn build_brake_scenarios(
    recording: &Recording,
    events: &[BrakeEvent],
) -> (Vec<BrakeScenario>, SkipSummary) {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut scenarios = Vec::new();
    let mut skips = SkipSummary::default();
    let frame_rate = recording.meta.frame_rate;

    for event in events {
        let Some(ch_track) = recording.track(event.vehicle_id) else {
            continue;
        };
        // Completion within the measurement area: both maneuver bounds must
        // be strictly inside the visible track.
        if event.start_frame <= ch_track.first_frame()
            || event.end_frame >= ch_track.last_frame()
        {
            skips.bump(SkipReason::NotCompletedInArea);
            continue;
        }
        let ch_start = ch_track.state_at(event.start_frame).unwrap();
        let Some(ego_id) = ch_start.following_id else {
            skips.bump(SkipReason::NoEgo);
            continue;
        };
        let (Some(ego_track), Some(ego_meta)) =
            (recording.track(ego_id), recording.vehicle(ego_id))
        else {
            skips.bump(SkipReason::NoEgo);
            continue;
        };
        if !ego_track.covers(event.start_frame, event.end_frame) {
            skips.bump(SkipReason::EgoNotVisible);
            continue;
        }
        let lane = ch_start.lane_id;
        let ego_holds_lane = (event.start_frame..=event.end_frame)
            .all(|f| ego_track.state_at(f).map(|s| s.lane_id) == Some(lane));
        if !ego_holds_lane {
            skips.bump(SkipReason::EgoLaneChanged);
            continue;
        }

        let ch_meta = recording.vehicle(event.vehicle_id).unwrap();
        let ego_start = ego_track.state_at(event.start_frame).unwrap();
        let gap = bumper_gap(ch_start.x, ch_meta.length, ego_start.x, ego_meta.length);
        if gap <= 0.0 {
            skips.bump(SkipReason::NonPositiveGap);
            continue;
        }

        let road = RoadContext::from_recording(recording, ch_meta.direction);
        let geometry = recording.meta.lane_geometry(ch_meta.direction);
        let (trigger_time_s, initial_gap) =
            resolve_trigger_timing(gap, ego_start.vx, ch_start.vx);

        scenarios.push(BrakeScenario {
            road,
            ego: VehicleInfo::from_meta(ego_meta),
            challenger: VehicleInfo::from_meta(ch_meta),
            start_frame: event.start_frame,
            end_frame: event.end_frame,
            v_ego0: ego_start.vx,
            v_ch0: event.v_start,
            initial_distance: gap,
            trigger_distance: gap,
            brake_duration: (event.end_frame - event.start_frame) as f64 / frame_rate,
            v_ch_final: event.v_end,
            peak_deceleration: event.peak_deceleration,
            lane_id: lane,
            lane_center_y: geometry.lane_center(lane).unwrap_or(0.0),
            trigger_time_s,
            initial_gap,
        });
    }

    scenarios.sort_by(|a, b| {
        (a.start_frame, a.challenger.id).cmp(&(b.start_frame, b.challenger.id))
    });
    (scenarios, skips)
}

/// Builds "Cut-In" scenarios around detected lane changes.
///
/// The ego is the vehicle that becomes the challenger's follower in the
/// target lane at the crossing frame. Canceled and double lane changes are
/// excluded by requiring the challenger to stay in the target lane for a
/// second past the maneuver end.
pub fn build_cutin_scenarios(
    recording: &Recording,
    events: &[LaneChangeEvent],
) -> (Vec<CutInScenario>, SkipSummary) {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut scenarios = Vec::new();
    let mut skips = SkipSummary::default();
    let frame_rate = recording.meta.frame_rate;
    let re_departure_frames = (RE_DEPARTURE_WINDOW_S * frame_rate).round() as i64;

    for event in events {
        let Some(ch_track) = recording.track(event.vehicle_id) else {
            continue;
        };
        if event.start_frame <= ch_track.first_frame()
            || event.end_frame + re_departure_frames > ch_track.last_frame()
        {
            skips.bump(SkipReason::NotCompletedInArea);
            continue;
        }
        // A canceled or double lane change shows up either as the lane id
        // flipping back inside the window or as the next lane-change
        // maneuver of the same vehicle starting inside it.
        let window_end = event.end_frame + re_departure_frames;
        let re_departed = (event.end_frame + 1..=window_end)
            .any(|f| ch_track.state_at(f).map(|s| s.lane_id) != Some(event.target_lane_id))
            || events.iter().any(|next| {
                next.vehicle_id == event.vehicle_id
                    && next.cross_frame > event.cross_frame
                    && next.start_frame <= window_end
            });
        if re_departed {
            skips.bump(SkipReason::ChallengerReDeparted);
            continue;
        }

        let Some(ego_id) = ch_track
            .state_at(event.cross_frame)
            .and_then(|s| s.following_id)
        else {
            skips.bump(SkipReason::NoEgo);
            continue;
        };
        let (Some(ego_track), Some(ego_meta)) =
            (recording.track(ego_id), recording.vehicle(ego_id))
        else {
            skips.bump(SkipReason::NoEgo);
            continue;
        };
        if !ego_track.covers(event.start_frame, event.end_frame) {
            skips.bump(SkipReason::EgoNotVisible);
            continue;
        }
        let ego_holds_lane = (event.start_frame..=event.end_frame)
            .all(|f| ego_track.state_at(f).map(|s| s.lane_id) == Some(event.target_lane_id));
        if !ego_holds_lane {
            skips.bump(SkipReason::EgoLaneChanged);
            continue;
        }

        let ch_meta = recording.vehicle(event.vehicle_id).unwrap();
        let ch_start = ch_track.state_at(event.start_frame).unwrap();
        let ch_end = ch_track.state_at(event.end_frame).unwrap();
        let ego_start = ego_track.state_at(event.start_frame).unwrap();

        let gap = bumper_gap(ch_start.x, ch_meta.length, ego_start.x, ego_meta.length);
        if gap <= 0.0 {
            skips.bump(SkipReason::NonPositiveGap);
            continue;
        }
        let Ok(thw0) = compute_thw(gap, ego_start.vx) else {
            skips.bump(SkipReason::BadEgoVelocity);
            continue;
        };

        let road = RoadContext::from_recording(recording, ch_meta.direction);
        let geometry = recording.meta.lane_geometry(ch_meta.direction);
        let (trigger_time_s, initial_gap) =
            resolve_trigger_timing(gap, ego_start.vx, ch_start.vx);

        scenarios.push(CutInScenario {
            road,
            ego: VehicleInfo::from_meta(ego_meta),
            challenger: VehicleInfo::from_meta(ch_meta),
            start_frame: event.start_frame,
            cross_frame: event.cross_frame,
            end_frame: event.end_frame,
            v_ego0: ego_start.vx,
            v_ch0: ch_start.vx,
            initial_distance: gap,
            trigger_distance: gap,
            relative_lane: event.source_lane_id - event.target_lane_id,
            initial_lane_offset: ch_start.lane_offset,
            cutin_distance: ch_end.x - ch_start.x,
            v_ch_final: ch_end.vx,
            final_lane_offset: ch_end.lane_offset,
            thw0,
            source_lane_id: event.source_lane_id,
            target_lane_id: event.target_lane_id,
            source_lane_center: geometry.lane_center(event.source_lane_id).unwrap_or(0.0),
            target_lane_center: geometry.lane_center(event.target_lane_id).unwrap_or(0.0),
            trigger_time_s,
            initial_gap,
        });
    }

    scenarios.sort_by(|a, b| {
        (a.start_frame, a.challenger.id).cmp(&(b.start_frame, b.challenger.id))
    });
    (scenarios, skips)
}

/// Builds swerve scenarios: one per concurrent same-lane follower (Lead)
/// and per adjacent-lane follower (Side) observed together with the
/// swerving vehicle for at least three seconds.
pub fn build_swerve_scenarios(
    recording: &Recording,
    events: &[SwerveEvent],
) -> (Vec<SwerveScenario>, SkipSummary) {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut scenarios = Vec::new();
    let mut skips = SkipSummary::default();
    let frame_rate = recording.meta.frame_rate;
    let min_overlap = (SWERVE_MIN_OVERLAP_S * frame_rate).round() as i64;

    for event in events {
        let Some(ch_track) = recording.track(event.vehicle_id) else {
            continue;
        };
        let ch_meta = recording.vehicle(event.vehicle_id).unwrap();

        for (ego_id, ego_track) in &recording.tracks {
            if *ego_id == event.vehicle_id {
                continue;
            }
            let Some(ego_meta) = recording.vehicle(*ego_id) else {
                continue;
            };
            if ego_meta.direction != ch_meta.direction {
                continue;
            }
            let start = event.start_frame.max(ego_track.first_frame());
            let end = event.end_frame.min(ego_track.last_frame());
            if end - start < min_overlap {
                if end > start {
                    skips.bump(SkipReason::OverlapTooShort);
                }
                continue;
            }

            let ego_start = ego_track.state_at(start).unwrap();
            let ch_start = ch_track.state_at(start).unwrap();
            let lane_delta = ch_start.lane_id - ego_start.lane_id;
            let relation = match lane_delta {
                0 => SwerveRelation::Lead,
                -1 | 1 => SwerveRelation::Side,
                _ => continue,
            };
            let ego_lane = ego_start.lane_id;
            let ego_holds_lane =
                (start..=end).all(|f| ego_track.state_at(f).map(|s| s.lane_id) == Some(ego_lane));
            if !ego_holds_lane {
                skips.bump(SkipReason::EgoLaneChanged);
                continue;
            }
            // Follower semantics: the ego stays behind throughout the
            // overlap.
            let behind_throughout = (start..=end).all(|f| {
                match (ego_track.state_at(f), ch_track.state_at(f)) {
                    (Some(e), Some(c)) => {
                        bumper_gap(c.x, ch_meta.length, e.x, ego_meta.length) > 0.0
                    }
                    _ => false,
                }
            });
            if !behind_throughout {
                skips.bump(SkipReason::NonPositiveGap);
                continue;
            }

            let geometry = recording.meta.lane_geometry(ch_meta.direction);
            scenarios.push(SwerveScenario {
                road: RoadContext::from_recording(recording, ch_meta.direction),
                ego: VehicleInfo::from_meta(ego_meta),
                challenger: VehicleInfo::from_meta(ch_meta),
                relation,
                start_frame: start,
                end_frame: end,
                lateral_range: event.lateral_range,
                max_lateral_acceleration: event.max_lateral_acceleration,
                v_ego0: ego_start.vx,
                v_ch0: ch_start.vx,
                initial_distance: bumper_gap(
                    ch_start.x,
                    ch_meta.length,
                    ego_start.x,
                    ego_meta.length,
                ),
                ego_lane_id: ego_lane,
                ego_lane_center: geometry.lane_center(ego_lane).unwrap_or(0.0),
                ch_lane_id: ch_start.lane_id,
                ch_lane_center: geometry.lane_center(ch_start.lane_id).unwrap_or(0.0),
                trigger_time_s: crate::models::DEFAULT_TRIGGER_TIME,
            });
        }
    }

    scenarios.sort_by(|a, b| {
        (a.start_frame, a.challenger.id, a.ego.id).cmp(&(b.start_frame, b.challenger.id, b.ego.id))
    });
    (scenarios, skips)
}

/// Keeps scenarios inside the ALKS operational design domain: ego velocity
/// at most the configured limit; brake scenarios must reach the minimum
/// peak deceleration; swerves must reach the minimum lateral range. Cut-in
/// scenarios face only the velocity criterion unless a headway ceiling is
/// configured.
///
/// The filter is idempotent and order-preserving; its output is a subset of
/// its input.
pub fn filter_odd(scenarios: &[ScenarioRecord], odd: &OddConfig) -> Vec<ScenarioRecord> {
    let v_max = kmh_to_ms(odd.max_ego_velocity_kmh);
    scenarios
        .iter()
        .filter(|record| {
            if record.v_ego0() > v_max {
                return false;
            }
            match record {
                ScenarioRecord::Brake(s) => s.peak_deceleration >= odd.min_peak_deceleration,
                ScenarioRecord::CutIn(s) => {
                    odd.max_cutin_thw.is_none_or(|ceiling| s.thw0 <= ceiling)
                }
                ScenarioRecord::Swerve(s) => s.lateral_range >= odd.min_swerve_range,
            }
        })
        .cloned()
        .collect()
}

/// Everything one extraction pass produces for a recording.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractionResult {
    pub scenarios: Vec<ScenarioRecord>,
    pub skips: SkipSummary,
    /// Lane transitions of two or more lanes within one frame.
    pub lane_change_anomalies: usize,
}

/// Runs all three detectors and scenario builders over one canonical
/// recording. Output is sorted in the canonical database order.
pub fn extract_all(
    recording: &Recording,
    config: &crate::detect::DetectionConfig,
) -> ExtractionResult {
    let lane_changes = crate::detect::detect_lane_changes(recording, config);
    let brake_events = crate::detect::detect_brake_maneuvers(recording, config);
    let swerve_events = crate::detect::detect_swerving(recording, config);

    let (brakes, brake_skips) = build_brake_scenarios(recording, &brake_events);
    let (cutins, cutin_skips) = build_cutin_scenarios(recording, &lane_changes.events);
    let (swerves, swerve_skips) = build_swerve_scenarios(recording, &swerve_events);

    let mut scenarios: Vec<ScenarioRecord> = Vec::new();
    scenarios.extend(brakes.into_iter().map(ScenarioRecord::Brake));
    scenarios.extend(cutins.into_iter().map(ScenarioRecord::CutIn));
    scenarios.extend(swerves.into_iter().map(ScenarioRecord::Swerve));
    scenarios.sort_by_key(|r| r.sort_key());

    let mut skips = brake_skips;
    skips.merge(&cutin_skips);
    skips.merge(&swerve_skips);

    ExtractionResult {
        scenarios,
        skips,
        lane_change_anomalies: lane_changes.anomalies.len(),
    }
}

/// Time headway: longitudinal gap divided by the follower's velocity.
pub fn compute_thw(gap: f64, ego_velocity: f64) -> Result<f64, ExtractError> {
    if !(ego_velocity > 0.0) {
        return Err(ExtractError::NonPositiveEgoVelocity {
            value: ego_velocity,
        });
    }
    Ok(gap / ego_velocity)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

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

    pub(crate) fn brake_record(v_ego0: f64, peak: f64) -> ScenarioRecord {
        ScenarioRecord::Brake(BrakeScenario {
            road: road(),
            ego: car(1),
            challenger: car(2),
            start_frame: 100,
            end_frame: 200,
            v_ego0,
            v_ch0: 18.0,
            initial_distance: 40.0,
            trigger_distance: 40.0,
            brake_duration: 4.0,
            v_ch_final: 13.0,
            peak_deceleration: peak,
            lane_id: 1,
            lane_center_y: 1.875,
            trigger_time_s: 5.0,
            initial_gap: 40.0 + 5.0 * (v_ego0 - 18.0),
        })
    }

    pub(crate) fn cutin_record(v_ego0: f64) -> ScenarioRecord {
        let gap = 25.0;
        ScenarioRecord::CutIn(CutInScenario {
            road: road(),
            ego: car(1),
            challenger: car(2),
            start_frame: 100,
            cross_frame: 150,
            end_frame: 200,
            v_ego0,
            v_ch0: 15.0,
            initial_distance: gap,
            trigger_distance: gap,
            relative_lane: 1,
            initial_lane_offset: 0.0,
            cutin_distance: 80.0,
            v_ch_final: 15.0,
            final_lane_offset: 0.0,
            thw0: gap / v_ego0,
            source_lane_id: 2,
            target_lane_id: 1,
            source_lane_center: 5.625,
            target_lane_center: 1.875,
            trigger_time_s: 5.0,
            initial_gap: gap + 5.0 * (v_ego0 - 15.0),
        })
    }

    pub(crate) fn swerve_record(v_ego0: f64, range: f64) -> ScenarioRecord {
        ScenarioRecord::Swerve(SwerveScenario {
            road: road(),
            ego: car(1),
            challenger: car(2),
            relation: SwerveRelation::Lead,
            start_frame: 0,
            end_frame: 250,
            lateral_range: range,
            max_lateral_acceleration: 1.0,
            v_ego0,
            v_ch0: v_ego0,
            initial_distance: 30.0,
            ego_lane_id: 1,
            ego_lane_center: 1.875,
            ch_lane_id: 1,
            ch_lane_center: 1.875,
            trigger_time_s: 5.0,
        })
    }

    #[test]
    fn thw_examples() {
        assert_relative_eq!(compute_thw(30.0, 15.0).unwrap(), 2.0);
        assert_relative_eq!(compute_thw(0.0, 15.0).unwrap(), 0.0);
        assert_relative_eq!(compute_thw(27.8, 13.9).unwrap(), 2.0);
        assert!(compute_thw(10.0, 0.0).is_err());
        assert!(compute_thw(10.0, -1.0).is_err());
    }

    #[test]
    fn odd_filter_examples() {
        let odd = OddConfig::default();
        // 68.4 km/h ego with 2.5 m/s² peak is kept.
        let kept = filter_odd(&[brake_record(19.0, 2.5)], &odd);
        assert_eq!(kept.len(), 1);
        // 72 km/h cut-in is dropped.
        assert!(filter_odd(&[cutin_record(20.0)], &odd).is_empty());
        // 1.9 m/s² peak is dropped.
        assert!(filter_odd(&[brake_record(19.0, 1.9)], &odd).is_empty());
    }

    #[test]
    fn odd_filter_is_idempotent_and_subsetting() {
        let db = vec![
            brake_record(19.0, 2.5),
            brake_record(21.0, 2.5),
            cutin_record(18.0),
            swerve_record(15.0, 1.3),
            swerve_record(15.0, 1.1),
        ];
        let odd = OddConfig::default();
        let once = filter_odd(&db, &odd);
        let twice = filter_odd(&once, &odd);
        assert_eq!(once, twice);
        assert_eq!(once.len(), 3);
        // Order preserved.
        assert_eq!(once[0], db[0]);
        assert_eq!(once[1], db[2]);
        assert_eq!(once[2], db[3]);
    }

    #[test]
    fn optional_thw_ceiling() {
        let odd = OddConfig {
            max_cutin_thw: Some(1.0),
            ..OddConfig::default()
        };
        // thw0 = 25 / 18 ≈ 1.39 s exceeds the ceiling.
        assert!(filter_odd(&[cutin_record(18.0)], &odd).is_empty());
        let odd = OddConfig {
            max_cutin_thw: Some(2.0),
            ..OddConfig::default()
        };
        assert_eq!(filter_odd(&[cutin_record(18.0)], &odd).len(), 1);
    }
}
