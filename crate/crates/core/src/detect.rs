//! Primitive event detection on canonical tracks: lane changes, brake
//! maneuvers and lateral swerving, scanned from the point of view of every
//! vehicle.
//!
//! Detection works on the recorded velocity and acceleration channels
//! directly instead of re-differentiating positions, so no additional
//! smoothing decisions are introduced here.

use serde::{Deserialize, Serialize};

use crate::highd::{CoordinateFrame, Recording, Track};

/// Thresholds steering the three detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// A deceleration interval must reach this magnitude (m/s²) at least
    /// once to count as a deliberate brake maneuver rather than a regular
    /// velocity adjustment.
    pub brake_peak_threshold: f64,
    /// Hysteresis bound (m/s²) locating the extent of a brake maneuver
    /// around its supra-threshold core.
    pub brake_edge_threshold: f64,
    /// Lateral velocity (m/s) below which a vehicle counts as laterally
    /// settled when locating lane-change bounds.
    pub lc_lateral_velocity_threshold: f64,
    /// Minimum lateral variation range (m) for swerve events.
    pub swerve_range_threshold: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            brake_peak_threshold: 2.0,
            brake_edge_threshold: 0.2,
            lc_lateral_velocity_threshold: 0.2,
            swerve_range_threshold: 1.2,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("brake_peak_threshold", self.brake_peak_threshold),
            ("brake_edge_threshold", self.brake_edge_threshold),
            (
                "lc_lateral_velocity_threshold",
                self.lc_lateral_velocity_threshold,
            ),
            ("swerve_range_threshold", self.swerve_range_threshold),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(format!("{name} must be positive, got {v}"));
        }
        if self.brake_edge_threshold >= self.brake_peak_threshold {
            return Err(format!(
                "edge threshold {} must be below peak threshold {}",
                self.brake_edge_threshold, self.brake_peak_threshold
            ));
        }
        Ok(())
    }
}

/// Deceleration magnitude below which a vehicle counts as longitudinally
/// settled. Event bounds are walked outward from the edge-threshold
/// interval to these rest points so the sampled start/end velocities sit on
/// the constant-speed phases surrounding the maneuver.
const BRAKE_REST_EPS: f64 = 0.02;

/// Lateral velocity magnitude treated as "no lateral motion" when refining
/// lane-change bounds to the actual onset of motion.
const LATERAL_REST_EPS: f64 = 0.01;

/// A completed single-lane change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChangeEvent {
    pub vehicle_id: u64,
    /// Onset of lateral motion toward the target lane.
    pub start_frame: i64,
    /// First frame with the target lane id.
    pub cross_frame: i64,
    /// Lateral motion settled in the target lane.
    pub end_frame: i64,
    pub source_lane_id: i32,
    pub target_lane_id: i32,
}

/// A lane-id transition that cannot be a physical single-lane change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChangeAnomaly {
    pub vehicle_id: u64,
    pub frame: i64,
    pub from_lane: i32,
    pub to_lane: i32,
}

/// Lane-change scan result: events plus transitions rejected as anomalies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaneChangeScan {
    pub events: Vec<LaneChangeEvent>,
    pub anomalies: Vec<LaneChangeAnomaly>,
}

/// A deceleration maneuver exceeding the peak threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakeEvent {
    pub vehicle_id: u64,
    pub start_frame: i64,
    pub end_frame: i64,
    /// Maximum of -ax over the event, m/s² (positive magnitude).
    pub peak_deceleration: f64,
    pub v_start: f64,
    pub v_end: f64,
}

/// Sustained lateral oscillation within one lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwerveEvent {
    pub vehicle_id: u64,
    pub start_frame: i64,
    pub end_frame: i64,
    /// max(y) - min(y) over the event, m.
    pub lateral_range: f64,
    pub max_lateral_acceleration: f64,
}

/// Detects single-lane changes for every vehicle.
///
/// The crossing frame is the first frame carrying the target lane id. The
/// start is found by walking backward through frames still moving toward
/// the target until the lateral velocity settles; the end symmetrically
/// forward. Transitions of two or more lanes within one frame are
/// reported as anomalies.
pub fn detect_lane_changes(recording: &Recording, config: &DetectionConfig) -> LaneChangeScan {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut scan = LaneChangeScan::default();
    for track in recording.tracks.values() {
        scan_track_lane_changes(track, config, &mut scan);
    }
    scan.events
        .sort_by_key(|e| (e.vehicle_id, e.start_frame, e.cross_frame));
    scan.anomalies.sort_by_key(|a| (a.vehicle_id, a.frame));
    scan
}

fn scan_track_lane_changes(track: &Track, config: &DetectionConfig, scan: &mut LaneChangeScan) {
    let states = &track.states;
    let mut events: Vec<LaneChangeEvent> = Vec::new();

    for i in 1..states.len() {
        let source = states[i - 1].lane_id;
        let target = states[i].lane_id;
        if source == target {
            continue;
        }
        if (target - source).abs() >= 2 {
            scan.anomalies.push(LaneChangeAnomaly {
                vehicle_id: track.vehicle_id,
                frame: states[i].frame,
                from_lane: source,
                to_lane: target,
            });
            continue;
        }
        let dir = f64::from(target - source);

        // Walk back from the last source-lane frame to the onset of
        // lateral motion.
        let mut k = i - 1;
        while k > 0 {
            let prev = &states[k - 1];
            if prev.lane_id != source {
                break;
            }
            if prev.vy * dir <= LATERAL_REST_EPS {
                k -= 1; // include the rest frame itself
                break;
            }
            k -= 1;
        }
        let start_idx = k;

        // Walk forward from the crossing frame until motion settles or the
        // vehicle leaves the target lane again.
        let mut k = i;
        while k + 1 < states.len() {
            let next = &states[k + 1];
            if next.lane_id != target {
                break;
            }
            if next.vy * dir <= LATERAL_REST_EPS {
                k += 1;
                break;
            }
            k += 1;
        }
        let end_idx = k;

        // A transition whose neighborhood never reaches the lateral
        // velocity threshold is a boundary-hugging jitter crossing, not a
        // lane change.
        let significant = states[start_idx..=end_idx]
            .iter()
            .any(|s| s.vy * dir >= config.lc_lateral_velocity_threshold);
        if !significant {
            continue;
        }

        events.push(LaneChangeEvent {
            vehicle_id: track.vehicle_id,
            start_frame: states[start_idx].frame,
            cross_frame: states[i].frame,
            end_frame: states[end_idx].frame,
            source_lane_id: source,
            target_lane_id: target,
        });
    }

    // Continuous multi-lane sweeps make adjacent walks overlap; clip them
    // at the frame of minimal lateral speed between the two crossings.
    for i in 1..events.len() {
        if events[i].start_frame < events[i - 1].end_frame {
            let lo = events[i - 1].cross_frame;
            let hi = events[i].cross_frame;
            let separator = min_abs_vy_frame(track, lo, hi).clamp(lo, hi - 1);
            events[i - 1].end_frame = separator;
            events[i].start_frame = separator;
        }
    }

    scan.events.extend(events);
}

fn min_abs_vy_frame(track: &Track, lo: i64, hi: i64) -> i64 {
    let mut best = lo;
    let mut best_vy = f64::MAX;
    for frame in lo..=hi {
        if let Some(s) = track.state_at(frame) {
            if s.vy.abs() < best_vy {
                best_vy = s.vy.abs();
                best = frame;
            }
        }
    }
    best
}

/// Detects brake maneuvers: maximal intervals with `ax <= -edge` containing
/// at least one sample with `ax <= -peak`, with bounds walked outward to
/// the surrounding longitudinal rest points.
pub fn detect_brake_maneuvers(recording: &Recording, config: &DetectionConfig) -> Vec<BrakeEvent> {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut events = Vec::new();
    for track in recording.tracks.values() {
        scan_track_brakes(track, config, &mut events);
    }
    events.sort_by(|a, b| {
        (a.vehicle_id, a.start_frame)
            .partial_cmp(&(b.vehicle_id, b.start_frame))
            .unwrap()
    });
    events
}

fn scan_track_brakes(track: &Track, config: &DetectionConfig, events: &mut Vec<BrakeEvent>) {
    let states = &track.states;
    let n = states.len();
    let mut spans: Vec<(usize, usize)> = Vec::new();

    let mut i = 0;
    while i < n {
        if states[i].ax > -config.brake_edge_threshold {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && states[i].ax <= -config.brake_edge_threshold {
            i += 1;
        }
        let run_end = i - 1;

        let has_peak = states[run_start..=run_end]
            .iter()
            .any(|s| s.ax <= -config.brake_peak_threshold);
        if !has_peak {
            continue;
        }

        // Expand to the rest points bracketing the whole deceleration.
        let mut lo = run_start;
        while lo > 0 && states[lo - 1].ax < -BRAKE_REST_EPS {
            lo -= 1;
        }
        lo = lo.saturating_sub(1);
        let mut hi = run_end;
        while hi + 1 < n && states[hi + 1].ax < -BRAKE_REST_EPS {
            hi += 1;
        }
        if hi + 1 < n {
            hi += 1;
        }

        // A rest bracket may touch the previous event; treat that as one
        // maneuver with an intermediate lull.
        if let Some(last) = spans.last_mut() {
            if lo <= last.1 {
                last.1 = hi;
                continue;
            }
        }
        spans.push((lo, hi));
    }

    for (lo, hi) in spans {
        let peak = states[lo..=hi]
            .iter()
            .map(|s| -s.ax)
            .fold(f64::MIN, f64::max);
        events.push(BrakeEvent {
            vehicle_id: track.vehicle_id,
            start_frame: states[lo].frame,
            end_frame: states[hi].frame,
            peak_deceleration: peak,
            v_start: states[lo].vx,
            v_end: states[hi].vx,
        });
    }
}

/// Detects swerving: tracks that keep one lane for their whole visible
/// extent while the lateral position spans at least the configured range.
///
/// Swerves are of long-term nature and may be visible only partially, so
/// the reported range is a lower bound on the true range.
pub fn detect_swerving(recording: &Recording, config: &DetectionConfig) -> Vec<SwerveEvent> {
    debug_assert_eq!(recording.frame, CoordinateFrame::Canonical);
    let mut events = Vec::new();
    for track in recording.tracks.values() {
        let states = &track.states;
        if states.is_empty() {
            continue;
        }
        let lane = states[0].lane_id;
        if states.iter().any(|s| s.lane_id != lane) {
            continue;
        }
        let (mut y_min, mut y_max, mut ay_max) = (f64::MAX, f64::MIN, 0.0f64);
        for s in states {
            y_min = y_min.min(s.y);
            y_max = y_max.max(s.y);
            ay_max = ay_max.max(s.ay.abs());
        }
        let range = y_max - y_min;
        if range >= config.swerve_range_threshold {
            events.push(SwerveEvent {
                vehicle_id: track.vehicle_id,
                start_frame: states[0].frame,
                end_frame: states[states.len() - 1].frame,
                lateral_range: range,
                max_lateral_acceleration: ay_max,
            });
        }
    }
    events.sort_by_key(|e| (e.vehicle_id, e.start_frame));
    events
}
