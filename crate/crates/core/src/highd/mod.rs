//! highD-format trajectory ingestion.
//!
//! A highD recording is a triple of CSV files (recording meta, track meta,
//! tracks) produced by drone-based highway observation. Positions in the raw
//! files live in an image-plane frame: x grows to the right, y grows
//! downward, and both carriageways share one frame. [`load_recording`] reads
//! the files verbatim; [`canonicalize`] rotates every track into a
//! per-carriageway frame where x grows in the direction of travel, y grows
//! toward the driver's left and lane 1 is the rightmost lane. All downstream
//! analysis expects the canonical frame.

mod canonical;
mod load;

pub use canonical::{canonicalize, CanonWarning};
pub use load::{discover_recordings, load_recording, IngestWarning, RecordingPaths};

use serde::{Deserialize, Serialize};

use crate::error::IngestError;

/// Which coordinate convention the states of a [`Recording`] are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateFrame {
    /// As stored on disk: image plane, y down, positions are the upper-left
    /// corner of the bounding box, both directions mixed.
    RawImage,
    /// Per-direction driving frame: x forward, y toward the driver's left,
    /// positions are bounding-box centers, lane 1 is the rightmost lane.
    Canonical,
}

/// Travel direction of a vehicle within the recorded road segment.
///
/// highD encodes the upper carriageway (driving toward decreasing image x)
/// as 1 and the lower carriageway (increasing image x) as 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrivingDirection {
    Upper,
    Lower,
}

impl DrivingDirection {
    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            1 => Some(DrivingDirection::Upper),
            2 => Some(DrivingDirection::Lower),
            _ => None,
        }
    }

    pub fn flag(self) -> u8 {
        match self {
            DrivingDirection::Upper => 1,
            DrivingDirection::Lower => 2,
        }
    }
}

/// Vehicle classification as labelled by the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    Car,
    Truck,
}

impl VehicleClass {
    pub fn label(self) -> &'static str {
        match self {
            VehicleClass::Car => "Car",
            VehicleClass::Truck => "Truck",
        }
    }
}

/// Per-recording metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingMeta {
    pub recording_id: u32,
    /// Sampling rate of the track files in Hz.
    pub frame_rate: f64,
    /// Lateral positions (m, image frame, increasing) of the lane markings
    /// bounding the upper carriageway.
    pub upper_lane_markings: Vec<f64>,
    /// Same for the lower carriageway.
    pub lower_lane_markings: Vec<f64>,
    /// Longitudinal extent of the observed road segment in meters.
    pub measurement_area_length: f64,
    /// Posted speed limit in m/s, when the recording site has one.
    pub speed_limit: Option<f64>,
}

impl RecordingMeta {
    /// Validates the type invariants, returning a human-readable complaint.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.frame_rate > 0.0) {
            return Err(format!("frame rate must be positive, got {}", self.frame_rate));
        }
        if !(self.measurement_area_length > 0.0) {
            return Err(format!(
                "measurement area length must be positive, got {}",
                self.measurement_area_length
            ));
        }
        for (name, markings) in [
            ("upperLaneMarkings", &self.upper_lane_markings),
            ("lowerLaneMarkings", &self.lower_lane_markings),
        ] {
            if markings.windows(2).any(|w| w[1] <= w[0]) {
                return Err(format!("{name} must be strictly increasing: {markings:?}"));
            }
        }
        Ok(())
    }

    /// Marking list for one carriageway, in image coordinates.
    pub fn markings(&self, direction: DrivingDirection) -> &[f64] {
        match direction {
            DrivingDirection::Upper => &self.upper_lane_markings,
            DrivingDirection::Lower => &self.lower_lane_markings,
        }
    }

    /// Lane geometry of one carriageway in the canonical frame.
    pub fn lane_geometry(&self, direction: DrivingDirection) -> LaneGeometry {
        LaneGeometry::from_markings(self.markings(direction), direction)
    }
}

/// Static per-vehicle metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleMeta {
    pub vehicle_id: u64,
    pub class: VehicleClass,
    /// Bounding-box length along the direction of travel, m.
    pub length: f64,
    /// Bounding-box width, m.
    pub width: f64,
    pub direction: DrivingDirection,
}

/// One sampled kinematic state of a vehicle.
///
/// In the canonical frame, `x`/`y` are the bounding-box center, `vx >= 0`,
/// and `lane_offset` is the signed distance from the assigned lane center
/// (positive toward the driver's left).
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicState {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub lane_id: i32,
    pub lane_offset: f64,
    pub preceding_id: Option<u64>,
    pub following_id: Option<u64>,
    /// Time headway to the preceding vehicle, s.
    pub thw: Option<f64>,
    /// Distance headway (bumper gap) to the preceding vehicle, m.
    pub dhw: Option<f64>,
}

/// A single vehicle's contiguous frame-indexed state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub vehicle_id: u64,
    pub states: Vec<KinematicState>,
}

impl Track {
    pub fn first_frame(&self) -> i64 {
        self.states.first().map_or(0, |s| s.frame)
    }

    pub fn last_frame(&self) -> i64 {
        self.states.last().map_or(0, |s| s.frame)
    }

    pub fn contains_frame(&self, frame: i64) -> bool {
        frame >= self.first_frame() && frame <= self.last_frame()
    }

    /// Returns the stored state at `frame`. Frames are the native sampling
    /// grid; no interpolation happens here.
    pub fn state_at(&self, frame: i64) -> Option<&KinematicState> {
        if !self.contains_frame(frame) {
            return None;
        }
        let idx = (frame - self.first_frame()) as usize;
        self.states.get(idx)
    }

    /// True if the whole closed frame interval is covered by this track.
    pub fn covers(&self, start: i64, end: i64) -> bool {
        self.contains_frame(start) && self.contains_frame(end)
    }
}

/// A fully loaded drone recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub meta: RecordingMeta,
    pub vehicles: std::collections::BTreeMap<u64, VehicleMeta>,
    pub tracks: std::collections::BTreeMap<u64, Track>,
    pub frame: CoordinateFrame,
}

impl Recording {
    pub fn vehicle(&self, id: u64) -> Option<&VehicleMeta> {
        self.vehicles.get(&id)
    }

    pub fn track(&self, id: u64) -> Option<&Track> {
        self.tracks.get(&id)
    }
}

/// Lane layout of one carriageway in the canonical frame.
///
/// `offsets[0] == 0` is the driver's rightmost marking; offsets ascend to
/// the left. Lane ids are 1-based with lane 1 the rightmost lane.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneGeometry {
    offsets: Vec<f64>,
}

impl LaneGeometry {
    fn from_markings(markings: &[f64], direction: DrivingDirection) -> Self {
        let offsets = match direction {
            // Upper carriageway: smallest image y is the outer (right) edge.
            DrivingDirection::Upper => {
                let base = markings.first().copied().unwrap_or(0.0);
                markings.iter().map(|m| m - base).collect()
            }
            // Lower carriageway: largest image y is the outer (right) edge.
            DrivingDirection::Lower => {
                let base = markings.last().copied().unwrap_or(0.0);
                markings.iter().rev().map(|m| base - m).collect()
            }
        };
        LaneGeometry { offsets }
    }

    pub fn lane_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Canonical lateral offsets of the markings, ascending from 0.
    pub fn marking_offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Right and left bound of a lane, canonical frame.
    pub fn lane_bounds(&self, lane_id: i32) -> Option<(f64, f64)> {
        if lane_id < 1 || lane_id as usize > self.lane_count() {
            return None;
        }
        let i = (lane_id - 1) as usize;
        Some((self.offsets[i], self.offsets[i + 1]))
    }

    pub fn lane_center(&self, lane_id: i32) -> Option<f64> {
        self.lane_bounds(lane_id).map(|(lo, hi)| 0.5 * (lo + hi))
    }

    pub fn lane_width(&self, lane_id: i32) -> Option<f64> {
        self.lane_bounds(lane_id).map(|(lo, hi)| hi - lo)
    }

    /// Lane containing the lateral position `y`, clamped to the outermost
    /// lanes for positions beyond the carriageway edge.
    pub fn assign_lane(&self, y: f64) -> i32 {
        let n = self.lane_count();
        if n == 0 {
            return 1;
        }
        for lane in 1..=n {
            if y < self.offsets[lane] {
                return lane as i32;
            }
        }
        n as i32
    }

    /// Signed offset of `y` from the center of `lane_id`, positive left.
    pub fn offset_from_center(&self, lane_id: i32, y: f64) -> Option<f64> {
        self.lane_center(lane_id).map(|c| y - c)
    }
}

/// Maps the result of [`RecordingMeta::validate`] onto an ingest error.
pub(crate) fn meta_error(path: &std::path::Path, detail: String) -> IngestError {
    IngestError::BadRecordingMeta {
        path: path.to_path_buf(),
        detail,
    }
}
