//! Transformation of raw image-plane recordings into the canonical
//! per-direction driving frame.

use std::fmt;

use crate::highd::{CoordinateFrame, DrivingDirection, Recording, Track};

/// Tracks excluded during canonicalization.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonWarning {
    /// The direction flag says one way, the x displacement says the other.
    DirectionContradiction {
        vehicle_id: u64,
        flagged: DrivingDirection,
        net_displacement: f64,
    },
    /// Track without vehicle metadata cannot be transformed.
    MissingVehicleMeta { vehicle_id: u64 },
}

impl fmt::Display for CanonWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonWarning::DirectionContradiction {
                vehicle_id,
                flagged,
                net_displacement,
            } => write!(
                f,
                "vehicle {vehicle_id}: direction flag {} contradicts net x displacement {net_displacement:.2} m; track excluded",
                flagged.flag()
            ),
            CanonWarning::MissingVehicleMeta { vehicle_id } => {
                write!(f, "vehicle {vehicle_id}: no metadata entry; track excluded")
            }
        }
    }
}

/// Rewrites every track into the canonical frame: x grows in the direction
/// of travel, y grows toward the driver's left, positions are bounding-box
/// centers, lane ids are per-direction with lane 1 the rightmost lane and
/// `lane_offset` is the signed distance from the assigned lane center.
///
/// Calling this on an already canonical recording returns it unchanged, so
/// the operation is idempotent. Tracks whose direction flag contradicts
/// their net x displacement are excluded and reported.
pub fn canonicalize(recording: &Recording) -> (Recording, Vec<CanonWarning>) {
    if recording.frame == CoordinateFrame::Canonical {
        return (recording.clone(), Vec::new());
    }

    let meta = &recording.meta;
    let area = meta.measurement_area_length;
    let mut warnings = Vec::new();
    let mut tracks = std::collections::BTreeMap::new();

    for (id, track) in &recording.tracks {
        let Some(vehicle) = recording.vehicles.get(id) else {
            warnings.push(CanonWarning::MissingVehicleMeta { vehicle_id: *id });
            continue;
        };
        let direction = vehicle.direction;

        let net = track.states.last().map_or(0.0, |l| l.x)
            - track.states.first().map_or(0.0, |f| f.x);
        let consistent = match direction {
            DrivingDirection::Upper => net < 0.0,
            DrivingDirection::Lower => net > 0.0,
        };
        if !consistent {
            warnings.push(CanonWarning::DirectionContradiction {
                vehicle_id: *id,
                flagged: direction,
                net_displacement: net,
            });
            continue;
        }

        let geometry = meta.lane_geometry(direction);
        let markings = meta.markings(direction);
        let (y_base, y_sign) = match direction {
            DrivingDirection::Upper => (markings.first().copied().unwrap_or(0.0), 1.0),
            DrivingDirection::Lower => (markings.last().copied().unwrap_or(0.0), -1.0),
        };
        let half_len = vehicle.length / 2.0;
        let half_wid = vehicle.width / 2.0;

        let states = track
            .states
            .iter()
            .map(|s| {
                // highD stores the upper-left box corner; shift to the center
                // before mirroring.
                let xc = s.x + half_len;
                let yc = s.y + half_wid;
                let (x, vx, ax) = match direction {
                    DrivingDirection::Upper => (area - xc, -s.vx, -s.ax),
                    DrivingDirection::Lower => (xc, s.vx, s.ax),
                };
                let y = y_sign * (yc - y_base);
                let vy = y_sign * s.vy;
                let ay = y_sign * s.ay;
                let lane_id = geometry.assign_lane(y);
                let lane_offset = geometry.offset_from_center(lane_id, y).unwrap_or(0.0);
                crate::highd::KinematicState {
                    frame: s.frame,
                    x,
                    y,
                    vx,
                    vy,
                    ax,
                    ay,
                    lane_id,
                    lane_offset,
                    preceding_id: s.preceding_id,
                    following_id: s.following_id,
                    thw: s.thw,
                    dhw: s.dhw,
                }
            })
            .collect();

        tracks.insert(
            *id,
            Track {
                vehicle_id: *id,
                states,
            },
        );
    }

    (
        Recording {
            meta: recording.meta.clone(),
            vehicles: recording.vehicles.clone(),
            tracks,
            frame: CoordinateFrame::Canonical,
        },
        warnings,
    )
}
