//! Synthesis of a minimal straight OpenDRIVE 1.4 road matching a
//! recording's lane layout.
//!
//! The geometric content relevant to the extracted scenarios is lane count
//! and lane width only, so the road is generated parametrically: one
//! straight road, right-hand traffic, lane widths taken from consecutive
//! lane-marking distances.

use crate::error::ExportError;
use crate::export::xml::{serialize, XmlElement};
use crate::export::HEADER_DATE;
use crate::extract::RoadContext;
use crate::highd::{DrivingDirection, RecordingMeta};
use crate::units::fmt_sig;

/// Exported road length in meters; long enough for five seconds of
/// initialization plus the longest extracted maneuver.
pub const ROAD_LENGTH: f64 = 1300.0;

/// Renders the road for one carriageway of a recording.
pub fn render_opendrive(
    meta: &RecordingMeta,
    direction: DrivingDirection,
) -> Result<String, ExportError> {
    let geometry = meta.lane_geometry(direction);
    render_road_from_markings(
        geometry.marking_offsets(),
        meta.speed_limit,
        meta.recording_id,
    )
}

/// Renders the road for the carriageway a scenario lives on.
pub fn render_road(road: &RoadContext) -> Result<String, ExportError> {
    render_road_from_markings(&road.lane_markings, road.speed_limit, road.recording_id)
}

fn render_road_from_markings(
    markings: &[f64],
    speed_limit: Option<f64>,
    recording_id: u32,
) -> Result<String, ExportError> {
    if markings.len() < 2 {
        return Err(ExportError::TooFewMarkings {
            count: markings.len(),
        });
    }
    let lane_count = markings.len() - 1;

    let header = XmlElement::new("header")
        .with_attr("revMajor", "1")
        .with_attr("revMinor", "4")
        .with_attr("name", format!("highway_rec{recording_id:02}"))
        .with_attr("version", "1.00")
        .with_attr("date", HEADER_DATE)
        .with_attr("north", "0")
        .with_attr("south", "0")
        .with_attr("east", "0")
        .with_attr("west", "0");

    let mut road_type = XmlElement::new("type")
        .with_attr("s", "0")
        .with_attr("type", "motorway");
    if let Some(limit) = speed_limit {
        road_type.children.push(
            XmlElement::new("speed")
                .with_attr("max", fmt_sig(limit))
                .with_attr("unit", "m/s"),
        );
    }

    let plan_view = XmlElement::new("planView").with_child(
        XmlElement::new("geometry")
            .with_attr("s", "0")
            .with_attr("x", "0")
            .with_attr("y", "0")
            .with_attr("hdg", "0")
            .with_attr("length", fmt_sig(ROAD_LENGTH))
            .with_child(XmlElement::new("line")),
    );

    let center_lane = XmlElement::new("lane")
        .with_attr("id", "0")
        .with_attr("type", "none")
        .with_attr("level", "false")
        .with_child(road_mark("solid"));

    let mut right = XmlElement::new("right");
    for osc_index in 1..=lane_count {
        // OpenDRIVE lane -1 borders the reference line and is the leftmost
        // driving lane; canonical lane 1 is the rightmost.
        let canonical_lane = lane_count + 1 - osc_index;
        let width = markings[canonical_lane] - markings[canonical_lane - 1];
        let mark = if osc_index == lane_count {
            road_mark("solid")
        } else {
            road_mark("broken")
        };
        right.children.push(
            XmlElement::new("lane")
                .with_attr("id", format!("-{osc_index}"))
                .with_attr("type", "driving")
                .with_attr("level", "false")
                .with_child(XmlElement::new("link"))
                .with_child(
                    XmlElement::new("width")
                        .with_attr("sOffset", "0")
                        .with_attr("a", fmt_sig(width))
                        .with_attr("b", "0")
                        .with_attr("c", "0")
                        .with_attr("d", "0"),
                )
                .with_child(mark),
        );
    }

    let lanes = XmlElement::new("lanes").with_child(
        XmlElement::new("laneSection")
            .with_attr("s", "0")
            .with_child(XmlElement::new("center").with_child(center_lane))
            .with_child(right),
    );

    let road = XmlElement::new("road")
        .with_attr("name", "highway")
        .with_attr("length", fmt_sig(ROAD_LENGTH))
        .with_attr("id", "1")
        .with_attr("junction", "-1")
        .with_child(road_type)
        .with_child(plan_view)
        .with_child(XmlElement::new("elevationProfile"))
        .with_child(XmlElement::new("lateralProfile"))
        .with_child(lanes);

    let doc = XmlElement::new("OpenDRIVE")
        .with_child(header)
        .with_child(road);
    Ok(serialize(&doc))
}

fn road_mark(kind: &str) -> XmlElement {
    XmlElement::new("roadMark")
        .with_attr("sOffset", "0")
        .with_attr("type", kind)
        .with_attr("weight", "standard")
        .with_attr("color", "standard")
        .with_attr("width", "0.12")
}
