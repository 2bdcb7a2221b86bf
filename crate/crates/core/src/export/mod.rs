//! Rendering of scenario records into OpenSCENARIO 1.0 documents with a
//! matching OpenDRIVE road and per-simulator tool adaptations.
//!
//! Each scenario type has one template file shipped in `templates/` with
//! named `{{...}}` placeholders. Rendering binds the placeholders, then
//! applies the tool profile as structured transformations on the parsed
//! document rather than keeping separate template forks per simulator.

mod opendrive;
pub mod xml;

pub use opendrive::{render_opendrive, render_road, ROAD_LENGTH};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::db::write_atomic;
use crate::error::ExportError;
use crate::extract::{BrakeScenario, CutInScenario, ScenarioRecord, SwerveScenario, VehicleInfo};
use crate::highd::VehicleClass;
use crate::units::{fmt_int, fmt_sig};
use xml::{parse, serialize, XmlElement};

const BRAKE_TEMPLATE: &str = include_str!("../../templates/brake.xosc.tmpl");
const CUTIN_TEMPLATE: &str = include_str!("../../templates/cutin.xosc.tmpl");
const SWERVE_TEMPLATE: &str = include_str!("../../templates/swerve.xosc.tmpl");

/// Fixed header date so repeated renders are byte-identical.
pub const HEADER_DATE: &str = "2021-03-01T12:00:00";
const AUTHOR: &str = "alks-scenarios";
/// Ego initialization position along the road.
const EGO_S_INIT: f64 = 50.0;
/// Trace/scenario continues this long after the maneuver completes.
const STOP_TAIL_S: f64 = 2.0;

/// Lane-change shape the target simulator supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneChangeShape {
    Sinusoidal,
    Linear,
}

/// How the lane-change target lane is referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetLaneReference {
    RelativeToEgo,
    RelativeToSelf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Generic,
    EsminiLike,
    CarlaLike,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Generic => "generic",
            ProfileKind::EsminiLike => "esmini",
            ProfileKind::CarlaLike => "carla",
        })
    }
}

/// Per-simulator export conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToolProfile {
    pub name: ProfileKind,
    /// Multiplier applied to relative lane ids in the document.
    pub relative_lane_sign: i32,
    pub lane_change_shape: LaneChangeShape,
    pub emit_role_attribute: bool,
    pub emit_environment_action: bool,
    pub target_lane_reference: TargetLaneReference,
}

impl ToolProfile {
    pub fn generic() -> Self {
        ToolProfile {
            name: ProfileKind::Generic,
            relative_lane_sign: 1,
            lane_change_shape: LaneChangeShape::Sinusoidal,
            emit_role_attribute: false,
            emit_environment_action: false,
            target_lane_reference: TargetLaneReference::RelativeToEgo,
        }
    }

    pub fn esmini_like() -> Self {
        ToolProfile {
            name: ProfileKind::EsminiLike,
            ..ToolProfile::generic()
        }
    }

    /// CARLA-era adaptations: inverted relative-lane interpretation, linear
    /// lane-change shape, lane targets relative to the actor itself, role
    /// properties on each actor and an environment description.
    pub fn carla_like() -> Self {
        ToolProfile {
            name: ProfileKind::CarlaLike,
            relative_lane_sign: -1,
            lane_change_shape: LaneChangeShape::Linear,
            emit_role_attribute: true,
            emit_environment_action: true,
            target_lane_reference: TargetLaneReference::RelativeToSelf,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "generic" => Some(ToolProfile::generic()),
            "esmini" => Some(ToolProfile::esmini_like()),
            "carla" => Some(ToolProfile::carla_like()),
            _ => None,
        }
    }
}

/// A rendered scenario: the OpenSCENARIO text, the matching road and the
/// bound Table-parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDocument {
    pub scenario_xml: String,
    pub road_xml: String,
    /// Scenario parameters by declaration name, canonically formatted.
    pub parameter_table: BTreeMap<String, String>,
}

fn category(class: VehicleClass) -> &'static str {
    match class {
        VehicleClass::Car => "car",
        VehicleClass::Truck => "truck",
    }
}

/// OpenDRIVE lane id of a canonical per-direction lane (1 = rightmost):
/// right-hand lanes count -1 (leftmost) to -N (rightmost).
fn osc_lane_id(lane_count: usize, canonical_lane: i32) -> i64 {
    -((lane_count as i64) + 1 - canonical_lane as i64)
}

fn trigger_rule(v_ego: f64, v_ch: f64) -> &'static str {
    // Closing gaps cross the trigger distance from above, opening gaps
    // from below.
    if v_ch > v_ego {
        "greaterThan"
    } else {
        "lessThan"
    }
}

struct Binding {
    values: BTreeMap<&'static str, String>,
    /// Table I/II parameter names exposed in the document table.
    table: Vec<(&'static str, String)>,
    /// Canonical relative lane for lane-change target adaptation.
    relative_lane: i32,
}

fn common_entity_values(
    values: &mut BTreeMap<&'static str, String>,
    ego: &VehicleInfo,
    challenger: &VehicleInfo,
) {
    values.insert("EGO_CATEGORY", category(ego.class).to_string());
    values.insert("EGO_LENGTH", fmt_sig(ego.length));
    values.insert("EGO_WIDTH", fmt_sig(ego.width));
    values.insert("CH_CATEGORY", category(challenger.class).to_string());
    values.insert("CH_LENGTH", fmt_sig(challenger.length));
    values.insert("CH_WIDTH", fmt_sig(challenger.width));
    values.insert("HEADER_DATE", HEADER_DATE.to_string());
    values.insert("AUTHOR", AUTHOR.to_string());
    values.insert("ROAD_FILE", "road.xodr".to_string());
    values.insert("EGO_S_INIT", fmt_sig(EGO_S_INIT));
}

fn brake_binding(s: &BrakeScenario) -> Binding {
    let mut values = BTreeMap::new();
    common_entity_values(&mut values, &s.ego, &s.challenger);
    let lane_count = s.road.lane_count();
    let ds = s.initial_gap + (s.ego.length + s.challenger.length) / 2.0;
    let stop_time = s.trigger_time_s + s.brake_duration + STOP_TAIL_S;

    let table = vec![
        ("EgoSpeedInit", fmt_sig(s.v_ego0)),
        ("ChallengerSpeedInit", fmt_sig(s.v_ch0)),
        ("InitialDistance", fmt_sig(s.initial_distance)),
        ("BrakeTriggerDistance", fmt_sig(s.trigger_distance)),
        ("BrakeDuration", fmt_sig(s.brake_duration)),
        ("ChallengerSpeedFinal", fmt_sig(s.v_ch_final)),
    ];

    values.insert(
        "DESCRIPTION",
        format!(
            "Lead vehicle brake scenario from recording {:02}, frame {}",
            s.road.recording_id, s.start_frame
        ),
    );
    values.insert("EGO_SPEED_INIT", fmt_sig(s.v_ego0));
    values.insert("CH_SPEED_INIT", fmt_sig(s.v_ch0));
    values.insert("INITIAL_DISTANCE", fmt_sig(s.initial_distance));
    values.insert("TRIGGER_DISTANCE", fmt_sig(s.trigger_distance));
    values.insert("BRAKE_DURATION", fmt_sig(s.brake_duration));
    values.insert("CH_SPEED_FINAL", fmt_sig(s.v_ch_final));
    values.insert("TRIGGER_TIME", fmt_sig(s.trigger_time_s));
    values.insert("INITIAL_GAP", fmt_sig(s.initial_gap));
    values.insert("CH_INIT_DS", fmt_sig(ds));
    values.insert("CH_INIT_DLANE", "0".to_string());
    values.insert("CH_INIT_OFFSET", "0.0".to_string());
    values.insert(
        "EGO_LANE_OSC",
        fmt_int(osc_lane_id(lane_count, s.lane_id)),
    );
    values.insert("TRIGGER_RULE", trigger_rule(s.v_ego0, s.v_ch0).to_string());
    values.insert("STOP_TIME", fmt_sig(stop_time));

    Binding {
        values,
        table,
        relative_lane: 0,
    }
}

fn cutin_binding(s: &CutInScenario) -> Binding {
    let mut values = BTreeMap::new();
    common_entity_values(&mut values, &s.ego, &s.challenger);
    let lane_count = s.road.lane_count();
    let ds = s.initial_gap + (s.ego.length + s.challenger.length) / 2.0;
    let speed_change_duration = 2.0 * s.cutin_distance / (s.v_ch0 + s.v_ch_final);
    let stop_time = s.trigger_time_s + speed_change_duration + STOP_TAIL_S;

    let table = vec![
        ("EgoSpeedInit", fmt_sig(s.v_ego0)),
        ("ChallengerSpeedInit", fmt_sig(s.v_ch0)),
        ("InitialDistance", fmt_sig(s.initial_distance)),
        ("RelativeLane", fmt_int(s.relative_lane as i64)),
        ("InitialLaneOffset", fmt_sig(s.initial_lane_offset)),
        ("CutInTriggerDistance", fmt_sig(s.trigger_distance)),
        ("CutInDistance", fmt_sig(s.cutin_distance)),
        ("ChallengerSpeedFinal", fmt_sig(s.v_ch_final)),
        ("FinalLaneOffset", fmt_sig(s.final_lane_offset)),
    ];

    values.insert(
        "DESCRIPTION",
        format!(
            "Cut-in scenario from recording {:02}, frame {}",
            s.road.recording_id, s.start_frame
        ),
    );
    values.insert("EGO_SPEED_INIT", fmt_sig(s.v_ego0));
    values.insert("CH_SPEED_INIT", fmt_sig(s.v_ch0));
    values.insert("INITIAL_DISTANCE", fmt_sig(s.initial_distance));
    values.insert("RELATIVE_LANE", fmt_int(s.relative_lane as i64));
    values.insert("INITIAL_LANE_OFFSET", fmt_sig(s.initial_lane_offset));
    values.insert("TRIGGER_DISTANCE", fmt_sig(s.trigger_distance));
    values.insert("CUTIN_DISTANCE", fmt_sig(s.cutin_distance));
    values.insert("CH_SPEED_FINAL", fmt_sig(s.v_ch_final));
    values.insert("FINAL_LANE_OFFSET", fmt_sig(s.final_lane_offset));
    values.insert("TRIGGER_TIME", fmt_sig(s.trigger_time_s));
    values.insert("INITIAL_GAP", fmt_sig(s.initial_gap));
    values.insert("SPEED_CHANGE_DURATION", fmt_sig(speed_change_duration));
    values.insert("CH_INIT_DS", fmt_sig(ds));
    values.insert("CH_INIT_DLANE", fmt_int(s.relative_lane as i64));
    values.insert("CH_INIT_OFFSET", fmt_sig(s.initial_lane_offset));
    values.insert(
        "EGO_LANE_OSC",
        fmt_int(osc_lane_id(lane_count, s.target_lane_id)),
    );
    values.insert("TRIGGER_RULE", trigger_rule(s.v_ego0, s.v_ch0).to_string());
    values.insert("STOP_TIME", fmt_sig(stop_time));

    Binding {
        values,
        table,
        relative_lane: s.relative_lane,
    }
}

fn swerve_binding(s: &SwerveScenario) -> Binding {
    let mut values = BTreeMap::new();
    common_entity_values(&mut values, &s.ego, &s.challenger);
    let lane_count = s.road.lane_count();
    let ds = s.initial_distance + (s.ego.length + s.challenger.length) / 2.0;
    let amplitude = s.lateral_range / 2.0;
    let omega = (s.max_lateral_acceleration / amplitude).sqrt();
    let stop_time = s.trigger_time_s + 4.0 * std::f64::consts::PI / omega + STOP_TAIL_S;
    let dlane = s.ch_lane_id - s.ego_lane_id;

    let table = vec![
        ("EgoSpeedInit", fmt_sig(s.v_ego0)),
        ("ChallengerSpeedInit", fmt_sig(s.v_ch0)),
        ("InitialDistance", fmt_sig(s.initial_distance)),
        ("SwerveRange", fmt_sig(s.lateral_range)),
        ("MaxLateralAccel", fmt_sig(s.max_lateral_acceleration)),
    ];

    values.insert(
        "DESCRIPTION",
        format!(
            "Swerving {} vehicle scenario from recording {:02}, frame {}",
            match s.relation {
                crate::extract::SwerveRelation::Lead => "lead",
                crate::extract::SwerveRelation::Side => "side",
            },
            s.road.recording_id,
            s.start_frame
        ),
    );
    values.insert("EGO_SPEED_INIT", fmt_sig(s.v_ego0));
    values.insert("CH_SPEED_INIT", fmt_sig(s.v_ch0));
    values.insert("INITIAL_DISTANCE", fmt_sig(s.initial_distance));
    values.insert("SWERVE_RANGE", fmt_sig(s.lateral_range));
    values.insert("MAX_LATERAL_ACCEL", fmt_sig(s.max_lateral_acceleration));
    values.insert("SWERVE_OFFSET", fmt_sig(amplitude));
    values.insert("SWERVE_OFFSET_NEG", fmt_sig(-amplitude));
    values.insert("TRIGGER_TIME", fmt_sig(s.trigger_time_s));
    values.insert("CH_INIT_DS", fmt_sig(ds));
    values.insert("CH_INIT_DLANE", fmt_int(dlane as i64));
    values.insert("CH_INIT_OFFSET", fmt_sig(-amplitude));
    values.insert(
        "EGO_LANE_OSC",
        fmt_int(osc_lane_id(lane_count, s.ego_lane_id)),
    );
    values.insert("STOP_TIME", fmt_sig(stop_time));

    Binding {
        values,
        table,
        relative_lane: dlane,
    }
}

/// Substitutes `{{NAME}}` placeholders; every placeholder must be bound and
/// every binding must be used.
fn bind_template(
    template: &str,
    values: &BTreeMap<&'static str, String>,
) -> Result<String, ExportError> {
    let mut out = String::with_capacity(template.len());
    let mut used: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let tail = &rest[start + 2..];
        let end = tail.find("}}").ok_or_else(|| ExportError::Xml {
            detail: "unterminated placeholder".to_string(),
        })?;
        let name = &tail[..end];
        let value = values
            .iter()
            .find(|(k, _)| **k == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| ExportError::UnboundPlaceholder {
                name: name.to_string(),
            })?;
        used.insert(values.keys().find(|k| **k == name).unwrap());
        out.push_str(&value);
        rest = &tail[end + 2..];
    }
    out.push_str(rest);
    for key in values.keys() {
        if !used.contains(key) {
            return Err(ExportError::UnknownPlaceholder {
                name: (*key).to_string(),
            });
        }
    }
    Ok(out)
}

/// Applies the tool-profile adaptations as structured edits on the
/// document tree.
fn apply_profile(root: &mut XmlElement, profile: &ToolProfile, relative_lane: i32) {
    if profile.lane_change_shape == LaneChangeShape::Linear {
        root.visit_mut(&mut |e| {
            if (e.name == "LaneChangeActionDynamics" || e.name == "LaneOffsetActionDynamics")
                && e.attr("dynamicsShape") == Some("sinusoidal")
            {
                e.set_attr("dynamicsShape", "linear");
            }
        });
    }
    if profile.relative_lane_sign < 0 {
        root.visit_mut(&mut |e| {
            if e.name == "RelativeLanePosition" {
                if let Some(v) = e.attr("dLane").and_then(|v| v.parse::<i64>().ok()) {
                    if v != 0 {
                        e.set_attr("dLane", fmt_int(-v));
                    }
                }
            }
        });
    }
    if profile.target_lane_reference == TargetLaneReference::RelativeToSelf {
        // The challenger addresses its own lane; with the inverted lane
        // interpretation the move toward the ego reads as the canonical
        // relative lane itself.
        let own_move = relative_lane * (-profile.relative_lane_sign);
        root.visit_mut(&mut |e| {
            if e.name == "RelativeTargetLane" {
                e.set_attr("entityRef", "Challenger");
                e.set_attr("value", fmt_int(own_move as i64));
            }
        });
    }
    if profile.emit_role_attribute {
        let mut is_ego = true;
        root.visit_mut(&mut |e| {
            if e.name == "Vehicle" {
                let role = if is_ego { "ego" } else { "adversary" };
                is_ego = false;
                if let Some(props) = e.child_mut("Properties") {
                    props.children.push(
                        XmlElement::new("Property")
                            .with_attr("name", "role")
                            .with_attr("value", role),
                    );
                }
            }
        });
    }
    if profile.emit_environment_action {
        if let Some(actions) = root
            .child_mut("Storyboard")
            .and_then(|s| s.child_mut("Init"))
            .and_then(|i| i.child_mut("Actions"))
        {
            actions.children.insert(0, environment_action());
        }
    }
}

fn environment_action() -> XmlElement {
    XmlElement::new("GlobalAction").with_child(
        XmlElement::new("EnvironmentAction").with_child(
            XmlElement::new("Environment")
                .with_attr("name", "DefaultEnvironment")
                .with_child(
                    XmlElement::new("TimeOfDay")
                        .with_attr("animation", "false")
                        .with_attr("dateTime", HEADER_DATE),
                )
                .with_child(
                    XmlElement::new("Weather")
                        .with_attr("cloudState", "free")
                        .with_child(
                            XmlElement::new("Sun")
                                .with_attr("intensity", "0.85")
                                .with_attr("azimuth", "0.0")
                                .with_attr("elevation", "1.31"),
                        )
                        .with_child(XmlElement::new("Fog").with_attr("visualRange", "100000.0"))
                        .with_child(
                            XmlElement::new("Precipitation")
                                .with_attr("precipitationType", "dry")
                                .with_attr("intensity", "0.0"),
                        ),
                )
                .with_child(
                    XmlElement::new("RoadCondition").with_attr("frictionScale", "1.0"),
                ),
        ),
    )
}

/// Renders a scenario record under a tool profile into an OpenSCENARIO
/// document plus the matching road.
pub fn render_openscenario(
    scenario: &ScenarioRecord,
    profile: &ToolProfile,
) -> Result<ScenarioDocument, ExportError> {
    let (template, binding) = match scenario {
        ScenarioRecord::Brake(s) => (BRAKE_TEMPLATE, brake_binding(s)),
        ScenarioRecord::CutIn(s) => (CUTIN_TEMPLATE, cutin_binding(s)),
        ScenarioRecord::Swerve(s) => (SWERVE_TEMPLATE, swerve_binding(s)),
    };
    let bound = bind_template(template, &binding.values)?;
    let mut root = parse(&bound)?;
    apply_profile(&mut root, profile, binding.relative_lane);
    let scenario_xml = serialize(&root);
    let road_xml = render_road(scenario.road())?;

    Ok(ScenarioDocument {
        scenario_xml,
        road_xml,
        parameter_table: binding
            .table
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    })
}

/// A single validation finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    NotWellFormed,
    MissingElement,
    UnresolvedParameter,
    BadNumericAttribute,
}

/// Element/attribute pairs whose values must parse as numbers once
/// parameter references are resolved.
const NUMERIC_ATTRS: &[(&str, &[&str])] = &[
    ("Center", &["x", "y", "z"]),
    ("Dimensions", &["width", "length", "height"]),
    ("Performance", &["maxSpeed", "maxAcceleration", "maxDeceleration"]),
    ("FrontAxle", &["maxSteering", "wheelDiameter", "trackWidth", "positionX", "positionZ"]),
    ("RearAxle", &["maxSteering", "wheelDiameter", "trackWidth", "positionX", "positionZ"]),
    ("LanePosition", &["s", "offset", "laneId"]),
    ("RelativeLanePosition", &["ds", "offset", "dLane"]),
    ("AbsoluteTargetSpeed", &["value"]),
    ("SpeedActionDynamics", &["value"]),
    ("LaneChangeActionDynamics", &["value"]),
    ("LaneOffsetActionDynamics", &["maxLateralAcc"]),
    ("AbsoluteTargetLaneOffset", &["value"]),
    ("RelativeTargetLane", &["value"]),
    ("RelativeDistanceCondition", &["value"]),
    ("SimulationTimeCondition", &["value"]),
    ("Condition", &["delay"]),
];

/// Structural validation of a rendered document: well-formed XML, required
/// elements present, every `$parameter` reference resolvable and numeric
/// attributes parseable. An empty findings list means the document passed.
pub fn validate_document(doc: &ScenarioDocument) -> Vec<Finding> {
    let mut findings = Vec::new();

    let root = match parse(&doc.scenario_xml) {
        Ok(root) => root,
        Err(e) => {
            findings.push(Finding {
                kind: FindingKind::NotWellFormed,
                detail: e.to_string(),
            });
            return findings;
        }
    };
    if let Err(e) = parse(&doc.road_xml) {
        findings.push(Finding {
            kind: FindingKind::NotWellFormed,
            detail: format!("road: {e}"),
        });
    }

    for required in ["FileHeader", "ParameterDeclarations", "Entities", "Storyboard"] {
        if root.child(required).is_none() {
            findings.push(Finding {
                kind: FindingKind::MissingElement,
                detail: format!("missing <{required}>"),
            });
        }
    }
    if root.descendant("Act").is_none() {
        findings.push(Finding {
            kind: FindingKind::MissingElement,
            detail: "storyboard has no <Act>".to_string(),
        });
    }

    // Collect declared parameters, then check references and numeric
    // attributes.
    let mut declared: BTreeMap<String, String> = BTreeMap::new();
    if let Some(decls) = root.child("ParameterDeclarations") {
        for d in &decls.children {
            if d.name == "ParameterDeclaration" {
                if let (Some(name), Some(value)) = (d.attr("name"), d.attr("value")) {
                    declared.insert(name.to_string(), value.to_string());
                    let ok = match d.attr("parameterType") {
                        Some("double") => value.parse::<f64>().is_ok(),
                        Some("integer") => value.parse::<i64>().is_ok(),
                        _ => true,
                    };
                    if !ok {
                        findings.push(Finding {
                            kind: FindingKind::BadNumericAttribute,
                            detail: format!("parameter {name} value `{value}` does not parse"),
                        });
                    }
                }
            }
        }
    }

    root.visit(&mut |e| {
        for (attr_name, value) in &e.attrs {
            let resolved = if let Some(param) = value.strip_prefix('$') {
                match declared.get(param) {
                    Some(v) => v.clone(),
                    None => {
                        findings.push(Finding {
                            kind: FindingKind::UnresolvedParameter,
                            detail: format!(
                                "<{}> references undeclared parameter ${param}",
                                e.name
                            ),
                        });
                        continue;
                    }
                }
            } else {
                value.clone()
            };
            let numeric = NUMERIC_ATTRS
                .iter()
                .any(|(el, attrs)| *el == e.name && attrs.contains(&attr_name.as_str()));
            if numeric && resolved.parse::<f64>().is_err() {
                findings.push(Finding {
                    kind: FindingKind::BadNumericAttribute,
                    detail: format!("<{}> {attr_name}=\"{resolved}\" is not numeric", e.name),
                });
            }
        }
    });

    findings
}

/// Sidecar metadata stored next to each exported scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMetadata {
    pub recording_id: u32,
    pub scenario_type: crate::extract::ScenarioKind,
    pub ego_id: u64,
    pub challenger_id: u64,
    pub start_frame: i64,
    pub profile: ProfileKind,
    pub scenario_file: String,
    pub road_file: String,
}

/// Renders one scenario and writes `scenario.xosc`, `road.xodr` and
/// `metadata.json` into a directory named after the scenario label.
/// File writes are atomic. Returns the scenario directory.
pub fn export_scenario_dir(
    scenario: &ScenarioRecord,
    profile: &ToolProfile,
    out_dir: &Path,
) -> Result<PathBuf, ExportError> {
    let doc = render_openscenario(scenario, profile)?;
    let dir = out_dir.join(scenario.label());
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| ExportError::Io { path, source }
    };
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;

    let scenario_path = dir.join("scenario.xosc");
    let road_path = dir.join("road.xodr");
    let metadata_path = dir.join("metadata.json");

    write_atomic(&scenario_path, doc.scenario_xml.as_bytes()).map_err(io_err(&scenario_path))?;
    write_atomic(&road_path, doc.road_xml.as_bytes()).map_err(io_err(&road_path))?;
    let sidecar = SidecarMetadata {
        recording_id: scenario.road().recording_id,
        scenario_type: scenario.kind(),
        ego_id: scenario.ego().id,
        challenger_id: scenario.challenger().id,
        start_frame: scenario.start_frame(),
        profile: profile.name,
        scenario_file: "scenario.xosc".to_string(),
        road_file: "road.xodr".to_string(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| ExportError::Xml {
        detail: e.to_string(),
    })?;
    write_atomic(&metadata_path, json.as_bytes()).map_err(io_err(&metadata_path))?;
    Ok(dir)
}
