//! Extraction of concrete ALKS test scenarios from highD-format highway
//! recordings.
//!
//! The crate implements a database-centric pipeline:
//!
//! 1. [`highd`] parses recording CSV triples and rewrites them into a
//!    canonical per-direction driving frame.
//! 2. [`detect`] scans every track for lane changes, brake maneuvers and
//!    swerving.
//! 3. [`extract`] assembles ego/challenger pairs around those events into
//!    concrete scenario records ("Lead Vehicle Brake", "Cut-In", "Swerving
//!    Lead/Side Vehicle") and filters them against ALKS operational-design-
//!    domain bounds.
//! 4. [`export`] renders records as OpenSCENARIO 1.0 documents with a
//!    matching OpenDRIVE road, applying per-simulator tool profiles.
//! 5. [`replay`](mod@replay) re-executes records in a deterministic fixed-timestep
//!    kinematic engine and [`stats`] compares the result against the source
//!    recording (velocity / lateral-position RMSE) and summarizes the
//!    database.
//! 6. [`synth`] generates seeded synthetic recordings with planted,
//!    exactly-known scenarios, so the whole pipeline can be verified
//!    without access to the licensed dataset.
//!
//! The maneuver shapes themselves live in [`models`]: a cubic velocity
//! profile for braking and a distance-parameterized sinusoid for lane
//! changes, plus the 5-second trigger back-calculation that places vehicles
//! at simulation start.

// Validations use `!(x > 0.0)` so that NaN fails them; the suggested
// `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod db;
pub mod detect;
pub mod error;
pub mod export;
pub mod extract;
pub mod highd;
pub mod models;
pub mod replay;
pub mod stats;
pub mod synth;
pub mod units;

pub use detect::{detect_brake_maneuvers, detect_lane_changes, detect_swerving, DetectionConfig};
pub use extract::{
    build_brake_scenarios, build_cutin_scenarios, build_swerve_scenarios, compute_thw, filter_odd,
    OddConfig, ScenarioKind, ScenarioRecord,
};
pub use highd::{canonicalize, load_recording, Recording};
pub use models::{initial_gap_for_trigger, CubicBrakeProfile, SinusoidalLaneChange};
pub use replay::{gap_at, replay, SimTrace};
pub use stats::{histogram, rmse_lateral, rmse_velocity, summarize};
pub use synth::{synthesize_recording, write_highd_csv, PlantSpec};
