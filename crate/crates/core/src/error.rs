//! Error types for the individual pipeline stages.

use std::path::PathBuf;
use thiserror::Error;

/// Errors raised while reading highD-format CSV triples.
///
/// Every variant carries enough context (file, row, column) to point at the
/// offending cell of a multi-gigabyte tracks file.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing input file: {path}")]
    MissingFile { path: PathBuf },

    #[error("{path}: malformed header: {detail}")]
    MalformedHeader { path: PathBuf, detail: String },

    #[error("{path}:{row}: column `{column}`: {detail}")]
    BadCell {
        path: PathBuf,
        row: usize,
        column: String,
        detail: String,
    },

    #[error("{path}:{row}: frame gap in track {vehicle_id}: expected frame {expected}, found {found}")]
    FrameGap {
        path: PathBuf,
        row: usize,
        vehicle_id: u64,
        expected: i64,
        found: i64,
    },

    #[error("{path}:{row}: track row references unknown vehicle id {vehicle_id}")]
    UnknownVehicle {
        path: PathBuf,
        row: usize,
        vehicle_id: u64,
    },

    #[error("{path}: recording metadata invalid: {detail}")]
    BadRecordingMeta { path: PathBuf, detail: String },

    #[error("{path}: i/o error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from the closed-form maneuver primitives.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("evaluation point {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid profile: {detail}")]
    InvalidProfile { detail: String },

    /// The constant-velocity back-calculation put the challenger behind the
    /// ego at t = 0. Export must shorten the initialization time for this
    /// scenario before rendering.
    #[error(
        "back-calculated initial gap {gap:.3} m is not positive; \
         shorten the trigger time below {max_trigger:.3} s for this scenario"
    )]
    NonPositiveGap { gap: f64, max_trigger: f64 },
}

/// Errors from scenario parameter computation.
#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("ego velocity {value} must be positive to compute a time headway")]
    NonPositiveEgoVelocity { value: f64 },
}

/// Errors from document rendering and template binding.
#[derive(Debug, Error)]
pub enum ExportError {
    #[error("template placeholder `{name}` was never bound")]
    UnboundPlaceholder { name: String },

    #[error("template binds unknown placeholder `{name}`")]
    UnknownPlaceholder { name: String },

    #[error("scenario type {scenario} is not supported under tool profile {profile}")]
    UnsupportedCombination { scenario: String, profile: String },

    #[error("generated document is not well-formed XML: {detail}")]
    Xml { detail: String },

    #[error("need at least 2 lane markings to synthesize a road, got {count}")]
    TooFewMarkings { count: usize },

    #[error("{path}: i/o error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from the deterministic replay engine.
#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("timestep {value} s outside (0, 0.1]")]
    BadTimestep { value: f64 },

    #[error("distance trigger never fired within {horizon} s; scenario parameters are inconsistent")]
    TriggerNeverFired { horizon: f64 },

    #[error("time {t} s outside the trace range [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("invalid scenario for replay: {detail}")]
    InvalidScenario { detail: String },
}

/// Errors from metric computation.
#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no overlapping samples between simulation and recording")]
    EmptyOverlap,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("bin width must be positive, got {value}")]
    BadBinWidth { value: f64 },
}

/// Errors from synthetic recording generation.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("plant {index}: {detail}")]
    InvalidPlant { index: usize, detail: String },

    #[error("plant {index}: maneuver needs {needed:.1} m of road but the measurement area is {available:.1} m")]
    DoesNotFit {
        index: usize,
        needed: f64,
        available: f64,
    },

    #[error("{path}: i/o error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
