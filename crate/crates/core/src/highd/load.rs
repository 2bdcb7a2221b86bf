//! CSV readers for the highD file triple.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::IngestError;
use crate::highd::{
    meta_error, CoordinateFrame, DrivingDirection, KinematicState, Recording, RecordingMeta,
    Track, VehicleClass, VehicleMeta,
};

/// Default measurement-area length when neither the meta file nor the
/// tracks allow deriving one (the dataset covers a segment of roughly
/// this size).
const DEFAULT_AREA_LENGTH: f64 = 420.0;

/// Non-fatal observations made while loading.
#[derive(Debug, Clone, PartialEq)]
pub enum IngestWarning {
    /// Unrecognized vehicle class label; mapped to `Car` because class only
    /// affects the exported vehicle description, not detection math.
    UnknownClass { vehicle_id: u64, label: String },
    /// Track with fewer than 2 states was dropped.
    ShortTrack { vehicle_id: u64, frames: usize },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::UnknownClass { vehicle_id, label } => write!(
                f,
                "vehicle {vehicle_id}: unknown class label `{label}`, treating as Car"
            ),
            IngestWarning::ShortTrack { vehicle_id, frames } => write!(
                f,
                "vehicle {vehicle_id}: track with {frames} state(s) dropped (need at least 2)"
            ),
        }
    }
}

/// The file triple describing one recording.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecordingPaths {
    pub recording_meta: PathBuf,
    pub tracks_meta: PathBuf,
    pub tracks: PathBuf,
}

/// Finds recording triples inside a directory by looking for files ending
/// in `recordingMeta.csv` and their `tracksMeta.csv`/`tracks.csv` siblings.
pub fn discover_recordings(dir: &Path) -> std::io::Result<Vec<RecordingPaths>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(prefix) = name.strip_suffix("recordingMeta.csv") {
            let tracks_meta = dir.join(format!("{prefix}tracksMeta.csv"));
            let tracks = dir.join(format!("{prefix}tracks.csv"));
            if tracks_meta.is_file() && tracks.is_file() {
                found.push(RecordingPaths {
                    recording_meta: entry.path(),
                    tracks_meta,
                    tracks,
                });
            }
        }
    }
    found.sort();
    Ok(found)
}

struct Sheet {
    path: PathBuf,
    headers: BTreeMap<String, usize>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Sheet {
    fn open(path: &Path) -> Result<Self, IngestError> {
        if !path.is_file() {
            return Err(IngestError::MissingFile {
                path: path.to_path_buf(),
            });
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_path(path)
            .map_err(|e| IngestError::MalformedHeader {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
        let headers = reader
            .headers()
            .map_err(|e| IngestError::MalformedHeader {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        let mut rows = Vec::new();
        // Data rows start on line 2; the header is line 1.
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| IngestError::MalformedHeader {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?;
            rows.push((i + 2, record));
        }
        Ok(Sheet {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.headers
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::MalformedHeader {
                path: self.path.clone(),
                detail: format!("missing required column `{name}`"),
            })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.headers.get(name).copied()
    }

    fn cell<'a>(
        &self,
        row: usize,
        record: &'a csv::StringRecord,
        col: usize,
        name: &str,
    ) -> Result<&'a str, IngestError> {
        record.get(col).ok_or_else(|| IngestError::BadCell {
            path: self.path.clone(),
            row,
            column: name.to_string(),
            detail: "row is shorter than the header".to_string(),
        })
    }

    fn f64(
        &self,
        row: usize,
        record: &csv::StringRecord,
        col: usize,
        name: &str,
    ) -> Result<f64, IngestError> {
        let raw = self.cell(row, record, col, name)?;
        raw.trim().parse().map_err(|_| IngestError::BadCell {
            path: self.path.clone(),
            row,
            column: name.to_string(),
            detail: format!("`{raw}` is not a number"),
        })
    }

    fn int(
        &self,
        row: usize,
        record: &csv::StringRecord,
        col: usize,
        name: &str,
    ) -> Result<i64, IngestError> {
        let raw = self.cell(row, record, col, name)?;
        let t = raw.trim();
        if let Ok(v) = t.parse::<i64>() {
            return Ok(v);
        }
        // Tolerate integer-valued decimals such as "3.0".
        match t.parse::<f64>() {
            Ok(v) if v.fract() == 0.0 => Ok(v as i64),
            _ => Err(IngestError::BadCell {
                path: self.path.clone(),
                row,
                column: name.to_string(),
                detail: format!("`{raw}` is not an integer"),
            }),
        }
    }
}

fn parse_marking_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(';')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        })
        .collect()
}

fn load_meta(path: &Path) -> Result<RecordingMeta, IngestError> {
    let sheet = Sheet::open(path)?;
    let (row, record) = sheet
        .rows
        .first()
        .ok_or_else(|| meta_error(path, "file has no data row".to_string()))?;
    let row = *row;

    let id = sheet.int(row, record, sheet.column("id")?, "id")? as u32;
    let frame_rate = sheet.f64(row, record, sheet.column("frameRate")?, "frameRate")?;

    let upper_raw = sheet.cell(
        row,
        record,
        sheet.column("upperLaneMarkings")?,
        "upperLaneMarkings",
    )?;
    let upper = parse_marking_list(upper_raw).map_err(|detail| IngestError::BadCell {
        path: path.to_path_buf(),
        row,
        column: "upperLaneMarkings".to_string(),
        detail,
    })?;
    let lower_raw = sheet.cell(
        row,
        record,
        sheet.column("lowerLaneMarkings")?,
        "lowerLaneMarkings",
    )?;
    let lower = parse_marking_list(lower_raw).map_err(|detail| IngestError::BadCell {
        path: path.to_path_buf(),
        row,
        column: "lowerLaneMarkings".to_string(),
        detail,
    })?;

    let speed_limit = match sheet.optional_column("speedLimit") {
        Some(col) => {
            let v = sheet.f64(row, record, col, "speedLimit")?;
            (v > 0.0).then_some(v)
        }
        None => None,
    };

    // The published highD layout has no column for the measurement-area
    // length; our own writer emits one so synthetic recordings round-trip.
    // When absent it is derived later from the track extents.
    let area = match sheet.optional_column("measurementAreaLength") {
        Some(col) => Some(sheet.f64(row, record, col, "measurementAreaLength")?),
        None => None,
    };

    Ok(RecordingMeta {
        recording_id: id,
        frame_rate,
        upper_lane_markings: upper,
        lower_lane_markings: lower,
        measurement_area_length: area.unwrap_or(0.0),
        speed_limit,
    })
}

fn load_vehicles(
    path: &Path,
    warnings: &mut Vec<IngestWarning>,
) -> Result<BTreeMap<u64, VehicleMeta>, IngestError> {
    let sheet = Sheet::open(path)?;
    let id_col = sheet.column("id")?;
    // highD names the bounding-box length "width" and the bounding-box
    // width "height" (image-axis naming).
    let len_col = sheet.column("width")?;
    let wid_col = sheet.column("height")?;
    let class_col = sheet.column("class")?;
    let dir_col = sheet.column("drivingDirection")?;

    let mut vehicles = BTreeMap::new();
    for (row, record) in &sheet.rows {
        let row = *row;
        let id = sheet.int(row, record, id_col, "id")? as u64;
        let length = sheet.f64(row, record, len_col, "width")?;
        let width = sheet.f64(row, record, wid_col, "height")?;
        if length <= 0.0 || width <= 0.0 {
            return Err(IngestError::BadCell {
                path: path.to_path_buf(),
                row,
                column: "width/height".to_string(),
                detail: format!("vehicle dimensions must be positive, got {length} x {width}"),
            });
        }
        let class_raw = sheet.cell(row, record, class_col, "class")?.trim();
        let class = match class_raw.to_ascii_lowercase().as_str() {
            "car" => VehicleClass::Car,
            "truck" => VehicleClass::Truck,
            _ => {
                warnings.push(IngestWarning::UnknownClass {
                    vehicle_id: id,
                    label: class_raw.to_string(),
                });
                VehicleClass::Car
            }
        };
        let dir_flag = sheet.int(row, record, dir_col, "drivingDirection")?;
        let direction = DrivingDirection::from_flag(dir_flag as u8).ok_or_else(|| {
            IngestError::BadCell {
                path: path.to_path_buf(),
                row,
                column: "drivingDirection".to_string(),
                detail: format!("expected 1 or 2, got {dir_flag}"),
            }
        })?;
        vehicles.insert(
            id,
            VehicleMeta {
                vehicle_id: id,
                class,
                length,
                width,
                direction,
            },
        );
    }
    Ok(vehicles)
}

fn neighbor(id: i64) -> Option<u64> {
    (id > 0).then_some(id as u64)
}

fn headway(v: f64) -> Option<f64> {
    (v > 0.0).then_some(v)
}

fn load_tracks(
    path: &Path,
    vehicles: &BTreeMap<u64, VehicleMeta>,
) -> Result<BTreeMap<u64, Track>, IngestError> {
    let sheet = Sheet::open(path)?;
    let frame_col = sheet.column("frame")?;
    let id_col = sheet.column("id")?;
    let x_col = sheet.column("x")?;
    let y_col = sheet.column("y")?;
    let vx_col = sheet.column("xVelocity")?;
    let vy_col = sheet.column("yVelocity")?;
    let ax_col = sheet.column("xAcceleration")?;
    let ay_col = sheet.column("yAcceleration")?;
    let dhw_col = sheet.column("dhw")?;
    let thw_col = sheet.column("thw")?;
    let prec_col = sheet.column("precedingId")?;
    let foll_col = sheet.column("followingId")?;
    let lane_col = sheet.column("laneId")?;

    let mut tracks: BTreeMap<u64, Track> = BTreeMap::new();
    for (row, record) in &sheet.rows {
        let row = *row;
        let id = sheet.int(row, record, id_col, "id")? as u64;
        if !vehicles.contains_key(&id) {
            return Err(IngestError::UnknownVehicle {
                path: path.to_path_buf(),
                row,
                vehicle_id: id,
            });
        }
        let frame = sheet.int(row, record, frame_col, "frame")?;
        let state = KinematicState {
            frame,
            x: sheet.f64(row, record, x_col, "x")?,
            y: sheet.f64(row, record, y_col, "y")?,
            vx: sheet.f64(row, record, vx_col, "xVelocity")?,
            vy: sheet.f64(row, record, vy_col, "yVelocity")?,
            ax: sheet.f64(row, record, ax_col, "xAcceleration")?,
            ay: sheet.f64(row, record, ay_col, "yAcceleration")?,
            lane_id: sheet.int(row, record, lane_col, "laneId")? as i32,
            lane_offset: 0.0,
            preceding_id: neighbor(sheet.int(row, record, prec_col, "precedingId")?),
            following_id: neighbor(sheet.int(row, record, foll_col, "followingId")?),
            thw: headway(sheet.f64(row, record, thw_col, "thw")?),
            dhw: headway(sheet.f64(row, record, dhw_col, "dhw")?),
        };

        let track = tracks.entry(id).or_insert_with(|| Track {
            vehicle_id: id,
            states: Vec::new(),
        });
        if let Some(last) = track.states.last() {
            if frame != last.frame + 1 {
                return Err(IngestError::FrameGap {
                    path: path.to_path_buf(),
                    row,
                    vehicle_id: id,
                    expected: last.frame + 1,
                    found: frame,
                });
            }
        }
        track.states.push(state);
    }
    Ok(tracks)
}

/// Loads a highD recording from its three CSV files.
///
/// Coordinates are kept exactly as stored (image plane, box corners); use
/// [`canonicalize`](super::canonicalize) before running any analysis.
/// Returns the recording together with non-fatal warnings.
pub fn load_recording(
    recording_meta_path: &Path,
    tracks_meta_path: &Path,
    tracks_path: &Path,
) -> Result<(Recording, Vec<IngestWarning>), IngestError> {
    let mut warnings = Vec::new();

    let mut meta = load_meta(recording_meta_path)?;
    let vehicles = load_vehicles(tracks_meta_path, &mut warnings)?;
    let mut tracks = load_tracks(tracks_path, &vehicles)?;

    // Tracks with fewer than 2 states cannot carry any event.
    let short: Vec<u64> = tracks
        .iter()
        .filter(|(_, t)| t.states.len() < 2)
        .map(|(id, t)| {
            warnings.push(IngestWarning::ShortTrack {
                vehicle_id: *id,
                frames: t.states.len(),
            });
            *id
        })
        .collect();
    for id in short {
        tracks.remove(&id);
    }

    if meta.measurement_area_length <= 0.0 {
        meta.measurement_area_length = derive_area_length(&tracks, &vehicles);
    }
    meta.validate()
        .map_err(|detail| meta_error(recording_meta_path, detail))?;

    Ok((
        Recording {
            meta,
            vehicles,
            tracks,
            frame: CoordinateFrame::RawImage,
        },
        warnings,
    ))
}

fn derive_area_length(tracks: &BTreeMap<u64, Track>, vehicles: &BTreeMap<u64, VehicleMeta>) -> f64 {
    let mut max_extent: f64 = 0.0;
    for (id, track) in tracks {
        let length = vehicles.get(id).map_or(0.0, |v| v.length);
        for s in &track.states {
            max_extent = max_extent.max(s.x + length);
        }
    }
    if max_extent > 0.0 {
        max_extent
    } else {
        DEFAULT_AREA_LENGTH
    }
}
