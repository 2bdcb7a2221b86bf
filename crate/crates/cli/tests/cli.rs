//! End-to-end CLI runs: synth -> extract -> filter -> export ->
//! replay-validate -> stats on a temporary workspace, plus the documented
//! error paths.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alks-scenarios"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stdout_field(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in: {stdout}"))
        .to_string()
}

fn write_plants(path: &Path) {
    let plants = r#"[
  {
    "maneuver": {
      "kind": "brake",
      "v_ego": 17.0,
      "v_ch": 19.44,
      "initial_distance": 40.0,
      "brake_duration": 4.0,
      "v_ch_final": 13.89
    }
  },
  {
    "maneuver": {
      "kind": "cut_in",
      "v_ego": 14.0,
      "v_ch": 15.0,
      "initial_distance": 25.0,
      "relative_lane": 1,
      "initial_lane_offset": 0.1,
      "cutin_distance": 80.0,
      "v_ch_final": 14.5,
      "final_lane_offset": -0.1
    },
    "background_traffic": 3
  }
]"#;
    std::fs::write(path, plants).unwrap();
}

#[test]
fn full_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let plants = dir.path().join("plants.json");
    write_plants(&plants);
    let rec_dir = dir.path().join("recording");
    let db = dir.path().join("db.jsonl");
    let filtered = dir.path().join("filtered.jsonl");
    let scenarios = dir.path().join("scenarios");
    let reports = dir.path().join("reports.jsonl");

    // synth
    let out = assert_ok(&run(&[
        "synth",
        "--plants",
        plants.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        rec_dir.to_str().unwrap(),
    ]));
    assert_eq!(stdout_field(&out, "planted"), "2");
    assert_eq!(stdout_field(&out, "tracks_generated"), "7");

    // extract
    let out = assert_ok(&run(&[
        "extract",
        "--input",
        rec_dir.to_str().unwrap(),
        "--out",
        db.to_str().unwrap(),
    ]));
    assert_eq!(stdout_field(&out, "scenarios_total"), "2");
    assert_eq!(stdout_field(&out, "scenarios_brake"), "1");
    assert_eq!(stdout_field(&out, "scenarios_cut_in"), "1");

    // filter (defaults keep both: ego speeds are below 70 km/h and the
    // brake peak is above 2 m/s²)
    let out = assert_ok(&run(&[
        "filter",
        "--db",
        db.to_str().unwrap(),
        "--out",
        filtered.to_str().unwrap(),
    ]));
    assert_eq!(stdout_field(&out, "scenarios_kept"), "2");

    // export under two profiles; lane signs must differ
    let esmini_dir = scenarios.join("esmini");
    let out = assert_ok(&run(&[
        "export",
        "--db",
        filtered.to_str().unwrap(),
        "--profile",
        "esmini",
        "--out",
        esmini_dir.to_str().unwrap(),
    ]));
    assert_eq!(stdout_field(&out, "exported"), "2");
    let carla_dir = scenarios.join("carla");
    assert_ok(&run(&[
        "export",
        "--db",
        filtered.to_str().unwrap(),
        "--profile",
        "carla",
        "--out",
        carla_dir.to_str().unwrap(),
    ]));

    let find_xosc = |root: &Path| {
        let mut found = Vec::new();
        for entry in std::fs::read_dir(root).unwrap() {
            let sub = entry.unwrap().path();
            let xosc = sub.join("scenario.xosc");
            assert!(xosc.is_file(), "missing scenario.xosc in {sub:?}");
            assert!(sub.join("road.xodr").is_file());
            assert!(sub.join("metadata.json").is_file());
            found.push(std::fs::read_to_string(xosc).unwrap());
        }
        found.sort();
        found
    };
    let esmini_docs = find_xosc(&esmini_dir);
    let carla_docs = find_xosc(&carla_dir);
    assert_eq!(esmini_docs.len(), 2);
    let cutin_esmini = esmini_docs.iter().find(|d| d.contains("CutIn")).unwrap();
    let cutin_carla = carla_docs.iter().find(|d| d.contains("CutIn")).unwrap();
    assert!(cutin_esmini.contains("dLane=\"1\""));
    assert!(cutin_carla.contains("dLane=\"-1\""));

    // replay-validate against the source recording
    let out = assert_ok(&run(&[
        "replay-validate",
        "--db",
        filtered.to_str().unwrap(),
        "--recordings",
        rec_dir.to_str().unwrap(),
        "--timestep",
        "0.04",
        "--out",
        reports.to_str().unwrap(),
    ]));
    let mean_v: f64 = stdout_field(&out, "mean_rmse_velocity_kmh").parse().unwrap();
    assert!(mean_v < 0.1, "mean velocity RMSE {mean_v}");
    let report_lines = std::fs::read_to_string(&reports).unwrap();
    assert_eq!(report_lines.lines().count(), 2);

    // stats
    let out = assert_ok(&run(&["stats", "--db", filtered.to_str().unwrap()]));
    let report: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(report["counts"]["brake"]["total"], 1);
    assert_eq!(report["counts"]["cut_in"]["after_filter"], 1);
}

#[test]
fn deterministic_outputs_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let plants = dir.path().join("plants.json");
    write_plants(&plants);

    let mut dbs = Vec::new();
    for run_id in 0..2 {
        let rec_dir = dir.path().join(format!("rec{run_id}"));
        let db = dir.path().join(format!("db{run_id}.jsonl"));
        assert_ok(&run(&[
            "synth",
            "--plants",
            plants.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            rec_dir.to_str().unwrap(),
        ]));
        assert_ok(&run(&[
            "--jobs",
            "4",
            "extract",
            "--input",
            rec_dir.to_str().unwrap(),
            "--out",
            db.to_str().unwrap(),
        ]));
        dbs.push(std::fs::read(&db).unwrap());
    }
    assert_eq!(dbs[0], dbs[1]);
}

#[test]
fn missing_tracks_file_fails_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let plants = dir.path().join("plants.json");
    write_plants(&plants);
    let rec_dir = dir.path().join("recording");
    assert_ok(&run(&[
        "synth",
        "--plants",
        plants.to_str().unwrap(),
        "--out",
        rec_dir.to_str().unwrap(),
    ]));
    let tracks = rec_dir.join("01_tracks.csv");
    std::fs::remove_file(&tracks).unwrap();
    // Without the tracks file the triple is not discovered at all; an
    // empty input produces a warning and an empty database.
    let db = dir.path().join("db.jsonl");
    let out = run(&[
        "extract",
        "--input",
        rec_dir.to_str().unwrap(),
        "--out",
        db.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no recordings found") || stderr.contains("warning"));

    // A present-but-unreadable triple must fail loudly, naming the file.
    std::fs::write(&tracks, "frame,id\n").unwrap();
    let out = run(&[
        "extract",
        "--input",
        rec_dir.to_str().unwrap(),
        "--out",
        db.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("01_tracks.csv"),
        "stderr should name the file: {stderr}"
    );
}

#[test]
fn empty_input_dir_gives_empty_db_and_warning() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let db = dir.path().join("db.jsonl");
    let out = run(&[
        "extract",
        "--input",
        empty.to_str().unwrap(),
        "--out",
        db.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(std::fs::read_to_string(&db).unwrap(), "");
    assert_eq!(
        stdout_field(&String::from_utf8_lossy(&out.stdout), "scenarios_total"),
        "0"
    );
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("db.jsonl");
    std::fs::write(&db, "").unwrap();

    let out = run(&[
        "export",
        "--db",
        db.to_str().unwrap(),
        "--profile",
        "unknown-sim",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown profile"));

    let out = run(&[
        "replay-validate",
        "--db",
        db.to_str().unwrap(),
        "--recordings",
        dir.path().to_str().unwrap(),
        "--timestep",
        "0",
        "--out",
        dir.path().join("r.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_recording_id_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let plants = dir.path().join("plants.json");
    write_plants(&plants);
    let rec_dir = dir.path().join("recording");
    let db = dir.path().join("db.jsonl");
    assert_ok(&run(&[
        "synth",
        "--plants",
        plants.to_str().unwrap(),
        "--out",
        rec_dir.to_str().unwrap(),
    ]));
    assert_ok(&run(&[
        "extract",
        "--input",
        rec_dir.to_str().unwrap(),
        "--out",
        db.to_str().unwrap(),
    ]));

    // Re-synthesize under a different recording id; the database now
    // references id 1 which no longer exists.
    let other_dir = dir.path().join("other");
    assert_ok(&run(&[
        "synth",
        "--plants",
        plants.to_str().unwrap(),
        "--recording-id",
        "9",
        "--out",
        other_dir.to_str().unwrap(),
    ]));
    let out = run(&[
        "replay-validate",
        "--db",
        db.to_str().unwrap(),
        "--recordings",
        other_dir.to_str().unwrap(),
        "--out",
        dir.path().join("r.jsonl").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no recording with id 1"));
}
