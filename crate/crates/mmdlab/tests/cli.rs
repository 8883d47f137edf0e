use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmdlab::mmg;
use mmdlab_core::generators::{generate, refinement_map, GeneratorSpec};
use serde_json::{json, Value};
use tempfile::TempDir;

fn mmdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmdlab"))
        .args(args)
        .env_remove("MMDLAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn scenario(name: &str) -> String {
    manifest().join("scenarios").join(name).display().to_string()
}

fn scenario_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(manifest().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn schema(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(manifest().join("schema").join(name)).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, instance: &Value, what: &str) {
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: stdout {:?}, stderr {}", out.stdout, String::from_utf8_lossy(&out.stderr)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn lattice_file(dir: &TempDir, side: &str) -> String {
    let p = dir.path().join(format!("lattice{side}.mmg")).display().to_string();
    let out = mmdlab(&["generate", "--shape", "lattice", "--side", side, "-o", &p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p
}

#[test]
fn generate_writes_a_readable_graph() {
    let dir = TempDir::new().unwrap();
    let p = lattice_file(&dir, "5");
    let g = mmg::read(Path::new(&p)).unwrap();
    assert_eq!((g.len(), g.edges().len()), (25, 40));
    assert_eq!(mmg::to_string(&g).unwrap(), std::fs::read_to_string(&p).unwrap());

    let glued = dir.path().join("glued.mmg").display().to_string();
    let out = mmdlab(&["generate", "--shape", "path", "--side", "4", "--glue", "0", "-o", &glued]);
    assert!(out.status.success());
    let g = mmg::read(Path::new(&glued)).unwrap();
    assert_eq!((g.len(), g.edges().len()), (9, 8));
}

#[test]
fn estimate_report_follows_schema() {
    let dir = TempDir::new().unwrap();
    let space = lattice_file(&dir, "40");
    let config = write(&dir, "vd.json", r#"{ "centers": [820, 821], "radii": [2, 4, 8] }"#);
    let out = mmdlab(&["estimate", "vd", "--space", &space, "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_valid(&schema("report.schema.json"), &report, "vd report");
    assert_eq!(report["kind"], "estimate");
    assert_eq!(report["operation"], "vd");
    assert_eq!(report["space"]["vertices"], 1600);
    assert!(report.get("wall_time_s").is_none());
    // Diamonds of radius r hold 2r² − 2r + 1 vertices.
    let d = |r: f64| 2.0 * r * r - 2.0 * r + 1.0;
    let want = [2.0, 4.0, 8.0].iter().map(|&r| d(2.0 * r) / d(r)).fold(0.0, f64::max);
    assert_eq!(report["report"]["constant"].as_f64().unwrap(), want);

    let timed = mmdlab(&["--timings", "estimate", "vd", "--space", &space, "--config", &config]);
    assert!(stdout_json(&timed)["wall_time_s"].as_f64().is_some());
}

#[test]
fn config_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let space = lattice_file(&dir, "10");
    let config = write(&dir, "bad.json", r#"{ "centers": [5], "radii": [2, "four"] }"#);
    let out = mmdlab(&["estimate", "vd", "--space", &space, "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/radii/1"), "{err}");

    let config = write(&dir, "unknown.json", r#"{ "centers": [5], "radii": [2], "radius": 3 }"#);
    let out = mmdlab(&["estimate", "vd", "--space", &space, "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_and_malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "vd.json", r#"{ "centers": [0], "radii": [1] }"#);
    let out = mmdlab(&["estimate", "vd", "--space", "/nonexistent/space.mmg", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/space.mmg"));

    let out = mmdlab(&["estimate", "vd", "--space", "/nonexistent/space.mmg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error at /:"));

    let bad = write(&dir, "bad.mmg", "# mmg v1 metric=graph\nv 0 1\nv 1 1\ne 0 1 -1 1\n");
    let out = mmdlab(&["estimate", "vd", "--space", &bad, "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":4"), "{err}");

    let out = mmdlab(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_verdicts_exit_one() {
    let out = mmdlab(&["run", &scenario("path-negative.json")]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["summary"]["verdict"], "fail");
    assert_eq!(report["summary"]["failures"], json!(["annulus-path"]));

    let dir = TempDir::new().unwrap();
    let space = dir.path().join("path.mmg").display().to_string();
    assert!(mmdlab(&["generate", "--shape", "path", "--side", "40", "-o", &space]).status.success());
    let config = write(&dir, "ap.json", r#"{ "centers": [20], "radii": [4], "C0": 2 }"#);
    let out = mmdlab(&["check", "annulus-path", "--space", &space, "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], false);
}

#[test]
fn scenarios_follow_the_scenario_schema() {
    let v = schema("scenario.schema.json");
    for path in scenario_files() {
        let s: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_valid(&v, &s, &path.display().to_string());
    }
    let bad = json!({
        "name": "bad",
        "space": { "generate": { "shape": "path", "n": 4 } },
        "operations": [{ "op": "vd", "centers": [1], "radii": [1], "radius": 2 }]
    });
    assert!(!v.is_valid(&bad));
    let bad = json!({ "name": "bad", "space": {}, "operations": [] });
    assert!(!v.is_valid(&bad));
}

#[test]
fn run_reports_follow_the_report_schema() {
    let v = schema("report.schema.json");
    for path in scenario_files() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name == "chain-bound-lattice.json" {
            continue;
        }
        let out = mmdlab(&["run", &path.display().to_string()]);
        assert!(matches!(out.status.code(), Some(0 | 1)), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert_valid(&v, &stdout_json(&out), &name);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let path = scenario("lattice-positive.json");
    let one = mmdlab(&["--threads", "1", "run", &path]);
    let again = mmdlab(&["--threads", "1", "run", &path]);
    let four = mmdlab(&["--threads", "4", "run", &path]);
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn seed_override_is_echoed() {
    let out = mmdlab(&["--seed", "99", "run", &scenario("harnack-path.json")]);
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 99);
    assert_eq!(report["scenario"]["seed"], 99);
}

#[test]
fn export_produces_harnack_rows() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("run.json").display().to_string();
    let out = mmdlab(&["run", &scenario("harnack-path.json"), "-o", &report]);
    assert!(out.status.success());
    let out = mmdlab(&["export", "--report", &report, "--kind", "harnack-vs-radius", "--operation", "harnack"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,constant"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [2.0, 4.0, 8.0, 16.0]);
    for (_, h) in rows {
        assert!((h - 3.0).abs() < 1e-9);
    }

    let out = mmdlab(&["export", "--report", &report, "--kind", "ratio-vs-epsilon", "--operation", "harnack"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mmdlab(&["export", "--report", &report, "--kind", "harnack-vs-radius", "--operation", "missing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn disk_cache_leaves_reports_unchanged() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let path = scenario("harnack-path.json");
    let plain = mmdlab(&["run", &path]);
    let cached = |_: ()| {
        Command::new(env!("CARGO_BIN_EXE_mmdlab"))
            .args(["run", &path])
            .env("MMDLAB_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    let first = cached(());
    let entries = std::fs::read_dir(&cache).unwrap().count();
    assert!(entries > 0);
    let second = cached(());
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), entries);
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(plain.stdout, second.stdout);
}

#[test]
fn refine_check_reads_levels_and_maps() {
    let dir = TempDir::new().unwrap();
    let levels: Vec<_> = [2, 4, 6]
        .iter()
        .map(|&l| generate(&GeneratorSpec::sierpinski_gasket(l)).unwrap())
        .collect();
    let mut files = Vec::new();
    for (i, g) in levels.iter().enumerate() {
        let p = dir.path().join(format!("level{i}.mmg"));
        mmg::write(g, &p).unwrap();
        files.push(p.display().to_string());
    }
    let maps: Vec<_> = levels.windows(2).map(|w| refinement_map(&w[0], &w[1], 1e-9).unwrap()).collect();
    let maps_file = write(&dir, "maps.txt", &mmg::maps_to_string(&maps));
    let config = write(&dir, "refine.json", r#"{ "x": 0, "y": 1, "epsilon_ratio": 0.3333333333333333, "A0": 2 }"#);
    let out = mmdlab(&["check", "refine", "--levels", &files.join(","), "--maps", &maps_file, "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["report"]["levels_completed"], 3);
    assert_eq!(report["pass"], true);

    // A map that sends everything to one vertex distorts every hop.
    let collapsed: Vec<Vec<usize>> = maps.iter().map(|m| vec![0; m.len()]).collect();
    let bad = write(&dir, "bad-maps.txt", &mmg::maps_to_string(&collapsed));
    let out = mmdlab(&["check", "refine", "--levels", &files.join(","), "--maps", &bad, "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["report"]["failure"]["level"], 2);
}

#[test]
fn empty_scenario_passes() {
    let out = mmdlab(&["run", &scenario("empty.json")]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["operations"], json!([]));
    assert_eq!(report["summary"]["verdict"], "pass");
    assert_eq!(report["scenario"]["name"], "empty");
}

#[test]
fn scenario_reads_space_files_relative_to_itself() {
    let dir = TempDir::new().unwrap();
    lattice_file(&dir, "20");
    let path = write(
        &dir,
        "s.json",
        r#"{
            "name": "from-file",
            "space": { "file": "lattice20.mmg" },
            "operations": [ { "op": "vd", "centers": [210], "radii": [2, 4] } ]
        }"#,
    );
    let out = mmdlab(&["run", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["space"]["vertices"], 400);
    assert_eq!(report["operations"][0]["status"], "pass");
}

#[test]
fn required_failure_skips_the_rest() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "s.json",
        r#"{
            "name": "abort",
            "space": { "generate": { "shape": "path", "n": 40 } },
            "operations": [
                { "op": "annulus-path", "centers": [20], "radii": [4], "C0": 2, "required": true },
                { "op": "vd", "centers": [20], "radii": [2] }
            ]
        }"#,
    );
    let out = mmdlab(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["operations"][1]["status"], "skipped");
    assert_eq!(report["summary"]["aborted"], true);
}
