use std::path::PathBuf;
use std::process::{Command, Output};

fn fleetloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fleetloc")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_logistics_fixture() {
    let o = fleetloc(&["solve", &fixture("towns_log.json")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("179.756, 155.90"), "{out}");
    assert!(out.contains("trucks: 19"));
    assert!(out.contains("throughput/day: 67.871"));
    assert!(out.contains("P(center busy): 0.70699"));
}

#[test]
fn solve_infeasible_exits_two() {
    let o = fleetloc(&["solve", &fixture("towns_pro.json"), "--mu1", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("ceiling/day: 72.000 (binding: center)"));
}

#[test]
fn fleet_reports_minimal_center_rate() {
    let o = fleetloc(&["fleet", &fixture("towns_pro.json"), "--mu1", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("minimal center rate: 3.38/h with 43 trucks"), "{}", stdout(&o));
}

#[test]
fn toy_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.json");
    std::fs::write(
        &path,
        r#"{"warehouses":[{"id":2,"x":1.0,"y":0.0,"demand_per_day":1.0,"servers":1,"unload_rate_per_hour":1.0}],
            "center":{"servers":1,"load_rate_per_hour":1.0},"truck_speed_kmh":1.0}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let o = fleetloc(&["solve", path.to_str().unwrap(), "--center", "0,0", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("trucks: 1\n"));
    assert!(out.contains("passage time (h): 4.000000"));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0.000,0.000,1,1,6.000,"), "{text}");
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(fleetloc(&["solve", "/nonexistent/scenario.json"]).status.code(), Some(1));
    assert_eq!(fleetloc(&["solve", &fixture("towns_log.json"), "--mu1", "-1"]).status.code(), Some(1));
    assert_eq!(fleetloc(&["solve", &fixture("towns_log.json"), "--center", "1;2"]).status.code(), Some(1));
    assert_eq!(fleetloc(&["frobnicate"]).status.code(), Some(1));
    let o = fleetloc(&["generate", "--demand-set", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive"));
}

#[test]
fn weber_verb() {
    let o = fleetloc(&["weber", &fixture("towns_log.json"), "--unweighted"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("weber point: 179.21"));
}

#[test]
fn generate_is_byte_stable_and_csv_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let scen = dir.path().join("scenarios");
    let args = ["generate", "--block", "II", "--count", "6", "--seed", "11"];
    let a = fleetloc(&[&args[..], &["--csv", csv.to_str().unwrap(), "--out-dir", scen.to_str().unwrap()]].concat());
    let b = fleetloc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let table = stdout(&a);
    assert!(table.contains("Num<Tru"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 7);
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            assert!(table.contains(cell), "{cell} missing");
        }
    }
    assert_eq!(std::fs::read_dir(&scen).unwrap().count(), 6);
    // written scenarios load back
    let first = scen.join("instance_0000.json");
    assert_eq!(fleetloc(&["weber", first.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn generate_block_four_has_infeasible_rows() {
    let o = fleetloc(&["generate", "--block", "IV", "--count", "20", "--seed", "3"]);
    let out = stdout(&o);
    assert!(out.contains("--/--"));
    assert!(out.contains("168.0000/168.0000"));
}

#[test]
fn validate_passes_and_detects_corruption() {
    let quick = ["validate", "--instances", "10", "--events", "20000", "--replications", "10"];
    let o = fleetloc(&quick);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = fleetloc(&[&quick[..], &["--corrupt-convolution"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL enumeration_matches_aggregated_convolution"));
}

#[test]
fn grid_is_best_at_the_weber_point() {
    let o = fleetloc(&["grid", &fixture("towns_log.json"), "--around-weber", "--radius", "20", "--step", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2 + 25);
    assert!(lines[2].trim_start().starts_with("179.756, 155.905"), "{out}");
}

#[test]
fn thread_override_is_accepted() {
    let o = Command::new(env!("CARGO_BIN_EXE_fleetloc"))
        .env("FLEETLOC_THREADS", "1")
        .args(["weber", &fixture("towns_pro.json")])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
