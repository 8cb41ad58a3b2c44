use std::path::PathBuf;
use std::process::{Command, Output};

fn realize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realize"))
        .env_remove("REALIZE_FORMAT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn squeezed(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect()
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("realize-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let path = self.0.join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn run_strategy3_current_total() {
    let o = realize(&["run", "strategy3", "--regime", "current", "--rates", "paper"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(squeezed(&stdout(&o)).contains(&"total tax ₱500,000.00".to_string()));
}

#[test]
fn run_strategy3_proposed_total() {
    let o = realize(&["run", "strategy3", "--regime", "proposed", "--rates", "paper"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(squeezed(&stdout(&o)).contains(&"total tax ₱1,200,000.00".to_string()));
}

#[test]
fn missing_file_is_a_scenario_error() {
    let o = realize(&["run", "missing.scn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.scn: error: no such file"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["run", "strategy3", "--regime", "sideways"],
        vec!["run"],
        vec!["frobnicate"],
        vec!["run", "strategy3", "--window", "annual:0"],
        vec![],
    ] {
        let o = realize(&args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(realize(&["--help"]).status.code(), Some(0));
    assert_eq!(realize(&["--version"]).status.code(), Some(0));
    assert!(stdout(&realize(&["run", "--help"])).contains("--regime"));
}

#[test]
fn parse_error_points_at_line_and_column() {
    let dir = TempDir::new("parse");
    let path = dir.file("bad.scn", "# comment\nprice ABC 1 50\nat 1 sell ABC 10 extra\n");
    let o = realize(&["run", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{path}:3:18: error: ")), "{}", stderr(&o));
}

#[test]
fn engine_error_names_the_event() {
    let dir = TempDir::new("engine");
    let path = dir.file("oversell.scn", "price ABC 1 50\nat 1 buy ABC 10\nat 1 sell ABC 11\n");
    let o = realize(&["run", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("event 1 (tick 1)"), "{}", stderr(&o));
}

#[test]
fn file_scenarios_take_the_file_name() {
    let dir = TempDir::new("name");
    let path = dir.file("mine.scn", "price ABC 1 50\nprice ABC 2 100\nat 1 buy ABC 10\nat 2 sell ABC 10\n");
    let o = realize(&["run", &path, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scenario"], "mine");
    assert_eq!(v["totals"]["total_tax"], 5_000);
}

#[test]
fn csv_and_json_agree_in_centavos() {
    let json = realize(&["run", "death_avoidance", "--regime", "proposed", "--format", "json"]);
    let csv = realize(&["run", "death_avoidance", "--regime", "proposed", "--format", "csv"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let total = |item: &str| -> i64 {
        rows.iter()
            .find(|r| &r[2] == "total" && &r[4] == item)
            .unwrap()[10]
            .parse()
            .unwrap()
    };
    for item in ["total_tax", "net_capital_gain", "pre_tax_cash", "after_tax_cash"] {
        assert_eq!(v["totals"][item].as_i64().unwrap(), total(item), "{item}");
    }
    assert_eq!(total("total_tax"), 50_000_000);
    let gains: Vec<i64> = rows
        .iter()
        .filter(|r| &r[2] == "realization")
        .map(|r| r[10].parse().unwrap())
        .collect();
    let json_gains: Vec<i64> = v["realizations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["gain_total"].as_i64().unwrap())
        .collect();
    assert_eq!(gains, json_gains);
}

#[test]
fn format_defaults_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_realize"))
        .env("REALIZE_FORMAT", "csv")
        .args(["run", "strategy1"])
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("scenario,regime,record,"));
    let o = Command::new(env!("CARGO_BIN_EXE_realize"))
        .env("REALIZE_FORMAT", "csv")
        .args(["run", "strategy1", "--format", "table"])
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("scenario"));
    assert!(!stdout(&o).contains("scenario,"));
}

#[test]
fn compare_strategy3_per_tick() {
    let o = realize(&["compare", "strategy3"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = squeezed(&stdout(&o));
    assert!(lines.contains(&"2 ₱0.00 ₱0.00 ₱5,000,000.00 ₱500,000.00 +₱500,000.00".to_string()));
    assert!(lines.contains(&"3 ₱5,000,000.00 ₱500,000.00 ₱7,000,000.00 ₱700,000.00 +₱200,000.00".to_string()));
    assert!(lines.contains(&"total ₱5,000,000.00 ₱500,000.00 ₱12,000,000.00 ₱1,200,000.00 +₱700,000.00".to_string()));
}

#[test]
fn compare_strategy1_has_zero_deltas() {
    let o = realize(&["compare", "strategy1", "--format", "csv"]);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let deltas: Vec<String> = rdr.records().map(|r| r.unwrap()[6].to_string()).collect();
    assert!(!deltas.is_empty());
    assert!(deltas.iter().all(|d| d == "0"));
}

#[test]
fn compare_death_avoidance() {
    let o = realize(&["compare", "death_avoidance", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["current_total"], 0);
    assert_eq!(v["proposed_total"], 50_000_000);
}

#[test]
fn batch_output_keeps_argument_order() {
    let o = realize(&["run", "strategy2", "strategy1", "death_avoidance", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["scenario"].as_str().unwrap()).collect();
    assert_eq!(names, ["strategy2", "strategy1", "death_avoidance"]);
}

#[test]
fn batch_with_one_bad_scenario_fails_as_a_whole() {
    let o = realize(&["run", "strategy1", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("nope: error: no such file or built-in scenario"));
}

#[test]
fn statutory_and_annual_flags() {
    let o = realize(&["run", "strategy3", "--rates", "statutory", "--window", "annual:10", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totals"]["total_tax"], 49_500_000);
}

#[test]
fn grid_formats() {
    let csv = stdout(&realize(&["grid", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.lines().nth(1).unwrap().starts_with("10000,2500,2500,10000,-7500,10000,2500,7500"));
    let json: serde_json::Value = serde_json::from_slice(&realize(&["grid", "--format", "json"]).stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 7);
}

#[test]
fn paper_tables_have_the_published_rows() {
    let lines = squeezed(&stdout(&realize(&["paper-tables"])));
    for row in [
        "Capital Gains Tax 5 500,000",
        "Capital Loss 70 7,000,000",
        "Capital Gain (time 3) 70 7,000,000",
        "25 100 -75 100 25 75",
        "175 100 75 100 175 -75",
        "Net Capital Gain 0 0",
        "Capital Loss (time 3) (20) (2,000,000.00)",
        "Capital Loss from Disposition of Owned Shares (time 3) 20 2,000,000.00",
        "Net Capital Loss (time 3) 30 3,000,000.00",
        "Capital Gains Tax (time 2) 5 500,000",
        "Proposed Rule, Total 12 1,200,000",
        "Existing Rule, Total 5 500,000",
    ] {
        assert!(lines.iter().any(|l| l == row), "missing row `{row}`");
    }
}
