use std::path::Path;
use std::process::{Command, Output};

fn epitrend(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epitrend"))
        .args(args)
        .env("EPITREND_FIXTURE", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn r0_for_one_region_and_interval() {
    let o = epitrend(&["r0", "--si", "sars", "--region", "Italy", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("region,source,sars,sars_lower,sars_upper"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], &["Italy", "fitted"]);
    let r0: f64 = row[2].parse().unwrap();
    assert!((r0 - 3.08).abs() < 0.01, "{r0}");
    assert!(lines.next().is_none());
}

#[test]
fn raw_r0_skips_the_model() {
    let o = epitrend(&["r0", "--raw", "--region", "Hubei,Italy", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["source"] == "raw"));
    assert!(rows[1]["avg"].as_f64().unwrap() > 2.0);
}

#[test]
fn exit_codes() {
    assert_eq!(epitrend(&["nonsense"]).status.code(), Some(2));
    assert_eq!(epitrend(&["r0", "--region", "Atlantis"]).status.code(), Some(2));
    assert_eq!(epitrend(&["scan", "--holdout", "0"]).status.code(), Some(2));
    assert_eq!(epitrend(&["--help"]).status.code(), Some(0));
    // Italy has no cases yet on that date, Hubei does
    let o = epitrend(&[
        "fit", "--order", "0,1,0", "--eta", "2020-01-28", "--region", "Italy,Hubei", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Italy: design:"));
    assert!(stdout(&o).lines().skip(1).all(|l| l.starts_with("China/Hubei,")));
}

#[test]
fn missing_data_source_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_epitrend"))
        .arg("ingest")
        .env_remove("EPITREND_FIXTURE")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no data source"));
}

#[test]
fn ingest_text_table() {
    let o = epitrend(&["ingest", "--region", "Hubei", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(2).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[0], "China/Hubei");
    assert_eq!(cols[5], "67800");
    assert_eq!(cols[9], "2020-01-23");
}

#[test]
fn scan_dumps_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = epitrend(&[
        "scan", "--region", "Italy", "--p-max", "1", "--q-max", "1", "--dump-grid", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary = read_csv(&dir.path().join("scan.csv"));
    assert_eq!(summary.len(), 1);
    let grid = read_csv(&dir.path().join("grid").join("Italy.csv"));
    let etas = grid.iter().map(|r| r[3].to_string()).collect::<std::collections::BTreeSet<_>>();
    // 2 values of d by 2 of p by 2 of q per changepoint
    assert_eq!(grid.len(), etas.len() * 8);
    let selected: Vec<_> = grid.iter().filter(|r| &r[8] == "true").collect();
    assert_eq!(selected.len(), 1);
    assert_eq!(&selected[0][4], &summary[0][3]);
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "# fixed model\nfixture = true\nregion = South Korea\norder = 1,1,0\neta = 2020-02-20\nsi = avg\nformat = csv\nout = results\n",
    )
    .unwrap();
    let o = epitrend(&["r0", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("results").join("r0.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "Korea, South");
}

#[test]
fn diagnose_notes_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = epitrend(&["diagnose", "--region", "Italy", "--dump-json", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("diagnose.csv"));
    assert_eq!(&rows[0][7], "3");
    assert!(rows[0][8].parse::<f64>().unwrap() > 0.0);
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("diagnostics").join("Italy.json")).unwrap()).unwrap();
    assert!(json["acf"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn plot_data_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = epitrend(&["plot-data", "--region", "Hubei", "--order", "1,1,0", "--svg", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let heat = read_csv(&dir.path().join("heatmap.csv"));
    let hubei = heat.iter().find(|r| &r[1] == "Hubei").unwrap();
    let log: f64 = hubei[4].parse().unwrap();
    assert!((log - 1145.85f64.ln()).abs() < 1e-3, "{log}");
    assert!(dir.path().join("logprev").join("China_Hubei.csv").exists());
    let svg = std::fs::read_to_string(dir.path().join("svg").join("China_Hubei.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(read_csv(&dir.path().join("markers.csv")).len(), 1);
}
