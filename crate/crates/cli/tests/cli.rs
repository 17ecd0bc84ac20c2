use std::path::Path;
use std::process::{Command, Output};

fn ecmkit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecmkit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].clone()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_identity(dir: &Path) {
    std::fs::write(
        dir.join("id4.mtx"),
        "%%MatrixMarket matrix coordinate real general\n4 4 4\n1 1 1\n2 2 1\n3 3 1\n4 4 1\n",
    )
    .unwrap();
}

#[test]
fn predict_triad_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(&["predict", "--machine", "a64fx", "--kernel", "triad", "--out", "p.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("p.csv"));
    assert_eq!(num(&column(&rows, "L1")[0]), 2.0);
    assert_eq!(num(&column(&rows, "L2")[0]), 6.0);
    assert!((num(&column(&rows, "MEM")[0]) - 6.0).abs() < 0.3);
    assert_eq!(column(&rows, "n_sat")[0], "3");
}

#[test]
fn predict_domain_wall_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(&["predict", "--kernel", "dw_riri", "--residency", "MEM", "--out", "d.json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    let i = v["columns"].as_array().unwrap().iter().position(|c| c["name"] == "T_ECM").unwrap();
    assert_eq!(v["columns"][i]["unit"], "cy/LUP");
    assert_eq!(v["rows"][0][i].as_f64().unwrap(), 168.0);
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn missing_kernel_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(&["predict", "--kernel", "no/such.toml", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no/such.toml"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn bad_flags_and_values_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["predict", "--kernel", "triad", "--out", "r.txt"][..],
        &["predict", "--kernel", "triad", "--cores", "13"],
        &["predict", "--kernel", "nosuchkernel"],
        &["dw", "--geom", "4,4,5,4,2"],
        &["lc-scan", "--cores", "0:3", "--model-only"],
        &["spmv", "--bogus"],
    ] {
        let o = ecmkit(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(&["simulate", "--trace", "absent.bin"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = ecmkit(&["spmv", "--matrix", "absent.mtx"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn convert_identity_then_run_it() {
    let dir = tempfile::tempdir().unwrap();
    write_identity(dir.path());
    let o = ecmkit(
        &["convert", "--mtx", "id4.mtx", "--C", "2", "--sigma", "2", "--out", "id4.sell", "--report", "c.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("c.csv"));
    assert_eq!(num(&column(&rows, "beta")[0]), 1.0);
    assert!(dir.path().join("id4.sell").exists());

    let o = ecmkit(&["spmv", "--matrix", "id4.sell", "--reps", "0", "--out", "s.csv"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("s.csv"));
    assert_eq!(
        &rows[0][..8],
        ["matrix", "format", "C", "sigma", "threads", "gflops", "intensity", "beta"]
    );
    assert_eq!(column(&rows, "format")[0], "SELL");
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    write_identity(dir.path());
    for (args, out) in [
        (vec!["predict", "--kernel", "copy", "--cores", "4"], "a"),
        (vec!["spmv", "--matrix", "id4.mtx", "--acc", "2", "--reps", "0"], "b"),
        (vec!["dw", "--geom", "2,2,2,2,2", "--check-oracle", "--lc", "--reps", "0"], "c"),
    ] {
        let mut bytes = Vec::new();
        for k in 0..2 {
            let f = format!("{out}{k}.json");
            let mut full = args.clone();
            full.extend(["--out", &f]);
            let o = ecmkit(&full, dir.path());
            assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            bytes.push(std::fs::read(dir.path().join(&f)).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{args:?}");
    }
}

#[test]
fn dw_oracle_and_layer_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(
        &["dw", "--geom", "4,4,4,4,2", "--layout", "rrii", "--check-oracle", "--lc", "--out", "d.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("d.csv"));
    assert_eq!(column(&rows, "oracle")[0], "matrix");
    assert!(num(&column(&rows, "oracle_rel_err")[0]) < 1e-12);
    assert_eq!(column(&rows, "lc_condition")[0], "LC_t");
}

#[test]
fn lc_scan_over_an_extent() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(
        &["lc-scan", "--geom", "4,4,4,8,4", "--dim", "x", "--range", "4:8:2", "--out", "l.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("l.csv"));
    assert_eq!(column(&rows, "Lx"), ["4", "6", "8"]);
    for (p, s) in column(&rows, "V_pred").iter().zip(column(&rows, "V_sim")) {
        // every lattice here fits, so prediction and simulation are compulsory traffic
        assert!((num(p) - num(&s)).abs() / num(p) < 0.1, "{p} vs {s}");
    }
}

#[test]
fn trace_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = ecmkit(&["trace", "--out", "t.bin", "dw", "--geom", "4,4,4,4,2", "--cores", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(
        dir.path().join("cfg.toml"),
        "line_bytes = 256\nl1_capacity = 65536\nl2_capacity = 8388608\nl2_shared_by = 12\n",
    )
    .unwrap();
    let o = ecmkit(
        &["simulate", "--trace", "t.bin", "--config", "cfg.toml", "--units", "512", "--out", "s.json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    let mem = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r[0] == "L2-MEM" && r[1] == "all")
        .unwrap();
    // eight links per site shared by Ls = 2 updates, one input spinor, and
    // the output spinor loaded for write-allocate and written back
    let per_lup = mem[5].as_f64().unwrap();
    assert!((per_lup - (8.0 * 144.0 / 2.0 + 3.0 * 192.0)).abs() < 1.0, "{per_lup}");
}
