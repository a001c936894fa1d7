use andloc::cli::{preset, run, RunConfig, PRESETS};
use andloc::fss::{render_row, scaling_model, Confidence, DataPoint, ExpansionOrder, FitReport, FitResult, Interval, Params};
use andloc::transfer::{read_csv, write_csv, ScanPoint};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn andloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_andloc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn every_preset_round_trips() {
    assert!(PRESETS.len() >= 8);
    for (name, text) in PRESETS {
        let cfg = RunConfig::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canon = cfg.canonical().unwrap();
        let again = RunConfig::parse(&canon).unwrap();
        assert_eq!(again, cfg, "{name}");
        assert_eq!(again.canonical().unwrap(), canon, "{name}");
    }
    assert_eq!(preset("table1-desk").unwrap(), preset("table1-3d-aii").unwrap());
    assert!(preset("nope").is_err());
}

#[test]
fn config_errors_are_field_level() {
    let no_seed = "task = \"lambda-scan\"\n[model]\nclass = \"AI\"\ndim = 2\nwidths = [4]\nw_grid = [8.0]\n[transfer]\nmax_slices = 1000\n";
    assert!(RunConfig::parse(no_seed).unwrap_err().to_string().contains("seed"));
    let no_transfer = "task = \"lambda-scan\"\nseed = 1\n[model]\nclass = \"AI\"\ndim = 2\nwidths = [4]\nw_grid = [8.0]\n";
    assert!(RunConfig::parse(no_transfer).unwrap_err().to_string().contains("[transfer]"));
    let typo = format!("{no_transfer}[transfer]\nmax_slices = 1000\nqr_intervall = 4\n");
    assert!(RunConfig::parse(&typo).unwrap_err().to_string().contains("qr_intervall"));
}

fn scan_config(widths: &str, w_grid: &str, fss: bool) -> String {
    let mut s = format!(
        "task = \"lambda-scan\"\nseed = 7\n\n[model]\nclass = \"AI\"\ndim = 2\nwidths = {widths}\nw_grid = {w_grid}\n\n\
         [transfer]\nqr_interval = 4\ntarget_rel_error = 0.01\nmax_slices = 8192\n"
    );
    if fss {
        s.push_str("\n[fss]\norders = [\"1,2,0,0\"]\nwindow = 0.5\nresamples = 200\ninclude_unconverged = true\n");
    }
    s
}

#[test]
fn one_point_scan_writes_one_row_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(&scan_config("[4]", "[9.0]", false)).unwrap();
    let m = run(&cfg, dir.path(), 1).unwrap();
    let rows = read_csv(fs::File::open(dir.path().join("scan.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].l, rows[0].w), (4, 9.0));
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let on_disk: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(on_disk["config_digest"], m.config_digest);
    assert!(m.finished.is_some());
    assert!(m.tasks.iter().all(|t| t.status == "done" && t.seed == 7));
    for o in &m.outputs {
        use sha2::{Digest, Sha256};
        let bytes = fs::read(dir.path().join(&o.path)).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, o.sha256, "{}", o.path);
    }
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn pipeline_is_byte_identical_across_reruns_and_workers() {
    let text = scan_config("[4, 6, 8]", "[7.0, 8.0, 9.0, 10.0, 11.0]", true);
    let cfg = RunConfig::parse(&text).unwrap();
    let mut seen = Vec::new();
    for workers in [1, 4, 1] {
        let dir = tempfile::tempdir().unwrap();
        let m = run(&cfg, dir.path(), workers).unwrap();
        let files = outputs(dir.path());
        assert!(files.contains_key("scan.csv") && files.contains_key("fit.json"), "{:?}", files.keys());
        seen.push((files, m.config_digest, m.outputs));
    }
    for s in &seen[1..] {
        assert_eq!(s.0, seen[0].0);
        assert_eq!(s.1, seen[0].1);
        assert_eq!(s.2, seen[0].2);
    }
}

#[test]
fn binary_run_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scan.toml");
    fs::write(&cfg_path, scan_config("[4]", "[9.0, 10.0]", false)).unwrap();
    let out = dir.path().join("out");
    let o = andloc(&["run", cfg_path.to_str().unwrap(), "--workers", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("scan.csv").exists() && out.join("manifest.json").exists());
    assert!(o.stdout.is_empty());

    // configuration errors
    fs::write(&cfg_path, "task = \"lambda-scan\"\n").unwrap();
    assert_eq!(code(&andloc(&["run", cfg_path.to_str().unwrap()])), 2);
    assert_eq!(code(&andloc(&["run", "/nonexistent/cfg.toml"])), 2);
    assert_eq!(code(&andloc(&["frobnicate"])), 2);
    assert_eq!(code(&andloc(&["preset", "nope"])), 2);

    // numerical failure: the QR interval is far outside the safe range
    let bad = "task = \"lambda-scan\"\nseed = 1\n[model]\nclass = \"AI\"\ndim = 3\nwidths = [4]\nw_grid = [30.0]\n\
               [transfer]\nqr_interval = 128\nmax_slices = 1024\n";
    fs::write(&cfg_path, bad).unwrap();
    let o = andloc(&["run", cfg_path.to_str().unwrap(), "--out", dir.path().join("bad").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bad/manifest.json")).unwrap()).unwrap();
    assert!(manifest["tasks"][0]["status"].as_str().unwrap().starts_with("failed"));
}

#[test]
fn presets_are_listed() {
    let o = andloc(&["preset"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8(o.stdout).unwrap();
    for (n, _) in PRESETS {
        assert!(names.lines().any(|l| l == *n));
    }
    let o = andloc(&["preset", "table1-2d-diii"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), preset("table1-2d-diii").unwrap());
}

#[test]
fn classify_through_files() {
    let dir = tempfile::tempdir().unwrap();
    // a real non-symmetric matrix: TRS with U = 1, so class AI
    let m = dir.path().join("h.csv");
    fs::write(&m, "# real 2x2\n1,0,2,0\n-0.5,0,3,0\n").unwrap();
    let ops = dir.path().join("ops.json");
    fs::write(&ops, r#"[{"kind": "TRS", "u": "identity"}]"#).unwrap();
    let o = andloc(&["classify", m.to_str().unwrap(), "--ops", ops.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "AI");
    assert_eq!(v["residuals"][0]["residual"], 0.0);

    // an explicit unitary that the matrix does not respect is reported and ignored
    fs::write(&ops, r#"[{"kind": "CS", "u": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}]"#).unwrap();
    let o = andloc(&["classify", m.to_str().unwrap(), "--ops", ops.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "A");
    assert!(v["residuals"][0]["residual"].as_f64().unwrap() > 1.0);

    // TRS holding with both signs cannot be classified
    let one = dir.path().join("one.csv");
    fs::write(&one, "1,0,0,0\n0,0,1,0\n").unwrap();
    fs::write(&ops, r#"[{"kind": "TRS", "u": "identity"}, {"kind": "TRS", "u": "spin_y"}]"#).unwrap();
    assert_eq!(code(&andloc(&["classify", one.to_str().unwrap(), "--ops", ops.to_str().unwrap()])), 3);

    fs::write(&ops, r#"[{"kind": "XYZ", "u": "identity"}]"#).unwrap();
    assert_eq!(code(&andloc(&["classify", m.to_str().unwrap(), "--ops", ops.to_str().unwrap()])), 2);
}

fn synthetic_scan() -> Vec<ScanPoint> {
    let mut p = Params::initial(ExpansionOrder::new(1, 2, 0, 0).unwrap(), 8.0, 1.2, 1.0, 0.6);
    p.b1[1] = -0.3;
    let mut rows = Vec::new();
    for l in [4, 6, 8, 10] {
        for k in 0..9 {
            let w = 7.0 + 0.25 * k as f64;
            let lam = scaling_model(&p, w, l as f64);
            // deterministic ±1σ pattern
            let sigma = 1e-3 * lam;
            let jitter = if (l + k) % 2 == 0 { 0.5 } else { -0.5 };
            rows.push(ScanPoint {
                class: "AI".into(),
                dim: 3,
                e_re: 0.0,
                e_im: 0.0,
                w,
                l,
                lambda: lam + jitter * sigma,
                sigma_lambda: sigma,
                slices: 1000,
                converged: true,
            });
        }
    }
    rows
}

#[test]
fn fit_and_report_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("scan.csv");
    write_csv(&synthetic_scan(), fs::File::create(&data).unwrap()).unwrap();
    let fit = dir.path().join("fit.json");
    let o = andloc(&["fit", data.to_str().unwrap(), "--orders", "1,2,0,0", "--out", fit.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<FitReport> = serde_json::from_str(&fs::read_to_string(&fit).unwrap()).unwrap();
    assert_eq!(reports.len(), 1);
    assert!((reports[0].fit.w_c - 8.0).abs() < 0.01);

    let o = andloc(&["report", fit.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("AI | 0 | 4-10 | (1,2,0,0) | "), "{row}");
    assert!(row.ends_with(']'));

    let o = andloc(&["fit", data.to_str().unwrap(), "--orders", "1,2,0,0", "--resamples", "0"]);
    let reports: Vec<FitReport> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(reports[0].fit.confidence.is_none());

    fs::write(&fit, "{\"class\": \"AI\"}").unwrap();
    assert_eq!(code(&andloc(&["report", fit.to_str().unwrap()])), 2);
}

fn interval(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

#[test]
fn table_row_layout() {
    // 3D AII, E = 0, L = 8-18, order (2,3,0,0), GOF 0.10
    let order = ExpansionOrder::new(2, 3, 0, 0).unwrap();
    let params = Params::initial(order, 6.3201, 0.8745, 1.0, 0.9358);
    let fit = FitResult {
        order,
        w_c: 6.3201,
        nu: 0.8745,
        y: None,
        lambda_c: 0.9358,
        lambda_c_lmin: None,
        l_min: 8.0,
        l_max: 18.0,
        chi2: 0.0,
        gof: 0.10,
        n_d: 40,
        n_p: 7,
        confidence: Some(Confidence {
            w_c: interval(6.3193, 6.3208),
            nu: interval(0.8710, 0.8783),
            y: None,
            lambda_c: interval(0.9346, 0.9371),
            lambda_c_lmin: None,
            a: vec![],
            b1: vec![],
            b2: vec![],
            resamples: 200,
            failed: 0,
            unreliable: false,
        }),
        iterations: 1,
        converged: true,
        rank_deficient: false,
        starts: 1,
        warnings: vec![],
        params,
    };
    let data = [DataPoint::new(6.3, 8.0, 0.93, 0.001).unwrap()];
    let report = FitReport::new("AII", 0.0, 0.0, &data, fit.clone());
    let (line, warnings) = render_row(&report).unwrap();
    assert_eq!(line, "AII | 0 | 8-18 | (2,3,0,0) | 0.10 | 6.3201[6.3193, 6.3208] | 0.8745[0.8710, 0.8783] | - | 0.9358[0.9346, 0.9371]");
    assert!(warnings.is_empty());

    let bare = FitReport::new("AII", 0.0, 0.0, &data, FitResult { confidence: None, ..fit });
    let (line, warnings) = render_row(&bare).unwrap();
    assert!(line.contains("6.3201 | 0.8745 | - | 0.9358"), "{line}");
    assert_eq!(warnings.len(), 1);
}
