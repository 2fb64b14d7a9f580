use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cubic-lab"));
    c.env_remove("CUBIC_LAB_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn csv_rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ratio(v: &Value) -> (i128, i128) {
    (v["num"].as_str().unwrap().parse().unwrap(), v["den"].as_str().unwrap().parse().unwrap())
}

#[test]
fn cantor_reports_exact_thickness_and_rejects_bad_m() {
    let tmp = TempDir::new().unwrap();
    let bad = run(&["cantor", "--m", "5"], &tmp.path().join("bad"));
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("even and at least 6"));
    assert!(!tmp.path().join("bad").exists());

    let o6 = run(&["cantor", "--m", "6", "--gen", "3"], &tmp.path().join("m6"));
    let r6 = json(tmp.path().join("m6/thickness.json"));
    // Exit status follows the claimed bound check.
    let holds = r6["bound_holds"].as_bool().unwrap();
    assert_eq!(code(&o6), if holds { 0 } else { 1 });
    assert_eq!(r6["claimed_bound"]["num"], "342");
    assert_eq!(r6["claimed_bound"]["den"], "11");
    assert_eq!(ratio(&r6["thickness"]), (49, 3));
    assert_eq!(r6["thickness_by_generation"].as_array().unwrap().len(), 3);

    run(&["cantor", "--m", "8", "--gen", "2"], &tmp.path().join("m8"));
    let r8 = json(tmp.path().join("m8/thickness.json"));
    let (a, b) = ratio(&r8["thickness"]);
    let (c, d) = ratio(&r6["thickness"]);
    assert!(a * d > c * b, "m = 8 thickness {a}/{b} should exceed m = 6 thickness {c}/{d}");

    let (header, rows) = csv_rows(tmp.path().join("m6/intervals.csv"));
    assert_eq!(header[0], "generation");
    assert!(rows.iter().filter(|r| r[0] == "1").count() == 6);
}

#[test]
fn renorm_rate_and_closed_form() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["renorm"], &tmp.path().join("q"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(tmp.path().join("q/decay.json"));
    let xi = 0.5f64.sqrt();
    assert!((d["slope"].as_f64().unwrap() - xi.ln()).abs() <= 0.05);
    assert!(d["certified"].as_bool().unwrap());

    let o = run(&["renorm", "--perturbation", "none"], &tmp.path().join("none"));
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(tmp.path().join("none/residuals.csv"));
    let h2 = header.iter().position(|h| h == "sup_H2").unwrap();
    for r in &rows {
        let n: i32 = r[0].parse().unwrap();
        let got: f64 = r[h2].parse().unwrap();
        let want = 2.0 * 0.4f64.powi(n);
        assert!((got / want - 1.0).abs() < 1e-10, "n = {n}: {got} vs {want}");
    }
    assert_eq!(rows.len(), 11);

    for args in [&["renorm", "--set", "lambda=0.6"][..], &["renorm", "--n-min", "0"][..]] {
        let o = run(args, &tmp.path().join("bad"));
        assert_eq!(code(&o), 2, "{args:?}");
    }
}

#[test]
fn attractor_saddles_and_exponent_signs() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["attractor", "--a", "2.8", "--b", "0.1"], &tmp.path().join("chaos"));
    assert_eq!(code(&o), 0);
    let l = json(tmp.path().join("chaos/lyapunov.json"));
    assert_eq!(l["saddle_fixed_points"], 3);
    assert!(l["exponent"].as_f64().unwrap() > 0.0);
    let (_, fixed) = csv_rows(tmp.path().join("chaos/fixed_points.csv"));
    assert!(fixed.iter().all(|r| r[6] == "saddle"));

    run(&["attractor", "--a", "0.5", "--b", "0.1", "--steps", "100000"], &tmp.path().join("sink"));
    assert!(json(tmp.path().join("sink/lyapunov.json"))["exponent"].as_f64().unwrap() <= 0.0);

    assert_eq!(code(&run(&["attractor", "--b", "0"], &tmp.path().join("b0"))), 2);

    // An unbounded orbit is flagged and its partial artifacts kept.
    let o = run(&["attractor", "--a", "4", "--b", "1.5", "--steps", "100000"], &tmp.path().join("esc"));
    assert_eq!(code(&o), 1);
    assert_eq!(json(tmp.path().join("esc/lyapunov.json"))["bounded"], false);
    assert!(!csv_rows(tmp.path().join("esc/attractor.csv")).1.is_empty());
    assert!(tmp.path().join("esc/manifest.json").exists());
}

#[test]
fn tangency_scan_classifies_both_events() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["tangency"], &tmp.path().join("t"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(tmp.path().join("t/summary.json"));
    let tol = s["upper_slope_tolerance"].as_f64().unwrap();
    let (header, rows) = csv_rows(tmp.path().join("t/events.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let upper: Vec<_> = rows.iter().filter(|r| r[0] == "upper").collect();
    let lower: Vec<_> = rows.iter().filter(|r| r[0] == "lower").collect();
    assert_eq!((upper.len(), lower.len()), (1, 1));
    assert_eq!(upper[0][col("classification")], "contact_making");
    let slope: f64 = upper[0][col("gap_slope")].parse().unwrap();
    assert!((slope - 0.9).abs() <= tol, "{slope} vs 0.9 +- {tol}");
    assert_eq!(lower[0][col("classification")], "contact_breaking");
}

#[test]
fn tangency_empty_range_and_coupling_warning() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["tangency", "--t-steps", "0"], &tmp.path().join("empty"));
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(tmp.path().join("empty/events.csv")).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("side,t,nu_bar"));

    let o = run(&["tangency", "--n", "2", "--t-steps", "0"], &tmp.path().join("coupled"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerances are widened"));
}

#[test]
fn verify_names_injected_failure_and_honours_skip() {
    let tmp = TempDir::new().unwrap();
    let heavy = "cantor,conjugacy,renorm,tangency,wangyoung,attractor,invariants";
    let cfg = tmp.path().join("wrong.toml");
    fs::write(&cfg, "experiment = \"verify\"\n[params]\ndcrit_dmu = 2.0\n").unwrap();
    let o = bin()
        .args(["verify", "--skip", heavy, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("inj"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("criterion 4 (Velocity table) failed: dcrit_plus_dmu"), "{err}");

    let skip = "cantor,conjugacy,renorm,velocity,tangency,wangyoung,invariants,lyapunov";
    let o = run(&["verify", "--skip", skip], &tmp.path().join("skip"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(tmp.path().join("skip/verify.json"));
    let attractor = r["criteria"].as_array().unwrap().iter().find(|c| c["key"] == "attractor").unwrap();
    assert_eq!(attractor["status"], "pass");
    let lyap = attractor["checks"].as_array().unwrap().iter().find(|c| c["key"] == "lyapunov").unwrap();
    assert_eq!(lyap["status"], "skipped");
    assert!(String::from_utf8_lossy(&o.stdout).contains("skipped: lyapunov"));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn runs_replay_byte_identically_and_embed_the_hash() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["cantor", "--m", "6", "--gen", "2"][..],
        &["renorm", "--n-max", "8"][..],
        &["attractor", "--steps", "20000"][..],
    ] {
        let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
        run(args, &a);
        let o = bin().args(args).args(["--threads", "1", "--out"]).arg(&b).output().unwrap();
        assert!(o.status.code().is_some());
        assert_eq!(artifacts(&a), artifacts(&b), "{args:?}");
        // Replay from the manifest alone.
        let o = bin().args([args[0], "--config"]).arg(a.join("manifest.json")).arg("--out").arg(&c).output().unwrap();
        assert!(o.status.code().is_some());
        assert_eq!(artifacts(&a), artifacts(&c), "{args:?} replay");

        let manifest = json(a.join("manifest.json"));
        let hash = manifest["config_hash"].as_str().unwrap();
        assert_eq!(hash.len(), 64);
        for entry in manifest["artifacts"].as_array().unwrap() {
            let name = entry["file"].as_str().unwrap();
            let path = a.join(name);
            if name.ends_with(".csv") {
                let (header, rows) = csv_rows(path);
                assert_eq!(header.last().unwrap(), "config_hash");
                assert!(rows.iter().all(|r| r.last().unwrap() == hash), "{name}");
            } else {
                assert_eq!(json(path)["config_hash"], hash, "{name}");
            }
        }
        for d in [a, b, c] {
            fs::remove_dir_all(d).unwrap();
        }
    }
}

#[test]
fn config_validation_and_output_directory() {
    let tmp = TempDir::new().unwrap();
    let write = |name: &str, body: &str| {
        let p = tmp.path().join(name);
        fs::write(&p, body).unwrap();
        p
    };
    let cases = [
        write("unknown.toml", "experiment = \"cantor\"\n[params]\nmm = 8\n"),
        write("toplevel.toml", "experiment = \"cantor\"\nextra = 1\n"),
        write("other.toml", "experiment = \"renorm\"\n"),
        write("typed.toml", "[params]\nm = \"six\"\n"),
        write("seed.toml", "seed = 3\n"),
    ];
    for cfg in &cases {
        let o = bin().args(["cantor", "--config"]).arg(cfg).arg("--out").arg(tmp.path().join("x")).output().unwrap();
        assert_eq!(code(&o), 2, "{}", cfg.display());
    }

    let cfg = write("ok.toml", "experiment = \"cantor\"\n[params]\nm = 8\ngeneration = 1\n");
    let env_dir = tmp.path().join("from-env");
    let o = bin().args(["cantor", "--config"]).arg(&cfg).env("CUBIC_LAB_OUT", &env_dir).output().unwrap();
    assert!(o.status.code().is_some());
    let m = json(env_dir.join("manifest.json"));
    assert_eq!(m["config"]["params"]["m"], 8);
    assert_eq!(m["schema_version"], 1);

    // Flags override the config file.
    let o = bin().args(["cantor", "--m", "10", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("flag")).output();
    assert!(o.unwrap().status.code().is_some());
    assert_eq!(json(tmp.path().join("flag/manifest.json"))["config"]["params"]["m"], 10);
}
