use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stt_ecc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stt-ecc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

const CONFIG: &str = r#"
workload = "float64-walk"
records = 1500
workload_seed = 4
mc_enabled = true
mc_trials = 50
seed = 9
warmup = 256
out = "report"
"#;

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    let o = stt_ecc(&["run", "--config", "exp.toml"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("report");

    let hist = rows(&out.join("histogram.csv"));
    assert_eq!(hist.len(), 512);
    assert!(hist.iter().enumerate().all(|(i, r)| r[0] == i.to_string()));

    let rates = rows(&out.join("error_rates.csv"));
    assert_eq!(
        rates.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["per-word", "interleaved", "robin"]
    );
    for r in &rates {
        let v: Vec<f64> = r[1..].iter().map(|s| s.parse().unwrap()).collect();
        let recomputed = (v[0] / v[1] - 1.0) * 100.0;
        assert!((recomputed - v[2]).abs() <= 1e-4 * v[2].abs().max(1.0), "{r:?}");
        assert!(v[4] >= 0.0);
    }

    let stats = rows(&out.join("codeword_stats.csv"));
    assert_eq!(stats.len(), 3 * 14);

    let hist_svg = read(&out.join("histogram.svg"));
    assert!(hist_svg.contains("class=\"series\""));
    assert_eq!(hist_svg.matches("class=\"word-boundary\"").count(), 9);
    let var_svg = read(&out.join("variation.svg"));
    assert_eq!(var_svg.matches("class=\"scheme-group\"").count(), 3);
    assert_eq!(var_svg.matches("class=\"bar\"").count(), 9);
    let inc_svg = read(&out.join("error_increase.svg"));
    assert_eq!(inc_svg.matches("class=\"mc-error\"").count(), 3);
    for s in ["histogram.svg", "variation.svg", "error_increase.svg"] {
        assert!(read(&out.join(s)).trim_start().starts_with("<svg"), "{s}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    for out in ["a", "b"] {
        assert_eq!(
            code(&stt_ecc(&["run", "--config", "exp.toml", "--out", out], dir.path())),
            0
        );
    }
    for f in [
        "histogram.csv",
        "codeword_stats.csv",
        "error_rates.csv",
        "optimal_bounds.csv",
        "error_increase.svg",
    ] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn identical_writes_give_zero_rates() {
    let dir = tempfile::tempdir().unwrap();
    let line = format!(r#"{{"addr":"0x1000","data":"{}"}}"#, "5a".repeat(64));
    fs::write(dir.path().join("same.jsonl"), format!("{line}\n").repeat(20)).unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "trace = \"same.jsonl\"\nwarmup = 1\nmc_enabled = true\nmc_trials = 10\n",
    )
    .unwrap();
    let o = stt_ecc(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for r in rows(&dir.path().join("report/error_rates.csv")) {
        assert_eq!(&r[1..5], ["0", "0", "0", "0"], "{r:?}");
    }
    assert!(rows(&dir.path().join("report/histogram.csv"))
        .iter()
        .all(|r| r[1] == "0"));
}

#[test]
fn gen_then_run_on_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = stt_ecc(
        &[
            "gen",
            "--kind",
            "irregular",
            "--n",
            "400",
            "--seed",
            "3",
            "--out",
            "t.bin",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert_eq!(fs::metadata(dir.path().join("t.bin")).unwrap().len(), 5 + 72 * 400);
    fs::write(dir.path().join("c.toml"), "trace = \"t.bin\"\nschemes = [\"robin\"]\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "c.toml"], dir.path())), 0);
    assert_eq!(rows(&dir.path().join("report/error_rates.csv")).len(), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&stt_ecc(&["run", "--config", "missing.toml"], p)), 1);
    fs::write(p.join("bad.toml"), "workload = \"float64-walk\"\nbogus = 1\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "bad.toml"], p)), 1);
    fs::write(p.join("both.toml"), "workload = \"irregular\"\ntrace = \"x.bin\"\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "both.toml"], p)), 1);
    fs::write(p.join("pw.toml"), "workload = \"irregular\"\npw = 1.5\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "pw.toml"], p)), 1);

    fs::write(p.join("absent.toml"), "trace = \"absent.bin\"\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "absent.toml"], p)), 2);
    fs::write(p.join("junk.bin"), b"NOPE\x01").unwrap();
    fs::write(p.join("junk.toml"), "trace = \"junk.bin\"\n").unwrap();
    assert_eq!(code(&stt_ecc(&["run", "--config", "junk.toml"], p)), 2);

    assert_eq!(code(&stt_ecc(&["frobnicate"], p)), 1);
    assert_eq!(code(&stt_ecc(&["verify-partition", "--scheme", "diagonal"], p)), 1);
    assert_eq!(code(&stt_ecc(&["--help"], p)), 0);
}

#[test]
fn self_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["per-word", "interleaved", "robin"] {
        let o = stt_ecc(&["verify-partition", "--scheme", scheme], dir.path());
        assert_eq!(code(&o), 0, "{scheme}");
    }
    let o = stt_ecc(&["codec-selftest", "--words", "20", "--seed", "5"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
