//! End-to-end runs of the `avc-sim` binary.

use std::path::Path;
use std::process::{Command, Output};

fn avc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avc-sim")).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, path: &str) -> String {
    std::fs::read_to_string(dir.join(path)).unwrap()
}

fn last_field(line: &str) -> f64 {
    line.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn capacity_dp_row() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.conf", "[channel]\npower = 3\nlambda = 1\nnoise_var = 1\n");
    let out = avc(tmp.path(), &["capacity", "--config", "c.conf", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "o/capacity.csv");
    let row = csv.lines().nth(1).unwrap();
    assert!((last_field(row) - 0.66096).abs() < 5e-6, "{row}");
    let manifest = read(tmp.path(), "o/manifest.jsonl");
    let first: serde_json::Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    assert_eq!(first["mode"], "capacity-dp");
    assert_eq!(first["parameters"]["channel.state_var"]["source"], "default");
    assert_eq!(first["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn config_errors_exit_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, text) in
        ["[channel]\npower = -1\n", "[channel]\npower = 1\npower = 2\n", "[code]\nbogus = 1\n"].iter().enumerate()
    {
        let name = format!("bad{i}.conf");
        write(tmp.path(), &name, text);
        let out = avc(tmp.path(), &["capacity", "--config", &name, "--out", "o"]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
        assert!(!tmp.path().join("o").exists());
    }
    let out = avc(tmp.path(), &["capacity", "--config", "missing.conf", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.conf", "[code]\nn = 512\nrate_fraction = 0.9\nbackend = explicit\n");
    let out = avc(tmp.path(), &["simulate-dp", "--config", "c.conf", "--out", "o", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "dp.conf",
        "seed = 11\n[code]\nn = 64, 128\n[jammer]\nspec = gauss_trunc\nspec = msg_aware+random_dir\n",
    );
    write(tmp.path(), "gp.conf", "seed = 11\n[code]\nn = 64\ncalibration_trials = 50\n");
    for (cmd, conf) in [("simulate-dp", "dp.conf"), ("simulate-gp", "gp.conf")] {
        let a = avc(tmp.path(), &[cmd, "--config", conf, "--out", "a", "--trials", "60", "--jobs", "1"]);
        let b = avc(tmp.path(), &[cmd, "--config", conf, "--out", "b", "--trials", "60", "--jobs", "4"]);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(b.status.code(), Some(0));
        for f in ["trials.csv", "summary.csv"] {
            assert_eq!(read(tmp.path(), &format!("a/{f}")), read(tmp.path(), &format!("b/{f}")), "{cmd} {f}");
        }
        let c = avc(tmp.path(), &[cmd, "--config", conf, "--out", "c", "--trials", "60", "--seed", "12"]);
        assert_eq!(c.status.code(), Some(0));
        assert_ne!(read(tmp.path(), "a/trials.csv"), read(tmp.path(), "c/trials.csv"));
    }
}

#[test]
fn lambda_sweep_is_decreasing_and_flags_bad_points() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.conf", "mode = capacity-dp\n[sweep]\naxis = channel.lambda\nvalues = 0, 0.5, -2, 1, 2, 4\n");
    let out = avc(tmp.path(), &["sweep", "--config", "s.conf", "--out", "o", "--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "o/sweep.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[3].starts_with("channel.lambda,-2,failed,"));
    // one empty field per summary column
    assert!(lines[3].ends_with("\",,,,,"), "{}", lines[3]);
    let caps: Vec<f64> = lines[1..].iter().filter(|l| l.contains(",ok,")).map(|l| last_field(l)).collect();
    assert_eq!(caps.len(), 5);
    assert!(caps.windows(2).all(|w| w[1] < w[0]), "{caps:?}");
    assert!(read(tmp.path(), "o/sweep.svg").contains("<polyline"));
}

#[test]
fn empty_sweep_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.conf", "mode = capacity-dp\n[sweep]\naxis = channel.lambda\nvalues =\n");
    assert_eq!(avc(tmp.path(), &["sweep", "--config", "s.conf", "--out", "o"]).status.code(), Some(2));
    write(tmp.path(), "t.conf", "mode = capacity-dp\n[sweep]\naxis = code.backend\nvalues = 1\n");
    assert_eq!(avc(tmp.path(), &["sweep", "--config", "t.conf", "--out", "o"]).status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn n_sweep_of_the_dirty_paper_code_does_not_increase() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.conf", "mode = simulate-dp\nseed = 3\n[sweep]\naxis = code.n\nvalues = 64, 128, 256\n");
    let out = avc(tmp.path(), &["sweep", "--config", "s.conf", "--out", "o", "--trials", "400"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "o/sweep.csv");
    // err_rate, ci_lo, ci_hi are columns 9..12
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').skip(9).take(3).map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][2]), "{rows:?}");
}

#[test]
fn lemmas_and_gp_capacity_run() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "l.conf", "[lemmas]\nwhich = sphere_cap, hoeffding\nsphere_n = 50\n");
    let out = avc(tmp.path(), &["lemmas", "--config", "l.conf", "--out", "l", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "l/lemmas.csv");
    assert!(csv.starts_with("lemma_id,param_json,n,trials,violations,rate,bound,ci_lo,ci_hi\n"));
    assert_eq!(csv.lines().count(), 1 + 2 + 3);

    write(tmp.path(), "g.conf", "[channel]\nkind = discrete\npreset = stuck_at\np = 0.2\n");
    let out = avc(tmp.path(), &["capacity", "--config", "g.conf", "--out", "g"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let row = read(tmp.path(), "g/capacity.csv").lines().nth(1).unwrap().to_string();
    let c: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((c - 0.8).abs() < 0.01, "{row}");
    assert!(read(tmp.path(), "g/capacity_report.txt").contains("minimizing jammer"));
}
