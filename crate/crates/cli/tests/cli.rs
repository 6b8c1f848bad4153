use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spinchain_cli::config::ExperimentConfig;
use tempfile::TempDir;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> PathBuf {
    crate_dir().join("configs").join(name)
}

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(args)
        .env_remove(spinchain_cli::OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_value(dir: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(dir.join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn shipped_configs_round_trip() {
    let mut n = 0;
    for entry in fs::read_dir(crate_dir().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        n += 1;
    }
    assert!(n >= 4);
}

#[test]
fn cnot_demo_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        let o = spinchain(&["run", "--config", s(&config("cnot-demo.toml")), "--out", s(d.path())]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for label in ["00", "01", "10", "11"] {
        let name = format!("cnot_{label}.csv");
        let x = fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(&name)).unwrap(), "{name}");
        let text = String::from_utf8(x).unwrap();
        let head = text.lines().next().unwrap();
        assert!(head.starts_with("t_ps,pop_000,pop_100,pop_X00,"));
        assert!(head.ends_with(",purity"));
        assert_eq!(head.split(',').count(), 1 + 27 + 1);
    }
    assert!(a.path().join("schedule.txt").exists());
    for label in ["00", "01", "10", "11"] {
        assert!(summary_value(a.path(), &format!("correct_population_{label}")) > 0.98);
    }
    assert!(summary_value(a.path(), "cnot_gate_fidelity_z_control") > 0.98);
}

#[test]
fn compiled_schedule_reproduces_builtin_cnot() {
    let dir = TempDir::new().unwrap();
    let circuit = crate_dir().join("circuits/cnot.circuit");
    let o = spinchain(&["compile", s(&circuit), "--config", s(&config("cnot-demo.toml")), "--out", s(dir.path())]);
    assert!(o.status.success());
    let sched = dir.path().join("schedule.txt");
    let cfg = format!(
        "[chain]\npattern = \"ABC\"\nj = 1.0\n[experiment]\nname = \"cnot-demo\"\nschedule = {:?}\n",
        s(&sched)
    );
    fs::write(dir.path().join("from_schedule.toml"), cfg).unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(spinchain(&["run", "--config", s(&dir.path().join("from_schedule.toml")), "--out", s(&out_a)]).status.success());
    assert!(spinchain(&["run", "--config", s(&config("cnot-demo.toml")), "--out", s(&out_b)]).status.success());
    for label in ["00", "01", "10", "11"] {
        let name = format!("cnot_{label}.csv");
        assert_eq!(fs::read(out_a.join(&name)).unwrap(), fs::read(out_b.join(&name)).unwrap());
    }
}

#[test]
fn compile_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ue = spinchain(&["compile", s(&crate_dir().join("circuits/ue.circuit"))]);
    assert!(ue.status.success());
    assert!(stdout(&ue).lines().next().unwrap().contains("B:idle()"));

    let empty = dir.path().join("empty.circuit");
    fs::write(&empty, "").unwrap();
    let o = spinchain(&["compile", s(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");

    let bad = dir.path().join("bad.circuit");
    fs::write(&bad, "Ue B\nRy A 1.0\n").unwrap();
    let o = spinchain(&["compile", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = dir.path().join("absent.circuit");
    assert_eq!(spinchain(&["compile", s(&missing)]).status.code(), Some(1));
}

#[test]
fn schema_violation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[chain]\npattern = \"ABC\"\nj = 1.0\n[pulses]\nraman_rabi = -3.0\n[experiment]\nname = \"circuit\"\n").unwrap();
    let o = spinchain(&["run", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pulses.raman_rabi"));
}

#[test]
fn report_filter_and_corrupted_coupling() {
    let o = spinchain(&["report", "--filter", "raman"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("[PASS]") && out.contains("raman-rate"));
    assert_eq!(out.lines().filter(|l| l.starts_with('[')).count(), 1);

    let o = spinchain(&["report", "--config", s(&config("corrupted-j.toml")), "--filter", "entangling"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("[FAIL]"));

    assert_eq!(spinchain(&["report", "--filter", "no-such-criterion"]).status.code(), Some(1));
}

#[test]
fn env_overrides_config_output() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(["run", "--config", s(&config("crosstalk-demo.toml"))])
        .env(spinchain_cli::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["crosstalk_uncorrected.csv", "crosstalk_corrected.csv", "summary.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(summary_value(dir.path(), "corrected_other_population_change") < 0.01);
    assert!(summary_value(dir.path(), "uncorrected_other_population_change") > 0.4);
}

#[test]
fn purity_sweep_writes_one_csv_per_alpha() {
    let dir = TempDir::new().unwrap();
    let o = spinchain(&["run", "--config", s(&config("purity-sweep.toml")), "--out", s(dir.path())]);
    assert!(o.status.success());
    for a in ["0.5", "0.25", "0.1"] {
        let csv = fs::read_to_string(dir.path().join(format!("purity_alpha_{a}.csv"))).unwrap();
        let last = csv.lines().last().unwrap();
        let purity: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.5..=1.0).contains(&purity), "{a}: {purity}");
    }
}

#[test]
fn sweep_is_point_addressed_and_job_independent() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = config("detuning-sweep.toml");
    assert!(spinchain(&["sweep", "--config", s(&cfg), "--out", s(a.path()), "--jobs", "1"]).status.success());
    assert!(spinchain(&["sweep", "--config", s(&cfg), "--out", s(b.path()), "--jobs", "3"]).status.success());
    let index = fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    assert_eq!(index.lines().count(), 5);
    assert_eq!(index, fs::read_to_string(b.path().join("sweep.csv")).unwrap());
    for p in 0..4 {
        let f = format!("point_{p:03}/cnot_11.csv");
        assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{f}");
    }
    assert_eq!(spinchain(&["sweep", "--config", s(&config("cnot-demo.toml")), "--out", s(a.path())]).status.code(), Some(1));
}
