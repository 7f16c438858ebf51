use std::path::Path;
use std::process::{Command, Output};

fn photon_gun(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-gun")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report_value(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in\n{text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn last_row(csv: &str) -> Vec<(String, f64)> {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let row = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap());
    header.into_iter().map(String::from).zip(row).collect()
}

#[test]
fn simulate_headline_summary_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        photon_gun(&["simulate", "--config", "paper_fig2", "--solver", "conditional", "--out", "fig2.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let (pl, pr) = (report_value(&text, "P_L"), report_value(&text, "P_R"));
    assert!((pl - 0.49).abs() < 0.03, "{text}");
    assert_eq!(pl, pr);

    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let last = last_row(&csv);
    let get = |k: &str| last.iter().find(|(h, _)| h == k).unwrap().1;
    assert_eq!(get("t_ns"), 630.0);
    assert!((get("P_L") - get("P_R")).abs() < 1e-12);
    let times: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn master_solver_writes_populations() {
    let dir = tempfile::tempdir().unwrap();
    let out = photon_gun(&["simulate", "--config", "paper_fig2", "--solver", "master", "--out", "m.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(csv.starts_with("t_ns,pop_g1_0_0,"));
    let total = report_value(&stdout(&out), "P_L") + report_value(&stdout(&out), "P_R");
    assert!(total > 0.97, "{total}");
}

#[test]
fn undriven_run_has_zero_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let config = headline_config_text().replace("omega0_mhz = 45.0", "omega0_mhz = 0.0");
    std::fs::write(dir.path().join("dark.toml"), config).unwrap();
    let out = photon_gun(&["simulate", "--config", "dark.toml", "--out", "dark.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("dark.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    for line in csv.lines().skip(1) {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        for key in ["P_L", "P_R", "P_spont"] {
            assert_eq!(row[header.iter().position(|h| *h == key).unwrap()], 0.0);
        }
        assert_eq!(row[header.iter().position(|h| *h == "norm_sq").unwrap()], 1.0);
    }
}

fn headline_config_text() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/paper_fig2.toml")).unwrap()
}

#[test]
fn regime_prints_margins() {
    let out = photon_gun(&["regime", "--config", "paper_fig2"], Path::new("."));
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(report_value(&text, "cooperativity"), 10.0);
    assert_eq!(report_value(&text, "kappa^2/g^2"), 1.0);
    assert_eq!(report_value(&text, "g^2/(kappa gamma)"), 10.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        assert_eq!(
            photon_gun(&["optimize", "--config", "raman_optimize", "--out", name], dir.path()).status.code(),
            Some(0)
        );
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let seq = photon_gun(&["optimize", "--config", "raman_optimize", "--sequential"], dir.path());
    assert_eq!(seq.stdout, a);
}

#[test]
fn config_errors_exit_two_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("gamma_mhz = 4.5", "gamma_mhz = -1.0", "gamma_mhz"),
        ("shape = \"sin2\"\nomega0_mhz = 45.0\nt0_ns = 210.0\n", "", "[pulse]"),
        ("g_mhz = 45.0", "g_mhz = 45.0\ncoupling = 1.0", "coupling"),
    ];
    for (from, to, needle) in cases {
        std::fs::write(dir.path().join("c.toml"), headline_config_text().replacen(from, to, 1)).unwrap();
        let out = photon_gun(&["simulate", "--config", "c.toml"], dir.path());
        assert_eq!(out.status.code(), Some(2));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{needle}: {err}");
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["explode"][..], &["simulate", "--config", "paper_fig2", "--verbose"], &["sweep"]] {
        let out = photon_gun(args, Path::new("."));
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    for sub in ["simulate", "sweep", "optimize", "compare", "regime"] {
        let out = photon_gun(&[sub, "--help"], Path::new("."));
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("--config"));
    }
}

#[test]
fn write_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = photon_gun(&["sweep", "--config", "raman_sweep", "--out", "no/such/dir.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
