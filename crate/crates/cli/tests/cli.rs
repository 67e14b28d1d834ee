use std::path::Path;
use std::process::Command;

use ehrelay_cli::config::ExperimentConfig;
use ehrelay_cli::{report, sweep};

const FIG1_LIKE: &str = r#"
metric = "outage"
lambda = 0.75
sweep_axis = "snr_db"
sweep_start = 0.0
sweep_stop = 30.0
sweep_steps = 7
methods = ["mc", "exact_quadrature", "lower_bound", "upper_bound", "non_coop"]
mc_n = 1000000
"#;

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

fn ehrelay(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ehrelay"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn fig1_config_validates() {
    let (_, rep) = report::validate(&cfg(FIG1_LIKE)).unwrap();
    assert_eq!(rep.verdicts.len(), 7);
    assert!(rep.passed(), "{}", rep.render());
}

#[test]
fn bounds_bracket_exact_on_every_row() {
    let rows = sweep::run_sweep(&cfg(FIG1_LIKE)).unwrap().rows;
    for pt in rows.chunks(5) {
        let (exact, lo, hi) = (pt[1].value, pt[2].value, pt[3].value);
        assert!(lo <= exact + 1e-12 && exact <= hi + 1e-12, "{pt:?}");
    }
}

#[test]
fn corrupted_coefficient_fails_validation() {
    // epsilon shifted so that b grows by 0.1
    let corrupt = |p: &ehrelay_core::model::SystemParams| {
        let mut q = *p;
        q.epsilon += 0.1 * (1.0 - p.lambda) / p.lambda;
        q
    };
    let c = cfg(FIG1_LIKE);
    let p = c.point(10.0).unwrap().params;
    assert!((corrupt(&p).coeffs().b - p.coeffs().b - 0.1).abs() < 1e-12);
    let (_, rep) = report::validate_with(&c, &corrupt).unwrap();
    assert!(!rep.passed());
}

#[test]
fn zero_rate_passes_trivially() {
    let c = cfg(&format!("{FIG1_LIKE}\nt1 = 0.0\nt2 = 0.0\n"));
    let (result, rep) = report::validate(&c).unwrap();
    assert!(result.rows.iter().all(|r| r.value == 0.0));
    assert!(rep.passed());
}

#[test]
fn lambda_star_capacity_and_flat_grid() {
    let cap = cfg(r#"
metric = "capacity"
snr_db = 20.0
sweep_axis = "lambda"
sweep_start = 0.05
sweep_stop = 0.95
sweep_steps = 19
methods = ["capacity_quadrature"]
"#);
    let s = report::find_lambda_star(&cap).unwrap();
    assert!((0.3..=0.6).contains(&s.lambda), "{s:?}");
    assert!(s.bracket.0 < s.lambda && s.lambda < s.bracket.1);

    let flat = cfg(r#"
metric = "outage"
t1 = 0.0
t2 = 0.0
sweep_axis = "lambda"
sweep_start = 0.1
sweep_stop = 0.9
sweep_steps = 5
methods = ["exact_quadrature"]
"#);
    let s = report::find_lambda_star(&flat).unwrap();
    assert!(s.flat);
    assert_eq!((s.lambda, s.ties), (0.1, 5));
}

#[test]
fn lambda_star_small_for_close_relay() {
    let c = cfg(r#"
metric = "diversity"
snr_db = 20.0
r = 0.5
d1 = 0.1
sweep_axis = "lambda"
sweep_start = 0.05
sweep_stop = 0.95
sweep_steps = 19
methods = ["dmt", "mc"]
"#);
    let s = report::find_lambda_star(&c).unwrap();
    assert!(s.lambda <= 0.2, "{s:?}");
}

#[test]
fn lambda_star_rejects_bad_requests() {
    assert!(report::find_lambda_star(&cfg(FIG1_LIKE)).is_err());
    let two = FIG1_LIKE
        .replace("snr_db\"", "lambda\"")
        .replace("sweep_start = 0.0", "sweep_start = 0.1")
        .replace("sweep_stop = 30.0", "sweep_stop = 0.9");
    let err = report::find_lambda_star(&cfg(&two)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn worker_count_does_not_change_output() {
    let c = cfg(&FIG1_LIKE.replace("1000000", "300000"));
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for w in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build().unwrap();
        let r = pool.install(|| sweep::run_sweep(&c)).unwrap();
        let path = dir.path().join(format!("w{w}.csv"));
        sweep::write_csv(&r, &path).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert!(bytes.windows(2).all(|b| b[0] == b[1]));
}

#[test]
fn binary_run_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}\noutput_path = \"out/sweep.csv\"\n", FIG1_LIKE.replace("1000000", "100000"));
    std::fs::write(dir.path().join("c.toml"), text).unwrap();
    let (code, _, err) = ehrelay(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "axis,method,value,std_err"));
    assert!(csv.starts_with("# "));
    let script = std::fs::read_to_string(dir.path().join("out/sweep.plot.py")).unwrap();
    assert!(script.contains("\"sweep.csv\""));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    std::fs::write(d.join("bad.toml"), format!("{FIG1_LIKE}\nlamda = 0.5\n")).unwrap();
    assert_eq!(ehrelay(&["run", "--config", "bad.toml"], d).0, 2);
    assert_eq!(ehrelay(&["run", "--config", "missing.toml"], d).0, 2);

    let ok = FIG1_LIKE.replace("1000000", "200000");
    std::fs::write(d.join("ok.toml"), format!("{ok}\noutput_path = \"v.csv\"\n")).unwrap();
    let (code, out, err) = ehrelay(&["validate", "--config", "ok.toml"], d);
    assert_eq!(code, 0, "{out}{err}");
    assert!(d.join("v.validation.txt").exists());

    let no_exact = ok.replace("\"exact_quadrature\", ", "");
    std::fs::write(d.join("nx.toml"), no_exact).unwrap();
    assert_eq!(ehrelay(&["validate", "--config", "nx.toml"], d).0, 2);

    std::fs::write(
        d.join("num.toml"),
        r#"
metric = "diversity"
sweep_axis = "snr_db"
sweep_start = 39.0
sweep_stop = 40.0
sweep_steps = 2
r = 0.05
methods = ["mc"]
mc_n = 1000
"#,
    )
    .unwrap();
    let (code, _, err) = ehrelay(&["run", "--config", "num.toml"], d);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("snr_db = 39"));

    assert_eq!(ehrelay(&["reproduce", "--figure", "5"], d).0, 2);
}

#[test]
fn binary_lambda_star_and_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("ls.toml"),
        r#"
metric = "capacity"
snr_db = 20.0
sweep_axis = "lambda"
sweep_start = 0.05
sweep_stop = 0.95
sweep_steps = 19
methods = ["capacity_quadrature"]
"#,
    )
    .unwrap();
    let (code, out, err) = ehrelay(&["lambda-star", "--config", "ls.toml"], d);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("lambda* = 0.4"), "{out}");

    let (code, _, err) = ehrelay(&["--workers", "2", "reproduce", "--figure", "2", "--n", "100000", "--out", "figs"], d);
    assert_eq!(code, 0, "{err}");
    assert!(d.join("figs/fig2.csv").exists() && d.join("figs/fig2.plot.py").exists());
}
