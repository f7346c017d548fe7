use std::process::{Command, Output};

use relaxed_admm_cli::commands::{
    certify, rate_sweep, tune, CertifySettings, ProblemKind, RateSweepSettings, TuneSettings,
};
use relaxed_admm_cli::output::{Cell, Table};
use relaxed_admm_cli::Status;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxed-admm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn num(c: &Cell) -> f64 {
    match c {
        Cell::Num(x) => *x,
        other => panic!("expected a number, got {other:?}"),
    }
}

fn col(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap().into_iter().map(num).collect()
}

fn tune_settings(m: f64, l: f64, t: Option<u32>) -> TuneSettings {
    TuneSettings {
        m,
        l,
        sigma_max: 1.0,
        sigma_min: 1.0,
        t,
        alpha_margin: 0.01,
    }
}

#[test]
fn tune_examples() {
    let o = tune(&tune_settings(1.0, 1.0, None)).unwrap();
    assert_eq!(col(&o.table, "rho_star"), [1.0]);
    assert_eq!(col(&o.table, "inf_rate"), [0.0]);

    let o = tune(&tune_settings(1.0, 4.0, None)).unwrap();
    assert_eq!(col(&o.table, "rho_star"), [2.0]);
    assert!((col(&o.table, "inf_rate")[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(col(&o.table, "alpha"), [1.99]);

    let o = tune(&tune_settings(1.0, 9.0, Some(2))).unwrap();
    assert!((col(&o.table, "alpha_t")[0] - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn tune_boundary_recommendation_has_no_bound() {
    let o = tune(&tune_settings(1.0, 1.0, Some(1))).unwrap();
    assert_eq!(col(&o.table, "alpha_t"), [2.0]);
    assert_eq!(o.table.column("bound_t").unwrap(), [&Cell::Empty]);
}

#[test]
fn tune_rejects_bad_conditioning() {
    let o = bin(&["tune", "--m", "2", "--l", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let o = bin(&["tune", "--m", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

fn sweep(alphas: &[f64], rho0s: &[f64], kappas: &[f64], simulate: bool) -> RateSweepSettings {
    RateSweepSettings {
        alphas: alphas.to_vec(),
        rho0s: rho0s.to_vec(),
        kappas: kappas.to_vec(),
        simulate,
        ..RateSweepSettings::default()
    }
}

#[test]
fn rate_sweep_theoretical_column() {
    let o = rate_sweep(&sweep(&[1.9], &[1.0], &[100.0, 1.0, 10.0], false)).unwrap();
    assert_eq!(col(&o.table, "kappa"), [1.0, 10.0, 100.0]);
    for (k, tau) in col(&o.table, "kappa").iter().zip(col(&o.table, "tau_theory")) {
        assert!((tau - (1.0 - 1.9 / (1.0 + k.sqrt()))).abs() < 1e-15);
    }
    assert!(o.table.column("tau_empirical").unwrap().iter().all(|c| **c == Cell::Empty));
    assert!(!o.table.columns.contains(&"wall_time_s"));
}

#[test]
fn rate_sweep_rows_sorted() {
    let o = rate_sweep(&sweep(&[1.5, 0.5], &[2.0, 1.0], &[9.0, 4.0], false)).unwrap();
    let keys: Vec<(f64, f64, f64)> = (0..o.table.rows.len())
        .map(|i| {
            let r = &o.table.rows[i];
            (num(&r[1]), num(&r[2]), num(&r[3]))
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 8);
}

#[test]
fn rate_sweep_chi_symmetry() {
    let rho0s = [0.25, 0.5, 1.0, 2.0, 4.0];
    let o = rate_sweep(&sweep(&[0.7, 1.3], &rho0s, &[3.0, 50.0], false)).unwrap();
    let taus = col(&o.table, "tau_theory");
    // Per alpha: 5 rho0 values × 2 kappas, rho0-major.
    for a in 0..2 {
        for (i, j) in [(0, 4), (1, 3)] {
            for k in 0..2 {
                let x = taus[a * 10 + i * 2 + k];
                let y = taus[a * 10 + j * 2 + k];
                assert!((x - y).abs() < 1e-15, "{x} vs {y}");
            }
        }
    }
}

#[test]
fn rate_sweep_simulated_rows_match_for_balanced_penalties() {
    let o = rate_sweep(&sweep(&[0.5, 1.0, 1.5, 1.9], &[1.0, 2.0], &[2.0, 10.0, 100.0], true)).unwrap();
    let theory = col(&o.table, "tau_theory");
    let fitted = col(&o.table, "tau_empirical");
    for (t, f) in theory.iter().zip(&fitted) {
        assert!((t - f).abs() <= 1e-3, "fitted {f} vs theory {t}");
    }
}

#[test]
fn rate_sweep_random_quadratic_stays_below_bound() {
    let mut s = sweep(&[1.0, 1.6], &[0.5, 1.0], &[4.0, 40.0], true);
    s.problem = ProblemKind::RandomQuadratic;
    s.kappa_a = 1.5;
    s.iters = 1500;
    s.seed = 11;
    let o = rate_sweep(&s).unwrap();
    for (t, f) in col(&o.table, "tau_theory").iter().zip(col(&o.table, "tau_empirical")) {
        assert!(f <= t + 1e-3, "fitted {f} above bound {t}");
    }
}

#[test]
fn rate_sweep_validation() {
    assert!(rate_sweep(&sweep(&[], &[1.0], &[2.0], false)).is_err());
    assert!(rate_sweep(&sweep(&[2.0], &[1.0], &[2.0], false)).is_err());
    assert!(rate_sweep(&sweep(&[1.0], &[0.0], &[2.0], false)).is_err());
    assert!(rate_sweep(&sweep(&[1.0], &[1.0], &[0.5], false)).is_err());
    let mut s = sweep(&[1.0], &[1.0], &[2.0], false);
    s.problem = ProblemKind::Logistic;
    assert!(rate_sweep(&s).is_err());

    let o = bin(&["rate-sweep", "--alphas", ""]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["rate-sweep", "--alphas", "2.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rate_sweep_timing_column_is_opt_in() {
    let o = bin(&["rate-sweep", "--alphas", "1", "--rho0s", "1", "--kappas", "4", "--timing"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("problem,alpha,rho0,kappa,tau_theory,tau_empirical,bound_constant,wall_time_s\n"));
}

#[test]
fn certify_outcomes() {
    let s = |l: f64, alpha: f64, rho0: f64| CertifySettings {
        m: 1.0,
        l,
        alpha,
        rho0,
        iters: 300,
    };
    assert_eq!(certify(&s(10.0, 1.0, 1.0)).unwrap().status, Status::Pass);
    let o = certify(&s(1.0, 1.0, 1.0)).unwrap();
    assert_eq!(o.status, Status::Pass);
    assert_eq!(col(&o.table, "tau_theory"), [0.5]);
    assert!(certify(&s(10.0, 2.5, 1.0)).is_err());
    assert!(certify(&s(10.0, 0.0, 1.0)).is_err());
}

#[test]
fn certify_exit_codes() {
    let o = bin(&["certify", "--l", "10", "--alpha", "1", "--iters", "300"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(",PASS\n"));
    let o = bin(&["certify", "--l", "10", "--alpha", "2.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["certify", "--l", "10", "--alpha", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    // Two iterations leave fewer points than a fit needs.
    let o = bin(&["certify", "--l", "10", "--alpha", "1", "--iters", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains(",INCONCLUSIVE\n"));
}

#[test]
fn csv_schema_uses_twelve_significant_digits() {
    let o = bin(&["rate-sweep", "--alphas", "1", "--rho0s", "1", "--kappas", "10"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("problem,alpha,rho0,kappa,tau_theory,tau_empirical,bound_constant")
    );
    // 1 - 1/(1 + sqrt 10) = 0.7597469266479578...
    assert!(lines.next().unwrap().starts_with("attainability,1,1,10,0.759746926648,,"));
}

#[test]
fn json_mirrors_csv_rows() {
    let o = bin(&["tune", "--m", "1", "--l", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["rho_star"], 2.0);
    assert!(rows[0]["t"].is_null());
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "m");
    assert_eq!(keys[13], "bound_t");
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tune.toml");
    let out = dir.path().join("tune.csv");
    std::fs::write(&cfg, "m = 1\nl = 100\nsigma_max = 2\nformat = \"csv\"\n").unwrap();
    let o = bin(&[
        "tune",
        "--config",
        cfg.to_str().unwrap(),
        "--l",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    // l from the command line, sigma_max from the file.
    assert!(text.lines().nth(1).unwrap().starts_with("1,4,2,1,"), "{text}");

    std::fs::write(&cfg, "m = 1\nl = 4\nunknown_key = 3\n").unwrap();
    let o = bin(&["tune", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn classify_sweep_is_deterministic_and_prefers_relaxation() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let data = dir.path().join("data.csv");
    let o = bin(&[
        "classify-sweep",
        "--out",
        a.to_str().unwrap(),
        "--export-data",
        data.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // Reading the exported dataset back gives the same sweep.
    let o = bin(&[
        "classify-sweep",
        "--out",
        b.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,tau_empirical,log_tau"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((f[1].ln() - f[2]).abs() < 1e-10);
            (f[0], f[1])
        })
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|&(_, tau)| tau < 1.0));
    let best = rows.iter().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    assert!(best.0 > 1.0);
}

#[test]
fn classify_sweep_rejects_bad_input() {
    let o = bin(&["classify-sweep", "--n", "10", "--d", "20"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["classify-sweep", "--alphas", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["classify-sweep", "--data", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(1));
}
