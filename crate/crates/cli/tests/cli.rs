use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vacent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vacent"))
        .args(args)
        .output()
        .expect("spawn vacent")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vacent-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> String {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn field(report: &str, key: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.starts_with(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"));
    line.split(" = ").nth(1).unwrap().trim().parse().unwrap()
}

#[test]
fn list_shows_all_experiments() {
    let o = vacent(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 17);
    assert!(text.contains("ln_vs_nb_hex"));
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = scratch("run");
    let out = dir.to_str().unwrap();
    let o = vacent(&[
        "run",
        "ln_vs_nb_hex",
        "--set",
        "N_B=3,5",
        "--out",
        out,
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("ln_vs_nb_hex.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n_modes_b,log_neg,nu_tilde_min,mutual_info,error")
    );
    assert!(lines.next().unwrap().starts_with("3,0,"));
    assert!(lines.next().unwrap().starts_with("5,0.0202"));
    let json: String = std::fs::read_to_string(dir.join("ln_vs_nb_hex.json")).unwrap();
    assert!(json.contains("\"version\"") && json.contains("\"n_modes_b\""));

    let again = scratch("run2");
    vacent(&[
        "run",
        "ln_vs_nb_hex",
        "--set",
        "N_B=3,5",
        "--out",
        again.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert_eq!(
        csv,
        std::fs::read_to_string(again.join("ln_vs_nb_hex.csv")).unwrap()
    );
}

#[test]
fn run_from_config_file() {
    let dir = scratch("config");
    let cfg = write(
        &dir,
        "run.toml",
        &format!(
            "experiment = \"mi_vs_rho\"\noutput_dir = \"{}\"\nscale = \"ci\"\n[overrides]\nD = 3\nrho = [10.0, 20.0, 40.0, 80.0]\n",
            dir.display()
        ),
    );
    let o = vacent(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let slope = field(&stdout(&o), "loglog_slope_rho_ge_10");
    assert!((slope + 4.0).abs() < 0.08, "slope {slope}");
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let out = dir.to_str().unwrap();
    assert_eq!(
        vacent(&["run", "ln_vs_nb_hex", "--set", "rho_typo=2", "--out", out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        vacent(&["run", "ln_vs_nb_hex", "--set", "N_B"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        vacent(&["run", "no_such_experiment", "--out", out])
            .status
            .code(),
        Some(4)
    );
    let bad_cfg = write(
        &dir,
        "bad.toml",
        "experiment = \"rindler_ln\"\nunknown = 1\n",
    );
    assert_eq!(
        vacent(&["run", "--config", &bad_cfg]).status.code(),
        Some(2)
    );

    let o = vacent(&["run", "mi_vs_rho", "--set", "rho=1.5,4", "--out", out]);
    assert_eq!(o.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.join("mi_vs_rho.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].starts_with("1.5,,") && !rows[0].ends_with(','));
    assert!(rows[1].ends_with(','));
}

#[test]
fn eval_two_balls_is_separable() {
    let dir = scratch("eval-balls");
    let f = write(
        &dir,
        "m.toml",
        "[generator]\ngenerator = \"two_balls\"\nrho = 4.0\ndelta = 1.0\ndimension = 3\n",
    );
    let o = vacent(&["eval", &f]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("verdict: separable"));
    assert_eq!(field(&text, "E_N"), 0.0);
}

#[test]
fn eval_sinc_stack_is_entangled() {
    let dir = scratch("eval-sinc");
    let f = write(
        &dir,
        "m.toml",
        "[generator]\ngenerator = \"sinc_stack\"\nn_a = 1\nn_b = 2\ndimension = 3\n",
    );
    let o = vacent(&["eval", &f]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict: entangled"));
}

#[test]
fn eval_rindler() {
    let dir = scratch("eval-rindler");
    let f = write(&dir, "m.toml", "[rindler]\nomega_over_a = 0.5\n");
    let o = vacent(&["eval", &f]);
    assert!(o.status.success());
    let expected = -(std::f64::consts::FRAC_PI_4.tanh()).log2();
    assert!((field(&stdout(&o), "E_N") - expected).abs() < 1e-11);
}

#[test]
fn eval_explicit_modes_and_covariance_file() {
    let dir = scratch("eval-explicit");
    let text = r#"
bipartition = ["A", "B"]
[field]
dimension = 3
[[modes]]
x = [{ smearing = { family = { kind = "poly_bump", delta = 1.0 }, center = [0.0, 0.0, 0.0], radius = 1.0, dimension = 3 }, phi = 1.0 }]
p = [{ smearing = { family = { kind = "poly_bump", delta = 1.0 }, center = [0.0, 0.0, 0.0], radius = 1.0, dimension = 3 }, pi = 1.0 }]
[[modes]]
x = [{ smearing = { family = { kind = "poly_bump", delta = 1.0 }, center = [2.5, 0.0, 0.0], radius = 1.0, dimension = 3 }, phi = 1.0 }]
p = [{ smearing = { family = { kind = "poly_bump", delta = 1.0 }, center = [2.5, 0.0, 0.0], radius = 1.0, dimension = 3 }, pi = 1.0 }]
"#;
    let f = write(&dir, "m.toml", text);
    let cov = dir.join("sigma.txt");
    let o = vacent(&["eval", &f, "--covariance", cov.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict: separable"));
    assert!(std::fs::metadata(&cov).unwrap().len() > 0);

    let broken = text.replacen("radius = 1.0", "radius = -1.0", 1);
    let g = write(&dir, "bad.toml", &broken);
    let o = vacent(&["eval", &g]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mode 0"));
}
