use std::path::Path;
use std::process::Command as Process;

use conformable::frac::{FieldSource, SpaceSpec};
use conformable::variational::{el_residual, LagrangianSpec};
use conformable::frac::Sector;
use conformable_cli::{run, Command, Outcome, RunOptions, ScenarioConfig};

fn exe() -> Process {
    Process::new(env!("CARGO_BIN_EXE_conformable"))
}

fn scenario(text: &str) -> ScenarioConfig {
    ScenarioConfig::parse(text).unwrap()
}

fn go(cmd: Command, text: &str) -> Outcome {
    run(&cmd, &scenario(text), &RunOptions::default()).unwrap()
}

/// Columns of an emitted CSV, by header name.
fn columns(csv_text: &str) -> Vec<(String, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let mut cols: Vec<(String, Vec<f64>)> = header.into_iter().map(|h| (h, Vec::new())).collect();
    for rec in r.records() {
        for (k, v) in rec.unwrap().iter().enumerate() {
            cols[k].1.push(v.parse().unwrap());
        }
    }
    cols
}

fn column(outcome: &Outcome, file: &str, name: &str) -> Vec<f64> {
    let body = &outcome.files.iter().find(|f| f.0 == file).unwrap().1;
    columns(body).into_iter().find(|c| c.0 == name).unwrap().1
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn value_after(line: &str, key: &str) -> f64 {
    let start = line.find(&format!("{key}=")).unwrap() + key.len() + 1;
    line[start..].split_whitespace().next().unwrap().parse().unwrap()
}

const SINE: &str = "[space]\ndim = 1\nalpha = 0.5\n[field]\nexpr = sin(x_1)\n";

#[test]
fn deriv_limit_agrees_with_closed_form() {
    let out = go(Command::Deriv { point: Some(vec![1.0]) }, SINE);
    let line = &out.lines[0];
    let (closed, limit) = (value_after(line, "conf_deriv"), value_after(line, "limit"));
    assert!((closed - 1f64.cos()).abs() < 1e-15);
    assert!((closed - limit).abs() < 1e-6);
}

#[test]
fn deriv_classical_is_ordinary() {
    let out = go(
        Command::Deriv { point: Some(vec![2.0]) },
        &SINE.replace("alpha = 0.5", "alpha = 1"),
    );
    assert_eq!(value_after(&out.lines[0], "conf_deriv"), 2f64.cos());
}

#[test]
fn deriv_at_endpoint_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.ini");
    std::fs::write(&path, SINE).unwrap();
    let out = exe()
        .args(["deriv", "--point", "0", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular endpoint"));
}

const OSCILLATOR_EL: &str = "\
[space]
dim = 1
alpha = 0.7
[grid]
n_points = 40
[lagrangian]
density = 0.5*g_1^2 - 0.5*phi^2
[field]
expr = cos(x_1^0.7/0.7) + 0.3*sin(x_1^0.7/0.7)
";

#[test]
fn el_on_shell_oscillator() {
    let out = go(Command::El, OSCILLATOR_EL);
    assert!(max_abs(&column(&out, "el.csv", "residual")) < 1e-8);
    assert_eq!(column(&out, "el.csv", "x_1").len(), 40);
}

#[test]
fn el_zero_lagrangian() {
    let out = go(Command::El, &OSCILLATOR_EL.replace("0.5*g_1^2 - 0.5*phi^2", "0"));
    assert!(column(&out, "el.csv", "residual").iter().all(|&r| r == 0.0));
}

#[test]
fn el_off_shell_matches_library() {
    let text = OSCILLATOR_EL.replace("cos(x_1^0.7/0.7) + 0.3*sin(x_1^0.7/0.7)", "x_1^3");
    let out = go(Command::El, &text);
    let xs = column(&out, "el.csv", "x_1");
    let rs = column(&out, "el.csv", "residual");
    let space = SpaceSpec::right(1, 0.7).unwrap();
    let l = LagrangianSpec::parse("0.5*g_1^2 - 0.5*phi^2", 1, Sector::Right).unwrap();
    let f = FieldSource::parse("x_1^3", 1).unwrap();
    for (x, r) in xs.iter().zip(&rs) {
        assert_eq!(*r, el_residual(&l, &f, &[*x], &space).unwrap());
    }
    assert!(max_abs(&rs) > 1.0);
}

const PLANE_WAVE: &str = "\
[space]
dim = 2
alpha = 0.6
[grid]
n_points = 6
spacing = uniform_u
[lagrangian]
density = 0.5*(g_1^2 + g_2^2) - 0.5*phi^2
[field]
expr = cos(0.6*x_1^0.6/0.6 + 0.8*x_2^0.6/0.6)
[generator]
kind = rotation
";

#[test]
fn noether_rotation_breaking_vanishes_on_shell() {
    let out = go(Command::Noether, PLANE_WAVE);
    assert!(max_abs(&column(&out, "noether.csv", "B")) < 1e-6);
    assert_eq!(column(&out, "noether.csv", "theta").len(), 36 * 2);
    assert_eq!(column(&out, "amt.csv", "M").len(), 36 * 8);
}

#[test]
fn noether_zero_generator() {
    let out = go(Command::Noether, &PLANE_WAVE.replace("kind = rotation", "kind = zero"));
    for name in ["theta", "B", "div_theta"] {
        assert_eq!(max_abs(&column(&out, "noether.csv", name)), 0.0);
    }
}

#[test]
fn noether_classical_divergence_vanishes() {
    let text = PLANE_WAVE
        .replace("alpha = 0.6", "alpha = 1")
        .replace("spacing = uniform_u", "spacing = uniform_x")
        .replace("cos(0.6*x_1^0.6/0.6 + 0.8*x_2^0.6/0.6)", "cos(0.6*x_1 + 0.8*x_2)")
        .replace("kind = rotation", "kind = translation");
    let out = go(Command::Noether, &text);
    assert!(max_abs(&column(&out, "noether.csv", "div_theta")) < 1e-6);
}

const DELAYED: &str = "\
[oscillator]
alpha = 0.5
m = 1
xi_d = 1
phi0 = 1
v0 = 1
step = 0.02
tolerance = 1e-10
";

#[test]
fn oscillator_matches_analytic_family() {
    let out = go(Command::Oscillator, DELAYED);
    assert!(max_abs(&column(&out, "trajectory.csv", "abs_err")) < 1e-6);
    let t = column(&out, "trajectory.csv", "t");
    assert!((t[t.len() - 1] - t[0] - 10.0).abs() < 1e-12);
}

#[test]
fn oscillator_classical_energy_is_flat() {
    let out = go(Command::Oscillator, &DELAYED.replace("alpha = 0.5", "alpha = 1"));
    let e = column(&out, "energy.csv", "E");
    let spread = e.iter().fold(0.0f64, |m, v| m.max((v - e[0]).abs()));
    assert!(spread < 1e-8, "{spread}");
}

#[test]
fn oscillator_analytic_mode_regularized_energy_vanishes() {
    let text = "[oscillator]\nalpha = 0.6\nm = 1.2\nxi_d = 0.8\nA = 1\nB = -0.5\nt0 = 0.2\nt_end = 8\nmode = analytic\n";
    let out = go(Command::Oscillator, text);
    assert!(max_abs(&column(&out, "energy.csv", "E_tilde")) < 1e-9);
    let (pred, meas) = (column(&out, "energy.csv", "drift_pred"), column(&out, "energy.csv", "drift_meas"));
    for (p, m) in pred.iter().zip(&meas) {
        assert!((p - m).abs() < 1e-5 * p.abs());
    }
}

#[test]
fn csv_values_round_trip() {
    let out = go(Command::Oscillator, DELAYED);
    let cfg = scenario(DELAYED);
    let p = cfg.oscillator().unwrap().params.fitted(cfg.oscillator().unwrap().params.delayed_start(), 1.0, 1.0).unwrap();
    let t = column(&out, "trajectory.csv", "t");
    let exact = column(&out, "trajectory.csv", "phi_analytic");
    for (t, e) in t.iter().zip(&exact) {
        assert_eq!(conformable::oscillator::analytic_solution(&p, *t).unwrap().0, *e);
    }
}

#[test]
fn identical_config_gives_identical_csv() {
    for text in [PLANE_WAVE, DELAYED] {
        let cmd = if text == DELAYED { Command::Oscillator } else { Command::Noether };
        assert_eq!(go(cmd.clone(), text), go(cmd, text));
    }
}

fn write_scenario(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.ini");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_rejects_out_of_range_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[space]\ndim = 1\nalpha = 1.5\n");
    let out = exe().arg("verify").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.5"));
}

#[test]
fn corrupted_sample_file_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("phi.csv"), "x_1,phi\n0.5,1\n1.0,zzz\n").unwrap();
    let path = write_scenario(
        dir.path(),
        "[space]\ndim = 1\nalpha = 0.5\n[field]\nsamples = phi.csv\n",
    );
    let out = exe().arg("verify").arg("--config").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("phi.csv") && err.contains("line 3"), "{err}");
}

#[test]
fn sampled_field_drives_el() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from("x_1,phi\n");
    for k in 0..=400 {
        let t = 0.5 + 0.01 * k as f64;
        body.push_str(&format!("{t},{}\n", (t.powf(0.5) / 0.5).cos()));
    }
    std::fs::write(dir.path().join("phi.csv"), body).unwrap();
    let text = "[space]\ndim = 1\nalpha = 0.5\n[grid]\nn_points = 12\n\
                [lagrangian]\ndensity = 0.5*g_1^2 - 0.5*phi^2\n[field]\nsamples = phi.csv\n";
    let cfg = ScenarioConfig::parse_in(text, dir.path()).unwrap();
    let out = run(&Command::El, &cfg, &RunOptions::default());
    // the grid spans the whole axis, past the samples
    assert!(out.is_err());
    let text = text.replace("alpha = 0.5\n", "alpha = 0.5\na = 0\ninner_offset = 0.6\ntruncation = 4.4\n");
    let cfg = ScenarioConfig::parse_in(&text, dir.path()).unwrap();
    let out = run(&Command::El, &cfg, &RunOptions::default()).unwrap();
    assert!(max_abs(&column(&out, "el.csv", "residual")) < 1e-4);
}

#[test]
fn binary_writes_files_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = exe().arg("oscillator").arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(body.starts_with("t,phi,dphi_dt,phi_analytic,abs_err\n"));
    assert!(!body.contains('\r'));
}
