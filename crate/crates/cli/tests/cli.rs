use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pseudo-dce"));
    c.env_remove("PSEUDO_DCE_OUT");
    c
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn presets_write_csv_and_plot_scripts() {
    let tmp = TempDir::new().unwrap();
    for (preset, files) in [
        ("fig1", vec!["fig1.csv", "fig1.json", "fig1.gp"]),
        ("fig2", vec!["fig2.csv", "fig2.gp"]),
        ("fig3", vec!["fig3_beta1e-3.csv", "fig3_beta1e-4.csv", "fig3_hermitian.csv", "fig3.gp"]),
    ] {
        let start = Instant::now();
        let o = bin()
            .args(["run", "--preset", preset, "--out"])
            .arg(tmp.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(start.elapsed().as_secs_f64() < 10.0);
        for f in files {
            assert!(tmp.path().join(f).exists(), "{preset}: missing {f}");
        }
    }
    let gp = fs::read_to_string(tmp.path().join("fig3.gp")).unwrap();
    assert!(gp.contains("'fig3_hermitian.csv'"));
    let csv = fs::read_to_string(tmp.path().join("fig1.csv")).unwrap();
    assert!(csv.starts_with("tau,r_numeric,r_analytic,phi_numeric_raw,phi_analytic_raw,"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "tau_max = 10\n[output]\noutputs = tau, r_numeric, N_numeric\n");
    let mut outs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("o{k}"));
        let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&dir).output().unwrap();
        assert_eq!(code(&o), 0);
        outs.push(fs::read(dir.join("run.csv")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs[0].clone()).unwrap();
    assert!(text.starts_with("tau,r_numeric,N_numeric\n"));
}

#[test]
fn output_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "tau_max = 1\n");
    let o = bin()
        .env("PSEUDO_DCE_OUT", tmp.path().join("env_out"))
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("env_out/run.csv").exists());
}

#[test]
fn validation_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    for text in ["eps_mod = 1.5\n", "bogus = 1\n", "kappa 2\n", "points_per_period = 10\n"] {
        let cfg = write_config(tmp.path(), text);
        let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
        assert_eq!(code(&o), 1, "{text}");
    }
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(code(&o), 1);
    let o = bin().args(["run", "--config", "/definitely/not/here.cfg"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn simulation_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    // The integrated map of the reference operating point reaches chi = 1.
    let cfg = write_config(tmp.path(), "dyson_source = integrated\n");
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let json = fs::read_to_string(tmp.path().join("run.json")).unwrap();
    assert!(json.contains("\"error\""));
}

#[test]
fn verify_fast_passes_and_fault_is_caught() {
    let start = Instant::now();
    let o = bin().args(["verify", "--level", "fast"]).output().unwrap();
    assert!(start.elapsed().as_secs_f64() < 30.0);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(report["checks"].as_array().unwrap().len() >= 10);

    let o = bin().args(["verify", "--level", "fast", "--inject-fault"]).output().unwrap();
    assert_eq!(code(&o), 3);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("FAIL fig2_r_growth"), "{stderr}");
}

#[test]
fn sweep_amplification_grows_as_beta_shrinks() {
    let tmp = TempDir::new().unwrap();
    let o = bin()
        .args(["sweep", "--axis", "beta0_tilde", "--values", "1e-3,1e-4", "--workers", "2", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(tmp.path().join("sweep_beta0_tilde.csv")).unwrap();
    let r = column(&summary, "amplification");
    assert!(r[1] > r[0]);
}

#[test]
fn sweep_final_r_is_linear_in_depth() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "tau_max = 20\noracle = none\n");
    let o = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--axis", "eps_mod", "--values", "0.005,0.01,0.02", "--workers", "3", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(tmp.path().join("sweep_eps_mod.csv")).unwrap();
    let r = column(&summary, "r_final");
    for (k, eps) in [0.005, 0.02].into_iter().enumerate() {
        let idx = if k == 0 { 0 } else { 2 };
        let ratio = (r[idx] / eps) / (r[1] / 0.01);
        assert!((ratio - 1.0).abs() < 0.05, "eps {eps}: ratio {ratio}");
    }
}

#[test]
fn single_value_sweep_matches_plain_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "tau_max = 5\n");
    let o = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--axis", "eps_mod", "--values", "0.01", "--out"])
        .arg(tmp.path().join("sweep"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(tmp.path().join("run/run.csv")).unwrap(),
        fs::read(tmp.path().join("sweep/eps_mod_000.csv")).unwrap()
    );
}

#[test]
fn sweep_rejects_non_numeric_axis() {
    let o = bin().args(["sweep", "--axis", "oracle", "--values", "none"]).output().unwrap();
    assert_eq!(code(&o), 1);
}
