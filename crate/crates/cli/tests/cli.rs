use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

fn mbd(cmd: &str, config: &Value, dir: &Path, extra: &[&str]) -> Run {
    let cfg = dir.join(format!("{cmd}.json"));
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out = dir.join(format!("{cmd}.out"));
    let o = Command::new(env!("CARGO_BIN_EXE_mbd")).arg(cmd).arg("--config").arg(&cfg).arg("--out").arg(&out).args(extra).output().unwrap();
    Run { code: o.status.code().unwrap(), stderr: String::from_utf8_lossy(&o.stderr).into_owned(), out }
}

fn c(re: f64, im: f64) -> Value {
    json!({"re": re, "im": im})
}

fn one_soliton(c2: f64) -> Value {
    json!({
        "chain": {"seed": {"kind": "zero"}, "steps": [{"mu_re": 0.5, "mu_im": 0.3, "C": [c(1.0, 0.0), c(c2, 0.0), c(1.0, 0.0)]}]},
        "grid": {"tau_min": -8.0, "tau_max": 8.0, "n_tau": 321, "zeta_min": -1.0, "zeta_max": 1.0, "n_zeta": 3}
    })
}

fn periodic() -> Value {
    json!({
        "chain": {
            "seed": {"kind": "periodic_pump", "E_re": 0.6, "E_im": 0.5, "branch": 1},
            "steps": [{"mu_re": 0.8528, "mu_im": 0.1936, "C": [c(1.0, 0.3), c(0.7, -0.2), c(0.4, 0.6)]}]
        },
        "grid": {"tau_min": -50.0, "tau_max": 50.0, "n_tau": 11, "zeta_min": 0.0, "zeta_max": 2.0, "n_zeta": 3}
    })
}

/// Parsed CSV body: header names and rows of floats.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn kv(path: &Path) -> Vec<(String, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn generate_one_soliton_peak_is_twice_re_mu() {
    let dir = TempDir::new().unwrap();
    let r = mbd("generate", &one_soliton(0.0), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&r.out);
    assert_eq!(&h[..6], ["tau", "zeta", "re_em", "im_em", "re_ep", "im_ep"]);
    assert_eq!(h.len(), 6 + 9);
    assert_eq!(h[6], "node0_n_am");
    assert_eq!(rows.len(), 321 * 3);
    // tau outer, zeta inner
    assert_eq!((rows[0][0], rows[0][1]), (-8.0, -1.0));
    assert_eq!((rows[1][0], rows[1][1]), (-8.0, 0.0));
    let (re, im) = (col(&h, "re_em"), col(&h, "im_em"));
    let peak = rows.iter().map(|r| r[re].hypot(r[im])).fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-3, "{peak}");
    // the grid peak is within the sampling error of the analytic maximum 2 Re mu
    assert!(peak <= 1.0 + 1e-9);
}

#[test]
fn generate_one_soliton_exact_peak_on_fine_tau_line() {
    // the amplitude maximum of a zero-seed soliton at zeta = 0 sits where
    // |C1|^2 e^{2 Re mu tau} balances |C3|^2 e^{-2 Re mu tau}, i.e. tau = 0 for C = (1, 0, 1)
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(0.0);
    cfg["chain"]["steps"][0]["mu_im"] = json!(0.0);
    cfg["grid"] = json!({"tau_min": -4.0, "tau_max": 4.0, "n_tau": 81, "zeta_min": 0.0, "zeta_max": 0.0, "n_zeta": 1});
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&r.out);
    let (re, im) = (col(&h, "re_em"), col(&h, "im_em"));
    let peak = rows.iter().map(|r| r[re].hypot(r[im])).fold(0.0, f64::max);
    assert!((peak - 1.0).abs() <= 1e-9, "{peak}");
}

#[test]
fn generate_empty_chain_gives_constant_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "detuning": {"delta": 0.2, "broadening": {"kind": "gaussian", "width": 0.5, "n_nodes": 3}},
        "chain": {"seed": {"kind": "populations", "n_am": 0.2, "n_ap": 0.3, "n_b": 0.5}},
        "grid": {"tau_min": -2.0, "tau_max": 2.0, "n_tau": 5, "zeta_min": 0.0, "zeta_max": 1.0, "n_zeta": 2}
    });
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&r.out);
    assert_eq!(h.len(), 6 + 3 * 9);
    for j in 2..h.len() {
        assert!(rows.iter().all(|r| r[j] == rows[0][j]), "column {} varies", h[j]);
    }
    assert_eq!(rows[0][col(&h, "node1_n_ap")], 0.3);
    assert_eq!(rows[0][col(&h, "re_em")], 0.0);
}

#[test]
fn generate_without_bloch_columns() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["output"] = json!({"bloch": false});
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(read_csv(&r.out).0.len(), 6);
}

#[test]
fn generate_periodic_recovers_pump_at_tau_extremes() {
    let dir = TempDir::new().unwrap();
    let r = mbd("generate", &periodic(), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&r.out);
    let (t, re, im) = (col(&h, "tau"), col(&h, "re_ep"), col(&h, "im_ep"));
    let e_abs = 0.6f64.hypot(0.5);
    let mut seen = 0;
    for r in rows.iter().filter(|r| r[t].abs() == 50.0) {
        assert!((r[re].hypot(r[im]) - e_abs).abs() < 1e-5, "{:?}", r);
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn verify_one_soliton_passes() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["grid"] = json!({"tau_min": -5.0, "tau_max": 5.0, "n_tau": 21, "zeta_min": -5.0, "zeta_max": 5.0, "n_zeta": 21});
    let r = mbd("verify", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = kv(&r.out);
    let get = |k: &str| report.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone()).unwrap_or_else(|| panic!("no {k}"));
    assert_eq!(get("status"), "pass");
    assert_eq!(get("mb.pass"), "true");
    assert_eq!(get("pure.pass"), "true");
    assert_eq!(get("zcr.pass"), "true");
    assert_eq!(get("conservation.pass"), "true");
    assert!(get("mb.max").parse::<f64>().unwrap() <= 1e-5);
}

#[test]
fn verify_detects_corrupted_field() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["grid"] = json!({"tau_min": -5.0, "tau_max": 5.0, "n_tau": 11, "zeta_min": -2.0, "zeta_max": 2.0, "n_zeta": 5});
    cfg["verify"] = json!({"corrupt_e_plus": true, "checks": ["mb"]});
    let r = mbd("verify", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let text = std::fs::read_to_string(&r.out).unwrap();
    assert!(text.contains("mb.pass=false") && text.ends_with("status=fail\n"));
}

#[test]
fn verify_trivial_background_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "chain": {"seed": {"kind": "zero"}},
        "grid": {"tau_min": -1.0, "tau_max": 1.0, "n_tau": 3, "zeta_min": -1.0, "zeta_max": 1.0, "n_zeta": 3}
    });
    let r = mbd("verify", &cfg, dir.path(), &["--order", "4", "--h", "1e-2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&r.out).unwrap();
    assert!(text.contains("mb.order=4") && text.ends_with("status=pass\n"), "{text}");
}

#[test]
fn verify_linearized_check() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["grid"] = json!({"tau_min": -1.0, "tau_max": 1.0, "n_tau": 5, "zeta_min": -1.0, "zeta_max": 1.0, "n_zeta": 5});
    cfg["verify"] = json!({"checks": ["linearized"]});
    cfg["perturb"] = json!({
        "terms": [{"mu_re": 0.4, "mu_im": -0.2, "beta": c(1.0, 0.0), "right": [c(1.0, 0.0), c(0.5, 0.0), c(0.3, 0.1)], "left": [c(0.2, 0.0), c(1.0, 0.0), c(0.7, -0.3)]}],
        "tolerance": 1e-5
    });
    let r = mbd("verify", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(std::fs::read_to_string(&r.out).unwrap().contains("linearized.pass=true"));
}

fn two_soliton_reconcile(family: &str) -> Value {
    json!({
        "reconcile": {
            "family": family, "mu_re": 0.5, "mu_im": 0.35,
            "a": [c(1.0, 0.0), c(0.3, -0.6)], "b": [c(0.4, 0.5), c(1.0, 0.2)], "c": [c(0.8, -0.1), c(0.5, 0.9)],
            "tolerance": 1e-9
        },
        "grid": {"tau_min": -6.0, "tau_max": 6.0, "n_tau": 25, "zeta_min": -4.0, "zeta_max": 4.0, "n_zeta": 17}
    })
}

fn deviation(r: &Run) -> f64 {
    let (_, rows) = {
        let text = std::fs::read_to_string(r.out.with_extension("csv")).unwrap();
        let mut l = text.lines();
        let h: Vec<String> = l.next().unwrap().split(',').map(String::from).collect();
        (h, l.map(String::from).collect::<Vec<_>>())
    };
    rows[0].split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn reconcile_two_soliton_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let r = mbd("reconcile", &two_soliton_reconcile("two_soliton"), dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(deviation(&r) <= 1e-9);
    let md = std::fs::read_to_string(&r.out).unwrap();
    assert!(md.contains("## two_soliton"));
}

#[test]
fn reconcile_dressed_periodic_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "detuning": {"delta": 0.1, "broadening": {"kind": "gaussian", "width": 0.6, "n_nodes": 7}},
        "reconcile": {
            "family": "dressed_periodic", "E_re": 0.6, "E_im": 0.5, "gamma": c(-0.5, 0.9),
            "C1": c(1.0, 0.3), "C_plus": c(0.7, -0.2), "C_minus": c(0.4, 0.6), "tolerance": 1e-9
        },
        "grid": {"tau_min": -6.0, "tau_max": 6.0, "n_tau": 25, "zeta_min": -4.0, "zeta_max": 4.0, "n_zeta": 17}
    });
    let r = mbd("reconcile", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(deviation(&r) <= 1e-9);
}

#[test]
fn reconcile_compact_form_documents_its_deviation() {
    let dir = TempDir::new().unwrap();
    let r = mbd("reconcile", &two_soliton_reconcile("two_soliton_compact"), dir.path(), &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(deviation(&r) > 1e-2);
    assert!(std::fs::read_to_string(&r.out).unwrap().contains("## two_soliton_compact"));
}

#[test]
fn perturb_writes_convergence_table_and_report() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["grid"] = json!({"tau_min": -1.0, "tau_max": 1.0, "n_tau": 5, "zeta_min": -1.0, "zeta_max": 1.0, "n_zeta": 5});
    cfg["perturb"] = json!({
        "terms": [{"mu_re": 0.4, "mu_im": -0.2, "beta": c(1.0, 0.0), "right": [c(1.0, 0.0), c(0.5, 0.0), c(0.3, 0.1)], "left": [c(0.2, 0.0), c(1.0, 0.0), c(0.7, -0.3)]}],
        "hermitian_pairing": true,
        "deltas": [c(1e-4, 0.0), c(5e-5, 0.0), c(2.5e-5, 0.0)],
        "points": [[0.3, -0.2], [-0.5, 0.4]],
        "tolerance": 1e-5
    });
    let r = mbd("perturb", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (h, rows) = read_csv(&r.out);
    assert_eq!(h, ["re_delta", "im_delta", "u_error", "a_error"]);
    assert_eq!(rows.len(), 3);
    let report = std::fs::read_to_string(r.out.with_extension("txt")).unwrap();
    assert!(report.contains("linearized.pass=true") && report.contains("convergence.min_order="));
}

#[test]
fn invalid_config_exits_2_with_field_path() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["chain"]["steps"][0]["mu_re"] = json!(0.0);
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("chain.steps[0].mu_re"), "{}", r.stderr);

    cfg = one_soliton(1.0);
    cfg["grid"]["n_tau"] = json!("many");
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("grid.n_tau"), "{}", r.stderr);

    let r = mbd("verify", &one_soliton(1.0), dir.path(), &["--order", "3"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("verify.order"), "{}", r.stderr);

    let r = mbd("reconcile", &one_soliton(1.0), dir.path(), &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("reconcile"), "{}", r.stderr);
}

#[test]
fn pole_step_exits_3_naming_the_step() {
    // a step at -mu^* of an earlier one hits the pole of the dressed wavefunction
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["chain"]["steps"] = json!([
        {"mu_re": 0.5, "mu_im": 0.3, "C": [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]},
        {"mu_re": -0.5, "mu_im": 0.3, "C": [c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]}
    ]);
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("dressing step 1"), "{}", r.stderr);
}

#[test]
fn overflowing_point_exits_3_with_location() {
    let dir = TempDir::new().unwrap();
    let mut cfg = one_soliton(1.0);
    cfg["grid"] = json!({"tau_min": 0.0, "tau_max": 4000.0, "n_tau": 3, "zeta_min": 0.0, "zeta_max": 0.0, "n_zeta": 1});
    let r = mbd("generate", &cfg, dir.path(), &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("(tau, zeta) = (2000, 0)"), "{}", r.stderr);
    assert!(!r.out.exists());
}

#[test]
fn io_failures_exit_4() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json");
    let o = Command::new(env!("CARGO_BIN_EXE_mbd"))
        .args(["generate", "--config"])
        .arg(&missing)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));

    let r = mbd("generate", &one_soliton(1.0), dir.path(), &[]);
    assert_eq!(r.code, 0);
    let cfg = dir.path().join("generate.json");
    let o = Command::new(env!("CARGO_BIN_EXE_mbd"))
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("no_such_dir").join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, one_soliton(1.0).to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mbd"))
        .env("MBD_THREADS", "zero")
        .args(["generate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_run_cleanly() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("one_soliton.json", "verify"),
        ("two_pulse_broadened.json", "generate"),
        ("periodic_pump.json", "generate"),
        ("reconcile_two_soliton.json", "reconcile"),
        ("reconcile_dressed_periodic.json", "reconcile"),
        ("perturb_populations.json", "perturb"),
    ];
    let mut names: Vec<String> =
        std::fs::read_dir(&configs).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    let mut listed: Vec<String> = cases.iter().map(|(n, _)| n.to_string()).collect();
    listed.sort();
    assert_eq!(names, listed);
    let dir = TempDir::new().unwrap();
    for (name, cmd) in cases {
        let cfg: Value = serde_json::from_str(&std::fs::read_to_string(configs.join(name)).unwrap()).unwrap();
        let r = mbd(cmd, &cfg, dir.path(), &[]);
        assert_eq!(r.code, 0, "{name}: {}", r.stderr);
    }
}
