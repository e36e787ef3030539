//! The four subcommands. Each one loads and validates the scenario, evaluates
//! on the configured grid and writes its outputs once at the end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mb_darboux::closedforms::{errata_csv, errata_markdown, reconcile};
use mb_darboux::darboux::evaluate_chain;
use mb_darboux::model::{conservation_report, residual_mb, residual_pure, residual_zcr, MBFieldState};
use mb_darboux::perturbation::{finite_difference_validation, linearized_residual, superpose_symmetries};
use mb_darboux::BlochComponents;
use rayon::prelude::*;

use crate::config::{self, Check, ConfigError, Scenario};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Generate,
    Verify,
    Reconcile,
    Perturb,
}

/// What a successful run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    /// False when a verification missed its tolerance.
    pub passed: bool,
    pub written: Vec<PathBuf>,
}

/// Loads `config_path`, runs `command` and writes its outputs next to `out`.
pub fn run(command: Command, config_path: &Path, out: &Path, h: Option<f64>, order: Option<u8>) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(config_path).map_err(|source| CliError::Io { path: config_path.to_path_buf(), source })?;
    let scenario = config::load(&text, h, order)?;
    let files = match command {
        Command::Generate => generate(&scenario, out)?,
        Command::Verify => verify(&scenario, out)?,
        Command::Reconcile => reconcile_cmd(&scenario, out)?,
        Command::Perturb => perturb(&scenario, out)?,
    };
    let passed = files.passed;
    let mut written = Vec::with_capacity(files.files.len());
    for (path, contents) in files.files {
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(Outcome { passed, written })
}

struct Files {
    passed: bool,
    files: Vec<(PathBuf, String)>,
}

fn chain_state(s: &Scenario) -> Result<MBFieldState, CliError> {
    let chain = s.chain.as_ref().ok_or_else(|| ConfigError::new("chain", "this command needs a chain"))?;
    Ok(evaluate_chain(chain, &s.grid)?)
}

fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn push_bloch_header(header: &mut String, nodes: usize) {
    for k in 0..nodes {
        for c in ["n_am", "n_ap", "n_b", "re_nup", "im_nup", "re_num", "im_num", "re_nua", "im_nua"] {
            let _ = write!(header, ",node{k}_{c}");
        }
    }
}

/// Field table: one row per grid point, tau outer and zeta inner.
pub fn field_table(state: &MBFieldState, s: &Scenario) -> Result<String, CliError> {
    let bloch = s.output.bloch;
    let mut out = String::from("tau,zeta,re_em,im_em,re_ep,im_ep");
    if bloch {
        push_bloch_header(&mut out, state.detuning().len());
    }
    out.push('\n');
    let rows: Vec<Result<String, mb_darboux::Error>> = s
        .grid
        .points()
        .par_iter()
        .map(|&(t, z)| {
            let p = state.point(t, z)?;
            let mut row =
                format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", t, z, p.e_minus.re, p.e_minus.im, p.e_plus.re, p.e_plus.im);
            if bloch {
                for a in &p.bloch {
                    let b = BlochComponents::from_matrix(a);
                    for v in [b.n_am, b.n_ap, b.n_b, b.nu_p.re, b.nu_p.im, b.nu_m.re, b.nu_m.im, b.nu_a.re, b.nu_a.im] {
                        let _ = write!(row, ",{v:.17e}");
                    }
                }
            }
            row.push('\n');
            Ok(row)
        })
        .collect();
    for r in rows {
        out.push_str(&r?);
    }
    Ok(out)
}

fn generate(s: &Scenario, out: &Path) -> Result<Files, CliError> {
    let state = chain_state(s)?;
    Ok(Files { passed: true, files: vec![(out.to_path_buf(), field_table(&state, s)?)] })
}

fn verdict(report: &mut String, name: &str, value: f64, tolerance: f64) -> bool {
    let pass = value <= tolerance;
    let _ = writeln!(report, "{name}.tolerance={tolerance:e}\n{name}.pass={pass}");
    pass
}

fn verify(s: &Scenario, out: &Path) -> Result<Files, CliError> {
    let mut state = chain_state(s)?;
    if s.verify.corrupt_e_plus {
        state = state.with_scaled_e_plus(1.01);
    }
    let mut checks = s.verify.checks.clone();
    if checks.is_empty() {
        checks.push(Check::Mb);
        if state.has_pure_state() {
            checks.push(Check::Pure);
        }
        checks.push(Check::Zcr);
        checks.push(Check::Conservation);
        if s.perturb.is_some() {
            checks.push(Check::Linearized);
        }
    }
    checks.sort();
    checks.dedup();

    let tol = &s.verify.tolerances;
    let mut report = String::new();
    let mut passed = true;
    for check in checks {
        match check {
            Check::Mb => {
                let r = residual_mb(&state, &s.grid, &s.residual)?;
                report.push_str(&r.to_kv());
                passed &= verdict(&mut report, "mb", r.max(), tol.mb);
            }
            Check::Pure => {
                let r = residual_pure(&state, &s.grid, &s.residual)?;
                report.push_str(&r.to_kv());
                passed &= verdict(&mut report, "pure", r.max(), tol.pure);
            }
            Check::Zcr => {
                let r = residual_zcr(&state, &s.grid, &s.residual)?;
                report.push_str(&r.to_kv());
                passed &= verdict(&mut report, "zcr", r.max(), tol.zcr);
            }
            Check::Conservation => {
                let r = conservation_report(&state, &s.grid)?;
                report.push_str(&r.to_kv());
                let _ = writeln!(report, "conservation.max={:.6e}", r.max_drift());
                passed &= verdict(&mut report, "conservation", r.max_drift(), tol.conservation);
            }
            Check::Linearized => {
                let p = s.perturb.as_ref().ok_or_else(|| ConfigError::new("verify.checks", "linearized needs a perturb section"))?;
                let pert = superpose_symmetries(&state, &p.contour)?;
                let r = linearized_residual(&pert, &s.grid, &s.residual)?;
                report.push_str(&r.to_kv());
                passed &= verdict(&mut report, "linearized", r.max(), p.tolerance);
            }
        }
    }
    let _ = writeln!(report, "status={}", if passed { "pass" } else { "fail" });
    Ok(Files { passed, files: vec![(out.to_path_buf(), report)] })
}

fn reconcile_cmd(s: &Scenario, out: &Path) -> Result<Files, CliError> {
    let (form, tolerance) = s.reconcile.as_ref().ok_or_else(|| ConfigError::new("reconcile", "this command needs a reconcile section"))?;
    let entry = reconcile(form, &s.detuning, &s.grid)?;
    let passed = tolerance.is_none_or(|t| entry.max_deviation <= t);
    let entries = [entry];
    Ok(Files { passed, files: vec![(out.to_path_buf(), errata_markdown(&entries)), (sibling(out, "csv"), errata_csv(&entries))] })
}

fn perturb(s: &Scenario, out: &Path) -> Result<Files, CliError> {
    let p = s.perturb.as_ref().ok_or_else(|| ConfigError::new("perturb", "this command needs a perturb section"))?;
    let state = chain_state(s)?;
    let pert = superpose_symmetries(&state, &p.contour)?;
    let lin = linearized_residual(&pert, &s.grid, &s.residual)?;
    let mut report = lin.to_kv();
    let mut passed = verdict(&mut report, "linearized", lin.max(), p.tolerance);

    let mut csv = String::from("re_delta,im_delta,u_error,a_error\n");
    if !p.deltas.is_empty() {
        let t = &p.contour.terms[0];
        let points = if p.points.is_empty() { s.grid.points() } else { p.points.clone() };
        match finite_difference_validation(&state, t.mu, &t.right, &t.left, &p.deltas, &points) {
            Ok(table) => {
                let _ = writeln!(report, "convergence.min_order={:.6e}", table.min_order());
                csv = table.to_csv();
            }
            Err(e) if matches!(e.root(), mb_darboux::Error::ConvergenceOrderTooLow { .. }) => {
                let _ = writeln!(report, "convergence.error={e}");
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let _ = writeln!(report, "status={}", if passed { "pass" } else { "fail" });
    Ok(Files { passed, files: vec![(out.to_path_buf(), csv), (sibling(out, "txt"), report)] })
}
