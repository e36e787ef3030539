//! Scenario configuration: the JSON schema and its conversion into library
//! types. Every validation failure names the offending field path.

use mb_darboux::broadening::BroadeningModel;
use mb_darboux::closedforms::{ClosedForm, DressedPeriodicParams, TwoSolitonParams};
use mb_darboux::darboux::{DressingChain, DressingStep};
use mb_darboux::model::{DetuningModel, FdOrder, Grid2D, ResidualOptions};
use mb_darboux::perturbation::{ContourSpec, SymmetryTerm};
use mb_darboux::seeds::{Branch, SeedBackground, SeedKind, WaveConstants};
use mb_darboux::{Vector3, C64};
use serde::Deserialize;

/// A configuration problem, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl ToString) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

/// Complex number as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> Self {
        C64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BroadeningJson {
    Sharp {
        #[serde(default)]
        eta0: f64,
    },
    Discrete {
        nodes: Vec<[f64; 2]>,
    },
    Gaussian {
        #[serde(default)]
        center: f64,
        width: f64,
        n_nodes: usize,
    },
    Lorentzian {
        #[serde(default)]
        center: f64,
        width: f64,
        n_nodes: usize,
        cutoff: f64,
    },
}

impl Default for BroadeningJson {
    fn default() -> Self {
        BroadeningJson::Sharp { eta0: 0.0 }
    }
}

impl BroadeningJson {
    fn to_model(&self) -> BroadeningModel {
        match self {
            BroadeningJson::Sharp { eta0 } => BroadeningModel::SharpLine { eta0: *eta0 },
            BroadeningJson::Discrete { nodes } => BroadeningModel::Discrete { nodes: nodes.iter().map(|n| (n[0], n[1])).collect() },
            BroadeningJson::Gaussian { center, width, n_nodes } => {
                BroadeningModel::Gaussian { center: *center, width: *width, n_nodes: *n_nodes }
            }
            BroadeningJson::Lorentzian { center, width, n_nodes, cutoff } => {
                BroadeningModel::Lorentzian { center: *center, width: *width, n_nodes: *n_nodes, cutoff: *cutoff }
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetuningJson {
    /// Resonance shift `delta`.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub broadening: BroadeningJson,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedJson {
    Zero,
    Populations {
        n_am: f64,
        n_ap: f64,
        n_b: f64,
    },
    PeriodicPump {
        #[serde(rename = "E_re")]
        e_re: f64,
        #[serde(rename = "E_im", default)]
        e_im: f64,
        #[serde(default = "default_branch")]
        branch: i32,
    },
    NlsPeriodic {
        #[serde(rename = "E_re")]
        e_re: f64,
        #[serde(rename = "E_im", default)]
        e_im: f64,
        #[serde(default)]
        omega: f64,
    },
}

fn default_branch() -> i32 {
    1
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepJson {
    pub mu_re: f64,
    #[serde(default)]
    pub mu_im: f64,
    #[serde(rename = "C")]
    pub c: [ComplexJson; 3],
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChainJson {
    pub seed: SeedJson,
    #[serde(default)]
    pub steps: Vec<StepJson>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_tau: usize,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub n_zeta: usize,
}

impl GridJson {
    pub fn to_grid(&self) -> Grid2D {
        Grid2D::new((self.tau_min, self.tau_max, self.n_tau), (self.zeta_min, self.zeta_max, self.n_zeta))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Mb,
    Pure,
    Zcr,
    Conservation,
    /// Linearized residual of the `perturb` contour around the chain state.
    Linearized,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_mb_tol")]
    pub mb: f64,
    #[serde(default = "default_mb_tol")]
    pub pure: f64,
    #[serde(default = "default_mb_tol")]
    pub zcr: f64,
    #[serde(default = "default_conservation_tol")]
    pub conservation: f64,
}

fn default_mb_tol() -> f64 {
    1e-5
}

fn default_conservation_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mb: default_mb_tol(), pure: default_mb_tol(), zcr: default_mb_tol(), conservation: default_conservation_tol() }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyJson {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Checks to run; empty means every check the state supports.
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Multiplies `e_+` by 1.01 before verification.
    #[serde(default)]
    pub corrupt_e_plus: bool,
}

fn default_h() -> f64 {
    1e-3
}

fn default_order() -> u8 {
    2
}

impl Default for VerifyJson {
    fn default() -> Self {
        Self { h: default_h(), order: default_order(), tolerances: Tolerances::default(), checks: Vec::new(), corrupt_e_plus: false }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputJson {
    /// Include per-node Bloch columns in field tables.
    #[serde(default = "default_true")]
    pub bloch: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputJson {
    fn default() -> Self {
        Self { bloch: true }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReconcileJson {
    TwoSoliton {
        mu_re: f64,
        mu_im: f64,
        a: [ComplexJson; 2],
        b: [ComplexJson; 2],
        c: [ComplexJson; 2],
        #[serde(default)]
        tolerance: Option<f64>,
    },
    TwoSolitonCompact {
        mu_re: f64,
        mu_im: f64,
        a: [ComplexJson; 2],
        b: [ComplexJson; 2],
        c: [ComplexJson; 2],
        #[serde(default)]
        tolerance: Option<f64>,
    },
    DressedPeriodic {
        #[serde(rename = "E_re")]
        e_re: f64,
        #[serde(rename = "E_im", default)]
        e_im: f64,
        gamma: ComplexJson,
        #[serde(rename = "C1")]
        c1: ComplexJson,
        #[serde(rename = "C_plus")]
        c_plus: ComplexJson,
        #[serde(rename = "C_minus")]
        c_minus: ComplexJson,
        #[serde(default = "default_branch")]
        branch: i32,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub mu_re: f64,
    #[serde(default)]
    pub mu_im: f64,
    pub beta: ComplexJson,
    pub right: [ComplexJson; 3],
    pub left: [ComplexJson; 3],
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PerturbJson {
    pub terms: Vec<TermJson>,
    #[serde(default)]
    pub hermitian_pairing: bool,
    /// Shifts `nu - mu` for the convergence study of the first term.
    #[serde(default)]
    pub deltas: Vec<ComplexJson>,
    /// Evaluation points `[tau, zeta]` for the convergence study.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_mb_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    #[serde(default)]
    pub detuning: DetuningJson,
    pub chain: Option<ChainJson>,
    pub grid: GridJson,
    #[serde(default)]
    pub verify: VerifyJson,
    #[serde(default)]
    pub output: OutputJson,
    pub reconcile: Option<ReconcileJson>,
    pub perturb: Option<PerturbJson>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub detuning: DetuningModel,
    pub chain: Option<DressingChain>,
    pub grid: Grid2D,
    pub verify: VerifyJson,
    pub residual: ResidualOptions,
    pub output: OutputJson,
    pub reconcile: Option<(ClosedForm, Option<f64>)>,
    pub perturb: Option<PerturbSpec>,
}

#[derive(Debug, Clone)]
pub struct PerturbSpec {
    pub contour: ContourSpec,
    pub deltas: Vec<C64>,
    pub points: Vec<(f64, f64)>,
    pub tolerance: f64,
}

/// Parses JSON text; syntax and schema errors carry the field path.
pub fn parse(text: &str) -> Result<ScenarioJson, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.into_inner())
    })
}

/// Parses and validates a scenario, applying command-line overrides.
pub fn load(text: &str, h: Option<f64>, order: Option<u8>) -> Result<Scenario, ConfigError> {
    let mut json = parse(text)?;
    if let Some(h) = h {
        json.verify.h = h;
    }
    if let Some(o) = order {
        json.verify.order = o;
    }
    validate(json)
}

fn constants(path: &str, c: &[ComplexJson; 3]) -> Result<WaveConstants, ConfigError> {
    let w = WaveConstants(Vector3::new(c[0].into(), c[1].into(), c[2].into()));
    w.validate().map_err(|e| ConfigError::new(path, e))?;
    Ok(w)
}

fn branch(path: &str, b: i32) -> Result<Branch, ConfigError> {
    Branch::from_sign(b).ok_or_else(|| ConfigError::new(path, format!("branch must be 1 or -1, got {b}")))
}

fn seed(json: &SeedJson, detuning: &DetuningModel) -> Result<SeedBackground, ConfigError> {
    let kind = match *json {
        SeedJson::Zero => SeedKind::Zero,
        SeedJson::Populations { n_am, n_ap, n_b } => SeedKind::Populations { n_am, n_ap, n_b },
        SeedJson::PeriodicPump { e_re, e_im, branch: b } => {
            SeedKind::PeriodicPump { e: C64::new(e_re, e_im), branch: branch("chain.seed.branch", b)? }
        }
        SeedJson::NlsPeriodic { e_re, e_im, omega } => SeedKind::NlsPeriodic { e: C64::new(e_re, e_im), omega },
    };
    let seed = SeedBackground::new(kind, detuning.clone());
    seed.validate().map_err(|e| ConfigError::new("chain.seed", e))?;
    Ok(seed)
}

pub fn validate(json: ScenarioJson) -> Result<Scenario, ConfigError> {
    let detuning = DetuningModel::new(json.detuning.delta, json.detuning.broadening.to_model())
        .map_err(|e| ConfigError::new("detuning.broadening", e))?;
    let grid = json.grid.to_grid();
    grid.validate().map_err(|e| ConfigError::new("grid", e))?;
    let order = FdOrder::from_u8(json.verify.order)
        .ok_or_else(|| ConfigError::new("verify.order", format!("must be 2 or 4, got {}", json.verify.order)))?;
    let residual = ResidualOptions::new(json.verify.h, order);
    residual.stencil().map_err(|e| ConfigError::new("verify.h", e))?;
    for (name, v) in [
        ("mb", json.verify.tolerances.mb),
        ("pure", json.verify.tolerances.pure),
        ("zcr", json.verify.tolerances.zcr),
        ("conservation", json.verify.tolerances.conservation),
    ] {
        if v.is_nan() || v < 0.0 {
            return Err(ConfigError::new(format!("verify.tolerances.{name}"), format!("must be nonnegative, got {v}")));
        }
    }

    let chain = match &json.chain {
        Some(c) => {
            let seed = seed(&c.seed, &detuning)?;
            let mut steps = Vec::with_capacity(c.steps.len());
            for (i, s) in c.steps.iter().enumerate() {
                let path = format!("chain.steps[{i}]");
                let step = DressingStep::new(C64::new(s.mu_re, s.mu_im), constants(&format!("{path}.C"), &s.c)?);
                step.validate().map_err(|e| ConfigError::new(format!("{path}.mu_re"), e))?;
                steps.push(step);
            }
            let chain = DressingChain::new(seed, steps);
            chain.validate().map_err(|e| match e {
                mb_darboux::Error::Step { index, source } => ConfigError::new(format!("chain.steps[{index}].mu_re"), source),
                e => ConfigError::new("chain", e),
            })?;
            Some(chain)
        }
        None => None,
    };

    let reconcile = json.reconcile.as_ref().map(reconcile_form).transpose()?;

    let perturb = match &json.perturb {
        Some(p) => {
            let mut terms = Vec::with_capacity(p.terms.len());
            for (i, t) in p.terms.iter().enumerate() {
                let path = format!("perturb.terms[{i}]");
                terms.push(SymmetryTerm {
                    mu: C64::new(t.mu_re, t.mu_im),
                    beta: t.beta.into(),
                    right: constants(&format!("{path}.right"), &t.right)?,
                    left: constants(&format!("{path}.left"), &t.left)?,
                });
            }
            if terms.is_empty() {
                return Err(ConfigError::new("perturb.terms", "at least one term is required"));
            }
            if let Some(i) = p.deltas.iter().position(|d| d.re == 0.0 && d.im == 0.0) {
                return Err(ConfigError::new(format!("perturb.deltas[{i}]"), "delta must be nonzero"));
            }
            Some(PerturbSpec {
                contour: ContourSpec { terms, hermitian_pairing: p.hermitian_pairing },
                deltas: p.deltas.iter().map(|&d| d.into()).collect(),
                points: p.points.iter().map(|p| (p[0], p[1])).collect(),
                tolerance: p.tolerance,
            })
        }
        None => None,
    };

    Ok(Scenario { detuning, chain, grid, verify: json.verify, residual, output: json.output, reconcile, perturb })
}

fn reconcile_form(json: &ReconcileJson) -> Result<(ClosedForm, Option<f64>), ConfigError> {
    let two = |mu_re: f64, mu_im: f64, a: &[ComplexJson; 2], b: &[ComplexJson; 2], c: &[ComplexJson; 2]| {
        let p = TwoSolitonParams {
            mu: C64::new(mu_re, mu_im),
            a1: a[0].into(),
            a2: a[1].into(),
            b1: b[0].into(),
            b2: b[1].into(),
            c1: c[0].into(),
            c2: c[1].into(),
        };
        p.validate().map_err(|e| ConfigError::new("reconcile", e))?;
        Ok::<_, ConfigError>(p)
    };
    Ok(match json {
        ReconcileJson::TwoSoliton { mu_re, mu_im, a, b, c, tolerance } => {
            (ClosedForm::TwoSoliton(two(*mu_re, *mu_im, a, b, c)?), *tolerance)
        }
        ReconcileJson::TwoSolitonCompact { mu_re, mu_im, a, b, c, tolerance } => {
            (ClosedForm::TwoSolitonCompact(two(*mu_re, *mu_im, a, b, c)?), *tolerance)
        }
        ReconcileJson::DressedPeriodic { e_re, e_im, gamma, c1, c_plus, c_minus, branch: b, tolerance } => {
            let p = DressedPeriodicParams {
                e: C64::new(*e_re, *e_im),
                gamma: (*gamma).into(),
                c1: (*c1).into(),
                c_plus: (*c_plus).into(),
                c_minus: (*c_minus).into(),
                branch: branch("reconcile.branch", *b)?,
            };
            p.validate().map_err(|e| ConfigError::new("reconcile.E_re", e))?;
            (ClosedForm::DressedPeriodic(p), *tolerance)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "chain": {"seed": {"kind": "zero"}, "steps": [{"mu_re": 0.5, "mu_im": 0.3, "C": [{"re": 1}, {"re": 0}, {"re": 1}]}]},
        "grid": {"tau_min": -1, "tau_max": 1, "n_tau": 3, "zeta_min": 0, "zeta_max": 0, "n_zeta": 1}
    }"#;

    #[test]
    fn minimal_config_loads_with_defaults() {
        let s = load(BASE, None, None).unwrap();
        assert_eq!(s.chain.unwrap().steps.len(), 1);
        assert_eq!(s.residual, ResidualOptions::new(1e-3, FdOrder::Second));
        assert!(s.output.bloch);
    }

    #[test]
    fn overrides_apply() {
        let s = load(BASE, Some(5e-4), Some(4)).unwrap();
        assert_eq!(s.residual, ResidualOptions::new(5e-4, FdOrder::Fourth));
        assert_eq!(load(BASE, None, Some(3)).unwrap_err().path, "verify.order");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = BASE.replace("\"mu_re\": 0.5", "\"mu_re\": \"x\"");
        assert_eq!(parse(&bad).unwrap_err().path, "chain.steps[0].mu_re");
        let unknown = BASE.replace("\"n_tau\": 3", "\"n_tau\": 3, \"nt\": 1");
        assert!(parse(&unknown).unwrap_err().path.starts_with("grid"));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let trivial = BASE.replace("\"mu_re\": 0.5", "\"mu_re\": 0.0");
        assert_eq!(load(&trivial, None, None).unwrap_err().path, "chain.steps[0].mu_re");
        let zero_c = BASE.replace("[{\"re\": 1}, {\"re\": 0}, {\"re\": 1}]", "[{\"re\": 0}, {\"re\": 0}, {\"re\": 0}]");
        assert_eq!(load(&zero_c, None, None).unwrap_err().path, "chain.steps[0].C");
        let pops = BASE.replace("{\"kind\": \"zero\"}", "{\"kind\": \"populations\", \"n_am\": 0.5, \"n_ap\": 0.5, \"n_b\": 0.5}");
        assert_eq!(load(&pops, None, None).unwrap_err().path, "chain.seed");
        let grid = BASE.replace("\"n_tau\": 3", "\"n_tau\": 0");
        assert_eq!(load(&grid, None, None).unwrap_err().path, "grid");
        let width =
            BASE.replace("\"grid\"", "\"detuning\": {\"broadening\": {\"kind\": \"gaussian\", \"width\": -1, \"n_nodes\": 5}}, \"grid\"");
        assert_eq!(load(&width, None, None).unwrap_err().path, "detuning.broadening");
    }

    #[test]
    fn repeated_step_parameter_is_located() {
        let two = BASE.replace(
            "\"steps\": [{\"mu_re\": 0.5, \"mu_im\": 0.3, \"C\": [{\"re\": 1}, {\"re\": 0}, {\"re\": 1}]}]",
            "\"steps\": [{\"mu_re\": 0.5, \"mu_im\": 0.3, \"C\": [{\"re\": 1}, {\"re\": 0}, {\"re\": 1}]}, {\"mu_re\": 0.5, \"mu_im\": 0.3, \"C\": [{\"re\": 1}, {\"re\": 1}, {\"re\": 1}]}]",
        );
        assert_eq!(load(&two, None, None).unwrap_err().path, "chain.steps[1].mu_re");
    }
}
