//! JSON scenario runner and report emitter.
//!
//! A scenario file names a command, the channels or resources it acts on,
//! and numeric parameters; running it produces a [`Report`] with the
//! computed results, the tolerance every numeric verdict was judged
//! against, and a pass/fail line per embedded assertion. Reports are
//! deterministic given the scenario and seed, byte for byte.
//!
//! Complex numbers serialize as `[re, im]` pairs and matrices as row-major
//! nested arrays, so descriptors stay language-neutral.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channels::{choi_of, max_entangled_projector, Channel, ChannelFamily};
use crate::complexity::{channel_complexity, cj_fidelity, complexity, optimize_fidelity};
use crate::control::{lambda_map, modified_channel, trace_character, Ancilla, ControlResources, OutcomeOps};
use crate::error::{Error, Result};
use crate::krausmin::{minimal_count, reduce, upper_bound, KrausSet};
use crate::linalg::{numerical_rank, Complex64, ComplexMatrix, PureState, Tolerances};
use crate::protocols::{
    bitflip_correction, p_mu, phase_flip_code_demo, qecc_phase_flip_demo, qt_channel, qt_resources,
    theorem1_witness, unitary_shift_correction,
};
use crate::random::haar_random_channel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Row-major matrix of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;
/// State vector of `[re, im]` pairs.
pub type JsonVector = Vec<[f64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Complexity,
    Qt,
    Bitflip,
    UnitaryShift,
    QeccDemo,
    KrausMin,
    FidelityOpt,
    Theorem1,
}

impl std::fmt::Display for CommandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CommandKind::Complexity => "complexity",
            CommandKind::Qt => "qt",
            CommandKind::Bitflip => "bitflip",
            CommandKind::UnitaryShift => "unitary-shift",
            CommandKind::QeccDemo => "qecc-demo",
            CommandKind::KrausMin => "kraus-min",
            CommandKind::FidelityOpt => "fidelity-opt",
            CommandKind::Theorem1 => "theorem1",
        };
        f.write_str(s)
    }
}

/// Channel in wire form: a zoo name with its parameter, or explicit matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<JsonMatrix>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDescriptor {
    #[serde(rename = "U_Aa")]
    pub u_aa: JsonMatrix,
    #[serde(rename = "Pi_Aa")]
    pub pi_aa: JsonMatrix,
    #[serde(rename = "U_Bb")]
    pub u_bb: JsonMatrix,
    #[serde(rename = "Pi_Bb")]
    pub pi_bb: JsonMatrix,
    #[serde(rename = "B_filter", default, skip_serializing_if = "Option::is_none")]
    pub b_filter: Option<JsonMatrix>,
}

/// Control resources in wire form. The ancilla is either a Schmidt vector or
/// an explicit state vector on `H_a (x) H_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceDescriptor {
    pub n: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<JsonVector>,
    pub outcomes: Vec<OutcomeDescriptor>,
}

/// Named family for the complexity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEntry {
    pub name: String,
    pub family: Vec<ChannelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_complexity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametrization: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_state: Option<JsonVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

/// Expected values asserted by the run (besides the built-in checks).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Expect {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logical_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ToleranceOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_tp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_eq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_herm: Option<f64>,
}

/// One executable scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<ChannelDescriptor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<ComplexityEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEcho {
    pub eps_rank: f64,
    pub eps_tp: f64,
    pub eps_eq: f64,
    pub eps_herm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Tolerance the verdict was judged against (0 for exact integers).
    pub tolerance: f64,
    pub detail: String,
}

/// Full machine-readable run record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub seed: u64,
    pub tolerances: ToleranceEcho,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub eps_rank: Option<f64>,
    pub seed: Option<u64>,
}

/// Formats a float with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..=11).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, x)
    } else {
        format!("{:.11e}", x)
    }
}

fn complex_from(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn matrix_from_json(m: &JsonMatrix) -> Result<ComplexMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidScenario(
            "matrix rows must be nonempty and equal-length".into(),
        ));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in m {
        for &pair in row {
            entries.push(complex_from(pair));
        }
    }
    ComplexMatrix::new(rows, cols, entries)
}

fn vector_from_json(v: &JsonVector) -> Vec<Complex64> {
    v.iter().map(|&pair| complex_from(pair)).collect()
}

fn channel_from_descriptor(d: &ChannelDescriptor) -> Result<Channel> {
    let need_p = || {
        d.p.ok_or_else(|| Error::InvalidScenario(format!("channel kind {} needs \"p\"", d.kind)))
    };
    let need_gamma = || {
        d.gamma
            .ok_or_else(|| Error::InvalidScenario(format!("channel kind {} needs \"gamma\"", d.kind)))
    };
    match d.kind.as_str() {
        "identity" => Ok(Channel::identity(2)),
        "bit_flip" => Channel::bit_flip(need_p()?),
        "phase_flip" => Channel::phase_flip(need_p()?),
        "depolarizing" => Channel::depolarizing(need_p()?),
        "amplitude_damping" => Channel::amplitude_damping(need_gamma()?),
        "phase_damping" => Channel::phase_damping(need_gamma()?),
        "unitary" => {
            let ms = d
                .matrices
                .as_ref()
                .filter(|ms| ms.len() == 1)
                .ok_or_else(|| Error::InvalidScenario("unitary channel needs exactly one matrix".into()))?;
            Channel::unitary(matrix_from_json(&ms[0])?)
        }
        "kraus" => {
            let ms = d
                .matrices
                .as_ref()
                .filter(|ms| !ms.is_empty())
                .ok_or_else(|| Error::InvalidScenario("kraus channel needs \"matrices\"".into()))?;
            Channel::new(ms.iter().map(matrix_from_json).collect::<Result<_>>()?)
        }
        other => Err(Error::InvalidScenario(format!("unknown channel kind {other:?}"))),
    }
}

fn resources_from_descriptor(d: &ResourceDescriptor, tol: &Tolerances) -> Result<ControlResources> {
    let ancilla = match (&d.schmidt, &d.ancilla) {
        (Some(mu), None) => Ancilla::Schmidt(mu.clone()),
        (None, Some(v)) => Ancilla::Pure(PureState::new(vector_from_json(v))?),
        _ => {
            return Err(Error::InvalidScenario(
                "resources need exactly one of \"schmidt\" or \"ancilla\"".into(),
            ))
        }
    };
    let outcomes = d
        .outcomes
        .iter()
        .map(|o| {
            Ok(OutcomeOps {
                u_aa: matrix_from_json(&o.u_aa)?,
                pi_aa: matrix_from_json(&o.pi_aa)?,
                u_bb: matrix_from_json(&o.u_bb)?,
                pi_bb: matrix_from_json(&o.pi_bb)?,
                b_filter: o.b_filter.as_ref().map(matrix_from_json).transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ControlResources::new(d.n, d.dim_a, d.dim_b, ancilla, outcomes, tol)
}

struct Checks {
    list: Vec<Assertion>,
}

impl Checks {
    fn new() -> Self {
        Self { list: Vec::new() }
    }

    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.list.push(Assertion {
            name: name.to_string(),
            passed: (got - want).abs() <= tol,
            tolerance: tol,
            detail: format!("got {} want {}", fmt12(got), fmt12(want)),
        });
    }

    fn at_most(&mut self, name: &str, got: f64, bound: f64, tol: f64) {
        self.list.push(Assertion {
            name: name.to_string(),
            passed: got <= bound + tol,
            tolerance: tol,
            detail: format!("got {} bound {}", fmt12(got), fmt12(bound)),
        });
    }

    fn exact(&mut self, name: &str, got: usize, want: usize) {
        self.list.push(Assertion {
            name: name.to_string(),
            passed: got == want,
            tolerance: 0.0,
            detail: format!("got {got} want {want}"),
        });
    }

    fn flag(&mut self, name: &str, passed: bool, detail: String) {
        self.list.push(Assertion {
            name: name.to_string(),
            passed,
            tolerance: 0.0,
            detail,
        });
    }
}

fn effective_tolerances(scenario: &Scenario, overrides: &Overrides) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    if let Some(over) = &scenario.tolerances {
        if let Some(x) = over.eps_rank {
            tol.eps_rank = x;
        }
        if let Some(x) = over.eps_tp {
            tol.eps_tp = x;
        }
        if let Some(x) = over.eps_eq {
            tol.eps_eq = x;
        }
        if let Some(x) = over.eps_herm {
            tol.eps_herm = x;
        }
    }
    if let Some(x) = overrides.eps_rank {
        tol.eps_rank = x;
    }
    tol.validate()?;
    Ok(tol)
}

/// Executes a scenario and assembles the report. Deterministic given the
/// scenario content and seed.
pub fn run_scenario(scenario: &Scenario, overrides: &Overrides) -> Result<Report> {
    let tol = effective_tolerances(scenario, overrides)?;
    let params = scenario.params.clone().unwrap_or_default();
    let seed = overrides.seed.or(params.seed).unwrap_or(0);

    let mut checks = Checks::new();
    let results = match scenario.command {
        CommandKind::Complexity => run_complexity(scenario, &tol, &mut checks)?,
        CommandKind::Qt => run_qt(scenario, &params, seed, &tol, &mut checks)?,
        CommandKind::Bitflip => run_bitflip(scenario, &params, &tol, &mut checks)?,
        CommandKind::UnitaryShift => run_unitary_shift(scenario, &params, &tol, &mut checks)?,
        CommandKind::QeccDemo => run_qecc_demo(scenario, &params, &mut checks)?,
        CommandKind::KrausMin => run_kraus_min(scenario, &params, &tol, &mut checks)?,
        CommandKind::FidelityOpt => run_fidelity_opt(scenario, &params, &tol, &mut checks)?,
        CommandKind::Theorem1 => run_theorem1(&params, seed, &tol, &mut checks)?,
    };

    let passed = checks.list.iter().all(|a| a.passed);
    Ok(Report {
        scenario: scenario.clone(),
        seed,
        tolerances: ToleranceEcho {
            eps_rank: tol.eps_rank,
            eps_tp: tol.eps_tp,
            eps_eq: tol.eps_eq,
            eps_herm: tol.eps_herm,
        },
        results,
        assertions: checks.list,
        passed,
    })
}

/// Loads a scenario file and runs it.
pub fn run_file(path: &std::path::Path, overrides: &Overrides) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    run_scenario(&scenario, overrides)
}

fn run_complexity(scenario: &Scenario, tol: &Tolerances, checks: &mut Checks) -> Result<Value> {
    let entries: Vec<ComplexityEntry> = if let Some(entries) = &scenario.entries {
        entries.clone()
    } else if let Some(family) = &scenario.family {
        vec![ComplexityEntry {
            name: scenario.name.clone().unwrap_or_else(|| "family".to_string()),
            family: family.clone(),
            expect_complexity: scenario.expect.as_ref().and_then(|e| e.complexity),
        }]
    } else {
        return Err(Error::InvalidScenario(
            "complexity needs a \"family\" or \"entries\" list".into(),
        ));
    };

    let mut rows = Vec::new();
    for entry in &entries {
        let members = entry
            .family
            .iter()
            .map(channel_from_descriptor)
            .collect::<Result<Vec<_>>>()?;
        let chi = complexity(&ChannelFamily::new(members)?, tol)?;
        if let Some(want) = entry.expect_complexity {
            checks.exact(&format!("complexity[{}]", entry.name), chi, want);
        }
        rows.push(json!({ "name": entry.name, "complexity": chi }));
    }
    Ok(json!({ "entries": rows }))
}

fn run_qt(
    scenario: &Scenario,
    params: &Params,
    seed: u64,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<Value> {
    if let Some(grid) = &params.mu_grid {
        // qubit sweep using the closed-form channel
        let mut rows = Vec::new();
        for &mu in grid {
            let p = p_mu(mu)?;
            let nu = (1.0 - mu * mu).sqrt();
            let ch = qt_channel(&[mu, nu])?;
            let fidelity = cj_fidelity(&choi_of(&ch));
            let chi = channel_complexity(&ch, tol)?;
            checks.close(&format!("fidelity_vs_p_mu[mu={}]", fmt12(mu)), fidelity, 1.0 - p, 1e-12);
            rows.push(json!({
                "mu": mu,
                "p_mu": p,
                "fidelity": fidelity,
                "complexity": chi,
            }));
        }
        return Ok(json!({ "sweep": rows }));
    }

    let n = params.n.unwrap_or(2);
    let schmidt = params
        .schmidt
        .clone()
        .or_else(|| params.mu.map(|mu| vec![mu, (1.0 - mu * mu).sqrt()]))
        .ok_or_else(|| Error::InvalidScenario("qt needs \"schmidt\" (or \"mu\") in params".into()))?;
    if schmidt.len() != n {
        return Err(Error::InvalidScenario(format!(
            "schmidt vector length {} != N = {n}",
            schmidt.len()
        )));
    }

    let closed = qt_channel(&schmidt)?;
    let res = qt_resources(n, &schmidt, tol)?;
    // the teleported state never crosses the physical channel; a seeded
    // random channel exercises exactly that
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let physical = haar_random_channel(n, n * n, &mut rng);
    let simulated = modified_channel(&physical, &res)?;
    let deviation = choi_of(&closed).matrix().max_abs_diff(choi_of(&simulated).matrix());
    checks.close("closed_form_equals_simulation", deviation, 0.0, 1e-10);

    let chi = channel_complexity(&closed, tol)?;
    checks.at_most("complexity_at_most_n", chi as f64, n as f64, 0.0);

    let character = trace_character(&lambda_map(&res)?, tol)?;
    let fidelity = cj_fidelity(&choi_of(&closed));

    let mut results = serde_json::Map::new();
    results.insert("complexity".into(), json!(chi));
    results.insert("fidelity".into(), json!(fidelity));
    results.insert("end_to_end_deviation".into(), json!(deviation));
    results.insert("trace_character".into(), json!(character.character.to_string()));
    results.insert(
        "trace_witness".into(),
        json!({
            "min_eigenvalue": character.min_eigenvalue,
            "max_eigenvalue": character.max_eigenvalue,
        }),
    );
    if n == 2 {
        let p = p_mu(schmidt[0])?;
        results.insert("p_mu".into(), json!(p));
        checks.close("fidelity_equals_one_minus_p_mu", fidelity, 1.0 - p, 1e-12);
        if let Some(want) = scenario.expect.as_ref().and_then(|e| e.p_mu) {
            checks.close("expected_p_mu", p, want, 1e-12);
        }
    }
    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.complexity) {
        checks.exact("expected_complexity", chi, want);
    }
    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.fidelity) {
        checks.close("expected_fidelity", fidelity, want, 1e-10);
    }
    Ok(Value::Object(results))
}

fn run_bitflip(
    scenario: &Scenario,
    params: &Params,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<Value> {
    let mu = params
        .mu
        .ok_or_else(|| Error::InvalidScenario("bitflip needs \"mu\" in params".into()))?;
    let p = params
        .p
        .ok_or_else(|| Error::InvalidScenario("bitflip needs \"p\" in params".into()))?;
    let outcome = bitflip_correction(mu, p, tol)?;

    checks.close("success_probability", outcome.success_prob, 2.0 * mu * mu, 1e-12);
    let target = max_entangled_projector(2).scaled_re(2.0 * mu * mu);
    let choi_deviation = outcome.choi_after.matrix().max_abs_diff(&target);
    checks.close("post_success_choi_is_ideal", choi_deviation, 0.0, 1e-10);
    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.success_prob) {
        checks.close("expected_success_prob", outcome.success_prob, want, 1e-12);
    }

    Ok(json!({
        "success_prob": outcome.success_prob,
        "expected_success_prob": 2.0 * mu * mu,
        "choi_deviation_from_target": choi_deviation,
        "complexity_before": outcome.complexity_before,
        "complexity_after": outcome.complexity_after,
    }))
}

fn run_unitary_shift(
    scenario: &Scenario,
    params: &Params,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<Value> {
    let descriptor = scenario
        .channel
        .as_ref()
        .ok_or_else(|| Error::InvalidScenario("unitary-shift needs a \"channel\"".into()))?;
    let ch = channel_from_descriptor(descriptor)?;
    if ch.kraus().len() != 1 {
        return Err(Error::InvalidScenario("unitary-shift needs a single-Kraus channel".into()));
    }
    let u_eps = ch.kraus()[0].clone();
    let u1 = params.u1.as_ref().map(matrix_from_json).transpose()?;
    let outcome = unitary_shift_correction(&u_eps, u1, tol)?;

    let deviation = outcome
        .choi_after
        .matrix()
        .max_abs_diff(&max_entangled_projector(u_eps.rows()));
    checks.close("corrected_choi_is_ideal", deviation, 0.0, 1e-10);
    checks.close("success_probability", outcome.success_prob, 1.0, 1e-12);
    checks.exact("complexity_after", outcome.complexity_after, 0);

    Ok(json!({
        "choi_deviation_from_ideal": deviation,
        "success_prob": outcome.success_prob,
        "complexity_before": outcome.complexity_before,
        "complexity_after": outcome.complexity_after,
    }))
}

fn run_qecc_demo(scenario: &Scenario, params: &Params, checks: &mut Checks) -> Result<Value> {
    let input = match &params.input_state {
        Some(v) => PureState::new(vector_from_json(v))?,
        // default probe: the sigma_y eigenstate, equally sensitive to the
        // uncoded phase noise and the residual logical bit flips
        None => PureState::normalized(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])?,
    };
    let report = if let Some(mu) = params.mu {
        qecc_phase_flip_demo(mu, &input)?
    } else if let Some(p) = params.p {
        phase_flip_code_demo(&Channel::phase_flip(p)?, p, &input)?
    } else {
        return Err(Error::InvalidScenario("qecc-demo needs \"mu\" or \"p\" in params".into()));
    };

    checks.close(
        "logical_error_matches_formula",
        report.logical_error_prob,
        report.logical_error_formula,
        1e-12,
    );
    checks.close(
        "enumeration_matches_formula",
        report.enumeration_error_prob,
        report.logical_error_formula,
        1e-12,
    );
    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.logical_error) {
        checks.close("expected_logical_error", report.logical_error_prob, want, 1e-12);
    }

    Ok(json!({
        "p": report.p,
        "fidelity_uncoded": report.fidelity_uncoded,
        "fidelity_coded": report.fidelity_coded,
        "logical_error_prob": report.logical_error_prob,
        "enumeration_error_prob": report.enumeration_error_prob,
        "logical_error_formula": report.logical_error_formula,
        "coding_improves": report.coding_improves,
    }))
}

fn run_kraus_min(
    scenario: &Scenario,
    params: &Params,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<Value> {
    let set = if let Some(matrices) = &scenario.matrices {
        KrausSet::new(matrices.iter().map(matrix_from_json).collect::<Result<_>>()?)?
    } else if let Some(res) = &scenario.resources {
        let resources = resources_from_descriptor(res, tol)?;
        KrausSet::from_lambda_map(&lambda_map(&resources)?)
    } else {
        return Err(Error::InvalidScenario(
            "kraus-min needs \"matrices\" or \"resources\"".into(),
        ));
    };

    let before = set.len();
    let minimal = minimal_count(&set, tol)?;
    let reduced = reduce(&set, tol)?;
    let choi_rank = numerical_rank(set.choi().matrix(), tol)?;
    let choi_deviation = reduced.choi().matrix().max_abs_diff(set.choi().matrix());

    checks.exact("reduced_size_equals_minimal_count", reduced.len(), minimal);
    checks.exact("minimal_count_equals_choi_rank", minimal, choi_rank);
    checks.close("reduction_preserves_choi", choi_deviation, 0.0, tol.eps_eq);
    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.count) {
        checks.exact("expected_minimal_count", minimal, want);
    }

    let mut results = serde_json::Map::new();
    results.insert("count_before".into(), json!(before));
    results.insert("minimal_count".into(), json!(minimal));
    results.insert("count_after_reduce".into(), json!(reduced.len()));
    results.insert("choi_rank".into(), json!(choi_rank));
    results.insert("choi_deviation".into(), json!(choi_deviation));
    if let (Some(n), Some(r)) = (params.n, params.r) {
        let bound = upper_bound(n, r)?;
        results.insert("upper_bound".into(), json!(bound));
        checks.at_most("count_within_upper_bound", minimal as f64, bound as f64, 0.0);
    }
    Ok(Value::Object(results))
}

fn run_fidelity_opt(
    scenario: &Scenario,
    params: &Params,
    tol: &Tolerances,
    checks: &mut Checks,
) -> Result<Value> {
    let descriptor = scenario
        .channel
        .as_ref()
        .ok_or_else(|| Error::InvalidScenario("fidelity-opt needs a \"channel\"".into()))?;
    let ch = channel_from_descriptor(descriptor)?;
    let kind = params
        .parametrization
        .clone()
        .ok_or_else(|| Error::InvalidScenario("fidelity-opt needs params.parametrization".into()))?;
    let initial = params.initial.clone().unwrap_or_else(|| vec![0.0]);
    let budget = params.budget.unwrap_or(200);
    let tol_owned = *tol;

    let optimum = match kind.as_str() {
        // single angle: receiver-side rotation about y
        "corrective-rotation" => {
            if ch.dim_in() != 2 {
                return Err(Error::InvalidScenario(
                    "corrective-rotation works on qubit channels".into(),
                ));
            }
            optimize_fidelity(
                &ch,
                move |u: &[f64]| {
                    let (s, c) = (u[0] / 2.0).sin_cos();
                    let rot = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]);
                    let ops = OutcomeOps {
                        u_aa: ComplexMatrix::identity(2),
                        pi_aa: ComplexMatrix::identity(2),
                        u_bb: rot,
                        pi_bb: ComplexMatrix::identity(2),
                        b_filter: None,
                    };
                    ControlResources::new(2, 1, 1, Ancilla::Schmidt(vec![1.0]), vec![ops], &tol_owned)
                },
                &initial,
                budget,
            )?
        }
        // single angle: Schmidt angle of the teleportation pair
        "qt-schmidt-angle" => {
            if ch.dim_in() != 2 {
                return Err(Error::InvalidScenario(
                    "qt-schmidt-angle works on qubit channels".into(),
                ));
            }
            optimize_fidelity(
                &ch,
                move |u: &[f64]| {
                    let (s, c) = u[0].sin_cos();
                    let amp = vec![
                        Complex64::new(c, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(s, 0.0),
                    ];
                    crate::protocols::qt_resources_with_ancilla(
                        2,
                        Ancilla::Pure(PureState::new(amp)?),
                        &tol_owned,
                    )
                },
                &initial,
                budget,
            )?
        }
        other => {
            return Err(Error::InvalidScenario(format!(
                "unknown parametrization {other:?} (expected corrective-rotation or qt-schmidt-angle)"
            )))
        }
    };

    if let Some(want) = scenario.expect.as_ref().and_then(|e| e.fidelity_min) {
        checks.flag(
            "fidelity_reaches_expected_minimum",
            optimum.fidelity >= want,
            format!("got {} minimum {}", fmt12(optimum.fidelity), fmt12(want)),
        );
    }

    Ok(json!({
        "best_params": optimum.params,
        "best_fidelity": optimum.fidelity,
        "evaluations": optimum.evaluations,
        "budget": budget,
    }))
}

fn run_theorem1(params: &Params, seed: u64, tol: &Tolerances, checks: &mut Checks) -> Result<Value> {
    let n = params.n.unwrap_or(2);
    let trials = params.trials.unwrap_or(20);
    let witness = theorem1_witness(n, trials, seed, tol)?;

    checks.close("corrected_choi_deviation", witness.max_deviation, 0.0, 1e-10);
    checks.flag(
        "all_channels_reach_zero_complexity",
        witness.all_complexity_zero,
        format!("{} trials", witness.trials),
    );
    checks.flag(
        "map_is_trace_preserving",
        witness.trace_preserving,
        "sum Lambda^dag Lambda == I".to_string(),
    );

    Ok(json!({
        "n": witness.n,
        "trials": witness.trials,
        "max_deviation": witness.max_deviation,
        "complexities_before": witness.complexities_before,
        "all_complexity_zero": witness.all_complexity_zero,
        "trace_preserving": witness.trace_preserving,
    }))
}

// ---------------------------------------------------------------------------
// text rendering
// ---------------------------------------------------------------------------

fn render_value(v: &Value) -> String {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.to_string()
            } else if let Some(u) = n.as_u64() {
                u.to_string()
            } else {
                fmt12(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        for (i, cell) in cells.iter().enumerate() {
            out.push_str(cell);
            if i + 1 < cols {
                out.push_str(&" ".repeat(widths[i] - cell.len() + 2));
            }
        }
        out.push('\n');
    };
    line(header, &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule, &mut out);
    for row in rows {
        line(row, &mut out);
    }
    out
}

fn is_object_array(v: &Value) -> bool {
    matches!(v, Value::Array(items) if !items.is_empty() && items.iter().all(|it| it.is_object()))
}

/// Renders a report as aligned text tables: object arrays in the results
/// become row tables, scalars become name/value pairs, and every assertion
/// gets a pass/fail line. Keys appear in sorted order, so the column layout
/// is stable.
pub fn emit_table(report: &Report) -> String {
    let mut out = String::new();
    let title = report
        .scenario
        .name
        .clone()
        .unwrap_or_else(|| report.scenario.command.to_string());
    out.push_str(&format!("scenario: {title}\n"));
    out.push_str(&format!("command:  {}\n", report.scenario.command));
    out.push_str(&format!("seed:     {}\n\n", report.seed));

    if let Value::Object(map) = &report.results {
        for (key, value) in map {
            if !is_object_array(value) {
                continue;
            }
            let items = value.as_array().expect("checked array");
            let mut columns: Vec<String> = Vec::new();
            for item in items {
                if let Value::Object(obj) = item {
                    for k in obj.keys() {
                        if !columns.contains(k) {
                            columns.push(k.clone());
                        }
                    }
                }
            }
            columns.sort();
            let rows: Vec<Vec<String>> = items
                .iter()
                .map(|item| {
                    columns
                        .iter()
                        .map(|c| item.get(c).map(render_value).unwrap_or_else(|| "-".into()))
                        .collect()
                })
                .collect();
            out.push_str(&format!("{key}:\n"));
            out.push_str(&render_table(&columns, &rows));
            out.push('\n');
        }
        let scalar_rows: Vec<Vec<String>> = map
            .iter()
            .filter(|(_, v)| !is_object_array(v))
            .map(|(k, v)| vec![k.clone(), render_value(v)])
            .collect();
        if !scalar_rows.is_empty() {
            out.push_str("results:\n");
            out.push_str(&render_table(
                &["name".to_string(), "value".to_string()],
                &scalar_rows,
            ));
            out.push('\n');
        }
    }

    out.push_str("assertions:\n");
    let rows: Vec<Vec<String>> = report
        .assertions
        .iter()
        .map(|a| {
            vec![
                a.name.clone(),
                if a.passed { "pass".into() } else { "FAIL".into() },
                fmt12(a.tolerance),
                a.detail.clone(),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &[
            "assertion".to_string(),
            "status".to_string(),
            "tolerance".to_string(),
            "detail".to_string(),
        ],
        &rows,
    ));
    out.push_str(&format!(
        "\noverall: {}\n",
        if report.passed { "PASS" } else { "FAIL" }
    ));
    out
}

// ---------------------------------------------------------------------------
// built-in demo scenarios
// ---------------------------------------------------------------------------

fn zoo(kind: &str, p: Option<f64>, gamma: Option<f64>) -> ChannelDescriptor {
    ChannelDescriptor { kind: kind.to_string(), p, gamma, matrices: None }
}

/// Names of the built-in demos, in display order.
pub fn demo_names() -> Vec<&'static str> {
    vec![
        "complexity-table",
        "qt-identity",
        "qt-sweep",
        "bitflip-correction",
        "unitary-shift",
        "qecc-demo",
        "kraus-min",
        "fidelity-opt",
        "theorem1",
    ]
}

/// A canned scenario reproducing one of the reference numbers.
pub fn demo_scenario(name: &str) -> Option<Scenario> {
    let blank = Scenario {
        name: Some(name.to_string()),
        command: CommandKind::Complexity,
        channel: None,
        family: None,
        entries: None,
        resources: None,
        matrices: None,
        params: None,
        tolerances: None,
        expect: None,
    };
    let entry = |name: &str, family: Vec<ChannelDescriptor>, chi: usize| ComplexityEntry {
        name: name.to_string(),
        family,
        expect_complexity: Some(chi),
    };
    match name {
        "complexity-table" => Some(Scenario {
            entries: Some(vec![
                entry("identity", vec![zoo("identity", None, None)], 0),
                entry("bit_flip(0.3)", vec![zoo("bit_flip", Some(0.3), None)], 2),
                entry("phase_flip(0.2)", vec![zoo("phase_flip", Some(0.2), None)], 2),
                entry(
                    "amplitude_damping(0.3)",
                    vec![zoo("amplitude_damping", None, Some(0.3))],
                    2,
                ),
                entry("phase_damping(0.4)", vec![zoo("phase_damping", None, Some(0.4))], 2),
                entry("depolarizing(0.5)", vec![zoo("depolarizing", Some(0.5), None)], 4),
                entry(
                    "{bit_flip, phase_flip}",
                    vec![zoo("bit_flip", Some(0.3), None), zoo("phase_flip", Some(0.2), None)],
                    3,
                ),
                entry(
                    "{depolarizing, phase_flip}",
                    vec![zoo("depolarizing", Some(0.5), None), zoo("phase_flip", Some(0.2), None)],
                    4,
                ),
                entry(
                    "{bit_flip, amplitude_damping}",
                    vec![
                        zoo("bit_flip", Some(0.3), None),
                        zoo("amplitude_damping", None, Some(0.3)),
                    ],
                    4,
                ),
            ]),
            ..blank
        }),
        "qt-identity" => Some(Scenario {
            command: CommandKind::Qt,
            params: Some(Params {
                n: Some(2),
                schmidt: Some(vec![std::f64::consts::FRAC_1_SQRT_2; 2]),
                seed: Some(7),
                ..Params::default()
            }),
            expect: Some(Expect {
                complexity: Some(0),
                fidelity: Some(1.0),
                ..Expect::default()
            }),
            ..blank
        }),
        "qt-sweep" => Some(Scenario {
            command: CommandKind::Qt,
            params: Some(Params {
                mu_grid: Some(vec![
                    0.1,
                    0.2,
                    0.3,
                    0.4,
                    0.5,
                    0.6,
                    0.7,
                    std::f64::consts::FRAC_1_SQRT_2,
                ]),
                ..Params::default()
            }),
            ..blank
        }),
        "bitflip-correction" => Some(Scenario {
            command: CommandKind::Bitflip,
            params: Some(Params { mu: Some(0.5), p: Some(0.3), ..Params::default() }),
            expect: Some(Expect { success_prob: Some(0.5), ..Expect::default() }),
            ..blank
        }),
        "unitary-shift" => Some(Scenario {
            command: CommandKind::UnitaryShift,
            channel: Some(ChannelDescriptor {
                kind: "unitary".to_string(),
                p: None,
                gamma: None,
                matrices: Some(vec![vec![
                    vec![[0.0, 0.0], [1.0, 0.0]],
                    vec![[1.0, 0.0], [0.0, 0.0]],
                ]]),
            }),
            ..blank
        }),
        "qecc-demo" => Some(Scenario {
            command: CommandKind::QeccDemo,
            params: Some(Params { mu: Some(0.6), ..Params::default() }),
            expect: Some(Expect {
                // p_mu(0.6) = 0.02, so 3 p^2 - 2 p^3 = 0.001184
                logical_error: Some(0.001184),
                ..Expect::default()
            }),
            ..blank
        }),
        "kraus-min" => Some(Scenario {
            command: CommandKind::KrausMin,
            matrices: Some(vec![
                vec![
                    vec![[std::f64::consts::FRAC_1_SQRT_2, 0.0], [0.0, 0.0]],
                    vec![[0.0, 0.0], [std::f64::consts::FRAC_1_SQRT_2, 0.0]],
                ],
                vec![
                    vec![[std::f64::consts::FRAC_1_SQRT_2, 0.0], [0.0, 0.0]],
                    vec![[0.0, 0.0], [std::f64::consts::FRAC_1_SQRT_2, 0.0]],
                ],
            ]),
            params: Some(Params { n: Some(2), r: Some(2), ..Params::default() }),
            expect: Some(Expect { count: Some(1), ..Expect::default() }),
            ..blank
        }),
        "fidelity-opt" => Some(Scenario {
            command: CommandKind::FidelityOpt,
            channel: Some(ChannelDescriptor {
                kind: "unitary".to_string(),
                p: None,
                gamma: None,
                // rotation about y by 0.9
                matrices: Some(vec![vec![
                    vec![[(0.45f64).cos(), 0.0], [-(0.45f64).sin(), 0.0]],
                    vec![[(0.45f64).sin(), 0.0], [(0.45f64).cos(), 0.0]],
                ]]),
            }),
            params: Some(Params {
                parametrization: Some("corrective-rotation".to_string()),
                initial: Some(vec![0.0]),
                budget: Some(200),
                ..Params::default()
            }),
            expect: Some(Expect { fidelity_min: Some(1.0 - 1e-6), ..Expect::default() }),
            ..blank
        }),
        "theorem1" => Some(Scenario {
            command: CommandKind::Theorem1,
            params: Some(Params {
                n: Some(2),
                trials: Some(20),
                seed: Some(11),
                ..Params::default()
            }),
            ..blank
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overrides() -> Overrides {
        Overrides::default()
    }

    #[test]
    fn complexity_scenario_from_wire_format() {
        let text = r#"{
            "command": "complexity",
            "family": [
                {"kind": "bit_flip", "p": 0.3},
                {"kind": "phase_flip", "p": 0.2}
            ],
            "expect": {"complexity": 3}
        }"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let report = run_scenario(&scenario, &overrides()).unwrap();
        assert!(report.passed);
        assert_eq!(report.results["entries"][0]["complexity"], json!(3));
    }

    #[test]
    fn bitflip_scenario_reports_success_probability() {
        let text = r#"{"command": "bitflip", "params": {"mu": 0.5, "p": 0.3},
                       "expect": {"success_prob": 0.5}}"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let report = run_scenario(&scenario, &overrides()).unwrap();
        assert!(report.passed);
        let success = report.results["success_prob"].as_f64().unwrap();
        assert!((success - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qt_scenario_with_uniform_schmidt() {
        let text = r#"{"command": "qt",
                       "params": {"n": 2, "schmidt": [0.7071067811865476, 0.7071067811865476]},
                       "expect": {"complexity": 0, "fidelity": 1.0}}"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let report = run_scenario(&scenario, &overrides()).unwrap();
        assert!(report.passed, "{:?}", report.assertions);
        assert_eq!(report.results["complexity"], json!(0));
        assert_eq!(report.results["trace_character"], json!("preserving"));
    }

    #[test]
    fn failing_expectation_flips_the_report() {
        let text = r#"{"command": "bitflip", "params": {"mu": 0.5, "p": 0.3},
                       "expect": {"success_prob": 0.75}}"#;
        let scenario: Scenario = serde_json::from_str(text).unwrap();
        let report = run_scenario(&scenario, &overrides()).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn invalid_scenarios_error_out() {
        let missing: Scenario =
            serde_json::from_str(r#"{"command": "bitflip", "params": {"mu": 0.5}}"#).unwrap();
        assert!(run_scenario(&missing, &overrides()).is_err());

        let bad_kind = serde_json::from_str::<Scenario>(r#"{"command": "frobnicate"}"#);
        assert!(bad_kind.is_err());

        let bad_channel: Scenario = serde_json::from_str(
            r#"{"command": "complexity", "family": [{"kind": "warp", "p": 0.1}]}"#,
        )
        .unwrap();
        assert!(run_scenario(&bad_channel, &overrides()).is_err());
    }

    #[test]
    fn reports_round_trip_through_json() {
        let scenario = demo_scenario("bitflip-correction").unwrap();
        let report = run_scenario(&scenario, &overrides()).unwrap();
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn identical_scenario_and_seed_give_identical_bytes() {
        for name in ["qt-identity", "theorem1", "complexity-table"] {
            let scenario = demo_scenario(name).unwrap();
            let a = serde_json::to_string(&run_scenario(&scenario, &overrides()).unwrap()).unwrap();
            let b = serde_json::to_string(&run_scenario(&scenario, &overrides()).unwrap()).unwrap();
            assert_eq!(a, b, "demo {name}");
        }
    }

    #[test]
    fn all_demos_run_green() {
        for name in demo_names() {
            let scenario = demo_scenario(name).unwrap();
            let report = run_scenario(&scenario, &overrides()).unwrap();
            assert!(report.passed, "demo {name}: {:#?}", report.assertions);
        }
        assert!(demo_scenario("unknown").is_none());
    }

    #[test]
    fn tables_render_all_demo_reports() {
        // complexity: name and chi columns
        let report =
            run_scenario(&demo_scenario("complexity-table").unwrap(), &overrides()).unwrap();
        let table = emit_table(&report);
        assert!(table.contains("complexity"));
        assert!(table.contains("depolarizing(0.5)"));
        assert!(table.contains("overall: PASS"));

        // qt sweep: mu, p_mu, fidelity columns
        let report = run_scenario(&demo_scenario("qt-sweep").unwrap(), &overrides()).unwrap();
        let table = emit_table(&report);
        assert!(table.contains("p_mu"));
        assert!(table.contains("fidelity"));

        // header-only table when there is nothing to show
        let empty = Report {
            scenario: demo_scenario("qt-sweep").unwrap(),
            seed: 0,
            tolerances: ToleranceEcho {
                eps_rank: 1e-10,
                eps_tp: 1e-9,
                eps_eq: 1e-9,
                eps_herm: 1e-10,
            },
            results: json!({}),
            assertions: vec![],
            passed: true,
        };
        let table = emit_table(&empty);
        assert!(table.contains("assertion"));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(0.5), "0.500000000000");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(123.456), "123.456000000");
        assert!(fmt12(3.5e-14).contains('e'));
    }

    #[test]
    fn seed_override_takes_precedence() {
        let scenario = demo_scenario("theorem1").unwrap();
        let report =
            run_scenario(&scenario, &Overrides { eps_rank: None, seed: Some(99) }).unwrap();
        assert_eq!(report.seed, 99);
        assert!(report.passed);
    }

    #[test]
    fn tolerance_override_is_echoed() {
        let scenario = demo_scenario("bitflip-correction").unwrap();
        let report =
            run_scenario(&scenario, &Overrides { eps_rank: Some(1e-8), seed: None }).unwrap();
        assert_eq!(report.tolerances.eps_rank, 1e-8);
        // invalid override is a validation error
        let bad = run_scenario(&scenario, &Overrides { eps_rank: Some(-1.0), seed: None });
        assert!(bad.is_err());
    }
}
