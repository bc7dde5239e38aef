//! Control resources and the machinery they generate.
//!
//! Sender and receiver declare an ancilla `rho^{ab}` plus, per classical
//! outcome `eta`, local operations `L^{Aa}_eta = Pi^{Aa}_eta U^{Aa}` and
//! `L^{Bb}_eta = Pi^{Bb}_eta U^{Bb}_eta`. From these the module builds
//!
//! - the modified channel with Kraus operators
//!   `E~_{i,k,l} = sum_j mu_j B_{k,j} E_i A_{l,j}`, and
//! - the Choi-level map with Kraus operators
//!   `Lambda^eta_{k,l} = sum_j mu_j B^eta_{k,j} (x) A^eta_{l,j}^T`,
//!
//! where `A_{i,j} = <i|^a L^{Aa} |j>^a` and `B_{i,j} = <i|^b L^{Bb} |j>^b`
//! are the ancilla-basis blocks of the local operations and `mu` are the
//! Schmidt coefficients of the ancilla. Both constructions are verified
//! against a direct density-matrix simulation in the tests; the two routes
//! commute with the Choi isomorphism by construction.
//!
//! Receiver operations may carry an additional non-unitary success filter
//! (a POVM branch) applied after the projector; this is how probabilistic
//! corrections enter without modelling an extra receiver ancilla.

use crate::channels::{Channel, ChoiState};
use crate::error::{Error, Result};
use crate::linalg::{schmidt_decompose, Complex64, ComplexMatrix, PureState, Tolerances};

/// Shared ancilla state between sender and receiver.
#[derive(Debug, Clone)]
pub enum Ancilla {
    /// Pure state `sum_k mu_k |k>^a |k>^b` given by its Schmidt coefficients
    /// in the computational pairing (positional, not sorted).
    Schmidt(Vec<f64>),
    /// Arbitrary pure state on `H_a (x) H_b`; Schmidt-decomposed internally.
    Pure(PureState),
    /// Mixture of pure states with positive weights summing to one.
    Mixed(Vec<(f64, PureState)>),
}

/// Local operations attached to one classical outcome.
#[derive(Debug, Clone)]
pub struct OutcomeOps {
    /// Unitary on `H_A (x) H_a`; the sender applies it before measuring.
    pub u_aa: ComplexMatrix,
    /// Projector on `H_A (x) H_a` selecting this outcome.
    pub pi_aa: ComplexMatrix,
    /// Unitary on `H_B (x) H_b`, conditioned on the outcome.
    pub u_bb: ComplexMatrix,
    /// Projector on `H_B (x) H_b`.
    pub pi_bb: ComplexMatrix,
    /// Optional success filter on `H_B (x) H_b`, applied after `pi_bb`.
    /// Must be a contraction (`F^dag F <= I`); presence makes the protocol
    /// probabilistic.
    pub b_filter: Option<ComplexMatrix>,
}

impl OutcomeOps {
    /// All-identity operations.
    pub fn trivial(n: usize, dim_a: usize, dim_b: usize) -> Self {
        Self {
            u_aa: ComplexMatrix::identity(n * dim_a),
            pi_aa: ComplexMatrix::identity(n * dim_a),
            u_bb: ComplexMatrix::identity(n * dim_b),
            pi_bb: ComplexMatrix::identity(n * dim_b),
            b_filter: None,
        }
    }

    /// `L^{Aa} = Pi^{Aa} U^{Aa}`.
    pub fn l_aa(&self) -> ComplexMatrix {
        self.pi_aa.matmul(&self.u_aa)
    }

    /// `L^{Bb} = [F] Pi^{Bb} U^{Bb}`, with the filter composed last.
    pub fn l_bb(&self) -> ComplexMatrix {
        let base = self.pi_bb.matmul(&self.u_bb);
        match &self.b_filter {
            Some(f) => f.matmul(&base),
            None => base,
        }
    }
}

/// Declared sender/receiver resources: ancilla plus per-outcome operations.
#[derive(Debug, Clone)]
pub struct ControlResources {
    n: usize,
    dim_a: usize,
    dim_b: usize,
    ancilla: Ancilla,
    outcomes: Vec<OutcomeOps>,
}

impl ControlResources {
    pub fn new(
        n: usize,
        dim_a: usize,
        dim_b: usize,
        ancilla: Ancilla,
        outcomes: Vec<OutcomeOps>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if n == 0 || dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidResources("all dimensions must be positive".into()));
        }
        if outcomes.is_empty() {
            return Err(Error::InvalidResources("at least one outcome required".into()));
        }
        validate_ancilla(&ancilla, dim_a, dim_b)?;
        for (eta, ops) in outcomes.iter().enumerate() {
            let da = n * dim_a;
            let db = n * dim_b;
            for (name, m, want) in [
                ("U_Aa", &ops.u_aa, da),
                ("Pi_Aa", &ops.pi_aa, da),
                ("U_Bb", &ops.u_bb, db),
                ("Pi_Bb", &ops.pi_bb, db),
            ] {
                if !m.is_square() || m.rows() != want {
                    return Err(Error::InvalidResources(format!(
                        "outcome {eta}: {name} must be {want}x{want}"
                    )));
                }
            }
            let ud = ops.u_aa.unitarity_defect().max(ops.u_bb.unitarity_defect());
            if ud > tol.eps_eq {
                return Err(Error::InvalidResources(format!(
                    "outcome {eta}: unitary defect {ud:.3e} exceeds {:.1e}",
                    tol.eps_eq
                )));
            }
            let pd = ops.pi_aa.projector_defect().max(ops.pi_bb.projector_defect());
            if pd > tol.eps_eq {
                return Err(Error::InvalidResources(format!(
                    "outcome {eta}: projector defect {pd:.3e} exceeds {:.1e}",
                    tol.eps_eq
                )));
            }
            if let Some(f) = &ops.b_filter {
                if !f.is_square() || f.rows() != n * dim_b {
                    return Err(Error::InvalidResources(format!(
                        "outcome {eta}: filter has wrong shape"
                    )));
                }
                let gram = f.adjoint().matmul(f);
                let eig = crate::linalg::hermitian_eigen(&gram, tol)?;
                if eig.values.first().copied().unwrap_or(0.0) > 1.0 + tol.eps_eq {
                    return Err(Error::InvalidResources(format!(
                        "outcome {eta}: filter is not a contraction"
                    )));
                }
            }
        }
        Ok(Self { n, dim_a, dim_b, ancilla, outcomes })
    }

    /// Resources that leave the channel untouched.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            dim_a: 1,
            dim_b: 1,
            ancilla: Ancilla::Schmidt(vec![1.0]),
            outcomes: vec![OutcomeOps::trivial(n, 1, 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn ancilla(&self) -> &Ancilla {
        &self.ancilla
    }

    pub fn outcomes(&self) -> &[OutcomeOps] {
        &self.outcomes
    }

    /// Density matrix of the declared ancilla on `H_a (x) H_b`.
    pub fn ancilla_density(&self) -> ComplexMatrix {
        let d = self.dim_a * self.dim_b;
        let mut rho = ComplexMatrix::zeros(d, d);
        for (w, psi) in self.ancilla_components() {
            rho = rho.add(&psi.projector().scaled_re(w));
        }
        rho
    }

    /// Ancilla as a weighted list of pure states.
    pub fn ancilla_components(&self) -> Vec<(f64, PureState)> {
        match &self.ancilla {
            Ancilla::Schmidt(mu) => {
                let mut amp = vec![Complex64::new(0.0, 0.0); self.dim_a * self.dim_b];
                for (k, &m) in mu.iter().enumerate() {
                    amp[k * self.dim_b + k] = Complex64::new(m, 0.0);
                }
                vec![(1.0, PureState::new(amp).expect("validated Schmidt vector"))]
            }
            Ancilla::Pure(psi) => vec![(1.0, psi.clone())],
            Ancilla::Mixed(list) => list.clone(),
        }
    }

    /// Pure components in Schmidt form: weight, coefficients, and the basis
    /// rotations `W_a`, `W_b` mapping computational onto Schmidt bases
    /// (`None` = identity, when the ancilla is already in Schmidt form).
    fn schmidt_components(&self) -> Result<Vec<SchmidtComponent>> {
        match &self.ancilla {
            Ancilla::Schmidt(mu) => Ok(vec![SchmidtComponent {
                weight: 1.0,
                mu: mu.clone(),
                w_a: None,
                w_b: None,
            }]),
            Ancilla::Pure(psi) => Ok(vec![schmidt_component(1.0, psi, self.dim_a, self.dim_b)?]),
            Ancilla::Mixed(list) => list
                .iter()
                .map(|(w, psi)| schmidt_component(*w, psi, self.dim_a, self.dim_b))
                .collect(),
        }
    }

    /// True iff the A-side projectors resolve the identity, every B-side
    /// projector is the identity, and no success filters are present.
    pub fn is_deterministic(&self, tol: &Tolerances) -> bool {
        let id_a = ComplexMatrix::identity(self.n * self.dim_a);
        let id_b = ComplexMatrix::identity(self.n * self.dim_b);
        let mut sum = ComplexMatrix::zeros(id_a.rows(), id_a.cols());
        for ops in &self.outcomes {
            sum = sum.add(&ops.pi_aa);
            if ops.pi_bb.max_abs_diff(&id_b) > tol.eps_eq || ops.b_filter.is_some() {
                return false;
            }
        }
        sum.max_abs_diff(&id_a) <= tol.eps_eq
    }
}

struct SchmidtComponent {
    weight: f64,
    mu: Vec<f64>,
    w_a: Option<ComplexMatrix>,
    w_b: Option<ComplexMatrix>,
}

fn schmidt_component(w: f64, psi: &PureState, dim_a: usize, dim_b: usize) -> Result<SchmidtComponent> {
    let dec = schmidt_decompose(psi, dim_a, dim_b)?;
    Ok(SchmidtComponent {
        weight: w,
        mu: dec.coefficients,
        w_a: Some(dec.basis_a),
        w_b: Some(dec.basis_b),
    })
}

fn validate_ancilla(ancilla: &Ancilla, dim_a: usize, dim_b: usize) -> Result<()> {
    match ancilla {
        Ancilla::Schmidt(mu) => {
            if mu.len() != dim_a.min(dim_b) {
                return Err(Error::InvalidResources(format!(
                    "Schmidt vector length {} != min(dim_a, dim_b) = {}",
                    mu.len(),
                    dim_a.min(dim_b)
                )));
            }
            if mu.iter().any(|&m| m < 0.0) {
                return Err(Error::InvalidResources(
                    "Schmidt coefficients must be nonnegative".into(),
                ));
            }
            let sq: f64 = mu.iter().map(|m| m * m).sum();
            if (sq - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidResources(format!(
                    "Schmidt coefficients have squared sum {sq}, expected 1"
                )));
            }
        }
        Ancilla::Pure(psi) => {
            if psi.dim() != dim_a * dim_b {
                return Err(Error::InvalidResources(format!(
                    "ancilla state dimension {} != dim_a * dim_b = {}",
                    psi.dim(),
                    dim_a * dim_b
                )));
            }
        }
        Ancilla::Mixed(list) => {
            if list.is_empty() {
                return Err(Error::InvalidResources("empty ancilla mixture".into()));
            }
            let total: f64 = list.iter().map(|(w, _)| w).sum();
            if list.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidResources(
                    "mixture weights must be nonnegative and sum to 1".into(),
                ));
            }
            for (_, psi) in list {
                if psi.dim() != dim_a * dim_b {
                    return Err(Error::InvalidResources(
                        "mixture component has wrong dimension".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Ancilla-basis blocks `out[i][j] = <i| L |j>` of an operator on
/// `H_sys (x) H_anc`, each an `n x n` matrix on the system factor.
fn blocks_of(l: &ComplexMatrix, n: usize, d: usize) -> Vec<Vec<ComplexMatrix>> {
    let mut out = vec![vec![ComplexMatrix::zeros(n, n); d]; d];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, m) in row.iter_mut().enumerate() {
            for x in 0..n {
                for y in 0..n {
                    m.set(x, y, l.get(x * d + i, y * d + j));
                }
            }
        }
    }
    out
}

fn rotate_anc(l: &ComplexMatrix, w: &Option<ComplexMatrix>, n: usize) -> ComplexMatrix {
    match w {
        Some(w) => l.matmul(&ComplexMatrix::identity(n).tensor(w)),
        None => l.clone(),
    }
}

/// `A^eta_{i,j} = <i|^a L^{Aa}_eta |j>^a` in the computational ancilla basis.
pub fn blocks_a(res: &ControlResources, eta: usize) -> Result<Vec<Vec<ComplexMatrix>>> {
    let ops = res
        .outcomes()
        .get(eta)
        .ok_or_else(|| Error::OutOfRange(format!("outcome index {eta} out of range")))?;
    Ok(blocks_of(&ops.l_aa(), res.n(), res.dim_a()))
}

/// `B^eta_{i,j} = <i|^b L^{Bb}_eta |j>^b`, including the success filter.
pub fn blocks_b(res: &ControlResources, eta: usize) -> Result<Vec<Vec<ComplexMatrix>>> {
    let ops = res
        .outcomes()
        .get(eta)
        .ok_or_else(|| Error::OutOfRange(format!("outcome index {eta} out of range")))?;
    Ok(blocks_of(&ops.l_bb(), res.n(), res.dim_b()))
}

/// One Kraus operator of the Choi-level map with its provenance indices.
#[derive(Debug, Clone)]
pub struct LambdaKraus {
    /// Ancilla mixture component.
    pub component: usize,
    /// Classical outcome.
    pub eta: usize,
    /// Receiver ancilla-basis index.
    pub k: usize,
    /// Sender ancilla-basis index.
    pub l: usize,
    /// `N^2 x N^2` operator on `H_B (x) H_A` (mixture weight folded in).
    pub op: ComplexMatrix,
}

/// Completely positive map on Choi states induced by control resources.
#[derive(Debug, Clone)]
pub struct LambdaMap {
    dim: usize,
    dim_a: usize,
    kraus: Vec<LambdaKraus>,
}

impl LambdaMap {
    /// System dimension N; operators are `N^2 x N^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sender ancilla dimension, for the trace-bound witness.
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn kraus(&self) -> &[LambdaKraus] {
        &self.kraus
    }

    /// `S = sum Lambda^dag Lambda`.
    pub fn kraus_sum(&self) -> ComplexMatrix {
        let d = self.dim * self.dim;
        let mut sum = ComplexMatrix::zeros(d, d);
        for lk in &self.kraus {
            sum = sum.add(&lk.op.adjoint().matmul(&lk.op));
        }
        sum
    }
}

/// Builds the Choi-level Kraus operators
/// `Lambda^eta_{k,l} = sum_j mu_j B^eta_{k,j} (x) A^eta_{l,j}^T`,
/// weighted across ancilla mixture components.
pub fn lambda_map(res: &ControlResources) -> Result<LambdaMap> {
    let n = res.n();
    let mut kraus = Vec::new();
    for (ci, comp) in res.schmidt_components()?.iter().enumerate() {
        let scale = comp.weight.sqrt();
        for (eta, ops) in res.outcomes().iter().enumerate() {
            let a = blocks_of(&rotate_anc(&ops.l_aa(), &comp.w_a, n), n, res.dim_a());
            let b = blocks_of(&rotate_anc(&ops.l_bb(), &comp.w_b, n), n, res.dim_b());
            for k in 0..res.dim_b() {
                for l in 0..res.dim_a() {
                    let mut op = ComplexMatrix::zeros(n * n, n * n);
                    for (j, &mu) in comp.mu.iter().enumerate() {
                        if mu == 0.0 {
                            continue;
                        }
                        op = op.add(&b[k][j].tensor(&a[l][j].transpose()).scaled_re(mu));
                    }
                    kraus.push(LambdaKraus {
                        component: ci,
                        eta,
                        k,
                        l,
                        op: op.scaled_re(scale),
                    });
                }
            }
        }
    }
    Ok(LambdaMap { dim: n, dim_a: res.dim_a(), kraus })
}

/// `R -> sum Lambda R Lambda^dag`. The output trace is the success
/// probability for normalized inputs.
pub fn apply_lambda(lm: &LambdaMap, choi: &ChoiState) -> Result<ChoiState> {
    if choi.dim() != lm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map on N = {} applied to Choi state with N = {}",
            lm.dim(),
            choi.dim()
        )));
    }
    let d = lm.dim() * lm.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for lk in &lm.kraus {
        out = out.add(&lk.op.matmul(choi.matrix()).matmul(&lk.op.adjoint()));
    }
    ChoiState::from_cp_output(out)
}

/// Kraus operators of the modified channel,
/// `E~^eta_{i,k,l} = sum_j mu_j B^eta_{k,j} E_i A^eta_{l,j}`.
pub fn modified_channel(ch: &Channel, res: &ControlResources) -> Result<Channel> {
    let n = res.n();
    if ch.dim_in() != n {
        return Err(Error::DimensionMismatch(format!(
            "channel dimension {} does not match resources ({})",
            ch.dim_in(),
            n
        )));
    }
    let mut kraus = Vec::new();
    for comp in res.schmidt_components()? {
        let scale = comp.weight.sqrt();
        for ops in res.outcomes() {
            let a = blocks_of(&rotate_anc(&ops.l_aa(), &comp.w_a, n), n, res.dim_a());
            let b = blocks_of(&rotate_anc(&ops.l_bb(), &comp.w_b, n), n, res.dim_b());
            for k in 0..res.dim_b() {
                for l in 0..res.dim_a() {
                    for e in ch.kraus() {
                        let mut op = ComplexMatrix::zeros(n, n);
                        for (j, &mu) in comp.mu.iter().enumerate() {
                            if mu == 0.0 {
                                continue;
                            }
                            op = op.add(&b[k][j].matmul(e).matmul(&a[l][j]).scaled_re(mu));
                        }
                        kraus.push(op.scaled_re(scale));
                    }
                }
            }
        }
    }
    Channel::new(kraus)
}

/// `eps~ = sum_i p_i eps^B_i o eps o eps^A_i`: classically correlated
/// trace-preserving operations before and after the channel.
pub fn separable_composition(
    weights: &[f64],
    eps_a: &[Channel],
    eps_b: &[Channel],
    ch: &Channel,
    tol: &Tolerances,
) -> Result<Channel> {
    if weights.len() != eps_a.len() || weights.len() != eps_b.len() || weights.is_empty() {
        return Err(Error::InvalidResources(
            "weights and channel lists must have equal nonzero length".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidResources(
            "weights must be nonnegative and sum to 1".into(),
        ));
    }
    for comp in eps_a.iter().chain(eps_b.iter()) {
        if comp.dim_in() != ch.dim_in() {
            return Err(Error::DimensionMismatch("composition dimension mismatch".into()));
        }
        if !comp.is_trace_preserving(tol) {
            return Err(Error::InvalidChannel(
                "separable composition requires trace-preserving components".into(),
            ));
        }
    }
    let mut kraus = Vec::new();
    for ((w, ca), cb) in weights.iter().zip(eps_a).zip(eps_b) {
        let scale = w.sqrt();
        for b in cb.kraus() {
            for e in ch.kraus() {
                for a in ca.kraus() {
                    kraus.push(b.matmul(e).matmul(a).scaled_re(scale));
                }
            }
        }
    }
    Channel::new(kraus)
}

/// Classification of `S = sum Lambda^dag Lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceCharacter {
    Preserving,
    Decreasing,
    Increasing,
}

impl std::fmt::Display for TraceCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TraceCharacter::Preserving => "preserving",
            TraceCharacter::Decreasing => "decreasing",
            TraceCharacter::Increasing => "increasing",
        };
        f.write_str(s)
    }
}

/// Witness for the trace character: `S` itself and its extremal eigenvalues.
#[derive(Debug, Clone)]
pub struct TraceCharacterReport {
    pub character: TraceCharacter,
    pub kraus_sum: ComplexMatrix,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Deviation of `S` from the identity in max-norm.
    pub identity_deviation: f64,
    /// Whether `max_eigenvalue <= dim(H_a) + eps` (the product-ancilla bound).
    pub within_dim_a_bound: bool,
}

pub fn trace_character(lm: &LambdaMap, tol: &Tolerances) -> Result<TraceCharacterReport> {
    let s = lm.kraus_sum();
    let eig = crate::linalg::hermitian_eigen(&s, tol)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    let dev = s.max_abs_diff(&ComplexMatrix::identity(s.rows()));
    let character = if dev <= tol.eps_tp {
        TraceCharacter::Preserving
    } else if max <= 1.0 + tol.eps_tp {
        TraceCharacter::Decreasing
    } else {
        TraceCharacter::Increasing
    };
    Ok(TraceCharacterReport {
        character,
        kraus_sum: s,
        min_eigenvalue: min,
        max_eigenvalue: max,
        identity_deviation: dev,
        within_dim_a_bound: max <= lm.dim_a() as f64 + tol.eps_tp,
    })
}

/// One structural relation: its worst violation in max-norm and the verdict.
#[derive(Debug, Clone, Copy)]
pub struct RelationCheck {
    pub max_violation: f64,
    pub passes: bool,
}

/// Report on the block relations satisfied by the declared resources.
///
/// Projector blocks must be Hermitian-paired and idempotent; unitary blocks
/// satisfy the row/column sums that encode unitarity. The partial-transpose
/// sums hold only for special operations (controlled or product unitaries),
/// not for arbitrary ones. The outcome-summed row relation characterizes
/// deterministic protocols; the outcome-summed column relation
/// (bistochasticity) forces the Choi-level map to be trace-preserving for
/// every ancilla when the receiver side is unitary.
#[derive(Debug, Clone)]
pub struct ResourceRelationsReport {
    /// Projector-block relations, A and B sides.
    pub projector_blocks_a: RelationCheck,
    pub projector_blocks_b: RelationCheck,
    /// Unitary-block row/column sums, A and B sides.
    pub unitary_blocks_a: RelationCheck,
    pub unitary_blocks_b: RelationCheck,
    /// Partial-transpose variants of the unitary sums.
    pub transposed_unitary_blocks_a: RelationCheck,
    pub transposed_unitary_blocks_b: RelationCheck,
    /// Outcome-summed rows: `sum_{eta,k} A_{i,k} A_{j,k}^dag = delta_ij I`.
    pub deterministic_rows: RelationCheck,
    /// Outcome-summed columns: `sum_{eta,k} A_{k,i} A_{k,j}^dag = delta_ij I`.
    pub bistochastic_columns: RelationCheck,
    /// `sum_eta L^dag L == I` on the sender side (valid instrument).
    pub sender_instrument: RelationCheck,
    pub deterministic: bool,
}

pub fn check_resource_relations(
    res: &ControlResources,
    tol: &Tolerances,
) -> Result<ResourceRelationsReport> {
    let n = res.n();
    let da = res.dim_a();
    let db = res.dim_b();

    let mut proj_a = 0.0f64;
    let mut proj_b = 0.0f64;
    let mut uni_a = 0.0f64;
    let mut uni_b = 0.0f64;
    let mut uni2_a = 0.0f64;
    let mut uni2_b = 0.0f64;

    for ops in res.outcomes() {
        let alpha = blocks_of(&ops.pi_aa, n, da);
        let beta = blocks_of(&ops.pi_bb, n, db);
        proj_a = proj_a.max(projector_block_violation(&alpha));
        proj_b = proj_b.max(projector_block_violation(&beta));

        let a = blocks_of(&ops.u_aa, n, da);
        let b = blocks_of(&ops.u_bb, n, db);
        uni_a = uni_a.max(unitary_block_violation(&a, n));
        uni_b = uni_b.max(unitary_block_violation(&b, n));
        uni2_a = uni2_a.max(transposed_unitary_block_violation(&a, n));
        uni2_b = uni2_b.max(transposed_unitary_block_violation(&b, n));
    }

    // outcome-summed relations over the full L blocks
    let all_a: Vec<Vec<Vec<ComplexMatrix>>> = (0..res.outcomes().len())
        .map(|eta| blocks_a(res, eta))
        .collect::<Result<_>>()?;
    let id = ComplexMatrix::identity(n);
    let mut det_rows = 0.0f64;
    let mut bis_cols = 0.0f64;
    for i in 0..da {
        for j in 0..da {
            let mut rows = ComplexMatrix::zeros(n, n);
            let mut cols = ComplexMatrix::zeros(n, n);
            for a in &all_a {
                for k in 0..da {
                    rows = rows.add(&a[i][k].matmul(&a[j][k].adjoint()));
                    cols = cols.add(&a[k][i].matmul(&a[k][j].adjoint()));
                }
            }
            let want = if i == j { id.clone() } else { ComplexMatrix::zeros(n, n) };
            det_rows = det_rows.max(rows.max_abs_diff(&want));
            bis_cols = bis_cols.max(cols.max_abs_diff(&want));
        }
    }

    let mut instrument = ComplexMatrix::zeros(n * da, n * da);
    for ops in res.outcomes() {
        let l = ops.l_aa();
        instrument = instrument.add(&l.adjoint().matmul(&l));
    }
    let instrument_violation = instrument.max_abs_diff(&ComplexMatrix::identity(n * da));

    let check = |v: f64| RelationCheck { max_violation: v, passes: v <= tol.eps_eq };
    Ok(ResourceRelationsReport {
        projector_blocks_a: check(proj_a),
        projector_blocks_b: check(proj_b),
        unitary_blocks_a: check(uni_a),
        unitary_blocks_b: check(uni_b),
        transposed_unitary_blocks_a: check(uni2_a),
        transposed_unitary_blocks_b: check(uni2_b),
        deterministic_rows: check(det_rows),
        bistochastic_columns: check(bis_cols),
        sender_instrument: check(instrument_violation),
        deterministic: res.is_deterministic(tol),
    })
}

/// `alpha_{i,j} = alpha_{j,i}^dag` and `alpha_{i,j} = sum_k alpha_{i,k} alpha_{k,j}`.
fn projector_block_violation(alpha: &[Vec<ComplexMatrix>]) -> f64 {
    let d = alpha.len();
    let n = alpha[0][0].rows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max(alpha[i][j].max_abs_diff(&alpha[j][i].adjoint()));
            let mut sum = ComplexMatrix::zeros(n, n);
            for k in 0..d {
                sum = sum.add(&alpha[i][k].matmul(&alpha[k][j]));
            }
            worst = worst.max(sum.max_abs_diff(&alpha[i][j]));
        }
    }
    worst
}

/// `sum_k a_{i,k} a_{j,k}^dag = delta_ij I` and `sum_k a_{k,i}^dag a_{k,j} = delta_ij I`.
fn unitary_block_violation(a: &[Vec<ComplexMatrix>], n: usize) -> f64 {
    let d = a.len();
    let id = ComplexMatrix::identity(n);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut rows = ComplexMatrix::zeros(n, n);
            let mut cols = ComplexMatrix::zeros(n, n);
            for k in 0..d {
                rows = rows.add(&a[i][k].matmul(&a[j][k].adjoint()));
                cols = cols.add(&a[k][i].adjoint().matmul(&a[k][j]));
            }
            let want = if i == j { id.clone() } else { ComplexMatrix::zeros(n, n) };
            worst = worst.max(rows.max_abs_diff(&want));
            worst = worst.max(cols.max_abs_diff(&want));
        }
    }
    worst
}

/// Same sums with the dagger on the other factor; equivalent to unitarity of
/// the ancilla partial transpose, which holds only for special operations.
fn transposed_unitary_block_violation(a: &[Vec<ComplexMatrix>], n: usize) -> f64 {
    let d = a.len();
    let id = ComplexMatrix::identity(n);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut rows = ComplexMatrix::zeros(n, n);
            let mut cols = ComplexMatrix::zeros(n, n);
            for k in 0..d {
                rows = rows.add(&a[i][k].adjoint().matmul(&a[j][k]));
                cols = cols.add(&a[k][i].matmul(&a[k][j].adjoint()));
            }
            let want = if i == j { id.clone() } else { ComplexMatrix::zeros(n, n) };
            worst = worst.max(rows.max_abs_diff(&want));
            worst = worst.max(cols.max_abs_diff(&want));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_of, cnot_gate, swap_gate, Channel};
    use crate::linalg::{embed_operator, partial_trace};
    use crate::random::{
        haar_random_channel, haar_random_state, haar_random_unitary, random_density,
        random_resources,
    };
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Direct density-matrix simulation of the controlled channel: couple the
    /// ancilla, apply the sender operation, send the system factor through
    /// the channel, apply the receiver operation, trace out both ancillae.
    /// Independent of the block machinery under test.
    fn density_matrix_oracle(
        ch: &Channel,
        res: &ControlResources,
        rho: &ComplexMatrix,
    ) -> ComplexMatrix {
        let n = res.n();
        let dims = [n, res.dim_a(), res.dim_b()];
        let joint0 = rho.tensor(&res.ancilla_density());
        let mut out = ComplexMatrix::zeros(n, n);
        for ops in res.outcomes() {
            let l_a = embed_operator(&ops.l_aa(), &dims, &[0, 1]).unwrap();
            let mut st = l_a.matmul(&joint0).matmul(&l_a.adjoint());
            let mut after = ComplexMatrix::zeros(st.rows(), st.cols());
            for e in ch.kraus() {
                let ee = embed_operator(e, &dims, &[0]).unwrap();
                after = after.add(&ee.matmul(&st).matmul(&ee.adjoint()));
            }
            st = after;
            let l_b = embed_operator(&ops.l_bb(), &dims, &[0, 2]).unwrap();
            st = l_b.matmul(&st).matmul(&l_b.adjoint());
            out = out.add(&partial_trace(&st, &dims, &[0]).unwrap());
        }
        out
    }

    #[test]
    fn blocks_of_identity_are_kronecker_deltas() {
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![OutcomeOps::trivial(2, 2, 2)],
            &tol(),
        )
        .unwrap();
        let a = blocks_a(&res, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j {
                    ComplexMatrix::identity(2)
                } else {
                    ComplexMatrix::zeros(2, 2)
                };
                assert!(a[i][j].max_abs_diff(&want) < 1e-15);
            }
        }
        assert!(blocks_a(&res, 1).is_err());
    }

    #[test]
    fn blocks_of_swap_are_transition_operators() {
        // A_{i,j} = |j><i| when U^{Aa} is the swap, straight from its definition
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = swap_gate(2);
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![ops],
            &tol(),
        )
        .unwrap();
        let a = blocks_a(&res, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = ComplexMatrix::zeros(2, 2);
                want.set(j, i, Complex64::new(1.0, 0.0));
                assert!(a[i][j].max_abs_diff(&want) < 1e-15);
            }
        }
    }

    #[test]
    fn unitary_block_sums_for_random_receiver() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_bb = haar_random_unitary(4, &mut rng);
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![ops],
            &tol(),
        )
        .unwrap();
        let b = blocks_b(&res, 0).unwrap();
        let id = ComplexMatrix::identity(2);
        for i in 0..2 {
            for j in 0..2 {
                let mut rows = ComplexMatrix::zeros(2, 2);
                for k in 0..2 {
                    rows = rows.add(&b[i][k].matmul(&b[j][k].adjoint()));
                }
                let want = if i == j { id.clone() } else { ComplexMatrix::zeros(2, 2) };
                assert!(rows.max_abs_diff(&want) < 1e-12);
            }
        }
    }

    #[test]
    fn trivial_resources_leave_channel_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = haar_random_channel(2, 3, &mut rng);
        let res = ControlResources::trivial(2);
        let modified = modified_channel(&ch, &res).unwrap();
        let rho = random_density(2, &mut rng);
        assert!(modified
            .apply(&rho)
            .unwrap()
            .max_abs_diff(&ch.apply(&rho).unwrap())
            < 1e-13);

        let lm = lambda_map(&res).unwrap();
        assert_eq!(lm.kraus().len(), 1);
        assert!(lm.kraus()[0].op.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let choi = choi_of(&ch);
        let after = apply_lambda(&lm, &choi).unwrap();
        assert!(after.matrix().max_abs_diff(choi.matrix()) < 1e-14);
    }

    #[test]
    fn product_ancilla_gives_sandwich_composition() {
        // mu_k = delta_{k,kbar}: the modified channel is eps^B o eps o eps^A
        // with Kraus blocks A_{l,kbar}, B_{k,kbar}
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let kbar = 1usize;
        let mut mu = vec![0.0, 0.0];
        mu[kbar] = 1.0;
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = haar_random_unitary(4, &mut rng);
        ops.u_bb = haar_random_unitary(4, &mut rng);
        let res = ControlResources::new(2, 2, 2, Ancilla::Schmidt(mu), vec![ops.clone()], &tol()).unwrap();
        let ch = haar_random_channel(2, 2, &mut rng);
        let modified = modified_channel(&ch, &res).unwrap();

        let a = blocks_of(&ops.l_aa(), 2, 2);
        let b = blocks_of(&ops.l_bb(), 2, 2);
        let eps_a = Channel::new((0..2).map(|l| a[l][kbar].clone()).collect()).unwrap();
        let eps_b = Channel::new((0..2).map(|k| b[k][kbar].clone()).collect()).unwrap();

        let rho = random_density(2, &mut rng);
        let want = eps_b
            .apply(&ch.apply(&eps_a.apply(&rho).unwrap()).unwrap())
            .unwrap();
        assert!(modified.apply(&rho).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn modified_channel_matches_density_matrix_oracle() {
        // the mandatory end-to-end check pinning the index conventions
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..8 {
            let n = if trial % 2 == 0 { 2 } else { 3 };
            let res = random_resources(n, &mut rng);
            let ch = haar_random_channel(n, n, &mut rng);
            let modified = modified_channel(&ch, &res).unwrap();
            let rho = random_density(n, &mut rng);
            let got = modified.apply(&rho).unwrap();
            let want = density_matrix_oracle(&ch, &res, &rho);
            assert!(
                got.max_abs_diff(&want) < 1e-12,
                "trial {trial}: oracle deviation {}",
                got.max_abs_diff(&want)
            );
        }
    }

    #[test]
    fn mixed_ancilla_is_linear_over_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi1 = haar_random_state(4, &mut rng);
        let psi2 = haar_random_state(4, &mut rng);
        let (w1, w2) = (0.3, 0.7);
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = haar_random_unitary(4, &mut rng);
        ops.u_bb = haar_random_unitary(4, &mut rng);
        let mixed = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Mixed(vec![(w1, psi1.clone()), (w2, psi2.clone())]),
            vec![ops.clone()],
            &tol(),
        )
        .unwrap();
        let pure1 = ControlResources::new(2, 2, 2, Ancilla::Pure(psi1), vec![ops.clone()], &tol()).unwrap();
        let pure2 = ControlResources::new(2, 2, 2, Ancilla::Pure(psi2), vec![ops], &tol()).unwrap();

        let ch = haar_random_channel(2, 3, &mut rng);
        let rho = random_density(2, &mut rng);
        let got = modified_channel(&ch, &mixed).unwrap().apply(&rho).unwrap();
        let want = modified_channel(&ch, &pure1)
            .unwrap()
            .apply(&rho)
            .unwrap()
            .scaled_re(w1)
            .add(&modified_channel(&ch, &pure2).unwrap().apply(&rho).unwrap().scaled_re(w2));
        assert!(got.max_abs_diff(&want) < 1e-12);

        // oracle agrees too
        let oracle = density_matrix_oracle(&ch, &mixed, &rho);
        assert!(got.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn commutation_square_choi_of_modified_equals_lambda_applied() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..10 {
            let n = 2;
            let res = random_resources(n, &mut rng);
            let ch = haar_random_channel(n, rng.gen_range(1..=4), &mut rng);
            let left = choi_of(&modified_channel(&ch, &res).unwrap());
            let right = apply_lambda(&lambda_map(&res).unwrap(), &choi_of(&ch)).unwrap();
            let dev = left.matrix().max_abs_diff(right.matrix());
            assert!(dev < 1e-9, "trial {trial}: routes differ by {dev}");
        }
    }

    #[test]
    fn unitary_shift_lambda_is_u2_tensor_u1_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u1 = haar_random_unitary(2, &mut rng);
        let u2 = haar_random_unitary(2, &mut rng);
        let ops = OutcomeOps {
            u_aa: u1.clone(),
            pi_aa: ComplexMatrix::identity(2),
            u_bb: u2.clone(),
            pi_bb: ComplexMatrix::identity(2),
            b_filter: None,
        };
        let res =
            ControlResources::new(2, 1, 1, Ancilla::Schmidt(vec![1.0]), vec![ops], &tol()).unwrap();
        let lm = lambda_map(&res).unwrap();
        assert_eq!(lm.kraus().len(), 1);
        assert!(lm.kraus()[0].op.max_abs_diff(&u2.tensor(&u1.transpose())) < 1e-14);
    }

    #[test]
    fn swap_projector_construction_is_trace_increasing() {
        // sum Lambda^dag Lambda = dim(H_a) I^B (x) diag(mu_i^2): one
        // eigenvalue exceeds 1 whenever mu is not uniform
        let n = 2;
        let mu = vec![0.8, 0.6];
        let mut outcomes = Vec::new();
        for eta in 0..n {
            let mut pi = ComplexMatrix::zeros(n * n, n * n);
            for t in 0..n {
                pi.set(eta * n + t, eta * n + t, Complex64::new(1.0, 0.0));
            }
            outcomes.push(OutcomeOps {
                u_aa: swap_gate(n),
                pi_aa: pi,
                u_bb: ComplexMatrix::identity(n * n),
                pi_bb: ComplexMatrix::identity(n * n),
                b_filter: None,
            });
        }
        let res = ControlResources::new(n, n, n, Ancilla::Schmidt(mu.clone()), outcomes, &tol()).unwrap();
        let lm = lambda_map(&res).unwrap();
        let report = trace_character(&lm, &tol()).unwrap();
        assert_eq!(report.character, TraceCharacter::Increasing);
        let mut want = ComplexMatrix::zeros(n * n, n * n);
        for b in 0..n {
            for i in 0..n {
                want.set(
                    b * n + i,
                    b * n + i,
                    Complex64::new(n as f64 * mu[i] * mu[i], 0.0),
                );
            }
        }
        assert!(report.kraus_sum.max_abs_diff(&want) < 1e-12);
        assert!(report.max_eigenvalue > 1.0 + 1e-6);
        // uniform mu restores trace preservation
        let uniform = vec![std::f64::consts::FRAC_1_SQRT_2; 2];
        let mut outcomes = Vec::new();
        for eta in 0..n {
            let mut pi = ComplexMatrix::zeros(n * n, n * n);
            for t in 0..n {
                pi.set(eta * n + t, eta * n + t, Complex64::new(1.0, 0.0));
            }
            outcomes.push(OutcomeOps {
                u_aa: swap_gate(n),
                pi_aa: pi,
                u_bb: ComplexMatrix::identity(n * n),
                pi_bb: ComplexMatrix::identity(n * n),
                b_filter: None,
            });
        }
        let res = ControlResources::new(n, n, n, Ancilla::Schmidt(uniform), outcomes, &tol()).unwrap();
        let report = trace_character(&lambda_map(&res).unwrap(), &tol()).unwrap();
        assert_eq!(report.character, TraceCharacter::Preserving);
    }

    #[test]
    fn bistochastic_sender_makes_lambda_trace_preserving() {
        // ancilla-controlled unitaries satisfy the column sums, so the map is
        // trace-preserving for arbitrary Schmidt coefficients
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let n = 2;
            let d = 2;
            let mut u_aa = ComplexMatrix::zeros(n * d, n * d);
            for m in 0..d {
                let q = haar_random_unitary(n, &mut rng);
                for x in 0..n {
                    for y in 0..n {
                        u_aa.set(x * d + m, y * d + m, q.get(x, y));
                    }
                }
            }
            let mut ops = OutcomeOps::trivial(n, d, d);
            ops.u_aa = u_aa;
            ops.u_bb = haar_random_unitary(n * d, &mut rng);
            let raw: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.1).collect();
            let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mu: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let res = ControlResources::new(n, d, d, Ancilla::Schmidt(mu), vec![ops], &tol()).unwrap();

            let relations = check_resource_relations(&res, &tol()).unwrap();
            assert!(relations.bistochastic_columns.passes);
            let report = trace_character(&lambda_map(&res).unwrap(), &tol()).unwrap();
            assert_eq!(report.character, TraceCharacter::Preserving);
        }
    }

    #[test]
    fn relation_report_for_random_and_special_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // random joint unitary: ordinary unitarity sums hold, the
        // partial-transpose variant generally does not
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = haar_random_unitary(4, &mut rng);
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![ops],
            &tol(),
        )
        .unwrap();
        let rel = check_resource_relations(&res, &tol()).unwrap();
        assert!(rel.unitary_blocks_a.passes);
        assert!(rel.projector_blocks_a.passes);
        assert!(!rel.transposed_unitary_blocks_a.passes);
        assert!(rel.deterministic);

        // swap: the partial transpose is rank one, far from unitary
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = swap_gate(2);
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![ops],
            &tol(),
        )
        .unwrap();
        let rel = check_resource_relations(&res, &tol()).unwrap();
        assert!(rel.unitary_blocks_a.passes);
        assert!(!rel.transposed_unitary_blocks_a.passes);

        // cnot: controlled unitaries do satisfy the transposed sums
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = cnot_gate();
        let res = ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 0.0]),
            vec![ops],
            &tol(),
        )
        .unwrap();
        let rel = check_resource_relations(&res, &tol()).unwrap();
        assert!(rel.transposed_unitary_blocks_a.passes);
        assert!(rel.bistochastic_columns.passes);
    }

    #[test]
    fn separable_composition_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = haar_random_channel(2, 2, &mut rng);
        // single identity term leaves the channel unchanged
        let id = Channel::identity(2);
        let same =
            separable_composition(&[1.0], std::slice::from_ref(&id), std::slice::from_ref(&id), &ch, &tol()).unwrap();
        let rho = random_density(2, &mut rng);
        assert!(same.apply(&rho).unwrap().max_abs_diff(&ch.apply(&rho).unwrap()) < 1e-13);

        // two-term classical correlation vs the mixed-ancilla route
        let u = [haar_random_unitary(2, &mut rng), haar_random_unitary(2, &mut rng)];
        let w = [haar_random_unitary(2, &mut rng), haar_random_unitary(2, &mut rng)];
        let weights = [0.25, 0.75];
        let eps_a: Vec<Channel> = u.iter().map(|m| Channel::unitary(m.clone()).unwrap()).collect();
        let eps_b: Vec<Channel> = w.iter().map(|m| Channel::unitary(m.clone()).unwrap()).collect();
        let direct = separable_composition(&weights, &eps_a, &eps_b, &ch, &tol()).unwrap();

        // classical flags |m>^a |m>^b with ancilla-controlled local unitaries
        let d = 2;
        let mut u_aa = ComplexMatrix::zeros(2 * d, 2 * d);
        let mut u_bb = ComplexMatrix::zeros(2 * d, 2 * d);
        for m in 0..d {
            for x in 0..2 {
                for y in 0..2 {
                    u_aa.set(x * d + m, y * d + m, u[m].get(x, y));
                    u_bb.set(x * d + m, y * d + m, w[m].get(x, y));
                }
            }
        }
        let mut ops = OutcomeOps::trivial(2, d, d);
        ops.u_aa = u_aa;
        ops.u_bb = u_bb;
        let components: Vec<(f64, PureState)> = (0..d)
            .map(|m| {
                (
                    weights[m],
                    PureState::basis_state(d, m).tensor(&PureState::basis_state(d, m)),
                )
            })
            .collect();
        let res =
            ControlResources::new(2, d, d, Ancilla::Mixed(components), vec![ops], &tol()).unwrap();
        let via_resources = modified_channel(&ch, &res).unwrap();
        assert!(choi_of(&direct)
            .matrix()
            .max_abs_diff(choi_of(&via_resources).matrix())
            < 1e-12);

        // weights (1, 0) reduce to the plain sandwich
        let only_first =
            separable_composition(&[1.0, 0.0], &eps_a, &eps_b, &ch, &tol()).unwrap();
        let sandwich = eps_b[0]
            .apply(&ch.apply(&eps_a[0].apply(&rho).unwrap()).unwrap())
            .unwrap();
        assert!(only_first.apply(&rho).unwrap().max_abs_diff(&sandwich) < 1e-13);

        assert!(separable_composition(&[0.5], &eps_a, &eps_b, &ch, &tol()).is_err());
    }

    #[test]
    fn deterministic_resources_preserve_channel_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let res = crate::random::random_deterministic_resources(2, &mut rng);
            assert!(res.is_deterministic(&tol()));
            let rel = check_resource_relations(&res, &tol()).unwrap();
            assert!(rel.deterministic_rows.passes);
            assert!(rel.sender_instrument.passes);
            let ch = haar_random_channel(2, 3, &mut rng);
            let modified = modified_channel(&ch, &res).unwrap();
            assert!(modified.is_trace_preserving(&tol()));
        }
    }

    #[test]
    fn maximally_entangled_ancilla_with_complete_measurement_preserves_trace() {
        // sufficiency: uniform Schmidt coefficients plus a sender measurement
        // resolving the identity give a trace-preserving map, for any
        // sender unitary and receiver unitaries
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..5 {
            let (n, d) = (2usize, 2usize);
            let u_aa = haar_random_unitary(n * d, &mut rng);
            let outcomes: Vec<OutcomeOps> =
                crate::random::random_projector_partition(n * d, 2, &mut rng)
                    .into_iter()
                    .map(|pi_aa| OutcomeOps {
                        u_aa: u_aa.clone(),
                        pi_aa,
                        u_bb: haar_random_unitary(n * d, &mut rng),
                        pi_bb: ComplexMatrix::identity(n * d),
                        b_filter: None,
                    })
                    .collect();
            let uniform = vec![1.0 / (d as f64).sqrt(); d];
            let res =
                ControlResources::new(n, d, d, Ancilla::Schmidt(uniform), outcomes, &tol()).unwrap();
            let report = trace_character(&lambda_map(&res).unwrap(), &tol()).unwrap();
            assert_eq!(report.character, TraceCharacter::Preserving);
        }
    }

    #[test]
    fn product_ancilla_trace_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let res = crate::random::random_product_ancilla_resources(2, &mut rng);
            let lm = lambda_map(&res).unwrap();
            let report = trace_character(&lm, &tol()).unwrap();
            assert!(
                report.within_dim_a_bound,
                "max eigenvalue {} exceeds dim_a = {}",
                report.max_eigenvalue,
                lm.dim_a()
            );
        }
    }

    #[test]
    fn resource_validation_rejects_bad_inputs() {
        let t = tol();
        // wrong Schmidt normalization
        assert!(ControlResources::new(
            2,
            2,
            2,
            Ancilla::Schmidt(vec![1.0, 1.0]),
            vec![OutcomeOps::trivial(2, 2, 2)],
            &t
        )
        .is_err());
        // non-unitary operation
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.u_aa = ComplexMatrix::identity(4).scaled_re(0.5);
        assert!(ControlResources::new(2, 2, 2, Ancilla::Schmidt(vec![1.0, 0.0]), vec![ops], &t).is_err());
        // non-idempotent projector
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.pi_aa = ComplexMatrix::identity(4).scaled_re(0.5);
        assert!(ControlResources::new(2, 2, 2, Ancilla::Schmidt(vec![1.0, 0.0]), vec![ops], &t).is_err());
        // filter that amplifies
        let mut ops = OutcomeOps::trivial(2, 2, 2);
        ops.b_filter = Some(ComplexMatrix::identity(4).scaled_re(1.5));
        assert!(ControlResources::new(2, 2, 2, Ancilla::Schmidt(vec![1.0, 0.0]), vec![ops], &t).is_err());
    }
}
