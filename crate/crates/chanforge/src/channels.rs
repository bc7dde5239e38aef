//! Channels as Kraus-operator lists, Choi-Jamiolkowski states, and the
//! standard single-qubit channel zoo.
//!
//! A channel maps density matrices on `H_A` to density matrices on `H_B` with
//! `dim H_A = dim H_B = N`. Its Choi state lives on `H_B (x) H_A` with the B
//! factor first; eigenvector unvectorization uses the same `(b, a)` index
//! split. Trace-decreasing channels are allowed: the output trace is the
//! success probability.

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigen, numerical_rank, Complex64, ComplexMatrix, PureState, Tolerances,
};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            re(0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            re(0.0),
        ],
    )
    .unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// SWAP on two `n`-dimensional factors.
pub fn swap_gate(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for x in 0..n {
        for y in 0..n {
            m.set(y * n + x, x * n + y, re(1.0));
        }
    }
    m
}

/// Qubit CNOT; first factor controls, second is the target.
pub fn cnot_gate() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for x in 0..2 {
        for y in 0..2 {
            m.set(x * 2 + (y ^ x), x * 2 + y, re(1.0));
        }
    }
    m
}

/// `|psi_0> = (1/sqrt(N)) sum_i |i>|i>`.
pub fn max_entangled_state(n: usize) -> PureState {
    bell_state(n, 0).expect("eta = 0 is always in range")
}

/// Projector onto the maximally entangled state.
pub fn max_entangled_projector(n: usize) -> ComplexMatrix {
    max_entangled_state(n).projector()
}

/// Generalized Bell state `|psi_eta>` with `eta = n*N + m`:
/// amplitudes `exp(2 pi i k n / N) / sqrt(N)` at `|k>|(k+m) mod N>`.
pub fn bell_state(n: usize, eta: usize) -> Result<PureState> {
    if eta >= n * n {
        return Err(Error::OutOfRange(format!(
            "Bell index {eta} out of range for N = {n}"
        )));
    }
    let (shift, m) = (eta / n, eta % n);
    let mut amplitudes = vec![re(0.0); n * n];
    let norm = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        let phase = 2.0 * std::f64::consts::PI * (k * shift) as f64 / n as f64;
        amplitudes[k * n + (k + m) % n] = Complex64::from_polar(norm, phase);
    }
    PureState::new(amplitudes)
}

/// Projector onto a generalized Bell state.
pub fn bell_projector(n: usize, eta: usize) -> Result<ComplexMatrix> {
    Ok(bell_state(n, eta)?.projector())
}

/// Completely positive map in operator-sum form; may be trace-decreasing.
#[derive(Debug, Clone)]
pub struct Channel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    /// Validates shape agreement and `sum E_i^dag E_i <= I` up to the default
    /// trace slack.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerances(kraus, &Tolerances::default())
    }

    pub fn with_tolerances(kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        if !first.is_square() {
            return Err(Error::InvalidChannel(
                "non-square channels (dim_in != dim_out) are not supported".into(),
            ));
        }
        let dim = first.rows();
        if kraus.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        let ch = Self { dim, kraus };
        let sum = ch.kraus_sum();
        let eig = hermitian_eigen(&sum, tol)?;
        let max = eig.values.first().copied().unwrap_or(0.0);
        if max > 1.0 + tol.eps_tp {
            return Err(Error::InvalidChannel(format!(
                "sum E^dag E has eigenvalue {max} > 1 (trace-increasing)"
            )));
        }
        Ok(ch)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            dim: n,
            kraus: vec![ComplexMatrix::identity(n)],
        }
    }

    /// `{sqrt(1-p) I, sqrt(p) sigma_x}`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        check_unit_interval(p, "p")?;
        Ok(Self {
            dim: 2,
            kraus: vec![
                ComplexMatrix::identity(2).scaled_re((1.0 - p).sqrt()),
                pauli_x().scaled_re(p.sqrt()),
            ],
        })
    }

    /// `{sqrt(1-p) I, sqrt(p) sigma_z}`.
    pub fn phase_flip(p: f64) -> Result<Self> {
        check_unit_interval(p, "p")?;
        Ok(Self {
            dim: 2,
            kraus: vec![
                ComplexMatrix::identity(2).scaled_re((1.0 - p).sqrt()),
                pauli_z().scaled_re(p.sqrt()),
            ],
        })
    }

    /// Four-Pauli form `{sqrt(1-3p/4) I, sqrt(p/4) sigma_{x,y,z}}`, so the
    /// Choi rank is 4 for `p` in (0, 1).
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_unit_interval(p, "p")?;
        Ok(Self {
            dim: 2,
            kraus: vec![
                ComplexMatrix::identity(2).scaled_re((1.0 - 3.0 * p / 4.0).sqrt()),
                pauli_x().scaled_re((p / 4.0).sqrt()),
                pauli_y().scaled_re((p / 4.0).sqrt()),
                pauli_z().scaled_re((p / 4.0).sqrt()),
            ],
        })
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_unit_interval(gamma, "gamma")?;
        let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]]);
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]);
        Ok(Self { dim: 2, kraus: vec![k0, k1] })
    }

    pub fn phase_damping(gamma: f64) -> Result<Self> {
        check_unit_interval(gamma, "gamma")?;
        let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]]);
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, gamma.sqrt()]]);
        Ok(Self { dim: 2, kraus: vec![k0, k1] })
    }

    /// Single-Kraus channel `rho -> U rho U^dag`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let defect = u.unitarity_defect();
        if defect > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "unitary channel operator has unitarity defect {defect:.3e}"
            )));
        }
        Ok(Self { dim: u.rows(), kraus: vec![u] })
    }

    pub fn dim_in(&self) -> usize {
        self.dim
    }

    pub fn dim_out(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `sum_i E_i^dag E_i`.
    pub fn kraus_sum(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        sum
    }

    /// True iff `sum E^dag E == I` within `eps_tp` in max-norm.
    pub fn is_trace_preserving(&self, tol: &Tolerances) -> bool {
        self.kraus_sum().max_abs_diff(&ComplexMatrix::identity(self.dim)) <= tol.eps_tp
    }

    /// `rho -> sum_i E_i rho E_i^dag`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !rho.is_square() || rho.rows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {} applied to {}x{} state",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = out.add(&k.matmul(rho).matmul(&k.adjoint()));
        }
        Ok(out)
    }
}

/// Choi-Jamiolkowski state `R^{BA}` on `H_B (x) H_A`, B factor first.
#[derive(Debug, Clone)]
pub struct ChoiState {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiState {
    /// Validates Hermiticity, positivity, and the channel trace bound
    /// `Tr R <= 1 + eps_tp`.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let choi = Self::from_cp_output(matrix)?;
        // positivity: numerical_rank rejects negative eigenvalues
        numerical_rank(&choi.matrix, tol)?;
        let trace = choi.trace();
        if trace > 1.0 + tol.eps_tp {
            return Err(Error::InvalidChannel(format!(
                "Choi trace {trace} exceeds 1"
            )));
        }
        Ok(choi)
    }

    /// Wraps the output of a completely positive map without the positivity
    /// or trace checks (which hold by construction there). The dimension must
    /// still be a perfect square.
    pub(crate) fn from_cp_output(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("Choi matrix must be square".into()));
        }
        let dim = (matrix.rows() as f64).sqrt().round() as usize;
        if dim * dim != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "Choi dimension {} is not a perfect square",
                matrix.rows()
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// System dimension N (the matrix is N^2 x N^2).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

/// `R^{BA} = (eps (x) I)[Psi_0]`.
pub fn choi_of(ch: &Channel) -> ChoiState {
    let n = ch.dim_in();
    let psi0 = max_entangled_projector(n);
    let id = ComplexMatrix::identity(n);
    let mut matrix = ComplexMatrix::zeros(n * n, n * n);
    for k in ch.kraus() {
        let ext = k.tensor(&id);
        matrix = matrix.add(&ext.matmul(&psi0).matmul(&ext.adjoint()));
    }
    ChoiState::from_cp_output(matrix).expect("square by construction")
}

/// Channel reconstruction from a Choi state: eigenvalues above
/// `eps_rank * max` become Kraus operators `sqrt(N r_j) unvec(v_j)`.
pub fn kraus_of(choi: &ChoiState, tol: &Tolerances) -> Result<Channel> {
    let n = choi.dim();
    let eig = hermitian_eigen(choi.matrix(), tol)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let abs_scale = eig.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if let Some(&min) = eig.values.last() {
        if min < -tol.eps_rank * abs_scale {
            return Err(Error::NegativeEigenvalue {
                value: min,
                tolerance: tol.eps_rank * abs_scale,
            });
        }
    }
    let mut kraus = Vec::new();
    for (j, &r) in eig.values.iter().enumerate() {
        if r <= tol.eps_rank * max {
            continue;
        }
        let scale = (n as f64 * r).sqrt();
        let col = eig.vectors.column(j);
        kraus.push(ComplexMatrix::from_fn(n, n, |b, a| col[b * n + a] * re(scale)));
    }
    if kraus.is_empty() {
        // zero map: keep a single zero Kraus so the channel type stays valid
        kraus.push(ComplexMatrix::zeros(n, n));
    }
    Channel::with_tolerances(kraus, tol)
}

/// Channel action recovered from the Choi state:
/// `eps[rho] = N Tr_A[ R (I (x) rho^T) ]`.
pub fn apply_via_choi(choi: &ChoiState, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = choi.dim();
    if !rho.is_square() || rho.rows() != n {
        return Err(Error::DimensionMismatch("state dimension does not match Choi".into()));
    }
    let ext = ComplexMatrix::identity(n).tensor(&rho.transpose());
    let prod = choi.matrix().matmul(&ext);
    Ok(linalg::partial_trace(&prod, &[n, n], &[0])?.scaled_re(n as f64))
}

/// Family of channels with common dimensions (a channel whose exact form is
/// uncertain, represented by its possible members).
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    members: Vec<Channel>,
}

impl ChannelFamily {
    pub fn new(members: Vec<Channel>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty channel family".into()))?;
        let dim = first.dim_in();
        if members.iter().any(|m| m.dim_in() != dim) {
            return Err(Error::InvalidChannel("family members differ in dimension".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Channel] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim_in()
    }
}

fn check_unit_interval(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}
