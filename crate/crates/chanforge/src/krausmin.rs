//! Minimal Kraus representations.
//!
//! A completely positive map admits many operator-sum representations,
//! related by unitary mixing `Lambda_i -> sum_j u_ij Lambda_j`. The minimal
//! cardinality equals the rank of the Gram matrix `G_ij = Tr(Lambda_i^dag
//! Lambda_j)` (the Choi rank of the map); [`reduce`] rotates a redundant set
//! into the Gram eigenbasis, where the null directions are literally zero
//! operators, and drops them. [`upper_bound`] is the largest irreducible set
//! size compatible with a given number of imposed transitions.

use crate::channels::{Channel, ChoiState};
use crate::complexity::SupportSubspace;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, numerical_rank, Complex64, ComplexMatrix, PureState, Tolerances};

/// A list of equally shaped operators treated as one operator-sum
/// representation (no normalization is assumed).
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        if !first.is_square() {
            return Err(Error::InvalidChannel("Kraus operators must be square".into()));
        }
        let dim = first.rows();
        if ops.iter().any(|op| op.rows() != dim || op.cols() != dim) {
            return Err(Error::InvalidChannel("Kraus operators differ in shape".into()));
        }
        Ok(Self { dim, ops })
    }

    /// Collects the operators of a Choi-level map.
    pub fn from_lambda_map(lm: &crate::control::LambdaMap) -> Self {
        Self {
            dim: lm.dim() * lm.dim(),
            ops: lm.kraus().iter().map(|lk| lk.op.clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `G_ij = Tr(op_i^dag op_j)`; Hermitian positive semidefinite.
    pub fn gram(&self) -> ComplexMatrix {
        let k = self.ops.len();
        let mut g = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let mut s = Complex64::new(0.0, 0.0);
                for (a, b) in self.ops[i].entries().iter().zip(self.ops[j].entries()) {
                    s += a.conj() * b;
                }
                g.set(i, j, s);
                g.set(j, i, s.conj());
            }
        }
        g
    }

    /// Choi matrix of the induced map `rho -> sum op rho op^dag` (on the
    /// set's own dimension, which may itself be a composite space).
    pub fn choi(&self) -> ChoiState {
        let as_channel = Channel::new(
            self.ops
                .iter()
                .map(|op| op.scaled_re(1.0 / normalization_bound(self)))
                .collect(),
        );
        match as_channel {
            Ok(ch) => crate::channels::choi_of(&ch),
            Err(_) => unreachable!("scaled set is always subnormalized"),
        }
    }
}

/// Scale that makes the set subnormalized, so it can ride the channel type.
fn normalization_bound(ks: &KrausSet) -> f64 {
    let total: f64 = ks.ops.iter().map(|op| op.frobenius_norm().powi(2)).sum();
    total.sqrt().max(1.0)
}

/// Minimal number of operators needed to represent the same map: the
/// numerical rank of the Gram matrix.
pub fn minimal_count(ks: &KrausSet, tol: &Tolerances) -> Result<usize> {
    numerical_rank(&ks.gram(), tol)
}

/// Rewrites the set with `minimal_count` operators inducing the same map.
///
/// The Gram eigenbasis supplies the unitary mixing: each null eigenvector is
/// a row sending one operator to zero, so rotating by the full eigenvector
/// matrix and dropping the norm-zero rows removes every linear dependence at
/// once.
pub fn reduce(ks: &KrausSet, tol: &Tolerances) -> Result<KrausSet> {
    let gram = ks.gram();
    let eig = hermitian_eigen(&gram, tol)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let keep = eig.values.iter().filter(|&&v| v > tol.eps_rank * max).count();

    let k = ks.len();
    let mut ops = Vec::with_capacity(keep);
    for idx in 0..keep {
        // new_op_idx = sum_j V[j, idx] op_j; the rotated Gram is V^dag G V,
        // diagonal, so the dropped directions carry zero norm
        let mut op = ComplexMatrix::zeros(ks.dim(), ks.dim());
        for j in 0..k {
            let w = eig.vectors.get(j, idx);
            if w.norm() == 0.0 {
                continue;
            }
            op = op.add(&ks.ops[j].scaled(w));
        }
        ops.push(op);
    }
    if ops.is_empty() {
        ops.push(ComplexMatrix::zeros(ks.dim(), ks.dim()));
    }
    KrausSet::new(ops)
}

/// Largest irreducible operator count for a map on an `N^2`-dimensional
/// space constrained on a rank-`R` support: `N^4 - R (N^2 - 1)`.
pub fn upper_bound(n: usize, r: usize) -> Result<usize> {
    if n == 0 || r == 0 || r > n * n {
        return Err(Error::OutOfRange(format!(
            "constraint rank {r} outside 1..={} for N = {n}",
            n * n
        )));
    }
    Ok(n.pow(4) - r * (n * n - 1))
}

/// Per-operator, per-support-vector transition coefficients.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    /// `alpha[j][i] = <target| op_j |r_i>`.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Largest residual `|| op_j |r_i> - alpha_j^i |target> ||_inf`.
    pub max_residual: f64,
    /// `sum_j |alpha_j^i|^2` per support vector; the success probability,
    /// equal to one for deterministic protocols.
    pub success_probabilities: Vec<f64>,
    /// Whether every operator maps every support vector onto the target ray.
    pub satisfied: bool,
}

/// Verifies that every operator maps every support vector to a multiple of
/// the target state, and reports the transition coefficients.
pub fn constraint_check(
    ks: &KrausSet,
    support: &SupportSubspace,
    target: &PureState,
    tol: &Tolerances,
) -> Result<ConstraintReport> {
    if support.dim_total() != ks.dim() || target.dim() != ks.dim() {
        return Err(Error::DimensionMismatch(
            "support and target must live on the operator space".into(),
        ));
    }
    let r = support.rank();
    let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); r]; ks.len()];
    let mut max_residual = 0.0f64;
    for (j, op) in ks.ops().iter().enumerate() {
        for i in 0..r {
            let v = support.basis().column(i);
            let image = op.mul_vec(&v);
            let alpha: Complex64 = target
                .amplitudes()
                .iter()
                .zip(image.iter())
                .map(|(t, x)| t.conj() * x)
                .sum();
            coefficients[j][i] = alpha;
            let residual = image
                .iter()
                .zip(target.amplitudes())
                .map(|(x, t)| (x - alpha * t).norm())
                .fold(0.0, f64::max);
            max_residual = max_residual.max(residual);
        }
    }
    let success_probabilities: Vec<f64> = (0..r)
        .map(|i| coefficients.iter().map(|row| row[i].norm_sqr()).sum())
        .collect();
    Ok(ConstraintReport {
        satisfied: max_residual <= tol.eps_eq,
        coefficients,
        max_residual,
        success_probabilities,
    })
}
