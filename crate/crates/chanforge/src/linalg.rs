//! Dense complex linear algebra.
//!
//! Everything in this crate is carried by [`ComplexMatrix`]: states, Kraus
//! operators, Choi matrices, projectors. Matrices are stored row-major and
//! composite indices are big-endian (the first tensor factor is the most
//! significant digit); every other module inherits these conventions.
//!
//! Matrices here are tiny (at most N^2 x N^2 with N <= 6), so products and
//! partial traces are plain index loops. The Hermitian eigendecomposition and
//! the SVD are delegated to nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type Complex64 = num_complex::Complex<f64>;

/// Pure states are validated to unit norm within this slack.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative eigenvalue cutoff for ranks and supports.
    pub eps_rank: f64,
    /// Slack on trace-preservation checks.
    pub eps_tp: f64,
    /// Slack on matrix-equality checks.
    pub eps_eq: f64,
    /// Slack on Hermiticity checks.
    pub eps_herm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_rank: 1e-10,
            eps_tp: 1e-9,
            eps_eq: 1e-9,
            eps_herm: 1e-10,
        }
    }
}

impl Tolerances {
    /// All tolerances must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_rank, self.eps_tp, self.eps_eq, self.eps_herm];
        if all.iter().any(|&e| !e.is_finite() || e <= 0.0) {
            return Err(Error::OutOfRange(
                "tolerances must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Builds a matrix from real row slices; imaginary parts are zero.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        Self::from_fn(nr, nc, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| {
            if r == c {
                values[r]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn from_columns(dim: usize, cols: &[Vec<Complex64>]) -> Self {
        Self::from_fn(dim, cols.len(), |r, c| cols[c][r])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - other.get(r, c))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(Complex64::new(s, 0.0))
    }

    /// Matrix product. Shapes must be compatible; internal callers guarantee it.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace: matrix not square");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Max-norm: largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "diff: shape mismatch");
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Kronecker product with big-endian composite indices:
    /// row (i_a, i_b) -> i_a * other.rows + i_b.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for ia in 0..self.rows {
            for ja in 0..self.cols {
                let a = self.get(ia, ja);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..other.rows {
                    for jb in 0..other.cols {
                        out.set(
                            ia * other.rows + ib,
                            ja * other.cols + jb,
                            a * other.get(ib, jb),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec: shape mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// `<u| M |v>`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mv = self.mul_vec(v);
        u.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= eps
    }

    /// Max-norm deviation of both `U U\u{2020}` and `U\u{2020} U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let id = Self::identity(self.rows);
        let d1 = self.matmul(&self.adjoint()).max_abs_diff(&id);
        let d2 = self.adjoint().matmul(self).max_abs_diff(&id);
        d1.max(d2)
    }

    /// Max-norm deviation from Hermitian idempotence.
    pub fn projector_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let herm = self.hermiticity_defect();
        let idem = self.matmul(self).max_abs_diff(self);
        herm.max(idem)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c))
    }
}

/// Outer product `|u><v|`.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
}

/// Normalized pure state on a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates unit norm within [`STATE_NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm2(&amplitudes);
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::OutOfRange(format!(
                "state norm {norm} is not 1 within {STATE_NORM_TOL:.0e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; errors on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm2(&amplitudes);
        if norm <= 0.0 {
            return Err(Error::OutOfRange("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    /// Rank-one density matrix `|psi><psi|`.
    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims.iter()).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims.iter())
        .fold(0, |acc, (&q, &d)| acc * d + q)
}

/// Traces out the factors of a multipartite operator that are not in `keep`.
///
/// `dims` lists the factor dimensions in big-endian order; `keep` is the
/// strictly increasing set of factor indices retained in the output.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of {}x{} matrix over factors of total dimension {}",
            m.rows(),
            m.cols(),
            total
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&q| q >= dims.len()) {
        return Err(Error::DimensionMismatch(
            "keep must be a strictly increasing list of factor indices".into(),
        ));
    }

    let traced: Vec<usize> = (0..dims.len()).filter(|q| !keep.contains(q)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&q| dims[q]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&q| dims[q]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let tr_dim: usize = traced_dims.iter().product();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    for ri in 0..out_dim {
        let rdig = digits(ri, &kept_dims);
        for ci in 0..out_dim {
            let cdig = digits(ci, &kept_dims);
            let mut sum = Complex64::new(0.0, 0.0);
            for t in 0..tr_dim {
                let tdig = digits(t, &traced_dims);
                for (pos, &q) in keep.iter().enumerate() {
                    full_row[q] = rdig[pos];
                    full_col[q] = cdig[pos];
                }
                for (pos, &q) in traced.iter().enumerate() {
                    full_row[q] = tdig[pos];
                    full_col[q] = tdig[pos];
                }
                sum += m.get(compose(&full_row, dims), compose(&full_col, dims));
            }
            out.set(ri, ci, sum);
        }
    }
    Ok(out)
}

/// Embeds `op`, acting on the factors listed in `targets` (in that order),
/// into the full product space described by `dims`, as identity elsewhere.
pub fn embed_operator(op: &ComplexMatrix, dims: &[usize], targets: &[usize]) -> Result<ComplexMatrix> {
    let tgt_dims: Vec<usize> = targets.iter().map(|&q| dims[q]).collect();
    let tgt_total: usize = tgt_dims.iter().product();
    if targets.iter().any(|&q| q >= dims.len()) {
        return Err(Error::DimensionMismatch("target factor index out of range".into()));
    }
    if !op.is_square() || op.rows() != tgt_total {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} does not act on factors of total dimension {}",
            op.rows(),
            tgt_total
        )));
    }
    let total: usize = dims.iter().product();
    let others: Vec<usize> = (0..dims.len()).filter(|q| !targets.contains(q)).collect();

    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let rdig = digits(r, dims);
        for c in 0..total {
            let cdig = digits(c, dims);
            if others.iter().any(|&q| rdig[q] != cdig[q]) {
                continue;
            }
            let rt: Vec<usize> = targets.iter().map(|&q| rdig[q]).collect();
            let ct: Vec<usize> = targets.iter().map(|&q| cdig[q]).collect();
            out.set(r, c, op.get(compose(&rt, &tgt_dims), compose(&ct, &tgt_dims)));
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Real eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as matrix columns, ordered like `values`.
    pub vectors: ComplexMatrix,
}

/// Diagonalizes a Hermitian matrix.
///
/// Hermiticity is checked up to `eps_herm` (relative to the max-norm for
/// matrices larger than unit scale); the computation runs on the symmetrized
/// matrix `(M + M\u{2020})/2`.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigendecomposition needs a square matrix".into()));
    }
    let scale = m.max_abs().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > tol.eps_herm * scale {
        return Err(Error::NotHermitian {
            deviation: defect,
            tolerance: tol.eps_herm * scale,
        });
    }
    let sym = m.add(&m.adjoint()).scaled_re(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym.to_nalgebra());

    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let values: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Number of eigenvalues above `eps_rank` times the largest one.
///
/// The input must be Hermitian positive semidefinite; an eigenvalue below
/// `-eps_rank * max(|eigenvalues|, 1)` is rejected.
pub fn numerical_rank(m: &ComplexMatrix, tol: &Tolerances) -> Result<usize> {
    let eig = hermitian_eigen(m, tol)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let abs_scale = eig.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let neg_tol = tol.eps_rank * abs_scale;
    if let Some(&min) = eig.values.last() {
        if min < -neg_tol {
            return Err(Error::NegativeEigenvalue {
                value: min,
                tolerance: neg_tol,
            });
        }
    }
    if max <= 0.0 {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&v| v > tol.eps_rank * max).count())
}

/// Schmidt decomposition of a bipartite pure state.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Nonnegative coefficients in descending order; length `min(dim_a, dim_b)`.
    pub coefficients: Vec<f64>,
    /// Full orthonormal basis of the A factor (columns); the first
    /// `coefficients.len()` columns pair with `basis_b`.
    pub basis_a: ComplexMatrix,
    /// Full orthonormal basis of the B factor (columns).
    pub basis_b: ComplexMatrix,
}

/// Schmidt-decomposes `psi` on `H_A (x) H_B` via the SVD of its amplitude matrix.
pub fn schmidt_decompose(psi: &PureState, dim_a: usize, dim_b: usize) -> Result<SchmidtDecomposition> {
    if dim_a * dim_b != psi.dim() || dim_a == 0 || dim_b == 0 {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} is not bipartite over {}x{}",
            psi.dim(),
            dim_a,
            dim_b
        )));
    }
    let amp = DMatrix::from_fn(dim_a, dim_b, |i, j| psi.amplitudes()[i * dim_b + j]);
    let svd = nalgebra::SVD::new(amp, true, true);
    let u = svd.u.expect("SVD with compute_u");
    let v_t = svd.v_t.expect("SVD with compute_v");
    let sv: DVector<f64> = svd.singular_values;

    let k = sv.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());

    let coefficients: Vec<f64> = order.iter().map(|&j| sv[j]).collect();
    // |psi> = sum_k s_k |u_k> (x) |conj(v)_k>; rows of v_t already hold conj(v).
    let cols_a: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&j| (0..dim_a).map(|r| u[(r, j)]).collect())
        .collect();
    let cols_b: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&j| (0..dim_b).map(|c| v_t[(j, c)]).collect())
        .collect();

    Ok(SchmidtDecomposition {
        coefficients,
        basis_a: complete_basis(cols_a, dim_a),
        basis_b: complete_basis(cols_b, dim_b),
    })
}

/// Extends a set of orthonormal columns to a full orthonormal basis.
fn complete_basis(mut cols: Vec<Vec<Complex64>>, dim: usize) -> ComplexMatrix {
    let mut candidates = 0..dim;
    while cols.len() < dim {
        let i = candidates.next().expect("basis completion exhausted candidates");
        let mut v: Vec<Complex64> = (0..dim)
            .map(|r| Complex64::new(if r == i { 1.0 } else { 0.0 }, 0.0))
            .collect();
        // two Gram-Schmidt passes for numerical safety
        for _ in 0..2 {
            for c in &cols {
                let ip: Complex64 = c.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (slot, a) in v.iter_mut().zip(c.iter()) {
                    *slot -= ip * a;
                }
            }
        }
        let n = norm2(&v);
        if n > 0.5 {
            for slot in v.iter_mut() {
                *slot /= n;
            }
            cols.push(v);
        }
    }
    ComplexMatrix::from_columns(dim, &cols)
}
