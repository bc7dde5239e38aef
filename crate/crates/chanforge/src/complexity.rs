//! Channel complexity and the Choi fidelity figure of merit.
//!
//! The complexity of a channel family is the dimension of the span of the
//! supports of its members' Choi states, with the convention that a family
//! supported entirely on the maximally entangled state has complexity zero
//! (trivial controls already deal with it). It measures the structure of the
//! noise, not its size, and bounds the resources a correction needs.

use crate::channels::{choi_of, max_entangled_state, Channel, ChannelFamily, ChoiState};
use crate::control::{apply_lambda, lambda_map, ControlResources};
use crate::error::Result;
use crate::linalg::{hermitian_eigen, numerical_rank, Complex64, ComplexMatrix, Tolerances};

/// Orthonormal basis of the support of a Choi state.
#[derive(Debug, Clone)]
pub struct SupportSubspace {
    dim_total: usize,
    basis: ComplexMatrix,
}

impl SupportSubspace {
    /// Dimension of the ambient space `H_B (x) H_A` (that is, N^2).
    pub fn dim_total(&self) -> usize {
        self.dim_total
    }

    /// Support dimension.
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// Orthonormal basis columns.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Projector onto the span of the basis columns.
    pub fn projector(&self) -> ComplexMatrix {
        self.basis.matmul(&self.basis.adjoint())
    }
}

/// Eigenvectors of `R` with eigenvalue above `eps_rank` times the largest.
pub fn support(choi: &ChoiState, tol: &Tolerances) -> Result<SupportSubspace> {
    let eig = hermitian_eigen(choi.matrix(), tol)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v > tol.eps_rank * max && v > 0.0)
        .count();
    let dim_total = choi.matrix().rows();
    let cols: Vec<Vec<Complex64>> = (0..rank).map(|j| eig.vectors.column(j)).collect();
    Ok(SupportSubspace {
        dim_total,
        basis: ComplexMatrix::from_columns(dim_total, &cols),
    })
}

fn is_ideal_support(s: &SupportSubspace, n: usize, tol: &Tolerances) -> bool {
    s.rank() == 1 && {
        let psi0 = max_entangled_state(n);
        let overlap: Complex64 = psi0
            .amplitudes()
            .iter()
            .zip(s.basis.column(0).iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        (overlap.norm() - 1.0).abs() <= tol.eps_eq
    }
}

/// Complexity of a single Choi state: its support dimension, or zero when
/// the support is exactly the span of the maximally entangled state.
pub fn choi_complexity(choi: &ChoiState, tol: &Tolerances) -> Result<usize> {
    let s = support(choi, tol)?;
    if is_ideal_support(&s, choi.dim(), tol) {
        return Ok(0);
    }
    Ok(s.rank())
}

/// Complexity of a channel family: the dimension of the union of the Choi
/// supports, or zero when every support is exactly the span of the maximally
/// entangled state.
pub fn complexity(family: &ChannelFamily, tol: &Tolerances) -> Result<usize> {
    let n = family.dim();
    let supports: Vec<SupportSubspace> = family
        .members()
        .iter()
        .map(|ch| support(&choi_of(ch), tol))
        .collect::<Result<_>>()?;

    if supports.iter().all(|s| is_ideal_support(s, n, tol)) {
        return Ok(0);
    }

    // rank of the column-concatenated bases via their Gram matrix
    let cols: Vec<Vec<Complex64>> = supports
        .iter()
        .flat_map(|s| (0..s.rank()).map(|j| s.basis.column(j)).collect::<Vec<_>>())
        .collect();
    let stacked = ComplexMatrix::from_columns(n * n, &cols);
    let gram = stacked.adjoint().matmul(&stacked);
    numerical_rank(&gram, tol)
}

/// Complexity of a single channel.
pub fn channel_complexity(ch: &Channel, tol: &Tolerances) -> Result<usize> {
    complexity(&ChannelFamily::new(vec![ch.clone()])?, tol)
}

/// Choi fidelity `F = <psi_0| R |psi_0>` with the ideal channel.
pub fn cj_fidelity(choi: &ChoiState) -> f64 {
    let psi0 = max_entangled_state(choi.dim());
    choi.matrix().sandwich(psi0.amplitudes(), psi0.amplitudes()).re
}

/// Result of a fidelity search.
#[derive(Debug, Clone)]
pub struct FidelityOptimum {
    pub params: Vec<f64>,
    pub fidelity: f64,
    pub evaluations: usize,
}

/// Maximizes the Choi fidelity of the controlled channel over a caller
/// parametrization `u -> ControlResources` with a Nelder-Mead simplex search.
///
/// `budget` caps the number of objective evaluations; the initial point is
/// always evaluated, so a budget of zero (or one) returns it unchanged. The
/// best point seen is tracked, which makes the result monotone in the budget.
/// Parametrization failures at the initial point are errors; failures during
/// the search count as worst-possible points.
pub fn optimize_fidelity<F>(
    ch: &Channel,
    parametrization: F,
    initial: &[f64],
    budget: usize,
) -> Result<FidelityOptimum>
where
    F: Fn(&[f64]) -> Result<ControlResources>,
{
    let choi = choi_of(ch);
    let objective = |u: &[f64]| -> Result<f64> {
        let res = parametrization(u)?;
        let after = apply_lambda(&lambda_map(&res)?, &choi)?;
        Ok(cj_fidelity(&after))
    };

    let f0 = objective(initial)?;
    let mut evaluations = 1usize;
    let mut best = FidelityOptimum {
        params: initial.to_vec(),
        fidelity: f0,
        evaluations,
    };
    if budget <= 1 || initial.is_empty() {
        return Ok(best);
    }

    let eval = |u: &[f64], evaluations: &mut usize, best: &mut FidelityOptimum| -> f64 {
        *evaluations += 1;
        match objective(u) {
            Ok(f) => {
                if f > best.fidelity {
                    best.fidelity = f;
                    best.params = u.to_vec();
                }
                f
            }
            Err(_) => -1.0,
        }
    };

    // simplex over the initial point plus one step along each coordinate
    let dim = initial.len();
    let step = 0.25;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(initial.to_vec(), f0)];
    for i in 0..dim {
        if evaluations >= budget {
            break;
        }
        let mut x = initial.to_vec();
        x[i] += step;
        let f = eval(&x, &mut evaluations, &mut best);
        simplex.push((x, f));
    }

    // standard reflection/expansion/contraction/shrink loop, maximizing
    while evaluations < budget && simplex.len() == dim + 1 {
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(x.iter()) {
                *c += v / dim as f64;
            }
        }
        let shifted = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst.0.iter())
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = shifted(1.0);
        let fr = eval(&reflected, &mut evaluations, &mut best);
        if fr > simplex[0].1 && evaluations < budget {
            let expanded = shifted(2.0);
            let fe = eval(&expanded, &mut evaluations, &mut best);
            simplex[dim] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else if evaluations < budget {
            let contracted = shifted(-0.5);
            let fc = eval(&contracted, &mut evaluations, &mut best);
            if fc > worst.1 {
                simplex[dim] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if evaluations >= budget {
                        break;
                    }
                    let x: Vec<f64> = anchor
                        .iter()
                        .zip(entry.0.iter())
                        .map(|(a, b)| a + 0.5 * (b - a))
                        .collect();
                    let f = eval(&x, &mut evaluations, &mut best);
                    *entry = (x, f);
                }
            }
        }
    }

    best.evaluations = evaluations;
    Ok(best)
}
