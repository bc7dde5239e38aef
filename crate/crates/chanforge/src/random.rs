//! Seeded random generators for states, unitaries, and channels.
//!
//! Random channels come from Haar-random Stinespring isometries, so a draw
//! with `num_kraus = N^2` has full Kraus rank almost surely. Everything is
//! deterministic given the caller's RNG; the CLI surfaces the seed in reports.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::Channel;
use crate::control::{Ancilla, ControlResources, OutcomeOps};
use crate::linalg::{Complex64, ComplexMatrix, PureState, Tolerances};

fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / 2f64.sqrt()
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| gaussian_complex(rng)).collect())
        .collect()
}

/// QR-orthonormalizes the columns of a Gaussian matrix via modified
/// Gram-Schmidt with a second pass. Plain positive normalization keeps the R
/// diagonal positive, so the resulting columns are Haar-distributed.
fn orthonormal_columns<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    assert!(cols <= rows);
    let g = gaussian_matrix(rows, cols, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<Complex64> = (0..rows).map(|r| g[r][j]).collect();
        for _ in 0..2 {
            for prev in &q {
                let ip: Complex64 = prev.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (slot, a) in v.iter_mut().zip(prev.iter()) {
                    *slot -= ip * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for slot in v.iter_mut() {
            *slot /= norm;
        }
        q.push(v);
    }
    q
}

/// Haar-random unitary of dimension `n`.
pub fn haar_random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let cols = orthonormal_columns(n, n, rng);
    ComplexMatrix::from_columns(n, &cols)
}

/// Haar-random pure state of dimension `n`.
pub fn haar_random_state<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// Random density matrix: a Haar-random basis with uniform random weights.
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let u = haar_random_unitary(n, rng);
    let mut weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-6).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut rho = ComplexMatrix::zeros(n, n);
    for (j, w) in weights.into_iter().enumerate() {
        let col = u.column(j);
        rho = rho.add(&crate::linalg::outer(&col, &col).scaled_re(w));
    }
    rho
}

/// Random trace-preserving channel from a Haar-random isometry
/// `V: H_N -> H_k (x) H_N`, split into `num_kraus` blocks.
pub fn haar_random_channel<R: Rng>(n: usize, num_kraus: usize, rng: &mut R) -> Channel {
    assert!(num_kraus >= 1);
    let cols = orthonormal_columns(n * num_kraus, n, rng);
    let kraus: Vec<ComplexMatrix> = (0..num_kraus)
        .map(|e| ComplexMatrix::from_fn(n, n, |b, a| cols[a][e * n + b]))
        .collect();
    Channel::new(kraus).expect("isometry blocks form a valid channel")
}

/// Random rank-`rank` projector from Haar-random orthonormal columns.
pub fn random_projector<R: Rng>(n: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rank <= n);
    let cols = orthonormal_columns(n, rank, rng);
    let mut p = ComplexMatrix::zeros(n, n);
    for col in &cols {
        p = p.add(&crate::linalg::outer(col, col));
    }
    p
}

/// Splits a Haar-random orthonormal basis of dimension `n` into `parts`
/// mutually orthogonal projectors summing to the identity.
pub fn random_projector_partition<R: Rng>(n: usize, parts: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    assert!(parts >= 1 && parts <= n);
    let cols = orthonormal_columns(n, n, rng);
    // distribute columns round-robin so every part is nonempty
    let mut projectors = vec![ComplexMatrix::zeros(n, n); parts];
    for (j, col) in cols.iter().enumerate() {
        let p = &mut projectors[j % parts];
        *p = p.add(&crate::linalg::outer(col, col));
    }
    projectors
}

fn random_contraction<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let v = haar_random_unitary(n, rng);
    let w = haar_random_unitary(n, rng);
    let d = ComplexMatrix::diagonal(
        &(0..n)
            .map(|_| Complex64::new(rng.gen::<f64>(), 0.0))
            .collect::<Vec<_>>(),
    );
    v.matmul(&d).matmul(&w.adjoint())
}

fn random_ancilla<R: Rng>(dim_a: usize, dim_b: usize, rng: &mut R) -> Ancilla {
    match rng.gen_range(0..3) {
        0 => {
            let raw: Vec<f64> = (0..dim_a.min(dim_b)).map(|_| rng.gen::<f64>() + 0.05).collect();
            let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ancilla::Schmidt(raw.into_iter().map(|x| x / norm).collect())
        }
        1 => Ancilla::Pure(haar_random_state(dim_a * dim_b, rng)),
        _ => {
            let w = 0.2 + 0.6 * rng.gen::<f64>();
            Ancilla::Mixed(vec![
                (w, haar_random_state(dim_a * dim_b, rng)),
                (1.0 - w, haar_random_state(dim_a * dim_b, rng)),
            ])
        }
    }
}

/// Random resources with a shared sender unitary, an orthogonal sender
/// measurement (possibly keeping only some outcomes), random receiver
/// operations, and occasionally a receiver success filter.
pub fn random_resources<R: Rng>(n: usize, rng: &mut R) -> ControlResources {
    let dim_a = rng.gen_range(1..=2);
    let dim_b = rng.gen_range(1..=2);
    let parts = rng.gen_range(1..=(n * dim_a).min(3));
    let kept = rng.gen_range(1..=parts);
    let u_aa = haar_random_unitary(n * dim_a, rng);
    let partition = random_projector_partition(n * dim_a, parts, rng);
    let outcomes: Vec<OutcomeOps> = partition
        .into_iter()
        .take(kept)
        .map(|pi_aa| {
            let full_rank = n * dim_b;
            let pi_bb = if rng.gen_bool(0.5) {
                ComplexMatrix::identity(full_rank)
            } else {
                random_projector(full_rank, rng.gen_range(1..=full_rank), rng)
            };
            let b_filter = if rng.gen_bool(0.3) {
                Some(random_contraction(full_rank, rng))
            } else {
                None
            };
            OutcomeOps {
                u_aa: u_aa.clone(),
                pi_aa,
                u_bb: haar_random_unitary(full_rank, rng),
                pi_bb,
                b_filter,
            }
        })
        .collect();
    ControlResources::new(
        n,
        dim_a,
        dim_b,
        random_ancilla(dim_a, dim_b, rng),
        outcomes,
        &Tolerances::default(),
    )
    .expect("randomly generated resources are valid")
}

/// Random deterministic resources: the sender projectors resolve the
/// identity and the receiver applies outcome-conditioned unitaries only.
pub fn random_deterministic_resources<R: Rng>(n: usize, rng: &mut R) -> ControlResources {
    let dim_a = rng.gen_range(1..=2);
    let dim_b = rng.gen_range(1..=2);
    let parts = rng.gen_range(1..=(n * dim_a).min(3));
    let u_aa = haar_random_unitary(n * dim_a, rng);
    let outcomes: Vec<OutcomeOps> = random_projector_partition(n * dim_a, parts, rng)
        .into_iter()
        .map(|pi_aa| OutcomeOps {
            u_aa: u_aa.clone(),
            pi_aa,
            u_bb: haar_random_unitary(n * dim_b, rng),
            pi_bb: ComplexMatrix::identity(n * dim_b),
            b_filter: None,
        })
        .collect();
    ControlResources::new(
        n,
        dim_a,
        dim_b,
        random_ancilla(dim_a, dim_b, rng),
        outcomes,
        &Tolerances::default(),
    )
    .expect("randomly generated resources are valid")
}

/// Random resources whose ancilla is a product state, the scope of the
/// `dim(H_a)` bound on the Choi-map trace.
pub fn random_product_ancilla_resources<R: Rng>(n: usize, rng: &mut R) -> ControlResources {
    let dim_a = rng.gen_range(1..=2);
    let dim_b = rng.gen_range(1..=2);
    let mut mu = vec![0.0; dim_a.min(dim_b)];
    let kbar = rng.gen_range(0..mu.len());
    mu[kbar] = 1.0;
    let parts = rng.gen_range(1..=(n * dim_a).min(3));
    let u_aa = haar_random_unitary(n * dim_a, rng);
    let outcomes: Vec<OutcomeOps> = random_projector_partition(n * dim_a, parts, rng)
        .into_iter()
        .map(|pi_aa| {
            let full_rank = n * dim_b;
            let pi_bb = if rng.gen_bool(0.5) {
                ComplexMatrix::identity(full_rank)
            } else {
                random_projector(full_rank, rng.gen_range(1..=full_rank), rng)
            };
            OutcomeOps {
                u_aa: u_aa.clone(),
                pi_aa,
                u_bb: haar_random_unitary(full_rank, rng),
                pi_bb,
                b_filter: None,
            }
        })
        .collect();
    ControlResources::new(
        n,
        dim_a,
        dim_b,
        Ancilla::Schmidt(mu),
        outcomes,
        &Tolerances::default(),
    )
    .expect("randomly generated resources are valid")
}
