//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use chanforge::channels::{
    bell_projector, choi_of, max_entangled_projector, swap_gate, Channel, ChannelFamily,
};
use chanforge::cli::{demo_scenario, run_scenario, Overrides};
use chanforge::complexity::{channel_complexity, complexity};
use chanforge::control::{
    apply_lambda, check_resource_relations, lambda_map, modified_channel, trace_character,
    Ancilla, ControlResources, OutcomeOps, TraceCharacter,
};
use chanforge::krausmin::{minimal_count, reduce, upper_bound, KrausSet};
use chanforge::linalg::{numerical_rank, Complex64, ComplexMatrix, PureState, Tolerances};
use chanforge::protocols::{bitflip_correction, p_mu, phase_flip_code_demo, qt_channel, qt_resources};
use chanforge::random::{
    haar_random_channel, haar_random_unitary, random_product_ancilla_resources, random_resources,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pass(line: &str) {
    println!("criterion {line}: PASS");
}

#[test]
fn criterion_1_complexity_table() {
    let start = Instant::now();
    let t = tol();
    assert_eq!(t.eps_rank, 1e-10);

    let single = |ch: Channel| ChannelFamily::new(vec![ch]).unwrap();
    let pair = |a: Channel, b: Channel| ChannelFamily::new(vec![a, b]).unwrap();

    let cases: Vec<(&str, ChannelFamily, usize)> = vec![
        ("identity", single(Channel::identity(2)), 0),
        ("bit_flip", single(Channel::bit_flip(0.3).unwrap()), 2),
        ("phase_flip", single(Channel::phase_flip(0.2).unwrap()), 2),
        ("amplitude_damping", single(Channel::amplitude_damping(0.3).unwrap()), 2),
        ("phase_damping", single(Channel::phase_damping(0.4).unwrap()), 2),
        ("depolarizing", single(Channel::depolarizing(0.5).unwrap()), 4),
        (
            "{bit_flip, phase_flip}",
            pair(Channel::bit_flip(0.3).unwrap(), Channel::phase_flip(0.2).unwrap()),
            3,
        ),
        (
            "{depolarizing, phase_flip}",
            pair(Channel::depolarizing(0.5).unwrap(), Channel::phase_flip(0.2).unwrap()),
            4,
        ),
        (
            "{bit_flip, amplitude_damping}",
            pair(Channel::bit_flip(0.3).unwrap(), Channel::amplitude_damping(0.3).unwrap()),
            4,
        ),
    ];
    for (name, family, want) in &cases {
        let chi = complexity(family, &t).unwrap();
        assert_eq!(chi, *want, "{name}: complexity {chi} != {want}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(&format!("1 (complexity table, 9 exact values, {elapsed:?})"));
}

#[test]
fn criterion_2_teleportation_identity() {
    let start = Instant::now();
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    for n in [2usize, 3] {
        let uniform = vec![1.0 / (n as f64).sqrt(); n];
        let res = qt_resources(n, &uniform, &t).unwrap();
        let lm = lambda_map(&res).unwrap();
        let psi0 = max_entangled_projector(n);

        let character = trace_character(&lm, &t).unwrap();
        assert_eq!(
            character.character,
            TraceCharacter::Preserving,
            "N = {n}: identity deviation {}",
            character.identity_deviation
        );

        for trial in 0..20 {
            let ch = haar_random_channel(n, n * n, &mut rng);
            let corrected = apply_lambda(&lm, &choi_of(&ch)).unwrap();
            let dev = corrected.matrix().max_abs_diff(&psi0);
            assert!(dev <= 1e-10, "N = {n} trial {trial}: deviation {dev}");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(&format!("2 (teleportation identity, N in {{2,3}} x 20 channels, {elapsed:?})"));
}

#[test]
fn criterion_3_partial_entanglement_teleportation() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // closed form vs end-to-end simulation, 50 random Schmidt vectors
    for trial in 0..50 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mu: Vec<f64> = raw.iter().map(|x| x / norm).collect();

        let closed = qt_channel(&mu).unwrap();
        let res = qt_resources(n, &mu, &t).unwrap();
        let physical = haar_random_channel(n, 2, &mut rng);
        let simulated = modified_channel(&physical, &res).unwrap();
        let dev = choi_of(&closed).matrix().max_abs_diff(choi_of(&simulated).matrix());
        assert!(dev <= 1e-10, "trial {trial} (N = {n}): deviation {dev}");

        let chi = channel_complexity(&closed, &t).unwrap();
        assert!(chi <= n, "trial {trial}: complexity {chi} > {n}");
    }

    // qubit case: the measured phase-flip probability equals p_mu
    for trial in 0..50 {
        let mu0: f64 = rng.gen();
        let mu = [mu0, (1.0 - mu0 * mu0).sqrt()];
        let choi = choi_of(&qt_channel(&mu).unwrap());
        // weight of the phase-flipped Bell state in the Choi decomposition
        let psi2 = bell_projector(2, 2).unwrap();
        let measured = choi
            .matrix()
            .entries()
            .iter()
            .zip(psi2.entries())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>();
        let want = p_mu(mu0).unwrap();
        assert!(
            (measured - want).abs() <= 1e-12,
            "trial {trial}: measured {measured} vs p_mu {want}"
        );
    }
    pass("3 (partial-entanglement teleportation, 50 + 50 trials)");
}

#[test]
fn criterion_4_bitflip_correction_grid() {
    let t = tol();
    let psi0 = max_entangled_projector(2);
    let grid_mu = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, std::f64::consts::FRAC_1_SQRT_2];
    let grid_p = [0.0, 0.25, 0.5, 1.0];

    for &mu in &grid_mu {
        for &p in &grid_p {
            let outcome = bitflip_correction(mu, p, &t).unwrap();
            assert!(
                (outcome.success_prob - 2.0 * mu * mu).abs() <= 1e-12,
                "mu = {mu}, p = {p}: success {}",
                outcome.success_prob
            );
            let normalized = outcome.choi_after.matrix().scaled_re(1.0 / (2.0 * mu * mu));
            let dev = normalized.max_abs_diff(&psi0);
            assert!(dev <= 1e-10, "mu = {mu}, p = {p}: Choi deviation {dev}");
        }

        // the four nonzero map operators match their closed forms entrywise
        let res = chanforge::protocols::bitflip_resources(mu, &t).unwrap();
        let lm = lambda_map(&res).unwrap();
        let mut diag = ComplexMatrix::zeros(4, 4);
        diag.set(0, 0, re(mu));
        diag.set(3, 3, re(mu));
        let mut anti = ComplexMatrix::zeros(4, 4);
        anti.set(0, 2, re(mu));
        anti.set(3, 1, re(mu));
        for lk in lm.kraus() {
            let want = match (lk.eta, lk.k, lk.l) {
                (0, 0, 0) => Some(&diag),
                (1, 1, 0) => Some(&anti),
                (2, 0, 1) => Some(&anti),
                (3, 1, 1) => Some(&diag),
                _ => None,
            };
            match want {
                Some(w) => assert!(
                    lk.op.max_abs_diff(w) <= 1e-12,
                    "mu = {mu}: operator ({}, {}, {})",
                    lk.eta,
                    lk.k,
                    lk.l
                ),
                None => assert!(lk.op.max_abs() <= 1e-12, "mu = {mu}: extra operator"),
            }
        }
    }
    pass("4 (bit-flip correction over the mu/p grid + closed-form operators)");
}

#[test]
fn criterion_5_trace_relations() {
    let t = tol();

    // swap/projector construction: S = dim(H_a) I^B (x) diag(mu_i^2), with an
    // eigenvalue above one for non-uniform mu
    let n = 2usize;
    let mu = [0.8, 0.6];
    let mut outcomes = Vec::new();
    for eta in 0..n {
        let mut pi = ComplexMatrix::zeros(n * n, n * n);
        for s in 0..n {
            pi.set(eta * n + s, eta * n + s, re(1.0));
        }
        outcomes.push(OutcomeOps {
            u_aa: swap_gate(n),
            pi_aa: pi,
            u_bb: ComplexMatrix::identity(n * n),
            pi_bb: ComplexMatrix::identity(n * n),
            b_filter: None,
        });
    }
    let res =
        ControlResources::new(n, n, n, Ancilla::Schmidt(mu.to_vec()), outcomes, &t).unwrap();
    let report = trace_character(&lambda_map(&res).unwrap(), &t).unwrap();
    let mut want = ComplexMatrix::zeros(n * n, n * n);
    for b in 0..n {
        for i in 0..n {
            want.set(b * n + i, b * n + i, re(n as f64 * mu[i] * mu[i]));
        }
    }
    assert!(report.kraus_sum.max_abs_diff(&want) <= 1e-12);
    assert!(report.max_eigenvalue > 1.0 + 1e-9);
    assert_eq!(report.character, TraceCharacter::Increasing);

    // product-ancilla bound: max eigenvalue of S stays below dim(H_a)
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..100 {
        let res = random_product_ancilla_resources(2, &mut rng);
        let report = trace_character(&lambda_map(&res).unwrap(), &t).unwrap();
        assert!(
            report.max_eigenvalue <= res.dim_a() as f64 + 1e-9,
            "trial {trial}: {} > dim_a = {}",
            report.max_eigenvalue,
            res.dim_a()
        );
    }

    // bistochastic sender: trace-preserving regardless of the entanglement
    for trial in 0..20 {
        let d = 2usize;
        let mut u_aa = ComplexMatrix::zeros(2 * d, 2 * d);
        for m in 0..d {
            let q = haar_random_unitary(2, &mut rng);
            for x in 0..2 {
                for y in 0..2 {
                    u_aa.set(x * d + m, y * d + m, q.get(x, y));
                }
            }
        }
        let mut ops = OutcomeOps::trivial(2, d, d);
        ops.u_aa = u_aa;
        ops.u_bb = haar_random_unitary(2 * d, &mut rng);
        let raw: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.05).collect();
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mu: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let res = ControlResources::new(2, d, d, Ancilla::Schmidt(mu), vec![ops], &t).unwrap();

        let relations = check_resource_relations(&res, &t).unwrap();
        assert!(relations.bistochastic_columns.passes, "trial {trial}");
        let report = trace_character(&lambda_map(&res).unwrap(), &t).unwrap();
        assert_eq!(report.character, TraceCharacter::Preserving, "trial {trial}");
    }
    pass("5 (trace relations: swap witness, 100 product-ancilla bounds, 20 bistochastic)");
}

#[test]
fn criterion_6_commutation_square() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for trial in 0..50 {
        let res = random_resources(2, &mut rng);
        let ch = haar_random_channel(2, rng.gen_range(1..=4), &mut rng);
        let left = choi_of(&modified_channel(&ch, &res).unwrap());
        let right = apply_lambda(&lambda_map(&res).unwrap(), &choi_of(&ch)).unwrap();
        let dev = left.matrix().max_abs_diff(right.matrix());
        assert!(dev <= 1e-9, "trial {trial}: routes differ by {dev}");
    }
    let _ = t;
    pass("6 (commutation square over 50 random channel/resource pairs)");
}

#[test]
fn criterion_7_kraus_minimization() {
    let t = tol();
    assert_eq!(upper_bound(2, 2).unwrap(), 10);

    // reduce() recovers the Choi rank on 50 redundant sets
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..50 {
        let dim = 2usize;
        let k_true = rng.gen_range(1..=3);
        let total = k_true + rng.gen_range(2..=5);
        let independents: Vec<ComplexMatrix> = (0..k_true)
            .map(|i| haar_random_unitary(dim, &mut rng).scaled_re(1.0 / (i + 1) as f64))
            .collect();
        let mixer = haar_random_unitary(total, &mut rng);
        let ops: Vec<ComplexMatrix> = (0..total)
            .map(|i| {
                let mut op = ComplexMatrix::zeros(dim, dim);
                for (j, ind) in independents.iter().enumerate() {
                    op = op.add(&ind.scaled(mixer.get(i, j)));
                }
                op
            })
            .collect();
        let set = KrausSet::new(ops).unwrap();
        let reduced = reduce(&set, &t).unwrap();
        let rank = numerical_rank(set.choi().matrix(), &t).unwrap();
        assert_eq!(reduced.len(), rank, "trial {trial}");
        assert!(reduced.choi().matrix().max_abs_diff(set.choi().matrix()) <= 1e-9);
    }

    // constrained maps: R <= count <= N^4 - R (N^2 - 1) for N = 2
    for r in 1..=4usize {
        let (set, _) = constrained_map(r, 4 * (4 - r) + 3, &mut rng);
        let count = minimal_count(&set, &t).unwrap();
        let bound = upper_bound(2, r).unwrap();
        assert!(count >= r, "R = {r}: count {count}");
        assert!(count <= bound, "R = {r}: count {count} > {bound}");
    }
    pass("7 (reduction to Choi rank x50, constrained-map bounds, upper_bound(2,2) = 10)");
}

/// Operators fixing an R-dimensional support (delta transitions to the
/// maximally entangled state) plus random operators supported off it.
fn constrained_map<R: Rng>(r: usize, extra: usize, rng: &mut R) -> (KrausSet, Vec<Vec<Complex64>>) {
    let d = 4usize;
    let psi0 = chanforge::channels::max_entangled_state(2);
    let frame = haar_random_unitary(d, rng);
    let support: Vec<Vec<Complex64>> = (0..r).map(|j| frame.column(j)).collect();

    let mut prime: Vec<Vec<Complex64>> = vec![psi0.amplitudes().to_vec()];
    for i in 0..d {
        if prime.len() == d {
            break;
        }
        let mut v: Vec<Complex64> = (0..d).map(|k| re(if k == i { 1.0 } else { 0.0 })).collect();
        for _ in 0..2 {
            for e in &prime {
                let ip: Complex64 = e.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (slot, a) in v.iter_mut().zip(e.iter()) {
                    *slot -= ip * a;
                }
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            prime.push(v.into_iter().map(|z| z / norm).collect());
        }
    }

    let mut ops = Vec::new();
    for j in 0..r + extra {
        let mut op = ComplexMatrix::zeros(d, d);
        let row_start = if j < r {
            op = op.add(&chanforge::linalg::outer(&prime[0], &support[j]));
            1
        } else {
            0
        };
        for col in r..d {
            let src = frame.column(col);
            for row in row_start..d {
                let w = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                op = op.add(&chanforge::linalg::outer(&prime[row], &src).scaled(w));
            }
        }
        ops.push(op);
    }
    (KrausSet::new(ops).unwrap(), support)
}

#[test]
fn criterion_8_code_demo() {
    let input = PureState::normalized(vec![re(1.0), Complex64::new(0.0, 1.0)]).unwrap();
    // grid straddling the crossover at p = 1/2
    for p in [0.05, 0.1, 0.25, 0.4, 0.49, 0.5, 0.6, 0.75, 0.9] {
        let report = phase_flip_code_demo(&Channel::phase_flip(p).unwrap(), p, &input).unwrap();
        let formula = 3.0 * p * p - 2.0 * p * p * p;
        assert!(
            (report.enumeration_error_prob - formula).abs() <= 1e-12,
            "p = {p}: enumeration {}",
            report.enumeration_error_prob
        );
        assert!(
            (report.logical_error_prob - formula).abs() <= 1e-12,
            "p = {p}: simulated {}",
            report.logical_error_prob
        );
        assert_eq!(report.coding_improves, p < 0.5, "p = {p}");
    }
    pass("8 (3-qubit code: logical error = 3p^2 - 2p^3, crossover at p = 1/2)");
}

#[test]
fn criterion_9_deterministic_reports() {
    for name in [
        "complexity-table",
        "qt-identity",
        "qt-sweep",
        "bitflip-correction",
        "theorem1",
    ] {
        let scenario = demo_scenario(name).unwrap();
        let first =
            serde_json::to_string(&run_scenario(&scenario, &Overrides::default()).unwrap()).unwrap();
        let second =
            serde_json::to_string(&run_scenario(&scenario, &Overrides::default()).unwrap()).unwrap();
        assert_eq!(first.into_bytes(), second.into_bytes(), "demo {name}");
    }
    pass("9 (byte-identical reports across repeated runs)");
}
