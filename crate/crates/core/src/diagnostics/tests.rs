use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::num::{c, C};
use crate::qcore::{build_ising, eigensystem, kron, max_abs_diff, propagator, CMatrix, DensityMatrix};
use crate::reservoir::{qr_step, HqrSpec, QrConfig};
use crate::seeds::rng_from;
use crate::series::Series;
use crate::tasks::uniform_inputs;

fn small_spec() -> HqrSpec {
    HqrSpec::new(2, 3, 2, 1.0, 1.0, 0.4)
}

#[test]
fn qesp_is_zero_for_identical_initial_states() {
    let sys = small_spec().build::<f64>(3).unwrap();
    let inputs = Series::from_scalars(&uniform_inputs::<f64>(60, 1));
    let cfg = QespConfig { washout: 20, eval: 30, trials: 3 };
    let same: Vec<Vec<DensityMatrix<f64>>> =
        (0..3).map(|_| (0..2).map(|l| sys.config(l).initial_state().clone()).collect()).collect();
    let r = qesp_index_with_states(&sys, &inputs, &cfg, &same).unwrap();
    assert_eq!(r.mu, 0.0);
    assert!(r.per_trial.iter().all(|&d| d == 0.0));

    let random = qesp_index(&sys, &inputs, &cfg, 5).unwrap();
    assert!(random.mu >= 0.0);
    assert_eq!(random, qesp_index(&sys, &inputs, &cfg, 5).unwrap());
}

#[test]
fn qesp_rejects_bad_config_and_short_input() {
    let sys = small_spec().build::<f64>(3).unwrap();
    let inputs = Series::from_scalars(&uniform_inputs::<f64>(10, 1));
    assert!(qesp_index(&sys, &inputs, &QespConfig { washout: 0, eval: 5, trials: 1 }, 1).is_err());
    assert!(qesp_index(&sys, &inputs, &QespConfig { washout: 8, eval: 5, trials: 1 }, 1).is_err());
}

fn quick_splits() -> MemorySplits {
    MemorySplits { washout: 30, train: 400, eval: 200 }
}

#[test]
fn memory_function_is_a_squared_correlation() {
    let mut sys = small_spec().build::<f64>(4).unwrap();
    let delays: Vec<usize> = (0..=30).collect();
    let mf = memory_profile(&mut sys, &delays, quick_splits(), 9, 1e-8).unwrap();
    assert!(mf.iter().all(|v| (0.0..=1.0).contains(v)), "{mf:?}");
    // The current input is almost perfectly linearly recoverable.
    assert!(mf[0] > 0.5, "{}", mf[0]);
    let again = memory_profile(&mut sys, &delays, quick_splits(), 9, 1e-8).unwrap();
    assert_eq!(mf, again);
    let single = memory_function(&mut sys, 3, quick_splits(), 9, 1e-8).unwrap();
    assert!((single - mf[3]).abs() < 1e-10);
    assert!(memory_profile(&mut sys, &[31], quick_splits(), 9, 1e-8).is_err());
}

#[test]
fn memory_capacity_is_bounded_and_monotone() {
    let spec = HqrSpec::new(2, 2, 1, 1.0, 1.0, 0.3);
    let small = memory_capacity(&spec, 5, 2, 7, quick_splits(), 1e-8).unwrap();
    let large = memory_capacity(&spec, 6, 2, 7, quick_splits(), 1e-8).unwrap();
    assert!(small.mean <= 6.0);
    assert!(large.mean >= small.mean);
    assert_eq!(small.mf_mean[..], large.mf_mean[..6]);
    assert_eq!(small, memory_capacity(&spec, 5, 2, 7, quick_splits(), 1e-8).unwrap());
}

fn column_stack(m: &CMatrix<f64>) -> Vec<C<f64>> {
    m.iter().copied().collect()
}

#[test]
fn superoperator_reproduces_a_direct_step() {
    let h = build_ising::<f64>(3, 1.0, 11);
    let l = superoperator(&h, 0.3, 0.7).unwrap();
    let m = l.matrix();
    let cfg = QrConfig::new(h, 1, 0.7, None).unwrap();
    let rho = DensityMatrix::<f64>::ginibre(3, &mut rng_from(2));
    let (next, _) = qr_step(&rho, 0.3, &cfg).unwrap();
    let image = &m * nalgebra::DVector::from_vec(column_stack(rho.matrix()));
    let direct = column_stack(next.matrix());
    let err = image.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
    assert!(superoperator(&build_ising::<f64>(3, 1.0, 1), 1.5, 1.0).is_err());
}

#[test]
fn trace_row_is_a_left_fixed_vector() {
    let h = build_ising::<f64>(2, 1.0, 3);
    let m = superoperator(&h, 0.8, 2.0).unwrap().matrix();
    let d = 4;
    let trace_row = DMatrix::from_fn(1, d * d, |_, k| if k % d == k / d { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let left = &trace_row * &m;
    assert!(max_abs_diff(&left, &trace_row) < 1e-12);
}

/// Superoperator assembled from Kronecker identities: `vec(A X B) = (B^T (x) A) vec(X)`.
fn kronecker_superoperator(u_step: &CMatrix<f64>, input: f64) -> CMatrix<f64> {
    let d = u_step.nrows();
    let h = d / 2;
    let one = c(1.0, 0.0);
    let ket = |b: usize| DMatrix::from_fn(2, 1, |i, _| if i == b { one } else { c(0.0, 0.0) });
    let eye = CMatrix::<f64>::identity(h, h);
    let mut discard = CMatrix::zeros(h * h, d * d);
    let mut inject = CMatrix::zeros(d * d, h * h);
    for b in 0..2 {
        let p = kron(&ket(b), &eye);
        let k = p.transpose();
        discard += kron(&k, &k);
        let w = if b == 0 { 1.0 - input } else { input };
        inject += kron(&p, &p) * c(w, 0.0);
    }
    let conj = u_step.map(|z| z.conj());
    kron(&conj, u_step) * inject * discard
}

fn sorted_real_embedding_magnitudes(m: &CMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let real = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut mags: Vec<f64> = real.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mags
}

#[test]
fn two_qubit_gap_matches_kronecker_assembly() {
    let h = build_ising::<f64>(2, 1.0, 21);
    let l = superoperator(&h, 0.5, 1.0).unwrap();
    let u_step = propagator(&eigensystem(&h), 1.0).matrix().clone();
    let oracle = kronecker_superoperator(&u_step, 0.5);
    assert!(max_abs_diff(&oracle, &l.matrix()) < 1e-12);

    // The real embedding doubles each eigenvalue, so |lambda_2| sits at index 2.
    let mags = sorted_real_embedding_magnitudes(&oracle);
    let spec = cptp_spectrum(&l).unwrap();
    assert!((spec.lambda2_abs() - mags[2]).abs() < 1e-10, "{} vs {}", spec.lambda2_abs(), mags[2]);
    assert!((spec.lambda1().norm() - 1.0).abs() < 1e-10);
    assert_eq!(spec.full_eigenvalues().len(), 16);
    let mut full: Vec<f64> = spec.full_eigenvalues().iter().map(|z| z.norm()).collect();
    full.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (i, f) in full.iter().enumerate() {
        assert!((f - mags[2 * i]).abs() < 1e-9);
    }
}

#[test]
fn fixed_point_is_a_state_left_invariant() {
    for (n, u, tau, seed) in [(2, 0.0, 0.5, 1u64), (3, 0.7, 2.0, 2), (4, 1.0, 8.0, 3), (4, 0.4, 0.01, 4)] {
        let h = build_ising::<f64>(n, 1.0, seed);
        let l = superoperator(&h, u, tau).unwrap();
        let s = cptp_spectrum(&l).unwrap();
        assert!((s.lambda1().norm() - 1.0).abs() < 1e-8);
        assert!(s.eigenvalues.iter().all(|z| z.norm() <= 1.0 + 1e-8));
        s.fixed_point.check_with(1e-9).unwrap();
        let image = l.apply(s.fixed_point.matrix());
        assert!(max_abs_diff(&image, s.fixed_point.matrix()) < 1e-8);
        assert!(s.inv_lambda2 >= 1.0);
    }
}

#[test]
fn zero_hamiltonian_keeps_the_memory_qubits() {
    // Without dynamics the marginal is untouched: every eigenvalue is 1 and the fixed
    // point is not unique, so the fallback reports the one reached from the mixed state.
    let h = build_ising::<f64>(2, 0.0, 1);
    let s = cptp_spectrum(&superoperator(&h, 0.3, 1.0).unwrap()).unwrap();
    assert!(s.eigenvalues.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    assert!((s.inv_lambda2 - 1.0).abs() < 1e-12);
    s.fixed_point.check_with(1e-9).unwrap();
    let expect = kron(&crate::qcore::input_spin_state(0.3), &CMatrix::identity(2, 2).map(|z| z * 0.5));
    assert!(max_abs_diff(s.fixed_point.matrix(), &expect) < 1e-12);
}

/// Distance to the fixed point after `steps` constant-input steps from a fixed random state.
fn convergence_distance(n: usize, u: f64, tau: f64, seed: u64, steps: usize) -> f64 {
    let h = build_ising::<f64>(n, 1.0, seed);
    let l = superoperator(&h, u, tau).unwrap();
    let fixed = cptp_spectrum(&l).unwrap().fixed_point;
    let mut rho = DensityMatrix::<f64>::ginibre(n, &mut rng_from(seed + 100)).into_matrix();
    for _ in 0..steps {
        rho = l.apply(&rho);
    }
    (rho - fixed.matrix()).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn superoperator_maps_states_to_states(u in 0.0f64..=1.0, tau in 0.05f64..8.0, seed in 0u64..1000) {
        let h = build_ising::<f64>(3, 1.0, seed);
        let l = superoperator(&h, u, tau).unwrap();
        let rho = DensityMatrix::<f64>::ginibre(3, &mut rng_from(seed));
        let image = DensityMatrix::from_matrix(l.apply(rho.matrix())).unwrap();
        image.check_with(1e-9).unwrap();
    }

    #[test]
    fn larger_inverse_gap_converges_faster(u in 0.0f64..=1.0, fast_exp in 0i32..=3, seed in 0u64..1000) {
        let n = 3;
        let steps = 200;
        let gap = |tau: f64| cptp_spectrum(&superoperator(&build_ising::<f64>(n, 1.0, seed), u, tau).unwrap()).unwrap().inv_lambda2;
        let (fast, slow) = (2f64.powi(fast_exp), 1.0 / 128.0);
        // Predicted contraction ratio over the run, (|l2_slow| / |l2_fast|)^steps.
        let predicted = (gap(fast).ln() - gap(slow).ln()) * steps as f64;
        prop_assume!(predicted >= 10f64.ln());
        let d_fast = convergence_distance(n, u, fast, seed, steps);
        let d_slow = convergence_distance(n, u, slow, seed, steps);
        prop_assert!(d_fast <= d_slow, "{} vs {}", d_fast, d_slow);
    }

    #[test]
    fn qesp_is_nonnegative(seed in 0u64..200) {
        let sys = HqrSpec::new(2, 2, 1, 1.0, 1.0, 0.5).build::<f64>(seed).unwrap();
        let inputs = Series::from_scalars(&uniform_inputs::<f64>(30, seed));
        let r = qesp_index(&sys, &inputs, &QespConfig { washout: 10, eval: 20, trials: 2 }, seed).unwrap();
        prop_assert!(r.mu >= 0.0 && r.per_trial.iter().all(|&d| d >= 0.0));
    }
}
