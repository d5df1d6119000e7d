use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::qcore::{build_ising, max_abs_diff, measure_z, DensityMatrix, IsingHamiltonian};
use crate::series::Series;

/// Plain-loop complex arithmetic, independent of nalgebra.
mod oracle {
    pub type Cx = (f64, f64);
    pub type Mat = Vec<Vec<Cx>>;

    fn mul(a: Cx, b: Cx) -> Cx {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    pub fn zeros(n: usize) -> Mat {
        vec![vec![(0.0, 0.0); n]; n]
    }

    pub fn matmul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let mut c = zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = (0.0, 0.0);
                for k in 0..n {
                    let p = mul(a[i][k], b[k][j]);
                    s.0 += p.0;
                    s.1 += p.1;
                }
                c[i][j] = s;
            }
        }
        c
    }

    pub fn dagger(a: &Mat) -> Mat {
        let n = a.len();
        let mut c = zeros(n);
        for i in 0..n {
            for j in 0..n {
                c[i][j] = (a[j][i].0, -a[j][i].1);
            }
        }
        c
    }

    /// Ising Hamiltonian by bit manipulation: X_i X_j flips bits, Z_j is a sign.
    pub fn hamiltonian(n: usize, j: f64, pairs: &[(usize, usize, f64)], fields: &[f64]) -> Mat {
        let d = 1 << n;
        let mut h = zeros(d);
        let bit = |s: usize| 1usize << (n - s);
        for r in 0..d {
            for &(a, b, w) in pairs {
                let col = r ^ bit(a) ^ bit(b);
                h[r][col].0 += j * w;
            }
            for (s, &g) in fields.iter().enumerate() {
                let sign = if r & bit(s + 1) == 0 { 1.0 } else { -1.0 };
                h[r][r].0 += j * g * sign;
            }
        }
        h
    }

    /// exp(-i H t) by scaling and squaring a truncated Taylor series.
    pub fn expm(h: &Mat, t: f64) -> Mat {
        let n = h.len();
        let norm: f64 = h.iter().map(|r| r.iter().map(|z| z.0.abs() + z.1.abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut squarings = 0;
        let mut s = t.abs() * norm;
        while s > 0.1 {
            s /= 2.0;
            squarings += 1;
        }
        let scale = t / f64::from(1u32 << squarings);
        // A = -i H scale
        let a: Mat = h.iter().map(|r| r.iter().map(|z| (z.1 * scale, -z.0 * scale)).collect()).collect();
        let mut result = zeros(n);
        let mut term = zeros(n);
        for i in 0..n {
            result[i][i] = (1.0, 0.0);
            term[i][i] = (1.0, 0.0);
        }
        for k in 1..30 {
            term = matmul(&term, &a);
            for row in term.iter_mut() {
                for z in row.iter_mut() {
                    z.0 /= k as f64;
                    z.1 /= k as f64;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    result[i][j].0 += term[i][j].0;
                    result[i][j].1 += term[i][j].1;
                }
            }
        }
        for _ in 0..squarings {
            result = matmul(&result, &result);
        }
        result
    }

    /// One step of the reference channel, returning the new state and signals (qubit-major).
    pub fn step(rho: &Mat, u: f64, sub: &Mat, n: usize, v_count: usize) -> (Mat, Vec<f64>) {
        let d = rho.len();
        let h = d / 2;
        let mut next = zeros(d);
        for a in 0..h {
            for b in 0..h {
                let m = (rho[a][b].0 + rho[h + a][h + b].0, rho[a][b].1 + rho[h + a][h + b].1);
                next[a][b] = (m.0 * (1.0 - u), m.1 * (1.0 - u));
                next[h + a][h + b] = (m.0 * u, m.1 * u);
            }
        }
        let sub_dag = dagger(sub);
        let mut z = vec![0.0; n * v_count];
        for v in 0..v_count {
            next = matmul(&matmul(sub, &next), &sub_dag);
            for j in 0..n {
                let mut e = 0.0;
                for r in 0..d {
                    let sign = if r & (1 << (n - 1 - j)) == 0 { 1.0 } else { -1.0 };
                    e += sign * next[r][r].0;
                }
                z[j * v_count + v] = (1.0 + e) / 2.0;
            }
        }
        (next, z)
    }
}

fn ham_terms(h: &IsingHamiltonian<f64>) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let n = h.n_qubits();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a + 1, b + 1, h.pair_couplings()[(a, b)]));
        }
    }
    (pairs, h.fields().to_vec())
}

fn single(n: usize, v: usize, tau: f64, seed: u64) -> HqrSystem<f64> {
    let h = build_ising(n, 1.0, seed);
    let cfg = QrConfig::new(h, v, tau, None).unwrap();
    let blocks = [cfg.n_signals()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = generate_couplings(1, &blocks, Topology::Mutual, 0.0, &mut rng).unwrap();
    HqrSystem::new(vec![cfg], c).unwrap()
}

#[test]
fn kernel_matches_dense_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(n, v) in &[(1, 1), (2, 3), (3, 1), (4, 2), (5, 1)] {
        let h = build_ising(n, 1.3, 40 + n as u64);
        let rho0 = DensityMatrix::ginibre(n, &mut rng);
        let cfg = QrConfig::new(h, v, 0.7, Some(rho0.clone())).unwrap();
        let c = generate_couplings(1, &[cfg.n_signals()], Topology::Mutual, 0.0, &mut rng).unwrap();
        let mut sys = HqrSystem::new(vec![cfg.clone()], c).unwrap();
        let mut rho = rho0;
        for k in 0..25 {
            let u = ((k * 7) % 11) as f64 / 10.0;
            let (next, z_dense) = qr_step(&rho, u, &cfg).unwrap();
            let z_fast = sys.step(&[u]).unwrap().to_vec();
            for (a, b) in z_dense.iter().zip(&z_fast) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
            rho = next;
        }
        let diff = max_abs_diff(sys.density(0).matrix(), rho.matrix());
        assert!(diff < 1e-12, "n={n} v={v}: density drift {diff}");
    }
}

#[test]
fn two_qubit_trajectory_matches_independent_oracle() {
    let h = build_ising(2, 1.0, 5);
    let (pairs, fields) = ham_terms(&h);
    let tau = 1.0;
    let v_count = 2;
    let hm = oracle::hamiltonian(2, 1.0, &pairs, &fields);
    let sub = oracle::expm(&hm, tau / v_count as f64);
    let mut rho = oracle::zeros(4);
    for i in 0..4 {
        rho[i][i] = (0.25, 0.0);
    }
    let mut sys = single(2, v_count, tau, 5);
    for k in 0..50 {
        let u = (k as f64 * 0.37).fract();
        let (next, z_ref) = oracle::step(&rho, u, &sub, 2, v_count);
        let z = sys.step(&[u]).unwrap();
        for (a, b) in z_ref.iter().zip(z) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        rho = next;
    }
}

#[test]
fn single_substep_reduces_to_one_channel_application() {
    let h = build_ising(3, 1.0, 2);
    let cfg = QrConfig::new(h, 1, 2.0, None).unwrap();
    let rho = DensityMatrix::maximally_mixed(3);
    let (next, z) = qr_step(&rho, 0.4, &cfg).unwrap();
    assert_eq!(z.len(), 3);
    let injected = crate::qcore::inject_input(&rho, 0.4).unwrap();
    let direct = crate::qcore::evolve(&injected, cfg.substep_propagator()).unwrap();
    assert!(max_abs_diff(next.matrix(), direct.matrix()) < 1e-14);
    for j in 1..=3 {
        assert_abs_diff_eq!(z[j - 1], (1.0 + measure_z(&next, j).unwrap()) / 2.0, epsilon = 1e-14);
    }
}

#[test]
fn zero_hamiltonian_is_pure_injection() {
    let h = IsingHamiltonian::<f64>::from_coefficients(3, 1.0, &DMatrix::zeros(3, 3), &[0.0; 3]).unwrap();
    let cfg = QrConfig::new(h, 4, 1.0, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = DensityMatrix::ginibre(3, &mut rng);
    let (next, z) = qr_step(&rho, 0.3, &cfg).unwrap();
    let injected = crate::qcore::inject_input(&rho, 0.3).unwrap();
    assert!(max_abs_diff(next.matrix(), injected.matrix()) < 1e-14);
    for j in 1..=3 {
        let first = z[signal_index(j, 1, 4)];
        for v in 2..=4 {
            assert_abs_diff_eq!(z[signal_index(j, v, 4)], first, epsilon = 1e-14);
        }
    }
    assert_abs_diff_eq!(z[signal_index(1, 1, 4)], 0.7, epsilon = 1e-14);
}

#[test]
fn signal_index_roundtrip() {
    for v_count in 1..6 {
        for i in 0..5 * v_count {
            let (j, v) = signal_site(i, v_count);
            assert_eq!(signal_index(j, v, v_count), i);
        }
    }
}

#[test]
fn coupling_constraints() {
    let blocks = [3; 5];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = generate_couplings::<f64, _>(1, &blocks, Topology::Mutual, 0.5, &mut rng).unwrap();
    assert!(c.w_in.iter().all(|&x| x == 1.0));
    for l in 0..5 {
        let row = c.w_con.row(l);
        assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
        assert!(row.iter().all(|&x| x >= 0.0));
        for col in 3 * l..3 * l + 3 {
            assert_eq!(row[col], 0.0);
        }
    }

    let f = generate_couplings::<f64, _>(1, &[2; 3], Topology::Forward, 0.5, &mut rng).unwrap();
    assert_eq!(f.w_con.row(0).sum(), 0.0);
    for l in 1..3 {
        for col in 0..6 {
            let inside = col / 2 == l - 1;
            assert_eq!(f.w_con[(l, col)] > 0.0, inside, "row {l} col {col}");
        }
    }

    let multi = generate_couplings::<f64, _>(3, &[2; 2], Topology::Mutual, 0.2, &mut rng).unwrap();
    for l in 0..2 {
        assert_abs_diff_eq!(multi.w_in.row(l).sum(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn single_reservoir_forbids_feedback() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = generate_couplings::<f64, _>(1, &[5], Topology::Mutual, 0.0, &mut rng).unwrap();
    assert_eq!(c.w_con.shape(), (1, 5));
    assert!(c.w_con.iter().all(|&x| x == 0.0));
    assert!(generate_couplings::<f64, _>(1, &[5], Topology::Mutual, 0.3, &mut rng).is_err());
    assert!(generate_couplings::<f64, _>(1, &[5; 3], Topology::None, 0.3, &mut rng).is_err());
}

#[test]
fn mix_input_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut c = generate_couplings::<f64, _>(1, &[2; 3], Topology::Mutual, 0.0, &mut rng).unwrap();
    let z = [0.1, 0.9, 0.3, 0.4, 0.8, 0.2];
    assert_eq!(mix_input(&[0.6], &z, &c), vec![0.6; 3]);
    c.alpha = 1.0;
    let fb = mix_input(&[0.6], &z, &c);
    for l in 0..3 {
        let expect: f64 = (0..6).map(|i| c.w_con[(l, i)] * z[i]).sum();
        assert_abs_diff_eq!(fb[l], expect, epsilon = 1e-15);
    }
    c.alpha = 0.4;
    assert_eq!(mix_input(&[0.0], &[0.0; 6], &c), vec![0.0; 3]);
}

#[test]
fn ensemble_without_feedback_factorizes() {
    let spec = HqrSpec::new(3, 3, 2, 1.5, 1.0, 0.0);
    let mut sys = spec.build::<f64>(77).unwrap();
    let inputs: Vec<f64> = (0..40).map(|k| (k as f64 * 0.61).fract()).collect();
    let joint = run_sequence(&mut sys, &Series::from_scalars(&inputs), 0).unwrap();
    for l in 0..3 {
        let cfg = spec.reservoir::<f64>(77, l).unwrap();
        let c = generate_couplings(1, &[cfg.n_signals()], Topology::Mutual, 0.0, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        let mut alone = HqrSystem::new(vec![cfg], c).unwrap();
        let iso = run_sequence(&mut alone, &Series::from_scalars(&inputs), 0).unwrap();
        let range = sys.block(l);
        for k in 0..inputs.len() {
            assert_eq!(&joint.row(k)[range.clone()], iso.row(k));
        }
    }
}

#[test]
fn equal_seeds_give_bitwise_equal_signals() {
    let spec = HqrSpec::new(5, 4, 1, 1.0, 1.0, 0.7);
    let inputs = Series::from_scalars(&(0..30).map(|k| (k as f64 * 0.3).fract()).collect::<Vec<_>>());
    let a = run_sequence(&mut spec.build::<f64>(5).unwrap(), &inputs, 0).unwrap();
    let b = run_sequence(&mut spec.build::<f64>(5).unwrap(), &inputs, 0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn run_sequence_washout() {
    let mut sys = single(2, 1, 1.0, 1);
    let inputs = Series::from_scalars(&[0.1, 0.2, 0.3]);
    let z = run_sequence(&mut sys, &inputs, 2).unwrap();
    assert_eq!(z.len(), 1);
    assert!(z.as_flat().iter().all(|&x| (0.0..=1.0).contains(&x)));
    assert!(run_sequence(&mut sys, &inputs, 3).is_err());
}

#[test]
fn reset_restores_initial_trajectory() {
    let spec = HqrSpec::new(2, 3, 1, 2.0, 1.0, 0.5);
    let mut sys = spec.build::<f64>(3).unwrap();
    let inputs = Series::from_scalars(&[0.3, 0.9, 0.1, 0.5]);
    let first = run_sequence(&mut sys, &inputs, 0).unwrap();
    sys.reset();
    let again = run_sequence(&mut sys, &inputs, 0).unwrap();
    assert_eq!(first, again);
    assert!(sys.density(1).check().is_ok());
}

#[test]
fn f32_kernel_tracks_f64() {
    let spec = HqrSpec::new(2, 3, 2, 1.0, 1.0, 0.5);
    let mut a = spec.build::<f64>(8).unwrap();
    let mut b = spec.build::<f32>(8).unwrap();
    for k in 0..50 {
        let u = (k as f64 * 0.17).fract();
        let za = a.step(&[u]).unwrap().to_vec();
        let zb = b.step(&[u as f32]).unwrap();
        for (x, y) in za.iter().zip(zb) {
            assert!((x - *y as f64).abs() < 1e-4);
        }
    }
}
