use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::series::Series;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

#[test]
fn design_prepends_bias() {
    let z = Series::from_scalars(&[0.5]);
    let x = assemble_design(&z, FeatureMap::Linear).unwrap();
    assert_eq!(x, DMatrix::from_row_slice(1, 2, &[1.0, 0.5]));
    let z = Series::<f64>::zeros(7, 4);
    let x = assemble_design(&z, FeatureMap::Linear).unwrap();
    assert_eq!(x.shape(), (4, 8));
    assert!(x.column(0).iter().all(|&v| v == 1.0));
    assert!(assemble_design(&Series::<f64>::new(3), FeatureMap::Linear).is_err());
}

#[test]
fn exact_linear_targets_are_recovered() {
    let mut x = random_matrix(30, 5, 1);
    x.column_mut(0).fill(1.0);
    let w = random_matrix(5, 2, 2);
    let y = &x * &w;
    let m = ridge_fit(&x, &y, 0.0, FeatureMap::Linear).unwrap();
    assert!((&m.weights - &w).abs().max() < 1e-10);
    let resid = x.tr_mul(&(&x * &m.weights - &y));
    assert!(resid.abs().max() < 1e-8);
}

#[test]
fn large_beta_shrinks_weights() {
    let x = random_matrix(40, 4, 3);
    let y = random_matrix(40, 1, 4);
    let m = ridge_fit(&x, &y, 1e12, FeatureMap::Linear).unwrap();
    assert!(m.weights.abs().max() < 1e-9);
}

#[test]
fn ridge_matches_explicit_inverse_oracle() {
    let x = random_matrix(50, 6, 5);
    let y = random_matrix(50, 2, 6);
    let beta = 1e-3;
    let m = ridge_fit(&x, &y, beta, FeatureMap::Linear).unwrap();
    let gram = x.transpose() * &x + DMatrix::identity(6, 6) * beta;
    let oracle = gram.try_inverse().unwrap() * x.transpose() * &y;
    assert!((&m.weights - &oracle).abs().max() < 1e-9);
}

#[test]
fn singular_system_without_ridge_is_a_solver_error() {
    let mut x = random_matrix(20, 3, 7);
    let c0 = x.column(0).clone_owned();
    x.set_column(2, &c0);
    let y = random_matrix(20, 1, 8);
    assert!(matches!(ridge_fit(&x, &y, 0.0, FeatureMap::Linear), Err(crate::Error::Solver(_))));
    assert!(ridge_fit(&x, &y, 1e-6, FeatureMap::Linear).is_ok());
}

#[test]
fn ridge_is_the_regularized_minimizer() {
    let x = random_matrix(25, 4, 9);
    let y = random_matrix(25, 1, 10);
    let beta = 0.1;
    let m = ridge_fit(&x, &y, beta, FeatureMap::Linear).unwrap();
    let loss = |w: &DMatrix<f64>| (&x * w - &y).norm_squared() + beta * w.norm_squared();
    let base = loss(&m.weights);
    for i in 0..4 {
        for s in [-1e-3, 1e-3] {
            let mut w = m.weights.clone();
            w[(i, 0)] += s;
            assert!(loss(&w) >= base);
        }
    }
}

#[test]
fn predict_behaviour() {
    let zero = ReadoutModel { weights: DMatrix::<f64>::zeros(4, 1), ridge_beta: 0.0, feature_map: FeatureMap::Linear };
    assert_eq!(zero.predict(&[0.3, 0.2, 0.9]).unwrap(), vec![0.0]);
    let mut bias = zero.clone();
    bias.weights[(0, 0)] = 2.5;
    assert_eq!(bias.predict(&[0.3, 0.2, 0.9]).unwrap(), vec![2.5]);
    assert!(bias.predict(&[0.3]).is_err());

    let z = Series::from_rows(&[[0.1, 0.4], [0.3, 0.2], [0.7, 0.9], [0.5, 0.5]]).unwrap();
    let targets = Series::from_scalars(&z.rows().map(|r| 0.2 + 3.0 * r[0] * r[0] - r[1]).collect::<Vec<_>>());
    let m = fit_series(&z, &targets, 0.0, FeatureMap::SquareEven).unwrap();
    let back = m.predict_series(&z).unwrap();
    for (a, b) in back.as_flat().iter().zip(targets.as_flat()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }
}

#[test]
fn metric_identities() {
    let y = [0.1, 0.4, -0.3];
    assert_eq!(nmse(&y, &y).unwrap(), 0.0);
    assert_abs_diff_eq!(nmse(&[0.0; 3], &y).unwrap(), 1.0, epsilon = 1e-15);
    assert!(nmse(&y, &[0.0; 3]).is_err());

    let t = Series::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
    let sig = [0.5, 2.0];
    assert_eq!(nrmse(&t, &t, &sig).unwrap(), vec![0.0, 0.0]);
    let shifted = Series::from_rows(&[[1.5, 4.0], [3.5, 6.0]]).unwrap();
    for v in nrmse(&shifted, &t, &sig).unwrap() {
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }
    assert!(nrmse(&t, &t, &[0.0, 1.0]).is_err());

    assert_abs_diff_eq!(rmse(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), 0.5, epsilon = 1e-15);
    assert!(rmse::<f64>(&[], &[]).is_err());
}

#[test]
fn metrics_ignore_joint_reordering() {
    let a = [0.3, -0.1, 0.8, 0.05];
    let b = [0.2, 0.1, 0.7, 0.0];
    let ra = [a[2], a[0], a[3], a[1]];
    let rb = [b[2], b[0], b[3], b[1]];
    assert_abs_diff_eq!(nmse(&a, &b).unwrap(), nmse(&ra, &rb).unwrap(), epsilon = 1e-15);
}

#[test]
fn esn_radius_and_determinism() {
    let m = esn_init::<f64>(60, 1, 0.9, 6, 0.0, 4).unwrap();
    assert_abs_diff_eq!(spectral_radius(&m.w_hh), 0.9, epsilon = 1e-6);
    assert!(m.w_hi.iter().all(|&x| (-1.0..=1.0).contains(&x)));
    let m2 = esn_init::<f64>(60, 1, 0.9, 6, 0.0, 4).unwrap();
    assert_eq!(m.w_hh, m2.w_hh);
    assert!(esn_init::<f64>(10, 1, 0.9, 10, 0.0, 4).is_err());
    assert!(esn_init::<f64>(10, 1, 1.2, 3, 0.0, 4).is_err());
}

#[test]
fn esn_step_range_and_zero_weights() {
    let mut m = esn_init::<f64>(30, 2, 0.8, 3, 0.0, 1).unwrap();
    let h = esn_step(&m, &[0.5; 30], &[3.0, -2.0]).unwrap();
    assert!(h.iter().all(|x| x.abs() < 1.0));
    m.w_hi.fill(0.0);
    m.w_hh.fill(0.0);
    assert!(esn_step(&m, &[0.5; 30], &[1.0, 1.0]).unwrap().iter().all(|&x| x == 0.0));
}

#[test]
fn esn_hidden_state_decays_without_input() {
    let mut m = esn_init::<f64>(50, 1, 0.7, 5, 0.0, 2).unwrap();
    for _ in 0..10 {
        m.step(&[1.0], false).unwrap();
    }
    let start: f64 = m.hidden().iter().map(|x| x * x).sum();
    for _ in 0..300 {
        m.step(&[0.0], false).unwrap();
    }
    let end: f64 = m.hidden().iter().map(|x| x * x).sum();
    assert!(start > 1e-3 && end < 1e-12 * start.max(1.0), "{start} -> {end}");
}
