use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::series::Series;

/// Nonlinear map applied to signal vectors before the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMap {
    #[default]
    Linear,
    /// Squares every even-indexed signal component.
    SquareEven,
}

impl FeatureMap {
    pub fn apply_in_place<T: Real>(self, z: &mut [T]) {
        if self == FeatureMap::SquareEven {
            for x in z.iter_mut().step_by(2) {
                *x = *x * *x;
            }
        }
    }
}

/// Bias-augmented design matrix: column 0 is all ones, then the features.
pub fn assemble_design<T: Real>(z: &Series<T>, map: FeatureMap) -> Result<DMatrix<T>> {
    if z.is_empty() {
        return arg("cannot build a design matrix from an empty signal series");
    }
    let mut x = DMatrix::zeros(z.len(), z.dim() + 1);
    let mut buf = vec![T::zero(); z.dim()];
    for (k, row) in z.rows().enumerate() {
        buf.copy_from_slice(row);
        map.apply_in_place(&mut buf);
        x[(k, 0)] = T::one();
        for (i, &v) in buf.iter().enumerate() {
            x[(k, i + 1)] = v;
        }
    }
    Ok(x)
}

/// Linear readout `y = W^T [1; phi(z)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel<T: Real> {
    /// `(n_features + 1) x d_out`, row 0 is the bias.
    pub weights: DMatrix<T>,
    pub ridge_beta: T,
    pub feature_map: FeatureMap,
}

impl<T: Real> ReadoutModel<T> {
    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn d_out(&self) -> usize {
        self.weights.ncols()
    }

    pub fn predict(&self, z: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.d_out()];
        self.predict_into(z, &mut out)?;
        Ok(out)
    }

    pub fn predict_into(&self, z: &[T], out: &mut [T]) -> Result<()> {
        if z.len() != self.n_features() || out.len() != self.d_out() {
            return arg(format!(
                "readout expects {} features and {} outputs, got {} and {}",
                self.n_features(),
                self.d_out(),
                z.len(),
                out.len()
            ));
        }
        let augment = self.feature_map == FeatureMap::SquareEven;
        for (o, col) in out.iter_mut().zip(self.weights.column_iter()) {
            let mut acc = col[0];
            for (i, &x) in z.iter().enumerate() {
                let f = if augment && i % 2 == 0 { x * x } else { x };
                acc += col[i + 1] * f;
            }
            *o = acc;
        }
        Ok(())
    }

    /// Predictions for every row of a signal series.
    pub fn predict_series(&self, z: &Series<T>) -> Result<Series<T>> {
        let mut out = Series::with_capacity(self.d_out(), z.len());
        let mut buf = vec![T::zero(); self.d_out()];
        for row in z.rows() {
            self.predict_into(row, &mut buf)?;
            out.push(&buf)?;
        }
        Ok(out)
    }
}

/// Solves `(X^T X + beta I) W = X^T Y`.
pub fn ridge_fit<T: Real>(
    x: &DMatrix<T>,
    targets: &DMatrix<T>,
    beta: T,
    feature_map: FeatureMap,
) -> Result<ReadoutModel<T>> {
    if x.nrows() == 0 || x.nrows() != targets.nrows() {
        return arg(format!("design has {} rows, targets have {}", x.nrows(), targets.nrows()));
    }
    if !(beta >= T::zero()) {
        return arg(format!("ridge parameter must be nonnegative, got {beta}"));
    }
    let gram = x.tr_mul(x);
    let rhs = x.tr_mul(targets);
    let weights = solve_normal(gram, &rhs, beta)?;
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Numerical("ridge solution has non-finite weights".into()));
    }
    Ok(ReadoutModel { weights, ridge_beta: beta, feature_map })
}

/// Solves `(G + beta I) W = B` for a symmetric positive semidefinite Gram matrix.
pub(crate) fn solve_normal<T: Real>(mut gram: DMatrix<T>, rhs: &DMatrix<T>, beta: T) -> Result<DMatrix<T>> {
    let n = gram.nrows();
    for i in 0..n {
        gram[(i, i)] += beta;
    }
    let scale = (0..n).map(|i| gram[(i, i)]).fold(T::zero(), |a, b| if b > a { b } else { a });
    if let Some(ch) = Cholesky::new(gram.clone()) {
        let l = ch.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)]).fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a });
        // Squared pivot ratio approximates the reciprocal condition number.
        let rcond = min_pivot * min_pivot / scale;
        if beta > T::zero() || rcond > T::default_epsilon() * T::lit(1e2) {
            return Ok(ch.solve(rhs));
        }
    }
    if beta == T::zero() {
        return Err(Error::Solver("normal equations are singular at beta = 0; use a positive ridge parameter".into()));
    }
    // Rounding broke positive definiteness; fall back to a spectral solve.
    let eig = SymmetricEigen::new(gram);
    let cutoff = scale * T::default_epsilon() * T::from_usize_lossy(n);
    let proj = eig.eigenvectors.tr_mul(rhs);
    let mut scaled = proj;
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        let lam = eig.eigenvalues[i];
        let inv = if lam > cutoff { T::one() / lam } else { T::zero() };
        row *= inv;
    }
    Ok(&eig.eigenvectors * scaled)
}

/// Ridge fit of a signal series against a target series of the same length.
pub fn fit_series<T: Real>(
    z: &Series<T>,
    targets: &Series<T>,
    beta: T,
    feature_map: FeatureMap,
) -> Result<ReadoutModel<T>> {
    if z.len() != targets.len() {
        return arg(format!("{} signal rows but {} target rows", z.len(), targets.len()));
    }
    let x = assemble_design(z, feature_map)?;
    let y = DMatrix::from_row_slice(targets.len(), targets.dim(), targets.as_flat());
    ridge_fit(&x, &y, beta, feature_map)
}
