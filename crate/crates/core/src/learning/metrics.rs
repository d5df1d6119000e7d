use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::series::Series;

/// `sum (pred - target)^2 / sum target^2`.
pub fn nmse<T: Real>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() || pred.is_empty() {
        return arg(format!("nmse needs equal nonempty lengths, got {} and {}", pred.len(), target.len()));
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for (&p, &t) in pred.iter().zip(target) {
        num += (p - t) * (p - t);
        den += t * t;
    }
    if den == T::zero() {
        return Err(Error::Numerical("nmse target is identically zero".into()));
    }
    Ok(num / den)
}

/// Per-step normalized RMSE: `sqrt(mean_i ((y_i - yhat_i) / sigma_i)^2)`.
pub fn nrmse<T: Real>(pred: &Series<T>, target: &Series<T>, sigma: &[T]) -> Result<Vec<T>> {
    if pred.dim() != target.dim() || pred.len() != target.len() || sigma.len() != pred.dim() {
        return arg("nrmse needs matching shapes and one sigma per component");
    }
    if sigma.iter().any(|&s| !(s > T::zero())) {
        return Err(Error::Numerical("nrmse normalizer has a non-positive component".into()));
    }
    let m = T::from_usize_lossy(pred.dim());
    Ok(pred
        .rows()
        .zip(target.rows())
        .map(|(p, t)| {
            let s =
                p.iter().zip(t).zip(sigma).fold(T::zero(), |acc, ((&a, &b), &sd)| acc + (a - b) * (a - b) / (sd * sd));
            (s / m).sqrt()
        })
        .collect())
}

/// `sqrt(mean (a - b)^2)`.
pub fn rmse<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.is_empty() {
        return arg(format!("rmse needs equal nonempty lengths, got {} and {}", a.len(), b.len()));
    }
    let s = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((s / T::from_usize_lossy(a.len())).sqrt())
}

/// Squared Pearson correlation; zero when either side has no variance.
pub fn squared_correlation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.is_empty() {
        return arg("correlation needs equal nonempty lengths");
    }
    let n = T::from_usize_lossy(a.len());
    let ma = a.iter().fold(T::zero(), |s, &x| s + x) / n;
    let mb = b.iter().fold(T::zero(), |s, &x| s + x) / n;
    let (mut cov, mut va, mut vb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == T::zero() || vb == T::zero() {
        return Ok(T::zero());
    }
    let r2 = cov * cov / (va * vb);
    Ok(if r2 > T::one() { T::one() } else { r2 })
}
