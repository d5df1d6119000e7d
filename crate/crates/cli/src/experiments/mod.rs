//! One module per subcommand. Each returns its tables and summary metrics.

pub mod innate;
pub mod kse;
pub mod lorenz;
pub mod mc;
pub mod narma;
pub mod qesp;
pub mod spectrum;
pub mod trace;

use rayon::prelude::*;

use crate::error::CliError;

/// Maps `f` over `items` on a pool of `workers` threads, keeping input order.
pub fn par_map<I, R, F>(workers: usize, items: &[I], f: F) -> Result<Vec<R>, CliError>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> Result<R, CliError> + Sync + Send,
{
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    pool.install(|| items.par_iter().map(f).collect())
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Linear-interpolated quantile of an unsorted sample.
pub(crate) fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn par_map_keeps_order() {
        let items: Vec<usize> = (0..50).collect();
        let serial = par_map(1, &items, |&i| Ok(i * i)).unwrap();
        assert_eq!(par_map(3, &items, |&i| Ok(i * i)).unwrap(), serial);
        assert!(par_map(2, &items, |&i| if i == 7 { crate::error::config_err("seven") } else { Ok(i) }).is_err());
    }
}
