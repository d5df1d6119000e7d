use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::kernel::clamp01;

/// How reservoirs feed their signals to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Every reservoir listens to every other one.
    Mutual,
    /// Reservoir `l` listens only to reservoir `l-1`; the first one receives no feedback.
    Forward,
    /// No feedback at all.
    None,
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mutual" => Ok(Self::Mutual),
            "forward" => Ok(Self::Forward),
            "none" => Ok(Self::None),
            other => Err(Error::Config(format!("unknown topology {other:?} (expected mutual, forward or none)"))),
        }
    }
}

/// How a multidimensional input is spread over the reservoirs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMap {
    /// Random nonnegative rows normalized to sum 1.
    #[default]
    Mixed,
    /// Reservoir `l` receives component `l mod n_in` alone.
    Cyclic,
}

/// One-hot input weights: row `l` selects component `l mod n_in`.
pub fn cyclic_input_weights<T: Real>(n_qr: usize, n_in: usize) -> DMatrix<T> {
    DMatrix::from_fn(n_qr, n_in, |l, i| if i == l % n_in { T::one() } else { T::zero() })
}

/// Input and feedback weights of a reservoir ensemble.
///
/// `w_con` has one column per signal. It may carry one extra trailing column,
/// which multiplies a constant 1 (used to fold a readout bias into the feedback).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices<T: Real> {
    pub w_in: DMatrix<T>,
    pub w_con: DMatrix<T>,
    pub alpha: T,
    pub topology: Topology,
}

impl<T: Real> CouplingMatrices<T> {
    pub fn n_qr(&self) -> usize {
        self.w_in.nrows()
    }

    pub fn n_in(&self) -> usize {
        self.w_in.ncols()
    }

    /// Checks shapes against the signal block sizes and `alpha` against `[0, 1]`.
    pub fn validate(&self, blocks: &[usize]) -> Result<()> {
        let n_total: usize = blocks.iter().sum();
        if self.w_in.nrows() != blocks.len() || self.w_con.nrows() != blocks.len() {
            return Err(Error::Config(format!(
                "coupling has {} rows, system has {} reservoirs",
                self.w_in.nrows(),
                blocks.len()
            )));
        }
        if self.w_con.ncols() != n_total && self.w_con.ncols() != n_total + 1 {
            return Err(Error::Config(format!(
                "w_con has {} columns, system has {n_total} signals",
                self.w_con.ncols()
            )));
        }
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Which `w_con` columns row `l` may use, as `(start, end)` signal ranges.
pub(super) fn allowed_columns(l: usize, blocks: &[usize], topology: Topology) -> Vec<(usize, usize)> {
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, &b| {
            let start = *acc;
            *acc += b;
            Some(start)
        })
        .collect();
    let range = |m: usize| (offsets[m], offsets[m] + blocks[m]);
    match topology {
        Topology::Mutual => (0..blocks.len()).filter(|&m| m != l).map(range).collect(),
        Topology::Forward if l > 0 => vec![range(l - 1)],
        _ => Vec::new(),
    }
}

/// Draws random nonnegative couplings with every row normalized to sum 1 over
/// its allowed columns.
///
/// One-dimensional input is broadcast to every reservoir (`w_in` all ones).
pub fn generate_couplings<T: Real, R: Rng + ?Sized>(
    n_in: usize,
    blocks: &[usize],
    topology: Topology,
    alpha: T,
    rng: &mut R,
) -> Result<CouplingMatrices<T>> {
    let n_qr = blocks.len();
    if n_qr == 0 || n_in == 0 {
        return Err(Error::Config("need at least one reservoir and one input".into()));
    }
    let n_total: usize = blocks.iter().sum();

    let mut w_in = DMatrix::from_element(n_qr, n_in, T::one());
    if n_in > 1 {
        for l in 0..n_qr {
            let row: Vec<f64> = (0..n_in).map(|_| rng.gen::<f64>()).collect();
            let sum: f64 = row.iter().sum();
            for (i, x) in row.into_iter().enumerate() {
                w_in[(l, i)] = T::lit(x / sum);
            }
        }
    }

    let mut w_con = DMatrix::zeros(n_qr, n_total);
    let mut any_row = false;
    for l in 0..n_qr {
        let allowed = allowed_columns(l, blocks, topology);
        let cols: Vec<usize> = allowed.iter().flat_map(|&(a, b)| a..b).collect();
        if cols.is_empty() {
            continue;
        }
        any_row = true;
        let draws: Vec<f64> = cols.iter().map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = draws.iter().sum();
        for (&col, x) in cols.iter().zip(draws) {
            w_con[(l, col)] = T::lit(x / sum);
        }
    }
    if alpha > T::zero() && !any_row {
        return Err(Error::Config(format!(
            "alpha = {alpha} but topology {topology:?} with {n_qr} reservoir(s) leaves no feedback connection"
        )));
    }
    let c = CouplingMatrices { w_in, w_con, alpha, topology };
    c.validate(blocks)?;
    Ok(c)
}

/// `u' = (1 - alpha) W_in u + alpha W_con z`, clamped to `[0, 1]`.
pub fn mix_input<T: Real>(u: &[T], z_prev: &[T], c: &CouplingMatrices<T>) -> Vec<T> {
    let mut out = vec![T::zero(); c.n_qr()];
    mix_input_into(u, z_prev, c, &mut out);
    out
}

pub(crate) fn mix_input_into<T: Real>(u: &[T], z: &[T], c: &CouplingMatrices<T>, out: &mut [T]) {
    let ext = T::one() - c.alpha;
    let n_total = z.len();
    for (l, o) in out.iter_mut().enumerate() {
        let mut drive = T::zero();
        for (i, &x) in u.iter().enumerate() {
            drive += c.w_in[(l, i)] * x;
        }
        let mut fb = T::zero();
        for (i, &x) in z.iter().enumerate() {
            fb += c.w_con[(l, i)] * x;
        }
        if c.w_con.ncols() == n_total + 1 {
            fb += c.w_con[(l, n_total)];
        }
        *o = clamp01(ext * drive + c.alpha * fb);
    }
}
