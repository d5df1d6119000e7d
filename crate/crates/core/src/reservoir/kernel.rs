//! Fast stepping on the reduced state.
//!
//! Injection discards the first qubit, so a reservoir is fully described between
//! inputs by its marginal `R = tr_1 rho` on the remaining `N-1` qubits. One step
//! with input `u` maps `R` to `sum_{c,b} w_b U_cb R U_cb^dag`, where `U_cb` are the
//! `h x h` blocks of the step propagator and `w = (1-u, u)`. Signals are linear in
//! `R` and are read through precomputed observables `G = U_b^dag Z U_b`.

use nalgebra::DMatrix;

use crate::num::{c, Real, C};
use crate::qcore::{z_sign, CMatrix, DensityMatrix, Eigensystem};

/// `h x h` complex matrix in split real/imaginary planes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal<T> {
    pub(crate) side: usize,
    pub(crate) re: Vec<T>,
    pub(crate) im: Vec<T>,
}

impl<T: Real> Marginal<T> {
    pub(crate) fn zeros(side: usize) -> Self {
        Self { side, re: vec![T::zero(); side * side], im: vec![T::zero(); side * side] }
    }

    pub(crate) fn from_cmatrix(m: &CMatrix<T>) -> Self {
        let side = m.nrows();
        let mut out = Self::zeros(side);
        for a in 0..side {
            for b in 0..side {
                let z = m[(a, b)];
                out.re[a * side + b] = z.re;
                out.im[a * side + b] = z.im;
            }
        }
        out
    }

    /// Marginal of a full state, tracing out the first qubit.
    pub(crate) fn of_state(rho: &DensityMatrix<T>) -> Self {
        Self::from_cmatrix(&crate::qcore::trace_out_first(rho.matrix()))
    }

    pub(crate) fn to_cmatrix(&self) -> CMatrix<T> {
        let n = self.side;
        DMatrix::from_fn(n, n, |a, b| c(self.re[a * n + b], self.im[a * n + b]))
    }

    fn fill_zero(&mut self) {
        self.re.iter_mut().for_each(|x| *x = T::zero());
        self.im.iter_mut().for_each(|x| *x = T::zero());
    }

    /// Replaces the matrix by its Hermitian part.
    fn hermitize(&mut self) {
        let n = self.side;
        let half = T::lit(0.5);
        for a in 0..n {
            self.im[a * n + a] = T::zero();
            for b in a + 1..n {
                let (ab, ba) = (a * n + b, b * n + a);
                let re = (self.re[ab] + self.re[ba]) * half;
                let im = (self.im[ab] - self.im[ba]) * half;
                self.re[ab] = re;
                self.re[ba] = re;
                self.im[ab] = im;
                self.im[ba] = -im;
            }
        }
    }
}

/// `out += w * a * b` for split-plane square matrices (axpy inner loop).
fn mul_acc<T: Real>(out: &mut Marginal<T>, a: &Marginal<T>, b: &Marginal<T>, w: T) {
    let n = a.side;
    for i in 0..n {
        let (or, oi) = (&mut out.re[i * n..(i + 1) * n], &mut out.im[i * n..(i + 1) * n]);
        for k in 0..n {
            let ar = a.re[i * n + k] * w;
            let ai = a.im[i * n + k] * w;
            let (br, bi) = (&b.re[k * n..(k + 1) * n], &b.im[k * n..(k + 1) * n]);
            for j in 0..n {
                or[j] += ar * br[j] - ai * bi[j];
                oi[j] += ar * bi[j] + ai * br[j];
            }
        }
    }
}

/// Precomputed operators for stepping one reservoir configuration.
#[derive(Debug, Clone)]
pub struct StepKernel<T> {
    n_qubits: usize,
    n_virtual: usize,
    side: usize,
    /// Blocks `U_cb` of the full-step propagator, indexed `2c + b`.
    blocks: Vec<Marginal<T>>,
    adjoints: Vec<Marginal<T>>,
    /// Observables on the packed upper triangle, element-major:
    /// `obs[e * n_obs + 2 * signal + b]`.
    obs_re: Vec<T>,
    obs_im: Vec<T>,
    n_obs: usize,
}

impl<T: Real> StepKernel<T> {
    pub fn new(eig: &Eigensystem<T>, n_qubits: usize, n_virtual: usize, tau: T) -> Self {
        let d = 1usize << n_qubits;
        let side = d / 2;
        let dt = tau / T::from_usize_lossy(n_virtual);
        let step = crate::qcore::propagator(eig, tau);
        let u = step.matrix();

        let mut blocks = Vec::with_capacity(4);
        let mut adjoints = Vec::with_capacity(4);
        for cb in 0..4 {
            let (cr, cc) = ((cb >> 1) * side, (cb & 1) * side);
            let blk = u.view((cr, cc), (side, side)).into_owned();
            adjoints.push(Marginal::from_cmatrix(&blk.adjoint()));
            blocks.push(Marginal::from_cmatrix(&blk));
        }

        let n_signals = n_qubits * n_virtual;
        let n_obs = 2 * n_signals;
        let n_packed = side * (side + 1) / 2;
        let mut obs_re = vec![T::zero(); n_packed * n_obs];
        let mut obs_im = vec![T::zero(); n_packed * n_obs];
        let two = T::lit(2.0);
        for v in 1..=n_virtual {
            let uv = crate::qcore::propagator(eig, dt * T::from_usize_lossy(v));
            let uv = uv.matrix();
            for b in 0..2 {
                let col = uv.columns(b * side, side);
                for j in 1..=n_qubits {
                    // G = col^dag Z_j col, with Z_j diagonal.
                    let mut zc = col.into_owned();
                    for r in 0..d {
                        if z_sign(r, j, n_qubits) < 0 {
                            zc.row_mut(r).neg_mut();
                        }
                    }
                    let g = col.adjoint() * zc;
                    let o = 2 * ((j - 1) * n_virtual + (v - 1)) + b;
                    let mut e = 0;
                    for a in 0..side {
                        for bb in a..side {
                            // tr(R G) = sum_ab Re(R_ab conj(G_ab)) for Hermitian R, G.
                            let w = if a == bb { T::one() } else { two };
                            let z: C<T> = g[(a, bb)];
                            obs_re[e * n_obs + o] = z.re * w;
                            obs_im[e * n_obs + o] = z.im * w;
                            e += 1;
                        }
                    }
                }
            }
        }
        Self { n_qubits, n_virtual, side, blocks, adjoints, obs_re, obs_im, n_obs }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_virtual(&self) -> usize {
        self.n_virtual
    }

    pub fn n_signals(&self) -> usize {
        self.n_qubits * self.n_virtual
    }

    pub(crate) fn side(&self) -> usize {
        self.side
    }

    /// Writes the signals of one step into `signals` and advances `cur` into `next`.
    ///
    /// `acc` is scratch of length `2 * n_signals`, `tmp` is a scratch marginal.
    pub(crate) fn step(
        &self,
        cur: &Marginal<T>,
        next: &mut Marginal<T>,
        u: T,
        signals: &mut [T],
        work: &mut Workspace<T>,
    ) {
        let n = self.side;
        let n_obs = self.n_obs;
        let acc = &mut work.acc;
        acc.iter_mut().for_each(|x| *x = T::zero());
        let mut e = 0;
        for a in 0..n {
            for b in a..n {
                let (rr, ri) = (cur.re[a * n + b], cur.im[a * n + b]);
                let gr = &self.obs_re[e * n_obs..(e + 1) * n_obs];
                let gi = &self.obs_im[e * n_obs..(e + 1) * n_obs];
                for o in 0..n_obs {
                    acc[o] += rr * gr[o] + ri * gi[o];
                }
                e += 1;
            }
        }
        let weights = [T::one() - u, u];
        let half = T::lit(0.5);
        for (s, z) in signals.iter_mut().enumerate() {
            let m = weights[0] * acc[2 * s] + weights[1] * acc[2 * s + 1];
            *z = clamp01((T::one() + m) * half);
        }

        next.fill_zero();
        for (b, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for cc in 0..2 {
                let idx = 2 * cc + b;
                work.tmp.fill_zero();
                mul_acc(&mut work.tmp, &self.blocks[idx], cur, T::one());
                mul_acc(next, &work.tmp, &self.adjoints[idx], w);
            }
        }
        next.hermitize();
    }

    /// Full state after injecting `u` into a reservoir with marginal `r` and evolving one period.
    pub(crate) fn full_state(&self, eig: &Eigensystem<T>, tau: T, r: &Marginal<T>, u: T) -> CMatrix<T> {
        let spin = crate::qcore::input_spin_state(u);
        let injected = crate::qcore::kron(&spin, &r.to_cmatrix());
        let step = crate::qcore::propagator(eig, tau);
        step.matrix() * injected * step.matrix().adjoint()
    }
}

/// Per-reservoir scratch buffers for [`StepKernel::step`].
#[derive(Debug, Clone)]
pub(crate) struct Workspace<T> {
    acc: Vec<T>,
    tmp: Marginal<T>,
}

impl<T: Real> Workspace<T> {
    pub(crate) fn for_kernel(k: &StepKernel<T>) -> Self {
        Self { acc: vec![T::zero(); k.n_obs], tmp: Marginal::zeros(k.side) }
    }
}

#[inline]
pub(crate) fn clamp01<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::zero()
    } else if x > T::one() {
        T::one()
    } else {
        x
    }
}
