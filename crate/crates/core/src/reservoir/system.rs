use rand::Rng;

use crate::error::{arg, Error, Result};
use crate::num::Real;
use crate::qcore::DensityMatrix;
use crate::series::Series;

use super::config::QrConfig;
use super::coupling::{allowed_columns, mix_input_into, CouplingMatrices};
use super::kernel::{Marginal, Workspace};

#[derive(Debug, Clone)]
struct Unit<T: Real> {
    config: QrConfig<T>,
    cur: Marginal<T>,
    prev: Marginal<T>,
    /// Full state at step 0, until the first step is taken.
    origin: Option<DensityMatrix<T>>,
    last_input: T,
    work: Workspace<T>,
}

impl<T: Real> Unit<T> {
    fn new(config: QrConfig<T>) -> Self {
        let side = config.kernel().side();
        let work = Workspace::for_kernel(config.kernel());
        let mut unit = Self {
            cur: Marginal::zeros(side),
            prev: Marginal::zeros(side),
            origin: None,
            last_input: T::zero(),
            work,
            config,
        };
        unit.set_state(unit.config.initial_state().clone());
        unit
    }

    fn set_state(&mut self, rho: DensityMatrix<T>) {
        self.cur = Marginal::of_state(&rho);
        self.origin = Some(rho);
    }

    fn step(&mut self, u: T, out: &mut [T]) {
        std::mem::swap(&mut self.cur, &mut self.prev);
        self.config.kernel().step(&self.prev, &mut self.cur, u, out, &mut self.work);
        self.last_input = u;
        self.origin = None;
    }

    fn density(&self) -> DensityMatrix<T> {
        match &self.origin {
            Some(rho) => rho.clone(),
            None => DensityMatrix::from_matrix_unchecked(self.config.kernel().full_state(
                self.config.eigensystem(),
                self.config.tau(),
                &self.prev,
                self.last_input,
            )),
        }
    }
}

/// Ensemble of reservoirs coupled through classical linear feedback.
#[derive(Debug, Clone)]
pub struct HqrSystem<T: Real> {
    units: Vec<Unit<T>>,
    coupling: CouplingMatrices<T>,
    offsets: Vec<usize>,
    signal: Vec<T>,
    mixed: Vec<T>,
    step_index: usize,
}

impl<T: Real> HqrSystem<T> {
    pub fn new(configs: Vec<QrConfig<T>>, coupling: CouplingMatrices<T>) -> Result<Self> {
        if configs.is_empty() {
            return Err(Error::Config("an ensemble needs at least one reservoir".into()));
        }
        let blocks: Vec<usize> = configs.iter().map(QrConfig::n_signals).collect();
        coupling.validate(&blocks)?;
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b);
        }
        let n_total = *offsets.last().unwrap();
        let n_qr = configs.len();
        Ok(Self {
            units: configs.into_iter().map(Unit::new).collect(),
            coupling,
            offsets,
            signal: vec![T::zero(); n_total],
            mixed: vec![T::zero(); n_qr],
            step_index: 0,
        })
    }

    pub fn n_qr(&self) -> usize {
        self.units.len()
    }

    pub fn n_total(&self) -> usize {
        self.signal.len()
    }

    pub fn n_in(&self) -> usize {
        self.coupling.n_in()
    }

    /// Signal range `start..end` of reservoir `l` (0-based).
    pub fn block(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn config(&self, l: usize) -> &QrConfig<T> {
        &self.units[l].config
    }

    /// Signal columns that the topology lets reservoir `l` listen to.
    pub fn feedback_columns(&self, l: usize) -> Vec<usize> {
        let blocks: Vec<usize> = (0..self.n_qr()).map(|m| self.block(m).len()).collect();
        allowed_columns(l, &blocks, self.coupling.topology).into_iter().flat_map(|(a, b)| a..b).collect()
    }

    pub fn coupling(&self) -> &CouplingMatrices<T> {
        &self.coupling
    }

    pub fn coupling_mut(&mut self) -> &mut CouplingMatrices<T> {
        &mut self.coupling
    }

    /// Latest signal vector `z_k` (zero before the first step).
    pub fn signal(&self) -> &[T] {
        &self.signal
    }

    /// Overwrites the stored signal vector, e.g. to feed back a noisy copy.
    pub fn signal_mut(&mut self) -> &mut [T] {
        &mut self.signal
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Mixed inputs `u'` used in the latest step.
    pub fn last_mixed_input(&self) -> &[T] {
        &self.mixed
    }

    /// Current density matrix of reservoir `l`.
    pub fn density(&self, l: usize) -> DensityMatrix<T> {
        self.units[l].density()
    }

    /// Returns every reservoir to its configured initial state and zeroes the signal.
    pub fn reset(&mut self) {
        for u in &mut self.units {
            let rho = u.config.initial_state().clone();
            u.set_state(rho);
        }
        self.signal.iter_mut().for_each(|x| *x = T::zero());
        self.step_index = 0;
    }

    /// Resets to explicit initial states, one per reservoir.
    pub fn reset_to(&mut self, states: &[DensityMatrix<T>]) -> Result<()> {
        if states.len() != self.units.len() {
            return arg(format!("{} states for {} reservoirs", states.len(), self.units.len()));
        }
        for (u, s) in self.units.iter_mut().zip(states) {
            if s.n_qubits() != u.config.n_qubits() {
                return arg(format!("state has {} qubits, reservoir has {}", s.n_qubits(), u.config.n_qubits()));
            }
            u.set_state(s.clone());
        }
        self.signal.iter_mut().for_each(|x| *x = T::zero());
        self.step_index = 0;
        Ok(())
    }

    /// Resets every reservoir to a random full-rank state.
    pub fn reset_random<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let states: Vec<_> = self.units.iter().map(|u| DensityMatrix::ginibre(u.config.n_qubits(), rng)).collect();
        self.reset_to(&states).expect("states built to match");
    }

    /// One ensemble step: mix inputs with the previous signals, step every reservoir.
    pub fn step(&mut self, u: &[T]) -> Result<&[T]> {
        if u.len() != self.coupling.n_in() {
            return arg(format!("input of length {} for {} input channels", u.len(), self.n_in()));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite external input".into()));
        }
        mix_input_into(u, &self.signal, &self.coupling, &mut self.mixed);
        self.advance();
        Ok(&self.signal)
    }

    /// Steps every reservoir with externally computed mixed inputs `u'`.
    pub fn step_mixed(&mut self, mixed: &[T]) -> Result<&[T]> {
        if mixed.len() != self.units.len() {
            return arg(format!("{} mixed inputs for {} reservoirs", mixed.len(), self.units.len()));
        }
        if mixed.iter().any(|x| !(*x >= T::zero() && *x <= T::one())) {
            return arg("mixed inputs must lie in [0, 1]");
        }
        self.mixed.copy_from_slice(mixed);
        self.advance();
        Ok(&self.signal)
    }

    fn advance(&mut self) {
        for (l, unit) in self.units.iter_mut().enumerate() {
            let out = &mut self.signal[self.offsets[l]..self.offsets[l + 1]];
            unit.step(self.mixed[l], out);
        }
        self.step_index += 1;
    }
}

/// Advances `sys` by one step and returns a copy of the new signal vector.
pub fn hqr_step<T: Real>(sys: &mut HqrSystem<T>, u: &[T]) -> Result<Vec<T>> {
    sys.step(u).map(<[T]>::to_vec)
}

/// Drives `sys` over every input row and returns the signals after the first `washout` steps.
pub fn run_sequence<T: Real>(sys: &mut HqrSystem<T>, inputs: &Series<T>, washout: usize) -> Result<Series<T>> {
    if inputs.len() <= washout {
        return arg(format!("{} inputs do not exceed washout {washout}", inputs.len()));
    }
    let mut out = Series::with_capacity(sys.n_total(), inputs.len() - washout);
    for (k, u) in inputs.rows().enumerate() {
        let z = sys.step(u)?;
        if k >= washout {
            out.push(z)?;
        }
    }
    Ok(out)
}
