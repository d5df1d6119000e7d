use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::learning::{fit_series, FeatureMap, ReadoutModel};
use crate::num::Real;
use crate::reservoir::{HqrSpec, HqrSystem};
use crate::seeds::child;
use crate::series::Series;

use super::{teacher_signals, Forecast};

/// Splits a periodic field into `groups` contiguous regions of `width` points; each
/// group's reservoir sees its own region plus `halo` neighbors on each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelLayout {
    pub groups: usize,
    pub width: usize,
    pub halo: usize,
    pub reservoir: HqrSpec,
}

impl ParallelLayout {
    pub fn field_dim(&self) -> usize {
        self.groups * self.width
    }

    pub fn input_dim(&self) -> usize {
        (2 * self.halo + 1) * self.width
    }

    pub fn validate(&self, field_dim: usize) -> Result<()> {
        if self.groups == 0 || self.width == 0 {
            return Err(Error::Config("parallel layout needs at least one group of positive width".into()));
        }
        if self.field_dim() != field_dim {
            return Err(Error::Config(format!(
                "{} groups of width {} do not tile a field of {field_dim} points",
                self.groups, self.width
            )));
        }
        if self.reservoir.n_in != self.input_dim() {
            return Err(Error::Config(format!(
                "group reservoirs take {} inputs but the haloed region has {}",
                self.reservoir.n_in,
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Groups feeding group `i`, in order `i - halo ..= i + halo`, wrapping periodically.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let g = self.groups as isize;
        let h = self.halo as isize;
        (-h..=h).map(|o| (i as isize + o).rem_euclid(g) as usize).collect()
    }

    /// Writes the haloed input of group `i`, taken from a full field row, into `out`.
    pub fn gather_into<T: Copy>(&self, field: &[T], i: usize, out: &mut [T]) {
        for (slot, j) in self.neighbors(i).into_iter().enumerate() {
            out[slot * self.width..(slot + 1) * self.width]
                .copy_from_slice(&field[j * self.width..(j + 1) * self.width]);
        }
    }

    /// Haloed input series of group `i`.
    pub fn group_inputs<T: Real>(&self, field: &Series<T>, i: usize) -> Series<T> {
        let mut out = Series::with_capacity(self.input_dim(), field.len());
        let mut buf = vec![T::zero(); self.input_dim()];
        for row in field.rows() {
            self.gather_into(row, i, &mut buf);
            out.push(&buf).expect("fixed width");
        }
        out
    }
}

struct Group<T: Real> {
    sys: HqrSystem<T>,
    model: ReadoutModel<T>,
    input: Vec<T>,
    output: Vec<T>,
}

/// Runs `f` on every item, spreading items over at most `workers` threads.
fn for_each_parallel<I: Send, F: Fn(usize, &mut I) -> Result<()> + Sync>(
    items: &mut [I],
    workers: usize,
    f: F,
) -> Result<()> {
    if workers <= 1 || items.len() <= 1 {
        return items.iter_mut().enumerate().try_for_each(|(i, it)| f(i, it));
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks_mut(chunk)
            .enumerate()
            .map(|(c, part)| {
                let f = &f;
                scope.spawn(move || part.iter_mut().enumerate().try_for_each(|(j, it)| f(c * chunk + j, it)))
            })
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("worker panicked"))
    })
}

/// Trains one reservoir ensemble per group on its haloed region and forecasts the whole
/// field in closed loop, exchanging the groups' latest local outputs every step.
///
/// `field` is in scaled coordinates; predictions start at row `washout + train_steps`.
#[allow(clippy::too_many_arguments)]
pub fn parallel_forecast<T: Real>(
    layout: &ParallelLayout,
    field: &Series<T>,
    washout: usize,
    train_steps: usize,
    predict_steps: usize,
    beta: T,
    map: FeatureMap,
    seed: u64,
    workers: usize,
) -> Result<Forecast<T>> {
    layout.validate(field.dim())?;
    if field.len() < washout + train_steps + 1 {
        return arg(format!("parallel forecast needs {} rows, got {}", washout + train_steps + 1, field.len()));
    }
    let local: Vec<usize> = (layout.halo * layout.width..(layout.halo + 1) * layout.width).collect();
    let mut slots: Vec<Option<Group<T>>> = (0..layout.groups).map(|_| None).collect();
    for_each_parallel(&mut slots, workers, |i, slot| {
        let mut sys = layout.reservoir.build::<T>(child(seed, "group", i))?;
        let inputs = layout.group_inputs(&field.slice(0, washout + train_steps + 1), i);
        let (z, y) = teacher_signals(&mut sys, &inputs, washout, train_steps)?;
        let model = fit_series(&z, &y.columns(&local), beta, map)?;
        *slot = Some(Group {
            sys,
            model,
            input: vec![T::zero(); layout.input_dim()],
            output: vec![T::zero(); layout.width],
        });
        Ok(())
    })?;
    let mut groups: Vec<Group<T>> = slots.into_iter().map(|g| g.expect("every group trained")).collect();

    let mut predictions = Series::with_capacity(layout.field_dim(), predict_steps);
    let mut row = vec![T::zero(); layout.field_dim()];
    for t in 0..predict_steps {
        for_each_parallel(&mut groups, workers, |_, g| g.model.predict_into(g.sys.signal(), &mut g.output))?;
        for (i, g) in groups.iter().enumerate() {
            row[i * layout.width..(i + 1) * layout.width].copy_from_slice(&g.output);
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Ok(Forecast { predictions, failure: Some(format!("non-finite readout at step {t}")) });
        }
        row.iter_mut().for_each(|v| *v = v.clamp(T::zero(), T::one()));
        predictions.push(&row)?;
        if t + 1 == predict_steps {
            break;
        }
        for_each_parallel(&mut groups, workers, |i, g| {
            layout.gather_into(&row, i, &mut g.input);
            g.sys.step(&g.input).map(|_| ())
        })?;
    }
    Ok(Forecast { predictions, failure: None })
}
