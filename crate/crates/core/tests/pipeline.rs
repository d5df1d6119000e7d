use hqrc_core::diagnostics::{memory_profile, qesp_index, MemorySplits, QespConfig};
use hqrc_core::forecast::{parallel_forecast, ParallelLayout};
use hqrc_core::learning::{fit_series, nmse, FeatureMap};
use hqrc_core::reservoir::{run_sequence, HqrSpec, InputMap};
use hqrc_core::tasks::{
    kse_etdrk4, kse_initial_field, minmax_scale, narma_series, uniform_inputs, KseParams, NarmaParams,
};
use hqrc_core::Series;

#[test]
fn spec_round_trips_through_json_and_rebuilds_identically() {
    let spec = HqrSpec::new(3, 3, 2, 0.7, 1.5, 0.4).with_inputs(2).with_input_map(InputMap::Cyclic);
    let json = serde_json::to_string(&spec).unwrap();
    let back: HqrSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);

    let inputs = Series::from_flat(2, uniform_inputs::<f64>(80, 5)).unwrap();
    let a = run_sequence(&mut spec.build::<f64>(11).unwrap(), &inputs, 10).unwrap();
    let b = run_sequence(&mut back.build::<f64>(11).unwrap(), &inputs, 10).unwrap();
    assert_eq!(a, b);
    let c = run_sequence(&mut spec.build::<f64>(12).unwrap(), &inputs, 10).unwrap();
    assert_ne!(a, c);

    // Older specs without an input map read as the mixed default.
    let legacy = json.replace(",\"input_map\":\"cyclic\"", "");
    assert_eq!(serde_json::from_str::<HqrSpec>(&legacy).unwrap().input_map, InputMap::Mixed);
}

#[test]
fn narma_readout_learns_something() {
    let raw = uniform_inputs::<f64>(1500, 3);
    let (_, y) = narma_series(&NarmaParams::new(5), &raw).unwrap();
    let mut sys = HqrSpec::new(2, 4, 4, 1.0, 1.0, 0.3).build::<f64>(4).unwrap();
    let z = run_sequence(&mut sys, &Series::from_scalars(&raw), 0).unwrap();
    let targets = Series::from_scalars(&y);
    let model = fit_series(&z.slice(200, 1000), &targets.slice(200, 1000), 1e-7, FeatureMap::Linear).unwrap();
    let pred = model.predict_series(&z.slice(1000, 1500)).unwrap();
    let score = nmse(pred.as_flat(), &y[1000..1500]).unwrap();
    assert!(score < 0.05, "NARMA5 NMSE {score}");
}

#[test]
fn stable_reservoir_forgets_its_initial_state() {
    let sys = HqrSpec::new(2, 3, 1, 4.0, 1.0, 0.5).build::<f64>(7).unwrap();
    let inputs = Series::from_scalars(&uniform_inputs::<f64>(600, 8));
    let q = QespConfig { washout: 500, eval: 100, trials: 3 };
    let r = qesp_index(&sys, &inputs, &q, 9).unwrap();
    assert!(r.mu < 1e-6, "mu {}", r.mu);
    assert_eq!(r.per_trial.len(), 3);
}

#[test]
fn memory_function_is_a_squared_correlation() {
    let mut sys = HqrSpec::new(2, 3, 1, 1.0, 1.0, 0.0).build::<f64>(12).unwrap();
    let splits = MemorySplits { washout: 50, train: 400, eval: 200 };
    let delays: Vec<usize> = (0..=30).collect();
    let mf = memory_profile(&mut sys, &delays, splits, 13, 1e-9).unwrap();
    assert_eq!(mf.len(), 31);
    assert!(mf.iter().all(|&m| (0.0..=1.0).contains(&m)));
    assert!(mf[1] > mf[20]);
}

#[test]
fn kse_parallel_forecast_runs_end_to_end() {
    let params = KseParams { grid: 16, ..KseParams::default() };
    let traj = kse_etdrk4(&kse_initial_field(&params, 1), 900, &params).unwrap();
    let (scaled, _) = minmax_scale(&traj.slice(500, 901), 0.0, 1.0).unwrap();
    let layout = ParallelLayout {
        groups: 8,
        width: 2,
        halo: 1,
        reservoir: HqrSpec::new(3, 3, 2, 4.0, 2.0, 0.1).with_inputs(6).with_input_map(InputMap::Cyclic),
    };
    let f = parallel_forecast(&layout, &scaled, 50, 300, 40, 1e-6, FeatureMap::SquareEven, 2, 1).unwrap();
    assert!(f.failure.is_none());
    assert_eq!((f.predictions.len(), f.predictions.dim()), (40, 16));
    assert!(f.predictions.as_flat().iter().all(|v| (0.0..=1.0).contains(v)));
}
