use attractorlab::history::PhiGenerator;
use attractorlab::model::{DelayOperator, ModelSpec};
use attractorlab::solver::oracle::oracle_integrate;
use attractorlab::solver::{integrate, RunParams};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn main_solver_tracks_the_reference_integrator() {
    let spec = ModelSpec::default_model(3, 2).unwrap();
    let phi = PhiGenerator::random(11);
    let reference = oracle_integrate(&spec, &phi, 0.0, 1.0, 10_000).unwrap();
    let traj = integrate(&spec, &phi, &RunParams::new(0.0, 1.0, 1e-3)).unwrap();
    let err = max_abs_diff(traj.final_state[0].coeffs(), reference.final_state());
    assert!(err <= 1e-6, "coefficient error {err:e}");
}

fn final_coeffs(spec: &ModelSpec, phi: &PhiGenerator, dt: f64) -> Vec<f64> {
    integrate(spec, phi, &RunParams::new(0.0, 1.0, dt)).unwrap().final_state[0]
        .coeffs()
        .to_vec()
}

// successive differences e(dt) = |y(dt) − y(dt/2)| and their ratios
fn halving_ratios(spec: &ModelSpec, phi: &PhiGenerator, dts: &[f64]) -> Vec<f64> {
    let ys: Vec<Vec<f64>> = dts.iter().map(|&dt| final_coeffs(spec, phi, dt)).collect();
    let errs: Vec<f64> = ys.windows(2).map(|w| max_abs_diff(&w[0], &w[1])).collect();
    errs.windows(2).map(|w| w[0] / w[1]).collect()
}

#[test]
fn fourth_order_without_delay() {
    let mut spec = ModelSpec::default_model(3, 2).unwrap();
    spec.delay = DelayOperator::discrete(0.0, 0.5);
    let ratios = halving_ratios(&spec, &PhiGenerator::random(11), &[1e-2, 5e-3, 2.5e-3]);
    assert!(ratios.iter().all(|&r| r >= 12.0), "{ratios:?}");
}

#[test]
fn at_least_second_order_with_delay() {
    let spec = ModelSpec::default_model(3, 2).unwrap();
    let ratios = halving_ratios(&spec, &PhiGenerator::random(11), &[4e-3, 2e-3, 1e-3]);
    assert!(ratios.iter().all(|&r| r >= 3.5), "{ratios:?}");
}
