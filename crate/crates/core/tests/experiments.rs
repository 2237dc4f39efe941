use attractorlab::experiments::{
    run_decomposition, run_pullback, run_sweep, DecompositionParams, PullbackParams, SweepParam,
};
use attractorlab::history::PhiGenerator;
use attractorlab::model::{EpsilonProfile, Forcing, ModelSpec};
use attractorlab::solver::RunParams;

#[test]
fn stronger_delay_feedback_leaves_more_energy() {
    let spec = ModelSpec::default_model(3, 2).unwrap();
    let rows = run_sweep(
        &spec,
        SweepParam::DelayB,
        &[0.0, 0.1, 0.3, 0.5],
        &PhiGenerator::random(3),
        &RunParams::new(0.0, 10.0, 1e-3),
    );
    let energies: Vec<f64> = rows.iter().map(|r| r.terminal_energy.unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] >= w[0]), "{energies:?}");
}

#[test]
fn decomposition_reports_are_reproducible() {
    let spec = ModelSpec::default_model(3, 1).unwrap();
    let mut p = DecompositionParams::new(&spec);
    p.horizon = 6.0;
    let phi = PhiGenerator::random_with_norm_sq(8, 30.0);
    let a = run_decomposition(&spec, &phi, &p).unwrap();
    let b = run_decomposition(&spec, &phi, &p).unwrap();
    assert_eq!(a.v2_fractional, b.v2_fractional);
    assert_eq!(a.decay, b.decay);
    assert_eq!(a.c_xi.to_bits(), b.c_xi.to_bits());
}

#[test]
fn pullback_diameters_are_monotone_on_defaults() {
    let spec = ModelSpec::default_model(3, 1).unwrap();
    let report = run_pullback(&spec, &PullbackParams::new(&spec, 5)).unwrap();
    assert!(report.monotone_within(1e-9));
    assert!(report.rows.iter().flat_map(|r| &r.distances).all(|d| d.2 >= 0.0));
}

#[test]
fn autonomous_diameters_shrink_at_the_split_decay_rate() {
    let mut spec = ModelSpec::default_model(3, 1).unwrap();
    spec.epsilon = EpsilonProfile::constant(1.0);
    spec.forcing = Forcing::standard(&spec.basis, 0.0, 2.0);
    spec.skip_validation = true;
    let report = run_pullback(
        &spec,
        &PullbackParams {
            t_star: 0.0,
            taus: vec![-4.0, -8.0],
            dt: 1e-3,
            phis: vec![PhiGenerator::Zero, PhiGenerator::random_with_norm_sq(1, 10.0)],
        },
    )
    .unwrap();
    let d = report.diameters();
    // squared distances in the delay-window norm contract like ‖v₁‖²
    let observed = 2.0 * (d[0] / d[1]).ln() / 4.0;
    let mut p = DecompositionParams::new(&spec);
    p.horizon = 8.0;
    let dec = run_decomposition(&spec, &PhiGenerator::random_with_norm_sq(1, 10.0), &p).unwrap();
    assert!(
        (observed - dec.decay.rate).abs() <= 0.25 * dec.decay.rate,
        "diameter rate {observed}, split fit {}",
        dec.decay.rate
    );
}
