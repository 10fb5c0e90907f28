use spinchain::analysis::fidelity;
use spinchain::shor::{expected_wavefunction, run_shor_detailed};
use spinchain::{ChainParameters, IntegratorConfig};
use std::time::Instant;

#[test]
fn probe_protocol() {
    let params = ChainParameters::default();
    let rabi = spinchain::angular_from_mhz(0.1);
    let cfg = IntegratorConfig::default();
    let t0 = Instant::now();
    let run = run_shor_detailed(&params, rabi, &cfg).unwrap();
    let dt = t0.elapsed();
    println!("protocol run: {dt:?}");
    for stage in &run.stages {
        let probs = stage.end_state.probabilities();
        let top: Vec<(usize, f64)> = probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 1e-3)
            .map(|(i, p)| (i, (*p * 1e6).round() / 1e6))
            .collect();
        println!("{}: t={:.3} {:?} norm={:.12}", stage.name.label(), stage.end_state.time(), top, stage.end_state.norm_sqr());
    }
    println!("outcome: dx={} T={} factors={:?}", run.outcome.delta_x, run.outcome.period, run.outcome.factors);
    println!("marginal: {:?}", run.outcome.x_marginal);
    let f = fidelity(&expected_wavefunction(), &run.final_state, &params).unwrap();
    println!("F = {:?} |F| = {:.9} probov = {:.9}", f.overlap, f.magnitude, f.probability_overlap);
}
