use spinchain::analysis::{
    peak_prominences, plateau_onset, sweep_jprime, sweep_omega, SweepSpec, SweepVariable,
};
use spinchain::twolevel::two_pi_k_rabi;
use spinchain::{angular_from_mhz, mhz_from_angular, ChainParameters, IntegratorConfig};
use std::time::Instant;

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 0.5).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

#[test]
fn probe_jprime_sweep() {
    let base = ChainParameters::default();
    let spec = SweepSpec::new(
        SweepVariable::JPrimeRatio,
        grid(0.0, 0.1, 0.002),
        base,
        angular_from_mhz(0.1),
    )
    .unwrap();
    let t0 = Instant::now();
    let result = sweep_jprime(&spec, &IntegratorConfig::default()).unwrap();
    println!("jprime sweep ({} pts): {:?}", result.points.len(), t0.elapsed());
    let povs = result.probability_overlaps();
    let max = povs.iter().cloned().fold(f64::NAN, f64::max);
    for p in &result.points {
        println!(
            "r={:.3} |F|={:.6} pov={:.8} rel={:.5}",
            p.value,
            p.magnitude,
            p.probability_overlap,
            p.probability_overlap / max
        );
    }
    println!("plateau onset (0.99): {:?}", plateau_onset(&spec.grid, &povs, 0.99));
}

#[test]
fn probe_omega_sweep() {
    let base = ChainParameters::default();
    let spec = SweepSpec::new(
        SweepVariable::Omega,
        grid(0.07, 0.15, 0.08 / 49.0).into_iter().map(angular_from_mhz).collect(),
        base,
        angular_from_mhz(0.1),
    )
    .unwrap();
    let t0 = Instant::now();
    let result = sweep_omega(&spec, &IntegratorConfig::default()).unwrap();
    println!("omega smoke sweep ({} pts): {:?}", result.points.len(), t0.elapsed());
    let povs = result.probability_overlaps();
    for p in &result.points {
        println!(
            "omega={:.5} |F|={:.6} pov={:.8}",
            mhz_from_angular(p.value),
            p.magnitude,
            p.probability_overlap
        );
    }
    let proms = peak_prominences(&povs);
    println!("pov local maxima (omega, pov, prominence):");
    for (i, prom) in &proms {
        println!(
            "  {:.5}  pov={:.8}  prom={:.3e}",
            mhz_from_angular(spec.grid[*i]),
            povs[*i],
            prom
        );
    }
    let mags = result.magnitudes();
    println!("|F| local maxima (omega, |F|, prominence):");
    for (i, prom) in &peak_prominences(&mags) {
        println!(
            "  {:.5}  |F|={:.6}  prom={:.3e}",
            mhz_from_angular(spec.grid[*i]),
            mags[*i],
            prom
        );
    }
    for k in [3u32, 4, 5] {
        println!("L({k}) = {:.6}", two_pi_k_rabi(0.8, k).unwrap());
    }
}
