//! The full weak-law pipeline: certify a mixingale, verify the
//! decomposition bound chain, and watch T|f̄_n| decay.
//!
//! ```bash
//! cargo run --example wlln_experiment
//! ```

use mixingale::lattice::LatticeElement;
use mixingale::mixingale::{minimal_phi, MixingaleCertificate};
use mixingale::process::{moving_average, ProcessKind, ProcessSpec, DEFAULT_ATOM_CAP};
use mixingale::wlln::{wlln_experiment, wlln_statistical, Schedule};
use mixingale::Tolerance;

fn main() -> mixingale::Result<()> {
    // Exhaustive run: a one-step moving average over 14 fair coins.
    let spec = ProcessSpec {
        kind: ProcessKind::MovingAverage,
        horizon: 14,
        coefficients: vec![1.0, 0.5],
        innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
        seed: 20260810,
    }
    .validated()?;
    let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP)?;
    let seq = moving_average(&ps, &spec.coefficients)?;

    let c: Vec<LatticeElement> = (0..seq.len())
        .map(|_| LatticeElement::unit(ps.space().clone()))
        .collect();
    let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 3, Tolerance::Exact)?;
    println!("certificate: Φ = {phi:?}, c_i = e");
    let cert = MixingaleCertificate {
        c,
        phi,
        phi_tail_zero: false,
    };

    let schedule = Schedule {
        n_grid: vec![2, 4, 8, 14],
        m_grid: vec![1, 2],
        b_grid: vec![0.5, 1.0, 2.0],
        decay_threshold: 0.4,
    };
    let outcome = wlln_experiment(&seq, &cert, &schedule, Tolerance::Exact)?;
    println!("exhaustive checks:\n{}", outcome.report);
    println!("  n    max T|f̄_n|     best decomposition bound");
    let bounds = outcome.trace.bound.as_ref().expect("bounds present");
    for ((n, value), bound) in outcome
        .trace
        .n_grid
        .iter()
        .zip(outcome.trace.max_components())
        .zip(bounds)
    {
        println!("{n:>3}    {value:<12.8}   {bound:.8}");
    }

    // Statistical run far beyond the atom cap: the distribution-free
    // checks and the decay trace at n = 1024.
    let long = ProcessSpec {
        horizon: 1024,
        ..spec.clone()
    };
    let trials = 20_000;
    let ps = long.build_monte_carlo(trials)?;
    let seq = moving_average(&ps, &long.coefficients)?;
    let schedule = Schedule {
        n_grid: vec![64, 256, 1024],
        m_grid: vec![1],
        b_grid: vec![2.0],
        decay_threshold: 0.05,
    };
    let outcome = wlln_statistical(&seq, &schedule, Tolerance::Statistical { trials })?;
    println!("\nmonte-carlo decay ({} trials):", trials);
    for (n, value) in outcome
        .trace
        .n_grid
        .iter()
        .zip(outcome.trace.max_components())
    {
        println!("  n = {n:>4}: max T|f̄_n| = {value:.6}");
    }
    println!("{}", outcome.report);
    Ok(())
}
