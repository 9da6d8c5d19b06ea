//! The Cesàro decay bound for martingale differences: the second-moment
//! identity, the growth bound, and T|ḡ_n| ≤ (1 + 4B²)/(2√n)·e.
//!
//! ```bash
//! cargo run --example cesaro_decay
//! ```

use mixingale::process::{independent_sequence, ProcessKind, ProcessSpec, DEFAULT_ATOM_CAP};
use mixingale::wlln::mds_cesaro_analysis;
use mixingale::Tolerance;

fn main() -> mixingale::Result<()> {
    // Twelve fair ±1 tosses: 4096 paths, everything exact.
    let spec = ProcessSpec {
        kind: ProcessKind::IndependentInnovations,
        horizon: 12,
        coefficients: vec![1.0],
        innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
        seed: 0,
    }
    .validated()?;
    let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP)?;
    let seq = independent_sequence(&ps)?;

    let (report, trace) = mds_cesaro_analysis(&seq, 1.0, &[1, 2, 4, 8, 12], Tolerance::Exact)?;
    println!("checks:\n{report}");

    println!("  n    max T|ḡ_n|        decay curve");
    let bounds = trace.bound.as_ref().expect("bound curve present");
    for ((n, value), bound) in trace.n_grid.iter().zip(trace.max_components()).zip(bounds) {
        println!("{n:>3}    {value:<14.10}    {bound:.10}");
    }
    println!("(for fair coins T(s_n²) = n·e exactly, and T|ḡ_4| = 0.375)");
    Ok(())
}
