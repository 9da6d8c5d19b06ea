//! Dependence certificates: checking the defining inequalities, extracting
//! the minimal dependence numbers, and the mean-zero consequence.
//!
//! ```bash
//! cargo run --example mixingale_numbers
//! ```

use mixingale::lattice::LatticeElement;
use mixingale::mixingale::{check_mixingale, minimal_phi, t_mean_zero_check, MixingaleCertificate};
use mixingale::process::{moving_average, ProcessKind, ProcessSpec, DEFAULT_ATOM_CAP};
use mixingale::Tolerance;

fn main() -> mixingale::Result<()> {
    let spec = ProcessSpec {
        kind: ProcessKind::MovingAverage,
        horizon: 6,
        coefficients: vec![1.0, 0.5],
        innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
        seed: 0,
    }
    .validated()?;
    let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP)?;
    let seq = moving_average(&ps, &spec.coefficients)?;

    // The least numbers with unit magnitudes: the one-step memory of the
    // process shows up as Φ_1 = 0.5, everything beyond is exactly zero.
    let c: Vec<LatticeElement> = (0..seq.len())
        .map(|_| LatticeElement::unit(ps.space().clone()))
        .collect();
    let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 4, Tolerance::Exact)?;
    println!("minimal dependence numbers: {phi:?}");

    // The minimal numbers certify the sequence.
    let cert = MixingaleCertificate {
        c: c.clone(),
        phi,
        phi_tail_zero: false,
    };
    let report = check_mixingale(seq.terms(), seq.filtration(), &cert, 3, Tolerance::Exact)?;
    println!("round trip:\n{report}");

    // Understating the dependence fails, and the report names the cell.
    let tight = MixingaleCertificate {
        c,
        phi: vec![0.4],
        phi_tail_zero: true,
    };
    let report = check_mixingale(seq.terms(), seq.filtration(), &tight, 3, Tolerance::Exact)?;
    println!("with Φ_1 = 0.4 (below the minimal 0.5):\n{report}");
    assert!(!report.passed());

    // Certified sequences are conditionally mean zero.
    let report = t_mean_zero_check(seq.terms(), seq.filtration(), Tolerance::Exact)?;
    println!("mean-zero consequence:\n{report}");
    Ok(())
}
