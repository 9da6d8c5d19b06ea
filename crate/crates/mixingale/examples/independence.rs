//! Conditional independence of band projections: the three-element identity
//! on product spaces, and the canonical dependent counterexample.
//!
//! ```bash
//! cargo run --example independence
//! ```

use mixingale::conditional::{independence_check, subspace_independence_check, CondExpectation};
use mixingale::lattice::{BandProjection, LatticeElement, SampleSpace, IDENTITY_TOL};
use mixingale::process::{ProcessKind, ProcessSpec, DEFAULT_ATOM_CAP};

fn main() -> mixingale::Result<()> {
    // Two independent coins with skewed probabilities.
    let spec = ProcessSpec {
        kind: ProcessKind::IndependentInnovations,
        horizon: 2,
        coefficients: vec![1.0],
        innovations: vec![(1.0, 0.3), (-1.0, 0.7)],
        seed: 0,
    }
    .validated()?;
    let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP)?;
    let t = CondExpectation::trivial(ps.space().clone());

    // Events "first coordinate is heads" and "second coordinate is heads".
    let first = ps.coordinate_partition(1)?;
    let second = ps.coordinate_partition(2)?;
    let p = first.union_projection(&[0]);
    let q = second.union_projection(&[0]);
    let report = independence_check(&p, &q, &t, IDENTITY_TOL)?;
    println!("coordinate events on the product space:\n{report}");

    // Every union of blocks on one side is independent of every union on
    // the other.
    let report = subspace_independence_check(&first, &second, &t, IDENTITY_TOL)?;
    println!("full subspace check:\n{report}");

    // The counterexample: a projection is never independent of itself
    // (unless trivial). On a fair two-point space the two sides are
    // 0.5·e and 0.25·e.
    let two = SampleSpace::new(vec![0.5, 0.5])?;
    let t2 = CondExpectation::trivial(two.clone());
    let half = BandProjection::from_mask(two.clone(), vec![true, false])?;
    let e = LatticeElement::unit(two);
    let tpqe = t2.apply(&half.intersect(&half)?.project(&e)?)?;
    let tptqe = t2.apply(&half.project(&t2.apply(&half.project(&e)?)?)?)?;
    println!(
        "dependent pair: T P Q e = {:?} but T P T Q e = {:?}",
        tpqe.values(),
        tptqe.values()
    );
    let report = independence_check(&half, &half, &t2, IDENTITY_TOL)?;
    print!("{report}");
    assert!(!report.passed());
    Ok(())
}
