//! Conditional expectation as weighted block averaging, with the averaging
//! identity and the contraction property.
//!
//! ```bash
//! cargo run --example conditional_expectation
//! ```

use mixingale::conditional::{averaging_check, CondExpectation, Partition};
use mixingale::lattice::{LatticeElement, SampleSpace};

fn main() -> mixingale::Result<()> {
    let space = SampleSpace::new(vec![0.1, 0.2, 0.3, 0.4])?;
    let partition = Partition::from_blocks(space.clone(), vec![vec![0, 1], vec![2, 3]])?;
    let t = CondExpectation::new(partition.clone());

    let f = LatticeElement::new(space.clone(), vec![10.0, 1.0, 0.0, 5.0])?;
    let tf = t.apply(&f)?;
    println!("f   = {:?}", f.values());
    println!("T f = {:?}", tf.values());
    println!("  (block means: (0.1·10 + 0.2·1)/0.3 = 4 and (0.3·0 + 0.4·5)/0.7 = 20/7)");

    // T is a projection fixing the unit.
    let e = LatticeElement::unit(space.clone());
    assert!(t.apply(&tf)?.max_abs_diff(&tf)? <= 1e-12);
    assert!(t.apply(&e)?.max_abs_diff(&e)? <= 1e-12);
    println!("T² f = T f and T e = e hold.");

    // Averaging: block-constant factors pull out of T.
    let indicator = partition.block_indicator(0);
    let g = LatticeElement::new(space, vec![3.0, -1.0, 2.0, 5.0])?;
    let report = averaging_check(&t, &indicator, &g)?;
    println!("averaging identity T(fg) = f·Tg for f in range(T):\n{report}");

    // Contraction: |T f| ≤ T |f| componentwise.
    let contraction = tf.abs().le_violation(&t.apply(&f.abs())?)?;
    println!("contraction |Tf| ≤ T|f| violation: {:.3e}", contraction.0);
    Ok(())
}
