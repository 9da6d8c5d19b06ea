//! Truncation envelopes: the order analogue of uniform integrability, and
//! the boundedness it implies.
//!
//! ```bash
//! cargo run --example uniformity
//! ```

use mixingale::conditional::CondExpectation;
use mixingale::lattice::{LatticeElement, SampleSpace};
use mixingale::mixingale::{uniform_family_bound_check, uniformity_profile};

fn main() -> mixingale::Result<()> {
    let space = SampleSpace::uniform(4)?;
    let t = CondExpectation::trivial(space.clone());
    let family = vec![
        LatticeElement::new(space.clone(), vec![1.0, -3.0, 0.5, 2.0])?,
        LatticeElement::new(space.clone(), vec![0.0, 4.0, -1.0, 1.0])?,
        LatticeElement::new(space, vec![2.0, 2.0, -2.0, 0.5])?,
    ];

    // envelope(c) = sup over the family of T P_{(|f|−ce)⁺} |f|: the
    // conditional mass of each member above level c. It is componentwise
    // nonincreasing and hits zero once c clears the family bound.
    let grid = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
    let profile = uniformity_profile(&family, &t, &grid)?;
    println!("level   envelope (max component)");
    for (c, value) in profile.c_grid.iter().zip(profile.max_components()) {
        println!("{c:>5}   {value:.6}");
    }
    assert_eq!(profile.monotone_violation, 0.0);

    // Decaying envelopes bound the conditional absolute values: at the
    // first vanishing level K, every T|f| sits under envelope(K) + K·e.
    let report = uniform_family_bound_check(&profile, &family, &t, 1e-8)?;
    println!("\nboundedness consequence:\n{report}");
    Ok(())
}
