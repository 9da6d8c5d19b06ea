//! Filtrations as refining partition chains, the tower property, and what
//! the verifier reports when refinement is broken.
//!
//! ```bash
//! cargo run --example filtration_tower
//! ```

use mixingale::conditional::{verify_filtration, Filtration, Partition};
use mixingale::lattice::SampleSpace;

fn main() -> mixingale::Result<()> {
    let space = SampleSpace::uniform(4)?;

    // Coarse-to-fine: one block, two blocks, singletons.
    let filtration = Filtration::from_partitions(
        1,
        vec![
            Partition::from_blocks(space.clone(), vec![vec![0, 1], vec![2, 3]])?,
            Partition::discrete(space.clone()),
        ],
        Partition::trivial(space.clone()),
    )?;
    println!("refining chain:");
    let report = verify_filtration(&filtration);
    print!("{report}");

    // Clamping below and above the stored window.
    println!(
        "operator blocks at index -5, 1, 2, 99: {}, {}, {}, {}",
        filtration.at(-5).partition().block_count(),
        filtration.at(1).partition().block_count(),
        filtration.at(2).partition().block_count(),
        filtration.at(99).partition().block_count(),
    );

    // Two partitions that do not refine each other break the tower
    // property, and the verifier reports the size of the violation.
    let three = SampleSpace::uniform(3)?;
    let broken = Filtration::from_partitions(
        1,
        vec![
            Partition::from_blocks(three.clone(), vec![vec![0, 1], vec![2]])?,
            Partition::from_blocks(three.clone(), vec![vec![0], vec![1, 2]])?,
        ],
        Partition::trivial(three),
    )?;
    println!("\nnon-refining chain:");
    let report = verify_filtration(&broken);
    print!("{report}");
    assert!(!report.passed());
    Ok(())
}
