//! Product spaces, coordinate innovations, moving averages, martingale
//! differences and partial sums.
//!
//! ```bash
//! cargo run --example processes
//! ```

use mixingale::process::{
    is_martingale, martingale_difference_from, moving_average, partial_sums, ProcessKind,
    ProcessSpec, DEFAULT_ATOM_CAP,
};
use mixingale::AdaptedSequence;

fn main() -> mixingale::Result<()> {
    // Fair ±1 coins, three tosses: 8 paths, the coordinate filtration has
    // partitions of sizes 1, 2, 4, 8.
    let spec = ProcessSpec {
        kind: ProcessKind::MovingAverage,
        horizon: 3,
        coefficients: vec![1.0, 0.5],
        innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
        seed: 0,
    }
    .validated()?;
    let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP)?;
    println!("atoms: {}", ps.space().atom_count());
    for level in 0..=3 {
        print!(
            "level {level}: {} blocks;  ",
            ps.filtration().at(level).partition().block_count()
        );
    }
    println!();

    let e2 = ps.coordinate(2)?;
    println!("ε_2 over the 8 paths: {:?}", e2.values());

    // The moving average f_i = ε_i + 0.5·ε_{i−1} and its one-step
    // prediction.
    let seq = moving_average(&ps, &spec.coefficients)?;
    let f3 = seq.term(3);
    let predicted = ps.filtration().at(2).apply(f3)?;
    println!("f_3            = {:?}", f3.values());
    println!("T_2 f_3        = {:?} (= 0.5·ε_2)", predicted.values());

    // Differencing recovers the innovations for this process.
    let diffs = martingale_difference_from(&seq)?;
    println!("g_3 = f_3 − T_2 f_3 = {:?} (= ε_3)", diffs.term(3).values());

    // Partial sums of the differences form a martingale.
    let sums = partial_sums(&diffs)?;
    let mart = AdaptedSequence::new(ps.filtration().clone(), sums[1..].to_vec())?;
    println!(
        "martingale check on partial sums:\n{}",
        is_martingale(&mart)
    );

    // The raw innovations are not a martingale.
    let innovations = mixingale::process::independent_sequence(&ps)?;
    println!("raw innovations:\n{}", is_martingale(&innovations));
    Ok(())
}
