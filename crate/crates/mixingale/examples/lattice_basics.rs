//! Elements of the lattice: componentwise order, the f-algebra product,
//! band projections and truncation.
//!
//! ```bash
//! cargo run --example lattice_basics
//! ```

use mixingale::lattice::{signum_unit, BandProjection, LatticeElement, SampleSpace};

fn main() -> mixingale::Result<()> {
    // Three atoms with weights (0.2, 0.3, 0.5).
    let space = SampleSpace::new(vec![0.2, 0.3, 0.5])?;
    let f = LatticeElement::new(space.clone(), vec![2.0, -1.0, 0.5])?;
    let g = LatticeElement::new(space.clone(), vec![0.0, 3.0, 0.5])?;

    println!("f        = {:?}", f.values());
    println!("g        = {:?}", g.values());
    println!("f ∨ g    = {:?}", f.sup(&g)?.values());
    println!("f ∧ g    = {:?}", f.inf(&g)?.values());
    println!("|f|      = {:?}", f.abs().values());
    println!(
        "f⁺ − f⁻  = {:?} (the Jordan decomposition returns f)",
        f.positive_part().sub(&f.negative_part())?.values()
    );

    // The componentwise product makes the space an f-algebra with unit e.
    let e = LatticeElement::unit(space.clone());
    println!("f · g    = {:?}", f.multiply(&g)?.values());
    println!("f · e    = {:?}", f.multiply(&e)?.values());

    // Bands are atom subsets; the band generated by g is its support.
    let p = BandProjection::from_element(&g);
    println!("support of g   : {:?}", p.mask());
    println!("P f            = {:?}", p.project(&f)?.values());
    println!("(I − P) f      = {:?}", p.reject(&f)?.values());

    // Truncation at level c keeps the atoms where |f| exceeds c; the rest
    // stays bounded by c.
    let trunc = BandProjection::truncation(&f, 1.0)?;
    let spill = trunc.project(&f)?;
    let kept = trunc.reject(&f)?;
    println!(
        "truncation at 1: spill = {:?}, bounded part = {:?}",
        spill.values(),
        kept.values()
    );
    assert!(kept.norm_inf() <= 1.0);

    // The signed unit turns absolute values into products.
    let j = signum_unit(&f);
    println!("J e      = {:?}", j.values());
    println!("(J e)·f  = {:?} (= |f|)", j.multiply(&f)?.values());
    assert_eq!(j.multiply(&j)?.values(), e.values());
    Ok(())
}
