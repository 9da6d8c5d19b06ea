//! Conditional expectation operators induced by partitions, filtrations over
//! a finite index window, and conditional-independence checks.
//!
//! A partition of the atoms induces the weighted block-averaging operator:
//! on each block the image is constant, equal to the weight-normalized
//! average of the input over the block. These operators are positive,
//! order-continuous projections fixing the weak order unit, and their ranges
//! are exactly the block-constant elements, so compositions, tower
//! properties and independence identities can all be verified numerically.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{check_same_space, BandProjection, LatticeElement, SampleSpace, IDENTITY_TOL};
use crate::report::Report;
use crate::util::neumaier_sum;

/// A partition of the atoms into disjoint nonempty blocks covering the space.
#[derive(Debug, Clone)]
pub struct Partition {
    space: Arc<SampleSpace>,
    /// Block id per atom; ids are dense and assigned in first-encounter order.
    block_of: Vec<u32>,
    block_count: usize,
}

impl Partition {
    /// Build from explicit blocks (lists of atom indices).
    pub fn from_blocks(space: Arc<SampleSpace>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = space.atom_count();
        let mut block_of = vec![u32::MAX; n];
        for (id, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {id} is empty")));
            }
            for &atom in block {
                if atom >= n {
                    return Err(Error::InvalidPartition(format!(
                        "atom {atom} out of range in block {id}"
                    )));
                }
                if block_of[atom] != u32::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "atom {atom} appears in two blocks"
                    )));
                }
                block_of[atom] = id as u32;
            }
        }
        if let Some(atom) = block_of.iter().position(|&b| b == u32::MAX) {
            return Err(Error::InvalidPartition(format!("atom {atom} uncovered")));
        }
        Ok(Self::relabel(space, block_of))
    }

    /// Group atoms by a label function; atoms sharing a label share a block.
    pub fn from_labels<K: std::hash::Hash + Eq>(
        space: Arc<SampleSpace>,
        label: impl Fn(usize) -> K,
    ) -> Self {
        let n = space.atom_count();
        let mut ids = std::collections::HashMap::new();
        let mut block_of = Vec::with_capacity(n);
        for atom in 0..n {
            let next = ids.len() as u32;
            let id = *ids.entry(label(atom)).or_insert(next);
            block_of.push(id);
        }
        let block_count = ids.len();
        Self {
            space,
            block_of,
            block_count,
        }
    }

    /// Internal constructor from a raw block-id array (ids made dense,
    /// first-encounter order).
    pub(crate) fn relabel(space: Arc<SampleSpace>, raw: Vec<u32>) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut block_of = Vec::with_capacity(raw.len());
        for id in raw {
            let next = remap.len() as u32;
            let dense = *remap.entry(id).or_insert(next);
            block_of.push(dense);
        }
        let block_count = remap.len();
        Self {
            space,
            block_of,
            block_count,
        }
    }

    /// The one-block partition (range of the trivial expectation).
    pub fn trivial(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            block_of: vec![0; n],
            block_count: 1,
        }
    }

    /// The partition into singletons (identity operator).
    pub fn discrete(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            block_of: (0..n as u32).collect(),
            block_count: n,
        }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom] as usize
    }

    /// Materialize the blocks as atom lists.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (atom, &b) in self.block_of.iter().enumerate() {
            blocks[b as usize].push(atom);
        }
        blocks
    }

    /// Exact structural check: every block of `self` lies inside one block of
    /// `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if !Arc::ptr_eq(&self.space, &coarser.space)
            && self.space.atom_count() != coarser.space.atom_count()
        {
            return false;
        }
        let mut image = vec![u32::MAX; self.block_count];
        for (atom, &b) in self.block_of.iter().enumerate() {
            let target = coarser.block_of[atom];
            if image[b as usize] == u32::MAX {
                image[b as usize] = target;
            } else if image[b as usize] != target {
                return false;
            }
        }
        true
    }

    /// Indicator of one block, as an element.
    pub fn block_indicator(&self, block: usize) -> LatticeElement {
        LatticeElement::indicator(self.space.clone(), |a| self.block_of[a] as usize == block)
    }

    /// Band projection onto the union of the given blocks.
    pub fn union_projection(&self, blocks: &[usize]) -> BandProjection {
        let mut member = vec![false; self.block_count];
        for &b in blocks {
            member[b] = true;
        }
        let mask = self.block_of.iter().map(|&b| member[b as usize]).collect();
        BandProjection::from_mask(self.space.clone(), mask).expect("mask has atom length")
    }
}

/// The weighted block-averaging operator of a partition.
#[derive(Debug, Clone)]
pub struct CondExpectation {
    partition: Partition,
    /// Total weight per block, precomputed.
    block_weight: Vec<f64>,
}

impl CondExpectation {
    pub fn new(partition: Partition) -> Self {
        let mut block_weight = vec![0.0; partition.block_count];
        for (atom, &b) in partition.block_of.iter().enumerate() {
            block_weight[b as usize] += partition.space.weight(atom);
        }
        Self {
            partition,
            block_weight,
        }
    }

    /// The expectation with one-dimensional range (full averaging).
    pub fn trivial(space: Arc<SampleSpace>) -> Self {
        Self::new(Partition::trivial(space))
    }

    /// The identity operator (singleton blocks).
    pub fn identity(space: Arc<SampleSpace>) -> Self {
        Self::new(Partition::discrete(space))
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.partition.space
    }

    /// Apply the operator: on each block the result is the weight-normalized
    /// average of `f` over the block.
    pub fn apply(&self, f: &LatticeElement) -> Result<LatticeElement> {
        check_same_space(self.space(), f.space())?;
        let nb = self.partition.block_count;
        // Neumaier-compensated per-block accumulation; identities downstream
        // are held to 1e-12 on spaces with up to ~1M atoms.
        let mut sums = vec![0.0_f64; nb];
        let mut comps = vec![0.0_f64; nb];
        let weights = self.partition.space.weights();
        for (atom, &v) in f.values().iter().enumerate() {
            let b = self.partition.block_of[atom] as usize;
            let term = v * weights[atom];
            let s = sums[b];
            let t = s + term;
            comps[b] += if s.abs() >= term.abs() {
                (s - t) + term
            } else {
                (term - t) + s
            };
            sums[b] = t;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&comps)
            .zip(&self.block_weight)
            .map(|((&s, &c), &w)| (s + c) / w)
            .collect();
        let values = self
            .partition
            .block_of
            .iter()
            .map(|&b| means[b as usize])
            .collect();
        LatticeElement::new(self.partition.space.clone(), values)
    }

    /// Largest within-block spread of `f`; zero exactly when `f` is in the
    /// range of the operator.
    pub fn range_violation(&self, f: &LatticeElement) -> Result<f64> {
        check_same_space(self.space(), f.space())?;
        let nb = self.partition.block_count;
        let mut lo = vec![f64::INFINITY; nb];
        let mut hi = vec![f64::NEG_INFINITY; nb];
        for (atom, &v) in f.values().iter().enumerate() {
            let b = self.partition.block_of[atom] as usize;
            lo[b] = lo[b].min(v);
            hi[b] = hi[b].max(v);
        }
        Ok(lo
            .iter()
            .zip(&hi)
            .fold(0.0, |worst, (&l, &h)| worst.max(h - l)))
    }
}

/// A family of conditional expectations indexed over a finite window of the
/// integers, together with a compatible coarsest operator.
///
/// Indices below the window clamp to the global operator's partition and
/// indices above it clamp to the finest stored level; this realizes an
/// integer-indexed filtration whose far past has stabilized to the global
/// operator.
#[derive(Debug, Clone)]
pub struct Filtration {
    index_low: i64,
    levels: Vec<CondExpectation>,
    global: CondExpectation,
    global_as_level: CondExpectation,
}

impl Filtration {
    pub fn new(
        index_low: i64,
        levels: Vec<CondExpectation>,
        global: CondExpectation,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument(
                "filtration needs at least one level".into(),
            ));
        }
        for level in &levels {
            check_same_space(level.space(), global.space())?;
        }
        let global_as_level = global.clone();
        Ok(Self {
            index_low,
            levels,
            global,
            global_as_level,
        })
    }

    pub fn from_partitions(
        index_low: i64,
        partitions: Vec<Partition>,
        global: Partition,
    ) -> Result<Self> {
        Self::new(
            index_low,
            partitions.into_iter().map(CondExpectation::new).collect(),
            CondExpectation::new(global),
        )
    }

    pub fn index_low(&self) -> i64 {
        self.index_low
    }

    pub fn index_high(&self) -> i64 {
        self.index_low + self.levels.len() as i64 - 1
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        self.global.space()
    }

    /// The compatible coarsest operator.
    pub fn global(&self) -> &CondExpectation {
        &self.global
    }

    /// The operator at index `i`, clamped to the stored window: below the
    /// window the global operator is returned, above it the finest level.
    pub fn at(&self, i: i64) -> &CondExpectation {
        if i < self.index_low {
            &self.global_as_level
        } else {
            let offset = (i - self.index_low) as usize;
            let offset = offset.min(self.levels.len() - 1);
            &self.levels[offset]
        }
    }
}

/// Numerically verify the filtration laws: for stored indices `i ≤ j` the
/// compositions satisfy `T_i T_j = T_i = T_j T_i`, and every level is
/// compatible with the global operator.
///
/// Probes are the full indicator basis on small spaces and seeded random
/// elements (plus the unit) on large ones; index pairs are enumerated
/// exhaustively for small windows and sampled (always including adjacent
/// pairs) for large ones. Violations are reported, never thrown.
pub fn verify_filtration(filt: &Filtration) -> Report {
    let mut report = Report::new();
    let space = filt.space().clone();
    let n = space.atom_count();
    let levels = filt.level_count();

    let probes: Vec<LatticeElement> = if n <= 64 {
        let mut basis: Vec<LatticeElement> = (0..n)
            .map(|a| LatticeElement::indicator(space.clone(), |x| x == a))
            .collect();
        basis.push(LatticeElement::unit(space.clone()));
        basis
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x746f776572);
        let count = if n > 4096 { 4 } else { 8 };
        let mut probes: Vec<LatticeElement> = (0..count)
            .map(|_| {
                let values = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                LatticeElement::new(space.clone(), values).expect("finite values")
            })
            .collect();
        probes.push(LatticeElement::unit(space.clone()));
        probes
    };

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if levels * (levels - 1) / 2 <= 1024 {
        for i in 0..levels {
            for j in (i + 1)..levels {
                pairs.push((i, j));
            }
        }
    } else {
        for i in 0..levels - 1 {
            pairs.push((i, i + 1));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x70616972);
        for _ in 0..64 {
            let i = rng.random_range(0..levels - 1);
            let j = rng.random_range(i + 1..levels);
            pairs.push((i, j));
        }
    }

    let mut tower_worst = 0.0_f64;
    let mut tower_at = None;
    for &(i, j) in &pairs {
        let ti = filt.at(filt.index_low() + i as i64);
        let tj = filt.at(filt.index_low() + j as i64);
        for f in &probes {
            let tjf = tj.apply(f).expect("same space");
            let tif = ti.apply(f).expect("same space");
            let ti_tj = ti.apply(&tjf).expect("same space");
            let tj_ti = tj.apply(&tif).expect("same space");
            let gap = ti_tj
                .max_abs_diff(&tif)
                .expect("same space")
                .max(tj_ti.max_abs_diff(&tif).expect("same space"));
            if gap > tower_worst {
                tower_worst = gap;
                tower_at = Some((filt.index_low() + i as i64, filt.index_low() + j as i64));
            }
        }
    }
    match tower_at {
        Some((i, j)) => report.record_with(
            "tower-property",
            tower_worst,
            IDENTITY_TOL,
            format!("indices ({i}, {j})"),
        ),
        None => report.record("tower-property", tower_worst, IDENTITY_TOL),
    }

    let t = filt.global();
    let mut compat_worst = 0.0_f64;
    let mut compat_at = None;
    for i in 0..levels {
        let ti = filt.at(filt.index_low() + i as i64);
        for f in &probes {
            let tf = t.apply(f).expect("same space");
            let ti_t = ti.apply(&tf).expect("same space");
            let t_ti = t
                .apply(&ti.apply(f).expect("same space"))
                .expect("same space");
            let gap = ti_t
                .max_abs_diff(&tf)
                .expect("same space")
                .max(t_ti.max_abs_diff(&tf).expect("same space"));
            if gap > compat_worst {
                compat_worst = gap;
                compat_at = Some(filt.index_low() + i as i64);
            }
        }
    }
    match compat_at {
        Some(i) => report.record_with(
            "global-compatibility",
            compat_worst,
            IDENTITY_TOL,
            format!("index {i}"),
        ),
        None => report.record("global-compatibility", compat_worst, IDENTITY_TOL),
    }

    report
}

/// Verify the averaging identity `T(f·g) = f·(T g)` for `f` in the range of
/// `T`. An `f` outside the range is a precondition error.
pub fn averaging_check(
    t: &CondExpectation,
    f: &LatticeElement,
    g: &LatticeElement,
) -> Result<Report> {
    let spread = t.range_violation(f)?;
    if spread > IDENTITY_TOL {
        return Err(Error::Precondition(format!(
            "f is not block-constant for the operator's partition (spread {spread:.3e})"
        )));
    }
    let lhs = t.apply(&f.multiply(g)?)?;
    let rhs = f.multiply(&t.apply(g)?)?;
    let mut report = Report::new();
    report.record("averaging-identity", lhs.max_abs_diff(&rhs)?, IDENTITY_TOL);
    Ok(report)
}

/// Check conditional independence of two band projections with respect to
/// `t`: the three elements `T P T Q e`, `T P Q e`, `T Q T P e` must coincide
/// within `tol` (use [`IDENTITY_TOL`] on exact backends).
pub fn independence_check(
    p: &BandProjection,
    q: &BandProjection,
    t: &CondExpectation,
    tol: f64,
) -> Result<Report> {
    let gap = independence_gap(p, q, t)?;
    let mut report = Report::new();
    report.record("conditional-independence", gap, tol);
    Ok(report)
}

/// Largest componentwise gap among the two equalities of the independence
/// identity.
pub fn independence_gap(
    p: &BandProjection,
    q: &BandProjection,
    t: &CondExpectation,
) -> Result<f64> {
    let e = LatticeElement::unit(t.space().clone());
    let tqe = t.apply(&q.project(&e)?)?;
    let lhs = t.apply(&p.project(&tqe)?)?;
    let mid = t.apply(&p.intersect(q)?.project(&e)?)?;
    let tpe = t.apply(&p.project(&e)?)?;
    let rhs = t.apply(&q.project(&tpe)?)?;
    Ok(lhs.max_abs_diff(&mid)?.max(mid.max_abs_diff(&rhs)?))
}

/// Verify conditional independence of the subspaces generated by two
/// partitions: every band projection built from unions of `a`-blocks must be
/// independent of every one built from unions of `b`-blocks.
///
/// Both sides of the identity are additive over disjoint masks, so block
/// pairs carry the essential content; unions are enumerated exhaustively
/// when `2^|a| · 2^|b|` stays below a small cap and sampled otherwise.
pub fn subspace_independence_check(
    a: &Partition,
    b: &Partition,
    t: &CondExpectation,
    tol: f64,
) -> Result<Report> {
    check_same_space(a.space(), t.space())?;
    check_same_space(b.space(), t.space())?;
    let ka = a.block_count();
    let kb = b.block_count();

    let mut worst = 0.0_f64;
    let mut worst_at = String::new();
    let mut observe = |gap: f64, desc: String| {
        if gap > worst {
            worst = gap;
            worst_at = desc;
        }
    };

    let exhaustive = ka <= 16 && kb <= 16 && (1u64 << ka) * (1u64 << kb) <= 4096;
    if exhaustive {
        for ma in 0..(1u32 << ka) {
            let blocks_a: Vec<usize> = (0..ka).filter(|&i| ma >> i & 1 == 1).collect();
            let pa = a.union_projection(&blocks_a);
            for mb in 0..(1u32 << kb) {
                let blocks_b: Vec<usize> = (0..kb).filter(|&i| mb >> i & 1 == 1).collect();
                let pb = b.union_projection(&blocks_b);
                let gap = independence_gap(&pa, &pb, t)?;
                observe(gap, format!("a-union {blocks_a:?} vs b-union {blocks_b:?}"));
            }
        }
    } else {
        for ia in 0..ka {
            let pa = a.union_projection(&[ia]);
            for ib in 0..kb {
                let pb = b.union_projection(&[ib]);
                let gap = independence_gap(&pa, &pb, t)?;
                observe(gap, format!("a-block {ia} vs b-block {ib}"));
            }
        }
        // Closure under unions, spot-checked on seeded random unions.
        let mut rng = ChaCha8Rng::seed_from_u64(0x756e696f6e);
        for _ in 0..32 {
            let blocks_a: Vec<usize> = (0..ka).filter(|_| rng.random_range(0..2) == 1).collect();
            let blocks_b: Vec<usize> = (0..kb).filter(|_| rng.random_range(0..2) == 1).collect();
            let pa = a.union_projection(&blocks_a);
            let pb = b.union_projection(&blocks_b);
            let gap = independence_gap(&pa, &pb, t)?;
            observe(gap, format!("a-union {blocks_a:?} vs b-union {blocks_b:?}"));
        }
    }

    let mut report = Report::new();
    if worst_at.is_empty() {
        report.record("subspace-independence", worst, tol);
    } else {
        report.record_with("subspace-independence", worst, tol, worst_at);
    }
    Ok(report)
}

/// Desk-scale order continuity: for a nonnegative chain decreasing to zero
/// componentwise, the images under `t` must decrease to zero as well.
pub fn order_continuity_check(t: &CondExpectation, chain: &[LatticeElement]) -> Result<Report> {
    let mut report = Report::new();
    let mut monotone = 0.0_f64;
    let mut images = Vec::with_capacity(chain.len());
    for (k, f) in chain.iter().enumerate() {
        if f.nonnegativity_violation() > 0.0 {
            return Err(Error::Precondition(format!(
                "chain element {k} is not nonnegative"
            )));
        }
        if k + 1 < chain.len() {
            monotone = monotone.max(chain[k + 1].le_violation(f)?.0);
        }
        images.push(t.apply(f)?);
    }
    if monotone > 0.0 {
        return Err(Error::Precondition(format!(
            "chain is not decreasing (gap {monotone:.3e})"
        )));
    }
    let mut image_monotone = 0.0_f64;
    for k in 0..images.len().saturating_sub(1) {
        image_monotone = image_monotone.max(images[k + 1].le_violation(&images[k])?.0);
    }
    report.record("order-continuity-monotone", image_monotone, IDENTITY_TOL);
    if let (Some(last_f), Some(last_img)) = (chain.last(), images.last()) {
        let excess = (last_img.norm_inf() - last_f.norm_inf()).max(0.0);
        report.record("order-continuity-limit", excess, IDENTITY_TOL);
    }
    Ok(report)
}

/// Weighted total of a block, used by tests and diagnostics.
pub fn block_weight(partition: &Partition, block: usize) -> f64 {
    neumaier_sum(
        (0..partition.space().atom_count())
            .filter(|&a| partition.block_of(a) == block)
            .map(|a| partition.space().weight(a)),
    )
}
