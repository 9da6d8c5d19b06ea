//! Finite weighted sample spaces and the vector lattice of real functions on
//! them.
//!
//! The carrier is the space of real vectors indexed by the atoms of a
//! [`SampleSpace`], ordered componentwise. In this model every lattice axiom
//! (Dedekind completeness, the Archimedean property, order continuity) holds
//! automatically, suprema are finite maxima, and every band is the set of
//! elements supported on a fixed atom subset — so a band projection is a
//! boolean mask. The componentwise product makes the space an f-algebra with
//! the all-ones element [`SampleSpace::unit`] as multiplicative unit.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::util::neumaier_sum;

/// Absolute per-component tolerance for exact lattice identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for the probability-weight normalization of a space.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finite set of atoms with strictly positive probability weights.
#[derive(Debug)]
pub struct SampleSpace {
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl SampleSpace {
    /// Build a space from strictly positive weights summing to one.
    pub fn new(weights: Vec<f64>) -> Result<Arc<Self>> {
        Self::validate(&weights)?;
        Ok(Arc::new(Self {
            weights,
            labels: None,
        }))
    }

    /// Build a space with human-readable atom labels.
    pub fn with_labels(labels: Vec<String>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels for {} weights",
                labels.len(),
                weights.len()
            )));
        }
        Self::validate(&weights)?;
        Ok(Arc::new(Self {
            weights,
            labels: Some(labels),
        }))
    }

    /// Uniform space on `atoms` atoms.
    pub fn uniform(atoms: usize) -> Result<Arc<Self>> {
        if atoms == 0 {
            return Err(Error::InvalidSpace("no atoms".into()));
        }
        let w = 1.0 / atoms as f64;
        // Weights are identical by construction; normalization holds exactly
        // up to one rounding of 1/n, well within tolerance.
        Ok(Arc::new(Self {
            weights: vec![w; atoms],
            labels: None,
        }))
    }

    fn validate(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("no atoms".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidSpace(format!("weight {w} at atom {i}")));
            }
        }
        let total = neumaier_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpace(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    /// Label of an atom; synthesized from the index when none was provided.
    pub fn label(&self, atom: usize) -> String {
        match &self.labels {
            Some(labels) => labels[atom].clone(),
            None => format!("atom{atom}"),
        }
    }
}

/// Two spaces are compatible when they are the same object or structurally
/// identical; anything else is a dimension error.
pub(crate) fn check_same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        return Ok(());
    }
    if a.atom_count() != b.atom_count() || a.weights != b.weights {
        return Err(Error::SpaceMismatch {
            left: a.atom_count(),
            right: b.atom_count(),
        });
    }
    Ok(())
}

/// An element of the lattice: one real value per atom. Immutable after
/// construction; every operation returns a new element.
#[derive(Debug, Clone)]
pub struct LatticeElement {
    space: Arc<SampleSpace>,
    values: Vec<f64>,
}

impl LatticeElement {
    pub fn new(space: Arc<SampleSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.atom_count() {
            return Err(Error::SpaceMismatch {
                left: space.atom_count(),
                right: values.len(),
            });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value {v} at atom {i}"
            )));
        }
        Ok(Self { space, values })
    }

    /// The constant element `x·e`.
    pub fn constant(space: Arc<SampleSpace>, x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite constant {x}")));
        }
        let n = space.atom_count();
        Ok(Self {
            space,
            values: vec![x; n],
        })
    }

    /// The weak order unit `e` (all ones).
    pub fn unit(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            values: vec![1.0; n],
        }
    }

    pub fn zero(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            values: vec![0.0; n],
        }
    }

    /// Indicator of the atoms where `pred` holds.
    pub fn indicator(space: Arc<SampleSpace>, pred: impl Fn(usize) -> bool) -> Self {
        let values = (0..space.atom_count())
            .map(|a| if pred(a) { 1.0 } else { 0.0 })
            .collect();
        Self { space, values }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same_space(&self.space, &other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            space: self.space.clone(),
            values,
        })
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Componentwise (f-algebra) product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b)
    }

    /// Componentwise supremum `f ∨ g`.
    pub fn sup(&self, other: &Self) -> Result<Self> {
        self.zip(other, f64::max)
    }

    /// Componentwise infimum `f ∧ g`.
    pub fn inf(&self, other: &Self) -> Result<Self> {
        self.zip(other, f64::min)
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|a| alpha * a)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    /// Absolute value `|f| = f ∨ (−f)`.
    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// Positive part `f⁺ = f ∨ 0`.
    pub fn positive_part(&self) -> Self {
        self.map(|a| a.max(0.0))
    }

    /// Negative part `f⁻ = (−f) ∨ 0`.
    pub fn negative_part(&self) -> Self {
        self.map(|a| (-a).max(0.0))
    }

    /// Largest absolute component.
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise gap `max_ω |f(ω) − g(ω)|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_space(&self.space, &other.space)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// How much `self ≤ other` fails: `max(0, max_ω (f(ω) − g(ω)))`,
    /// together with the atom realizing it.
    pub fn le_violation(&self, other: &Self) -> Result<(f64, usize)> {
        check_same_space(&self.space, &other.space)?;
        let mut worst = 0.0;
        let mut at = 0;
        for (i, (&a, &b)) in self.values.iter().zip(&other.values).enumerate() {
            let gap = a - b;
            if gap > worst {
                worst = gap;
                at = i;
            }
        }
        Ok((worst, at))
    }

    /// How much `self ≥ 0` fails.
    pub fn nonnegativity_violation(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(-v))
    }

    /// Weighted expectation `Σ_ω w(ω) f(ω)` (the trivial conditional
    /// expectation collapsed to a scalar).
    pub fn expectation(&self) -> f64 {
        neumaier_sum(
            self.values
                .iter()
                .zip(self.space.weights())
                .map(|(&v, &w)| v * w),
        )
    }
}

/// A band projection: the positive projection onto the elements supported on
/// a fixed atom subset, represented by a per-atom mask.
#[derive(Debug, Clone)]
pub struct BandProjection {
    space: Arc<SampleSpace>,
    mask: Vec<bool>,
}

impl BandProjection {
    pub fn from_mask(space: Arc<SampleSpace>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != space.atom_count() {
            return Err(Error::SpaceMismatch {
                left: space.atom_count(),
                right: mask.len(),
            });
        }
        Ok(Self { space, mask })
    }

    /// Projection onto the principal band generated by `g`: the mask is the
    /// support of `|g|`. The zero element yields the zero projection and the
    /// weak order unit yields the identity.
    pub fn from_element(g: &LatticeElement) -> Self {
        Self {
            space: g.space().clone(),
            mask: g.values().iter().map(|&v| v != 0.0).collect(),
        }
    }

    /// Projection onto the band generated by `(|f| − c·e)⁺`: the mask holds
    /// exactly where `|f(ω)| > c` (strict, because the positive part vanishes
    /// where `|f| = c`). The complement then satisfies `(I−P)|f| ≤ c·e`.
    pub fn truncation(f: &LatticeElement, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "truncation level must be nonnegative, got {c}"
            )));
        }
        Ok(Self {
            space: f.space().clone(),
            mask: f.values().iter().map(|&v| v.abs() > c).collect(),
        })
    }

    pub fn identity(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            mask: vec![true; n],
        }
    }

    pub fn zero(space: Arc<SampleSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            mask: vec![false; n],
        }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Apply the projection: zero outside the band's support.
    pub fn project(&self, f: &LatticeElement) -> Result<LatticeElement> {
        check_same_space(&self.space, f.space())?;
        let values = f
            .values()
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        LatticeElement::new(self.space.clone(), values)
    }

    /// Apply the complement `(I − P)`.
    pub fn reject(&self, f: &LatticeElement) -> Result<LatticeElement> {
        check_same_space(&self.space, f.space())?;
        let values = f
            .values()
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| if m { 0.0 } else { v })
            .collect();
        LatticeElement::new(self.space.clone(), values)
    }

    /// The complementary band projection `I − P`.
    pub fn complement(&self) -> Self {
        Self {
            space: self.space.clone(),
            mask: self.mask.iter().map(|&m| !m).collect(),
        }
    }

    /// Composition `PQ` of two band projections (mask intersection).
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        check_same_space(&self.space, &other.space)?;
        Ok(Self {
            space: self.space.clone(),
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && b)
                .collect(),
        })
    }

    /// Union of bands (mask union); with [`Self::intersect`] this generates
    /// the Boolean algebra of band projections used by independence checks.
    pub fn union(&self, other: &Self) -> Result<Self> {
        check_same_space(&self.space, &other.space)?;
        Ok(Self {
            space: self.space.clone(),
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }

    /// The image `P e` of the weak order unit, as an element.
    pub fn unit_image(&self) -> LatticeElement {
        LatticeElement {
            space: self.space.clone(),
            values: self
                .mask
                .iter()
                .map(|&m| if m { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// The signed unit `J e` where `J = 2·P − I` and `P` projects onto the band
/// generated by `f⁺`: `+1` where `f > 0`, `−1` elsewhere. It satisfies
/// `(J e)·(J e) = e` and `(J e)·f = |f|`.
pub fn signum_unit(f: &LatticeElement) -> LatticeElement {
    let values = f
        .values()
        .iter()
        .map(|&v| if v > 0.0 { 1.0 } else { -1.0 })
        .collect();
    LatticeElement {
        space: f.space().clone(),
        values,
    }
}
