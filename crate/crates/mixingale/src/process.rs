//! Construction of adapted sequences, martingales and martingale difference
//! sequences on product sample spaces.
//!
//! Two backends realize a process specification:
//!
//! * **exhaustive** — the space of all innovation paths with product weights,
//!   exact up to a configurable atom cap;
//! * **monte-carlo** — a seeded empirical space whose atoms are sampled
//!   paths with weight `1/trials`. All lattice identities hold exactly on
//!   the empirical space as well; only the values of expectation-type
//!   quantities become estimates, accurate to a few standard errors.
//!
//! Either way the coordinate filtration is the family of partitions by path
//! prefixes, with the trivial expectation as compatible global operator.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditional::{CondExpectation, Filtration, Partition};
use crate::error::{Error, Result};
use crate::lattice::{LatticeElement, SampleSpace};
use crate::report::Report;
use crate::util::weighted_std;

/// Default cap on exhaustive product-space enumeration.
pub const DEFAULT_ATOM_CAP: usize = 1 << 20;

/// Adaptedness and martingale identities are held to this tolerance.
pub const ADAPTED_TOL: f64 = 1e-12;

/// Kinds of canonical processes buildable from a specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    /// `f_i = ε_i`: the innovations themselves.
    IndependentInnovations,
    /// `f_i = Σ_k θ_k ε_{i−k}`, terms with `i−k < 1` dropped.
    MovingAverage,
    /// The martingale differences `f_i − T_{i−1} f_i` of the moving average.
    MartingaleDifference,
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::IndependentInnovations => "independent-innovations",
            ProcessKind::MovingAverage => "moving-average",
            ProcessKind::MartingaleDifference => "martingale-difference",
        }
    }
}

/// Specification of a process experiment: innovation distribution, horizon,
/// coefficients and the seed driving the monte-carlo backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub horizon: usize,
    /// Moving-average coefficients `θ_0..θ_q`.
    #[serde(default = "default_coefficients")]
    pub coefficients: Vec<f64>,
    /// Finite innovation support as `(value, probability)` pairs.
    #[serde(default = "default_innovations")]
    pub innovations: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

fn default_coefficients() -> Vec<f64> {
    vec![1.0]
}

fn default_innovations() -> Vec<(f64, f64)> {
    vec![(1.0, 0.5), (-1.0, 0.5)]
}

impl ProcessSpec {
    /// Validate the specification, normalizing the innovation probabilities.
    pub fn validated(mut self) -> Result<Self> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.innovations.is_empty() {
            return Err(Error::InvalidArgument(
                "innovation support must be nonempty".into(),
            ));
        }
        let mut total = 0.0;
        for &(value, prob) in &self.innovations {
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite innovation value {value}"
                )));
            }
            if !prob.is_finite() || prob <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "innovation probability {prob} must be strictly positive"
                )));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "innovation probabilities sum to {total}, expected 1"
            )));
        }
        for pair in &mut self.innovations {
            pair.1 /= total;
        }
        if matches!(
            self.kind,
            ProcessKind::MovingAverage | ProcessKind::MartingaleDifference
        ) {
            if self.coefficients.is_empty() {
                return Err(Error::InvalidArgument(
                    "moving-average coefficients must be nonempty".into(),
                ));
            }
            if let Some(c) = self.coefficients.iter().find(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {c}"
                )));
            }
        }
        Ok(self)
    }

    /// Number of atoms the exhaustive backend would need.
    pub fn exhaustive_atoms(&self) -> u128 {
        (self.innovations.len() as u128)
            .checked_pow(self.horizon as u32)
            .unwrap_or(u128::MAX)
    }

    /// Build the exhaustive product space of all innovation paths.
    pub fn build_exhaustive(&self, atom_cap: usize) -> Result<ProcessSpace> {
        let required = self.exhaustive_atoms();
        if required > atom_cap as u128 {
            return Err(Error::AtomCapExceeded {
                required,
                cap: atom_cap,
            });
        }
        let base = self.innovations.len();
        let horizon = self.horizon;
        let atoms = required as usize;

        let probs: Vec<f64> = self.innovations.iter().map(|&(_, p)| p).collect();
        let mut weights = vec![0.0_f64; atoms];
        for (atom, w) in weights.iter_mut().enumerate() {
            let mut acc = 1.0;
            let mut rest = atom;
            for _ in 0..horizon {
                // Digits most-significant-first: the first coordinate varies
                // slowest, so paths are enumerated in lexicographic order.
                acc *= probs[rest / pow_usize(base, horizon - 1) % base];
                rest = rest % pow_usize(base, horizon - 1) * base;
            }
            *w = acc;
        }
        let space = SampleSpace::new(weights)?;

        let mut partitions = Vec::with_capacity(horizon + 1);
        for level in 0..=horizon {
            let divisor = pow_usize(base, horizon - level);
            let block_of: Vec<u32> = (0..atoms).map(|a| (a / divisor) as u32).collect();
            partitions.push(Partition::relabel(space.clone(), block_of));
        }
        let filtration = Arc::new(Filtration::from_partitions(
            0,
            partitions,
            Partition::trivial(space.clone()),
        )?);

        Ok(ProcessSpace {
            space,
            filtration,
            support_values: self.innovations.iter().map(|&(v, _)| v).collect(),
            digits: Digits::Dense { base, horizon },
            backend: BackendInfo::Exhaustive,
        })
    }

    /// Sample an empirical product space of `trials` seeded innovation paths.
    pub fn build_monte_carlo(&self, trials: usize) -> Result<ProcessSpace> {
        if trials < 2 {
            return Err(Error::InvalidArgument(
                "monte-carlo backend needs at least 2 trials".into(),
            ));
        }
        let base = self.innovations.len();
        let horizon = self.horizon;
        let mut cumulative = Vec::with_capacity(base);
        let mut acc = 0.0;
        for &(_, p) in &self.innovations {
            acc += p;
            cumulative.push(acc);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut flat = vec![0u16; trials * horizon];
        for digit in flat.iter_mut() {
            let r: f64 = rng.random();
            let mut d = base - 1;
            for (k, &c) in cumulative.iter().enumerate() {
                if r < c {
                    d = k;
                    break;
                }
            }
            *digit = d as u16;
        }

        let space = SampleSpace::new(vec![1.0 / trials as f64; trials])?;

        // Prefix partitions, refined level by level with dense relabeling.
        let mut partitions = Vec::with_capacity(horizon + 1);
        partitions.push(Partition::trivial(space.clone()));
        let mut prev: Vec<u32> = vec![0; trials];
        let mut prev_count = 1usize;
        for level in 1..=horizon {
            let mut scratch = vec![u32::MAX; prev_count * base];
            let mut next = vec![0u32; trials];
            let mut next_count = 0u32;
            for trial in 0..trials {
                let key = prev[trial] as usize * base + flat[trial * horizon + level - 1] as usize;
                if scratch[key] == u32::MAX {
                    scratch[key] = next_count;
                    next_count += 1;
                }
                next[trial] = scratch[key];
            }
            prev = next;
            prev_count = next_count as usize;
            partitions.push(Partition::relabel(space.clone(), prev.clone()));
        }
        let filtration = Arc::new(Filtration::from_partitions(
            0,
            partitions,
            Partition::trivial(space.clone()),
        )?);

        Ok(ProcessSpace {
            space,
            filtration,
            support_values: self.innovations.iter().map(|&(v, _)| v).collect(),
            digits: Digits::Stored { flat, horizon },
            backend: BackendInfo::MonteCarlo {
                trials,
                seed: self.seed,
            },
        })
    }

    /// Build the sequence of terms this specification describes.
    pub fn realize_terms(&self, ps: &ProcessSpace) -> Result<AdaptedSequence> {
        match self.kind {
            ProcessKind::IndependentInnovations => independent_sequence(ps),
            ProcessKind::MovingAverage => moving_average(ps, &self.coefficients),
            ProcessKind::MartingaleDifference => {
                let base = moving_average(ps, &self.coefficients)?;
                martingale_difference_from(&base)
            }
        }
    }
}

fn pow_usize(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

#[derive(Debug)]
enum Digits {
    /// Exhaustive: digit `i` of an atom is a base-`base` digit of its index.
    Dense { base: usize, horizon: usize },
    /// Empirical: digits stored per `(atom, step)`.
    Stored { flat: Vec<u16>, horizon: usize },
}

/// Which backend produced a process space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendInfo {
    Exhaustive,
    MonteCarlo { trials: usize, seed: u64 },
}

impl BackendInfo {
    pub fn name(&self) -> &'static str {
        match self {
            BackendInfo::Exhaustive => "exhaustive",
            BackendInfo::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// A sample space of innovation paths together with its coordinate
/// filtration and enough structure to read coordinates back.
#[derive(Debug)]
pub struct ProcessSpace {
    space: Arc<SampleSpace>,
    filtration: Arc<Filtration>,
    support_values: Vec<f64>,
    digits: Digits,
    backend: BackendInfo,
}

impl ProcessSpace {
    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn filtration(&self) -> &Arc<Filtration> {
        &self.filtration
    }

    pub fn backend(&self) -> BackendInfo {
        self.backend
    }

    pub fn horizon(&self) -> usize {
        match &self.digits {
            Digits::Dense { horizon, .. } | Digits::Stored { horizon, .. } => *horizon,
        }
    }

    /// Innovation index of coordinate `i` (1-based) at `atom`.
    fn digit(&self, atom: usize, i: usize) -> usize {
        match &self.digits {
            Digits::Dense { base, horizon } => atom / pow_usize(*base, horizon - i) % base,
            Digits::Stored { flat, horizon } => flat[atom * horizon + (i - 1)] as usize,
        }
    }

    /// The coordinate element `ε_i` (1-based): the i-th innovation of each
    /// path.
    pub fn coordinate(&self, i: usize) -> Result<LatticeElement> {
        if i == 0 || i > self.horizon() {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} outside 1..={}",
                self.horizon()
            )));
        }
        let values = (0..self.space.atom_count())
            .map(|atom| self.support_values[self.digit(atom, i)])
            .collect();
        LatticeElement::new(self.space.clone(), values)
    }

    /// All coordinate elements `ε_1..ε_horizon`.
    pub fn coordinates(&self) -> Result<Vec<LatticeElement>> {
        (1..=self.horizon()).map(|i| self.coordinate(i)).collect()
    }

    /// Partition of the atoms by the value of coordinate `i` alone (not the
    /// prefix): the conditioning structure of one innovation.
    pub fn coordinate_partition(&self, i: usize) -> Result<Partition> {
        if i == 0 || i > self.horizon() {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} outside 1..={}",
                self.horizon()
            )));
        }
        Ok(Partition::from_labels(self.space.clone(), |atom| {
            self.digit(atom, i)
        }))
    }

    /// Number of sampled trials on the monte-carlo backend.
    pub fn stat_trials(&self) -> Option<usize> {
        match self.backend {
            BackendInfo::MonteCarlo { trials, .. } => Some(trials),
            BackendInfo::Exhaustive => None,
        }
    }

    /// Standard error of the weighted mean of `f` on a statistical backend;
    /// zero on the exhaustive backend.
    pub fn standard_error(&self, f: &LatticeElement) -> f64 {
        match self.stat_trials() {
            Some(trials) => weighted_std(f.values(), self.space.weights()) / (trials as f64).sqrt(),
            None => 0.0,
        }
    }
}

/// A sequence adapted to a filtration: term `i` is fixed by the operator at
/// index `i` (equivalently, constant on its blocks).
#[derive(Debug, Clone)]
pub struct AdaptedSequence {
    filtration: Arc<Filtration>,
    terms: Vec<LatticeElement>,
}

impl AdaptedSequence {
    /// Build and verify adaptedness of every term.
    pub fn new(filtration: Arc<Filtration>, terms: Vec<LatticeElement>) -> Result<Self> {
        for (idx, term) in terms.iter().enumerate() {
            let i = idx as i64 + 1;
            let spread = filtration.at(i).range_violation(term)?;
            if spread > ADAPTED_TOL {
                return Err(Error::Precondition(format!(
                    "term {i} is not adapted: within-block spread {spread:.3e}"
                )));
            }
        }
        Ok(Self { filtration, terms })
    }

    pub fn filtration(&self) -> &Arc<Filtration> {
        &self.filtration
    }

    pub fn terms(&self) -> &[LatticeElement] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term `f_i`, 1-based.
    pub fn term(&self, i: usize) -> &LatticeElement {
        &self.terms[i - 1]
    }

    /// Largest absolute component over all terms: the least `B` with
    /// `|f_i| ≤ B·e`.
    pub fn uniform_bound(&self) -> f64 {
        self.terms.iter().fold(0.0, |b, t| b.max(t.norm_inf()))
    }
}

/// The innovations themselves as an adapted sequence.
pub fn independent_sequence(ps: &ProcessSpace) -> Result<AdaptedSequence> {
    AdaptedSequence::new(ps.filtration().clone(), ps.coordinates()?)
}

/// The moving average `f_i = Σ_{k} θ_k ε_{i−k}` with terms before the start
/// of the process dropped.
pub fn moving_average(ps: &ProcessSpace, theta: &[f64]) -> Result<AdaptedSequence> {
    if theta.is_empty() {
        return Err(Error::InvalidArgument(
            "moving-average coefficients must be nonempty".into(),
        ));
    }
    let coords = ps.coordinates()?;
    let mut terms = Vec::with_capacity(ps.horizon());
    for i in 1..=ps.horizon() {
        let mut term = LatticeElement::zero(ps.space().clone());
        for (k, &coef) in theta.iter().enumerate() {
            if i > k {
                term = term.add(&coords[i - k - 1].scale(coef))?;
            }
        }
        terms.push(term);
    }
    AdaptedSequence::new(ps.filtration().clone(), terms)
}

/// The martingale difference sequence `g_i = f_i − T_{i−1} f_i` generated by
/// an adapted sequence. The defining property `T_{i−1} g_i = 0` is verified
/// before returning.
pub fn martingale_difference_from(seq: &AdaptedSequence) -> Result<AdaptedSequence> {
    let filt = seq.filtration();
    let mut terms = Vec::with_capacity(seq.len());
    for (idx, f) in seq.terms().iter().enumerate() {
        let i = idx as i64 + 1;
        let prev = filt.at(i - 1);
        let g = f.sub(&prev.apply(f)?)?;
        let residual = prev.apply(&g)?.norm_inf();
        if residual > ADAPTED_TOL {
            return Err(Error::Precondition(format!(
                "difference at i={i} is not conditionally mean-zero: residual {residual:.3e}"
            )));
        }
        terms.push(g);
    }
    AdaptedSequence::new(filt.clone(), terms)
}

/// Partial sums `s_0 = 0, s_1, …, s_n`; entry `k` is `s_k`.
pub fn partial_sums(seq: &AdaptedSequence) -> Result<Vec<LatticeElement>> {
    let mut sums = Vec::with_capacity(seq.len() + 1);
    sums.push(LatticeElement::zero(seq.filtration().space().clone()));
    for term in seq.terms() {
        let prev = sums.last().expect("nonempty");
        sums.push(prev.add(term)?);
    }
    Ok(sums)
}

/// Check the martingale property `f_i = T_i f_j` for `i ≤ j`.
///
/// All pairs are checked for short sequences; long ones fall back to
/// adjacent pairs (which imply the rest through the tower property) plus a
/// seeded sample of long-range pairs.
pub fn is_martingale(seq: &AdaptedSequence) -> Report {
    let n = seq.len();
    let mut report = Report::new();
    if n < 2 {
        report.record("martingale-property", 0.0, ADAPTED_TOL);
        return report;
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n * (n - 1) / 2 <= 4096 {
        for i in 1..=n {
            for j in (i + 1)..=n {
                pairs.push((i, j));
            }
        }
    } else {
        for i in 1..n {
            pairs.push((i, i + 1));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d617274);
        for _ in 0..64 {
            let i = rng.random_range(1..n);
            let j = rng.random_range(i + 1..=n);
            pairs.push((i, j));
        }
    }
    let mut worst = 0.0_f64;
    let mut at = (0, 0);
    for (i, j) in pairs {
        let ti = seq.filtration().at(i as i64);
        let projected = ti.apply(seq.term(j)).expect("same space");
        let gap = projected.max_abs_diff(seq.term(i)).expect("same space");
        if gap > worst {
            worst = gap;
            at = (i, j);
        }
    }
    if worst > 0.0 {
        report.record_with(
            "martingale-property",
            worst,
            ADAPTED_TOL,
            format!("(i, j) = ({}, {})", at.0, at.1),
        );
    } else {
        report.record("martingale-property", worst, ADAPTED_TOL);
    }
    report
}

/// Check pairwise orthogonality `T(g_i·g_j) = 0` for `i ≠ j`.
pub fn orthogonality_check(
    terms: &[LatticeElement],
    t: &CondExpectation,
    tol: f64,
) -> Result<Report> {
    let n = terms.len();
    if n < 2 {
        let mut report = Report::new();
        report.record("cross-term-orthogonality", 0.0, tol);
        return Ok(report);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if n * n <= 4096 {
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
    } else {
        for i in 0..n - 1 {
            pairs.push((i, i + 1));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6f727468);
        for _ in 0..128 {
            let i = rng.random_range(0..n - 1);
            let j = rng.random_range(i + 1..n);
            pairs.push((i, j));
        }
    }
    let mut worst = 0.0_f64;
    let mut at = (0, 0);
    for (i, j) in pairs {
        let prod = terms[i].multiply(&terms[j])?;
        let gap = t.apply(&prod)?.norm_inf();
        if gap > worst {
            worst = gap;
            at = (i + 1, j + 1);
        }
    }
    let mut report = Report::new();
    report.record_located(
        "cross-term-orthogonality",
        worst,
        tol,
        format!("(i, j) = ({}, {})", at.0, at.1),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IDENTITY_TOL;

    fn fair_coins(horizon: usize) -> ProcessSpec {
        ProcessSpec {
            kind: ProcessKind::IndependentInnovations,
            horizon,
            coefficients: vec![1.0],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap()
    }

    /// Brute-force conditional mean given the first `level` coordinates,
    /// computed with plain loops and digit arithmetic — independent of the
    /// partition machinery it cross-checks.
    fn brute_prefix_mean(
        spec: &ProcessSpec,
        values: &[f64],
        weights: &[f64],
        level: usize,
    ) -> Vec<f64> {
        let base = spec.innovations.len();
        let horizon = spec.horizon;
        let group = |atom: usize| atom / base.pow((horizon - level) as u32);
        let groups = base.pow(level as u32);
        let mut num = vec![0.0; groups];
        let mut den = vec![0.0; groups];
        for atom in 0..values.len() {
            num[group(atom)] += weights[atom] * values[atom];
            den[group(atom)] += weights[atom];
        }
        (0..values.len())
            .map(|atom| num[group(atom)] / den[group(atom)])
            .collect()
    }

    #[test]
    fn coin_space_layout() {
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(ps.space().atom_count(), 4);
        let e1 = ps.coordinate(1).unwrap();
        let e2 = ps.coordinate(2).unwrap();
        assert_eq!(e1.values(), &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(e2.values(), &[1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn filtration_partition_sizes() {
        let ps = fair_coins(3).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(ps.space().atom_count(), 8);
        let filt = ps.filtration();
        let sizes: Vec<usize> = (0..=3)
            .map(|i| filt.at(i).partition().block_count())
            .collect();
        assert_eq!(sizes, vec![1, 2, 4, 8]);
    }

    #[test]
    fn horizon_one_space_is_the_support() {
        let spec = ProcessSpec {
            kind: ProcessKind::IndependentInnovations,
            horizon: 1,
            coefficients: vec![1.0],
            innovations: vec![(0.0, 0.25), (2.0, 0.75)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(ps.space().atom_count(), 2);
        assert_eq!(ps.space().weights(), &[0.25, 0.75]);
        assert_eq!(ps.coordinate(1).unwrap().values(), &[0.0, 2.0]);
    }

    #[test]
    fn atom_cap_is_enforced() {
        let spec = fair_coins(40);
        let err = spec.build_exhaustive(1 << 20).unwrap_err();
        assert!(matches!(err, Error::AtomCapExceeded { .. }));
        assert!(err.to_string().contains("monte-carlo"));
    }

    #[test]
    fn innovations_must_be_a_distribution() {
        let spec = ProcessSpec {
            kind: ProcessKind::IndependentInnovations,
            horizon: 2,
            coefficients: vec![1.0],
            innovations: vec![(1.0, 0.5), (-1.0, 0.2)],
            seed: 0,
        };
        assert!(spec.validated().is_err());
    }

    #[test]
    fn coordinates_have_mean_zero() {
        let ps = fair_coins(4).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let t = ps.filtration().global();
        for i in 1..=4 {
            let eps = ps.coordinate(i).unwrap();
            assert!(t.apply(&eps).unwrap().norm_inf() <= IDENTITY_TOL);
        }
    }

    #[test]
    fn coordinates_are_uncorrelated_by_enumeration() {
        let spec = fair_coins(2);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let e1 = ps.coordinate(1).unwrap();
        let e2 = ps.coordinate(2).unwrap();
        // Oracle: direct weighted sum over the four paths.
        let brute: f64 = (0..4)
            .map(|a| ps.space().weight(a) * e1.value(a) * e2.value(a))
            .sum();
        assert_eq!(brute, 0.0);
        let prod = e1.multiply(&e2).unwrap();
        let t = ps.filtration().global();
        assert!(t.apply(&prod).unwrap().norm_inf() <= IDENTITY_TOL);
    }

    #[test]
    fn coordinate_partitions_are_subspace_independent() {
        use crate::conditional::subspace_independence_check;
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let s = ps.space();
        let by_first = Partition::from_labels(s.clone(), |a| a / 2);
        let by_second = Partition::from_labels(s.clone(), |a| a % 2);
        let t = CondExpectation::trivial(s.clone());
        let report = subspace_independence_check(&by_first, &by_second, &t, IDENTITY_TOL).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn moving_average_conditional_means() {
        // θ = (1, 0.5): the one-step-back prediction is 0.5·ε_{i−1} and the
        // two-step-back prediction vanishes.
        let spec = ProcessSpec {
            kind: ProcessKind::MovingAverage,
            horizon: 3,
            coefficients: vec![1.0, 0.5],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();

        let f3 = seq.term(3);
        let t2 = ps.filtration().at(2);
        let predicted = t2.apply(f3).unwrap();
        let expected = ps.coordinate(2).unwrap().scale(0.5);
        assert!(predicted.max_abs_diff(&expected).unwrap() <= IDENTITY_TOL);

        // Cross-check against the independent enumeration oracle.
        let brute = brute_prefix_mean(&spec, f3.values(), ps.space().weights(), 2);
        for (got, want) in predicted.values().iter().zip(&brute) {
            assert!((got - want).abs() <= IDENTITY_TOL);
        }

        let t1 = ps.filtration().at(1);
        assert!(t1.apply(f3).unwrap().norm_inf() <= IDENTITY_TOL);

        // Degenerate MA(0): the innovations themselves.
        let seq0 = moving_average(&ps, &[1.0]).unwrap();
        for i in 1..=3 {
            assert_eq!(seq0.term(i).values(), ps.coordinate(i).unwrap().values());
        }
    }

    #[test]
    fn martingale_difference_of_ma1_recovers_innovations() {
        let spec = ProcessSpec {
            kind: ProcessKind::MartingaleDifference,
            horizon: 3,
            coefficients: vec![1.0, 0.5],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let diffs = spec.realize_terms(&ps).unwrap();
        for i in 1..=3 {
            let eps = ps.coordinate(i).unwrap();
            assert!(diffs.term(i).max_abs_diff(&eps).unwrap() <= IDENTITY_TOL);
        }
    }

    #[test]
    fn independent_mean_zero_terms_are_their_own_differences() {
        let ps = fair_coins(3).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = independent_sequence(&ps).unwrap();
        let diffs = martingale_difference_from(&seq).unwrap();
        for i in 1..=3 {
            assert!(diffs.term(i).max_abs_diff(seq.term(i)).unwrap() <= IDENTITY_TOL);
        }
    }

    #[test]
    fn predictable_terms_difference_to_zero() {
        // f_i = ε_{i−1} is fixed by T_{i−1}, so g_i = 0.
        let ps = fair_coins(3).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let zero = LatticeElement::zero(ps.space().clone());
        let terms = vec![
            zero.clone(),
            ps.coordinate(1).unwrap(),
            ps.coordinate(2).unwrap(),
        ];
        let seq = AdaptedSequence::new(ps.filtration().clone(), terms).unwrap();
        let diffs = martingale_difference_from(&seq).unwrap();
        for i in 1..=3 {
            assert!(diffs.term(i).norm_inf() <= IDENTITY_TOL);
        }
    }

    #[test]
    fn adaptedness_is_enforced() {
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        // ε_2 is not adapted at index 1.
        let terms = vec![ps.coordinate(2).unwrap()];
        let err = AdaptedSequence::new(ps.filtration().clone(), terms).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn partial_sums_and_martingale_property() {
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = independent_sequence(&ps).unwrap();
        let diffs = martingale_difference_from(&seq).unwrap();
        let sums = partial_sums(&diffs).unwrap();
        assert_eq!(sums[0].values(), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(sums[2].values(), &[2.0, 0.0, 0.0, -2.0]);

        // T_1 s_2 = s_1.
        let t1 = ps.filtration().at(1);
        let projected = t1.apply(&sums[2]).unwrap();
        assert!(projected.max_abs_diff(&sums[1]).unwrap() <= IDENTITY_TOL);

        let mart = AdaptedSequence::new(ps.filtration().clone(), sums[1..].to_vec()).unwrap();
        assert!(is_martingale(&mart).passed());
    }

    #[test]
    fn innovations_are_not_a_martingale() {
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = independent_sequence(&ps).unwrap();
        let report = is_martingale(&seq);
        // T_1 ε_2 = 0 ≠ ε_1: violation of size 1 at (1, 2).
        assert!(!report.passed());
        assert!((report.max_violation() - 1.0).abs() <= IDENTITY_TOL);
    }

    #[test]
    fn constant_sequence_is_a_martingale() {
        let ps = fair_coins(2).build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let e = LatticeElement::unit(ps.space().clone());
        let seq = AdaptedSequence::new(ps.filtration().clone(), vec![e.clone(), e]).unwrap();
        assert!(is_martingale(&seq).passed());
    }

    #[test]
    fn differences_are_orthogonal() {
        let spec = ProcessSpec {
            kind: ProcessKind::MartingaleDifference,
            horizon: 5,
            coefficients: vec![1.0, 0.5, -0.25],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let diffs = spec.realize_terms(&ps).unwrap();
        let report =
            orthogonality_check(diffs.terms(), ps.filtration().global(), IDENTITY_TOL).unwrap();
        assert!(report.passed(), "{report}");

        // And T_i g_j = 0 for i < j.
        for i in 0..=2_i64 {
            for j in (i + 1).max(1)..=5 {
                let ti = ps.filtration().at(i);
                let res = ti.apply(diffs.term(j as usize)).unwrap();
                assert!(res.norm_inf() <= IDENTITY_TOL);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exhaustive_within_three_se() {
        let spec = ProcessSpec {
            kind: ProcessKind::MovingAverage,
            horizon: 8,
            coefficients: vec![1.0, 0.5],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 20260810,
        }
        .validated()
        .unwrap();

        let exact = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let exact_terms = spec.realize_terms(&exact).unwrap();
        let mc = spec.build_monte_carlo(20_000).unwrap();
        let mc_terms = spec.realize_terms(&mc).unwrap();

        // Compare T-moments: the mean absolute Cesàro sum and second moments.
        let mean_abs = |terms: &AdaptedSequence| {
            let n = terms.len();
            let mut sum = LatticeElement::zero(terms.filtration().space().clone());
            for t in terms.terms() {
                sum = sum.add(t).unwrap();
            }
            sum.scale(1.0 / n as f64).abs()
        };
        let exact_val = mean_abs(&exact_terms).expectation();
        let mc_elem = mean_abs(&mc_terms);
        let mc_val = mc_elem.expectation();
        let se = mc.standard_error(&mc_elem);
        assert!(se > 0.0);
        assert!(
            (mc_val - exact_val).abs() <= 3.0 * se,
            "{mc_val} vs {exact_val} (se {se})"
        );

        let exact_second = exact_terms.term(8).multiply(exact_terms.term(8)).unwrap();
        let mc_second = mc_terms.term(8).multiply(mc_terms.term(8)).unwrap();
        let se2 = mc.standard_error(&mc_second);
        assert!(
            (mc_second.expectation() - exact_second.expectation()).abs() <= 3.0 * se2,
            "second moment off by more than 3 SE"
        );
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let spec = fair_coins(6);
        let a = spec.build_monte_carlo(500).unwrap();
        let b = spec.build_monte_carlo(500).unwrap();
        let fa = a.coordinate(3).unwrap();
        let fb = b.coordinate(3).unwrap();
        assert_eq!(fa.values(), fb.values());
    }

    #[test]
    fn empirical_filtration_verifies() {
        use crate::conditional::verify_filtration;
        let spec = fair_coins(5);
        let mc = spec.build_monte_carlo(300).unwrap();
        let report = verify_filtration(mc.filtration());
        assert!(report.passed(), "{report}");
    }
}
