//! Mixingale certificates and their verification.
//!
//! A mixingale certificate witnesses how fast a sequence decouples from the
//! far past and future of its filtration: magnitudes `c_i ∈ E₊` and
//! dependence numbers `Φ_m ≥ 0` with `Φ_m → 0` such that, for all `i` and
//! `m ≥ 1`,
//!
//! ```text
//! (past)    T|T_{i−m} f_i|       ≤ Φ_m     · c_i
//! (future)  T|f_i − T_{i+m} f_i| ≤ Φ_{m+1} · c_i
//! ```
//!
//! componentwise. This module verifies certificates on a finite lag window,
//! extracts the minimal dependence numbers a sequence admits, and provides
//! the uniformity machinery (truncation envelopes and the boundedness
//! consequence) used by the weak-law experiment.

use crate::conditional::{CondExpectation, Filtration};
use crate::error::{Error, Result};
use crate::lattice::{BandProjection, LatticeElement, IDENTITY_TOL};
use crate::report::{Report, Tolerance};

/// Inequality checks add this slack to the right-hand side to absorb
/// roundoff in exact-zero comparisons.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// Tolerance for the mean-zero consequence `T f_i = 0`.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// Default threshold under which the dependence numbers must provably drop
/// for the vanishing claim to count as evidenced.
pub const VANISH_EPSILON: f64 = 1e-8;

/// A candidate mixingale certificate: magnitudes, dependence numbers, and a
/// flag asserting that the numbers vanish identically beyond the stored lags.
#[derive(Debug, Clone)]
pub struct MixingaleCertificate {
    /// Magnitude element `c_i` per term, all in the positive cone.
    pub c: Vec<LatticeElement>,
    /// Dependence numbers `Φ_1..Φ_M`.
    pub phi: Vec<f64>,
    /// When true, `Φ_m = 0` for every lag beyond the stored ones (exact for
    /// finite-memory processes); otherwise the vanishing claim is evidenced
    /// by the stored numbers dropping below a small threshold.
    pub phi_tail_zero: bool,
}

impl MixingaleCertificate {
    /// Certificate with constant magnitude `c_i = scale·e`.
    pub fn uniform(
        space: &std::sync::Arc<crate::lattice::SampleSpace>,
        terms: usize,
        scale: f64,
        phi: Vec<f64>,
        phi_tail_zero: bool,
    ) -> Result<Self> {
        let c = (0..terms)
            .map(|_| LatticeElement::constant(space.clone(), scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            c,
            phi,
            phi_tail_zero,
        })
    }

    /// Magnitudes `c_i = T|f_i|`.
    pub fn from_conditional_abs(
        terms: &[LatticeElement],
        t: &CondExpectation,
        phi: Vec<f64>,
        phi_tail_zero: bool,
    ) -> Result<Self> {
        let c = terms
            .iter()
            .map(|f| t.apply(&f.abs()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            c,
            phi,
            phi_tail_zero,
        })
    }

    /// Structural validity: nonnegative magnitudes and dependence numbers.
    pub fn validate(&self) -> Result<()> {
        for (idx, c) in self.c.iter().enumerate() {
            let neg = c.nonnegativity_violation();
            if neg > 0.0 {
                return Err(Error::CertificateRejected(format!(
                    "c_{} has a negative component ({neg:.3e} below zero)",
                    idx + 1
                )));
            }
        }
        for (idx, &phi) in self.phi.iter().enumerate() {
            if !phi.is_finite() || phi < 0.0 {
                return Err(Error::CertificateRejected(format!(
                    "Φ_{} = {phi} is not a finite nonnegative number",
                    idx + 1
                )));
            }
        }
        Ok(())
    }

    /// `Φ_m` for `m ≥ 1`, extended by the zero tail when asserted.
    pub fn phi_value(&self, m: usize) -> Option<f64> {
        if m == 0 {
            return None;
        }
        match self.phi.get(m - 1) {
            Some(&v) => Some(v),
            None if self.phi_tail_zero => Some(0.0),
            None => None,
        }
    }

    /// Smallest stored dependence number (0 when a zero tail is asserted).
    pub fn phi_infimum(&self) -> f64 {
        if self.phi_tail_zero {
            return 0.0;
        }
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Verify the two defining inequalities for all terms and lags `1..=max_lag`,
/// with slack [`INEQUALITY_SLACK`] on the right-hand side (widened by three
/// standard errors under a statistical tolerance). Violations are reported
/// with the offending `(i, m, side)`; only structural problems (wrong
/// lengths, missing `Φ`) are errors.
///
/// The lag window needs `Φ_1..Φ_{max_lag+1}`: the future-side inequality at
/// lag `m` is governed by `Φ_{m+1}`.
pub fn check_mixingale(
    terms: &[LatticeElement],
    filtration: &Filtration,
    cert: &MixingaleCertificate,
    max_lag: usize,
    tol: Tolerance,
) -> Result<Report> {
    cert.validate()?;
    if cert.c.len() != terms.len() {
        return Err(Error::CertificateRejected(format!(
            "certificate has {} magnitudes for {} terms",
            cert.c.len(),
            terms.len()
        )));
    }
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be at least 1".into()));
    }
    if cert.phi_value(max_lag + 1).is_none() {
        return Err(Error::CertificateRejected(format!(
            "certificate provides Φ only up to {}; lags up to {max_lag} need Φ_{} \
             (store more numbers or assert the zero tail)",
            cert.phi.len(),
            max_lag + 1
        )));
    }

    let t = filtration.global();
    let mut report = Report::new();

    let mut worst_past = 0.0_f64;
    let mut past_at = (0usize, 0usize);
    let mut worst_future = 0.0_f64;
    let mut future_at = (0usize, 0usize);

    for (idx, f) in terms.iter().enumerate() {
        let i = idx + 1;
        for m in 1..=max_lag {
            let phi_m = cert.phi_value(m).expect("validated above");
            let phi_next = cert.phi_value(m + 1).expect("validated above");

            // Statistical widening scales with the resolution of the
            // conditioning level actually probed, with a familywise factor
            // for the worst cell of the whole (i, m) grid.
            let family = terms.len();
            let past_level = filtration.at(i as i64 - m as i64);
            let past = t.apply(&past_level.apply(f)?.abs())?;
            let widen =
                tol.family_conditional_slack(f, past_level.partition().block_count(), family, 0.0);
            let (gap, _) = past.le_violation(&cert.c[idx].scale(phi_m))?;
            let gap = (gap - widen).max(0.0);
            if gap > worst_past {
                worst_past = gap;
                past_at = (i, m);
            }

            let future_level = filtration.at(i as i64 + m as i64);
            let future_res = f.sub(&future_level.apply(f)?)?;
            let future = t.apply(&future_res.abs())?;
            let widen = tol.family_conditional_slack(
                f,
                future_level.partition().block_count(),
                family,
                0.0,
            );
            let (gap, _) = future.le_violation(&cert.c[idx].scale(phi_next))?;
            let gap = (gap - widen).max(0.0);
            if gap > worst_future {
                worst_future = gap;
                future_at = (i, m);
            }
        }
    }

    report.record_located(
        "mixingale-past-bound",
        worst_past,
        INEQUALITY_SLACK,
        format!("(i, m) = ({}, {}), side past", past_at.0, past_at.1),
    );
    report.record_located(
        "mixingale-future-bound",
        worst_future,
        INEQUALITY_SLACK,
        format!("(i, m) = ({}, {}), side future", future_at.0, future_at.1),
    );

    // Vanishing evidence: either the zero tail is asserted or the stored
    // numbers must dip below the configured threshold.
    let inf = cert.phi_infimum();
    report.record_with(
        "phi-vanishing",
        (inf - VANISH_EPSILON).max(0.0),
        0.0,
        format!("inf Φ = {inf:.3e}, threshold {VANISH_EPSILON:.1e}"),
    );

    Ok(report)
}

/// The least dependence numbers `Φ_1..Φ_M` the sequence admits with the
/// given magnitudes: componentwise ratio maxima over the support of each
/// `c_i`, infinite when some left-hand side is positive where `c_i`
/// vanishes.
///
/// `Φ_m` collects the past-side constraint at lag `m` and the future-side
/// constraint at lag `m − 1` (which is governed by `Φ_m`). Under a
/// statistical tolerance the left-hand sides are first reduced by the
/// conditioning noise floor of the level probed, so the result is a
/// noise-adjusted lower estimate consistent with [`check_mixingale`] at the
/// same tolerance; on the exact backend the adjustment is zero.
pub fn minimal_phi(
    terms: &[LatticeElement],
    filtration: &Filtration,
    c: &[LatticeElement],
    max_lag: usize,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    if c.len() != terms.len() {
        return Err(Error::InvalidArgument(format!(
            "{} magnitudes for {} terms",
            c.len(),
            terms.len()
        )));
    }
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be at least 1".into()));
    }
    let t = filtration.global();

    // Least s with (lhs − widen)⁺ ≤ s·c componentwise; +∞ when infeasible.
    let ratio = |lhs: &LatticeElement, c: &LatticeElement, widen: f64| -> f64 {
        let mut s = 0.0_f64;
        for (&l, &cv) in lhs.values().iter().zip(c.values()) {
            let l = (l - widen).max(0.0);
            if cv > 0.0 {
                s = s.max(l / cv);
            } else if l > INEQUALITY_SLACK {
                return f64::INFINITY;
            }
        }
        s
    };

    let family = terms.len();
    let mut phi = vec![0.0_f64; max_lag];
    for (idx, f) in terms.iter().enumerate() {
        let i = idx + 1;
        for m in 1..=max_lag {
            let past_level = filtration.at(i as i64 - m as i64);
            let past = t.apply(&past_level.apply(f)?.abs())?;
            let widen =
                tol.family_conditional_slack(f, past_level.partition().block_count(), family, 0.0);
            phi[m - 1] = phi[m - 1].max(ratio(&past, &c[idx], widen));

            if m >= 2 {
                let future_level = filtration.at(i as i64 + (m as i64 - 1));
                let res = f.sub(&future_level.apply(f)?)?;
                let future = t.apply(&res.abs())?;
                let widen = tol.family_conditional_slack(
                    f,
                    future_level.partition().block_count(),
                    family,
                    0.0,
                );
                phi[m - 1] = phi[m - 1].max(ratio(&future, &c[idx], widen));
            }
        }
    }
    Ok(phi)
}

/// Verify the mean-zero consequence `T f_i = 0` for every term. Under a
/// statistical tolerance the check is widened by the sampling error of each
/// term's mean.
pub fn t_mean_zero_check(
    terms: &[LatticeElement],
    filtration: &Filtration,
    tol: Tolerance,
) -> Result<Report> {
    let t = filtration.global();
    let mut worst = 0.0_f64;
    let mut at = 0usize;
    for (idx, f) in terms.iter().enumerate() {
        let widen = tol.family_slack_for(f, terms.len(), 0.0);
        let norm = (t.apply(f)?.norm_inf() - widen).max(0.0);
        if norm > worst {
            worst = norm;
            at = idx + 1;
        }
    }
    let mut report = Report::new();
    report.record_located("t-mean-zero", worst, MEAN_ZERO_TOL, format!("i = {at}"));
    Ok(report)
}

/// Truncation envelope of a family over a grid of levels: at each level `c`
/// the componentwise supremum over the family of `T P_{(|f|−ce)⁺} |f|`.
#[derive(Debug, Clone)]
pub struct UniformityProfile {
    pub c_grid: Vec<f64>,
    pub envelope: Vec<LatticeElement>,
    /// Largest componentwise increase between consecutive levels; the
    /// envelope must be nonincreasing in the level, so anything above
    /// roundoff signals a bug.
    pub monotone_violation: f64,
}

impl UniformityProfile {
    /// Largest component of the envelope at each level.
    pub fn max_components(&self) -> Vec<f64> {
        self.envelope.iter().map(LatticeElement::norm_inf).collect()
    }

    /// First grid level at which the envelope is below `epsilon` everywhere.
    pub fn first_level_below(&self, epsilon: f64) -> Option<(f64, &LatticeElement)> {
        self.c_grid
            .iter()
            .zip(&self.envelope)
            .find(|(_, env)| env.norm_inf() <= epsilon)
            .map(|(&c, env)| (c, env))
    }
}

/// Compute the truncation envelope of `family` under `t` over `c_grid`
/// (nonnegative, strictly increasing). An empty family yields the zero
/// envelope.
pub fn uniformity_profile(
    family: &[LatticeElement],
    t: &CondExpectation,
    c_grid: &[f64],
) -> Result<UniformityProfile> {
    if c_grid.is_empty() {
        return Err(Error::InvalidArgument("empty truncation grid".into()));
    }
    for pair in c_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument(format!(
                "truncation grid must be strictly increasing ({} then {})",
                pair[0], pair[1]
            )));
        }
    }
    if c_grid[0] < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative truncation level {}",
            c_grid[0]
        )));
    }

    let mut envelope = Vec::with_capacity(c_grid.len());
    for &level in c_grid {
        let mut sup = LatticeElement::zero(t.space().clone());
        for f in family {
            let abs = f.abs();
            let projection = BandProjection::truncation(f, level)?;
            let tail = t.apply(&projection.project(&abs)?)?;
            sup = sup.sup(&tail)?;
        }
        envelope.push(sup);
    }

    let mut monotone_violation = 0.0_f64;
    for pair in envelope.windows(2) {
        monotone_violation = monotone_violation.max(pair[1].le_violation(&pair[0])?.0);
    }

    Ok(UniformityProfile {
        c_grid: c_grid.to_vec(),
        envelope,
        monotone_violation,
    })
}

/// Boundedness consequence of a decaying envelope: at the first level `K`
/// where the envelope sits below `epsilon`, every `T|f_α|` is dominated by
/// `envelope(K) + K·e`. Failure to find such a level is reported, not
/// thrown.
pub fn uniform_family_bound_check(
    profile: &UniformityProfile,
    family: &[LatticeElement],
    t: &CondExpectation,
    epsilon: f64,
) -> Result<Report> {
    let mut report = Report::new();
    let Some((level, envelope)) = profile.first_level_below(epsilon) else {
        let floor = profile
            .max_components()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        report.record_with(
            "uniform-family-bound",
            floor,
            epsilon,
            "envelope never fell below the threshold on the grid",
        );
        return Ok(report);
    };

    let bound = envelope.add(&LatticeElement::constant(t.space().clone(), level)?)?;
    let mut worst = 0.0_f64;
    let mut at = 0usize;
    for (idx, f) in family.iter().enumerate() {
        let lhs = t.apply(&f.abs())?;
        let (gap, _) = lhs.le_violation(&bound)?;
        if gap > worst {
            worst = gap;
            at = idx;
        }
    }
    report.record_with(
        "uniform-family-bound",
        worst,
        IDENTITY_TOL,
        format!("level K = {level}, worst member index {at}"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SampleSpace;
    use crate::process::{
        independent_sequence, moving_average, ProcessKind, ProcessSpec, DEFAULT_ATOM_CAP,
    };
    use proptest::prelude::*;

    fn ma1_spec(horizon: usize) -> ProcessSpec {
        ProcessSpec {
            kind: ProcessKind::MovingAverage,
            horizon,
            coefficients: vec![1.0, 0.5],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap()
    }

    #[test]
    fn independent_sequence_admits_zero_phi() {
        let spec = ProcessSpec {
            kind: ProcessKind::IndependentInnovations,
            horizon: 4,
            coefficients: vec![1.0],
            innovations: vec![(1.0, 0.5), (-1.0, 0.5)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = independent_sequence(&ps).unwrap();
        let cert = MixingaleCertificate::uniform(ps.space(), seq.len(), 1.0, vec![0.0, 0.0], true)
            .unwrap();
        let report =
            check_mixingale(seq.terms(), seq.filtration(), &cert, 4, Tolerance::Exact).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.max_violation(), 0.0);
    }

    #[test]
    fn ma1_needs_phi_one_half() {
        let spec = ma1_spec(4);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();

        let good =
            MixingaleCertificate::uniform(ps.space(), seq.len(), 1.0, vec![0.5], true).unwrap();
        assert!(
            check_mixingale(seq.terms(), seq.filtration(), &good, 3, Tolerance::Exact)
                .unwrap()
                .passed()
        );

        let tight =
            MixingaleCertificate::uniform(ps.space(), seq.len(), 1.0, vec![0.4], true).unwrap();
        let report =
            check_mixingale(seq.terms(), seq.filtration(), &tight, 3, Tolerance::Exact).unwrap();
        assert!(!report.passed());
        // The past-side inequality at m = 1 is off by exactly 0.1.
        let check = &report.checks[0];
        assert_eq!(check.id, "mixingale-past-bound");
        assert!((check.worst - 0.1).abs() <= 1e-12, "worst {}", check.worst);
        assert!(check.detail.as_deref().unwrap().contains("m) = (2, 1)"));
    }

    #[test]
    fn adapted_sequences_have_zero_future_side() {
        let spec = ma1_spec(4);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        // Any Φ works on the future side for adapted sequences.
        let cert =
            MixingaleCertificate::uniform(ps.space(), seq.len(), 1.0, vec![0.5], true).unwrap();
        let report =
            check_mixingale(seq.terms(), seq.filtration(), &cert, 3, Tolerance::Exact).unwrap();
        let future = report
            .checks
            .iter()
            .find(|c| c.id == "mixingale-future-bound")
            .unwrap();
        assert_eq!(future.worst, 0.0);
    }

    #[test]
    fn minimal_phi_of_ma1_is_exactly_half() {
        let spec = ma1_spec(4);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        let c: Vec<LatticeElement> = (0..seq.len())
            .map(|_| LatticeElement::unit(ps.space().clone()))
            .collect();
        let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 4, Tolerance::Exact).unwrap();
        assert_eq!(phi[0], 0.5);
        assert_eq!(&phi[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn minimal_phi_zero_for_independent_terms() {
        let spec = ProcessSpec {
            kind: ProcessKind::IndependentInnovations,
            horizon: 3,
            coefficients: vec![1.0],
            innovations: vec![(2.0, 0.25), (-1.0, 0.5), (0.0, 0.25)],
            seed: 0,
        }
        .validated()
        .unwrap();
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = independent_sequence(&ps).unwrap();
        let c: Vec<LatticeElement> = (0..seq.len())
            .map(|_| LatticeElement::unit(ps.space().clone()))
            .collect();
        let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 3, Tolerance::Exact).unwrap();
        assert_eq!(phi, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_magnitude_with_dependence_is_infeasible() {
        let spec = ma1_spec(3);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        let c: Vec<LatticeElement> = (0..seq.len())
            .map(|_| LatticeElement::zero(ps.space().clone()))
            .collect();
        let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 2, Tolerance::Exact).unwrap();
        assert!(phi[0].is_infinite());
    }

    #[test]
    fn minimal_phi_round_trips_through_check() {
        let spec = ma1_spec(5);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        let c: Vec<LatticeElement> = (0..seq.len())
            .map(|_| LatticeElement::unit(ps.space().clone()))
            .collect();
        let phi = minimal_phi(seq.terms(), seq.filtration(), &c, 4, Tolerance::Exact).unwrap();
        let cert = MixingaleCertificate {
            c,
            phi,
            phi_tail_zero: false,
        };
        let report =
            check_mixingale(seq.terms(), seq.filtration(), &cert, 3, Tolerance::Exact).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn missing_phi_tail_is_a_structural_error() {
        let spec = ma1_spec(3);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        let cert =
            MixingaleCertificate::uniform(ps.space(), seq.len(), 1.0, vec![0.5], false).unwrap();
        // max_lag 3 needs Φ_4; only Φ_1 is stored and no zero tail asserted.
        assert!(matches!(
            check_mixingale(seq.terms(), seq.filtration(), &cert, 3, Tolerance::Exact),
            Err(Error::CertificateRejected(_))
        ));
    }

    #[test]
    fn constant_sequence_fails_mean_zero_and_vanishing() {
        let spec = ma1_spec(3);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let e = LatticeElement::unit(ps.space().clone());
        let terms = vec![e.clone(), e.clone(), e];
        let report = t_mean_zero_check(&terms, ps.filtration(), Tolerance::Exact).unwrap();
        assert!(!report.passed());
        assert!((report.max_violation() - 1.0).abs() <= IDENTITY_TOL);

        // Its minimal dependence numbers are stuck at 1: no vanishing.
        let c: Vec<LatticeElement> = (0..3)
            .map(|_| LatticeElement::unit(ps.space().clone()))
            .collect();
        let phi = minimal_phi(&terms, ps.filtration(), &c, 3, Tolerance::Exact).unwrap();
        assert!(phi.iter().all(|&p| (p - 1.0).abs() <= IDENTITY_TOL));
        let cert = MixingaleCertificate {
            c,
            phi,
            phi_tail_zero: false,
        };
        let report = check_mixingale(&terms, ps.filtration(), &cert, 2, Tolerance::Exact).unwrap();
        let vanishing = report
            .checks
            .iter()
            .find(|c| c.id == "phi-vanishing")
            .unwrap();
        assert!(!vanishing.passed());
    }

    #[test]
    fn mean_zero_holds_for_moving_averages() {
        let spec = ma1_spec(5);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let seq = moving_average(&ps, &spec.coefficients).unwrap();
        let report = t_mean_zero_check(seq.terms(), seq.filtration(), Tolerance::Exact).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn empty_sequence_is_vacuously_mean_zero() {
        let spec = ma1_spec(2);
        let ps = spec.build_exhaustive(DEFAULT_ATOM_CAP).unwrap();
        let report = t_mean_zero_check(&[], ps.filtration(), Tolerance::Exact).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn envelope_of_single_element() {
        // f = (2, 0) on a fair two-point space, trivial T, level 1: the
        // truncation keeps atom 0, and T(2, 0) = e.
        let s = SampleSpace::new(vec![0.5, 0.5]).unwrap();
        let t = CondExpectation::trivial(s.clone());
        let f = LatticeElement::new(s.clone(), vec![2.0, 0.0]).unwrap();
        let profile = uniformity_profile(&[f], &t, &[0.0, 1.0, 2.0]).unwrap();
        let e = LatticeElement::unit(s);
        assert!(profile.envelope[1].max_abs_diff(&e).unwrap() <= IDENTITY_TOL);
        // Level 2 = max|f|: envelope exactly zero (strict truncation).
        assert_eq!(profile.envelope[2].norm_inf(), 0.0);
        assert_eq!(profile.monotone_violation, 0.0);
    }

    #[test]
    fn envelope_vanishes_at_the_family_bound() {
        let s = SampleSpace::uniform(4).unwrap();
        let t = CondExpectation::trivial(s.clone());
        let family = vec![
            LatticeElement::new(s.clone(), vec![1.0, -3.0, 0.5, 2.0]).unwrap(),
            LatticeElement::new(s.clone(), vec![0.0, 4.0, -1.0, 1.0]).unwrap(),
        ];
        let profile = uniformity_profile(&family, &t, &[0.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(profile.envelope[3].norm_inf(), 0.0);
        assert_eq!(profile.monotone_violation, 0.0);
        // Level 0 keeps the full support of each |f|.
        let sup_abs = family[0].abs().sup(&family[1].abs()).unwrap();
        let expected = t
            .apply(&family[0].abs())
            .unwrap()
            .sup(&t.apply(&family[1].abs()).unwrap())
            .unwrap();
        assert!(profile.envelope[0].max_abs_diff(&expected).unwrap() <= IDENTITY_TOL);
        assert!(profile.envelope[0].norm_inf() <= sup_abs.norm_inf());
    }

    #[test]
    fn family_bound_two_element_example() {
        // Family {(2,0), (0,4)} uniform, trivial T, K = 2: envelope(2) = 2e,
        // and T|f| ≤ 4e holds for both members.
        let s = SampleSpace::new(vec![0.5, 0.5]).unwrap();
        let t = CondExpectation::trivial(s.clone());
        let family = vec![
            LatticeElement::new(s.clone(), vec![2.0, 0.0]).unwrap(),
            LatticeElement::new(s, vec![0.0, 4.0]).unwrap(),
        ];
        let profile = uniformity_profile(&family, &t, &[2.0, 4.0]).unwrap();
        assert!((profile.envelope[0].norm_inf() - 2.0).abs() <= IDENTITY_TOL);
        // ε = 2.5 admits K = 2.
        let report = uniform_family_bound_check(&profile, &family, &t, 2.5).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn family_bound_reports_missing_level() {
        let s = SampleSpace::new(vec![0.5, 0.5]).unwrap();
        let t = CondExpectation::trivial(s.clone());
        let family = vec![LatticeElement::new(s, vec![2.0, 2.0]).unwrap()];
        let profile = uniformity_profile(&family, &t, &[0.0, 1.0]).unwrap();
        let report = uniform_family_bound_check(&profile, &family, &t, 1e-8).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn empty_family_is_vacuous() {
        let s = SampleSpace::uniform(2).unwrap();
        let t = CondExpectation::trivial(s);
        let profile = uniformity_profile(&[], &t, &[0.0, 1.0]).unwrap();
        assert!(profile.envelope.iter().all(|e| e.norm_inf() == 0.0));
        let report = uniform_family_bound_check(&profile, &[], &t, 1e-8).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn grid_must_increase() {
        let s = SampleSpace::uniform(2).unwrap();
        let t = CondExpectation::trivial(s);
        assert!(uniformity_profile(&[], &t, &[1.0, 1.0]).is_err());
        assert!(uniformity_profile(&[], &t, &[]).is_err());
        assert!(uniformity_profile(&[], &t, &[-1.0, 0.0]).is_err());
    }

    proptest! {
        /// T|f| = T P|f| + T(I−P)|f| with the rejected part below the level.
        #[test]
        fn truncation_decomposition_of_conditional_abs(
            values in proptest::collection::vec(-20.0_f64..20.0, 6),
            level in 0.0_f64..10.0,
        ) {
            let s = SampleSpace::uniform(6).unwrap();
            let t = CondExpectation::trivial(s.clone());
            let f = LatticeElement::new(s, values).unwrap();
            let abs = f.abs();
            let p = BandProjection::truncation(&f, level).unwrap();
            let kept = t.apply(&p.project(&abs).unwrap()).unwrap();
            let rest = t.apply(&p.reject(&abs).unwrap()).unwrap();
            let total = t.apply(&abs).unwrap();
            let sum = kept.add(&rest).unwrap();
            prop_assert!(total.max_abs_diff(&sum).unwrap() <= IDENTITY_TOL);
            prop_assert!(rest.norm_inf() <= level + IDENTITY_TOL);
        }

        /// The envelope is componentwise nonincreasing on any valid grid.
        #[test]
        fn envelope_monotone(
            values in proptest::collection::vec(-8.0_f64..8.0, 5),
        ) {
            let s = SampleSpace::uniform(5).unwrap();
            let t = CondExpectation::trivial(s.clone());
            let f = LatticeElement::new(s, values).unwrap();
            let profile =
                uniformity_profile(&[f], &t, &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
            prop_assert_eq!(profile.monotone_violation, 0.0);
            prop_assert_eq!(profile.envelope.last().unwrap().norm_inf(), 0.0);
        }
    }
}
