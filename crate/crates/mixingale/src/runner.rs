//! Experiment orchestration: build the configured process, run the
//! requested verification suites in dependency order, and write the CSV
//! trace and human-readable summary.

use std::io::Write;
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conditional::{
    independence_check, order_continuity_check, subspace_independence_check, verify_filtration,
    CondExpectation, Partition,
};
use crate::config::{
    BackendChoice, CertificateMode, ConfigError, ExperimentConfig, MagnitudeChoice, Suite,
};
use crate::error::Error;
use crate::lattice::{signum_unit, BandProjection, LatticeElement, SampleSpace, IDENTITY_TOL};
use crate::mixingale::{
    check_mixingale, minimal_phi, t_mean_zero_check, uniform_family_bound_check,
    uniformity_profile, MixingaleCertificate, VANISH_EPSILON,
};
use crate::process::{
    martingale_difference_from, orthogonality_check, partial_sums, AdaptedSequence, ProcessSpace,
    ADAPTED_TOL, DEFAULT_ATOM_CAP,
};
use crate::report::{Report, Tolerance};
use crate::wlln::{
    mds_cesaro_analysis, signum_square_inequality, telescope, wlln_experiment, wlln_statistical,
    CesaroTrace, Schedule, TraceRow, TELESCOPE_TOL,
};

/// Name of the environment variable overriding the exhaustive atom cap.
pub const ATOM_CAP_ENV: &str = "MIXINGALE_ATOM_CAP";

/// Overrides and resources resolved by the front end.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub backend: Option<BackendChoice>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub suites: Option<Vec<Suite>>,
    pub atom_cap: usize,
    pub dry_run: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            backend: None,
            seed: None,
            out_dir: None,
            suites: None,
            atom_cap: DEFAULT_ATOM_CAP,
            dry_run: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Exit-code contract: 0 all pass, 1 verification failure, 2 config
    /// error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(Error::AtomCapExceeded { .. }) => 3,
            _ => 1,
        }
    }
}

/// One CSV observation; `None` fields serialize as empty cells.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub experiment: String,
    pub backend: &'static str,
    pub seed: u64,
    pub suite: &'static str,
    pub kind: String,
    pub n: Option<usize>,
    pub m: Option<i64>,
    pub b: Option<f64>,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

/// Fixed, versioned CSV schema; bump the version on breaking changes.
pub const CSV_SCHEMA: &str =
    "# mixingale trace schema v1: experiment,backend,seed,suite,kind,n,M,B,value,bound,pass";

impl CsvRow {
    fn to_line(&self) -> String {
        let opt_usize = |v: &Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_i64 = |v: &Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f64 = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.backend,
            self.seed,
            self.suite,
            self.kind,
            opt_usize(&self.n),
            opt_i64(&self.m),
            opt_f64(&self.b),
            self.value,
            opt_f64(&self.bound),
            self.pass
        )
    }
}

/// Result of a full run.
#[derive(Debug)]
pub struct RunOutcome {
    pub suites: Vec<(Suite, Report)>,
    pub rows: Vec<CsvRow>,
    pub passed: bool,
    pub summary: String,
    pub csv_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
}

/// Execute the configured experiment. Suites run in dependency order;
/// verification violations are collected (they decide the exit status, not
/// an error), while configuration, resource and I/O problems abort.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome, RunError> {
    let backend = options.backend.unwrap_or(config.run.backend);
    let check_seed = options.seed.unwrap_or(config.run.seed);
    let out_dir = options
        .out_dir
        .clone()
        .unwrap_or_else(|| config.run.out.clone());
    let mut suites = match &options.suites {
        Some(list) => list.clone(),
        None => config.suites()?,
    };
    suites.sort();
    suites.dedup();
    let schedule = config.schedule();

    if options.dry_run {
        let mut effective = config.clone();
        effective.run.backend = backend;
        effective.run.seed = check_seed;
        effective.run.out = out_dir;
        let summary = format!(
            "dry run: no computation performed\n\n{}",
            toml::to_string_pretty(&effective).expect("config serializes")
        );
        return Ok(RunOutcome {
            suites: Vec::new(),
            rows: Vec::new(),
            passed: true,
            summary,
            csv_path: None,
            summary_path: None,
        });
    }

    let ps = match backend {
        BackendChoice::Exhaustive => config.process.build_exhaustive(options.atom_cap)?,
        BackendChoice::MonteCarlo => config.process.build_monte_carlo(config.run.trials)?,
    };
    let seq = config.process.realize_terms(&ps)?;
    let tol = match backend {
        BackendChoice::Exhaustive => Tolerance::Exact,
        BackendChoice::MonteCarlo => Tolerance::Statistical {
            trials: config.run.trials,
        },
    };
    let independence_tol = match backend {
        BackendChoice::Exhaustive => IDENTITY_TOL,
        BackendChoice::MonteCarlo => IDENTITY_TOL.max(4.0 / (config.run.trials as f64).sqrt()),
    };

    let needs_certificate = suites.contains(&Suite::Mixingale)
        || (suites.contains(&Suite::Wlln) && backend == BackendChoice::Exhaustive);
    let certificate = if needs_certificate {
        Some(build_certificate(config, &ps, &seq, &schedule, tol)?)
    } else {
        None
    };

    let experiment = config.experiment_id();
    let mut outcomes: Vec<(Suite, Report)> = Vec::new();
    let mut rows: Vec<CsvRow> = Vec::new();
    let push_rows = |suite: Suite, new_rows: Vec<TraceRow>, rows: &mut Vec<CsvRow>| {
        for row in new_rows {
            rows.push(CsvRow {
                experiment: experiment.clone(),
                backend: backend.name(),
                seed: check_seed,
                suite: suite.name(),
                kind: row.kind.to_string(),
                n: row.n,
                m: row.m,
                b: row.b,
                value: row.value,
                bound: row.bound,
                pass: row.pass,
            });
        }
    };

    for &suite in &suites {
        let report = match suite {
            Suite::LatticeAxioms => lattice_axioms_suite(&ps, check_seed)?,
            Suite::Filtration => filtration_suite(&ps, &seq)?,
            Suite::Independence => independence_suite(&ps, independence_tol)?,
            Suite::Mixingale => {
                let cert = certificate.as_ref().expect("built above");
                mixingale_suite(&ps, &seq, cert, &schedule, tol)?
            }
            Suite::MdsCesaro => {
                let (report, trace_rows) = mds_suite(&ps, &seq, &schedule, tol)?;
                push_rows(Suite::MdsCesaro, trace_rows, &mut rows);
                report
            }
            Suite::Wlln => {
                let result = match backend {
                    BackendChoice::Exhaustive => wlln_experiment(
                        &seq,
                        certificate.as_ref().expect("built above"),
                        &schedule,
                        tol,
                    ),
                    BackendChoice::MonteCarlo => wlln_statistical(&seq, &schedule, tol),
                };
                match result {
                    Ok(outcome) => {
                        push_rows(Suite::Wlln, outcome.rows, &mut rows);
                        outcome.report
                    }
                    // A rejected certificate aborts the experiment but not
                    // the run; the mixingale suite carries the details.
                    Err(Error::CertificateRejected(message)) => {
                        let mut report = Report::new();
                        report.record_with("experiment-aborted", f64::INFINITY, 0.0, message);
                        report
                    }
                    Err(other) => return Err(other.into()),
                }
            }
        };
        outcomes.push((suite, report));
    }

    let passed = outcomes.iter().all(|(_, report)| report.passed());
    let summary = render_summary(
        config, backend, check_seed, &schedule, &ps, &outcomes, passed,
    );

    std::fs::create_dir_all(&out_dir).map_err(|source| RunError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let csv_path = out_dir.join("trace.csv");
    write_csv(&csv_path, &rows)?;
    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, &summary).map_err(|source| RunError::Io {
        path: summary_path.clone(),
        source,
    })?;

    Ok(RunOutcome {
        suites: outcomes,
        rows,
        passed,
        summary,
        csv_path: Some(csv_path),
        summary_path: Some(summary_path),
    })
}

fn write_csv(path: &PathBuf, rows: &[CsvRow]) -> Result<(), RunError> {
    let mut file = std::fs::File::create(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    let mut write = |line: &str| -> Result<(), RunError> {
        writeln!(file, "{line}").map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })
    };
    write(CSV_SCHEMA)?;
    write("experiment,backend,seed,suite,kind,n,M,B,value,bound,pass")?;
    for row in rows {
        write(&row.to_line())?;
    }
    Ok(())
}

fn render_summary(
    config: &ExperimentConfig,
    backend: BackendChoice,
    seed: u64,
    schedule: &Schedule,
    ps: &ProcessSpace,
    outcomes: &[(Suite, Report)],
    passed: bool,
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "mixingale verification run");
    let _ = writeln!(out, "experiment: {}", config.experiment_id());
    match backend {
        BackendChoice::Exhaustive => {
            let _ = writeln!(
                out,
                "backend: exhaustive ({} atoms)",
                ps.space().atom_count()
            );
        }
        BackendChoice::MonteCarlo => {
            let _ = writeln!(
                out,
                "backend: monte-carlo ({} trials, process seed {})",
                config.run.trials, config.process.seed
            );
        }
    }
    let _ = writeln!(out, "check seed: {seed}");
    let _ = writeln!(
        out,
        "schedule: n = {:?}, M = {:?}, B = {:?}, decay threshold {}",
        schedule.n_grid, schedule.m_grid, schedule.b_grid, schedule.decay_threshold
    );
    let _ = writeln!(out);
    for (suite, report) in outcomes {
        let verdict = if report.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "suite {suite}: {verdict}");
        for check in &report.checks {
            let _ = writeln!(out, "  {check}");
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "result: {} ({}/{} suites passed)",
        if passed { "PASS" } else { "FAIL" },
        outcomes.iter().filter(|(_, r)| r.passed()).count(),
        outcomes.len()
    );
    out
}

fn build_certificate(
    config: &ExperimentConfig,
    ps: &ProcessSpace,
    seq: &AdaptedSequence,
    schedule: &Schedule,
    tol: Tolerance,
) -> Result<MixingaleCertificate, RunError> {
    let t = ps.filtration().global();
    let c: Vec<LatticeElement> = match config.certificate.magnitudes {
        MagnitudeChoice::Unit => (0..seq.len())
            .map(|_| LatticeElement::unit(ps.space().clone()))
            .collect(),
        MagnitudeChoice::ConditionalAbs => seq
            .terms()
            .iter()
            .map(|f| t.apply(&f.abs()))
            .collect::<Result<_, _>>()
            .map_err(RunError::Core)?,
    };
    let max_lag = *schedule.m_grid.last().expect("validated nonempty");
    match config.certificate.mode {
        CertificateMode::Explicit => Ok(MixingaleCertificate {
            c,
            phi: config.certificate.phi.clone(),
            phi_tail_zero: config.certificate.phi_tail_zero,
        }),
        CertificateMode::Minimal => {
            let phi = minimal_phi(seq.terms(), seq.filtration(), &c, max_lag + 1, tol)
                .map_err(RunError::Core)?;
            Ok(MixingaleCertificate {
                c,
                phi,
                phi_tail_zero: false,
            })
        }
    }
}

/// Randomized verification of the lattice and operator axioms on the built
/// space.
fn lattice_axioms_suite(ps: &ProcessSpace, seed: u64) -> Result<Report, RunError> {
    let space = ps.space().clone();
    let n = space.atom_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c617474);
    let random_element = |rng: &mut ChaCha8Rng| -> LatticeElement {
        let values = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        LatticeElement::new(space.clone(), values).expect("finite values")
    };

    let e = LatticeElement::unit(space.clone());
    // A nontrivial conditioning level when one exists.
    let mid_level = (ps.filtration().index_low() + ps.filtration().index_high()) / 2;
    let t = ps.filtration().at(mid_level.max(1));
    let global = ps.filtration().global();

    let mut sup_inf = 0.0_f64;
    let mut proj_compat = 0.0_f64;
    let mut proj_contract = 0.0_f64;
    let mut mult_laws = 0.0_f64;
    let mut signum_worst = 0.0_f64;
    let mut truncation_worst = 0.0_f64;
    let mut positivity = 0.0_f64;
    let mut linearity = 0.0_f64;
    let mut idempotence = 0.0_f64;
    let mut unit_preservation = 0.0_f64;
    let mut averaging = 0.0_f64;
    let mut contraction = 0.0_f64;

    for _ in 0..8 {
        let f = random_element(&mut rng);
        let g = random_element(&mut rng);
        let h = random_element(&mut rng);
        let mask: Vec<bool> = (0..n).map(|_| rng.random_range(0..2) == 1).collect();
        let p = BandProjection::from_mask(space.clone(), mask).expect("mask length");
        let level = rng.random_range(0.0..4.0);

        // sup + inf = f + g
        let lhs = f.sup(&g)?.add(&f.inf(&g)?)?;
        sup_inf = sup_inf.max(lhs.max_abs_diff(&f.add(&g)?)?);

        // band projections commute with sup/inf and contract positives
        let a = p.project(&f.sup(&g)?)?;
        let b = p.project(&f)?.sup(&p.project(&g)?)?;
        proj_compat = proj_compat.max(a.max_abs_diff(&b)?);
        let u = f.abs();
        let pu = p.project(&u)?;
        proj_contract = proj_contract
            .max(pu.nonnegativity_violation())
            .max(pu.le_violation(&u)?.0)
            .max(p.project(&pu)?.max_abs_diff(&pu)?);

        // f-algebra laws
        mult_laws = mult_laws
            .max(f.multiply(&e)?.max_abs_diff(&f)?)
            .max(
                f.multiply(&g)?
                    .multiply(&h)?
                    .max_abs_diff(&f.multiply(&g.multiply(&h)?)?)?,
            )
            .max(
                f.multiply(&g.add(&h)?)?
                    .max_abs_diff(&f.multiply(&g)?.add(&f.multiply(&h)?)?)?,
            )
            .max(f.abs().multiply(&g.abs())?.nonnegativity_violation());

        // signed unit
        let j = signum_unit(&f);
        signum_worst = signum_worst
            .max(j.multiply(&j)?.max_abs_diff(&e)?)
            .max(j.multiply(&f)?.max_abs_diff(&f.abs())?);

        // truncation split
        let band = BandProjection::truncation(&f, level)?;
        let kept = band.project(&f)?;
        let rest = band.reject(&f)?;
        truncation_worst = truncation_worst
            .max(kept.add(&rest)?.max_abs_diff(&f)?)
            .max((rest.norm_inf() - level).max(0.0));

        // conditional expectation axioms
        positivity = positivity.max(t.apply(&f.abs())?.nonnegativity_violation());
        let alpha = rng.random_range(-2.0..2.0);
        let lin_l = t.apply(&f.scale(alpha).add(&g)?)?;
        let lin_r = t.apply(&f)?.scale(alpha).add(&t.apply(&g)?)?;
        linearity = linearity.max(lin_l.max_abs_diff(&lin_r)?);
        let tf = t.apply(&f)?;
        idempotence = idempotence.max(t.apply(&tf)?.max_abs_diff(&tf)?);
        unit_preservation = unit_preservation
            .max(t.apply(&e)?.max_abs_diff(&e)?)
            .max(global.apply(&e)?.max_abs_diff(&e)?);
        // averaging with the block-constant factor T f
        let lhs = t.apply(&tf.multiply(&g)?)?;
        let rhs = tf.multiply(&t.apply(&g)?)?;
        averaging = averaging.max(lhs.max_abs_diff(&rhs)?);
        contraction = contraction.max(tf.abs().le_violation(&t.apply(&f.abs())?)?.0);
    }

    let mut report = Report::new();
    report.record("sup-inf-identity", sup_inf, IDENTITY_TOL);
    report.record("projection-lattice-compat", proj_compat, IDENTITY_TOL);
    report.record("projection-contractive", proj_contract, IDENTITY_TOL);
    report.record("multiply-f-algebra-laws", mult_laws, 1e-11);
    report.record("signum-unit-identities", signum_worst, IDENTITY_TOL);
    report.record("truncation-split", truncation_worst, IDENTITY_TOL);
    report.record("operator-positivity", positivity, IDENTITY_TOL);
    report.record("operator-linearity", linearity, 1e-11);
    report.record("operator-idempotence", idempotence, IDENTITY_TOL);
    report.record(
        "operator-unit-preservation",
        unit_preservation,
        IDENTITY_TOL,
    );
    report.record("operator-averaging", averaging, 1e-11);
    report.record("operator-abs-contraction", contraction, IDENTITY_TOL);

    // Order continuity on a decreasing random chain.
    let base = random_element(&mut rng).abs();
    let mut chain: Vec<LatticeElement> = (0..6).map(|k| base.scale(0.5_f64.powi(k))).collect();
    chain.push(LatticeElement::zero(space));
    report.merge(order_continuity_check(t, &chain)?);
    Ok(report)
}

fn filtration_suite(ps: &ProcessSpace, seq: &AdaptedSequence) -> Result<Report, RunError> {
    let mut report = verify_filtration(ps.filtration());
    let mut worst = 0.0_f64;
    let mut at = 0usize;
    for (idx, term) in seq.terms().iter().enumerate() {
        let spread = ps.filtration().at(idx as i64 + 1).range_violation(term)?;
        if spread > worst {
            worst = spread;
            at = idx + 1;
        }
    }
    report.record_located(
        "adaptedness",
        worst,
        ADAPTED_TOL,
        format!("worst at i = {at}"),
    );
    Ok(report)
}

fn independence_suite(ps: &ProcessSpace, tol: f64) -> Result<Report, RunError> {
    let mut report = Report::new();
    let t = CondExpectation::trivial(ps.space().clone());

    if ps.horizon() >= 2 {
        let first = ps.coordinate_partition(1)?;
        let second = ps.coordinate_partition(2)?;
        report.merge(subspace_independence_check(&first, &second, &t, tol)?);
        let last = ps.coordinate_partition(ps.horizon())?;
        let mut far = independence_check(
            &first.union_projection(&[0]),
            &last.union_projection(&[0]),
            &t,
            tol,
        )?;
        for check in &mut far.checks {
            check.id = format!("far-{}", check.id);
        }
        report.merge(far);
    } else {
        let trivial = Partition::trivial(ps.space().clone());
        let fine = ps.coordinate_partition(1)?;
        report.merge(subspace_independence_check(&trivial, &fine, &t, tol)?);
    }

    // Self-test: the checker must flag the canonical dependent pair, where
    // the two sides differ by exactly 1/4.
    let two = SampleSpace::new(vec![0.5, 0.5]).map_err(RunError::Core)?;
    let t2 = CondExpectation::trivial(two.clone());
    let p = BandProjection::from_mask(two, vec![true, false]).map_err(RunError::Core)?;
    let gap = crate::conditional::independence_gap(&p, &p, &t2)?;
    report.record_with(
        "dependence-detection",
        (0.25 - gap).abs(),
        IDENTITY_TOL,
        format!("observed gap {gap}"),
    );
    Ok(report)
}

fn mixingale_suite(
    ps: &ProcessSpace,
    seq: &AdaptedSequence,
    cert: &MixingaleCertificate,
    schedule: &Schedule,
    tol: Tolerance,
) -> Result<Report, RunError> {
    let max_lag = *schedule.m_grid.last().expect("validated nonempty");
    let mut report = check_mixingale(seq.terms(), seq.filtration(), cert, max_lag, tol)?;
    report.merge(t_mean_zero_check(seq.terms(), seq.filtration(), tol)?);

    // Extend the truncation grid beyond the family bound so the envelope
    // provably vanishes on the grid.
    let t = ps.filtration().global();
    let mut grid = schedule.b_grid.clone();
    let bound = seq.uniform_bound();
    if *grid.last().expect("nonempty") <= bound {
        grid.push(bound + 1.0);
    }
    let profile = uniformity_profile(seq.terms(), t, &grid)?;
    report.record(
        "uniformity-envelope-monotone",
        profile.monotone_violation,
        IDENTITY_TOL,
    );
    report.merge(uniform_family_bound_check(
        &profile,
        seq.terms(),
        t,
        VANISH_EPSILON,
    )?);
    Ok(report)
}

fn mds_suite(
    ps: &ProcessSpace,
    seq: &AdaptedSequence,
    schedule: &Schedule,
    tol: Tolerance,
) -> Result<(Report, Vec<TraceRow>), RunError> {
    let bound = seq.uniform_bound().max(f64::MIN_POSITIVE);
    let (mut report, trace) = mds_cesaro_analysis(seq, bound, &schedule.n_grid, tol)?;

    let diffs = martingale_difference_from(seq)?;
    report.merge(orthogonality_check(
        diffs.terms(),
        ps.filtration().global(),
        1e-10,
    )?);

    let n_max = *schedule.n_grid.last().expect("nonempty");
    let sums = partial_sums(&diffs)?;
    report.merge(signum_square_inequality(
        &sums[n_max],
        ps.filtration().global(),
        n_max,
    )?);

    let mut telescope_worst = 0.0_f64;
    for &m_cap in &schedule.m_grid {
        let parts = telescope(seq.terms(), seq.filtration(), m_cap, n_max)?;
        telescope_worst = telescope_worst.max(parts.reconstruction_gap);
    }
    report.record("telescoping-reconstruction", telescope_worst, TELESCOPE_TOL);

    let rows = trace_rows("mds-cesaro", &trace, tol);
    Ok((report, rows))
}

fn trace_rows(kind: &'static str, trace: &CesaroTrace, tol: Tolerance) -> Vec<TraceRow> {
    let bounds = trace.bound.as_deref().unwrap_or(&[]);
    trace
        .n_grid
        .iter()
        .zip(&trace.values)
        .enumerate()
        .map(|(idx, (&n, value))| {
            let bound = bounds.get(idx).copied();
            let pass = bound
                .map(|b| value.norm_inf() <= b + tol.slack_for(value, 1e-10))
                .unwrap_or(true);
            TraceRow {
                kind,
                n: Some(n),
                m: None,
                b: None,
                value: value.norm_inf(),
                bound,
                pass,
            }
        })
        .collect()
}
