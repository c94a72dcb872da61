//! Acceptance criteria, shared by the `verify` subcommand and the test
//! suite. Each criterion returns a report with its individual checks; the
//! stochastic ones also return the raw bytes of their outputs so that runs
//! on different worker counts can be compared byte for byte.

use std::fmt::Write as _;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{primes_up_to, ArithTable};
use crate::constants::{self, MForm, TrendKind};
use crate::error::{invalid, Result};
use crate::exact::{self, CovKind, CovMethod, ExactResult, MarginalKind};
use crate::montecarlo::{self, Normalization, SampleConfig, Statistic};
use crate::oracle::{self, Statistic as OStat};
use crate::stattest::{self, ReferenceLaw};

/// Master seeds, one per stochastic criterion.
pub const SEED_MOMENTS: u64 = 0x5eed_0005;
pub const SEED_NORMAL: u64 = 0x5eed_0006;
pub const SEED_FRECHET: u64 = 0x5eed_0007;
pub const SEED_POISSON: u64 = 0x5eed_0008;
pub const SEED_STRONG_LAW: u64 = 0x5eed_0010;

/// Worker counts compared by the determinism criterion.
pub const DETERMINISM_WORKERS: [usize; 3] = [1, 4, 16];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `|observed - target| < tol`.
    fn near(label: impl Into<String>, observed: f64, target: f64, tol: f64) -> Self {
        let gap = (observed - target).abs();
        Self::new(
            label,
            gap < tol,
            format!("observed {observed:.10} target {target:.10} gap {gap:.3e} tol {tol:.1e}"),
        )
    }

    fn below(label: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(label, observed < bound, format!("{observed:.5} < {bound}"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub payload: Vec<u8>,
}

impl CriterionReport {
    fn new(id: u32, title: &str, started: Instant, checks: Vec<Check>, payload: Vec<u8>) -> Self {
        Self {
            id,
            title: title.to_string(),
            passed: checks.iter().all(|c| c.passed),
            seconds: started.elapsed().as_secs_f64(),
            checks,
            payload,
        }
    }

    /// One summary line: status, id, title and timing.
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds
        )
    }

    /// The summary line followed by one indented line per check.
    pub fn render(&self) -> String {
        let mut out = self.line();
        for c in &self.checks {
            let _ = write!(
                out,
                "\n    {} {}: {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.label,
                c.detail
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub workers: Option<usize>,
    pub cutoff: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            workers: None,
            cutoff: constants::DEFAULT_CUTOFF,
        }
    }
}

/// Named groups of criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Constants,
    Limits,
    Determinism,
    All,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Suite::Oracle),
            "constants" => Ok(Suite::Constants),
            "limits" => Ok(Suite::Limits),
            "determinism" => Ok(Suite::Determinism),
            "all" => Ok(Suite::All),
            _ => Err(invalid(format!(
                "unknown suite '{s}' (oracle, constants, limits, determinism, all)"
            ))),
        }
    }
}

impl Suite {
    pub fn criteria(&self) -> Vec<u32> {
        match self {
            Suite::Oracle => vec![1],
            Suite::Constants => vec![3, 9],
            Suite::Limits => vec![2, 4, 5, 6, 7, 8, 10],
            Suite::Determinism => vec![11],
            Suite::All => (1..=11).collect(),
        }
    }
}

/// Runs one criterion by number.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Result<CriterionReport> {
    match id {
        1 => criterion_oracle(),
        2 => criterion_dirichlet(),
        3 => criterion_constants(opts.cutoff),
        4 => criterion_second_moment(),
        5 => criterion_moments_vs_simulation(opts.workers),
        6 => criterion_clt(opts.workers),
        7 => criterion_frechet(opts.workers),
        8 => criterion_poisson(opts.workers),
        9 => criterion_tauberian(opts.cutoff),
        10 => criterion_strong_law(),
        11 => criterion_determinism(opts.cutoff),
        _ => Err(invalid(format!("no criterion {id}"))),
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CriterionReport>> {
    suite.criteria().into_iter().map(|id| run_criterion(id, opts)).collect()
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence
// ---------------------------------------------------------------------------

struct Tally {
    label: &'static str,
    compared: u64,
    first_mismatch: Option<String>,
}

impl Tally {
    fn new(label: &'static str) -> Self {
        Self {
            label,
            compared: 0,
            first_mismatch: None,
        }
    }

    fn compare(&mut self, what: impl FnOnce() -> String, got: &ExactResult, want: &BigRational) {
        self.compared += 1;
        let ok = match got.to_rational() {
            Some(r) => &r == want,
            None => {
                let w = want.to_f64().unwrap_or(f64::NAN);
                let scale = w.abs().max(f64::MIN_POSITIVE);
                (got.value() - w).abs() <= 1e-12 * scale || (w == 0.0 && got.value().abs() < 1e-300)
            }
        };
        if !ok && self.first_mismatch.is_none() {
            self.first_mismatch = Some(format!("{}: got {} want {}", what(), got.value(), want));
        }
    }

    fn check(self) -> Check {
        match self.first_mismatch {
            None => Check::new(self.label, true, format!("{} comparisons agree", self.compared)),
            Some(m) => Check::new(self.label, false, m),
        }
    }
}

pub const ORACLE_MAX_N: u64 = 30;

fn criterion_oracle() -> Result<CriterionReport> {
    let started = Instant::now();
    let table = ArithTable::build(ORACLE_MAX_N, &[1, 2, 3])?;
    let mut pmf = Tally::new("gcd pmf");
    let mut moments = Tally::new("gcd moments");
    let mut marginals = Tally::new("marginal profiles U/W");
    let mut means = Tally::new("means mu/nu");
    let mut variances = Tally::new("variances c/d");
    let mut covs = Tally::new("covariances gamma/omega (both routes)");
    let mut ustats = Tally::new("var_C / var_Z");
    let mut pis = Tally::new("mixed moment pi");
    let mut tails = Tally::new("gcd tail");
    for n in 1..=ORACLE_MAX_N {
        for k in [0, n / 2, n] {
            tails.compare(|| format!("n={n} K={k}"), &exact::gcd_tail(&table, n, k)?, &oracle::gcd_tail(n, k));
        }
        for r in 2..=3u32 {
            for (got, want) in exact::gcd_pmf(&table, n, r)?.iter().zip(oracle::gcd_pmf(n, r)) {
                pmf.compare(|| format!("n={n} r={r}"), got, &want);
            }
            for q in 1..=2 {
                let stat = OStat::Moment(q);
                moments.compare(
                    || format!("n={n} r={r} q={q}"),
                    &exact::gcd_moment(&table, n, r, q)?,
                    &oracle::expectation(n, r, stat),
                );
                pis.compare(
                    || format!("n={n} r={r} q={q}"),
                    &exact::mixed_moment_pi(&table, n, r, q)?,
                    &oracle::mixed_moment_pi(n, r, q),
                );
            }
            for (kind, stat) in [
                (MarginalKind::Probability, OStat::Indicator),
                (MarginalKind::Expectation, OStat::Moment(1)),
            ] {
                let profile = exact::marginal_profile(&table, n, r, kind)?;
                for k in 1..=n {
                    marginals.compare(
                        || format!("n={n} r={r} k={k} {kind:?}"),
                        &profile.value(k)?,
                        &oracle::marginal(n, r, k, stat),
                    );
                }
                let (mean, var) = match kind {
                    MarginalKind::Probability => (exact::mean_mu(&table, n, r)?, exact::var_c(&table, n, r)?),
                    MarginalKind::Expectation => (exact::mean_nu(&table, n, r)?, exact::var_d(&table, n, r)?),
                };
                means.compare(|| format!("n={n} r={r} {kind:?}"), &mean, &oracle::expectation(n, r + 1, stat));
                variances.compare(
                    || format!("n={n} r={r} {kind:?}"),
                    &var,
                    &oracle::marginal_variance(n, r, stat),
                );
            }
            for (kind, stat) in [
                (CovKind::Indicator, OStat::Indicator),
                (CovKind::Moment(1), OStat::Moment(1)),
                (CovKind::Moment(2), OStat::Moment(2)),
            ] {
                for s in 0..=r {
                    let want = oracle::shared_covariance(n, r, s, stat);
                    for method in [CovMethod::DoubleSum, CovMethod::Conditioning] {
                        covs.compare(
                            || format!("n={n} r={r} s={s} {kind:?} {method:?}"),
                            &exact::shared_covariance_with(&table, n, r, s, kind, method)?,
                            &want,
                        );
                    }
                }
                for m in [r as u64, r as u64 + 1, r as u64 + 3] {
                    let got = match kind {
                        CovKind::Indicator => exact::var_coprime_count(&table, n, m, r)?,
                        CovKind::Moment(q) => exact::var_gcd_sum(&table, n, m, r, q)?,
                    };
                    ustats.compare(
                        || format!("n={n} m={m} r={r} {kind:?}"),
                        &got,
                        &oracle::sample_variance(n, m, r, stat),
                    );
                }
            }
        }
    }
    let checks = vec![
        pmf.check(),
        moments.check(),
        marginals.check(),
        means.check(),
        variances.check(),
        covs.check(),
        ustats.check(),
        pis.check(),
        tails.check(),
    ];
    Ok(CriterionReport::new(
        1,
        "exact module equals exhaustive enumeration (n <= 30, r in {2,3}, q in {1,2})",
        started,
        checks,
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// 2. Dirichlet and mean limits
// ---------------------------------------------------------------------------

fn criterion_dirichlet() -> Result<CriterionReport> {
    let started = Instant::now();
    let table = ArithTable::build(1_000_000, &[1])?;
    let z2 = constants::zeta(2.0)?;
    let z3 = constants::zeta(3.0)?;
    let mu = exact::mean_mu(&table, 1_000_000, 1)?;
    let nu = exact::mean_nu(&table, 100_000, 2)?;
    let checks = vec![
        Check::near("mu_1 at n=1e6 vs 1/zeta(2)", mu.value(), 1.0 / z2, 1e-3),
        Check::near("nu_2 at n=1e5 vs zeta(2)/zeta(3)", nu.value(), z2 / z3, 1e-2),
    ];
    Ok(CriterionReport::new(2, "Dirichlet density and mean gcd limits", started, checks, Vec::new()))
}

// ---------------------------------------------------------------------------
// 3. Constants
// ---------------------------------------------------------------------------

/// Truncation used for the double-sum cross-check of `M(2)`.
pub const M_TRUNCATION: u64 = 5000;

fn criterion_constants(cutoff: u64) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let delta = constants::delta(cutoff)?;
    checks.push(Check::near("Delta", delta.value, 0.01186, 5e-5));
    let toth = constants::delta_toth(cutoff)?;
    checks.push(Check::near("Delta_Toth - 2 Delta", toth.value - 2.0 * delta.value, 0.0, 1e-9));
    let worst = primes_up_to(10_000)
        .into_iter()
        .map(|p| {
            let p = p as f64;
            let lhs = (1.0 + p.powi(-3) - 4.0 / (p * (p + 1.0))) * (1.0 - p.powi(-2));
            let rhs = 1.0 - 5.0 * p.powi(-2) + 5.0 * p.powi(-3) - p.powi(-5);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::near("per-prime factor identity, p <= 1e4 (max gap)", worst, 0.0, 1e-15));
    for t in [1.5, 2.0, 3.0] {
        let a = constants::m_constant(t, MForm::First, cutoff)?;
        let b = constants::m_constant(t, MForm::Second, cutoff)?;
        checks.push(Check::near(format!("M({t}) first vs second product form"), a.value, b.value, 1e-10));
    }
    let table = ArithTable::build(M_TRUNCATION, &[1])?;
    let m2 = constants::m_constant(2.0, MForm::Second, cutoff)?;
    let truncated = constants::truncated_m_sum(&table, 2.0, M_TRUNCATION);
    checks.push(Check::near(
        format!("M(2) vs double sum over i,j <= {M_TRUNCATION}"),
        truncated,
        m2.value,
        1e-4,
    ));
    Ok(CriterionReport::new(3, "Euler-product constants", started, checks, Vec::new()))
}

// ---------------------------------------------------------------------------
// 4. Second moment of the pair gcd
// ---------------------------------------------------------------------------

fn criterion_second_moment() -> Result<CriterionReport> {
    let started = Instant::now();
    let n = 1_000_000u64;
    let table = ArithTable::build(n, &[1, 2])?;
    let moment = exact::gcd_moment(&table, n, 2, 2)?;
    let target = (2.0 * constants::zeta(2.0)? / constants::zeta(3.0)? - 1.0) / 3.0;
    let scaled = moment.value() / n as f64;
    let rel = (scaled - target).abs() / target;
    let checks = vec![Check::new(
        "E gcd^2 / n at n=1e6 vs (2 zeta(2)/zeta(3) - 1)/3",
        rel < 0.02,
        format!("observed {scaled:.6} target {target:.6} relative gap {rel:.4} < 0.02"),
    )];
    Ok(CriterionReport::new(4, "second moment of the pair gcd", started, checks, Vec::new()))
}

// ---------------------------------------------------------------------------
// 5. Exact moments vs simulation
// ---------------------------------------------------------------------------

fn raw_bytes(raw: &[u128]) -> Vec<u8> {
    raw.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn float_bytes(values: impl IntoIterator<Item = f64>) -> Vec<u8> {
    values.into_iter().flat_map(|v| v.to_bits().to_le_bytes()).collect()
}

/// Sample mean and variance against exact values, with standard errors
/// from the sample's second and fourth central moments.
fn moment_checks(label: &str, raw: &[u128], mean: f64, var: f64) -> Vec<Check> {
    let r = raw.len() as f64;
    let xs: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
    let m = xs.iter().sum::<f64>() / r;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / r;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / r;
    let s2 = m2 * r / (r - 1.0);
    let se_mean = (s2 / r).sqrt();
    let se_var = ((m4 - m2 * m2) / r).sqrt();
    let zm = (m - mean) / se_mean;
    let zv = (s2 - var) / se_var;
    vec![
        Check::new(
            format!("{label} mean"),
            zm.abs() < 4.0,
            format!("sample {m:.5} exact {mean:.5} z {zm:.2}, |z| < 4"),
        ),
        Check::new(
            format!("{label} variance"),
            zv.abs() < 4.0,
            format!("sample {s2:.5} exact {var:.5} z {zv:.2}, |z| < 4"),
        ),
    ]
}

fn criterion_moments_vs_simulation(workers: Option<usize>) -> Result<CriterionReport> {
    let started = Instant::now();
    let (n, m, reps) = (100u64, 20u64, 100_000u64);
    let table = ArithTable::build(n, &[1])?;
    let config = SampleConfig::new(m, n, reps, SEED_MOMENTS);
    let mut checks = Vec::new();
    let mut payload = Vec::new();
    for (stat, label) in [(Statistic::CoprimeCount, "C"), (Statistic::GcdSum, "Z")] {
        let run = montecarlo::run_replicates(&table, &config, stat, Normalization::None, workers)?;
        let (mean, var) = match stat {
            Statistic::CoprimeCount => (
                exact::mean_coprime_count(&table, n, m, 2)?,
                exact::var_coprime_count(&table, n, m, 2)?,
            ),
            _ => (exact::mean_gcd_sum(&table, n, m, 2, 1)?, exact::var_gcd_sum(&table, n, m, 2, 1)?),
        };
        checks.extend(moment_checks(label, &run.raw, mean.value(), var.value()));
        payload.extend(raw_bytes(&run.raw));
    }
    Ok(CriterionReport::new(
        5,
        "exact mean/variance of C and Z vs simulation (n=100, m=20, R=1e5)",
        started,
        checks,
        payload,
    ))
}

// ---------------------------------------------------------------------------
// 6. Normal limits
// ---------------------------------------------------------------------------

fn criterion_clt(workers: Option<usize>) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let mut payload = Vec::new();
    for (stat, label, m, n) in [
        (Statistic::CoprimeCount, "C (m=1000, n=1000)", 1000u64, 1000u64),
        (Statistic::GcdSum, "Z (m=2000, n=40)", 2000, 40),
    ] {
        let table = ArithTable::build(n, &[1])?;
        let config = SampleConfig::new(m, n, 1000, SEED_NORMAL);
        let run = montecarlo::run_replicates(&table, &config, stat, Normalization::ExactMoments, workers)?;
        let ks = stattest::ks_distance(&run.distribution()?, &ReferenceLaw::StandardNormal)?;
        checks.push(Check::below(format!("KS of normalized {label} vs N(0,1)"), ks, 0.06));
        payload.extend(raw_bytes(&run.raw));
        payload.extend(float_bytes(run.normalized.iter().copied()));
    }
    Ok(CriterionReport::new(6, "asymptotic normality of C and Z", started, checks, payload))
}

// ---------------------------------------------------------------------------
// 7. Fréchet limit of the maximum gcd
// ---------------------------------------------------------------------------

fn criterion_frechet(workers: Option<usize>) -> Result<CriterionReport> {
    let started = Instant::now();
    let m = 64u64;
    let n = montecarlo::NRule::Power(2.5).resolve(m)?;
    let table = ArithTable::build(n, &[1])?;
    let config = SampleConfig::new(m, n, 2000, SEED_FRECHET);
    let run = montecarlo::run_replicates(&table, &config, Statistic::MaxGcd, Normalization::FrechetScale, workers)?;
    let law = ReferenceLaw::frechet(1.0 / constants::zeta(2.0)?)?;
    let ks = stattest::ks_distance(&run.distribution()?, &law)?;
    let checks = vec![Check::below(
        format!("KS of M/C(m,2) vs exp(-1/(t zeta(2))), m={m}, n={n}"),
        ks,
        0.07,
    )];
    let mut payload = raw_bytes(&run.raw);
    payload.extend(float_bytes(run.normalized.iter().copied()));
    Ok(CriterionReport::new(7, "Fréchet limit of the maximum pair gcd", started, checks, payload))
}

// ---------------------------------------------------------------------------
// 8. Poisson limit of exceedance counts
// ---------------------------------------------------------------------------

fn criterion_poisson(workers: Option<usize>) -> Result<CriterionReport> {
    let started = Instant::now();
    let (m, n) = (100u64, 1_000_000u64);
    let table = ArithTable::build(n, &[1])?;
    let config = SampleConfig::new(m, n, 2000, SEED_POISSON);
    let run = montecarlo::run_replicates(&table, &config, Statistic::Exceedances { t: 1.0 }, Normalization::None, workers)?;
    let lambda = 1.0 / constants::zeta(2.0)?;
    let dist = run.distribution()?;
    let tv = stattest::tv_distance(&dist, lambda, 20)?;
    let mean = dist.mean();
    let se = (dist.variance() / dist.len() as f64).sqrt();
    let z = (mean - lambda) / se;
    let checks = vec![
        Check::below("TV of N(1) vs Poisson(1/zeta(2))", tv, 0.05),
        Check::new(
            "mean of N(1) vs 1/zeta(2)",
            z.abs() < 3.0,
            format!("sample {mean:.4} target {lambda:.4} z {z:.2}, |z| < 3"),
        ),
    ];
    Ok(CriterionReport::new(
        8,
        "Poisson limit of large-gcd pair counts (m=100, n=1e6)",
        started,
        checks,
        raw_bytes(&run.raw),
    ))
}

// ---------------------------------------------------------------------------
// 9. Partial-sum trends
// ---------------------------------------------------------------------------

pub const TREND_GRID: [u64; 3] = [1_000, 100_000, 1_000_000];

fn criterion_tauberian(cutoff: u64) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    let mut payload = Vec::new();
    let mut reports = Vec::new();
    for kind in [TrendKind::ProductSum, TrendKind::LcmSum, TrendKind::PillaiSq] {
        let rep = constants::tauberian_trend(kind, &TREND_GRID, cutoff)?;
        let detail = rep
            .points
            .iter()
            .map(|p| format!("N={} ratio {:.5} dist {:.5}", p.n, p.ratio, p.distance))
            .collect::<Vec<_>>()
            .join("; ");
        checks.push(Check::new(
            format!("{kind:?} ratio approaches {:.6}", rep.target),
            rep.strictly_approaching(),
            detail,
        ));
        payload.extend(float_bytes(rep.points.iter().map(|p| p.sum)));
        reports.push(rep);
    }
    let dominated = reports[0]
        .points
        .iter()
        .zip(&reports[1].points)
        .all(|(prod, lcm)| lcm.sum >= prod.sum);
    checks.push(Check::new(
        "lcm-restricted sum >= product-restricted sum",
        dominated,
        reports[0]
            .points
            .iter()
            .zip(&reports[1].points)
            .map(|(a, b)| format!("N={}: {:.5} >= {:.5}", a.n, b.sum, a.sum))
            .collect::<Vec<_>>()
            .join("; "),
    ));
    Ok(CriterionReport::new(9, "ln^3 partial-sum trends", started, checks, payload))
}

// ---------------------------------------------------------------------------
// 10. Strong law
// ---------------------------------------------------------------------------

fn criterion_strong_law() -> Result<CriterionReport> {
    let started = Instant::now();
    let n = 100u64;
    let table = ArithTable::build(n, &[1])?;
    let grid: Vec<u64> = [2u64, 10, 100, 1000, 10_000].to_vec();
    let a = montecarlo::strong_law_trajectory(&table, n, 2, &grid, SEED_STRONG_LAW)?;
    let b = montecarlo::strong_law_trajectory(&table, n, 2, &grid, SEED_STRONG_LAW)?;
    let last = a.last().unwrap().ratio;
    let checks = vec![
        Check::near("C_m / E C_m at m=1e4 (n=100)", last, 1.0, 0.02),
        Check::new("trajectory identical on rerun", a == b, format!("{} grid points", a.len())),
    ];
    Ok(CriterionReport::new(
        10,
        "strong law for coprime pair counts",
        started,
        checks,
        float_bytes(a.iter().map(|p| p.ratio)),
    ))
}

// ---------------------------------------------------------------------------
// 11. Determinism across worker counts
// ---------------------------------------------------------------------------

fn criterion_determinism(cutoff: u64) -> Result<CriterionReport> {
    let started = Instant::now();
    let mut checks = Vec::new();
    for id in 5..=10u32 {
        let mut payloads = Vec::new();
        for w in DETERMINISM_WORKERS {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            let opts = VerifyOptions {
                workers: Some(w),
                cutoff,
            };
            let rep = pool.install(|| run_criterion(id, &opts))?;
            payloads.push(rep.payload);
        }
        let same = payloads.windows(2).all(|w| w[0] == w[1]);
        checks.push(Check::new(
            format!("criterion {id} outputs for workers {DETERMINISM_WORKERS:?}"),
            same && !payloads[0].is_empty(),
            format!("{} bytes each, identical: {same}", payloads[0].len()),
        ));
    }
    Ok(CriterionReport::new(11, "byte-identical outputs across worker counts", started, checks, Vec::new()))
}

/// Relative gap `|a - b| / |b|` of two rationals, for reporting.
pub fn relative_gap(a: &BigRational, b: &BigRational) -> f64 {
    if b.is_zero() {
        return (a - b).abs().to_f64().unwrap_or(f64::INFINITY);
    }
    ((a - b) / b).abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_cover_all_criteria() {
        let mut ids: Vec<u32> = [Suite::Oracle, Suite::Constants, Suite::Limits, Suite::Determinism]
            .iter()
            .flat_map(|s| s.criteria())
            .collect();
        ids.sort();
        assert_eq!(ids, Suite::All.criteria());
        assert!("bogus".parse::<Suite>().is_err());
        assert!(run_criterion(12, &VerifyOptions::default()).is_err());
    }

    #[test]
    fn report_lines() {
        let rep = CriterionReport::new(
            4,
            "x",
            Instant::now(),
            vec![Check::below("a", 0.1, 0.2), Check::below("b", 0.3, 0.2)],
            Vec::new(),
        );
        assert!(!rep.passed);
        assert!(rep.line().starts_with("[FAIL] criterion  4: x"));
        assert_eq!(rep.render().lines().count(), 3);
    }

    #[test]
    fn tally_flags_mismatch() {
        let mut t = Tally::new("t");
        let want = BigRational::new(1.into(), 3.into());
        t.compare(|| "a".into(), &ExactResult::exact(1, 3, 1), &want);
        assert!(t.first_mismatch.is_none());
        t.compare(|| "b".into(), &ExactResult::approximate(1.0 / 3.0, 3, 1), &want);
        assert!(t.first_mismatch.is_none());
        t.compare(|| "c".into(), &ExactResult::exact(2, 3, 1), &want);
        assert!(!t.check().passed);
    }
}
