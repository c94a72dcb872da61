use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use gcdstat::constants;
use gcdstat::exact::{self, CovKind, ExactRecord, MarginalKind};
use gcdstat::montecarlo::{self, NRule, Normalization, SampleConfig, Statistic};
use gcdstat::stattest::{self, ReferenceLaw};
use gcdstat::verify::{self, Suite, VerifyOptions};
use serde::Serialize;

use crate::cache;
use crate::output::{emit, RunManifest};
use crate::{Command, ConstantsArgs, ExactArgs, Format, Quantity, SimulateArgs, StatisticArg, SuiteArg, TablesArgs, VerifyArgs};

/// A bad combination of flags that clap cannot catch on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub fn run(cli: crate::Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Tables(a) => tables(a),
        Command::Exact(a) => exact_cmd(a),
        Command::Constants(a) => constants_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify_cmd(a),
    }
    .map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TablesParams<'a> {
    n: u64,
    orders: &'a [u32],
    cache: String,
}

#[derive(Serialize)]
struct TableSummary {
    n_max: u64,
    orders: Vec<u32>,
    primes: usize,
    mertens: i64,
    totient_sum: u128,
    divisor_sum: u64,
    path: String,
    cache_hit: bool,
    sha256: String,
}

fn tables(a: TablesArgs) -> Result<bool> {
    let started = Instant::now();
    if a.n == 0 {
        return usage("--n must be at least 1");
    }
    let manifest = RunManifest::new(
        "tables",
        TablesParams {
            n: a.n,
            orders: &a.orders,
            cache: a.cache.display().to_string(),
        },
        None,
    )?;
    let c = cache::obtain(&a.cache, a.n, &a.orders)?;
    let t = &c.table;
    let mut summary = TableSummary {
        n_max: t.n_max(),
        orders: t.orders(),
        primes: t.primes().len(),
        mertens: 0,
        totient_sum: 0,
        divisor_sum: 0,
        path: c.path.display().to_string(),
        cache_hit: c.hit,
        sha256: c.sha256.clone(),
    };
    for k in 1..=t.n_max() {
        summary.mertens += t.mobius(k)? as i64;
        summary.totient_sum += t.totient(k)? as u128;
        summary.divisor_sum += t.tau(k)? as u64;
    }
    emit(manifest, started, a.common.format, a.common.out.as_deref(), &summary, &[&summary])?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ExactParams {
    quantity: String,
    n: u64,
    r: u32,
    q: u32,
    s: Option<u32>,
    m: Option<u64>,
    k: Option<u64>,
}

/// Flat CSV view of an [`ExactRecord`]; absent fields become empty cells.
#[derive(Serialize)]
struct ExactRow {
    quantity: String,
    n: u64,
    r: Option<u32>,
    q: Option<u32>,
    s: Option<u32>,
    m: Option<u64>,
    k: Option<u64>,
    value: f64,
    exact: bool,
    numerator: Option<String>,
    denom_power: Option<u32>,
}

impl From<&ExactRecord> for ExactRow {
    fn from(r: &ExactRecord) -> Self {
        Self {
            quantity: r.quantity.clone(),
            n: r.n,
            r: r.r,
            q: r.q,
            s: r.s,
            m: r.m,
            k: r.k,
            value: r.value,
            exact: r.exact,
            numerator: r.numerator.clone(),
            denom_power: r.denom_power,
        }
    }
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::Pmf => "pmf",
        Quantity::Moment => "moment",
        Quantity::Tail => "tail",
        Quantity::U => "U",
        Quantity::W => "W",
        Quantity::Mu => "mu",
        Quantity::Nu => "nu",
        Quantity::C => "c",
        Quantity::D => "d",
        Quantity::Gamma => "gamma",
        Quantity::Omega => "omega",
        Quantity::Pi => "pi",
        Quantity::MeanC => "meanC",
        Quantity::VarC => "varC",
        Quantity::MeanZ => "meanZ",
        Quantity::VarZ => "varZ",
    }
}

fn exact_cmd(a: ExactArgs) -> Result<bool> {
    let started = Instant::now();
    let name = quantity_name(a.quantity);
    if a.n == 0 {
        return usage("--n must be at least 1");
    }
    let manifest = RunManifest::new(
        "exact",
        ExactParams {
            quantity: name.to_string(),
            n: a.n,
            r: a.r,
            q: a.q,
            s: a.s,
            m: a.m,
            k: a.k,
        },
        None,
    )?;
    let need_m = || a.m.map_or_else(|| usage(format!("{name} needs --m")), Ok);
    let need_s = || a.s.map_or_else(|| usage(format!("{name} needs --s")), Ok);
    let need_k = || a.k.map_or_else(|| usage(format!("{name} needs --k")), Ok);
    let table = cache::table_for(a.cache.as_deref(), a.n, &[1, a.q])?;
    let t = &table;
    let (n, r, q) = (a.n, a.r, a.q);
    let records: Vec<ExactRecord> = match a.quantity {
        Quantity::Pmf => exact::gcd_pmf(t, n, r)?
            .into_iter()
            .zip(1u64..)
            .map(|(p, k)| p.record(name).with_r(r).with_k(k))
            .collect(),
        Quantity::Moment => vec![exact::gcd_moment(t, n, r, q)?.record(name).with_r(r).with_q(q)],
        Quantity::Tail => vec![exact::gcd_tail(t, n, need_k()?)?.record(name).with_k(need_k()?)],
        Quantity::U | Quantity::W => {
            let k = need_k()?;
            let kind = if a.quantity == Quantity::U {
                MarginalKind::Probability
            } else {
                MarginalKind::Expectation
            };
            let profile = exact::marginal_profile(t, n, r, kind)?;
            vec![profile.value(k)?.record(name).with_r(r).with_k(k)]
        }
        Quantity::Mu => vec![exact::mean_mu(t, n, r)?.record(name).with_r(r)],
        Quantity::Nu => vec![exact::mean_nu(t, n, r)?.record(name).with_r(r)],
        Quantity::C => vec![exact::var_c(t, n, r)?.record(name).with_r(r)],
        Quantity::D => vec![exact::var_d(t, n, r)?.record(name).with_r(r)],
        Quantity::Gamma => {
            let s = need_s()?;
            vec![exact::shared_covariance(t, n, r, s, CovKind::Indicator)?
                .record(name)
                .with_r(r)
                .with_s(s)]
        }
        Quantity::Omega => {
            let s = need_s()?;
            vec![exact::shared_covariance(t, n, r, s, CovKind::Moment(q))?
                .record(name)
                .with_r(r)
                .with_q(q)
                .with_s(s)]
        }
        Quantity::Pi => vec![exact::mixed_moment_pi(t, n, r, q)?.record(name).with_r(r).with_q(q)],
        Quantity::MeanC => {
            let m = need_m()?;
            vec![exact::mean_coprime_count(t, n, m, r)?.record(name).with_r(r).with_m(m)]
        }
        Quantity::VarC => {
            let m = need_m()?;
            vec![exact::var_coprime_count(t, n, m, r)?.record(name).with_r(r).with_m(m)]
        }
        Quantity::MeanZ => {
            let m = need_m()?;
            vec![exact::mean_gcd_sum(t, n, m, r, q)?.record(name).with_r(r).with_q(q).with_m(m)]
        }
        Quantity::VarZ => {
            let m = need_m()?;
            vec![exact::var_gcd_sum(t, n, m, r, q)?.record(name).with_r(r).with_q(q).with_m(m)]
        }
    };
    let rows: Vec<ExactRow> = records.iter().map(ExactRow::from).collect();
    if records.len() == 1 {
        emit(manifest, started, a.common.format, a.common.out.as_deref(), &records[0], &rows)?;
    } else {
        emit(manifest, started, a.common.format, a.common.out.as_deref(), &records, &rows)?;
    }
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CutoffParams {
    cutoff: u64,
}

fn constants_cmd(a: ConstantsArgs) -> Result<bool> {
    let started = Instant::now();
    if a.cutoff < 2 {
        return usage("--cutoff must be at least 2");
    }
    let manifest = RunManifest::new("constants", CutoffParams { cutoff: a.cutoff }, None)?;
    let all = constants::all_constants(a.cutoff)?;
    emit(manifest, started, a.common.format, a.common.out.as_deref(), &all, &all)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateParams<'a> {
    statistic: &'static str,
    m: u64,
    n_rule: &'a str,
    n: u64,
    r: u32,
    q: u32,
    reps: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

#[derive(Serialize)]
struct Comparison {
    law: String,
    distance: &'static str,
    value: f64,
    /// 5% asymptotic KS critical value for this many replicates.
    #[serde(skip_serializing_if = "Option::is_none")]
    ks_critical_5pct: Option<f64>,
}

#[derive(Serialize)]
struct SimulateSummary {
    warnings: Vec<String>,
    raw_mean: f64,
    raw_variance: f64,
    normalization: gcdstat::stattest::NormalizationInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

#[derive(Serialize)]
struct DataRow {
    index: u64,
    raw: u128,
    normalized: f64,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    summary: &'a SimulateSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<&'a [DataRow]>,
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let started = Instant::now();
    let rule: NRule = a.n.parse()?;
    let n = rule.resolve(a.m)?;
    let (label, statistic, normalization) = match a.statistic {
        StatisticArg::C => ("C", Statistic::CoprimeCount, Normalization::ExactMoments),
        StatisticArg::Z => ("Z", Statistic::GcdSum, Normalization::ExactMoments),
        StatisticArg::M if a.r == 2 => ("M", Statistic::MaxGcd, Normalization::FrechetScale),
        StatisticArg::M => ("M", Statistic::MaxGcd, Normalization::None),
        StatisticArg::N => {
            if a.r != 2 {
                return usage("N counts pairs; use --r 2");
            }
            ("N", Statistic::Exceedances { t: a.t }, Normalization::None)
        }
    };
    let config = SampleConfig::new(a.m, n, a.reps, a.seed).with_r(a.r).with_q(a.q);
    config.validate()?;
    let manifest = RunManifest::new(
        "simulate",
        SimulateParams {
            statistic: label,
            m: a.m,
            n_rule: &a.n,
            n,
            r: a.r,
            q: a.q,
            reps: a.reps,
            seed: a.seed,
            t: matches!(statistic, Statistic::Exceedances { .. }).then_some(a.t),
        },
        Some(a.seed),
    )?;
    let table = cache::table_for(a.cache.as_deref(), n, &[1, a.q])?;
    let run = montecarlo::run_replicates(&table, &config, statistic, normalization, a.common.workers)?;
    let inv_zeta2 = 1.0 / constants::zeta(2.0)?;
    let ks_crit = Some(stattest::ks_critical_value(0.05, a.reps as usize));
    let comparison = match (statistic, normalization) {
        (_, Normalization::ExactMoments) => Some(Comparison {
            law: "N(0,1)".into(),
            distance: "ks",
            value: stattest::ks_distance(&run.distribution()?, &ReferenceLaw::StandardNormal)?,
            ks_critical_5pct: ks_crit,
        }),
        (_, Normalization::FrechetScale) => Some(Comparison {
            law: format!("Frechet(scale {inv_zeta2:.6})"),
            distance: "ks",
            value: stattest::ks_distance(&run.distribution()?, &ReferenceLaw::frechet(inv_zeta2)?)?,
            ks_critical_5pct: ks_crit,
        }),
        (Statistic::Exceedances { t }, _) => {
            let lambda = inv_zeta2 / t;
            Some(Comparison {
                law: format!("Poisson({lambda:.6})"),
                distance: "tv",
                value: stattest::tv_distance(&run.distribution()?, lambda, 20)?,
                ks_critical_5pct: None,
            })
        }
        _ => None,
    };
    let summary = SimulateSummary {
        warnings: config.warnings(statistic),
        raw_mean: run.raw_mean(),
        raw_variance: if run.raw.len() > 1 { run.raw_variance() } else { 0.0 },
        normalization: run.normalization,
        comparison,
    };
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let rows: Vec<DataRow> = run
        .raw
        .iter()
        .zip(&run.normalized)
        .zip(0u64..)
        .map(|((&raw, &normalized), index)| DataRow { index, raw, normalized })
        .collect();
    let output = SimulateOutput {
        summary: &summary,
        data: (a.common.format == Format::Json).then_some(&rows[..]),
    };
    emit(manifest, started, a.common.format, a.common.out.as_deref(), &output, &rows)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyParams {
    suite: &'static str,
    cutoff: u64,
    workers: Option<usize>,
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    id: u32,
    title: &'a str,
    passed: bool,
    seconds: f64,
}

fn verify_cmd(a: VerifyArgs) -> Result<bool> {
    let started = Instant::now();
    let (name, suite) = match a.suite {
        SuiteArg::Oracle => ("oracle", Suite::Oracle),
        SuiteArg::Constants => ("constants", Suite::Constants),
        SuiteArg::Limits => ("limits", Suite::Limits),
        SuiteArg::Determinism => ("determinism", Suite::Determinism),
        SuiteArg::All => ("all", Suite::All),
    };
    if a.common.workers == Some(0) {
        return usage("--workers must be at least 1");
    }
    let manifest = RunManifest::new(
        "verify",
        VerifyParams {
            suite: name,
            cutoff: a.cutoff,
            workers: a.common.workers,
        },
        None,
    )?;
    let opts = VerifyOptions {
        workers: a.common.workers,
        cutoff: a.cutoff,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = a.common.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build()?;
    let mut reports = Vec::new();
    for id in suite.criteria() {
        let report = pool.install(|| verify::run_criterion(id, &opts))?;
        println!("{}", report.render());
        reports.push(report);
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    if let Some(out) = a.common.out.as_deref() {
        let rows: Vec<VerifyRow> = reports
            .iter()
            .map(|r| VerifyRow {
                id: r.id,
                title: &r.title,
                passed: r.passed,
                seconds: r.seconds,
            })
            .collect();
        emit(manifest, started, a.common.format, Some(out), &reports, &rows)?;
    }
    Ok(passed == reports.len())
}
