//! Seeded sampling of uniform integers and fast statistics of their gcds.
//!
//! Every replicate draws from its own ChaCha8 stream: the generator is keyed
//! by the master seed and the stream number is the replicate index, so a
//! replicate's values do not depend on which thread ran it or in what
//! order. Results are stored by replicate index.
//!
//! Statistics go through divisor multiplicities: `cnt(d)` is the number of
//! sample members divisible by d, filled by enumerating the divisors of each
//! member. The number of r-subsets whose members are all divisible by d is
//! `C(cnt(d), r)`, and Möbius inversion over d recovers exact-gcd counts.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{binomial, binomial_f64, ArithTable};
use crate::error::{invalid, Error, Result};
use crate::exact;
use crate::stattest::{EmpiricalDistribution, NormalizationInfo};

/// Parameters of a simulation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub m: u64,
    pub n: u64,
    pub r: u32,
    pub q: u32,
    pub replicates: u64,
    pub master_seed: u64,
}

impl SampleConfig {
    pub fn new(m: u64, n: u64, replicates: u64, master_seed: u64) -> Self {
        Self {
            m,
            n,
            r: 2,
            q: 1,
            replicates,
            master_seed,
        }
    }

    pub fn with_r(mut self, r: u32) -> Self {
        self.r = r;
        self
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        if self.r < 2 {
            return Err(invalid("r must be >= 2"));
        }
        if self.m < self.r as u64 {
            return Err(invalid("m must be >= r"));
        }
        if self.q == 0 {
            return Err(invalid("q must be >= 1"));
        }
        if self.replicates == 0 {
            return Err(invalid("replicate count must be >= 1"));
        }
        Ok(())
    }

    /// Notes about parameter regimes where no limit theorem applies. These
    /// never block a run.
    pub fn warnings(&self, statistic: Statistic) -> Vec<String> {
        let mut out = Vec::new();
        let m = self.m as f64;
        if self.n < 2 {
            out.push("n = 1: every sample is constant".to_string());
        }
        match statistic {
            Statistic::GcdSum if self.n as f64 > m.sqrt() => out.push(format!(
                "n = {} exceeds m^0.5 = {:.1}: gcd-sum normality is only established for n <= m^β with β < 1/2",
                self.n,
                m.sqrt()
            )),
            Statistic::MaxGcd if (self.n as f64) < m.powf(2.0) => out.push(format!(
                "n = {} is below m^2 = {:.0}: the Fréchet limit needs n >= m^β with β > 2",
                self.n,
                m * m
            )),
            Statistic::MaxGcd if self.r != 2 => {
                out.push("max-gcd of r-tuples with r >= 3 has no established limit law".to_string())
            }
            _ => {}
        }
        out
    }
}

/// How the sample-space bound n depends on the sample length m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum NRule {
    Fixed(u64),
    /// `round(m^β)`
    Power(f64),
    /// `round(exp(m^γ))`
    ExpPower(f64),
}

impl NRule {
    pub fn resolve(&self, m: u64) -> Result<u64> {
        let v = match *self {
            NRule::Fixed(n) => return Ok(n),
            NRule::Power(b) => (m as f64).powf(b),
            NRule::ExpPower(g) => (m as f64).powf(g).exp(),
        };
        if !v.is_finite() || v >= u32::MAX as f64 {
            return Err(invalid(format!("n-rule gives n = {v:e}, beyond the supported range")));
        }
        Ok((v.round() as u64).max(1))
    }
}

impl FromStr for NRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let exponent = |e: &str| -> Result<f64> {
            let v: f64 = e.parse().map_err(|_| invalid(format!("bad exponent in n-rule '{s}'")))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(invalid(format!("n-rule exponent must be positive in '{s}'")))
            }
        };
        if let Some(e) = t.strip_prefix("m^") {
            return Ok(NRule::Power(exponent(e)?));
        }
        if let Some(inner) = t.strip_prefix("exp(m^").and_then(|x| x.strip_suffix(')')) {
            return Ok(NRule::ExpPower(exponent(inner)?));
        }
        match t.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(NRule::Fixed(n)),
            _ => Err(invalid(format!(
                "n must be a positive integer, 'm^b' or 'exp(m^g)', got '{s}'"
            ))),
        }
    }
}

/// The generator for one replicate.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// m uniform values in `[1, n]` for the given replicate.
pub fn draw_sample(config: &SampleConfig, replicate: u64) -> Result<Vec<u64>> {
    config.validate()?;
    let mut rng = replicate_rng(config.master_seed, replicate);
    Ok(draw_with(&mut rng, config.n, config.m))
}

fn draw_with(rng: &mut ChaCha8Rng, n: u64, m: u64) -> Vec<u64> {
    (0..m).map(|_| rng.random_range(1..=n)).collect()
}

// ---------------------------------------------------------------------------
// Multiplicity statistics
// ---------------------------------------------------------------------------

/// Reusable divisor-multiplicity state for samples bounded by a table.
pub struct Multiplicity<'t> {
    table: &'t ArithTable,
    cnt: Vec<u32>,
    touched: Vec<u64>,
    divs: Vec<u64>,
}

impl<'t> Multiplicity<'t> {
    pub fn new(table: &'t ArithTable) -> Self {
        Self {
            table,
            cnt: vec![0; table.n_max() as usize + 1],
            touched: Vec::new(),
            divs: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &d in &self.touched {
            self.cnt[d as usize] = 0;
        }
        self.touched.clear();
    }

    /// Replaces the current sample.
    pub fn load(&mut self, sample: &[u64]) -> Result<()> {
        self.clear();
        for &x in sample {
            self.push(x)?;
        }
        Ok(())
    }

    /// Adds one member; its divisors are left in `self.divs`.
    fn push(&mut self, x: u64) -> Result<()> {
        self.divs.clear();
        self.table.divisors_into(x, &mut self.divs)?;
        for &d in &self.divs {
            let c = &mut self.cnt[d as usize];
            if *c == 0 {
                self.touched.push(d);
            }
            *c += 1;
        }
        Ok(())
    }

    pub fn count(&self, d: u64) -> u32 {
        self.cnt.get(d as usize).copied().unwrap_or(0)
    }

    fn weighted_sum(&self, r: u32, weight: impl Fn(u64) -> Result<i128>) -> Result<i128> {
        let mut acc: i128 = 0;
        for &d in &self.touched {
            let c = self.cnt[d as usize] as u64;
            if c < r as u64 {
                continue;
            }
            let w = weight(d)?;
            if w == 0 {
                continue;
            }
            let subsets = binomial(c, r as u64)
                .and_then(|b| i128::try_from(b).ok())
                .ok_or_else(|| Error::Overflow(format!("C({c}, {r})")))?;
            acc = w
                .checked_mul(subsets)
                .and_then(|t| acc.checked_add(t))
                .ok_or_else(|| Error::Overflow("gcd statistic accumulation".into()))?;
        }
        Ok(acc)
    }

    /// Number of r-subsets with gcd 1: `Σ_d μ(d) C(cnt(d), r)`.
    pub fn coprime_count(&self, r: u32) -> Result<u128> {
        let v = self.weighted_sum(r, |d| Ok(self.table.mobius_at(d as usize) as i128))?;
        Ok(v as u128)
    }

    /// `Σ_{r-subsets} gcd^q = Σ_d φ_q(d) C(cnt(d), r)`.
    pub fn gcd_sum(&self, r: u32, q: u32) -> Result<u128> {
        let v = self.weighted_sum(r, |d| {
            let j = if q == 1 {
                self.table.totient_at(d as usize) as u128
            } else {
                self.table.jordan(q, d)?
            };
            i128::try_from(j).map_err(|_| Error::Overflow(format!("φ_{q}({d})")))
        })?;
        Ok(v as u128)
    }

    /// Largest d dividing at least r members: the maximum gcd over
    /// r-subsets.
    pub fn max_gcd(&self, r: u32) -> Option<u64> {
        self.touched
            .iter()
            .copied()
            .filter(|&d| self.cnt[d as usize] >= r)
            .max()
    }

    /// Number of pairs whose gcd exceeds `threshold`:
    /// `Σ_{e > T} C(cnt(e), 2) Σ_{d | e, d > T} μ(e/d)`.
    pub fn exceedances(&mut self, threshold: u64) -> Result<u128> {
        let mut acc: i128 = 0;
        let mut divs = std::mem::take(&mut self.divs);
        for &e in &self.touched {
            let c = self.cnt[e as usize] as u64;
            if e <= threshold || c < 2 {
                continue;
            }
            divs.clear();
            self.table.divisors_into(e, &mut divs)?;
            let weight: i128 = divs
                .iter()
                .filter(|&&d| d > threshold)
                .map(|&d| self.table.mobius_at((e / d) as usize) as i128)
                .sum();
            acc += weight * (c * (c - 1) / 2) as i128;
        }
        self.divs = divs;
        Ok(acc as u128)
    }
}

/// Coprime r-subsets of a sample.
pub fn stat_c(table: &ArithTable, sample: &[u64], r: u32) -> Result<u128> {
    let mut m = Multiplicity::new(table);
    m.load(sample)?;
    m.coprime_count(r)
}

/// Sum of `gcd^q` over r-subsets of a sample.
pub fn stat_z(table: &ArithTable, sample: &[u64], r: u32, q: u32) -> Result<u128> {
    let mut m = Multiplicity::new(table);
    m.load(sample)?;
    m.gcd_sum(r, q)
}

/// Maximum pairwise gcd.
pub fn stat_m(table: &ArithTable, sample: &[u64]) -> Result<u64> {
    if sample.len() < 2 {
        return Err(invalid("need at least two values"));
    }
    let mut m = Multiplicity::new(table);
    m.load(sample)?;
    Ok(m.max_gcd(2).unwrap_or(1))
}

/// Pairs with gcd strictly above `threshold`.
pub fn poisson_count(table: &ArithTable, sample: &[u64], threshold: u64) -> Result<u128> {
    let mut m = Multiplicity::new(table);
    m.load(sample)?;
    m.exceedances(threshold)
}

/// Pair-loop reference for [`stat_m`].
pub fn naive_max_gcd(sample: &[u64]) -> u64 {
    let mut best = 0;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            best = best.max(crate::arith::gcd(sample[i], sample[j]));
        }
    }
    best
}

/// Pair-loop reference for [`poisson_count`].
pub fn naive_exceedances(sample: &[u64], threshold: u64) -> u128 {
    let mut count = 0;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            if crate::arith::gcd(sample[i], sample[j]) > threshold {
                count += 1;
            }
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Replicates
// ---------------------------------------------------------------------------

/// Which statistic a replicate records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// `C_{m,r}`: coprime r-subsets.
    CoprimeCount,
    /// `Z_{m,r,q}`: sum of `gcd^q` over r-subsets.
    GcdSum,
    /// `M`: maximum gcd over r-subsets.
    MaxGcd,
    /// `N(t)`: pairs with gcd above `t · C(m,2)`.
    Exceedances { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `(x - E) / sd` with exact finite-n moments.
    ExactMoments,
    /// `x / C(m, 2)`.
    FrechetScale,
    None,
}

/// Raw and normalized outcomes of a replicate run, in replicate order.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRun {
    pub config: SampleConfig,
    pub statistic: Statistic,
    pub normalization: NormalizationInfo,
    pub raw: Vec<u128>,
    pub normalized: Vec<f64>,
}

impl ReplicateRun {
    /// The empirical distribution of the normalized values (counts for
    /// integer statistics left unnormalized).
    pub fn distribution(&self) -> Result<EmpiricalDistribution> {
        match (self.statistic, self.normalization) {
            (Statistic::Exceedances { .. }, NormalizationInfo::None) => {
                Ok(EmpiricalDistribution::counts(self.raw.iter().map(|&v| v as u64)))
            }
            _ => EmpiricalDistribution::continuous(self.normalized.clone(), self.normalization),
        }
    }

    pub fn raw_mean(&self) -> f64 {
        self.raw.iter().map(|&v| v as f64).sum::<f64>() / self.raw.len() as f64
    }

    /// Unbiased sample variance of the raw values.
    pub fn raw_variance(&self) -> f64 {
        let mean = self.raw_mean();
        let ss: f64 = self.raw.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        ss / (self.raw.len() as f64 - 1.0)
    }
}

/// Exact mean and standard deviation of C or Z for the configuration.
pub fn exact_moments(table: &ArithTable, config: &SampleConfig, statistic: Statistic) -> Result<(f64, f64)> {
    let (mean, var) = match statistic {
        Statistic::CoprimeCount => (
            exact::mean_coprime_count(table, config.n, config.m, config.r)?,
            exact::var_coprime_count(table, config.n, config.m, config.r)?,
        ),
        Statistic::GcdSum => (
            exact::mean_gcd_sum(table, config.n, config.m, config.r, config.q)?,
            exact::var_gcd_sum(table, config.n, config.m, config.r, config.q)?,
        ),
        _ => return Err(invalid("exact moments exist for C and Z only")),
    };
    Ok((mean.value(), var.value().sqrt()))
}

fn one_replicate(
    scratch: &mut Multiplicity<'_>,
    config: &SampleConfig,
    statistic: Statistic,
    threshold: u64,
    index: u64,
) -> Result<u128> {
    let mut rng = replicate_rng(config.master_seed, index);
    let sample = draw_with(&mut rng, config.n, config.m);
    scratch.load(&sample)?;
    match statistic {
        Statistic::CoprimeCount => scratch.coprime_count(config.r),
        Statistic::GcdSum => scratch.gcd_sum(config.r, config.q),
        Statistic::MaxGcd => Ok(scratch.max_gcd(config.r).unwrap_or(1) as u128),
        Statistic::Exceedances { .. } => scratch.exceedances(threshold),
    }
}

/// Runs `config.replicates` independent replicates on `workers` threads
/// (the global pool when `None`). Output does not depend on `workers`.
pub fn run_replicates(
    table: &ArithTable,
    config: &SampleConfig,
    statistic: Statistic,
    normalization: Normalization,
    workers: Option<usize>,
) -> Result<ReplicateRun> {
    config.validate()?;
    if config.n > table.n_max() {
        return Err(Error::OutOfRange {
            index: config.n,
            n_max: table.n_max(),
        });
    }
    let info = match (normalization, statistic) {
        (Normalization::ExactMoments, Statistic::CoprimeCount | Statistic::GcdSum) => {
            let (mean, sd) = exact_moments(table, config, statistic)?;
            if !(sd > 0.0) {
                return Err(Error::Domain("statistic has zero variance".into()));
            }
            NormalizationInfo::ExactMoments { mean, sd }
        }
        (Normalization::FrechetScale, Statistic::MaxGcd) => NormalizationInfo::FrechetScale {
            scale: binomial_f64(config.m, 2),
        },
        (Normalization::None, _) => NormalizationInfo::None,
        _ => return Err(invalid(format!("{normalization:?} does not apply to {statistic:?}"))),
    };
    let threshold = match statistic {
        Statistic::Exceedances { t } => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("t must be positive"));
            }
            (t * binomial_f64(config.m, 2)).floor() as u64
        }
        _ => 0,
    };
    let work = || -> Result<Vec<u128>> {
        (0..config.replicates)
            .into_par_iter()
            .map_init(
                || Multiplicity::new(table),
                |scratch, i| one_replicate(scratch, config, statistic, threshold, i),
            )
            .collect()
    };
    let raw = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let normalized = raw
        .iter()
        .map(|&v| {
            let x = v as f64;
            match info {
                NormalizationInfo::ExactMoments { mean, sd } => (x - mean) / sd,
                NormalizationInfo::FrechetScale { scale } => x / scale,
                NormalizationInfo::None => x,
            }
        })
        .collect();
    Ok(ReplicateRun {
        config: *config,
        statistic,
        normalization: info,
        raw,
        normalized,
    })
}

// ---------------------------------------------------------------------------
// Strong law
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub m: u64,
    pub count: u128,
    pub expected: f64,
    pub ratio: f64,
}

/// `C_{m,r} / E C_{m,r}` along one growing sample, at each m in the grid.
///
/// Each new member x adds `Σ_{d|x} μ(d) C(cnt(d), r-1)` coprime r-subsets,
/// where cnt counts the earlier members.
pub fn strong_law_trajectory(table: &ArithTable, n: u64, r: u32, m_grid: &[u64], seed: u64) -> Result<Vec<TrajectoryPoint>> {
    if r < 2 {
        return Err(invalid("r must be >= 2"));
    }
    if m_grid.is_empty() || m_grid[0] < r as u64 || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("m grid must be ascending and start at >= r"));
    }
    if n == 0 || n > table.n_max() {
        return Err(Error::OutOfRange {
            index: n,
            n_max: table.n_max(),
        });
    }
    let single = exact::mean_mu(table, n, r - 1)?.value();
    let mut rng = replicate_rng(seed, 0);
    let mut state = Multiplicity::new(table);
    let mut count: u128 = 0;
    let mut out = Vec::with_capacity(m_grid.len());
    let mut next = 0;
    let top = *m_grid.last().unwrap();
    for m in 1..=top {
        let x = rng.random_range(1..=n);
        state.divs.clear();
        table.divisors_into(x, &mut state.divs)?;
        let mut added: i128 = 0;
        for &d in &state.divs {
            let mu = table.mobius_at(d as usize) as i128;
            if mu != 0 {
                let c = state.cnt[d as usize] as u64;
                added += mu * binomial(c, r as u64 - 1).unwrap_or(0) as i128;
            }
        }
        count += added as u128;
        let divs = std::mem::take(&mut state.divs);
        for &d in &divs {
            let c = &mut state.cnt[d as usize];
            if *c == 0 {
                state.touched.push(d);
            }
            *c += 1;
        }
        state.divs = divs;
        if m == m_grid[next] {
            let expected = binomial_f64(m, r as u64) * single;
            out.push(TrajectoryPoint {
                m,
                count,
                expected,
                ratio: count as f64 / expected,
            });
            next += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, Statistic as OStat};
    use proptest::prelude::*;

    fn table(n: u64) -> ArithTable {
        ArithTable::build(n, &[1, 2]).unwrap()
    }

    #[test]
    fn draw_examples() {
        let c = SampleConfig::new(7, 1, 1, 5);
        assert_eq!(draw_sample(&c, 0).unwrap(), vec![1; 7]);
        let c = SampleConfig::new(50, 1000, 1, 99);
        assert_eq!(draw_sample(&c, 3).unwrap(), draw_sample(&c, 3).unwrap());
        assert_ne!(draw_sample(&c, 3).unwrap(), draw_sample(&c, 4).unwrap());
        let s = draw_sample(&c, 0).unwrap();
        assert!(s.iter().all(|&x| (1..=1000).contains(&x)));
    }

    #[test]
    fn uniform_mean() {
        let n = 1_000_000u64;
        let m = 100_000u64;
        let c = SampleConfig::new(m, n, 1, 2024);
        let s = draw_sample(&c, 0).unwrap();
        let mean = s.iter().sum::<u64>() as f64 / m as f64;
        let sd = ((n as f64 * n as f64 - 1.0) / 12.0).sqrt() / (m as f64).sqrt();
        assert!((mean - (n as f64 + 1.0) / 2.0).abs() < 5.0 * sd);
    }

    #[test]
    fn statistic_examples() {
        let t = table(100);
        assert_eq!(stat_c(&t, &[1, 2], 2).unwrap(), 1);
        assert_eq!(stat_z(&t, &[1, 2], 2, 1).unwrap(), 1);
        assert_eq!(stat_c(&t, &[2, 4, 6], 2).unwrap(), 0);
        assert_eq!(stat_z(&t, &[2, 4, 6], 2, 1).unwrap(), 6);
        assert_eq!(stat_z(&t, &[2, 4, 6], 3, 1).unwrap(), 2);
        assert_eq!(stat_m(&t, &[6, 10, 15]).unwrap(), 5);
        assert!(stat_m(&t, &[9, 3, 40, 9]).unwrap() >= 9);
        assert_eq!(poisson_count(&t, &[2, 4, 6], 1).unwrap(), 3);
        assert!(stat_c(&t, &[101], 2).is_err());
        assert!(stat_m(&t, &[5]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SampleConfig::new(1, 10, 1, 0).validate().is_err());
        assert!(SampleConfig::new(5, 0, 1, 0).validate().is_err());
        assert!(SampleConfig::new(5, 10, 0, 0).validate().is_err());
        assert!(SampleConfig::new(5, 10, 1, 0).with_q(0).validate().is_err());
        assert!(SampleConfig::new(5, 10, 1, 0).with_r(1).validate().is_err());
        let c = SampleConfig::new(2000, 40, 10, 0);
        assert!(c.warnings(Statistic::GcdSum).is_empty());
        let c = SampleConfig::new(1000, 1000, 10, 0);
        assert_eq!(c.warnings(Statistic::GcdSum).len(), 1);
        assert!(c.warnings(Statistic::CoprimeCount).is_empty());
    }

    #[test]
    fn n_rules() {
        assert_eq!("1000".parse::<NRule>().unwrap(), NRule::Fixed(1000));
        assert_eq!("m^2.5".parse::<NRule>().unwrap().resolve(64).unwrap(), 32768);
        assert_eq!("exp(m^0.3)".parse::<NRule>().unwrap(), NRule::ExpPower(0.3));
        assert_eq!(NRule::ExpPower(0.3).resolve(100).unwrap(), (100f64.powf(0.3).exp()).round() as u64);
        assert_eq!(" m ^ 0.49 ".parse::<NRule>().unwrap().resolve(2000).unwrap(), 41);
        for bad in ["0", "-3", "m^", "m^-1", "exp(m^0.3", "n^2", ""] {
            assert!(bad.parse::<NRule>().is_err(), "{bad}");
        }
        assert!(NRule::Power(10.0).resolve(1000).is_err());
    }

    #[test]
    fn replicates_independent_of_workers() {
        let t = table(1000);
        let c = SampleConfig::new(60, 1000, 64, 11);
        for stat in [Statistic::CoprimeCount, Statistic::MaxGcd, Statistic::Exceedances { t: 0.5 }] {
            let norm = if stat == Statistic::CoprimeCount {
                Normalization::ExactMoments
            } else {
                Normalization::None
            };
            let a = run_replicates(&t, &c, stat, norm, Some(1)).unwrap();
            let b = run_replicates(&t, &c, stat, norm, Some(4)).unwrap();
            let d = run_replicates(&t, &c, stat, norm, Some(16)).unwrap();
            assert_eq!(a.raw, b.raw);
            assert_eq!(a.raw, d.raw);
            assert_eq!(
                a.normalized.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                d.normalized.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
            // replicate i equals the statistic of draw_sample(i)
            let s = draw_sample(&c, 5).unwrap();
            let direct = match stat {
                Statistic::CoprimeCount => stat_c(&t, &s, 2).unwrap(),
                Statistic::MaxGcd => stat_m(&t, &s).unwrap() as u128,
                _ => poisson_count(&t, &s, (0.5 * 1770.0f64).floor() as u64).unwrap(),
            };
            assert_eq!(a.raw[5], direct);
        }
    }

    #[test]
    fn normalization_mismatch_rejected() {
        let t = table(100);
        let c = SampleConfig::new(10, 100, 4, 1);
        assert!(run_replicates(&t, &c, Statistic::MaxGcd, Normalization::ExactMoments, None).is_err());
        assert!(run_replicates(&t, &c, Statistic::CoprimeCount, Normalization::FrechetScale, None).is_err());
        let big = SampleConfig::new(10, 1000, 4, 1);
        assert!(run_replicates(&t, &big, Statistic::CoprimeCount, Normalization::None, None).is_err());
    }

    #[test]
    fn trajectory_basics() {
        let t = table(100);
        let a = strong_law_trajectory(&t, 100, 2, &[2, 10, 100], 8).unwrap();
        let b = strong_law_trajectory(&t, 100, 2, &[2, 10, 100], 8).unwrap();
        assert_eq!(a, b);
        let mu = exact::mean_mu(&t, 100, 1).unwrap().value();
        assert!(a[0].ratio == 0.0 || (a[0].ratio - 1.0 / mu).abs() < 1e-12);
        // the running count equals the statistic of the drawn prefix
        let mut rng = replicate_rng(8, 0);
        let prefix = draw_with(&mut rng, 100, 100);
        assert_eq!(a[2].count, stat_c(&t, &prefix, 2).unwrap());
        let a3 = strong_law_trajectory(&t, 100, 3, &[50], 8).unwrap();
        assert_eq!(a3[0].count, stat_c(&t, &prefix[..50], 3).unwrap());
        assert!(strong_law_trajectory(&t, 100, 2, &[1, 5], 8).is_err());
        assert!(strong_law_trajectory(&t, 100, 2, &[5, 5], 8).is_err());
    }

    proptest! {
        #[test]
        fn fast_statistics_match_pair_loops(
            sample in proptest::collection::vec(1u64..=50, 2..=60),
            threshold in 0u64..60,
        ) {
            let t = ArithTable::build(50, &[1, 2]).unwrap();
            for r in 2..=3u32 {
                if sample.len() < r as usize { continue; }
                prop_assert_eq!(stat_c(&t, &sample, r).unwrap(), oracle::subset_sum(&sample, r, OStat::Indicator));
                for q in 1..=2 {
                    prop_assert_eq!(stat_z(&t, &sample, r, q).unwrap(), oracle::subset_sum(&sample, r, OStat::Moment(q)));
                }
            }
            prop_assert_eq!(stat_m(&t, &sample).unwrap(), naive_max_gcd(&sample));
            prop_assert_eq!(poisson_count(&t, &sample, threshold).unwrap(), naive_exceedances(&sample, threshold));
        }
    }
}
