//! Exact finite-n probabilities, moments and covariances of gcds of uniform
//! samples from `{1, ..., n}`.
//!
//! Every quantity has the shape `numerator / n^power`. Numerators are
//! accumulated in checked `i128`; when a numerator leaves that range the
//! quantity is recomputed in compensated double precision on normalized
//! terms and marked inexact. Nothing is ever silently wrapped.
//!
//! The central identity is the Cesàro formula: for `g = μ * F`,
//!
//! ```text
//! E F(gcd(X_1, ..., X_r)) = n^{-r} Σ_{j<=n} g(j) ⌊n/j⌋^r
//! ```
//!
//! and its marginal version where `j` only runs over the divisors of a
//! fixed `k`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{binomial, binomial_f64, gcd, ArithTable};
use crate::compensated::CompensatedSum;
use crate::error::{invalid, Error, Result};

/// Default cap on `n^2` for the double-sum covariance route.
pub const DEFAULT_QUADRATIC_BUDGET: u128 = 10_000_000;

/// A rational `numerator / denom_base^denom_power` with a float view.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    numerator: Option<i128>,
    denom_base: u64,
    denom_power: u32,
    value: f64,
}

impl ExactResult {
    pub fn exact(numerator: i128, denom_base: u64, denom_power: u32) -> Self {
        let value = rational_to_f64(numerator, denom_base, denom_power);
        Self {
            numerator: Some(numerator),
            denom_base,
            denom_power,
            value,
        }
    }

    pub fn approximate(value: f64, denom_base: u64, denom_power: u32) -> Self {
        Self {
            numerator: None,
            denom_base,
            denom_power,
            value,
        }
    }

    fn from_parts(num: Option<i128>, n: u64, power: u32, fallback: impl FnOnce() -> f64) -> Self {
        match num {
            Some(x) => Self::exact(x, n, power),
            None => Self::approximate(fallback(), n, power),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn numerator(&self) -> Option<i128> {
        self.numerator
    }

    pub fn denom_base(&self) -> u64 {
        self.denom_base
    }

    pub fn denom_power(&self) -> u32 {
        self.denom_power
    }

    /// False when wide-integer range was exceeded and the float route used.
    pub fn is_exact(&self) -> bool {
        self.numerator.is_some()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.numerator.map(|x| {
            BigRational::new(
                BigInt::from(x),
                num_traits::pow(BigInt::from(self.denom_base), self.denom_power as usize),
            )
        })
    }

    /// JSON-friendly record for reports.
    pub fn record(&self, quantity: &str) -> ExactRecord {
        ExactRecord {
            quantity: quantity.to_string(),
            n: self.denom_base,
            r: None,
            q: None,
            s: None,
            m: None,
            k: None,
            value: self.value,
            exact: self.is_exact(),
            numerator: self.numerator.map(|x| x.to_string()),
            denom_power: self.numerator.map(|_| self.denom_power),
        }
    }
}

fn rational_to_f64(num: i128, n: u64, power: u32) -> f64 {
    if let Some(den) = (n as i128).checked_pow(power) {
        // both sides exactly representable: one correctly rounded division
        if num.unsigned_abs() < (1u128 << 53) && den < (1i128 << 53) {
            return num as f64 / den as f64;
        }
    }
    let r = BigRational::new(
        BigInt::from(num),
        num_traits::pow(BigInt::from(n), power as usize),
    );
    r.to_f64().unwrap_or(f64::NAN)
}

/// Serializable view of an [`ExactResult`] together with its parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ExactRecord {
    pub quantity: String,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub value: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denom_power: Option<u32>,
}

impl ExactRecord {
    pub fn with_r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }
    pub fn with_q(mut self, q: u32) -> Self {
        self.q = Some(q);
        self
    }
    pub fn with_s(mut self, s: u32) -> Self {
        self.s = Some(s);
        self
    }
    pub fn with_m(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }
    pub fn with_k(mut self, k: u64) -> Self {
        self.k = Some(k);
        self
    }
}

/// The convolved function `g = μ * F` fed to the Cesàro formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `g = μ`, i.e. `F = δ_1`: coprimality indicators.
    Mobius,
    /// `g = φ_q`, i.e. `F = I_q`: q-th powers of the gcd.
    Jordan(u32),
}

impl Kernel {
    /// `g(j)` for `j in 0..=n` (entry 0 unused).
    pub fn values(&self, table: &ArithTable, n: u64) -> Result<Vec<i128>> {
        check_n(table, n)?;
        let mut out = vec![0i128; n as usize + 1];
        match *self {
            Kernel::Mobius => {
                for (j, v) in out.iter_mut().enumerate().skip(1) {
                    *v = table.mobius_at(j) as i128;
                }
            }
            Kernel::Jordan(1) => {
                for (j, v) in out.iter_mut().enumerate().skip(1) {
                    *v = table.totient_at(j) as i128;
                }
            }
            Kernel::Jordan(q) => {
                for (j, v) in out.iter_mut().enumerate().skip(1) {
                    *v = i128::try_from(table.jordan(q, j as u64)?)
                        .map_err(|_| Error::Overflow(format!("φ_{q}({j})")))?;
                }
            }
        }
        Ok(out)
    }
}

/// Which covariance family a shared-variable computation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovKind {
    /// `γ_{r,s}`: coprimality indicators.
    Indicator,
    /// `ω_{r,s}` for `gcd^q` (q = 1 is the plain gcd).
    Moment(u32),
}

impl CovKind {
    pub fn kernel(&self) -> Kernel {
        match *self {
            CovKind::Indicator => Kernel::Mobius,
            CovKind::Moment(q) => Kernel::Jordan(q),
        }
    }
}

/// Evaluation route for shared-variable product moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovMethod {
    /// `Σ_{i,j} g(i) g(j) ⌊n/i⌋^{r-s} ⌊n/j⌋^{r-s} ⌊n/lcm(i,j)⌋^s`, O(n²).
    DoubleSum,
    /// Condition on the gcd `d` of the shared block:
    /// `Σ_d N_s(d) A_{r-s}(d)^2`, O(n log n).
    Conditioning,
    /// Double sum within the quadratic budget, conditioning beyond.
    Auto,
}

fn check_n(table: &ArithTable, n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if n > table.n_max() {
        return Err(Error::OutOfRange {
            index: n,
            n_max: table.n_max(),
        });
    }
    Ok(())
}

#[inline]
fn floor_pow(n: u64, j: u64, r: u32) -> Option<i128> {
    ((n / j) as i128).checked_pow(r)
}

#[inline]
fn floor_frac_pow(n: u64, j: u64, r: u32) -> f64 {
    ((n / j) as f64 / n as f64).powi(r as i32)
}

// ---------------------------------------------------------------------------
// Cesàro formula
// ---------------------------------------------------------------------------

/// `n^{-r} Σ_{j<=n} g(j) ⌊n/j⌋^r` for a kernel built from the table.
pub fn cesaro_expectation(table: &ArithTable, kernel: Kernel, n: u64, r: u32) -> Result<ExactResult> {
    let g = kernel.values(table, n)?;
    cesaro_from_values(&g, n, r)
}

/// Cesàro sum for caller-supplied `g` values indexed `1..=n`.
pub fn cesaro_from_values(g: &[i128], n: u64, r: u32) -> Result<ExactResult> {
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    if n == 0 || g.len() < n as usize + 1 {
        return Err(invalid("kernel values must cover 1..=n"));
    }
    let exact = cesaro_numerator(g, n, r);
    Ok(ExactResult::from_parts(exact, n, r, || {
        (1..=n)
            .map(|j| g[j as usize] as f64 * floor_frac_pow(n, j, r))
            .collect::<CompensatedSum>()
            .value()
    }))
}

fn cesaro_numerator(g: &[i128], n: u64, r: u32) -> Option<i128> {
    let mut acc: i128 = 0;
    for j in 1..=n {
        let gj = g[j as usize];
        if gj == 0 {
            continue;
        }
        acc = acc.checked_add(gj.checked_mul(floor_pow(n, j, r)?)?)?;
    }
    Some(acc)
}

/// `P(gcd(X_1..X_r) = k)` for `k = 1..=n` (index 0 of the result is k = 1).
pub fn gcd_pmf(table: &ArithTable, n: u64, r: u32) -> Result<Vec<ExactResult>> {
    check_n(table, n)?;
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    Ok(match pmf_numerators(table, n, r) {
        Some(nums) => nums[1..]
            .iter()
            .map(|&x| ExactResult::exact(x, n, r))
            .collect(),
        None => pmf_floats(table, n, r)[1..]
            .iter()
            .map(|&x| ExactResult::approximate(x, n, r))
            .collect(),
    })
}

/// `N_r(k) = Σ_{j<=n/k} μ(j) ⌊n/(kj)⌋^r`: the number of r-tuples in
/// `[1, n]^r` whose gcd is exactly k. Index 0 unused.
fn pmf_numerators(table: &ArithTable, n: u64, r: u32) -> Option<Vec<i128>> {
    let mut out = vec![0i128; n as usize + 1];
    for k in 1..=n {
        let top = n / k;
        let mut acc: i128 = 0;
        for j in 1..=top {
            let mu = table.mobius_at(j as usize) as i128;
            if mu != 0 {
                acc = acc.checked_add(mu * floor_pow(top, j, r)?)?;
            }
        }
        out[k as usize] = acc;
    }
    Some(out)
}

fn pmf_floats(table: &ArithTable, n: u64, r: u32) -> Vec<f64> {
    let mut out = vec![0f64; n as usize + 1];
    let nf = n as f64;
    for k in 1..=n {
        let top = n / k;
        let mut acc = CompensatedSum::default();
        for j in 1..=top {
            let mu = table.mobius_at(j as usize);
            if mu != 0 {
                acc.add(mu as f64 * ((top / j) as f64 / nf).powi(r as i32));
            }
        }
        out[k as usize] = acc.value();
    }
    out
}

/// `P(gcd(X_1, X_2) > threshold)`.
pub fn gcd_tail(table: &ArithTable, n: u64, threshold: u64) -> Result<ExactResult> {
    check_n(table, n)?;
    if threshold > n {
        return Err(invalid("threshold must satisfy 0 <= K <= n"));
    }
    let exact = pmf_numerators(table, n, 2).and_then(|nums| {
        nums[(threshold as usize + 1)..]
            .iter()
            .try_fold(0i128, |a, &x| a.checked_add(x))
    });
    Ok(ExactResult::from_parts(exact, n, 2, || {
        pmf_floats(table, n, 2)[(threshold as usize + 1)..]
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }))
}

/// `E gcd(X_1..X_r)^q = n^{-r} Σ φ_q(j) ⌊n/j⌋^r`.
pub fn gcd_moment(table: &ArithTable, n: u64, r: u32, q: u32) -> Result<ExactResult> {
    if q == 0 {
        return Err(invalid("q must be >= 1"));
    }
    cesaro_expectation(table, Kernel::Jordan(q), n, r)
}

// ---------------------------------------------------------------------------
// Marginal profiles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalKind {
    /// `U_r(k) = P(gcd(X_1..X_r, k) = 1)`.
    Probability,
    /// `W_r(k) = E gcd(X_1..X_r, k)`.
    Expectation,
}

/// Marginal values over `k = 1..=n`, all sharing the denominator `n^r`.
#[derive(Debug, Clone)]
pub struct MarginalProfile {
    n: u64,
    r: u32,
    kernel: Kernel,
    numerators: Option<Vec<i128>>,
    values: Vec<f64>,
}

/// Builds `U_r^{(n)}` or `W_r^{(n)}` for every `k <= n` in O(n log n) by
/// pushing each `g(j) ⌊n/j⌋^r` onto the multiples of j.
pub fn marginal_profile(table: &ArithTable, n: u64, r: u32, kind: MarginalKind) -> Result<MarginalProfile> {
    let kernel = match kind {
        MarginalKind::Probability => Kernel::Mobius,
        MarginalKind::Expectation => Kernel::Jordan(1),
    };
    kernel_profile(table, kernel, n, r)
}

/// Profile `k -> n^{-r} Σ_{j|k} g(j) ⌊n/j⌋^r` for any kernel; `r = 0` is
/// allowed and gives `Σ_{j|k} g(j) = F(k)`.
pub fn kernel_profile(table: &ArithTable, kernel: Kernel, n: u64, r: u32) -> Result<MarginalProfile> {
    let g = kernel.values(table, n)?;
    let len = n as usize + 1;
    let numerators = (|| {
        let mut acc = vec![0i128; len];
        for j in 1..=n {
            let gj = g[j as usize];
            if gj == 0 {
                continue;
            }
            let t = gj.checked_mul(floor_pow(n, j, r)?)?;
            let mut k = j as usize;
            while k < len {
                acc[k] = acc[k].checked_add(t)?;
                k += j as usize;
            }
        }
        Some(acc)
    })();
    let values = match &numerators {
        Some(nums) => {
            let den = (n as f64).powi(r as i32);
            nums.iter().map(|&x| x as f64 / den).collect()
        }
        None => {
            let mut acc = vec![CompensatedSum::default(); len];
            for j in 1..=n {
                let gj = g[j as usize];
                if gj == 0 {
                    continue;
                }
                let t = gj as f64 * floor_frac_pow(n, j, r);
                let mut k = j as usize;
                while k < len {
                    acc[k].add(t);
                    k += j as usize;
                }
            }
            acc.iter().map(|c| c.value()).collect()
        }
    };
    Ok(MarginalProfile {
        n,
        r,
        kernel,
        numerators,
        values,
    })
}

impl MarginalProfile {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn kind(&self) -> Option<MarginalKind> {
        match self.kernel {
            Kernel::Mobius => Some(MarginalKind::Probability),
            Kernel::Jordan(1) => Some(MarginalKind::Expectation),
            Kernel::Jordan(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.numerators.is_some()
    }

    /// Float view of the value at `k` (1-based).
    pub fn float(&self, k: u64) -> f64 {
        self.values[k as usize]
    }

    pub fn value(&self, k: u64) -> Result<ExactResult> {
        if k == 0 || k > self.n {
            return Err(Error::OutOfRange {
                index: k,
                n_max: self.n,
            });
        }
        Ok(match &self.numerators {
            Some(nums) => ExactResult::exact(nums[k as usize], self.n, self.r),
            None => ExactResult::approximate(self.values[k as usize], self.n, self.r),
        })
    }

    pub fn values(&self) -> impl Iterator<Item = ExactResult> + '_ {
        (1..=self.n).map(move |k| self.value(k).expect("k in range"))
    }

    /// Average over `k = 1..=n`, power `r + 1`.
    pub fn mean(&self) -> ExactResult {
        let exact = self
            .numerators
            .as_ref()
            .and_then(|nums| nums[1..].iter().try_fold(0i128, |a, &x| a.checked_add(x)));
        ExactResult::from_parts(exact, self.n, self.r + 1, || {
            self.values[1..].iter().copied().collect::<CompensatedSum>().value() / self.n as f64
        })
    }

    /// Average of the squared values, power `2r + 1`.
    pub fn second_moment(&self) -> ExactResult {
        let exact = self.numerators.as_ref().and_then(|nums| {
            nums[1..]
                .iter()
                .try_fold(0i128, |a, &x| a.checked_add(x.checked_mul(x)?))
        });
        ExactResult::from_parts(exact, self.n, 2 * self.r + 1, || {
            self.values[1..]
                .iter()
                .map(|x| x * x)
                .collect::<CompensatedSum>()
                .value()
                / self.n as f64
        })
    }

    /// Population variance over `k = 1..=n`, power `2r + 2`:
    /// `(n Σ A_k^2 - (Σ A_k)^2) / n^{2r+2}`.
    pub fn variance(&self) -> ExactResult {
        let exact = self.numerators.as_ref().and_then(|nums| {
            let mut s1: i128 = 0;
            let mut s2: i128 = 0;
            for &x in &nums[1..] {
                s1 = s1.checked_add(x)?;
                s2 = s2.checked_add(x.checked_mul(x)?)?;
            }
            (self.n as i128).checked_mul(s2)?.checked_sub(s1.checked_mul(s1)?)
        });
        ExactResult::from_parts(exact, self.n, 2 * self.r + 2, || {
            let vals = &self.values[1..];
            let mean = vals.iter().copied().collect::<CompensatedSum>().value() / self.n as f64;
            vals.iter()
                .map(|x| (x - mean) * (x - mean))
                .collect::<CompensatedSum>()
                .value()
                / self.n as f64
        })
    }
}

/// Outcome of checking the marginal error bounds on every `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Largest observed `deviation / bound`; at most 1 when the bounds hold.
    pub max_ratio: f64,
    pub argmax_k: u64,
    pub first_violation: Option<u64>,
}

/// Checks `|U_r(k) - φ_r(k)/k^r| <= r τ(k)/n` (probability profiles) or
/// `0 <= P_r(k)/k^r - W_r(k) <= k/n` (r = 1) / `r τ(k)/n` (r >= 2)
/// (expectation profiles) for every k.
pub fn marginal_error_bound_check(profile: &MarginalProfile, table: &ArithTable) -> Result<BoundReport> {
    let kind = profile
        .kind()
        .ok_or_else(|| invalid("bound check needs a probability or expectation profile"))?;
    let n = profile.n;
    let r = profile.r;
    if r == 0 {
        return Err(invalid("bound check needs r >= 1"));
    }
    const SLACK: f64 = 1e-12;
    let mut report = BoundReport {
        max_ratio: 0.0,
        argmax_k: 1,
        first_violation: None,
    };
    for k in 1..=n {
        let kf = k as f64;
        let tau = table.tau(k)? as f64;
        let value = profile.float(k);
        let (deviation, bound, below_zero) = match kind {
            MarginalKind::Probability => {
                let limit = table.jordan(r, k)? as f64 / kf.powi(r as i32);
                ((value - limit).abs(), r as f64 * tau / n as f64, false)
            }
            MarginalKind::Expectation => {
                let limit = table.pillai(r, k)? as f64 / kf.powi(r as i32);
                let gap = limit - value;
                let bound = if r == 1 {
                    kf / n as f64
                } else {
                    r as f64 * tau / n as f64
                };
                (gap.abs(), bound, gap < -SLACK * limit.max(1.0))
            }
        };
        let ratio = if deviation == 0.0 { 0.0 } else { deviation / bound };
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.argmax_k = k;
        }
        if (below_zero || deviation > bound * (1.0 + SLACK)) && report.first_violation.is_none() {
            report.first_violation = Some(k);
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Means and variances of the marginals
// ---------------------------------------------------------------------------

/// `μ_r^{(n)} = P(gcd(X_1..X_{r+1}) = 1)`.
pub fn mean_mu(table: &ArithTable, n: u64, r: u32) -> Result<ExactResult> {
    cesaro_expectation(table, Kernel::Mobius, n, r + 1)
}

/// `ν_r^{(n)} = E gcd(X_1..X_{r+1})`.
pub fn mean_nu(table: &ArithTable, n: u64, r: u32) -> Result<ExactResult> {
    cesaro_expectation(table, Kernel::Jordan(1), n, r + 1)
}

/// `c_r^{(n)}`: variance of `U_r^{(n)}` over a uniform k.
pub fn var_c(table: &ArithTable, n: u64, r: u32) -> Result<ExactResult> {
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    Ok(marginal_profile(table, n, r, MarginalKind::Probability)?.variance())
}

/// `d_r^{(n)}`: variance of `W_r^{(n)}` over a uniform k.
pub fn var_d(table: &ArithTable, n: u64, r: u32) -> Result<ExactResult> {
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    Ok(marginal_profile(table, n, r, MarginalKind::Expectation)?.variance())
}

// ---------------------------------------------------------------------------
// Shared-variable covariances
// ---------------------------------------------------------------------------

fn validate_rs(r: u32, s: u32) -> Result<()> {
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    if s > r {
        return Err(invalid("s must satisfy 0 <= s <= r"));
    }
    Ok(())
}

/// `E[F(gcd(A)) F(gcd(B))]` for two r-tuples sharing exactly s variables,
/// power `2r - s`.
pub fn shared_product_moment(
    table: &ArithTable,
    n: u64,
    r: u32,
    s: u32,
    kind: CovKind,
    method: CovMethod,
) -> Result<ExactResult> {
    shared_product_moment_budget(table, n, r, s, kind, method, DEFAULT_QUADRATIC_BUDGET)
}

pub fn shared_product_moment_budget(
    table: &ArithTable,
    n: u64,
    r: u32,
    s: u32,
    kind: CovKind,
    method: CovMethod,
    quadratic_budget: u128,
) -> Result<ExactResult> {
    validate_rs(r, s)?;
    check_n(table, n)?;
    let cost = (n as u128) * (n as u128);
    let method = match method {
        CovMethod::Auto if cost <= quadratic_budget => CovMethod::DoubleSum,
        CovMethod::Auto => CovMethod::Conditioning,
        CovMethod::DoubleSum if cost > quadratic_budget => {
            return Err(Error::CostGuard {
                what: "double-sum covariance".into(),
                cost,
                budget: quadratic_budget,
            })
        }
        m => m,
    };
    let g = kind.kernel().values(table, n)?;
    let power = 2 * r - s;
    match method {
        CovMethod::DoubleSum => Ok(double_sum_moment(&g, n, r, s)),
        _ => conditioning_moment(table, &g, n, r, s, kind.kernel()),
    }
    .map(|(num, approx)| ExactResult::from_parts(num, n, power, approx))
}

type MomentParts<'a> = (Option<i128>, Box<dyn FnOnce() -> f64 + 'a>);

fn double_sum_moment<'a>(g: &'a [i128], n: u64, r: u32, s: u32) -> MomentParts<'a> {
    let support: Vec<u64> = (1..=n).filter(|&j| g[j as usize] != 0).collect();
    let fresh = r - s;
    let exact = (|| {
        let mut acc: i128 = 0;
        for &i in &support {
            let gi = g[i as usize].checked_mul(floor_pow(n, i, fresh)?)?;
            for &j in &support {
                let l = (i / gcd(i, j)) as u128 * j as u128;
                if s > 0 && l > n as u128 {
                    continue;
                }
                let shared = if s == 0 { 1 } else { floor_pow(n, l as u64, s)? };
                let t = gi
                    .checked_mul(g[j as usize])?
                    .checked_mul(floor_pow(n, j, fresh)?)?
                    .checked_mul(shared)?;
                acc = acc.checked_add(t)?;
            }
        }
        Some(acc)
    })();
    let approx = move || {
        let mut acc = CompensatedSum::default();
        for &i in &support {
            let gi = g[i as usize] as f64 * floor_frac_pow(n, i, fresh);
            for &j in &support {
                let l = (i / gcd(i, j)) as u128 * j as u128;
                if s > 0 && l > n as u128 {
                    continue;
                }
                let shared = if s == 0 {
                    1.0
                } else {
                    floor_frac_pow(n, l as u64, s)
                };
                acc.add(gi * g[j as usize] as f64 * floor_frac_pow(n, j, fresh) * shared);
            }
        }
        acc.value()
    };
    (exact, Box::new(approx))
}

fn conditioning_moment<'a>(
    table: &'a ArithTable,
    g: &'a [i128],
    n: u64,
    r: u32,
    s: u32,
    kernel: Kernel,
) -> Result<MomentParts<'a>> {
    let fresh = r - s;
    if s == 0 {
        let mean = cesaro_numerator(g, n, r);
        let exact = mean.and_then(|m| m.checked_mul(m));
        let approx = move || {
            let m = (1..=n)
                .map(|j| g[j as usize] as f64 * floor_frac_pow(n, j, r))
                .collect::<CompensatedSum>()
                .value();
            m * m
        };
        return Ok((exact, Box::new(approx)));
    }
    let profile = kernel_profile(table, kernel, n, fresh)?;
    let counts = pmf_numerators(table, n, s);
    let exact = match (&profile.numerators, &counts) {
        (Some(a), Some(c)) => (1..=n as usize).try_fold(0i128, |acc, d| {
            acc.checked_add(c[d].checked_mul(a[d].checked_mul(a[d])?)?)
        }),
        _ => None,
    };
    let approx = move || {
        let probs = pmf_floats(table, n, s);
        (1..=n as usize)
            .map(|d| probs[d] * profile.values[d] * profile.values[d])
            .collect::<CompensatedSum>()
            .value()
    };
    Ok((exact, Box::new(approx)))
}

/// `γ_{r,s}` (indicator kind) or `ω_{r,s}` (moment kind): the covariance of
/// the statistic on two r-tuples sharing exactly s variables. Power `2r`.
pub fn shared_covariance(table: &ArithTable, n: u64, r: u32, s: u32, kind: CovKind) -> Result<ExactResult> {
    shared_covariance_with(table, n, r, s, kind, CovMethod::Auto)
}

pub fn shared_covariance_with(
    table: &ArithTable,
    n: u64,
    r: u32,
    s: u32,
    kind: CovKind,
    method: CovMethod,
) -> Result<ExactResult> {
    validate_rs(r, s)?;
    if s == 0 {
        check_n(table, n)?;
        return Ok(ExactResult::exact(0, n, 2 * r));
    }
    let product = shared_product_moment(table, n, r, s, kind, method)?;
    let mean = cesaro_expectation(table, kind.kernel(), n, r)?;
    let exact = match (product.numerator, mean.numerator) {
        (Some(p), Some(m)) => (n as i128)
            .checked_pow(s)
            .and_then(|ns| p.checked_mul(ns))
            .and_then(|x| x.checked_sub(m.checked_mul(m)?)),
        _ => None,
    };
    Ok(ExactResult::from_parts(exact, n, 2 * r, || {
        product.value - mean.value * mean.value
    }))
}

/// Number of ordered pairs of r-subsets of `{1..m}` meeting in exactly s
/// elements: `C(m,s) C(m-s,r-s) C(m-r,r-s)`.
pub fn overlap_count(m: u64, r: u32, s: u32) -> Option<u128> {
    let (r, s) = (r as u64, s as u64);
    if m < r {
        return Some(0);
    }
    binomial(m, s)?
        .checked_mul(binomial(m - s, r - s)?)?
        .checked_mul(binomial(m - r, r - s)?)
}

fn overlap_count_f64(m: u64, r: u32, s: u32) -> f64 {
    let (r, s) = (r as u64, s as u64);
    if m < r {
        return 0.0;
    }
    binomial_f64(m, s) * binomial_f64(m - s, r - s) * binomial_f64(m - r, r - s)
}

fn u_statistic_variance(table: &ArithTable, n: u64, m: u64, r: u32, kind: CovKind) -> Result<ExactResult> {
    if r < 2 || m < r as u64 {
        return Err(invalid("need m >= r >= 2"));
    }
    let covs = (0..=r)
        .map(|s| shared_covariance(table, n, r, s, kind))
        .collect::<Result<Vec<_>>>()?;
    let exact = (0..=r).try_fold(0i128, |acc, s| {
        let coef = i128::try_from(overlap_count(m, r, s)?).ok()?;
        acc.checked_add(coef.checked_mul(covs[s as usize].numerator?)?)
    });
    Ok(ExactResult::from_parts(exact, n, 2 * r, || {
        (0..=r)
            .map(|s| overlap_count_f64(m, r, s) * covs[s as usize].value)
            .collect::<CompensatedSum>()
            .value()
    }))
}

/// Variance of the number of coprime r-subsets in a sample of length m.
pub fn var_coprime_count(table: &ArithTable, n: u64, m: u64, r: u32) -> Result<ExactResult> {
    u_statistic_variance(table, n, m, r, CovKind::Indicator)
}

/// Variance of the sum of `gcd^q` over r-subsets of a sample of length m.
pub fn var_gcd_sum(table: &ArithTable, n: u64, m: u64, r: u32, q: u32) -> Result<ExactResult> {
    if q == 0 {
        return Err(invalid("q must be >= 1"));
    }
    u_statistic_variance(table, n, m, r, CovKind::Moment(q))
}

fn u_statistic_mean(table: &ArithTable, n: u64, m: u64, r: u32, kernel: Kernel) -> Result<ExactResult> {
    if r < 2 || m < r as u64 {
        return Err(invalid("need m >= r >= 2"));
    }
    let single = cesaro_expectation(table, kernel, n, r)?;
    let coef = binomial(m, r as u64);
    let exact = single
        .numerator
        .zip(coef)
        .and_then(|(x, c)| x.checked_mul(i128::try_from(c).ok()?));
    Ok(ExactResult::from_parts(exact, n, r, || {
        binomial_f64(m, r as u64) * single.value
    }))
}

/// `E C_{m,r} = C(m,r) μ_{r-1}^{(n)}`.
pub fn mean_coprime_count(table: &ArithTable, n: u64, m: u64, r: u32) -> Result<ExactResult> {
    u_statistic_mean(table, n, m, r, Kernel::Mobius)
}

/// `E Z_{m,r,q} = C(m,r) E gcd(X_1..X_r)^q`.
pub fn mean_gcd_sum(table: &ArithTable, n: u64, m: u64, r: u32, q: u32) -> Result<ExactResult> {
    if q == 0 {
        return Err(invalid("q must be >= 1"));
    }
    u_statistic_mean(table, n, m, r, Kernel::Jordan(q))
}

/// `π^{(n)} = E[gcd(X_1, X_2..X_r)^q gcd(X_1, X_{r+1}..X_{2r-1})^q]`, obtained
/// by conditioning on `X_1`: `n^{-1} Σ_k (n^{-(r-1)} Σ_{j|k} φ_q(j)⌊n/j⌋^{r-1})^2`.
pub fn mixed_moment_pi(table: &ArithTable, n: u64, r: u32, q: u32) -> Result<ExactResult> {
    if r < 2 {
        return Err(invalid("r must be >= 2"));
    }
    if q == 0 {
        return Err(invalid("q must be >= 1"));
    }
    Ok(kernel_profile(table, Kernel::Jordan(q), n, r - 1)?.second_moment())
}
