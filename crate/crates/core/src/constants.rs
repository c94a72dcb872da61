//! Limiting constants: zeta values, Euler products with tail bounds, and
//! the partial sums whose `ln^3` growth those constants govern.
//!
//! Products are accumulated in the log domain over ascending primes. A
//! product whose local factor behaves like `Π_i (1 - p^{-a_i})^{c_i}` for
//! large p is divided by that zeta-type factor prime by prime and multiplied
//! back by `Π_i ζ(a_i)^{-c_i}`, which leaves a faster-converging remainder.
//! The tail past the cutoff is bounded from the declared decay order of
//! that remainder.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::arith::{gcd, primes_up_to, ArithTable};
use crate::compensated::CompensatedSum;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_CUTOFF: u64 = 1_000_000;

/// Default truncation for the double-sum route of [`limit_var_d_double_sum`].
pub const DEFAULT_SUM_BOUND: u64 = 2_000_000;

// ---------------------------------------------------------------------------
// zeta
// ---------------------------------------------------------------------------

// B_2, B_4, ..., B_16
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta for real `t > 1` by Euler–Maclaurin summation.
pub fn zeta(t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Domain(format!("zeta needs t > 1, got {t}")));
    }
    const N: u32 = 20;
    let mut head = CompensatedSum::default();
    for k in (1..N).rev() {
        head.add((k as f64).powf(-t));
    }
    let n = N as f64;
    let n_t = n.powf(-t);
    head.add(n * n_t / (t - 1.0));
    head.add(0.5 * n_t);
    // Σ B_2j / (2j)! · t (t+1) ... (t+2j-2) · N^{-t-2j+1}
    let mut rising = t; // t (t+1) ... (t + 2j - 2)
    let mut fact = 2.0; // (2j)!
    let mut power = n_t / n; // N^{-t-2j+1}
    for (j, b) in BERNOULLI.iter().enumerate() {
        head.add(b / fact * rising * power);
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (t + j2 - 1.0) * (t + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        power /= n * n;
    }
    Ok(head.value())
}

// ---------------------------------------------------------------------------
// Euler-product engine
// ---------------------------------------------------------------------------

/// A value with an absolute error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_bound: 0.0,
        }
    }

    fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            error_bound: self.error_bound * c.abs(),
        }
    }

    fn mul(self, o: Estimate) -> Self {
        Self {
            value: self.value * o.value,
            error_bound: self.error_bound * o.value.abs()
                + o.error_bound * self.value.abs()
                + self.error_bound * o.error_bound,
        }
    }

    fn sub(self, o: Estimate) -> Self {
        Self {
            value: self.value - o.value,
            error_bound: self.error_bound + o.error_bound,
        }
    }
}

type Excess = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `Π_p f(p)` over primes `p <= cutoff`, with a tail policy.
///
/// The local factor is given through its excess `f(p) - 1` so that factors
/// close to 1 keep full relative precision.
#[derive(Clone)]
pub struct ProductSpec {
    excess: Excess,
    pub cutoff: u64,
    /// Decay order `a` with `log f(p) - Σ c_i log(1 - p^{-a_i}) = O(p^{-a})`.
    pub tail_exponent: f64,
    /// Pairs `(a_i, c_i)` with `f(p) ≈ Π_i (1 - p^{-a_i})^{c_i}`.
    pub zeta_factors: Vec<(f64, f64)>,
}

impl std::fmt::Debug for ProductSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductSpec")
            .field("cutoff", &self.cutoff)
            .field("tail_exponent", &self.tail_exponent)
            .field("zeta_factors", &self.zeta_factors)
            .finish_non_exhaustive()
    }
}

impl ProductSpec {
    /// `excess(p) = f(p) - 1`.
    pub fn new(cutoff: u64, tail_exponent: f64, excess: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            excess: Arc::new(excess),
            cutoff,
            tail_exponent,
            zeta_factors: Vec::new(),
        }
    }

    /// Divides out `(1 - p^{-a})^c` per prime and restores it as `ζ(a)^{-c}`.
    pub fn with_zeta_factor(mut self, a: f64, c: f64) -> Self {
        self.zeta_factors.push((a, c));
        self
    }

    pub fn local_factor(&self, p: f64) -> f64 {
        1.0 + (self.excess)(p)
    }

    fn log_remainder(&self, p: f64) -> f64 {
        let mut v = (self.excess)(p).ln_1p();
        for &(a, c) in &self.zeta_factors {
            v -= c * (-p.powf(-a)).ln_1p();
        }
        v
    }
}

fn cached_primes(bound: u64) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<u64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&bound) {
        return p.clone();
    }
    let primes = Arc::new(primes_up_to(bound));
    cache.lock().unwrap().insert(bound, primes.clone());
    primes
}

/// Evaluates a truncated Euler product with its error bar.
///
/// The tail bound is `C · Σ_{k>P} k^{-a} <= C P^{1-a} / (a-1)` with
/// `C = 2 max |log remainder(p)| p^a` over the primes in `(P/2, P]`, plus
/// rounding allowances for the accumulation and the zeta values.
pub fn euler_product(spec: &ProductSpec) -> Result<Estimate> {
    if spec.cutoff < 2 {
        return Err(invalid("prime cutoff must be >= 2"));
    }
    let a = spec.tail_exponent;
    if !(a > 1.0) {
        return Err(invalid("tail exponent must exceed 1"));
    }
    let primes = cached_primes(spec.cutoff);
    let mut log_sum = CompensatedSum::default();
    let mut abs_sum = 0.0;
    let mut c_tail: f64 = 0.0;
    let half = spec.cutoff / 2;
    for &p in primes.iter() {
        let pf = p as f64;
        let f = spec.local_factor(pf);
        if !(f > 0.0) {
            return Err(Error::Domain(format!("nonpositive local factor at p = {p}")));
        }
        let rem = spec.log_remainder(pf);
        log_sum.add(rem);
        abs_sum += rem.abs();
        if p > half {
            c_tail = c_tail.max(rem.abs() * pf.powf(a));
        }
    }
    let mut log_value = log_sum.value();
    let mut zeta_err = 0.0;
    for &(za, zc) in &spec.zeta_factors {
        log_value -= zc * zeta(za)?.ln();
        zeta_err += zc.abs() * 1e-14;
    }
    let tail = 2.0 * c_tail * (spec.cutoff as f64).powf(1.0 - a) / (a - 1.0);
    let rounding = 4.0 * f64::EPSILON * (abs_sum + log_value.abs()) + zeta_err;
    let value = log_value.exp();
    Ok(Estimate {
        value,
        error_bound: value * (tail + rounding).exp_m1(),
    })
}

fn cached(key: String, compute: impl FnOnce() -> Result<Estimate>) -> Result<Estimate> {
    static CACHE: OnceLock<Mutex<HashMap<String, Estimate>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().unwrap().get(&key) {
        return Ok(*e);
    }
    let e = compute()?;
    cache.lock().unwrap().insert(key, e);
    Ok(e)
}

// ---------------------------------------------------------------------------
// Named constants
// ---------------------------------------------------------------------------

/// `T_m = Π_p (1 - 1/p)^{m-1} (1 + (m-1)/p)`: the limiting probability that
/// m uniform integers are pairwise coprime.
pub fn pairwise_coprime_t(m: u64, cutoff: u64) -> Result<Estimate> {
    if m < 2 {
        return Err(invalid("m must be >= 2"));
    }
    cached(format!("T/{m}/{cutoff}"), || {
        let k = (m - 1) as f64;
        let pairs = (m * (m - 1) / 2) as f64;
        let spec = ProductSpec::new(cutoff, 3.0, move |p| {
            (k * (-1.0 / p).ln_1p() + (k / p).ln_1p()).exp_m1()
        })
        .with_zeta_factor(2.0, pairs);
        euler_product(&spec)
    })
}

/// Schur's constant `S_l^{(s)} = Π_p (1 - (1/p)[1 - (1 - p^{-s})^l])`, the
/// mean of `(φ_s(k)/k^s)^l`.
pub fn schur_constant(s: u32, l: u32, cutoff: u64) -> Result<Estimate> {
    if s == 0 || l == 0 {
        return Err(invalid("s and l must be >= 1"));
    }
    cached(format!("S/{s}/{l}/{cutoff}"), || {
        let (sf, lf) = (s as f64, l as f64);
        let spec = ProductSpec::new(cutoff, 2.0 * sf + 1.0, move |p| {
            let inner = -(lf * (-p.powf(-sf)).ln_1p()).exp_m1();
            -inner / p
        })
        .with_zeta_factor(sf + 1.0, lf);
        euler_product(&spec)
    })
}

fn delta_excess(x: f64) -> f64 {
    let x2 = x * x;
    x2 * (-5.0 + x * (5.0 - x2))
}

/// `Δ = (1/12) Π_p (1 - 5p^{-2} + 5p^{-3} - p^{-5})`.
pub fn delta(cutoff: u64) -> Result<Estimate> {
    cached(format!("Delta/{cutoff}"), || {
        let spec = ProductSpec::new(cutoff, 4.0, |p| delta_excess(1.0 / p))
            .with_zeta_factor(2.0, 5.0)
            .with_zeta_factor(3.0, -5.0);
        Ok(euler_product(&spec)?.scale(1.0 / 12.0))
    })
}

/// `Δ_Toth = (1/π²) Π_p (1 + p^{-3} - 4/(p(p+1)))`.
pub fn delta_toth(cutoff: u64) -> Result<Estimate> {
    cached(format!("DeltaToth/{cutoff}"), || {
        let spec = ProductSpec::new(cutoff, 4.0, |p| p.powi(-3) - 4.0 / (p * (p + 1.0)))
            .with_zeta_factor(2.0, 4.0)
            .with_zeta_factor(3.0, -5.0);
        Ok(euler_product(&spec)?.scale(1.0 / (PI * PI)))
    })
}

/// `Δ_s = (1/12) Π_p (1 - 4p^{-s-1} - p^{-2} + 4p^{-s-2} + p^{-2s-1} - p^{-2s-3})`.
pub fn delta_s(s: u32, cutoff: u64) -> Result<Estimate> {
    if s == 0 {
        return Err(invalid("s must be >= 1"));
    }
    cached(format!("DeltaS/{s}/{cutoff}"), || {
        let sf = s as f64;
        let excess = move |p: f64| {
            let x = 1.0 / p;
            -4.0 * x.powf(sf + 1.0) - x * x + 4.0 * x.powf(sf + 2.0) + x.powf(2.0 * sf + 1.0)
                - x.powf(2.0 * sf + 3.0)
        };
        let spec = if s == 1 {
            ProductSpec::new(cutoff, 4.0, excess)
                .with_zeta_factor(2.0, 5.0)
                .with_zeta_factor(3.0, -5.0)
        } else {
            ProductSpec::new(cutoff, sf + 2.0, excess)
                .with_zeta_factor(2.0, 1.0)
                .with_zeta_factor(sf + 1.0, 4.0)
        };
        Ok(euler_product(&spec)?.scale(1.0 / 12.0))
    })
}

/// Which product expression of `M(t) = Σ_{i,j} φ(i)φ(j) gcd(i,j) / (ij)^{1+t}`
/// to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MForm {
    /// `ζ(2t-1) Π_p (1 + 2p^{-t} - 2p^{-t-1} - p^{-2t-1})`.
    First,
    /// `ζ(2t-1) ζ(t)² Π_p (1 - 2p^{-t-1} - 3p^{-2t} + 3p^{-2t-1} + 2p^{-3t} - p^{-4t-1})`.
    Second,
}

/// `M(t)` through either product form.
pub fn m_constant(t: f64, form: MForm, cutoff: u64) -> Result<Estimate> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Domain(format!("M(t) needs t > 1, got {t}")));
    }
    cached(format!("M/{form:?}/{}/{cutoff}", t.to_bits()), || {
        let outer = Estimate {
            value: zeta(2.0 * t - 1.0)?,
            error_bound: 0.0,
        };
        let product = match form {
            MForm::First => {
                let spec = ProductSpec::new(cutoff, 2.0 * t, move |p| {
                    2.0 * p.powf(-t) - 2.0 * p.powf(-t - 1.0) - p.powf(-2.0 * t - 1.0)
                })
                .with_zeta_factor(t, -2.0)
                .with_zeta_factor(t + 1.0, 2.0);
                euler_product(&spec)?
            }
            MForm::Second => {
                let z = zeta(t)?;
                let spec = ProductSpec::new(cutoff, 2.0 * t, move |p| {
                    -2.0 * p.powf(-t - 1.0) - 3.0 * p.powf(-2.0 * t) + 3.0 * p.powf(-2.0 * t - 1.0)
                        + 2.0 * p.powf(-3.0 * t)
                        - p.powf(-4.0 * t - 1.0)
                })
                .with_zeta_factor(t + 1.0, 2.0);
                euler_product(&spec)?.scale(z * z)
            }
        };
        Ok(product.mul(outer))
    })
}

/// `Σ_{i,j} φ_s(i) φ_s(j) gcd(i,j) / (ij)^{s+t}` via its product form.
pub fn m_constant_s(t: f64, s: u32, cutoff: u64) -> Result<Estimate> {
    if s == 0 {
        return Err(invalid("s must be >= 1"));
    }
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Domain(format!("needs t > 1, got {t}")));
    }
    cached(format!("Ms/{s}/{}/{cutoff}", t.to_bits()), || {
        let sf = s as f64;
        let z = zeta(t)?;
        let spec = ProductSpec::new(cutoff, 2.0 * t, move |p| {
            let x = 1.0 / p;
            -2.0 * x.powf(t + sf) - x.powf(2.0 * t) - 2.0 * x.powf(2.0 * t + sf - 1.0)
                + 2.0 * x.powf(2.0 * t + sf)
                + x.powf(2.0 * t + 2.0 * sf - 1.0)
                + 2.0 * x.powf(3.0 * t + sf - 1.0)
                - x.powf(4.0 * t + 2.0 * sf - 1.0)
        })
        .with_zeta_factor(t + sf, 2.0);
        Ok(euler_product(&spec)?.scale(zeta(2.0 * t - 1.0)? * z * z))
    })
}

/// `lim c_r^{(n)} = S_2^{(r)} - (S_1^{(r)})²`.
pub fn limit_var_c(r: u32, cutoff: u64) -> Result<Estimate> {
    if r == 0 {
        return Err(invalid("r must be >= 1"));
    }
    let s2 = schur_constant(r, 2, cutoff)?;
    let s1 = schur_constant(r, 1, cutoff)?;
    Ok(s2.sub(s1.mul(s1)))
}

/// `lim d_r^{(n)} = M(r) - (ζ(r)/ζ(r+1))²` for `r >= 2`; `d_1` diverges.
pub fn limit_var_d(r: u32, cutoff: u64) -> Result<Estimate> {
    if r < 2 {
        return Err(Error::Domain(
            "d_1 has no finite limit (it grows like ln(n)^3)".into(),
        ));
    }
    let m = m_constant(r as f64, MForm::Second, cutoff)?;
    let mean = zeta(r as f64)? / zeta(r as f64 + 1.0)?;
    Ok(m.sub(Estimate::exact(mean * mean)))
}

/// `Σ_{i,j<=N} φ(i) φ(j) (gcd(i,j) - 1) / (ij)^{r+1}`, the second route to
/// `lim d_r`.
///
/// Writing `gcd = Σ_{d | gcd} φ(d)` turns the sum into
/// `Σ_d φ(d) A(d)² - A(1)²` with `A(d) = Σ_{d | i <= N} φ(i) / i^{r+1}`.
/// The error bar covers the dropped terms with `i > N` or `j > N`.
pub fn limit_var_d_double_sum(r: u32, sum_bound: u64) -> Result<Estimate> {
    if r < 2 {
        return Err(Error::Domain(
            "d_1 has no finite limit (it grows like ln(n)^3)".into(),
        ));
    }
    let table = ArithTable::build(sum_bound, &[1])?;
    let n = sum_bound as usize;
    let weight: Vec<f64> = (0..=n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                table.totient_at(i) as f64 / (i as f64).powi(r as i32 + 1)
            }
        })
        .collect();
    let mut total = CompensatedSum::default();
    let mut a1 = 0.0;
    for d in 1..=n {
        let mut a = CompensatedSum::default();
        let mut i = d;
        while i <= n {
            a.add(weight[i]);
            i += d;
        }
        let a = a.value();
        if d == 1 {
            a1 = a;
        }
        total.add(table.totient_at(d) as f64 * a * a);
    }
    let value = total.value() - a1 * a1;
    // Dropped pairs have i > N or j > N. With gcd = Σ_{d|gcd} φ(d),
    // Σ_j φ(j) gcd(i,j) / j^{r+1} <= ζ(r) Σ_{d|i} d^{1-r}, which is at most
    // ζ(r) ζ(r-1) for r >= 3 and ζ(r) τ(i) for r = 2; the average order of
    // τ then gives Σ_{i>N} τ(i)/i² ≈ (ln N + 2)/N.
    let nf = sum_bound as f64;
    let rf = r as f64;
    let tail = if r == 2 {
        2.0 * zeta(2.0)? * (nf.ln() + 2.0) / nf
    } else {
        2.0 * zeta(rf)? * zeta(rf - 1.0)? * nf.powf(1.0 - rf) / (rf - 1.0)
    };
    Ok(Estimate {
        value,
        error_bound: tail,
    })
}

// ---------------------------------------------------------------------------
// Partial-sum trends
// ---------------------------------------------------------------------------

/// Finite sums whose `ln^3 N` growth rate is a named constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    /// `Σ_{ij <= N} φ(i)φ(j) gcd(i,j) / (ij)²`, rate Δ.
    ProductSum,
    /// `Σ_{lcm(i,j) <= N} φ(i)φ(j) gcd(i,j) / (ij)²`, rate Δ_Toth.
    LcmSum,
    /// `(1/N) Σ_{k <= N} (P(k)/k)²`, rate Δ_Toth.
    PillaiSq,
}

impl TrendKind {
    pub fn target(&self, cutoff: u64) -> Result<Estimate> {
        match self {
            TrendKind::ProductSum => delta(cutoff),
            TrendKind::LcmSum | TrendKind::PillaiSq => delta_toth(cutoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendPoint {
    pub n: u64,
    pub sum: f64,
    pub ratio: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub kind: TrendKind,
    pub target: f64,
    pub points: Vec<TrendPoint>,
}

impl TrendReport {
    /// Distance to the target strictly decreases along the grid.
    pub fn strictly_approaching(&self) -> bool {
        self.points.windows(2).all(|w| w[1].distance < w[0].distance)
    }

    /// The last grid point is closer to the target than the first.
    pub fn improves(&self) -> bool {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.distance < a.distance,
            _ => false,
        }
    }
}

/// Grid values above this are refused.
pub const TREND_MAX_N: u64 = 10_000_000;

/// Partial sums and their `ln^3 N` ratios along an ascending grid.
pub fn tauberian_trend(kind: TrendKind, grid: &[u64], cutoff: u64) -> Result<TrendReport> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 2 {
        return Err(invalid("grid must be nonempty, ascending and start at >= 2"));
    }
    let top = *grid.last().unwrap();
    if top > TREND_MAX_N {
        return Err(Error::CostGuard {
            what: "partial-sum trend".into(),
            cost: top as u128,
            budget: TREND_MAX_N as u128,
        });
    }
    let table = ArithTable::build(top, &[1])?;
    let target = kind.target(cutoff)?.value;
    let sums = match kind {
        TrendKind::ProductSum => product_sums(&table, grid),
        TrendKind::LcmSum => lcm_sums(&table, grid),
        TrendKind::PillaiSq => pillai_square_means(&table, grid),
    };
    let points = grid
        .iter()
        .zip(sums)
        .map(|(&n, sum)| {
            let ratio = sum / (n as f64).ln().powi(3);
            TrendPoint {
                n,
                sum,
                ratio,
                distance: (ratio - target).abs(),
            }
        })
        .collect();
    Ok(TrendReport {
        kind,
        target,
        points,
    })
}

fn phi_over_square(table: &ArithTable, i: u64) -> f64 {
    table.totient_at(i as usize) as f64 / (i as f64 * i as f64)
}

/// Sorts the contributions of each term by the smallest grid point that
/// includes it, then accumulates per bucket.
fn bucketed(grid: &[u64], mut emit: impl FnMut(&mut dyn FnMut(u64, f64))) -> Vec<f64> {
    let mut buckets = vec![CompensatedSum::default(); grid.len()];
    emit(&mut |key, term| {
        let b = grid.partition_point(|&g| g < key);
        if b < grid.len() {
            buckets[b].add(term);
        }
    });
    let mut running = CompensatedSum::default();
    buckets
        .iter()
        .map(|b| {
            running.add(b.value());
            running.value()
        })
        .collect()
}

/// `Σ_{ij <= N} φ(i)φ(j) gcd(i,j) / (ij)²` for each N in the grid.
pub fn product_sums(table: &ArithTable, grid: &[u64]) -> Vec<f64> {
    let top = *grid.last().unwrap();
    bucketed(grid, |add| {
        for i in 1..=top {
            let wi = phi_over_square(table, i);
            for j in 1..=top / i {
                add(i * j, wi * phi_over_square(table, j) * gcd(i, j) as f64);
            }
        }
    })
}

/// `Σ_{lcm(i,j) <= N} φ(i)φ(j) gcd(i,j) / (ij)²` for each N in the grid,
/// enumerated as `i = g a`, `j = g b` with `gcd(a, b) = 1`, `lcm = g a b`.
pub fn lcm_sums(table: &ArithTable, grid: &[u64]) -> Vec<f64> {
    let top = *grid.last().unwrap();
    bucketed(grid, |add| {
        for g in 1..=top {
            let gf = g as f64;
            for a in 1..=top / g {
                let ga = g * a;
                let wa = table.totient_at(ga as usize) as f64 / (ga as f64 * ga as f64);
                for b in 1..=top / ga {
                    if gcd(a, b) != 1 {
                        continue;
                    }
                    let gb = g * b;
                    let wb = table.totient_at(gb as usize) as f64 / (gb as f64 * gb as f64);
                    add(ga * b, wa * wb * gf);
                }
            }
        }
    })
}

/// `(1/N) Σ_{k <= N} (P(k)/k)²` for each N in the grid, with
/// `P(k)/k = Σ_{d|k} φ(d)/d` filled by the multiples loop.
pub fn pillai_square_means(table: &ArithTable, grid: &[u64]) -> Vec<f64> {
    let top = *grid.last().unwrap() as usize;
    let mut ratio = vec![0f64; top + 1];
    for d in 1..=top {
        let w = table.totient_at(d) as f64 / d as f64;
        let mut k = d;
        while k <= top {
            ratio[k] += w;
            k += d;
        }
    }
    let sums = bucketed(grid, |add| {
        for (k, v) in ratio.iter().enumerate().skip(1) {
            add(k as u64, v * v);
        }
    });
    sums.iter().zip(grid).map(|(s, &n)| s / n as f64).collect()
}

/// `Σ_{i,j <= N} φ(i)φ(j) gcd(i,j) / (ij)^{1+t}`, evaluated pair by pair.
pub fn truncated_m_sum(table: &ArithTable, t: f64, bound: u64) -> f64 {
    let w: Vec<f64> = (0..=bound)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                table.totient_at(i as usize) as f64 / (i as f64).powf(1.0 + t)
            }
        })
        .collect();
    let mut total = CompensatedSum::default();
    for i in 1..=bound {
        let mut row = CompensatedSum::default();
        for j in 1..=bound {
            row.add(w[j as usize] * gcd(i, j) as f64);
        }
        total.add(w[i as usize] * row.value());
    }
    total.value()
}

/// One row of the constants report.
#[derive(Debug, Clone, Serialize)]
pub struct NamedConstant {
    pub name: String,
    pub cutoff: u64,
    pub value: f64,
    pub error_bound: f64,
}

/// Every named constant at one cutoff, in a fixed order.
pub fn all_constants(cutoff: u64) -> Result<Vec<NamedConstant>> {
    let mut out = Vec::new();
    let mut push = |name: &str, e: Estimate| {
        out.push(NamedConstant {
            name: name.to_string(),
            cutoff,
            value: e.value,
            error_bound: e.error_bound,
        })
    };
    for t in [2.0, 3.0, 4.0] {
        push(&format!("zeta({t})"), Estimate::exact(zeta(t)?));
    }
    push("Delta", delta(cutoff)?);
    push("Delta_Toth", delta_toth(cutoff)?);
    for s in 2..=3 {
        push(&format!("Delta_{s}"), delta_s(s, cutoff)?);
    }
    for m in 2..=5 {
        push(&format!("T_{m}"), pairwise_coprime_t(m, cutoff)?);
    }
    for s in 1..=3 {
        for l in 1..=2 {
            push(&format!("S_{l}^({s})"), schur_constant(s, l, cutoff)?);
        }
    }
    for t in [1.5, 2.0, 3.0] {
        push(&format!("M({t})"), m_constant(t, MForm::Second, cutoff)?);
    }
    for r in 1..=3 {
        push(&format!("lim c_{r}"), limit_var_c(r, cutoff)?);
    }
    for r in 2..=3 {
        push(&format!("lim d_{r}"), limit_var_d(r, cutoff)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: u64 = 100_000;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn zeta_values() {
        close(zeta(2.0).unwrap(), PI * PI / 6.0, 1e-14);
        close(zeta(4.0).unwrap(), PI.powi(4) / 90.0, 1e-14);
        close(zeta(3.0).unwrap(), 1.2020569031595942, 1e-14);
        close(zeta(1.5).unwrap(), 2.6123753486854883, 1e-13);
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
        // direct partial sum with integral tail bounds at t = 3
        let direct: f64 = (1..=100_000u64).map(|k| (k as f64).powi(-3)).sum();
        let z3 = zeta(3.0).unwrap();
        assert!(z3 > direct && z3 < direct + 0.5e-10 + 1e-13);
    }

    #[test]
    fn engine_trivial_and_zeta_products() {
        let one = euler_product(&ProductSpec::new(SMALL, 2.0, |_| 0.0)).unwrap();
        assert_eq!(one.value, 1.0);
        let plain = ProductSpec::new(1_000_000, 2.0, |p: f64| 1.0 / (1.0 - p.powi(-2)) - 1.0);
        let e = euler_product(&plain).unwrap();
        close(e.value, zeta(2.0).unwrap(), 1e-6);
        assert!((e.value - zeta(2.0).unwrap()).abs() <= e.error_bound);
        let inv = ProductSpec::new(1_000_000, 2.0, |p: f64| -p.powi(-2));
        close(euler_product(&inv).unwrap().value, 1.0 / zeta(2.0).unwrap(), 1e-6);
        // accelerated form of the same product is exact up to rounding
        let acc = inv.clone().with_zeta_factor(2.0, 1.0);
        close(euler_product(&acc).unwrap().value, 1.0 / zeta(2.0).unwrap(), 1e-14);
    }

    #[test]
    fn engine_rejects_bad_specs() {
        assert!(matches!(
            euler_product(&ProductSpec::new(100, 2.0, |_| -1.5)),
            Err(Error::Domain(_))
        ));
        assert!(euler_product(&ProductSpec::new(1, 2.0, |_| 0.0)).is_err());
        assert!(euler_product(&ProductSpec::new(100, 1.0, |_| 0.0)).is_err());
    }

    #[test]
    fn doubling_cutoff_stays_inside_bar() {
        for spec in [
            ProductSpec::new(20_000, 2.0, |p: f64| delta_excess(1.0 / p)),
            ProductSpec::new(20_000, 4.0, |p: f64| delta_excess(1.0 / p))
                .with_zeta_factor(2.0, 5.0)
                .with_zeta_factor(3.0, -5.0),
            ProductSpec::new(20_000, 3.0, |p: f64| -(p.powi(-2)) + p.powi(-3)),
        ] {
            let a = euler_product(&spec).unwrap();
            let mut wide = spec.clone();
            wide.cutoff *= 2;
            let b = euler_product(&wide).unwrap();
            assert!((a.value - b.value).abs() <= a.error_bound, "{a:?} {b:?}");
            // log f(p) < 0 for large p: the truncated products decrease
            if spec.zeta_factors.is_empty() {
                assert!(b.value <= a.value);
            }
        }
    }

    #[test]
    fn pairwise_coprime_products() {
        let t2 = pairwise_coprime_t(2, 1_000_000).unwrap();
        close(t2.value, 1.0 / zeta(2.0).unwrap(), 1e-6);
        let mut prev = t2.value;
        for m in 3..=10 {
            let t = pairwise_coprime_t(m, SMALL).unwrap().value;
            assert!(t < prev && t > 0.0);
            prev = t;
        }
        assert!(pairwise_coprime_t(1, SMALL).is_err());
    }

    #[test]
    fn schur_constants() {
        for s in 1..=4 {
            let e = schur_constant(s, 1, 1_000_000).unwrap();
            close(e.value, 1.0 / zeta(s as f64 + 1.0).unwrap(), 1e-10);
        }
        for s in 1..=3 {
            let s1 = schur_constant(s, 1, SMALL).unwrap().value;
            let s2 = schur_constant(s, 2, SMALL).unwrap().value;
            assert!(s2 > s1 * s1);
        }
    }

    #[test]
    fn schur_matches_sieved_average() {
        let n = 200_000u64;
        let table = ArithTable::build(n, &[1, 2]).unwrap();
        for (s, l) in [(1u32, 2i32), (2, 2), (1, 3)] {
            let avg: f64 = (1..=n)
                .map(|k| (table.jordan(s, k).unwrap() as f64 / (k as f64).powi(s as i32)).powi(l))
                .sum::<f64>()
                / n as f64;
            close(avg, schur_constant(s, l as u32, SMALL).unwrap().value, 1e-4);
        }
    }

    #[test]
    fn per_prime_identity() {
        for p in primes_up_to(10_000) {
            let p = p as f64;
            let toth = 1.0 + p.powi(-3) - 4.0 / (p * (p + 1.0));
            let lhs = toth * (1.0 - p.powi(-2));
            let rhs = 1.0 - 5.0 * p.powi(-2) + 5.0 * p.powi(-3) - p.powi(-5);
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_family() {
        let d = delta(1_000_000).unwrap();
        close(d.value, 0.01186, 5e-5);
        let t = delta_toth(1_000_000).unwrap();
        close(t.value, 2.0 * d.value, 1e-12);
        close(delta_s(1, 1_000_000).unwrap().value, d.value, 1e-12);
        let d2 = delta_s(2, SMALL).unwrap();
        let d3 = delta_s(3, SMALL).unwrap();
        assert!(d2.value > d.value && d3.value > d2.value);
        // unaccelerated product at a larger cutoff lands inside the bar
        let raw = euler_product(&ProductSpec::new(2_000_000, 2.0, |p: f64| delta_excess(1.0 / p)))
            .unwrap()
            .scale(1.0 / 12.0);
        assert!((raw.value - d.value).abs() <= raw.error_bound + d.error_bound);
    }

    #[test]
    fn m_constant_forms_agree() {
        for t in [1.5, 2.0, 3.0, 4.5] {
            let a = m_constant(t, MForm::First, 1_000_000).unwrap();
            let b = m_constant(t, MForm::Second, 1_000_000).unwrap();
            close(a.value, b.value, 1e-10);
            let s1 = m_constant_s(t, 1, 1_000_000).unwrap();
            close(s1.value, b.value, 1e-10);
        }
        assert!(m_constant(1.0, MForm::First, SMALL).is_err());
    }

    #[test]
    fn gcd_zeta_identity_by_truncation() {
        // Σ gcd(i,j)/(ij)^2 = ζ(3)ζ(2)²/ζ(4); the tail beyond N is at most
        // 2 ζ(2) Σ_{i>N} i/i² · ... bounded crudely by 2 ζ(2)·(1+ln N)/N.
        let n = 3000u64;
        let mut s = CompensatedSum::default();
        for i in 1..=n {
            for j in 1..=n {
                s.add(gcd(i, j) as f64 / ((i * j) as f64).powi(2));
            }
        }
        let target = zeta(3.0).unwrap() * zeta(2.0).unwrap().powi(2) / zeta(4.0).unwrap();
        let gap = target - s.value();
        assert!(gap > 0.0 && gap < 2.0 * zeta(2.0).unwrap() * (1.0 + (n as f64).ln()) / n as f64);
    }

    #[test]
    fn m_constant_truncation_converges() {
        let table = ArithTable::build(2000, &[1]).unwrap();
        let m2 = m_constant(2.0, MForm::Second, 1_000_000).unwrap().value;
        let g1 = m2 - truncated_m_sum(&table, 2.0, 1000);
        let g2 = m2 - truncated_m_sum(&table, 2.0, 2000);
        assert!(g1 > 0.0 && g2 > 0.0 && g2 < g1);
        // terms are O(1/N): halving the gap when doubling N
        close(g1 / g2, 2.0, 0.2);
        let m3 = m_constant(3.0, MForm::First, 1_000_000).unwrap().value;
        close(truncated_m_sum(&table, 3.0, 2000), m3, 1e-6);
    }

    #[test]
    fn limit_variances() {
        let c1 = limit_var_c(1, SMALL).unwrap();
        assert!(c1.value > 0.0);
        assert!(matches!(limit_var_d(1, SMALL), Err(Error::Domain(_))));
        assert!(limit_var_d_double_sum(1, 100).is_err());
        let d2 = limit_var_d(2, 1_000_000).unwrap();
        let d2_sum = limit_var_d_double_sum(2, 1_000_000).unwrap();
        close(d2.value, d2_sum.value, 1e-6);
        let d3 = limit_var_d(3, 1_000_000).unwrap();
        let d3_sum = limit_var_d_double_sum(3, 100_000).unwrap();
        close(d3.value, d3_sum.value, 1e-8);
    }

    #[test]
    fn trend_sums_small_grid() {
        let grid = [10u64, 100, 1000];
        let table = ArithTable::build(1000, &[1]).unwrap();
        // brute force over all pairs
        for (idx, &n) in grid.iter().enumerate() {
            let mut prod = 0.0;
            let mut lcm = 0.0;
            for i in 1..=n {
                for j in 1..=n {
                    let w = phi_over_square(&table, i) * phi_over_square(&table, j) * gcd(i, j) as f64;
                    if i * j <= n {
                        prod += w;
                    }
                    if i / gcd(i, j) * j <= n {
                        lcm += w;
                    }
                }
            }
            close(product_sums(&table, &grid)[idx], prod, 1e-12 * prod);
            close(lcm_sums(&table, &grid)[idx], lcm, 1e-12 * lcm);
            let pillai: f64 = (1..=n)
                .map(|k| {
                    let p: u64 = (1..=k).map(|i| gcd(i, k)).sum();
                    (p as f64 / k as f64).powi(2)
                })
                .sum::<f64>()
                / n as f64;
            close(pillai_square_means(&table, &grid)[idx], pillai, 1e-12 * pillai);
        }
    }

    #[test]
    fn trend_report_shape() {
        let rep = tauberian_trend(TrendKind::PillaiSq, &[1000, 10_000, 100_000], SMALL).unwrap();
        assert_eq!(rep.points.len(), 3);
        assert!(rep.strictly_approaching() && rep.improves());
        // approaches from above
        assert!(rep.points.iter().all(|p| p.ratio > rep.target));
        assert!(tauberian_trend(TrendKind::LcmSum, &[100, 10], SMALL).is_err());
        assert!(matches!(
            tauberian_trend(TrendKind::LcmSum, &[100, 20_000_000], SMALL),
            Err(Error::CostGuard { .. })
        ));
    }
}
