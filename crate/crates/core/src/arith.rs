//! Sieved arithmetic functions.
//!
//! A single linear sieve produces the smallest-prime-factor array; the
//! Möbius function, divisor counts and every requested Jordan totient
//! `φ_s(k) = k^s Π_{p|k} (1 - p^{-s})` are then filled in one increasing
//! pass using `k = p · (k / p)` with `p = spf(k)`.
//!
//! A built [`ArithTable`] is immutable and can be shared across threads.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Default memory ceiling for a table (4 GiB).
pub const DEFAULT_BUDGET_BYTES: u128 = 4 << 30;

const MAGIC: &[u8; 8] = b"GCDTABLE";
const FORMAT_VERSION: u32 = 1;

/// Jordan totient values for one order, stored as narrowly as `n_max^s`
/// allows.
#[derive(Debug, Clone, PartialEq)]
enum TotientColumn {
    Narrow(Vec<u64>),
    Wide(Vec<u128>),
}

impl TotientColumn {
    #[inline]
    fn get(&self, k: usize) -> u128 {
        match self {
            TotientColumn::Narrow(v) => v[k] as u128,
            TotientColumn::Wide(v) => v[k],
        }
    }

    fn bytes_per_entry(n_max: u64, s: u32) -> Result<usize> {
        match (n_max as u128).checked_pow(s) {
            Some(b) if b <= u64::MAX as u128 => Ok(8),
            Some(_) => Ok(16),
            None => Err(Error::Overflow(format!(
                "φ_{s} on 1..={n_max} exceeds 128 bits"
            ))),
        }
    }
}

/// Sieved arithmetic functions on `1..=n_max`.
///
/// Index 0 of every internal array is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithTable {
    n_max: u64,
    spf: Vec<u32>,
    mobius: Vec<i8>,
    tau: Vec<u32>,
    totients: BTreeMap<u32, TotientColumn>,
    primes: Vec<u32>,
}

impl ArithTable {
    /// Builds the table with the default memory budget. Order 1 (Euler's φ)
    /// is always included.
    pub fn build(n_max: u64, orders: &[u32]) -> Result<Self> {
        Self::build_with_budget(n_max, orders, DEFAULT_BUDGET_BYTES)
    }

    pub fn build_with_budget(n_max: u64, orders: &[u32], budget_bytes: u128) -> Result<Self> {
        if n_max == 0 {
            return Err(crate::error::invalid("n_max must be at least 1"));
        }
        if n_max >= u32::MAX as u64 {
            return Err(crate::error::invalid("n_max must fit in 32 bits"));
        }
        let mut orders: Vec<u32> = orders.to_vec();
        orders.push(1);
        orders.sort_unstable();
        orders.dedup();
        if orders[0] == 0 {
            return Err(crate::error::invalid("totient orders must be >= 1"));
        }

        let mut per_entry: u128 = 4 + 1 + 4;
        for &s in &orders {
            per_entry += TotientColumn::bytes_per_entry(n_max, s)? as u128;
        }
        let bytes = per_entry * (n_max as u128 + 1);
        if bytes > budget_bytes {
            return Err(Error::Capacity {
                requested: n_max,
                bytes,
                budget: budget_bytes,
            });
        }

        let n = n_max as usize;
        let (spf, primes) = linear_sieve(n);

        let mut mobius = vec![0i8; n + 1];
        let mut tau = vec![0u32; n + 1];
        // exponent of spf(k) in k
        let mut spf_exp = vec![0u8; n + 1];
        mobius[1] = 1;
        tau[1] = 1;
        for k in 2..=n {
            let p = spf[k] as usize;
            let m = k / p;
            if spf[m] as usize == p {
                mobius[k] = 0;
                spf_exp[k] = spf_exp[m] + 1;
                let e = spf_exp[m] as u32;
                tau[k] = tau[m] / (e + 1) * (e + 2);
            } else {
                mobius[k] = -mobius[m];
                spf_exp[k] = 1;
                tau[k] = tau[m] * 2;
            }
        }
        drop(spf_exp);

        let mut totients = BTreeMap::new();
        for &s in &orders {
            let column = if TotientColumn::bytes_per_entry(n_max, s)? == 8 {
                TotientColumn::Narrow(jordan_column::<u64>(&spf, s, |x| x as u64))
            } else {
                TotientColumn::Wide(jordan_column::<u128>(&spf, s, |x| x))
            };
            totients.insert(s, column);
        }

        Ok(Self {
            n_max,
            spf,
            mobius,
            tau,
            totients,
            primes,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// Totient orders stored in the table.
    pub fn orders(&self) -> Vec<u32> {
        self.totients.keys().copied().collect()
    }

    /// Primes up to `n_max`, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    #[inline]
    fn check(&self, k: u64) -> Result<usize> {
        if k == 0 || k > self.n_max {
            Err(Error::OutOfRange {
                index: k,
                n_max: self.n_max,
            })
        } else {
            Ok(k as usize)
        }
    }

    pub fn mobius(&self, k: u64) -> Result<i8> {
        Ok(self.mobius[self.check(k)?])
    }

    pub fn tau(&self, k: u64) -> Result<u32> {
        Ok(self.tau[self.check(k)?])
    }

    pub fn smallest_prime_factor(&self, k: u64) -> Result<u32> {
        Ok(self.spf[self.check(k)?])
    }

    /// Euler's φ.
    pub fn totient(&self, k: u64) -> Result<u64> {
        Ok(self.totients[&1].get(self.check(k)?) as u64)
    }

    /// Jordan totient `φ_s(k)`; orders missing from the table are computed
    /// from the factorization.
    pub fn jordan(&self, s: u32, k: u64) -> Result<u128> {
        let idx = self.check(k)?;
        if s == 0 {
            return Err(crate::error::invalid("totient order must be >= 1"));
        }
        if let Some(col) = self.totients.get(&s) {
            return Ok(col.get(idx));
        }
        let mut acc: u128 = 1;
        for (p, e) in self.factorize(k)? {
            let ps = (p as u128)
                .checked_pow(s)
                .ok_or_else(|| Error::Overflow(format!("φ_{s}({k})")))?;
            let local = (ps - 1)
                .checked_mul(
                    ps.checked_pow(e - 1)
                        .ok_or_else(|| Error::Overflow(format!("φ_{s}({k})")))?,
                )
                .ok_or_else(|| Error::Overflow(format!("φ_{s}({k})")))?;
            acc = acc
                .checked_mul(local)
                .ok_or_else(|| Error::Overflow(format!("φ_{s}({k})")))?;
        }
        Ok(acc)
    }

    /// Unchecked fast paths for the hot loops of the exact module; callers
    /// have already validated `k <= n_max`.
    #[inline]
    pub(crate) fn mobius_at(&self, k: usize) -> i8 {
        self.mobius[k]
    }

    #[inline]
    pub(crate) fn totient_at(&self, k: usize) -> u64 {
        self.totients[&1].get(k) as u64
    }

    /// Prime factorization as ascending `(p, exponent)` pairs.
    pub fn factorize(&self, k: u64) -> Result<Vec<(u64, u32)>> {
        let mut k = self.check(k)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        while k > 1 {
            let p = self.spf[k] as usize;
            let mut e = 0;
            while k % p == 0 {
                k /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// Divisors of `k`, ascending. Length equals `tau(k)`.
    pub fn divisors(&self, k: u64) -> Result<Vec<u64>> {
        let mut divs = Vec::with_capacity(self.tau(k)? as usize);
        self.divisors_into(k, &mut divs)?;
        divs.sort_unstable();
        Ok(divs)
    }

    /// Appends the divisors of `k` to `out` in generation order (unsorted).
    pub fn divisors_into(&self, k: u64, out: &mut Vec<u64>) -> Result<()> {
        let start = out.len();
        out.push(1);
        for (p, e) in self.factorize(k)? {
            let len = out.len() - start;
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    let d = out[start + i] * pk;
                    out.push(d);
                }
            }
        }
        Ok(())
    }

    /// Pillai's function `P_s(k) = Σ_{i=1}^k gcd(i, k)^s`, evaluated through
    /// `P_s(k) = Σ_{d|k} φ(d) (k/d)^s`.
    pub fn pillai(&self, s: u32, k: u64) -> Result<u128> {
        if s == 0 {
            return Err(crate::error::invalid("Pillai order must be >= 1"));
        }
        let overflow = || Error::Overflow(format!("P_{s}({k})"));
        let mut acc: u128 = 0;
        for d in self.divisors(k)? {
            let term = (self.totient_at(d as usize) as u128)
                .checked_mul((k / d).checked_pow(s).map(u128::from).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
            acc = acc.checked_add(term).ok_or_else(overflow)?;
        }
        Ok(acc)
    }

    /// Writes the table in the versioned binary cache format.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.n_max.to_le_bytes())?;
        w.write_all(&(self.totients.len() as u32).to_le_bytes())?;
        for &s in self.totients.keys() {
            w.write_all(&s.to_le_bytes())?;
        }
        let n = self.n_max as usize;
        for k in 1..=n {
            w.write_all(&self.spf[k].to_le_bytes())?;
        }
        for k in 1..=n {
            w.write_all(&self.mobius[k].to_le_bytes())?;
        }
        for k in 1..=n {
            w.write_all(&self.tau[k].to_le_bytes())?;
        }
        for col in self.totients.values() {
            match col {
                TotientColumn::Narrow(v) => {
                    w.write_all(&[8u8])?;
                    for x in &v[1..] {
                        w.write_all(&x.to_le_bytes())?;
                    }
                }
                TotientColumn::Wide(v) => {
                    w.write_all(&[16u8])?;
                    for x in &v[1..] {
                        w.write_all(&x.to_le_bytes())?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads only the header of a dumped table: `(n_max, orders)`.
    pub fn read_header<R: Read>(mut r: R) -> Result<(u64, Vec<u32>)> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n_max = read_u64(&mut r)?;
        let count = read_u32(&mut r)?;
        let mut orders = Vec::with_capacity(count as usize);
        for _ in 0..count {
            orders.push(read_u32(&mut r)?);
        }
        Ok((n_max, orders))
    }

    /// Loads a table written by [`ArithTable::dump`].
    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let (n_max, orders) = Self::read_header(&mut r)?;
        if n_max == 0 || n_max >= u32::MAX as u64 {
            return Err(Error::Format(format!("implausible n_max {n_max}")));
        }
        let n = n_max as usize;
        let mut spf = vec![0u32; n + 1];
        for x in spf.iter_mut().skip(1) {
            *x = read_u32(&mut r)?;
        }
        let mut mobius = vec![0i8; n + 1];
        for x in mobius.iter_mut().skip(1) {
            let mut b = [0u8; 1];
            r.read_exact(&mut b)?;
            *x = b[0] as i8;
        }
        let mut tau = vec![0u32; n + 1];
        for x in tau.iter_mut().skip(1) {
            *x = read_u32(&mut r)?;
        }
        let mut totients = BTreeMap::new();
        for s in orders {
            let mut width = [0u8; 1];
            r.read_exact(&mut width)?;
            let col = match width[0] {
                8 => {
                    let mut v = vec![0u64; n + 1];
                    for x in v.iter_mut().skip(1) {
                        *x = read_u64(&mut r)?;
                    }
                    TotientColumn::Narrow(v)
                }
                16 => {
                    let mut v = vec![0u128; n + 1];
                    for x in v.iter_mut().skip(1) {
                        let mut b = [0u8; 16];
                        r.read_exact(&mut b)?;
                        *x = u128::from_le_bytes(b);
                    }
                    TotientColumn::Wide(v)
                }
                w => return Err(Error::Format(format!("bad column width {w}"))),
            };
            totients.insert(s, col);
        }
        if !totients.contains_key(&1) {
            return Err(Error::Format("missing order-1 totient column".into()));
        }
        let primes = (2..=n)
            .filter(|&k| spf[k] as usize == k)
            .map(|k| k as u32)
            .collect();
        spf[1] = 1;
        Ok(Self {
            n_max,
            spf,
            mobius,
            tau,
            totients,
            primes,
        })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Linear sieve: smallest prime factor of every k in `0..=n` (spf[1] = 1)
/// and the primes up to n.
pub fn linear_sieve(n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    if n >= 1 {
        spf[1] = 1;
    }
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let lpf = spf[i];
        for &p in &primes {
            if p > lpf || (p as usize) * i > n {
                break;
            }
            spf[p as usize * i] = p;
        }
    }
    (spf, primes)
}

/// Primes up to `bound` (inclusive), via an Eratosthenes bit sieve.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn jordan_column<T: Copy + Default>(spf: &[u32], s: u32, from: impl Fn(u128) -> T) -> Vec<T>
where
    u128: From<T>,
{
    let n = spf.len() - 1;
    let mut col = vec![T::default(); n + 1];
    col[1] = from(1);
    for k in 2..=n {
        let p = spf[k] as usize;
        let m = k / p;
        let ps = (p as u128).pow(s);
        let prev = u128::from(col[m]);
        // bounded by k^s, which the caller checked fits in T
        let v = if spf[m] as usize == p {
            prev * ps
        } else {
            prev * (ps - 1)
        };
        col[k] = from(v);
    }
    col
}

/// Greatest common divisor (Euclid). `gcd(0, b) = b`.
#[inline]
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple; overflow is reported, never wrapped.
pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(crate::error::invalid("lcm arguments must be >= 1"));
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("lcm({a}, {b})")))
}

/// `C(n, k)` as u128, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(n, k)` in floating point, for coefficient sizes past u128.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_divisors(k: u64) -> Vec<u64> {
        (1..=k).filter(|d| k % d == 0).collect()
    }

    #[test]
    fn small_table_values() {
        let t = ArithTable::build(12, &[1, 2]).unwrap();
        assert_eq!(t.mobius(6).unwrap(), 1);
        assert_eq!(t.mobius(4).unwrap(), 0);
        assert_eq!(t.mobius(12).unwrap(), 0);
        assert_eq!(t.mobius(1).unwrap(), 1);
        assert_eq!(t.totient(12).unwrap(), 4);
        assert_eq!(t.jordan(2, 6).unwrap(), 24);
        assert_eq!(t.tau(12).unwrap(), 6);
        assert!(matches!(t.mobius(13), Err(Error::OutOfRange { .. })));
        assert!(matches!(t.mobius(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn jordan_two_by_counting() {
        // φ_2(6) = #{(a, b) in [1, 6]^2 : gcd(a, b, 6) = 1}
        let count = (1..=6u64)
            .flat_map(|a| (1..=6u64).map(move |b| (a, b)))
            .filter(|&(a, b)| gcd(gcd(a, b), 6) == 1)
            .count();
        assert_eq!(count, 24);
    }

    #[test]
    fn pillai_examples() {
        let t = ArithTable::build(12, &[]).unwrap();
        assert_eq!(t.pillai(1, 6).unwrap(), 15);
        assert_eq!(t.pillai(2, 6).unwrap(), 55);
        assert_eq!(t.pillai(1, 1).unwrap(), 1);
        assert!(t.pillai(1, 13).is_err());
    }

    #[test]
    fn divisor_examples() {
        let t = ArithTable::build(12, &[]).unwrap();
        assert_eq!(t.divisors(1).unwrap(), vec![1]);
        assert_eq!(t.divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(t.divisors(7).unwrap(), vec![1, 7]);
        assert!(t.divisors(13).is_err());
    }

    #[test]
    fn gcd_lcm_examples() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(4, 6).unwrap(), 12);
        for k in 1..50 {
            assert_eq!(gcd(1, k), 1);
        }
        assert!(matches!(lcm(u64::MAX, u64::MAX - 1), Err(Error::Overflow(_))));
        assert!(lcm(0, 3).is_err());
    }

    #[test]
    fn table_invariants_to_ten_thousand() {
        let n = 10_000u64;
        let t = ArithTable::build(n, &[1, 2, 3]).unwrap();
        let mut phi_sum = vec![0u64; n as usize + 1];
        let mut mu_sum = vec![0i64; n as usize + 1];
        for d in 1..=n {
            let phi = t.totient(d).unwrap();
            let mu = t.mobius(d).unwrap() as i64;
            assert!((-1..=1).contains(&mu));
            assert!(phi >= 1 && phi <= d);
            let mut k = d;
            while k <= n {
                phi_sum[k as usize] += phi;
                mu_sum[k as usize] += mu;
                k += d;
            }
        }
        for k in 1..=n {
            assert_eq!(phi_sum[k as usize], k, "Σ_(d|k) φ(d) = k at {k}");
            assert_eq!(mu_sum[k as usize], (k == 1) as i64, "Σ μ at {k}");
            assert_eq!(t.divisors(k).unwrap().len() as u32, t.tau(k).unwrap());
        }
    }

    #[test]
    fn jordan_product_formula() {
        let t = ArithTable::build(3000, &[1, 2, 3, 4]).unwrap();
        for s in 1..=5u32 {
            for k in 1..=3000u64 {
                let js = t.jordan(s, k).unwrap();
                // k^s Π (1 - p^-s) = Π p^{s(e-1)} (p^s - 1)
                let mut expect: u128 = 1;
                for (p, e) in t.factorize(k).unwrap() {
                    let ps = (p as u128).pow(s);
                    expect *= ps.pow(e - 1) * (ps - 1);
                }
                assert_eq!(js, expect);
                assert!(js >= 1 && js <= (k as u128).pow(s));
            }
        }
    }

    #[test]
    fn convolution_identities_to_ten_thousand() {
        let n = 10_000u64;
        let t = ArithTable::build(n, &[1, 2, 3]).unwrap();
        for s in 1..=3u32 {
            for k in 1..=n {
                let divs = t.divisors(k).unwrap();
                // (μ * I_s)(k) = φ_s(k)
                let mu_is: i128 = divs
                    .iter()
                    .map(|&d| t.mobius(d).unwrap() as i128 * ((k / d) as i128).pow(s))
                    .sum();
                assert_eq!(mu_is, t.jordan(s, k).unwrap() as i128);
                // (φ * I_s)(k) = P_s(k) = (φ_s * I)(k)
                let phi_is: u128 = divs
                    .iter()
                    .map(|&d| t.totient(d).unwrap() as u128 * ((k / d) as u128).pow(s))
                    .sum();
                let phis_i: u128 = divs
                    .iter()
                    .map(|&d| t.jordan(s, d).unwrap() * (k / d) as u128)
                    .sum();
                let p = t.pillai(s, k).unwrap();
                assert_eq!(phi_is, p);
                assert_eq!(phis_i, p);
            }
        }
    }

    #[test]
    fn pillai_matches_defining_sum() {
        let t = ArithTable::build(600, &[]).unwrap();
        for s in 1..=3u32 {
            for k in 1..=600u64 {
                let direct: u128 = (1..=k).map(|i| (gcd(i, k) as u128).pow(s)).sum();
                assert_eq!(t.pillai(s, k).unwrap(), direct);
            }
        }
    }

    #[test]
    fn pillai_bound_chain() {
        let n = 10_000u64;
        let t = ArithTable::build(n, &[]).unwrap();
        for k in 1..=n {
            let p1 = t.pillai(1, k).unwrap();
            let tau = t.tau(k).unwrap() as u128;
            // P(k)/k <= τ(k)
            assert!(p1 <= tau * k as u128);
            for s in 2..=3u32 {
                // P_s(k)/k^s <= P(k)/k  ⇔  P_s(k) <= P(k) k^{s-1}
                let ps = t.pillai(s, k).unwrap();
                assert!(ps <= p1 * (k as u128).pow(s - 1));
            }
        }
    }

    #[test]
    fn divisors_match_naive() {
        let t = ArithTable::build(2000, &[]).unwrap();
        for k in 1..=2000 {
            assert_eq!(t.divisors(k).unwrap(), naive_divisors(k));
        }
    }

    #[test]
    fn capacity_budget_enforced() {
        let err = ArithTable::build_with_budget(1_000_000, &[1], 1 << 20).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(ArithTable::build(0, &[]).is_err());
    }

    #[test]
    fn wide_columns_and_hard_limit() {
        // 5000^6 > 2^64, so order 6 is stored in 128-bit form
        let t = ArithTable::build(5000, &[6]).unwrap();
        assert_eq!(t.jordan(6, 4999).unwrap(), 4999u128.pow(6) - 1);
        // 5000^11 > 2^128
        assert!(matches!(
            ArithTable::build(5000, &[11]),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn dump_load_roundtrip() {
        let t = ArithTable::build(500, &[2, 7]).unwrap();
        let mut buf = Vec::new();
        t.dump(&mut buf).unwrap();
        let (n, orders) = ArithTable::read_header(&buf[..]).unwrap();
        assert_eq!(n, 500);
        assert_eq!(orders, vec![1, 2, 7]);
        let back = ArithTable::load(&buf[..]).unwrap();
        assert_eq!(back, t);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(ArithTable::load(&bad[..]), Err(Error::Format(_))));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(1000, 3), Some(166_167_000));
        assert!((binomial_f64(1000, 3) - 166_167_000.0).abs() < 1e-3);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn table() -> &'static ArithTable {
            static T: OnceLock<ArithTable> = OnceLock::new();
            T.get_or_init(|| ArithTable::build(1_000_000, &[1, 2, 3]).unwrap())
        }

        proptest! {
            #[test]
            fn multiplicative_on_coprime_pairs(a in 1u64..=1000, b in 1u64..=1000) {
                prop_assume!(gcd(a, b) == 1);
                let t = table();
                let ab = a * b;
                for s in 1..=3 {
                    prop_assert_eq!(t.jordan(s, ab).unwrap(), t.jordan(s, a).unwrap() * t.jordan(s, b).unwrap());
                }
                prop_assert_eq!(t.tau(ab).unwrap(), t.tau(a).unwrap() * t.tau(b).unwrap());
                prop_assert_eq!(t.mobius(ab).unwrap(), t.mobius(a).unwrap() * t.mobius(b).unwrap());
            }
        }
    }
}
