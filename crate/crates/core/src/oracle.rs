//! Brute-force enumeration over small sample spaces.
//!
//! Every function here walks the tuples of `{1..n}` explicitly and applies
//! `gcd` directly, with no Möbius inversion or floor sums, so it serves as
//! an independent reference for [`crate::exact`]. Results are exact
//! rationals. Costs grow like `n^(number of free variables)`; callers keep
//! `n` small.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{binomial, gcd};

/// Tuple spaces up to this size are walked in full; beyond it the walk is
/// split into the shared block and the fresh blocks.
pub const FULL_ENUMERATION_LIMIT: u128 = 2_000_000;

/// The function of the gcd whose moments are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// `1` when the gcd is 1, else `0`.
    Indicator,
    /// `gcd^q`.
    Moment(u32),
}

impl Statistic {
    pub fn eval(&self, g: u64) -> u128 {
        match *self {
            Statistic::Indicator => (g == 1) as u128,
            Statistic::Moment(q) => (g as u128).pow(q),
        }
    }
}

fn ratio(num: BigInt, n: u64, power: u32) -> BigRational {
    BigRational::new(num, num_traits::pow(BigInt::from(n), power as usize))
}

fn pow_u128(n: u64, e: u32) -> u128 {
    (n as u128).saturating_pow(e)
}

/// Calls `visit` with the running gcd of every tuple in `{1..n}^len`,
/// seeded with `start` (0 is the gcd identity).
fn walk(n: u64, len: u32, start: u64, visit: &mut dyn FnMut(u64)) {
    if len == 0 {
        visit(start);
        return;
    }
    for x in 1..=n {
        walk(n, len - 1, gcd(start, x), visit);
    }
}

/// Number of r-tuples with gcd exactly k, for k in `0..=n` (index 0 unused).
fn gcd_counts(n: u64, r: u32, start: u64) -> Vec<u128> {
    let mut counts = vec![0u128; n as usize + 1];
    walk(n, r, start, &mut |g| counts[g as usize] += 1);
    counts
}

/// `P(gcd(X_1..X_r) = k)` for k = 1..=n.
pub fn gcd_pmf(n: u64, r: u32) -> Vec<BigRational> {
    gcd_counts(n, r, 0)[1..]
        .iter()
        .map(|&c| ratio(BigInt::from(c), n, r))
        .collect()
}

/// `E F(gcd(X_1..X_r))`.
pub fn expectation(n: u64, r: u32, stat: Statistic) -> BigRational {
    let mut acc = BigInt::zero();
    walk(n, r, 0, &mut |g| acc += BigInt::from(stat.eval(g)));
    ratio(acc, n, r)
}

/// `E F(gcd(k, X_1..X_r))` for a fixed k.
pub fn marginal(n: u64, r: u32, k: u64, stat: Statistic) -> BigRational {
    let mut acc = BigInt::zero();
    walk(n, r, k, &mut |g| acc += BigInt::from(stat.eval(g)));
    ratio(acc, n, r)
}

/// Population variance of `k -> marginal(n, r, k)` over k uniform in 1..=n.
pub fn marginal_variance(n: u64, r: u32, stat: Statistic) -> BigRational {
    let values: Vec<BigRational> = (1..=n).map(|k| marginal(n, r, k, stat)).collect();
    let len = BigRational::from_integer(BigInt::from(n));
    let mean = values.iter().fold(BigRational::zero(), |a, v| a + v) / &len;
    let second = values.iter().fold(BigRational::zero(), |a, v| a + v * v) / &len;
    second - &mean * &mean
}

/// `E[F(gcd(A)) F(gcd(B))]` for two r-tuples of independent uniforms
/// sharing exactly s coordinates.
pub fn shared_product_moment(n: u64, r: u32, s: u32, stat: Statistic) -> BigRational {
    assert!(s <= r, "s must not exceed r");
    if pow_u128(n, 2 * r - s) <= FULL_ENUMERATION_LIMIT {
        shared_product_moment_full(n, r, s, stat)
    } else {
        shared_product_moment_split(n, r, s, stat)
    }
}

/// Walks all `n^(2r-s)` tuples.
pub fn shared_product_moment_full(n: u64, r: u32, s: u32, stat: Statistic) -> BigRational {
    let fresh = r - s;
    let mut acc: u128 = 0;
    walk(n, s, 0, &mut |shared| {
        walk(n, fresh, shared, &mut |ga| {
            let fa = stat.eval(ga);
            if fa == 0 {
                return;
            }
            walk(n, fresh, shared, &mut |gb| acc += fa * stat.eval(gb));
        });
    });
    ratio(BigInt::from(acc), n, 2 * r - s)
}

/// Walks every shared block and, given it, the two fresh blocks
/// separately (they are conditionally independent): `n^s * n^(r-s)` work.
pub fn shared_product_moment_split(n: u64, r: u32, s: u32, stat: Statistic) -> BigRational {
    let fresh = r - s;
    let mut acc = BigInt::zero();
    walk(n, s, 0, &mut |shared| {
        let mut inner: u128 = 0;
        walk(n, fresh, shared, &mut |g| inner += stat.eval(g));
        let inner = BigInt::from(inner);
        acc += &inner * &inner;
    });
    ratio(acc, n, 2 * r - s)
}

/// Covariance of the statistic on two r-tuples sharing s coordinates.
pub fn shared_covariance(n: u64, r: u32, s: u32, stat: Statistic) -> BigRational {
    let mean = expectation(n, r, stat);
    shared_product_moment(n, r, s, stat) - &mean * &mean
}

/// Value of `Σ_{r-subsets I} F(gcd(x_I))` for an explicit sample.
pub fn subset_sum(sample: &[u64], r: u32, stat: Statistic) -> u128 {
    fn go(sample: &[u64], from: usize, left: u32, g: u64, stat: Statistic) -> u128 {
        if left == 0 {
            return stat.eval(g);
        }
        let mut acc = 0;
        for i in from..=sample.len() - left as usize {
            acc += go(sample, i + 1, left - 1, gcd(g, sample[i]), stat);
        }
        acc
    }
    if sample.len() < r as usize {
        return 0;
    }
    go(sample, 0, r, 0, stat)
}

/// Variance of `Σ_{r-subsets} F(gcd)` over samples of length m.
///
/// Small sample spaces are walked in full; larger ones combine oracle
/// covariances with the overlap counts of pairs of r-subsets.
pub fn sample_variance(n: u64, m: u64, r: u32, stat: Statistic) -> BigRational {
    if pow_u128(n, m as u32) <= FULL_ENUMERATION_LIMIT && m <= 24 {
        sample_variance_full(n, m, r, stat)
    } else {
        (0..=r).fold(BigRational::zero(), |acc, s| {
            let (ru, su) = (r as u64, s as u64);
            let count = binomial(m, su).unwrap()
                * binomial(m - su, ru - su).unwrap()
                * binomial(m.saturating_sub(ru), ru - su).unwrap();
            acc + BigRational::from_integer(BigInt::from(count)) * shared_covariance(n, r, s, stat)
        })
    }
}

/// Walks every sample in `{1..n}^m`.
pub fn sample_variance_full(n: u64, m: u64, r: u32, stat: Statistic) -> BigRational {
    let mut sample = vec![1u64; m as usize];
    let mut s1 = BigInt::zero();
    let mut s2 = BigInt::zero();
    loop {
        let v = BigInt::from(subset_sum(&sample, r, stat));
        s2 += &v * &v;
        s1 += v;
        // odometer increment
        let mut i = 0;
        while i < sample.len() && sample[i] == n {
            sample[i] = 1;
            i += 1;
        }
        if i == sample.len() {
            break;
        }
        sample[i] += 1;
    }
    let total = num_traits::pow(BigInt::from(n), m as usize);
    let mean = BigRational::new(s1, total.clone());
    BigRational::new(s2, total) - &mean * &mean
}

/// Mean of `Σ_{r-subsets} F(gcd)` over samples of length m.
pub fn sample_mean(n: u64, m: u64, r: u32, stat: Statistic) -> BigRational {
    BigRational::from_integer(BigInt::from(binomial(m, r as u64).unwrap())) * expectation(n, r, stat)
}

/// `E[gcd(X_1, X_2..X_r)^q gcd(X_1, X_{r+1}..X_{2r-1})^q]`.
pub fn mixed_moment_pi(n: u64, r: u32, q: u32) -> BigRational {
    shared_product_moment(n, r, 1, Statistic::Moment(q))
}

/// `P(gcd(X_1, X_2) > threshold)`.
pub fn gcd_tail(n: u64, threshold: u64) -> BigRational {
    let counts = gcd_counts(n, 2, 0);
    let above: u128 = counts.iter().skip(threshold as usize + 1).sum();
    ratio(BigInt::from(above), n, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn small_cases_by_hand() {
        assert_eq!(gcd_pmf(2, 2), vec![q(3, 4), q(1, 4)]);
        assert_eq!(expectation(2, 2, Statistic::Moment(1)), q(5, 4));
        assert_eq!(expectation(2, 2, Statistic::Moment(2)), q(7, 4));
        assert_eq!(marginal(10, 1, 6, Statistic::Indicator), q(3, 10));
        assert_eq!(marginal(10, 1, 6, Statistic::Moment(1)), q(23, 10));
        assert_eq!(shared_covariance(2, 2, 1, Statistic::Indicator), q(1, 16));
        assert_eq!(mixed_moment_pi(2, 2, 1), q(13, 8));
        assert_eq!(sample_variance(2, 3, 2, Statistic::Indicator), q(15, 16));
        assert_eq!(gcd_tail(2, 1), q(1, 4));
    }

    #[test]
    fn split_walk_matches_full_walk() {
        for n in 1..=6 {
            for r in 1..=3 {
                for s in 0..=r {
                    for stat in [Statistic::Indicator, Statistic::Moment(1), Statistic::Moment(2)] {
                        assert_eq!(
                            shared_product_moment_full(n, r, s, stat),
                            shared_product_moment_split(n, r, s, stat)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn composed_variance_matches_full_walk() {
        for (n, m, r) in [(2, 3, 2), (3, 4, 2), (4, 5, 3), (3, 6, 3)] {
            for stat in [Statistic::Indicator, Statistic::Moment(1)] {
                let full = sample_variance_full(n, m, r, stat);
                let composed = (0..=r).fold(BigRational::zero(), |acc, s| {
                    let (ru, su) = (r as u64, s as u64);
                    let c = binomial(m, su).unwrap()
                        * binomial(m - su, ru - su).unwrap()
                        * binomial(m - ru, ru - su).unwrap();
                    acc + BigRational::from_integer(BigInt::from(c)) * shared_covariance(n, r, s, stat)
                });
                assert_eq!(full, composed, "n={n} m={m} r={r}");
            }
        }
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sum(&[1, 2], 2, Statistic::Indicator), 1);
        assert_eq!(subset_sum(&[2, 4, 6], 2, Statistic::Moment(1)), 6);
        assert_eq!(subset_sum(&[2, 4, 6], 3, Statistic::Moment(1)), 2);
        assert_eq!(subset_sum(&[2], 2, Statistic::Moment(1)), 0);
    }
}
