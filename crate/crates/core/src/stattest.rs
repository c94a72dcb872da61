//! Reference laws and goodness-of-fit distances.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Limit laws the simulations are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceLaw {
    StandardNormal,
    /// Shape 1: `F(t) = exp(-scale / t)` for `t > 0`.
    Frechet { scale: f64 },
    Poisson { lambda: f64 },
}

impl ReferenceLaw {
    pub fn frechet(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("Fréchet scale must be positive, got {scale}")));
        }
        Ok(Self::Frechet { scale })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("Poisson rate must be positive, got {lambda}")));
        }
        Ok(Self::Poisson { lambda })
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, ReferenceLaw::Poisson { .. })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        match *self {
            ReferenceLaw::StandardNormal => 0.5 * erfc(-t / std::f64::consts::SQRT_2),
            ReferenceLaw::Frechet { scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    (-scale / t).exp()
                }
            }
            ReferenceLaw::Poisson { lambda } => {
                if t < 0.0 {
                    0.0
                } else if t.is_infinite() {
                    1.0
                } else {
                    poisson_cdf(lambda, t.floor() as u64)
                }
            }
        }
    }
}

/// `P(X = k)` for `k = 0..=cap`, by the ratio recursion.
pub fn poisson_pmf(lambda: f64, cap: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(cap as usize + 1);
    let mut p = (-lambda).exp();
    for k in 0..=cap {
        out.push(p);
        p *= lambda / (k + 1) as f64;
    }
    out
}

fn poisson_cdf(lambda: f64, k: u64) -> f64 {
    let mut p = (-lambda).exp();
    let mut acc = 0.0;
    for j in 0..=k {
        acc += p;
        if j as f64 > lambda && p < 1e-18 * acc {
            break;
        }
        p *= lambda / (j + 1) as f64;
    }
    acc.min(1.0)
}

/// How replicate values were normalized before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalizationInfo {
    /// `(x - mean) / sd` with exact moments.
    ExactMoments { mean: f64, sd: f64 },
    /// `x / scale`.
    FrechetScale { scale: f64 },
    None,
}

/// Replicate outcomes ready for a distance computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmpiricalDistribution {
    Continuous {
        values: Vec<f64>,
        normalization: NormalizationInfo,
    },
    Counts {
        counts: BTreeMap<u64, u64>,
        size: u64,
    },
}

impl EmpiricalDistribution {
    /// Sorts the values; NaNs are rejected.
    pub fn continuous(mut values: Vec<f64>, normalization: NormalizationInfo) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN in empirical values".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self::Continuous {
            values,
            normalization,
        })
    }

    pub fn counts(samples: impl IntoIterator<Item = u64>) -> Self {
        let mut counts = BTreeMap::new();
        let mut size = 0;
        for s in samples {
            *counts.entry(s).or_insert(0) += 1;
            size += 1;
        }
        Self::Counts { counts, size }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Continuous { values, .. } => values.len(),
            Self::Counts { size, .. } => *size as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Continuous { values, .. } => values.iter().sum::<f64>() / values.len() as f64,
            Self::Counts { counts, size } => {
                counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / *size as f64
            }
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let n = self.len() as f64;
        let ss = match self {
            Self::Continuous { values, .. } => values.iter().map(|v| (v - mean).powi(2)).sum::<f64>(),
            Self::Counts { counts, .. } => counts
                .iter()
                .map(|(&k, &c)| c as f64 * (k as f64 - mean).powi(2))
                .sum::<f64>(),
        };
        ss / (n - 1.0)
    }
}

/// Kolmogorov–Smirnov sup-distance between a continuous sample and a
/// continuous reference law. Tied values are handled as one jump.
pub fn ks_distance(emp: &EmpiricalDistribution, law: &ReferenceLaw) -> Result<f64> {
    let EmpiricalDistribution::Continuous { values, .. } = emp else {
        return Err(Error::Domain("KS needs a continuous empirical distribution".into()));
    };
    if values.is_empty() {
        return Err(Error::Domain("empty empirical distribution".into()));
    }
    if !law.is_continuous() {
        return Err(Error::Domain("KS needs a continuous reference law".into()));
    }
    let r = values.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < values.len() {
        let x = values[i];
        let mut j = i;
        while j < values.len() && values[j] == x {
            j += 1;
        }
        let f = law.cdf(x);
        d = d.max(f - i as f64 / r).max(j as f64 / r - f);
        i = j;
    }
    Ok(d)
}

/// Total variation between integer counts and Poisson(λ):
/// `½ [Σ_{k<=K} |p̂_k - p_k| + P(Pois > K)]` with `K = max(cap, largest
/// observed value)`, so the reference tail is always included.
pub fn tv_distance(emp: &EmpiricalDistribution, lambda: f64, cap: u64) -> Result<f64> {
    let EmpiricalDistribution::Counts { counts, size } = emp else {
        return Err(Error::Domain("TV needs integer counts".into()));
    };
    if *size == 0 {
        return Err(Error::Domain("empty empirical distribution".into()));
    }
    ReferenceLaw::poisson(lambda)?;
    let top = counts.keys().next_back().copied().unwrap_or(0).max(cap);
    let pmf = poisson_pmf(lambda, top);
    let mut l1 = 0.0;
    let mut covered = 0.0;
    for (k, p) in pmf.iter().enumerate() {
        let phat = counts.get(&(k as u64)).copied().unwrap_or(0) as f64 / *size as f64;
        l1 += (phat - p).abs();
        covered += p;
    }
    let tail = (1.0 - covered).max(0.0);
    Ok(0.5 * (l1 + tail))
}

/// `sqrt(-ln(α/2) / 2) / sqrt(R)`: the asymptotic Kolmogorov quantile at
/// level α for R observations.
pub fn ks_critical_value(alpha: f64, r: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (r as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn normal_sample(r: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::standard();
        (0..r)
            .map(|_| n.inverse_cdf(rng.random_range(1e-300..1.0)))
            .collect()
    }

    fn poisson_sample(lambda: f64, r: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..r)
            .map(|_| {
                let u: f64 = rng.random();
                let mut k = 0u64;
                let mut p = (-lambda).exp();
                let mut acc = p;
                while acc < u {
                    k += 1;
                    p *= lambda / k as f64;
                    acc += p;
                }
                k
            })
            .collect()
    }

    #[test]
    fn cdf_examples() {
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        let f = ReferenceLaw::frechet(1.0 / z2).unwrap();
        assert!((f.cdf(1.0) - (-1.0 / z2).exp()).abs() < 1e-15);
        assert!((f.cdf(1.0) - 0.5445).abs() < 1e-4);
        assert_eq!(f.cdf(0.0), 0.0);
        assert_eq!(f.cdf(-3.0), 0.0);
        assert_eq!(ReferenceLaw::StandardNormal.cdf(0.0), 0.5);
        assert!((ReferenceLaw::StandardNormal.cdf(1.959963984540054) - 0.975).abs() < 1e-11);
        let p = ReferenceLaw::poisson(2.5).unwrap();
        assert_eq!(p.cdf(f64::INFINITY), 1.0);
        assert!((p.cdf(1e9) - 1.0).abs() < 1e-15);
        assert!((p.cdf(0.0) - (-2.5f64).exp()).abs() < 1e-16);
        assert!((p.cdf(1.7) - 3.5 * (-2.5f64).exp()).abs() < 1e-15);
        assert_eq!(p.cdf(-0.5), 0.0);
        assert!(ReferenceLaw::frechet(0.0).is_err());
        assert!(ReferenceLaw::poisson(-1.0).is_err());
    }

    #[test]
    fn cdf_monotone_on_grid() {
        for law in [
            ReferenceLaw::StandardNormal,
            ReferenceLaw::frechet(0.6).unwrap(),
            ReferenceLaw::poisson(0.6).unwrap(),
            ReferenceLaw::poisson(40.0).unwrap(),
        ] {
            let mut prev = 0.0;
            for i in -2000..=2000 {
                let c = law.cdf(i as f64 * 0.05);
                assert!((0.0..=1.0).contains(&c));
                assert!(c >= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn ks_self_test() {
        let r = 2000;
        let crit = ks_critical_value(0.01, r);
        assert!((crit - 0.0364).abs() < 1e-3);
        let emp = EmpiricalDistribution::continuous(normal_sample(r, 7), NormalizationInfo::None).unwrap();
        assert!(ks_distance(&emp, &ReferenceLaw::StandardNormal).unwrap() < crit);
    }

    #[test]
    fn ks_point_mass_at_median() {
        let emp = EmpiricalDistribution::continuous(vec![0.0; 50], NormalizationInfo::None).unwrap();
        assert_eq!(ks_distance(&emp, &ReferenceLaw::StandardNormal).unwrap(), 0.5);
        let f = ReferenceLaw::frechet(2.0).unwrap();
        let median = 2.0 / std::f64::consts::LN_2;
        let emp = EmpiricalDistribution::continuous(vec![median; 9], NormalizationInfo::None).unwrap();
        assert!((ks_distance(&emp, &f).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_rejects_bad_inputs() {
        let empty = EmpiricalDistribution::continuous(vec![], NormalizationInfo::None).unwrap();
        assert!(ks_distance(&empty, &ReferenceLaw::StandardNormal).is_err());
        let counts = EmpiricalDistribution::counts([1, 2]);
        assert!(ks_distance(&counts, &ReferenceLaw::StandardNormal).is_err());
        let emp = EmpiricalDistribution::continuous(vec![1.0], NormalizationInfo::None).unwrap();
        assert!(ks_distance(&emp, &ReferenceLaw::poisson(1.0).unwrap()).is_err());
        assert!(EmpiricalDistribution::continuous(vec![f64::NAN], NormalizationInfo::None).is_err());
    }

    #[test]
    fn tv_examples() {
        let emp = EmpiricalDistribution::counts(poisson_sample(1.0, 5000, 3));
        assert!(tv_distance(&emp, 1.0, 20).unwrap() < 0.03);
        // a point mass at 0 is at distance 1 - e^{-λ}
        let zeros = EmpiricalDistribution::counts(vec![0; 10]);
        assert!((tv_distance(&zeros, 1.0, 5).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        // values past the cap are still counted
        let far = EmpiricalDistribution::counts(vec![50; 4]);
        assert!((tv_distance(&far, 1.0, 5).unwrap() - 1.0).abs() < 1e-12);
        assert!(tv_distance(&EmpiricalDistribution::counts(vec![]), 1.0, 5).is_err());
        assert!(tv_distance(&zeros, 0.0, 5).is_err());
    }

    #[test]
    fn moments_of_empirical() {
        let c = EmpiricalDistribution::counts([0, 1, 1, 2]);
        assert_eq!(c.mean(), 1.0);
        assert!((c.variance() - 2.0 / 3.0).abs() < 1e-15);
        let v = EmpiricalDistribution::continuous(vec![3.0, 1.0, 2.0], NormalizationInfo::None).unwrap();
        assert_eq!(v.mean(), 2.0);
        assert_eq!(v.variance(), 1.0);
        if let EmpiricalDistribution::Continuous { values, .. } = v {
            assert_eq!(values, vec![1.0, 2.0, 3.0]);
        }
    }

    proptest! {
        #[test]
        fn ks_invariant_under_increasing_maps(seed in 0u64..1000, a in 0.1f64..10.0) {
            let xs = normal_sample(300, seed);
            let base = EmpiricalDistribution::continuous(xs.clone(), NormalizationInfo::None).unwrap();
            let d0 = ks_distance(&base, &ReferenceLaw::StandardNormal).unwrap();
            // map through the Fréchet quantile of Φ, then rescale both sides
            let law = ReferenceLaw::frechet(1.3).unwrap();
            let fr: Vec<f64> = xs.iter().map(|x| 1.3 / -ReferenceLaw::StandardNormal.cdf(*x).ln()).collect();
            let e1 = EmpiricalDistribution::continuous(fr.clone(), NormalizationInfo::None).unwrap();
            let d1 = ks_distance(&e1, &law).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-9);
            let scaled = ReferenceLaw::frechet(1.3 * a).unwrap();
            let e2 = EmpiricalDistribution::continuous(fr.iter().map(|y| a * y).collect(), NormalizationInfo::None).unwrap();
            prop_assert!((ks_distance(&e2, &scaled).unwrap() - d1).abs() < 1e-9);
        }
    }
}
