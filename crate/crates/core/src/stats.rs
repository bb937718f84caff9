//! Distribution comparison: Kolmogorov-Smirnov distances, Laplace transforms,
//! confidence intervals and a chi-square goodness-of-fit helper.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{domain, Result};

/// A sorted, non-empty sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("empirical distribution needs at least one sample");
        }
        if samples.iter().any(|x| x.is_nan()) {
            return domain("samples contain NaN");
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Lower empirical quantile (type 1).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.samples[k - 1]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// The nine deciles.
    pub fn deciles(&self) -> [f64; 9] {
        std::array::from_fn(|i| self.quantile((i + 1) as f64 / 10.0))
    }
}

/// Two-sample KS distance `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// One-sample KS distance `sup |F_a - F|` against an analytic CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &EmpiricalDistribution, cdf: F) -> f64 {
    let xs = a.samples();
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let below = i as f64 / n;
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        let f = cdf(v);
        d = d.max((f - below).abs()).max((i as f64 / n - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail `P{K > x} = 2 sum (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// The level-`level` critical value `c` of the Kolmogorov distribution.
pub fn kolmogorov_coefficient(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("level must lie in (0,1), got {level}"));
    }
    let (mut lo, mut hi) = (0.2f64, 5.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sample size of the comparison law in a KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Analytic,
    Sample(usize),
}

/// Asymptotic KS critical value for samples of size `n` (and `m`).
pub fn ks_threshold(n: usize, reference: Reference, level: f64) -> Result<f64> {
    let c = kolmogorov_coefficient(level)?;
    let n = n as f64;
    Ok(match reference {
        Reference::Analytic => c / n.sqrt(),
        Reference::Sample(m) => {
            let m = m as f64;
            c * ((n + m) / (n * m)).sqrt()
        }
    })
}

/// Mean and standard error of `exp(-lambda X)`.
pub fn empirical_laplace(a: &EmpiricalDistribution, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) {
        return domain(format!("lambda must be >= 0, got {lambda}"));
    }
    Ok(mean_and_se(a.samples().iter().map(|&x| (-lambda * x).exp())))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se<I: IntoIterator<Item = f64>>(values: I) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for v in values {
        n += 1;
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    if n < 2 {
        return (mean, 0.0);
    }
    (mean, (m2 / (n - 1) as f64 / n as f64).sqrt())
}

/// Two-sided standard normal quantile for a confidence level, e.g. 1.96 at 0.95.
pub fn normal_quantile(confidence: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).expect("standard normal");
    z.inverse_cdf(0.5 + confidence / 2.0)
}

/// Normal-approximation interval for a binomial proportion, clipped to [0,1].
pub fn binomial_ci(successes: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return domain("binomial interval needs n >= 1");
    }
    if successes > n {
        return domain(format!("successes {successes} exceed n {n}"));
    }
    let p = successes as f64 / n as f64;
    let half = normal_quantile(confidence) * (p * (1.0 - p) / n as f64).sqrt();
    Ok(((p - half).max(0.0), (p + half).min(1.0)))
}

/// Percentile bootstrap interval for `statistic`.
pub fn bootstrap_ci<R, F>(
    samples: &[f64],
    statistic: F,
    confidence: f64,
    reps: usize,
    rng: &mut R,
) -> Result<(f64, f64)>
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    if samples.is_empty() || reps == 0 {
        return domain("bootstrap needs samples and at least one replicate");
    }
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[rng.random_range(0..n)];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0;
    let pick = |q: f64| stats[((q * reps as f64).floor() as usize).min(reps - 1)];
    Ok((pick(tail), pick(1.0 - tail)))
}

/// Whether two intervals intersect.
pub fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Chi-square goodness of fit with no estimated parameters.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return domain("chi-square needs matching bins, at least two");
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = observed.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| crate::Error::Numeric(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn ed(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ks_examples() {
        let a = ed(&[0.3, 1.0, 2.5, 7.0]);
        assert_eq!(ks_two_sample(&a, &a.clone()), 0.0);
        let b = ed(&[10.0, 11.0]);
        assert_eq!(ks_two_sample(&a, &b), 1.0);
        let u = ed(&[1.0, 2.0, 3.0, 4.0]);
        let d = ks_one_sample(&u, |x| (x / 4.0).clamp(0.0, 1.0));
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ks_handles_ties() {
        let a = ed(&[1.0, 1.0, 2.0, 2.0]);
        let b = ed(&[1.0, 2.0]);
        assert_eq!(ks_two_sample(&a, &b), 0.0);
        // the jump of F_a at a tied value is compared on both sides
        let d = ks_one_sample(&a, |x| (x / 2.0).clamp(0.0, 1.0));
        assert_eq!(d, 0.5);
    }

    #[test]
    fn kolmogorov_coefficients_match_leading_term() {
        // leading term of the series: c = sqrt(-ln(level/2)/2)
        for level in [0.05, 0.01] {
            let leading = (-(level / 2.0f64).ln() / 2.0).sqrt();
            assert!((kolmogorov_coefficient(level).unwrap() - leading).abs() < 1e-5);
        }
        let t = ks_threshold(10_000, Reference::Analytic, 0.05).unwrap();
        assert!((t - 0.01358).abs() < 1e-5);
        let big = ks_threshold(usize::MAX / 4, Reference::Analytic, 0.05).unwrap();
        assert!(big < 1e-8);
        let c = kolmogorov_coefficient(0.01).unwrap();
        let two = ks_threshold(500, Reference::Sample(500), 0.01).unwrap();
        assert!((two - c * (2.0f64 / 500.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn laplace_examples() {
        let a = ed(&[0.5, 2.0, 3.0]);
        assert_eq!(empirical_laplace(&a, 0.0).unwrap(), (1.0, 0.0));
        let single = ed(&[1.7]);
        let (m, se) = empirical_laplace(&single, 2.0).unwrap();
        assert!((m - (-3.4f64).exp()).abs() < 1e-15 && se == 0.0);
        let mut rng = substream(1, Purpose::Limit, 0);
        let exps: Vec<f64> = (0..100_000).map(|_| rng.sample(rand_distr::Exp1)).collect();
        let (m, se) = empirical_laplace(&ed(&exps), 1.0).unwrap();
        assert!((m - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn binomial_edges() {
        let (lo, _) = binomial_ci(0, 50, 0.95).unwrap();
        assert!(lo <= 0.0);
        let (_, hi) = binomial_ci(50, 50, 0.95).unwrap();
        assert!(hi >= 1.0);
        assert!(binomial_ci(0, 0, 0.95).is_err());
    }

    #[test]
    fn binomial_coverage_calibration() {
        let mut rng = substream(2, Purpose::Limit, 0);
        let mut covered = 0;
        for _ in 0..1000 {
            let k = (0..10_000).filter(|_| rng.random::<f64>() < 0.3).count() as u64;
            let (lo, hi) = binomial_ci(k, 10_000, 0.95).unwrap();
            if lo <= 0.3 && 0.3 <= hi {
                covered += 1;
            }
        }
        // sd of the coverage fraction is about 0.007
        assert!((925..=975).contains(&covered), "coverage {covered}/1000");
    }

    #[test]
    fn bootstrap_brackets_mean() {
        let mut rng = substream(3, Purpose::Resample, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.sample(rand_distr::Exp1)).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (lo, hi) = bootstrap_ci(&xs, mean, 0.95, 500, &mut rng).unwrap();
        let m = mean(&xs);
        assert!(lo < m && m < hi);
        assert!(hi - lo < 0.2);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let r = chi_square_gof(&[10, 20, 30], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let a = ed(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(a.median(), 3.0);
        assert_eq!(a.quantile(0.0), 1.0);
        assert_eq!(a.quantile(1.0), 5.0);
        assert_eq!(a.cdf(3.0), 0.6);
    }
}
