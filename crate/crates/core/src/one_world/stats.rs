//! Sampling from grid densities and goodness-of-fit statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Density that is linear between equally spaced nodes `x0 + i h`.
#[derive(Clone, Debug)]
pub struct PiecewiseLinearDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseLinearDensity {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0].max(0.0) + w[1].max(0.0));
            cumulative.push(acc);
        }
        Self { x0, h, values, cumulative }
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn cell_integral(&self, i: usize, s: f64) -> f64 {
        let (a, b) = (self.values[i].max(0.0), self.values[i + 1].max(0.0));
        a * s + 0.5 * (b - a) / self.h * s * s
    }

    /// Normalized cumulative distribution.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = (x - self.x0) / self.h;
        if s <= 0.0 {
            return 0.0;
        }
        if s >= (n - 1) as f64 {
            return 1.0;
        }
        let i = s.floor() as usize;
        (self.cumulative[i] + self.cell_integral(i, (s - i as f64) * self.h)) / self.total()
    }

    /// Inverse CDF at `u` in [0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        let target = u * self.total();
        let i = match self.cumulative.partition_point(|&c| c <= target) {
            0 => 0,
            k => (k - 1).min(self.values.len() - 2),
        };
        let r = target - self.cumulative[i];
        let (a, b) = (self.values[i].max(0.0), self.values[i + 1].max(0.0));
        let c = 0.5 * (b - a) / self.h;
        let disc = (a * a + 4.0 * c * r).max(0.0).sqrt();
        let s = if a + disc > 0.0 { 2.0 * r / (a + disc) } else { 0.0 };
        self.x0 + i as f64 * self.h + s.clamp(0.0, self.h)
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square of observed counts against expected probabilities.
/// Bins with expected count below `min_expected` are pooled into their
/// neighbour. Returns (statistic, degrees of freedom, p-value).
pub fn chi_square_test(counts: &[u64], probabilities: &[f64], min_expected: f64) -> (f64, usize, f64) {
    let n: u64 = counts.iter().sum();
    let total_p: f64 = probabilities.iter().sum();
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probabilities) {
        o += c as f64;
        e += n as f64 * p / total_p;
        if e >= min_expected {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    let stat: f64 = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len().saturating_sub(1).max(1);
    let p = 1.0 - ChiSquared::new(dof as f64).map(|d| d.cdf(stat)).unwrap_or(0.0);
    (stat, dof, p)
}

/// Mean and standard error.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_inverts_cdf() {
        let vals: Vec<f64> = (0..50).map(|i| (-(i as f64 - 25.0).powi(2) / 40.0).exp()).collect();
        let d = PiecewiseLinearDensity::new(-2.0, 0.1, vals);
        for k in 1..100 {
            let u = k as f64 / 100.0;
            assert!((d.cdf(d.sample(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_of_perfect_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_p_value(d, n) > 0.99);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
    }

    #[test]
    fn chi_square_detects_mismatch() {
        let counts = vec![100, 100, 100, 100];
        let (_, dof, p) = chi_square_test(&counts, &[0.25; 4], 5.0);
        assert_eq!(dof, 3);
        assert!(p > 0.99);
        let (_, _, p) = chi_square_test(&counts, &[0.4, 0.1, 0.1, 0.4], 5.0);
        assert!(p < 1e-6);
    }
}
