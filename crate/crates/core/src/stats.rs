//! Summary statistics and goodness-of-fit tests used by the experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bessel::Neumaier;
use crate::error::{Error, Result};

/// `Φ(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Moments of a sample plus optional test statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_statistic: Option<f64>,
    pub chi2_statistic: Option<f64>,
    pub chi2_p: Option<f64>,
    pub count: usize,
}

impl StatSummary {
    /// Sample mean, unbiased variance and the plain moment ratios for
    /// skewness and excess kurtosis.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InsufficientData { need: 2, got: xs.len() });
        }
        let n = xs.len() as f64;
        let mean = xs.iter().copied().sum::<Neumaier>().value() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2n, m3n, m4n) = (m2 / n, m3 / n, m4 / n);
        let (skewness, excess_kurtosis) = if m2n > 0.0 {
            (m3n / m2n.powf(1.5), m4n / (m2n * m2n) - 3.0)
        } else {
            (0.0, 0.0)
        };
        Ok(Self {
            mean,
            variance: m2 / (n - 1.0),
            skewness,
            excess_kurtosis,
            ks_statistic: None,
            chi2_statistic: None,
            chi2_p: None,
            count: xs.len(),
        })
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Approximate standard error of the sample variance,
    /// `s² √(2/(n−1) + κ/n)` with `κ` the excess kurtosis.
    pub fn variance_se(&self) -> f64 {
        let n = self.count as f64;
        self.variance * (2.0 / (n - 1.0) + self.excess_kurtosis / n).max(0.0).sqrt()
    }
}

/// `sup_x |F_n(x) − F(x)|` for a right-continuous `cdf`.
///
/// Both the value at each order statistic and the left limit just below it
/// are compared, so a `cdf` with a jump at a sample point is handled exactly.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((cdf(x.next_down()) - below).abs()).max((cdf(x) - at).abs());
        i = j;
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail `P{K > λ}`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            need: 1,
            got: a.len().min(b.len()),
        });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let p = kolmogorov_sf((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d);
    Ok((d, p))
}

/// Result of a Pearson χ² test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
    pub cells: usize,
}

/// Upper tail of the χ² distribution with `df` degrees of freedom.
pub fn chi2_sf(statistic: f64, df: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map_or(f64::NAN, |d| d.sf(statistic))
}

/// Groups consecutive cells until each group's expected count reaches 5; a
/// short remainder joins the last group.
fn pool_cells(expected: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &e) in expected.iter().enumerate() {
        acc += e;
        if acc >= 5.0 {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < expected.len() {
        match groups.last_mut() {
            Some(last) => last.end = expected.len(),
            None => groups.push(start..expected.len()),
        }
    }
    groups
}

/// Pearson goodness of fit of `observed` counts against cell probabilities,
/// with cells pooled to an expected count of at least 5 and
/// `cells − 1 − fitted_params` degrees of freedom.
pub fn chi2_gof(observed: &[u64], probabilities: &[f64], fitted_params: usize) -> Result<Chi2Result> {
    if observed.len() != probabilities.len() {
        return Err(Error::Domain(format!(
            "{} observed cells but {} probabilities",
            observed.len(),
            probabilities.len()
        )));
    }
    let total_p: f64 = probabilities.iter().copied().sum::<Neumaier>().value();
    if (total_p - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("probabilities sum to {total_p}, not 1")));
    }
    let n: u64 = observed.iter().sum();
    let expected: Vec<f64> = probabilities.iter().map(|p| p * n as f64).collect();
    let groups = pool_cells(&expected);
    if groups.len() < 2 + fitted_params {
        return Err(Error::InsufficientData {
            need: 2 + fitted_params,
            got: groups.len(),
        });
    }
    let mut stat = 0.0;
    for g in &groups {
        let o: u64 = observed[g.clone()].iter().sum();
        let e: f64 = expected[g.clone()].iter().sum();
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let df = groups.len() - 1 - fitted_params;
    Ok(Chi2Result {
        statistic: stat,
        p_value: chi2_sf(stat, df),
        df,
        cells: groups.len(),
    })
}

/// χ² test of homogeneity for two count vectors over the same cells, with
/// cells pooled so that each pooled cell has at least 10 combined draws.
pub fn chi2_two_sample(a: &[u64], b: &[u64]) -> Result<Chi2Result> {
    if a.len() != b.len() {
        return Err(Error::Domain("two-sample χ² needs equal cell counts".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    let combined: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64 / 2.0).collect();
    let groups = pool_cells(&combined);
    if groups.len() < 2 {
        return Err(Error::InsufficientData {
            need: 2,
            got: groups.len(),
        });
    }
    let mut stat = 0.0;
    for g in &groups {
        let oa: u64 = a[g.clone()].iter().sum();
        let ob: u64 = b[g.clone()].iter().sum();
        let pooled = (oa + ob) as f64 / (na + nb);
        let (ea, eb) = (pooled * na, pooled * nb);
        stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
    }
    let df = groups.len() - 1;
    Ok(Chi2Result {
        statistic: stat,
        p_value: chi2_sf(stat, df),
        df,
        cells: groups.len(),
    })
}

/// Outcome of the lattice-aware normality test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeNormality {
    pub chi2: Chi2Result,
    pub mean: f64,
    pub sd: f64,
    /// `(lattice index, count)` for every occupied cell, ascending.
    pub cell_counts: Vec<(i64, u64)>,
}

/// Tests whether values living on `offset + spacing·ℤ` are a discretized
/// normal sample.
///
/// Each lattice point `c` gets the mass `Φ((c+½−m̂)/ŝ) − Φ((c−½−m̂)/ŝ)` in
/// lattice units, with the two extreme cells absorbing the tails. Mean and
/// standard deviation are fitted, so two extra degrees of freedom are spent.
pub fn lattice_normality(values: &[f64], offset: f64, spacing: f64) -> Result<LatticeNormality> {
    if !(spacing > 0.0) {
        return Err(Error::Domain(format!(
            "lattice spacing must be positive, got {spacing}"
        )));
    }
    if values.len() < 10 {
        return Err(Error::InsufficientData {
            need: 10,
            got: values.len(),
        });
    }
    let idx: Vec<i64> = values
        .iter()
        .map(|&v| ((v - offset) / spacing).round() as i64)
        .collect();
    for (&v, &c) in values.iter().zip(&idx) {
        let r = (v - offset) / spacing - c as f64;
        if r.abs() > 1e-6 {
            return Err(Error::Domain(format!("value {v} is not on the lattice")));
        }
    }
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = idx.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::Domain("lattice sample has zero spread".into()));
    }
    let lo = *idx.iter().min().unwrap();
    let hi = *idx.iter().max().unwrap();
    let mut observed = vec![0u64; (hi - lo + 1) as usize];
    for &c in &idx {
        observed[(c - lo) as usize] += 1;
    }
    let probs: Vec<f64> = (lo..=hi)
        .map(|c| {
            let upper = if c == hi {
                1.0
            } else {
                normal_cdf((c as f64 + 0.5 - mean) / sd)
            };
            let lower = if c == lo {
                0.0
            } else {
                normal_cdf((c as f64 - 0.5 - mean) / sd)
            };
            upper - lower
        })
        .collect();
    let chi2 = chi2_gof(&observed, &probs, 2)?;
    let cell_counts = (lo..=hi).zip(observed).filter(|&(_, o)| o > 0).collect();
    Ok(LatticeNormality {
        chi2,
        mean: offset + spacing * mean,
        sd: spacing * sd,
        cell_counts,
    })
}

/// A covariance estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Unbiased sample covariance and its leave-one-out jackknife standard error.
pub fn empirical_cov(pairs: &[(f64, f64)]) -> Result<CovEstimate> {
    let len = pairs.len();
    if len < 10 {
        return Err(Error::InsufficientData { need: 10, got: len });
    }
    let n = len as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    // centred sums; dropping pair i gives the covariance in closed form
    let centred: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (x - mx, y - my)).collect();
    let sxy: f64 = centred.iter().map(|&(x, y)| x * y).sum();
    let estimate = sxy / (n - 1.0);
    let loo: Vec<f64> = centred
        .iter()
        .map(|&(x, y)| (sxy - x * y - x * y / (n - 1.0)) / (n - 2.0))
        .collect();
    let mean_loo = loo.iter().sum::<f64>() / n;
    let ss: f64 = loo.iter().map(|c| (c - mean_loo).powi(2)).sum();
    Ok(CovEstimate {
        estimate,
        std_error: ((n - 1.0) / n * ss).sqrt(),
        count: len,
    })
}

/// Pearson correlation coefficient.
pub fn correlation(pairs: &[(f64, f64)]) -> Result<f64> {
    let c = empirical_cov(pairs)?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (sx, sy) = (StatSummary::from_samples(&xs)?, StatSummary::from_samples(&ys)?);
    Ok(c.estimate / (sx.variance * sy.variance).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        for z in [0.1, 0.7, 1.5, 3.0, 6.0] {
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() <= 1e-12);
        }
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn normal_cdf_matches_density_quadrature() {
        let (v, _) = crate::quadrature::integrate_adaptive(0.0, 1.959964, 1e-14, |x| {
            (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
        });
        let d = (0.5 + v - normal_cdf(1.959964)).abs();
        assert!(d < 1e-13, "{d:e}");
    }

    #[test]
    fn ks_examples() {
        let step = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        assert_eq!(ks_statistic(&[0.0], step).unwrap(), 0.0);
        let d = ks_statistic(&[-1.0, 1.0], normal_cdf).unwrap();
        let (a, b) = (normal_cdf(-1.0), normal_cdf(1.0));
        let want = a.max((a - 0.5).abs()).max((b - 0.5).abs()).max(1.0 - b);
        assert!((d - want).abs() < 1e-15);
        assert!(ks_statistic(&[], normal_cdf).is_err());
    }

    #[test]
    fn ks_two_sample_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 250.0).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(p < 1e-20);
    }

    #[test]
    fn chi2_examples() {
        let r = chi2_gof(&[25, 50, 25], &[0.25, 0.5, 0.25], 0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = chi2_gof(&[60, 40], &[0.5, 0.5], 0).unwrap();
        assert!((r.statistic - 4.0).abs() < 1e-12);
        assert_eq!(r.df, 1);
        assert!((r.p_value - 0.045_500_263_896_358_41).abs() < 1e-10);
        assert!(chi2_gof(&[10], &[1.0], 0).is_err());
        assert!(chi2_gof(&[1, 2], &[0.5, 0.6], 0).is_err());
    }

    #[test]
    fn pooling_merges_small_cells() {
        let g = pool_cells(&[1.0, 2.0, 3.0, 10.0, 0.5]);
        assert_eq!(g, vec![0..3, 3..5]);
    }

    #[test]
    fn chi2_sf_known_value() {
        // P{χ²_2 > x} = e^{-x/2}
        assert!((chi2_sf(3.0, 2) - (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_identical_coordinates_is_variance() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 7919) % 31) as f64 * 0.1).collect();
        let pairs: Vec<(f64, f64)> = xs.iter().map(|&x| (x, x)).collect();
        let c = empirical_cov(&pairs).unwrap();
        let s = StatSummary::from_samples(&xs).unwrap();
        assert!((c.estimate - s.variance).abs() < 1e-12);
        assert!(empirical_cov(&pairs[..9]).is_err());
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let pairs: Vec<(f64, f64)> = (0..25)
            .map(|i| {
                let x = ((i * 37) % 11) as f64;
                (x, 0.3 * x + ((i * 13) % 7) as f64)
            })
            .collect();
        let c = empirical_cov(&pairs).unwrap();
        let n = pairs.len() as f64;
        let loo: Vec<f64> = (0..pairs.len())
            .map(|i| {
                let rest: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, p)| *p)
                    .collect();
                let m = rest.len() as f64;
                let mx = rest.iter().map(|p| p.0).sum::<f64>() / m;
                let my = rest.iter().map(|p| p.1).sum::<f64>() / m;
                rest.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / (m - 1.0)
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n;
        let se = ((n - 1.0) / n * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
        assert!((c.std_error - se).abs() < 1e-12);
    }

    #[test]
    fn summary_moments() {
        let s = StatSummary::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(s.skewness.abs() < 1e-15);
        assert!((s.excess_kurtosis - (-1.36)).abs() < 1e-12);
        assert!(StatSummary::from_samples(&[1.0]).is_err());
    }

    #[test]
    fn lattice_normality_accepts_rounded_normal_quantiles() {
        // deterministic "sample": rounded normal quantiles on a shifted lattice
        let n = 4000;
        let offset = 0.37;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                let z = statrs::distribution::Normal::standard().inverse_cdf(u);
                offset + (1.3 * z).round()
            })
            .collect();
        let r = lattice_normality(&values, offset, 1.0).unwrap();
        assert!(r.chi2.p_value > 0.5, "{:?}", r.chi2);
        assert_eq!(r.chi2.df, r.chi2.cells - 3);
        assert!(lattice_normality(&[0.5; 20], 0.0, 1.0).is_err());
    }
}
