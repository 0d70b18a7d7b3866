//! Integer-order Bessel functions and the discrete Bessel kernel.
//!
//! `J(x, y; t) = √t (J_x J_{y+1} − J_{x+1} J_y)/(x − y)` with all `J_m`
//! evaluated at `2√t`, and on the diagonal `J(x, x) = Σ_{s≥1} J_{x+s}²`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluctuation::interval_start;
use crate::limit_shape::theta_of_x;

/// Largest start order the backward recurrence may use.
pub const MAX_ORDER: usize = 50_000_000;

const RESCALE_AT: f64 = 1e250;

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for Neumaier {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `J_m(2√t)` for `m = 0..=M₀`, with negative orders by reflection.
#[derive(Debug, Clone)]
pub struct BesselTable {
    t: f64,
    z: f64,
    max_order: usize,
    values: Vec<f64>,
    // suffix[m] = Σ_{j ≥ m} J_j², summed from the small end
    suffix: Vec<f64>,
    residual: f64,
}

impl BesselTable {
    /// Miller backward recurrence from `M₀ = max(m_max, ⌈z⌉) + ⌈10 z^{1/3}⌉ + 50`,
    /// normalized by `J_0 + 2 Σ_{k≥1} J_{2k} = 1`.
    pub fn new(t: f64, m_max: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("Bessel table needs t > 0, got {t}")));
        }
        let z = 2.0 * t.sqrt();
        let start = m_max.max(z.ceil() as usize) + (10.0 * z.cbrt()).ceil() as usize + 50;
        if start > MAX_ORDER {
            return Err(Error::TooLarge {
                what: "Bessel table order",
                n: start as u64,
                limit: MAX_ORDER as u64,
            });
        }
        let mut values = vec![0.0f64; start + 1];
        let (mut next, mut cur) = (0.0f64, 1e-300f64);
        values[start] = cur;
        for m in (1..=start).rev() {
            let prev = 2.0 * m as f64 / z * cur - next;
            next = cur;
            cur = prev;
            values[m - 1] = cur;
            if cur.abs() > RESCALE_AT {
                for v in &mut values[m - 1..] {
                    *v /= RESCALE_AT;
                }
                next /= RESCALE_AT;
                cur /= RESCALE_AT;
            }
        }
        let mut norm = Neumaier::default();
        for k in (1..=start / 2).rev() {
            norm.add(2.0 * values[2 * k]);
        }
        norm.add(values[0]);
        let scale = norm.value();
        for v in &mut values {
            *v /= scale;
        }
        let mut check = Neumaier::default();
        for k in (1..=start / 2).rev() {
            check.add(2.0 * values[2 * k]);
        }
        check.add(values[0]);
        let mut suffix = vec![0.0f64; start + 2];
        let mut acc = Neumaier::default();
        for m in (0..=start).rev() {
            acc.add(values[m] * values[m]);
            suffix[m] = acc.value();
        }
        Ok(Self {
            t,
            z,
            max_order: m_max,
            values,
            suffix,
            residual: (check.value() - 1.0).abs(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The argument `2√t`.
    pub fn argument(&self) -> f64 {
        self.z
    }

    /// Requested maximal order.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Highest order actually stored (the recurrence start).
    pub fn stored_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `|J_0 + 2 Σ J_{2k} − 1|` after normalization.
    pub fn normalization_residual(&self) -> f64 {
        self.residual
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `J_m` for any integer `m`; orders past the table are treated as zero.
    pub fn get(&self, m: i64) -> f64 {
        let a = m.unsigned_abs() as usize;
        let v = self.values.get(a).copied().unwrap_or(0.0);
        if m < 0 && a % 2 == 1 {
            -v
        } else {
            v
        }
    }

    /// `Σ_{j ≥ m} J_j²` for `m ≥ 0`.
    fn tail_squares(&self, m: usize) -> f64 {
        self.suffix.get(m).copied().unwrap_or(0.0)
    }
}

/// `J(x, y; t)` for `x ≠ y`; the diagonal is delegated to [`kernel_diagonal`].
pub fn kernel_value(x: i64, y: i64, table: &BesselTable) -> f64 {
    if x == y {
        return kernel_diagonal(x, table);
    }
    let num = table.get(x) * table.get(y + 1) - table.get(x + 1) * table.get(y);
    table.t.sqrt() * num / (x - y) as f64
}

/// `J(x, x; t) = Σ_{s≥1} J_{x+s}²`.
///
/// Uses `Σ_{m∈ℤ} J_m² = 1`, so for negative `x` the value is one minus a
/// tail sum; both branches only ever add small terms to small terms.
pub fn kernel_diagonal(x: i64, table: &BesselTable) -> f64 {
    if x >= 0 {
        table.tail_squares(x as usize + 1)
    } else {
        1.0 - table.tail_squares(x.unsigned_abs() as usize)
    }
}

/// `ρ_k(x_1, …, x_k) = det[J(x_i, x_j; t)]`.
pub fn correlation_rho(points: &[i64], table: &BesselTable) -> Result<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoint(w[0]));
    }
    let k = points.len();
    if k == 0 {
        return Ok(1.0);
    }
    let m = DMatrix::from_fn(k, k, |i, j| kernel_value(points[i], points[j], table));
    // LU with partial pivoting
    Ok(m.lu().determinant())
}

/// Kernel-derived and asymptotic moments of `#I_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPrediction {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    #[serde(rename = "mean_kernel")]
    pub mean: f64,
    #[serde(rename = "var_kernel")]
    pub variance: f64,
    #[serde(rename = "mean_lemma1")]
    pub lemma1_mean: f64,
    #[serde(rename = "var_lemma1")]
    pub lemma1_variance: f64,
    pub cutoff: i64,
    pub tail_bound: f64,
}

const TAIL_TOLERANCE: f64 = 1e-12;
const MAX_WIDENINGS: u32 = 8;

/// Contiguous window of `J_m` for `m ∈ [lo, hi]`.
struct Window {
    lo: i64,
    j: Vec<f64>,
    sqrt_t: f64,
}

impl Window {
    fn new(table: &BesselTable, lo: i64, hi: i64) -> Self {
        Self {
            lo,
            j: (lo..=hi).map(|m| table.get(m)).collect(),
            sqrt_t: table.t.sqrt(),
        }
    }

    #[inline]
    fn off_diagonal(&self, x: i64, y: i64) -> f64 {
        let (i, k) = ((x - self.lo) as usize, (y - self.lo) as usize);
        self.sqrt_t * (self.j[i] * self.j[k + 1] - self.j[i + 1] * self.j[k]) / (x - y) as f64
    }
}

/// Expected number of points above `cutoff` plus expected holes below
/// `−cutoff − 1`.
fn truncation_mass(table: &BesselTable, cutoff: i64) -> f64 {
    let mut acc = Neumaier::default();
    // Σ_{m > c} J(m,m) = Σ_{j ≥ c+2} (j − c − 1) J_j²; the lower side is symmetric
    let c = cutoff.max(0) as usize;
    for j in (c + 2..=table.stored_order()).rev() {
        let v = table.values[j];
        acc.add((j - c - 1) as f64 * v * v);
    }
    2.0 * acc.value()
}

/// Mean and variance of `#I_t` from the kernel together with the leading
/// asymptotic terms.
///
/// The mean sums the diagonal over `I_t` up to the cutoff. The variance uses
/// the projection property `Σ_y J(x,y)² = J(x,x)`, which turns
/// `Σ_I J(x,x) − Σ_{I×I} J(x,y)²` into `Σ_{x∈I} Σ_{y∉I} J(x,y)²`, a sum of
/// nonnegative terms with no cancellation.
pub fn predict_counts(t: f64, x: f64, z: f64) -> Result<KernelPrediction> {
    if !(t >= 2.0) || !t.is_finite() {
        return Err(Error::Domain(format!("predict_counts needs t >= 2, got {t}")));
    }
    let a = interval_start(t, x, z)?;
    let base = (2.0 * t.sqrt()).ceil() as i64 + (10.0 * t.powf(1.0 / 6.0)).ceil() as i64 + 50;
    let mut cutoff = base;
    let mut widenings = 0;
    let (table, tail) = loop {
        let table = BesselTable::new(t, cutoff as usize + 2)?;
        let tail = truncation_mass(&table, cutoff);
        if tail < TAIL_TOLERANCE {
            break (table, tail);
        }
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::CutoffBudget { cutoff, tail });
        }
        cutoff += base;
    };
    let lo = -cutoff - 1;
    let window = Window::new(&table, lo, cutoff + 1);
    let first = a.max(lo);
    let mean: Neumaier = (first..=cutoff).map(|m| kernel_diagonal(m, &table)).sum();
    // holes below the window are counted in the tail bound
    let mean = mean.value() + (first - a).max(0) as f64;
    let rows: Vec<f64> = (first..=cutoff)
        .into_par_iter()
        .map(|xi| {
            let acc: Neumaier = (lo..first)
                .map(|y| {
                    let k = window.off_diagonal(xi, y);
                    k * k
                })
                .sum();
            acc.value()
        })
        .collect();
    let variance: Neumaier = rows.into_iter().sum();
    let theta = theta_of_x(x)?;
    let log_t = t.ln();
    Ok(KernelPrediction {
        t,
        x,
        z,
        mean,
        variance: variance.value(),
        lemma1_mean: t.sqrt() * x - z * theta / PI * log_t.sqrt(),
        lemma1_variance: log_t / (4.0 * PI * PI),
        cutoff,
        tail_bound: tail,
    })
}

/// Largest window for which [`count_distribution`] diagonalizes the kernel.
pub const DISTRIBUTION_WINDOW_LIMIT: usize = 4000;

/// Exact law of `#I_t`.
///
/// The restriction of a projection kernel to `I_t` is a positive contraction
/// and the count is distributed as a sum of independent Bernoulli variables
/// whose parameters are its eigenvalues. Returns `P{#I_t = k}` for
/// `k = 0..=window`, with the window truncated at the cutoff of
/// [`predict_counts`].
pub fn count_distribution(t: f64, x: f64, z: f64) -> Result<Vec<f64>> {
    let pred = predict_counts(t, x, z)?;
    let a = interval_start(t, x, z)?;
    let lo = -pred.cutoff - 1;
    if a < lo {
        return Err(Error::Domain(format!(
            "interval start {a} lies below the kernel window"
        )));
    }
    let size = (pred.cutoff - a + 1).max(0) as usize;
    if size > DISTRIBUTION_WINDOW_LIMIT {
        return Err(Error::TooLarge {
            what: "count distribution window",
            n: size as u64,
            limit: DISTRIBUTION_WINDOW_LIMIT as u64,
        });
    }
    let table = BesselTable::new(t, pred.cutoff as usize + 2)?;
    let k = DMatrix::from_fn(size, size, |i, j| kernel_value(a + i as i64, a + j as i64, &table));
    let eig = SymmetricEigen::new(k).eigenvalues;
    let mut pmf = vec![0.0f64; size + 1];
    pmf[0] = 1.0;
    for (done, &p) in eig.iter().enumerate() {
        let p = p.clamp(0.0, 1.0);
        for j in (0..=done + 1).rev() {
            let stay = pmf[j] * (1.0 - p);
            let step = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + step;
        }
    }
    Ok(pmf)
}

/// `Σ_{x∈I} J(x,x) − Σ_{x,y∈I} J(x,y)²` evaluated literally, for cross-checks
/// at small `t`.
pub fn count_variance_direct(t: f64, a: i64, cutoff: i64) -> Result<f64> {
    let table = BesselTable::new(t, cutoff.max(0) as usize + 2)?;
    let mut acc = Neumaier::default();
    for xi in a..=cutoff {
        acc.add(kernel_diagonal(xi, &table));
        for y in a..=cutoff {
            let k = kernel_value(xi, y, &table);
            acc.add(-k * k);
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(1/2π)∫_0^{2π} cos(mτ − z sin τ) dτ` by the periodic trapezoid rule,
    /// which converges geometrically for this entire integrand.
    fn bessel_oracle(m: i64, z: f64) -> f64 {
        let n = 512;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|i| {
                let tau = i as f64 * h;
                (m as f64 * tau - z * tau.sin()).cos()
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn normalization_residual_is_tiny() {
        for t in [1.0, 1e2, 1e6] {
            let tab = BesselTable::new(t, 10).unwrap();
            assert!(tab.normalization_residual() <= 1e-10, "t={t}");
        }
    }

    #[test]
    fn matches_integral_oracle() {
        for z in [0.5, 2.0, 10.0] {
            let tab = BesselTable::new(z * z / 4.0, 20).unwrap();
            for m in 0..=20 {
                let d = (tab.get(m) - bessel_oracle(m, z)).abs();
                assert!(d <= 1e-9, "m={m} z={z}: {d}");
            }
        }
    }

    #[test]
    fn small_argument_series() {
        let z = 1e-3f64;
        let tab = BesselTable::new(z * z / 4.0, 5).unwrap();
        let series = z / 2.0 - z.powi(3) / 16.0 + z.powi(5) / 384.0;
        assert!((tab.get(1) - series).abs() < 1e-12);
    }

    #[test]
    fn reflection_and_bounds() {
        let tab = BesselTable::new(30.0, 40).unwrap();
        for m in 1..40 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(tab.get(-m), sign * tab.get(m));
        }
        assert!(tab.values().iter().all(|v| v.abs() <= 1.0));
        assert_eq!(tab.get(10_000_000), 0.0);
        assert!(BesselTable::new(0.0, 3).is_err());
        assert!(matches!(
            BesselTable::new(1.0, MAX_ORDER + 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn ratio_formula_matches_sum_representation() {
        for t in [1.0, 1e2, 1e4] {
            let tab = BesselTable::new(t, 4 * t.sqrt() as usize + 50).unwrap();
            let edge = 2.0 * t.sqrt();
            let pairs = [
                (-3, 5),
                (0, 1),
                (7, -2),
                (-(edge as i64), 2),
                (edge as i64 - 3, edge as i64 + 4),
            ];
            for (x, y) in pairs {
                let sum: Neumaier = (1..=tab.stored_order() as i64 + x.abs() + 2)
                    .map(|s| tab.get(x + s) * tab.get(y + s))
                    .sum();
                let got = kernel_value(x, y, &tab);
                assert!(
                    (got - sum.value()).abs() < 1e-8,
                    "t={t} ({x},{y}): {got} vs {}",
                    sum.value()
                );
                assert_eq!(got, kernel_value(y, x, &tab));
            }
        }
    }

    #[test]
    fn diagonal_matches_direct_sum() {
        let tab = BesselTable::new(50.0, 60).unwrap();
        for x in [-30i64, -14, -1, 0, 3, 14, 25] {
            let direct: Neumaier = (1..200).map(|s| tab.get(x + s).powi(2)).sum();
            assert!((kernel_diagonal(x, &tab) - direct.value()).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn kernel_vanishes_as_t_goes_to_zero() {
        let tab = BesselTable::new(1e-10, 10).unwrap();
        assert!(kernel_value(0, 3, &tab).abs() < 1e-9);
        assert!(kernel_diagonal(2, &tab) < 1e-20);
        assert!(kernel_diagonal(-1, &tab) > 1.0 - 1e-9);
    }

    #[test]
    fn rho_is_determinant() {
        let tab = BesselTable::new(400.0, 100).unwrap();
        assert_eq!(correlation_rho(&[5], &tab).unwrap(), kernel_diagonal(5, &tab));
        let (x, y) = (3, 11);
        let want = kernel_diagonal(x, &tab) * kernel_diagonal(y, &tab) - kernel_value(x, y, &tab).powi(2);
        assert!((correlation_rho(&[x, y], &tab).unwrap() - want).abs() < 1e-15);
        assert!(correlation_rho(&[x, y], &tab).unwrap() <= kernel_diagonal(x, &tab) * kernel_diagonal(y, &tab));
        assert_eq!(correlation_rho(&[4, 2, 4], &tab), Err(Error::DuplicatePoint(4)));
    }

    #[test]
    fn lemma_fields_are_plain_arithmetic() {
        let p = predict_counts(1e6, 1.0, 0.0).unwrap();
        assert!((p.lemma1_mean - 1000.0).abs() < 1e-9);
        assert!((p.lemma1_variance - 0.349_96).abs() < 1e-5);
        assert!(p.tail_bound < 1e-12);
    }

    #[test]
    fn count_distribution_moments_match_prediction() {
        let (t, x, z) = (400.0, 1.0, 0.0);
        let pmf = count_distribution(t, x, z).unwrap();
        let p = predict_counts(t, x, z).unwrap();
        let total: f64 = pmf.iter().sum();
        let mean: f64 = pmf.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
        let var: f64 = pmf.iter().enumerate().map(|(k, q)| (k as f64 - mean).powi(2) * q).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((mean - p.mean).abs() < 1e-9);
        assert!((var - p.variance).abs() < 1e-9);
    }

    #[test]
    fn variance_identity_agrees_with_direct_form() {
        for (t, x, z) in [(10.0, 1.0, 0.0), (25.0, 0.5, 0.3), (60.0, 1.4, -0.5)] {
            let p = predict_counts(t, x, z).unwrap();
            let a = interval_start(t, x, z).unwrap();
            let direct = count_variance_direct(t, a, p.cutoff).unwrap();
            assert!((p.variance - direct).abs() < 1e-10, "t={t}: {} vs {direct}", p.variance);
            assert!(p.variance >= 0.0 && p.variance <= p.mean);
        }
    }
}
