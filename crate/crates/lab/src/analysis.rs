//! Statistics computed from sample batches, independent of any file output.

use plancherel_core::fluctuation::{count_interval, delta_vertical, kerov_functional, y_rotated, y_vertical};
use plancherel_core::limit_shape::{omega, sup_distance, RotatedProfile};
use plancherel_core::stats::{
    chi2_two_sample, correlation, empirical_cov, ks_two_sample, lattice_normality, Chi2Result, CovEstimate, StatSummary,
};
use plancherel_core::{Partition, Result, SampleBatch, SamplerKind};
use rayon::prelude::*;
use serde::Serialize;

/// Size parameter of a batch as used by the fluctuation functions.
pub fn batch_size(batch: &SampleBatch) -> f64 {
    batch.param
}

fn par_map<T: Send>(batch: &SampleBatch, f: impl Fn(&Partition) -> Result<T> + Sync) -> Result<Vec<T>> {
    batch.draws.par_iter().map(|d| f(&d.partition)).collect()
}

/// Sup-distances to the limit shape, one per draw.
pub fn sup_distances(batch: &SampleBatch) -> Result<Vec<f64>> {
    let scale = batch_size(batch).sqrt();
    par_map(batch, |l| sup_distance(l, scale))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CltResult {
    pub n: f64,
    pub x: f64,
    pub deltas: Vec<f64>,
    pub ys: Vec<f64>,
    pub summary: StatSummary,
    pub lattice_chi2: Option<Chi2Result>,
    /// `(lattice index, count)` of `Δ` around `−√n ω(x)`.
    pub cell_counts: Vec<(i64, u64)>,
}

/// `Δ_n(x)` and `Y_n(x)` for every draw plus a lattice-aware normality test.
pub fn clt_vertical(batch: &SampleBatch, x: f64) -> Result<CltResult> {
    let n = batch_size(batch);
    let pairs = par_map(batch, |l| Ok((delta_vertical(l, n, x)?, y_vertical(l, n, x)?)))?;
    let (deltas, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut summary = StatSummary::from_samples(&ys)?;
    // Δ lives on ℤ − √n ω(x)
    let offset = (-n.sqrt() * omega(x)?).rem_euclid(1.0);
    let (lattice_chi2, cell_counts) = match lattice_normality(&deltas, offset, 1.0) {
        Ok(r) => (Some(r.chi2), r.cell_counts),
        Err(_) => (None, Vec::new()),
    };
    summary.chi2_statistic = lattice_chi2.as_ref().map(|c| c.statistic);
    summary.chi2_p = lattice_chi2.as_ref().map(|c| c.p_value);
    Ok(CltResult {
        n,
        x,
        deltas,
        ys,
        summary,
        lattice_chi2,
        cell_counts,
    })
}

/// `Ỹ_n(u)` for every draw.
pub fn rotated_values(batch: &SampleBatch, u: f64) -> Result<Vec<f64>> {
    let n = batch_size(batch);
    par_map(batch, |l| y_rotated(&RotatedProfile::new(l, n.sqrt())?, n, u))
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationPoint {
    pub s: f64,
    pub x: f64,
    pub target: f64,
    pub cov: CovEstimate,
}

/// Points `x_i = x₀ + c·n^{−s_i/2}`.
pub fn separated_points(n: f64, x0: f64, s_values: &[f64], c: f64) -> Vec<f64> {
    s_values.iter().map(|s| x0 + c * n.powf(-s / 2.0)).collect()
}

/// `Cov(Y_n(x₀), Y_n(x_i))` for each separation exponent.
pub fn separation_covariances(batch: &SampleBatch, x0: f64, s_values: &[f64], c: f64) -> Result<Vec<SeparationPoint>> {
    let n = batch_size(batch);
    let xs = separated_points(n, x0, s_values, c);
    let rows = par_map(batch, |l| {
        let y0 = y_vertical(l, n, x0)?;
        let yi = xs.iter().map(|&x| y_vertical(l, n, x)).collect::<Result<Vec<_>>>()?;
        Ok((y0, yi))
    })?;
    s_values
        .iter()
        .zip(&xs)
        .enumerate()
        .map(|(i, (&s, &x))| {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|(y0, yi)| (*y0, yi[i])).collect();
            Ok(SeparationPoint {
                s,
                x,
                target: s,
                cov: empirical_cov(&pairs)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct KerovResult {
    pub k_values: Vec<usize>,
    /// `values[r][j]` is the functional with index `k_values[j]` on draw `r`.
    pub values: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    pub targets: Vec<f64>,
    /// `(k, k′, r)` for every pair of indices above one.
    pub correlations: Vec<(usize, usize, f64)>,
}

pub fn kerov_functionals(batch: &SampleBatch, k_max: usize) -> Result<KerovResult> {
    let n = batch_size(batch);
    let k_values: Vec<usize> = (1..=k_max).collect();
    let values: Vec<Vec<f64>> = par_map(batch, |l| {
        let prof = RotatedProfile::new(l, n.sqrt())?;
        k_values.iter().map(|&k| kerov_functional(&prof, n, k)).collect()
    })?;
    let mut variances = Vec::new();
    for j in 0..k_values.len() {
        let col: Vec<f64> = values.iter().map(|r| r[j]).collect();
        variances.push(StatSummary::from_samples(&col)?.variance);
    }
    let targets = k_values
        .iter()
        .map(|&k| if k == 1 { 0.0 } else { 4.0 / k as f64 })
        .collect();
    let mut correlations = Vec::new();
    for a in 1..k_values.len() {
        for b in a + 1..k_values.len() {
            let pairs: Vec<(f64, f64)> = values.iter().map(|r| (r[a], r[b])).collect();
            correlations.push((k_values[a], k_values[b], correlation(&pairs)?));
        }
    }
    Ok(KerovResult {
        k_values,
        values,
        variances,
        targets,
        correlations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeResult {
    pub n: f64,
    pub z: f64,
    pub identity_holds: usize,
    pub draws: usize,
    pub row_column_test: Chi2Result,
    pub scaled_first_rows: Vec<f64>,
}

/// `Δ_n(2) ≤ z ⟺ λ′_{[z]+1} < 2√n` on every draw, and `λ_1` against `λ′_1`.
pub fn edge_identity(batch: &SampleBatch, z: f64) -> Result<EdgeResult> {
    let n = batch_size(batch);
    let root = n.sqrt();
    let k = z.floor() as i64 + 1;
    let checks = par_map(batch, |l| {
        let left = delta_vertical(l, n, 2.0)? <= z;
        let right = if k >= 1 {
            (l.conjugate().part(k as usize) as f64) < 2.0 * root
        } else {
            // λ′_k for k ≤ 0 is infinite
            false
        };
        Ok(left == right)
    })?;
    let top = batch
        .partitions()
        .map(|l| l.largest().max(l.len() as u32))
        .max()
        .unwrap_or(0) as usize;
    let mut rows = vec![0u64; top + 1];
    let mut cols = vec![0u64; top + 1];
    for l in batch.partitions() {
        rows[l.largest() as usize] += 1;
        cols[l.len()] += 1;
    }
    Ok(EdgeResult {
        n,
        z,
        identity_holds: checks.iter().filter(|&&ok| ok).count(),
        draws: checks.len(),
        row_column_test: chi2_two_sample(&rows, &cols)?,
        scaled_first_rows: scaled_first_rows(batch),
    })
}

/// `(λ_1 − 2√n)/n^{1/6}` per draw.
pub fn scaled_first_rows(batch: &SampleBatch) -> Vec<f64> {
    let n = batch_size(batch);
    batch
        .partitions()
        .map(|l| (l.largest() as f64 - 2.0 * n.sqrt()) / n.powf(1.0 / 6.0))
        .collect()
}

/// Two-sample KS distance between the scaled first rows of two batches.
pub fn edge_stability(a: &SampleBatch, b: &SampleBatch) -> Result<(f64, f64)> {
    ks_two_sample(&scaled_first_rows(a), &scaled_first_rows(b))
}

/// `#I_t` on every draw of a poissonized batch.
pub fn interval_counts(batch: &SampleBatch, x: f64, z: f64) -> Result<Vec<u64>> {
    debug_assert_eq!(batch.kind, SamplerKind::Poissonized);
    let t = batch.param;
    par_map(batch, |l| count_interval(l, t, x, z))
}

#[derive(Debug, Clone, Serialize)]
pub struct TightnessResult {
    pub n: f64,
    pub u: f64,
    pub u_prime: f64,
    pub epsilon: f64,
    pub differences: Vec<f64>,
    pub probability: f64,
}

/// Frequency of `|Ỹ_n(u) − Ỹ_n(u′)| ≥ ε`.
pub fn tightness_probe(batch: &SampleBatch, u: f64, gap: f64, epsilon: f64) -> Result<TightnessResult> {
    let u_prime = u + gap;
    let a = rotated_values(batch, u)?;
    let b = rotated_values(batch, u_prime)?;
    let differences: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
    let hits = differences.iter().filter(|d| d.abs() >= epsilon).count();
    Ok(TightnessResult {
        n: batch_size(batch),
        u,
        u_prime,
        epsilon,
        probability: hits as f64 / differences.len() as f64,
        differences,
    })
}
