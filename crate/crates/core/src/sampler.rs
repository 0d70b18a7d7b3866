//! Exact Plancherel samplers and reproducible random streams.
//!
//! Two independent exact samplers are provided for `P_n`: Schensted row
//! insertion of a uniform permutation, and the Plancherel growth chain driven
//! by hook-length ratios. The poissonized measure `P^t` is sampled as a Poisson
//! mixture of `P_N`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Identifies one replica's random stream.
///
/// The ChaCha key is expanded from `master_seed` and the replica index
/// selects the ChaCha stream, so replicas never share keystream and a
/// replica's draws do not depend on how many other replicas exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededStream {
    pub master_seed: u64,
    pub replica_index: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64, replica_index: u64) -> Self {
        Self {
            master_seed,
            replica_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.replica_index);
        rng
    }

    /// A stream for an auxiliary purpose (e.g. a second batch in the same
    /// experiment) that must not collide with the plain replica streams.
    pub fn derived(master_seed: u64, label: u64) -> u64 {
        let mut s = master_seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        splitmix64(&mut s)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform permutation of `1..=n` by Fisher–Yates.
pub fn sample_uniform_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::Domain("permutation size must be at least 1".into()));
    }
    let mut perm: Vec<u32> = (1..=n as u32).collect();
    perm.shuffle(rng);
    Ok(perm)
}

/// Shape of the RSK insertion tableau of `perm`, and the LIS length `λ_1`.
pub fn rsk_shape(perm: &[u32]) -> Result<(Partition, u32)> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &v in perm {
        let idx = (v as usize).wrapping_sub(1);
        if idx >= n || seen[idx] {
            return Err(Error::InvalidPermutation(format!(
                "value {v} is out of range or repeated for n = {n}"
            )));
        }
        seen[idx] = true;
    }
    let shape = rsk_shape_of_distinct(perm);
    let lis = shape.largest();
    Ok((shape, lis))
}

/// Row insertion for a sequence of distinct values.
///
/// Each row is kept sorted and the bumped entry is replaced in place. The
/// first row is searched by bisection. Bumping paths move weakly left and
/// usually only by a few columns per row, so in later rows the search gallops
/// backwards from the previous bump position.
fn rsk_shape_of_distinct(seq: &[u32]) -> Partition {
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for &v in seq {
        let mut x = v;
        // first row: bisection
        let Some(first) = rows.first_mut() else {
            rows.push(vec![x]);
            continue;
        };
        if *first.last().expect("rows are nonempty") < x {
            first.push(x);
            continue;
        }
        let mut prev = first_greater(first, x);
        x = std::mem::replace(&mut first[prev], x);
        let mut r = 1;
        loop {
            let Some(row) = rows.get_mut(r) else {
                rows.push(vec![x]);
                break;
            };
            let last = row.len() - 1;
            // row[prev] > x by column strictness when prev is inside the row
            let hi = if prev > last {
                if row[last] < x {
                    row.push(x);
                    break;
                }
                last
            } else {
                prev
            };
            // drift is zero most of the time
            let pos = if hi == 0 || row[hi - 1] < x {
                hi
            } else {
                first_greater_below(row, x, hi - 1)
            };
            x = std::mem::replace(&mut row[pos], x);
            prev = pos;
            r += 1;
        }
    }
    Partition::from_sorted_unchecked(rows.iter().map(|r| r.len() as u32).collect())
}

/// Index of the first entry greater than `x`; the last entry must exceed `x`.
#[inline]
fn first_greater(row: &[u32], x: u32) -> usize {
    let mut base = 0usize;
    let mut len = row.len();
    while len > 1 {
        let half = len / 2;
        base = if row[base + half] < x { base + half } else { base };
        len -= half;
    }
    if row[base] < x {
        base + 1
    } else {
        base
    }
}

/// Like [`first_greater`], given that `row[hi] > x`.
///
/// The answer is almost always within a few entries of `hi`, so a fixed
/// window is scanned without branches first; the rare longer drift gallops.
#[inline]
fn first_greater_below(row: &[u32], x: u32, hi: usize) -> usize {
    const WINDOW: usize = 8;
    let lo = hi.saturating_sub(WINDOW - 1);
    let below = if hi >= WINDOW - 1 {
        let w: &[u32; WINDOW] = row[lo..=hi].try_into().expect("window length");
        w.iter().map(|&y| (y < x) as u32).sum::<u32>() as usize
    } else {
        row[..=hi].iter().map(|&y| (y < x) as usize).sum::<usize>()
    };
    if below > 0 || lo == 0 {
        return lo + below;
    }
    let mut hi = lo;
    let mut step = 1usize;
    while step <= hi && row[hi - step] > x {
        hi -= step;
        step <<= 1;
    }
    // answer lies in (hi - step, hi]
    let lo = hi.saturating_sub(step - 1);
    lo + first_greater(&row[lo..=hi], x)
}

/// Exact `P_n` draw via RSK of a uniform permutation.
pub fn sample_plancherel_rsk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Partition {
    if n == 0 {
        return Partition::empty();
    }
    let perm = sample_uniform_permutation(n, rng).expect("n >= 1");
    rsk_shape_of_distinct(&perm)
}

/// Transition probabilities of the Plancherel growth chain out of the shape
/// given by `cols` (parts) and `rows` (its conjugate).
///
/// Returns `(part index, height, probability)` for every addable cell. The
/// probability `d_{λ+□} / ((k+1) d_λ)` is the product of `h/(h+1)` over the
/// hooks in the new cell's part and level, the only hooks that change.
#[allow(clippy::needless_range_loop)]
fn growth_transitions(cols: &[u32], rows: &[u32]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for i in 0..=cols.len() {
        let h = cols.get(i).copied().unwrap_or(0) as usize;
        if i > 0 && cols[i - 1] as usize <= h {
            continue;
        }
        let mut p = 1.0f64;
        // cells below the new one in part i
        for j in 0..h {
            let hook = (cols[i] as usize - j - 1) + (rows[j] as usize - i - 1) + 1;
            p *= hook as f64 / (hook as f64 + 1.0);
        }
        // cells at the same level in earlier parts; rows[h] == i here
        for ip in 0..i {
            let hook = (cols[ip] as usize - h - 1) + (i - ip - 1) + 1;
            p *= hook as f64 / (hook as f64 + 1.0);
        }
        out.push((i, h, p));
    }
    out
}

/// Exact `P_n` draw by running the Plancherel growth chain for `n` steps.
pub fn sample_plancherel_growth<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Partition {
    let mut cols: Vec<u32> = Vec::new();
    let mut rows: Vec<u32> = Vec::new();
    for _ in 0..n {
        let moves = growth_transitions(&cols, &rows);
        let total: f64 = moves.iter().map(|m| m.2).sum();
        let mut u = rng.random::<f64>() * total;
        let mut choice = moves.len() - 1;
        for (k, m) in moves.iter().enumerate() {
            if u < m.2 {
                choice = k;
                break;
            }
            u -= m.2;
        }
        let (i, h, _) = moves[choice];
        if i == cols.len() {
            cols.push(1);
        } else {
            cols[i] += 1;
        }
        if h == rows.len() {
            rows.push(1);
        } else {
            rows[h] += 1;
        }
    }
    Partition::from_sorted_unchecked(cols)
}

/// Growth-chain transition probabilities out of `lambda`, keyed by the
/// resulting partition.
pub fn growth_step_probabilities(lambda: &Partition) -> Vec<(Partition, f64)> {
    let cols = lambda.parts().to_vec();
    let rows = lambda.conjugate().parts().to_vec();
    growth_transitions(&cols, &rows)
        .into_iter()
        .map(|(i, _, p)| {
            let mut next = cols.clone();
            if i == next.len() {
                next.push(1);
            } else {
                next[i] += 1;
            }
            (Partition::from_sorted_unchecked(next), p)
        })
        .collect()
}

/// Draw from `P^t`: `N ~ Poisson(t)`, then `P_N` by RSK.
pub fn sample_poissonized<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<Partition> {
    let n = sample_poisson(t, rng)?;
    Ok(sample_plancherel_rsk(n as usize, rng))
}

pub fn sample_poisson<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<u64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("Poisson parameter must be positive, got {t}")));
    }
    let dist = Poisson::new(t).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Rsk,
    Growth,
    Poissonized,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rsk" => Ok(Self::Rsk),
            "growth" => Ok(Self::Growth),
            "poissonized" => Ok(Self::Poissonized),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

/// One replica's draw with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub replica_index: u64,
    pub stream: SeededStream,
    pub partition: Partition,
}

/// Replicated draws for one sampler and parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// `n` for the fixed-size samplers, `t` for the poissonized one.
    pub param: f64,
    pub kind: SamplerKind,
    pub draws: Vec<Draw>,
}

impl SampleBatch {
    /// Draws `replicas` independent samples. Replica `i` uses stream
    /// `(master_seed, i)`; the result is ordered by replica index whatever
    /// the scheduling.
    pub fn generate(kind: SamplerKind, param: f64, replicas: usize, master_seed: u64) -> Result<Self> {
        Self::generate_range(kind, param, 0..replicas as u64, master_seed)
    }

    pub fn generate_range(
        kind: SamplerKind,
        param: f64,
        replicas: std::ops::Range<u64>,
        master_seed: u64,
    ) -> Result<Self> {
        if !(param >= 0.0) || !param.is_finite() {
            return Err(Error::Domain(format!(
                "sampler parameter must be finite and >= 0, got {param}"
            )));
        }
        if kind != SamplerKind::Poissonized && param.fract() != 0.0 {
            return Err(Error::Domain(format!("n must be an integer, got {param}")));
        }
        let draws = replicas
            .into_par_iter()
            .map(|i| {
                let stream = SeededStream::new(master_seed, i);
                let mut rng = stream.rng();
                let partition = match kind {
                    SamplerKind::Rsk => sample_plancherel_rsk(param as usize, &mut rng),
                    SamplerKind::Growth => sample_plancherel_growth(param as usize, &mut rng),
                    SamplerKind::Poissonized => sample_poissonized(param, &mut rng)?,
                };
                Ok(Draw {
                    replica_index: i,
                    stream,
                    partition,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { param, kind, draws })
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.draws.iter().map(|d| &d.partition)
    }
}
