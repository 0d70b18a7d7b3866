//! Integer partitions and their exact combinatorics.
//!
//! A partition is stored as its weakly decreasing sequence of positive parts.
//! In the diagram convention used throughout the crate the parts are column
//! heights: the profile `λ(x)` equals `λ_⌈x⌉`, so the Young diagram of
//! `(3, 1)` has a column of three cells followed by a column of one.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which dimensions and Plancherel probabilities are exact.
pub const EXACT_LIMIT: u64 = 20;
/// Largest `n` accepted by [`enumerate_partitions`].
pub const ENUMERATION_LIMIT: u64 = 40;
/// Largest weight accepted by [`dimension_bruteforce`].
pub const BRUTEFORCE_LIMIT: u64 = 12;

/// A partition `λ ⊢ n`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u32>,
    weight: u64,
}

impl Partition {
    /// The empty partition of 0.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates a weakly decreasing sequence of positive parts.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        for (i, &p) in parts.iter().enumerate() {
            if p == 0 {
                return Err(Error::NonPositivePart(0));
            }
            if i > 0 && p > parts[i - 1] {
                return Err(Error::NotDecreasing { index: i, value: p });
            }
        }
        let weight = parts.iter().map(|&p| p as u64).sum();
        Ok(Self { parts, weight })
    }

    /// Builds a partition from signed input, rejecting zero or negative parts.
    /// With `sort` set, unsorted input is accepted and sorted.
    pub fn from_signed(parts: &[i64], sort: bool) -> Result<Self> {
        let mut out = Vec::with_capacity(parts.len());
        for &p in parts {
            if p <= 0 {
                return Err(Error::NonPositivePart(p));
            }
            let p = u32::try_from(p).map_err(|_| Error::Domain(format!("part {p} too large")))?;
            out.push(p);
        }
        if sort {
            out.sort_unstable_by(|a, b| b.cmp(a));
        }
        Self::new(out)
    }

    /// Internal constructor for sequences already known to be valid.
    pub(crate) fn from_sorted_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&p| p > 0));
        let weight = parts.iter().map(|&p| p as u64).sum();
        Self { parts, weight }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `n = |λ|`.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Number of nonzero parts, `λ′_1`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `λ_i` with 1-based index; zero beyond the last part, and `λ_0 := λ_1`.
    pub fn part(&self, i: usize) -> u32 {
        if i == 0 {
            return self.largest();
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    /// `λ_1`, or zero for the empty partition.
    pub fn largest(&self) -> u32 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// The transposed partition `λ′` with `λ′_j = #{i : λ_i ≥ j}`.
    pub fn conjugate(&self) -> Partition {
        let top = self.largest() as usize;
        let mut conj = vec![0u32; top];
        // each part contributes one cell to rows 1..=part
        let mut i = self.parts.len();
        for j in 1..=top {
            while i > 0 && (self.parts[i - 1] as usize) < j {
                i -= 1;
            }
            conj[j - 1] = i as u32;
        }
        Partition::from_sorted_unchecked(conj)
    }

    /// Left-continuous profile `λ(x) = λ_⌈x⌉`, with `λ(0) := λ_1`.
    pub fn profile(&self, x: f64) -> Result<u32> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "profile argument must be finite and >= 0, got {x}"
            )));
        }
        if x == 0.0 {
            return Ok(self.largest());
        }
        let c = x.ceil();
        if c > self.parts.len() as f64 {
            return Ok(0);
        }
        Ok(self.parts[c as usize - 1])
    }

    /// Hook length of the cell in part `i` at height `j` (both 0-based).
    fn hook(&self, conj: &[u32], i: usize, j: usize) -> u64 {
        (self.parts[i] as u64 - j as u64 - 1) + (conj[j] as u64 - i as u64 - 1) + 1
    }

    /// `d_λ` by the hook length formula.
    ///
    /// The exact value is produced for `n ≤ 20`; the logarithm is always
    /// available.
    pub fn dimension(&self) -> Dimension {
        let conj = self.conjugate();
        let conj = conj.parts();
        let n = self.weight;
        let mut log_hooks = 0.0;
        let mut hook_product: Option<u128> = (n <= EXACT_LIMIT).then_some(1);
        for i in 0..self.parts.len() {
            for j in 0..self.parts[i] as usize {
                let h = self.hook(conj, i, j);
                log_hooks += (h as f64).ln();
                if let Some(p) = hook_product.as_mut() {
                    *p *= h as u128;
                }
            }
        }
        let exact = hook_product.map(|p| factorial(n) / p);
        let log = statrs::function::factorial::ln_factorial(n) - log_hooks;
        Dimension { exact, log }
    }

    /// Frobenius point set `D(λ) = {λ_i − i : i ≥ 1}`.
    pub fn frobenius(&self) -> FrobeniusSet {
        let explicit = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, &p)| p as i64 - (i as i64 + 1))
            .collect();
        FrobeniusSet {
            explicit,
            tail_start: -(self.parts.len() as i64) - 1,
        }
    }

    /// `#(D(λ) ∩ [a, ∞))`.
    ///
    /// Satisfies `count < k ⟺ λ_k − k < a` for every `k ≥ 1`.
    pub fn count_frobenius_at_least(&self, a: i64) -> u64 {
        // λ_i − i is strictly decreasing: binary search for the first index
        // where it drops below a
        let (mut lo, mut hi) = (0usize, self.parts.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.parts[mid] as i64 - (mid as i64 + 1) >= a {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let explicit = lo as u64;
        if explicit < self.parts.len() as u64 {
            return explicit;
        }
        explicit + (-(self.parts.len() as i64) - 1 - a + 1).max(0) as u64
    }

    /// Cells that can be added while keeping the shape a partition, as
    /// 0-based `(part index, height)` pairs in increasing part index.
    pub fn addable_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for i in 0..=self.parts.len() {
            let h = self.part(i + 1) as usize;
            if i == 0 || (self.parts[i - 1] as usize) > h {
                cells.push((i, h));
            }
        }
        cells
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Partition::from_signed(&parts, false)
    }
}

/// `d_λ`, exact when small enough, always with its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimension {
    pub exact: Option<u128>,
    pub log: f64,
}

impl Dimension {
    /// The exact value, or `Error::TooLarge` when only the logarithm is known.
    pub fn exact_or_err(&self, n: u64) -> Result<u128> {
        self.exact.ok_or(Error::TooLarge {
            what: "exact dimension",
            n,
            limit: EXACT_LIMIT,
        })
    }
}

/// The Frobenius set with its infinite lower tail kept implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusSet {
    /// `λ_i − i` for `i = 1..=len(λ)`, strictly decreasing.
    pub explicit: Vec<i64>,
    /// `−len(λ) − 1`; every integer `≤ tail_start` is a member.
    pub tail_start: i64,
}

impl FrobeniusSet {
    pub fn contains(&self, m: i64) -> bool {
        m <= self.tail_start || self.explicit.binary_search_by(|p| m.cmp(p)).is_ok()
    }

    /// `#(D(λ) ∩ [a, ∞))`; tail members in `[a, tail_start]` are included.
    pub fn count_at_least(&self, a: i64) -> u64 {
        let explicit = self.explicit.partition_point(|&p| p >= a) as u64;
        let tail = (self.tail_start - a + 1).max(0) as u64;
        explicit + tail
    }
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

/// `d_λ` by exhaustive recursion over the position of the largest entry.
///
/// Test oracle only; limited to weight ≤ 12.
pub fn dimension_bruteforce(lambda: &Partition) -> Result<u64> {
    if lambda.weight() > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "brute-force tableaux count",
            n: lambda.weight(),
            limit: BRUTEFORCE_LIMIT,
        });
    }
    fn count(parts: &mut Vec<u32>) -> u64 {
        if parts.is_empty() {
            return 1;
        }
        let mut total = 0;
        // the entry n sits in a removable corner
        for i in 0..parts.len() {
            let next = parts.get(i + 1).copied().unwrap_or(0);
            if parts[i] > next {
                parts[i] -= 1;
                let popped = if parts[i] == 0 { parts.pop() } else { None };
                total += count(parts);
                if popped.is_some() {
                    parts.push(0);
                }
                parts[i] += 1;
            }
        }
        total
    }
    Ok(count(&mut lambda.parts().to_vec()))
}

/// All partitions of `n` in reverse-lexicographic order.
pub fn enumerate_partitions(n: u64) -> Result<Vec<Partition>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "partition enumeration",
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n == 0 {
        return Ok(vec![Partition::empty()]);
    }
    let mut out = Vec::new();
    let mut cur = vec![n as u32];
    loop {
        out.push(Partition::from_sorted_unchecked(cur.clone()));
        // rightmost part larger than one
        let Some(k) = cur.iter().rposition(|&p| p > 1) else {
            break;
        };
        let ones = (cur.len() - k - 1) as u32;
        let v = cur[k] - 1;
        cur.truncate(k);
        cur.push(v);
        let mut rest = ones + 1;
        while rest > 0 {
            let p = rest.min(v);
            cur.push(p);
            rest -= p;
        }
    }
    Ok(out)
}

/// Exact Plancherel probabilities `d_λ² / n!`.
#[derive(Debug, Clone)]
pub struct ExactPmf {
    pub n: u64,
    pub entries: Vec<(Partition, Ratio<u128>)>,
}

impl ExactPmf {
    pub fn get(&self, lambda: &Partition) -> Option<Ratio<u128>> {
        self.entries.iter().find(|(p, _)| p == lambda).map(|(_, r)| *r)
    }

    /// Probabilities as floats, in enumeration order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|(_, r)| *r.numer() as f64 / *r.denom() as f64)
            .collect()
    }

    /// `Σ d_λ²`, which equals `n!`.
    pub fn sum_of_squares(&self) -> u128 {
        self.entries
            .iter()
            .map(|(p, _)| {
                let d = p.dimension().exact.expect("exact below limit");
                d * d
            })
            .sum()
    }

    pub fn total(&self) -> Ratio<u128> {
        self.entries.iter().fold(Ratio::from_integer(0), |acc, (_, r)| acc + r)
    }
}

/// The Plancherel measure on partitions of `n ≤ 20` in exact rationals.
pub fn plancherel_pmf(n: u64) -> Result<ExactPmf> {
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            what: "exact Plancherel probabilities",
            n,
            limit: EXACT_LIMIT,
        });
    }
    let denom = factorial(n);
    let entries = enumerate_partitions(n)?
        .into_iter()
        .map(|p| {
            let d = p.dimension().exact.expect("exact below limit");
            (p, Ratio::new(d * d, denom))
        })
        .collect();
    Ok(ExactPmf { n, entries })
}
