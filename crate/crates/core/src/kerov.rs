//! Limit objects: partial sums of the random Chebyshev series and the
//! Gaussian vector with covariance `K(s_i, s_j) = min(s_i, s_j)`, `K(s, s) = 1`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bessel::Neumaier;
use crate::error::{Error, Result};

/// Covariance of the limit vector `(Z_{s_1}, …, Z_{s_m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVectorSpec {
    s_values: Vec<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianVectorSpec {
    pub fn new(s_values: Vec<f64>) -> Result<Self> {
        if let Some(&s) = s_values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Domain(format!("s values must lie in [0, 1], got {s}")));
        }
        let m = s_values.len();
        let covariance = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { s_values[i].min(s_values[j]) });
        if m > 0 {
            let min_eig = SymmetricEigen::new(covariance.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -1e-10 {
                return Err(Error::NotPositiveSemidefinite(min_eig));
            }
        }
        Ok(Self { s_values, covariance })
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// One draw of the coefficients `X_2, …, X_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesState {
    m: usize,
    coefficients: Vec<f64>,
}

impl SeriesState {
    pub fn sample<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("series truncation needs m >= 2, got {m}")));
        }
        let coefficients = (2..=m).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self { m, coefficients })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `X_k` for `k = 2..=m`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `S_m(2 cos θ) = (2/π) Σ_{k=2}^m X_k sin(kθ)/√k`.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        // sin(kθ) by the Chebyshev recurrence sin((k+1)θ) = 2cosθ sin(kθ) − sin((k−1)θ)
        let c2 = 2.0 * theta.cos();
        let (mut prev, mut cur) = (theta.sin(), (2.0 * theta).sin());
        let mut acc = Neumaier::default();
        for (i, &x) in self.coefficients.iter().enumerate() {
            let k = (i + 2) as f64;
            acc.add(x * cur / k.sqrt());
            let next = c2 * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(2.0 / PI * acc.value())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta must lie in (0, π), got {theta}")));
    }
    Ok(())
}

/// `S_m(2 cos θ)` at every `θ` in `thetas`, sharing one coefficient vector.
pub fn sample_partial_sum<R: Rng + ?Sized>(m: usize, thetas: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    for &th in thetas {
        check_theta(th)?;
    }
    let state = SeriesState::sample(m, rng)?;
    thetas.iter().map(|&th| state.eval(th)).collect()
}

/// `(4/π²) Σ_{k=2}^m sin(kθ) sin(kθ′)/k`.
pub fn cov_partial_sum(theta: f64, theta_prime: f64, m: usize) -> f64 {
    let mut acc = Neumaier::default();
    for k in 2..=m {
        let kf = k as f64;
        acc.add((kf * theta).sin() * (kf * theta_prime).sin() / kf);
    }
    4.0 / (PI * PI) * acc.value()
}

/// `Z_s = W_s + ζ_s √(1 − s)` on an ascending grid: `W` from independent
/// Gaussian increments, `ζ_s` independent standard normals.
pub fn sample_limit_vector<R: Rng + ?Sized>(spec: &GaussianVectorSpec, rng: &mut R) -> Result<Vec<f64>> {
    let s = spec.s_values();
    if s.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("s values must be sorted ascending".into()));
    }
    let mut w = 0.0;
    let mut last = 0.0;
    let mut out = Vec::with_capacity(s.len());
    for &si in s {
        let step: f64 = rng.sample(StandardNormal);
        w += step * (si - last).sqrt();
        last = si;
        let zeta: f64 = rng.sample(StandardNormal);
        out.push(w + zeta * (1.0 - si).sqrt());
    }
    Ok(out)
}

/// `m = ⌈√n⌉`.
pub fn degrees_of_freedom(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("degrees_of_freedom needs n >= 1".into()));
    }
    let r = n.isqrt();
    Ok(if r * r == n { r } else { r + 1 })
}
