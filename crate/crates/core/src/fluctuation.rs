//! Fluctuation observables of scaled diagrams around the limit shape.
//!
//! The size parameter `n` is a real number throughout so the same code serves
//! fixed-size draws (`n = |λ|`) and poissonized draws (`n = t`).

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit_shape::{omega, omega_rotated, snap, theta_of_x, RotatedProfile};
use crate::partition::Partition;
use crate::quadrature::{integrate_adaptive, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluctuationKind {
    Vertical,
    Rotated,
}

/// One evaluation of `Δ` and its normalized version `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSample {
    pub n: f64,
    pub x_or_u: f64,
    pub delta: f64,
    pub y: f64,
    pub kind: FluctuationKind,
}

impl FluctuationSample {
    pub fn vertical(lambda: &Partition, n: f64, x: f64) -> Result<Self> {
        let theta = interior_theta(x)?;
        let delta = delta_vertical(lambda, n, x)?;
        Ok(Self {
            n,
            x_or_u: x,
            delta,
            y: 2.0 * theta * delta / log_scale(n)?,
            kind: FluctuationKind::Vertical,
        })
    }

    pub fn rotated(profile: &RotatedProfile, n: f64, u: f64) -> Result<Self> {
        let delta = delta_rotated(profile, n, u)?;
        Ok(Self {
            n,
            x_or_u: u,
            delta,
            y: PI * delta / log_scale(n)?,
            kind: FluctuationKind::Rotated,
        })
    }
}

fn check_size(n: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::Domain(format!("size parameter must be at least 1, got {n}")));
    }
    Ok(())
}

/// `√log n`, requiring `n ≥ 3`.
fn log_scale(n: f64) -> Result<f64> {
    if !(n >= 3.0) || !n.is_finite() {
        return Err(Error::Domain(format!("normalized statistics need n >= 3, got {n}")));
    }
    Ok(n.ln().sqrt())
}

fn interior_theta(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 2.0) {
        return Err(Error::Domain(format!("x must lie in (0, 2), got {x}")));
    }
    theta_of_x(x)
}

/// `Δ_n(x) = λ(√n x) − √n ω(x)` for `x ∈ [0, 2]`.
pub fn delta_vertical(lambda: &Partition, n: f64, x: f64) -> Result<f64> {
    check_size(n)?;
    if !(0.0..=2.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 2], got {x}")));
    }
    let s = n.sqrt();
    let step = lambda.profile(snap(s * x))? as f64;
    Ok(step - s * omega(x)?)
}

/// `Y_n(x) = 2θ_x Δ_n(x) / √log n`.
pub fn y_vertical(lambda: &Partition, n: f64, x: f64) -> Result<f64> {
    Ok(FluctuationSample::vertical(lambda, n, x)?.y)
}

fn check_profile_scale(profile: &RotatedProfile, n: f64) -> Result<f64> {
    check_size(n)?;
    let s = n.sqrt();
    if (profile.scale() - s).abs() > 1e-12 * s {
        return Err(Error::Domain(format!(
            "profile scale {} does not match sqrt(n) = {s}",
            profile.scale()
        )));
    }
    Ok(s)
}

/// `Δ̃_n(u) = √n (λ̃_n(u) − Ω(u))`.
pub fn delta_rotated(profile: &RotatedProfile, n: f64, u: f64) -> Result<f64> {
    let s = check_profile_scale(profile, n)?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("u must be finite, got {u}")));
    }
    Ok(s * (profile.eval(u) - omega_rotated(u)))
}

/// `Ỹ_n(u) = π Δ̃_n(u) / √log n`.
pub fn y_rotated(profile: &RotatedProfile, n: f64, u: f64) -> Result<f64> {
    Ok(FluctuationSample::rotated(profile, n, u)?.y)
}

/// `U_k(u)` on `[-2, 2]`, where `U_k(2 cos θ) = sin((k+1)θ)/sin θ`.
pub fn chebyshev_u(k: usize, u: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&u) {
        return Err(Error::Domain(format!("chebyshev_u needs |u| <= 2, got {u}")));
    }
    Ok(chebyshev_u_poly(k, u))
}

/// The same recurrence without the domain check; diagram profiles can extend
/// slightly past `|u| = 2`.
pub(crate) fn chebyshev_u_poly(k: usize, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, u);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = u * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `Ω(2 cos θ)` written without `arcsin`, which loses accuracy near `θ = 0`.
fn omega_on_circle(theta: f64) -> f64 {
    2.0 / PI * (2.0 * theta.cos() * (FRAC_PI_2 - theta) + 2.0 * theta.sin())
}

/// `∫ (Ω(u) − |u|) U_{k−1}(u) du`, via `u = 2 cos θ`.
fn limit_moment(k: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&k) {
        return v;
    }
    let kf = k as f64;
    let f = |th: f64| 2.0 * (omega_on_circle(th) - 2.0 * th.cos().abs()) * (kf * th).sin();
    // |cos θ| has a kink at π/2
    let (a, _) = integrate_adaptive(0.0, FRAC_PI_2, 1e-14, f);
    let (b, _) = integrate_adaptive(FRAC_PI_2, PI, 1e-14, f);
    let v = a + b;
    cache.lock().unwrap().insert(k, v);
    v
}

/// `∫ Δ̃_n(u) U_{k−1}(u) du`.
///
/// The diagram part is integrated exactly segment by segment with a Gauss rule
/// of sufficient order, split at `u = 0`; the limit-shape part is a cached
/// adaptive quadrature in `θ`. Both integrands vanish outside the supports.
pub fn kerov_functional(profile: &RotatedProfile, n: f64, k: usize) -> Result<f64> {
    let s = check_profile_scale(profile, n)?;
    if k == 0 {
        return Err(Error::Domain("kerov_functional needs k >= 1".into()));
    }
    let rule = GaussLegendre::new(k / 2 + 2);
    let mut diagram = 0.0;
    for ((u0, v0), (u1, v1)) in profile.segments() {
        let slope = (v1 - v0) / (u1 - u0);
        let g = |u: f64| (v0 + slope * (u - u0) - u.abs()) * chebyshev_u_poly(k - 1, u);
        if u0 < 0.0 && u1 > 0.0 {
            diagram += rule.integrate(u0, 0.0, g) + rule.integrate(0.0, u1, g);
        } else {
            diagram += rule.integrate(u0, u1, g);
        }
    }
    Ok(s * (diagram - limit_moment(k)))
}

/// Start of `I_t = [2√t cos θ_x + z √log t, ∞)` rounded up to the lattice.
pub fn interval_start(t: f64, x: f64, z: f64) -> Result<i64> {
    check_size(t)?;
    let theta = interior_theta(x)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    // θ_x is only known to 1e-12, so snap near-integers before rounding up
    let start = 2.0 * t.sqrt() * theta.cos() + z * t.ln().sqrt();
    Ok(snap(start).ceil() as i64)
}

/// `#(D(λ) ∩ I_t)`.
pub fn count_interval(lambda: &Partition, t: f64, x: f64, z: f64) -> Result<u64> {
    Ok(lambda.count_frobenius_at_least(interval_start(t, x, z)?))
}

/// `∫_0^∞ λ̄_n(x) dx` as the exact fraction `(Σ λ_i) / n`, reduced.
pub fn scaled_area(lambda: &Partition, n: u64) -> Result<(u64, u64)> {
    if n == 0 {
        return Err(Error::Domain("scaled_area needs n >= 1".into()));
    }
    // each column of height λ_i and width 1/√n contributes λ_i/√n · 1/√n
    let cells: u64 = lambda.parts().iter().map(|&p| p as u64).sum();
    let g = gcd(cells, n);
    Ok((cells / g, n / g))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}
