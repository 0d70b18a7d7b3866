//! The Vershik–Kerov–Logan–Shepp limit shape and rotated diagram profiles.
//!
//! In original coordinates the limit curve is `y = ω(x)`, given
//! parametrically by `x = (2/π)(sin θ − θ cos θ)`, `y = x + 2 cos θ`. In the
//! rotated coordinates `u = x − y`, `v = x + y` it is `v = Ω(u)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// `x(θ) = (2/π)(sin θ − θ cos θ)`, increasing from 0 to 2 on `[0, π]`.
pub fn parametric_x(theta: f64) -> f64 {
    2.0 / PI * (theta.sin() - theta * theta.cos())
}

/// Inverts [`parametric_x`] by bisection to absolute tolerance `1e-12`.
///
/// The derivative `(2/π) θ sin θ` vanishes at both ends, so Newton's method
/// is not used.
pub fn theta_of_x(x: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&x) {
        return Err(Error::Domain(format!("theta_of_x needs x in [0, 2], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 2.0 {
        return Ok(PI);
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if parametric_x(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ω(x)`: `x + 2 cos θ_x` on `[0, 2]`, zero beyond.
pub fn omega(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("omega needs x >= 0, got {x}")));
    }
    if x >= 2.0 {
        return Ok(0.0);
    }
    Ok((x + 2.0 * theta_of_x(x)?.cos()).max(0.0))
}

/// `Ω(u)`.
pub fn omega_rotated(u: f64) -> f64 {
    let a = u.abs();
    if a >= 2.0 {
        return a;
    }
    // 4 − u² factored to keep precision next to |u| = 2
    let root = ((2.0 - a) * (2.0 + a)).sqrt();
    2.0 / PI * (u * (u / 2.0).asin() + root)
}

/// `θ = arccos(u/2)` for `|u| ≤ 2`.
pub fn theta_of_u(u: f64) -> Result<f64> {
    if !(-2.0..=2.0).contains(&u) {
        return Err(Error::Domain(format!("theta_of_u needs |u| <= 2, got {u}")));
    }
    Ok((u / 2.0).acos())
}

/// The boundary of a scaled Young diagram in rotated coordinates.
///
/// Vertices are stored on the integer lattice of the unscaled diagram
/// (`u = x − y`, `v = x + y`) so areas can be computed exactly; evaluation
/// divides by `scale`. Consecutive segments alternate between slope `+1` and
/// `−1`, and outside the support the profile equals `|u|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedProfile {
    vertices: Vec<(i64, i64)>,
    scale: f64,
    weight: u64,
}

impl RotatedProfile {
    /// Rotates the boundary of `lambda` scaled by `1/scale`.
    pub fn new(lambda: &Partition, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("profile scale must be positive, got {scale}")));
        }
        let parts = lambda.parts();
        // walk the staircase from (0, λ_1) to (len, 0), keeping only corners
        let mut vertices = Vec::with_capacity(2 * parts.len() + 2);
        if parts.is_empty() {
            vertices.push((0, 0));
        } else {
            let top = parts[0] as i64;
            vertices.push((-top, top));
            for (i, &h) in parts.iter().enumerate() {
                let x = i as i64 + 1;
                let h = h as i64;
                let next = parts.get(i + 1).map_or(0, |&p| p as i64);
                if next < h {
                    // end of a horizontal run at (x, h), then down to (x, next)
                    vertices.push((x - h, x + h));
                    vertices.push((x - next, x + next));
                }
            }
        }
        Ok(Self {
            vertices,
            scale,
            weight: lambda.weight(),
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Vertices `(u, v)` in scaled coordinates.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        self.vertices
            .iter()
            .map(|&(u, v)| (u as f64 / self.scale, v as f64 / self.scale))
            .collect()
    }

    /// Unscaled lattice vertices.
    pub fn lattice_vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }

    /// Support `[u_min, u_max]` in scaled coordinates.
    pub fn support(&self) -> (f64, f64) {
        let first = self.vertices[0].0 as f64 / self.scale;
        let last = self.vertices[self.vertices.len() - 1].0 as f64 / self.scale;
        (first, last)
    }

    /// `λ̃(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        let s = self.scale;
        let (lo, hi) = self.support();
        if u <= lo || u >= hi {
            return u.abs();
        }
        let us = u * s;
        let k = self.vertices.partition_point(|&(vu, _)| (vu as f64) <= us);
        let (u0, v0) = self.vertices[k - 1];
        let (u1, v1) = self.vertices[k];
        let w = (us - u0 as f64) / (u1 - u0) as f64;
        (v0 as f64 + w * (v1 - v0) as f64) / s
    }

    /// `2 ∫(λ̃ − |u|) du` on the unscaled lattice, an exact integer equal to
    /// `4|λ|`.
    pub fn doubled_lattice_area(&self) -> i64 {
        let mut total = 0i64;
        for w in self.vertices.windows(2) {
            let (u0, v0) = w[0];
            let (u1, v1) = w[1];
            // trapezoid under the profile, doubled
            let under = (u1 - u0) * (v0 + v1);
            // doubled ∫|u| over [u0, u1], split at 0
            let abs_int = |a: i64, b: i64| -> i64 {
                if a >= 0 {
                    b * b - a * a
                } else if b <= 0 {
                    a * a - b * b
                } else {
                    a * a + b * b
                }
            };
            total += under - abs_int(u0, u1);
        }
        total
    }

    /// `∫(λ̃(u) − |u|) du` in scaled coordinates, `2|λ|/scale²`.
    pub fn area(&self) -> f64 {
        self.doubled_lattice_area() as f64 / (2.0 * self.scale * self.scale)
    }

    /// Segments in scaled coordinates.
    pub fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let s = self.scale;
        self.vertices.windows(2).map(move |w| {
            (
                (w[0].0 as f64 / s, w[0].1 as f64 / s),
                (w[1].0 as f64 / s, w[1].1 as f64 / s),
            )
        })
    }
}

/// `λ̄_n(x) = λ(√n x)/√n` for a diagram scaled by `scale = √n`.
pub fn scaled_profile(lambda: &Partition, scale: f64, x: f64) -> Result<f64> {
    Ok(lambda.profile(snap(scale * x))? as f64 / scale)
}

/// Rounds arguments that are integers up to floating-point noise, so the
/// left-continuous convention applies at the step points.
pub(crate) fn snap(s: f64) -> f64 {
    let r = s.round();
    if (s - r).abs() <= 1e-9 * s.abs().max(1.0) {
        r
    } else {
        s
    }
}

/// `sup_{x ≥ 0} |λ̄_n(x) − ω(x)|`.
///
/// Since `λ̄_n` is a left-continuous step function and `ω` is decreasing,
/// the supremum is attained at a step point `x_i = i/√n` or as the right
/// limit just after it; both are examined for `i = 0..=max(len, ⌈2√n⌉)`.
pub fn sup_distance(lambda: &Partition, scale: f64) -> Result<f64> {
    let last = (lambda.len() as f64).max((2.0 * scale).ceil()) as usize;
    let mut sup = 0.0f64;
    for i in 0..=last {
        let x = i as f64 / scale;
        let w = omega(x)?;
        // value on (x_{i-1}, x_i] and the right limit at x_i
        let left = lambda.part(i.max(1)) as f64 / scale;
        let right = lambda.part(i + 1) as f64 / scale;
        sup = sup.max((left - w).abs()).max((right - w).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn theta_endpoints() {
        assert_eq!(theta_of_x(0.0).unwrap(), 0.0);
        assert_eq!(theta_of_x(2.0).unwrap(), PI);
        assert!((theta_of_x(2.0 / PI).unwrap() - PI / 2.0).abs() < 1e-11);
        assert!(theta_of_x(-0.1).is_err());
        assert!(theta_of_x(2.1).is_err());
    }

    #[test]
    fn omega_values() {
        assert!((omega(0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(omega(2.0).unwrap(), 0.0);
        assert_eq!(omega(3.5).unwrap(), 0.0);
        assert!((omega(2.0 / PI).unwrap() - 2.0 / PI).abs() < 1e-11);
        assert!(omega(-1.0).is_err());
    }

    #[test]
    fn omega_rotated_values() {
        assert!((omega_rotated(0.0) - 4.0 / PI).abs() < 1e-15);
        assert!((omega_rotated(2.0) - 2.0).abs() < 1e-15);
        assert!((omega_rotated(-2.0) - 2.0).abs() < 1e-15);
        assert_eq!(omega_rotated(3.0), 3.0);
        let below = omega_rotated(2.0 - 1e-12);
        assert!((below - 2.0).abs() < 1e-11);
    }

    #[test]
    fn theta_of_u_values() {
        assert_eq!(theta_of_u(2.0).unwrap(), 0.0);
        assert!((theta_of_u(-2.0).unwrap() - PI).abs() < 1e-15);
        assert!((theta_of_u(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(theta_of_u(2.5).is_err());
    }

    #[test]
    fn single_cell_profile() {
        let prof = RotatedProfile::new(&p(&[1]), 1.0).unwrap();
        assert_eq!(prof.breakpoints(), vec![(-1.0, 1.0), (0.0, 2.0), (1.0, 1.0)]);
        assert_eq!(prof.eval(0.0), 2.0);
        assert_eq!(prof.eval(0.5), 1.5);
        assert_eq!(prof.eval(-3.0), 3.0);
        assert_eq!(prof.doubled_lattice_area(), 4);
    }

    #[test]
    fn empty_profile_is_abs() {
        let prof = RotatedProfile::new(&Partition::empty(), 1.0).unwrap();
        for u in [-2.0, -0.3, 0.0, 0.7, 5.0] {
            assert_eq!(prof.eval(u), f64::abs(u));
        }
        assert_eq!(prof.area(), 0.0);
        assert!(RotatedProfile::new(&p(&[1]), 0.0).is_err());
    }

    #[test]
    fn profile_slopes_alternate() {
        let prof = RotatedProfile::new(&p(&[5, 5, 3, 1, 1]), 1.0).unwrap();
        let v = prof.lattice_vertices();
        let slopes: Vec<i64> = v.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        for s in &slopes {
            assert!(*s == 1 || *s == -1);
        }
        for w in slopes.windows(2) {
            assert_ne!(w[0], w[1]);
        }
        assert_eq!(prof.doubled_lattice_area(), 4 * 15);
    }

    #[test]
    fn staircase_sup_distance_is_small() {
        let n = 400u32;
        let s = (n as f64).sqrt();
        // staircase built from ω itself
        let parts: Vec<u32> = (1..)
            .map(|i| (s * omega(i as f64 / s).unwrap()).ceil() as u32)
            .take_while(|&v| v > 0)
            .collect();
        let lambda = Partition::new(parts).unwrap();
        // away from the edge the error is one lattice step plus the drop of ω
        // across a column; the first column carries the x^(2/3) cusp
        let mut bound = 0.0f64;
        for i in 1..=(2.0 * s) as usize {
            let (a, b) = (omega((i - 1) as f64 / s).unwrap(), omega(i as f64 / s).unwrap());
            bound = bound.max(a - b + 1.0 / s);
        }
        let d = sup_distance(&lambda, s).unwrap();
        assert!(d <= bound + 1e-12, "{d} > {bound}");
        assert!(bound < 0.5, "bound {bound}");
    }
}
