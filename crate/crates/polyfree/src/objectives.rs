//! Convex test functions with known optima and smoothness constants, plus an
//! empirical local-smoothness probe.

use thiserror::Error;

use crate::core::{Objective, SmoothnessInfo};

/// Scalar quartic `(L0·L1²/72)·x⁴ + (L0/4)·x² + f_star`.
///
/// The gradient-dependent smoothness bound `L0 + L1·‖∇f‖` holds globally for
/// this function while no global gradient-Lipschitz constant exists; larger
/// `l1` makes the landscape steeper away from the minimum at 0. For `dim > 1`
/// the polynomial is summed coordinatewise, keeping the optimum at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticSynthetic {
    pub l0: f64,
    pub l1: f64,
    pub f_star: f64,
    pub dim: usize,
}

impl QuarticSynthetic {
    pub fn new(l0: f64, l1: f64, f_star: f64) -> Self {
        Self::with_dim(l0, l1, f_star, 1)
    }

    pub fn with_dim(l0: f64, l1: f64, f_star: f64, dim: usize) -> Self {
        assert!(l0 > 0.0 && l1 > 0.0 && dim > 0);
        QuarticSynthetic { l0, l1, f_star, dim }
    }

    /// Second derivative of the scalar polynomial: `(L0·L1²/6)·x² + L0/2`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        (self.l0 * self.l1 * self.l1 / 6.0) * (x * x) + self.l0 / 2.0
    }

    /// Gradient-Lipschitz constant on the box `[−radius, radius]`:
    /// `L0/2 + (L0·L1²/6)·radius²` (the maximum of the second derivative).
    pub fn box_lipschitz(&self, radius: f64) -> f64 {
        self.l0 / 2.0 + (self.l0 * self.l1 * self.l1 / 6.0) * (radius * radius)
    }
}

/// Scalar value of the quartic at `x`.
pub fn quartic_value(l0: f64, l1: f64, f_star: f64, x: f64) -> f64 {
    let x2 = x * x;
    (l0 * l1 * l1 / 72.0) * (x2 * x2) + (l0 / 4.0) * x2 + f_star
}

/// Scalar derivative of the quartic at `x`: `(L0·L1²/18)·x³ + (L0/2)·x`.
pub fn quartic_gradient(l0: f64, l1: f64, x: f64) -> f64 {
    let x2 = x * x;
    (l0 * l1 * l1 / 18.0) * (x2 * x) + (l0 / 2.0) * x
}

impl Objective for QuarticSynthetic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &xi in x {
            acc += quartic_value(self.l0, self.l1, 0.0, xi);
        }
        acc + self.f_star
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&xi| quartic_gradient(self.l0, self.l1, xi))
            .collect()
    }

    fn optimum(&self) -> Option<(Vec<f64>, f64)> {
        Some((vec![0.0; self.dim], self.f_star))
    }

    fn smoothness(&self) -> Option<SmoothnessInfo> {
        Some(SmoothnessInfo {
            l: None,
            l0: self.l0,
            l1: self.l1,
        })
    }
}

/// Isotropic quadratic `½·a·‖x‖² − b·x`, gradient `a·x − b`.
///
/// The gradient is globally Lipschitz with constant `a`; the minimizer is
/// `b/a` with value `−‖b‖²/(2a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub curvature: f64,
    pub b: Vec<f64>,
}

impl Quadratic {
    pub fn isotropic(curvature: f64, dim: usize) -> Self {
        assert!(curvature > 0.0 && dim > 0);
        Quadratic {
            curvature,
            b: vec![0.0; dim],
        }
    }

    pub fn with_linear_term(curvature: f64, b: Vec<f64>) -> Self {
        assert!(curvature > 0.0 && !b.is_empty());
        Quadratic { curvature, b }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&xi, &bi) in x.iter().zip(&self.b) {
            acc += 0.5 * self.curvature * xi * xi - bi * xi;
        }
        acc
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.b)
            .map(|(&xi, &bi)| self.curvature * xi - bi)
            .collect()
    }

    fn optimum(&self) -> Option<(Vec<f64>, f64)> {
        let xs: Vec<f64> = self.b.iter().map(|&bi| bi / self.curvature).collect();
        let b_norm_sq: f64 = self.b.iter().map(|&bi| bi * bi).sum();
        Some((xs, -0.5 * b_norm_sq / self.curvature))
    }

    fn smoothness(&self) -> Option<SmoothnessInfo> {
        Some(SmoothnessInfo {
            l: Some(self.curvature),
            l0: self.curvature,
            l1: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("probe radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// Empirical lower bound on the local gradient-Lipschitz constant at `x`:
/// the maximum of `‖∇f(x)−∇f(y)‖/‖x−y‖` over deterministic probes
/// `y = x ± radius·eᵢ` and `y = x ± radius·d` with `d` the normalized
/// all-ones direction. At most `n_probes` probes are evaluated, in that
/// fixed order.
pub fn estimate_local_smoothness(
    obj: &dyn Objective,
    x: &[f64],
    radius: f64,
    n_probes: usize,
) -> Result<f64, ProbeError> {
    if radius <= 0.0 {
        return Err(ProbeError::NonPositiveRadius(radius));
    }
    assert!(n_probes >= 1);
    let d = obj.dim();
    let gx = obj.gradient(x);
    let mut probes: Vec<Vec<f64>> = Vec::with_capacity(2 * d + 2);
    for i in 0..d {
        for sign in [1.0, -1.0] {
            let mut y = x.to_vec();
            y[i] += sign * radius;
            probes.push(y);
        }
    }
    let diag = radius / (d as f64).sqrt();
    for sign in [1.0, -1.0] {
        let y: Vec<f64> = x.iter().map(|&xi| xi + sign * diag).collect();
        probes.push(y);
    }
    probes.truncate(n_probes);

    let mut best = 0.0f64;
    for y in &probes {
        let gy = obj.gradient(y);
        let num: f64 = gx
            .iter()
            .zip(&gy)
            .map(|(a, b)| {
                let diff = a - b;
                diff * diff
            })
            .sum::<f64>()
            .sqrt();
        let den: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let diff = a - b;
                diff * diff
            })
            .sum::<f64>()
            .sqrt();
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, rel: f64) {
        let scale = 1.0f64.max(a.abs()).max(b.abs());
        assert!(
            (a - b).abs() <= rel * scale,
            "expected {a} ≈ {b} (rel {rel})"
        );
    }

    #[test]
    fn quartic_value_oracles() {
        // 625/72 + 25/4 + 1 at (1,1,1,x=5)
        assert_close(quartic_value(1.0, 1.0, 1.0, 5.0), 625.0 / 72.0 + 25.0 / 4.0 + 1.0, 1e-14);
        // zero kills both monomials
        assert_eq!(quartic_value(3.0, 7.0, 2.5, 0.0), 2.5);
        // 100·625/72 + 25/4 + 1 at (1,10,1,x=5)
        assert_close(
            quartic_value(1.0, 10.0, 1.0, 5.0),
            62500.0 / 72.0 + 25.0 / 4.0 + 1.0,
            1e-14,
        );
    }

    #[test]
    fn quartic_gradient_oracles() {
        assert_close(quartic_gradient(1.0, 1.0, 5.0), 125.0 / 18.0 + 2.5, 1e-14);
        assert_eq!(quartic_gradient(1.0, 1.0, 0.0), 0.0);
        assert_eq!(quartic_gradient(4.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let cases = [
            QuarticSynthetic::new(1.0, 1.0, 1.0),
            QuarticSynthetic::new(1.0, 10.0, 1.0),
            QuarticSynthetic::new(2.5, 100.0, -3.0),
        ];
        let h = 1e-5;
        for obj in cases {
            for x in [-5.0, -1.3, -0.1, 0.2, 0.9, 3.7, 5.0] {
                let fd = (obj.value(&[x + h]) - obj.value(&[x - h])) / (2.0 * h);
                let g = obj.gradient(&[x])[0];
                let scale = 1.0f64.max(g.abs());
                assert!(
                    (fd - g).abs() <= 1e-6 * scale,
                    "finite difference {fd} vs gradient {g} at x={x}"
                );
            }
        }
        let quad = Quadratic::with_linear_term(2.0, vec![1.0, -3.0]);
        for x in [[0.5, -2.0], [3.0, 4.0]] {
            let g = quad.gradient(&x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (quad.value(&xp) - quad.value(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * 1.0f64.max(g[i].abs()));
            }
        }
    }

    #[test]
    fn quadratic_optimum_and_lower_bound() {
        let q = Quadratic::with_linear_term(2.0, vec![4.0]);
        let (xs, fs) = q.optimum().unwrap();
        assert_eq!(xs, vec![2.0]);
        assert_eq!(fs, -4.0);
        assert!(q.gradient(&xs)[0].abs() <= 1e-9);
        for x in -20..=20 {
            assert!(q.value(&[x as f64 * 0.5]) >= fs - 1e-12);
        }
    }

    #[test]
    fn quartic_optimum_is_origin() {
        let q = QuarticSynthetic::with_dim(1.0, 10.0, 1.0, 3);
        let (xs, fs) = q.optimum().unwrap();
        assert_eq!(xs, vec![0.0; 3]);
        assert_eq!(fs, 1.0);
        let gn: f64 = q.gradient(&xs).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(gn <= 1e-9);
        for x in [-5.0, -0.7, 0.3, 2.0] {
            assert!(q.value(&[x, x, x]) >= fs - 1e-12);
        }
    }

    #[test]
    fn local_smoothness_probe_on_quadratic_recovers_curvature() {
        let q = Quadratic::isotropic(2.0, 2);
        let est = estimate_local_smoothness(&q, &[0.3, -1.7], 0.01, 6).unwrap();
        assert_close(est, 2.0, 1e-12);
        let est0 = estimate_local_smoothness(&q, &[0.0, 0.0], 0.5, 6).unwrap();
        assert_eq!(est0, 2.0);
    }

    #[test]
    fn local_smoothness_probe_on_quartic_tracks_second_derivative() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        let at0 = estimate_local_smoothness(&q, &[0.0], 0.01, 4).unwrap();
        assert!((0.5..=0.5 + 1e-3).contains(&at0), "got {at0}");
        let at5 = estimate_local_smoothness(&q, &[5.0], 0.01, 4).unwrap();
        let truth = q.second_derivative(5.0);
        assert_close(truth, 25.0 / 6.0 + 0.5, 1e-14);
        assert!((at5 - truth).abs() <= 0.01 * truth, "got {at5}, want ≈{truth}");
    }

    #[test]
    fn probe_rejects_bad_radius() {
        let q = Quadratic::isotropic(1.0, 1);
        assert!(matches!(
            estimate_local_smoothness(&q, &[0.0], 0.0, 1),
            Err(ProbeError::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn box_lipschitz_oracle() {
        let q = QuarticSynthetic::new(1.0, 1.0, 1.0);
        assert_close(q.box_lipschitz(5.0), 0.5 + 25.0 / 6.0, 1e-14);
    }
}
