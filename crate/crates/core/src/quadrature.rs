//! Gauss–Legendre panel quadrature with geometric grading.
//!
//! Every scalar integral in the crate has an integrable endpoint singularity
//! (powers of θ or u times slowly varying logarithms). Geometric panels
//! [h/2, h] keep the integrand smooth relative to the panel length, so a
//! fixed-order Gauss rule per panel converges geometrically in the number of
//! levels.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Panel = (f64, f64);

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// (node, weight) pairs mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels [top·2^{-j-1}, top·2^{-j}] for j = 0..levels, in ascending order.
pub fn graded_toward_zero(top: f64, levels: usize) -> Vec<Panel> {
    let mut panels: Vec<Panel> = (0..levels)
        .map(|j| {
            let hi = top * 0.5f64.powi(j as i32);
            (0.5 * hi, hi)
        })
        .collect();
    panels.reverse();
    panels
}

/// Doubling panels from `lower` up to `upper`; the last panel is truncated at `upper`.
pub fn graded_upward(lower: f64, upper: f64) -> Vec<Panel> {
    let mut panels = Vec::new();
    if !(upper > lower) {
        return panels;
    }
    let mut a = lower;
    while a < upper {
        let b = (2.0 * a).min(upper);
        // Avoid a sliver at the top.
        let b = if upper - b < 1e-3 * (b - a) { upper } else { b };
        panels.push((a, b));
        a = b;
    }
    panels
}

/// Split panels at interior points (points on panel boundaries are ignored).
pub fn split_panels(panels: &[Panel], points: &[f64]) -> Vec<Panel> {
    let mut out = Vec::with_capacity(panels.len() + points.len());
    for &(a, b) in panels {
        let mut cuts: Vec<f64> = points
            .iter()
            .copied()
            .filter(|&p| p > a && p < b && (p - a) > 1e-14 * b && (b - p) > 1e-14 * b)
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut lo = a;
        for c in cuts {
            out.push((lo, c));
            lo = c;
        }
        out.push((lo, b));
    }
    out
}

/// Every panel cut in half (the "doubled panel count" refinement).
pub fn halve(panels: &[Panel]) -> Vec<Panel> {
    panels
        .iter()
        .flat_map(|&(a, b)| {
            let m = 0.5 * (a + b);
            [(a, m), (m, b)]
        })
        .collect()
}

pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &GaussLegendre, panels: &[Panel], mut f: F) -> f64 {
    panels.iter().map(|&(a, b)| rule.integrate(a, b, &mut f)).sum()
}

/// Quadrature value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Integrate on `panels` and on the halved panels; the difference plus the
/// caller-supplied truncation `tail` is the error estimate. Fails when the
/// estimate exceeds `rel_tol` times the integral of |f| plus `abs_tol`.
pub fn integrate_refined<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    panels: &[Panel],
    mut f: F,
    tail: f64,
    (rel_tol, abs_tol): (f64, f64),
    what: &str,
) -> Result<Estimate> {
    let coarse = integrate_panels(rule, panels, &mut f);
    let fine_panels = halve(panels);
    let mut fine = 0.0;
    let mut magnitude = 0.0;
    for &(a, b) in &fine_panels {
        for (x, w) in rule.mapped(a, b) {
            let v = f(x);
            fine += w * v;
            magnitude += w * v.abs();
        }
    }
    let error = (fine - coarse).abs() + tail.abs();
    if !fine.is_finite() || error > rel_tol * magnitude + abs_tol {
        return Err(Error::NonConvergence { what: what.to_string(), estimate: error });
    }
    Ok(Estimate { value: fine, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for order in [1, 2, 5, 8, 16] {
            let rule = GaussLegendre::new(order);
            let deg = 2 * order - 1;
            let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!(((got - exact) / exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for order in [3, 8, 16, 32] {
            let rule = GaussLegendre::new(order);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn graded_panels_resolve_inverse_sqrt() {
        let rule = GaussLegendre::new(16);
        let panels = graded_toward_zero(1.0, 100);
        let got = integrate_panels(&rule, &panels, |x| x.powf(-0.5));
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn upward_panels_cover_interval() {
        let p = graded_upward(0.01, 1.5);
        assert_eq!(p.first().unwrap().0, 0.01);
        assert_eq!(p.last().unwrap().1, 1.5);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn split_inserts_breakpoints() {
        let p = split_panels(&[(0.0, 1.0), (1.0, 2.0)], &[0.5, 1.0, 1.25]);
        assert_eq!(p, vec![(0.0, 0.5), (0.5, 1.0), (1.0, 1.25), (1.25, 2.0)]);
    }
}
