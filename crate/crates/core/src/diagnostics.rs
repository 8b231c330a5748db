//! Coercivity margins, M_δ-weighted norms and radial decay profiles of recorded states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::CharGrid;
use crate::error::{Error, Result};
use crate::vec3::{dot, norm, Vec3};

/// Parameters of M_δ(t, ξ) = ⟨ξ⟩^{Nt−4} ⟨δξ⟩^{−2N₀}, N₀ = NT/2 + 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingWeight {
    pub n: u32,
    pub horizon: f64,
    pub delta: f64,
}

impl Default for SmoothingWeight {
    fn default() -> Self {
        SmoothingWeight { n: 4, horizon: 1.0, delta: 1e-2 }
    }
}

impl SmoothingWeight {
    pub fn new(n: u32, horizon: f64, delta: f64) -> Result<Self> {
        let w = SmoothingWeight { n, horizon, delta };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("weight order N must be a positive integer".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn n0(&self) -> f64 {
        self.n as f64 * self.horizon / 2.0 + 2.0
    }

    /// Exponents (Nt − 4, −2N₀) applied to ⟨ξ⟩² and ⟨δξ⟩² halved.
    fn exponents(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok((self.n as f64 * t - 4.0, -2.0 * self.n0()))
    }
}

/// M_δ(t, ξ).
pub fn m_delta(w: &SmoothingWeight, t: f64, xi: Vec3) -> Result<f64> {
    w.validate()?;
    let (a, b) = w.exponents(t)?;
    Ok(weight_at(dot(xi, xi), w.delta, a, b))
}

#[inline]
fn weight_at(r2: f64, delta: f64, a: f64, b: f64) -> f64 {
    (0.5 * a * r2.ln_1p() + 0.5 * b * (delta * delta * r2).ln_1p()).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// min over records and nodes Δ ≤ |ξ| ≤ R of (1 − |ψ|)/min(1, |ξ|²).
    pub d_t: f64,
    pub witness_t: f64,
    pub witness_xi: Vec3,
    /// min of (1 − |ψ|)/|ξ|² over Δ ≤ |ξ| ≤ 1.
    pub inner_min: f64,
    /// min of 1 − |ψ| over 1 < |ξ| ≤ R; +∞ when that shell holds no node.
    pub outer_min: f64,
    pub excluded_radius: f64,
    pub records: usize,
}

/// Coercivity constant over recorded states `(t, grid)`.
pub fn coercivity_margin(states: &[(f64, &CharGrid)]) -> Result<CoercivityReport> {
    let first = states.first().ok_or_else(|| Error::Usage("coercivity needs at least one recorded state".into()))?;
    let excluded = first.1.spacing();
    let mut rep = CoercivityReport {
        d_t: f64::INFINITY,
        witness_t: first.0,
        witness_xi: [0.0; 3],
        inner_min: f64::INFINITY,
        outer_min: f64::INFINITY,
        excluded_radius: excluded,
        records: states.len(),
    };
    for &(t, grid) in states {
        if !grid.same_geometry(first.1) {
            return Err(Error::Usage("recorded states have different grid geometry".into()));
        }
        let r_min = grid.spacing() * (1.0 - 1e-12);
        let r_max = grid.radius() * (1.0 + 1e-12);
        for (idx, v) in grid.values().iter().enumerate() {
            let xi = grid.node_at(idx);
            let r2 = dot(xi, xi);
            let r = r2.sqrt();
            if r < r_min || r > r_max {
                continue;
            }
            let gap = 1.0 - v.norm();
            let ratio = gap / r2.min(1.0);
            if ratio < rep.d_t {
                rep.d_t = ratio;
                rep.witness_t = t;
                rep.witness_xi = xi;
            }
            if r <= 1.0 {
                rep.inner_min = rep.inner_min.min(gap / r2);
            } else {
                rep.outer_min = rep.outer_min.min(gap);
            }
        }
    }
    if !rep.d_t.is_finite() {
        return Err(Error::Usage("grid holds no node with spacing ≤ |ξ| ≤ R".into()));
    }
    // Rounding can leave 1 − |ψ| a hair below zero for |ψ| ≡ 1.
    rep.d_t = rep.d_t.max(0.0);
    Ok(rep)
}

/// Riemann sum Σ |M_δ(t, ξ) ψ(t, ξ)|² Δ³ over nodes with |ξ| ≤ R.
pub fn weighted_l2(state: &CharGrid, w: &SmoothingWeight, t: f64) -> Result<f64> {
    w.validate()?;
    let (a, b) = w.exponents(t)?;
    Ok(ball_sum(state, |idx| state.values()[idx].norm_sqr(), w.delta, a, b))
}

fn ball_sum<F: Fn(usize) -> f64 + Sync>(state: &CharGrid, modsq: F, delta: f64, a: f64, b: f64) -> f64 {
    let h = state.spacing();
    let lim = state.radius() * (1.0 + 1e-12);
    let sum: f64 = (0..state.len())
        .into_par_iter()
        .map(|idx| {
            let xi = state.node_at(idx);
            let r2 = dot(xi, xi);
            if r2.sqrt() > lim {
                return 0.0;
            }
            let m = weight_at(r2, delta, a, b);
            m * m * modsq(idx)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    sum * h * h * h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRow {
    pub t: f64,
    pub weighted_l2: f64,
    /// The same sum for ψ ≡ 1.
    pub baseline: f64,
    /// y(0) e^{C t} with the fitted C.
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingTrace {
    pub weight: SmoothingWeight,
    pub rows: Vec<SmoothingRow>,
    /// Smallest C with y(t) ≤ y(0)e^{C(t−t₀)} at every record.
    pub fitted_c: f64,
    /// Every y(t) is finite and ≤ 1.1·y(0)e^{Ct}.
    pub valid: bool,
}

impl SmoothingTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,weighted_l2,baseline,envelope\n");
        for r in &self.rows {
            out.push_str(&format!("{:.6},{:.12e},{:.12e},{:.12e}\n", r.t, r.weighted_l2, r.baseline, r.envelope));
        }
        out
    }

    /// JSON footer with the fitted constant and validity flag.
    pub fn footer(&self) -> serde_json::Value {
        serde_json::json!({
            "fitted_c": self.fitted_c,
            "valid": self.valid,
            "n": self.weight.n,
            "horizon": self.weight.horizon,
            "delta": self.weight.delta,
        })
    }
}

/// Weighted trace y(t) over recorded states, with the fitted Gronwall constant.
pub fn smoothing_trace(states: &[(f64, &CharGrid)], w: &SmoothingWeight) -> Result<SmoothingTrace> {
    w.validate()?;
    if states.is_empty() {
        return Err(Error::Usage("smoothing trace needs at least one recorded state".into()));
    }
    let mut ys = Vec::with_capacity(states.len());
    let mut baselines = Vec::with_capacity(states.len());
    for &(t, grid) in states {
        let (a, b) = w.exponents(t)?;
        ys.push(weighted_l2(grid, w, t)?);
        baselines.push(ball_sum(grid, |_| 1.0, w.delta, a, b));
    }
    let y0 = ys[0];
    let t0 = states[0].0;
    let mut fitted_c = f64::NEG_INFINITY;
    for (k, &(t, _)) in states.iter().enumerate().skip(1) {
        let dt = t - t0;
        if dt > 0.0 && y0 > 0.0 && ys[k] > 0.0 {
            fitted_c = fitted_c.max((ys[k] / y0).ln() / dt);
        }
    }
    if !fitted_c.is_finite() {
        fitted_c = 0.0;
    }
    let rows: Vec<SmoothingRow> = states
        .iter()
        .zip(ys.iter().zip(&baselines))
        .map(|(&(t, _), (&y, &base))| SmoothingRow {
            t,
            weighted_l2: y,
            baseline: base,
            envelope: y0 * (fitted_c * (t - t0)).exp(),
        })
        .collect();
    let valid = rows.iter().all(|r| r.weighted_l2.is_finite() && r.weighted_l2 <= 1.1 * r.envelope * (1.0 + 1e-12));
    Ok(SmoothingTrace { weight: *w, rows, fitted_c, valid })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellRow {
    pub r_lo: f64,
    pub r_hi: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub shells: Vec<ShellRow>,
    /// Largest integer k ≤ `MAX_DECAY_ORDER` with sup·⟨r_lo⟩^k ≤ 1 on every outer shell.
    pub decay_order: u32,
}

pub const MAX_DECAY_ORDER: u32 = 64;

/// sup |ψ| on `count` equal-width shells of [0, R]; outer shells are those with r_lo ≥ R/2.
pub fn decay_profile(state: &CharGrid, count: usize) -> Result<DecayProfile> {
    if count == 0 {
        return Err(Error::Usage("decay profile needs at least one shell".into()));
    }
    let radius = state.radius();
    let width = radius / count as f64;
    let mut sups = vec![0.0f64; count];
    for (idx, v) in state.values().iter().enumerate() {
        let r = norm(state.node_at(idx));
        if r > radius * (1.0 + 1e-12) {
            continue;
        }
        let j = ((r / width) as usize).min(count - 1);
        sups[j] = sups[j].max(v.norm());
    }
    let shells: Vec<ShellRow> = sups
        .iter()
        .enumerate()
        .map(|(j, &sup)| ShellRow { r_lo: j as f64 * width, r_hi: (j + 1) as f64 * width, sup })
        .collect();
    let outer: Vec<&ShellRow> = shells.iter().filter(|s| s.r_lo >= 0.5 * radius * (1.0 - 1e-12)).collect();
    let fits = |k: u32| {
        outer.iter().all(|s| s.sup == 0.0 || s.sup.ln() + k as f64 * 0.5 * (s.r_lo * s.r_lo).ln_1p() <= 1e-12)
    };
    let decay_order = (0..=MAX_DECAY_ORDER).take_while(|&k| fits(k)).last().unwrap_or(0);
    Ok(DecayProfile { shells, decay_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::{example_initial_datum, AnalyticCharFn, MeasureSpec};

    fn grid(spec: MeasureSpec, r: f64, n: usize) -> CharGrid {
        CharGrid::sample(&AnalyticCharFn::new(spec).unwrap(), r, n).unwrap()
    }

    #[test]
    fn weight_basics() {
        let w = SmoothingWeight::default();
        assert_eq!(w.n0(), 4.0);
        assert_eq!(m_delta(&w, 0.5, [0.0; 3]).unwrap(), 1.0);
        assert!(m_delta(&w, 1.5, [1.0, 0.0, 0.0]).is_err());
        let tiny = SmoothingWeight::new(4, 1.0, 1e-9).unwrap();
        let xi = [1.0, 2.0, 0.5];
        let want = (1.0 + dot(xi, xi)).powf(-2.0);
        assert!((m_delta(&tiny, 0.0, xi).unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_decay_exponent_at_horizon() {
        let w = SmoothingWeight::new(4, 1.0, 0.1).unwrap();
        let (a, b) = (1e6, 1e7);
        let slope = (m_delta(&w, 1.0, [b, 0.0, 0.0]).unwrap() / m_delta(&w, 1.0, [a, 0.0, 0.0]).unwrap()).ln() / 10f64.ln();
        // (NT − 4) − 2N₀ = −8.
        assert!((slope + 8.0).abs() < 1e-6, "{slope}");
    }

    #[test]
    fn maxwellian_coercivity() {
        let g = grid(MeasureSpec::maxwellian(), 3.0, 25);
        let rep = coercivity_margin(&[(0.0, &g)]).unwrap();
        // (1 − e^{−r²/2})/min(1, r²) is decreasing on (0, 1] and increasing beyond.
        let c = g.coords();
        let mut r2s = Vec::new();
        for x in c {
            for y in c {
                for z in c {
                    r2s.push(x * x + y * y + z * z);
                }
            }
        }
        let best = r2s
            .into_iter()
            .filter(|&r2| r2 >= g.spacing().powi(2) * (1.0 - 1e-12) && r2 <= 9.0 * (1.0 + 1e-12))
            .map(|r2| (1.0 - (-r2 / 2.0).exp()) / r2.min(1.0))
            .fold(f64::INFINITY, f64::min);
        assert!((rep.d_t - best).abs() < 1e-14);
        assert!((rep.d_t - (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn dirac_has_zero_margin() {
        let g = grid(MeasureSpec::dirac([0.0; 3]), 2.0, 9);
        assert_eq!(coercivity_margin(&[(0.0, &g)]).unwrap().d_t, 0.0);
    }

    #[test]
    fn example_constants_hold_on_grid() {
        let g = grid(example_initial_datum(), 6.0, 31);
        let rep = coercivity_margin(&[(0.0, &g)]).unwrap();
        assert!(rep.inner_min >= 1.0 / (3.0 * std::f64::consts::PI.powi(2)) - 1e-6);
        assert!(rep.outer_min >= 0.5 * (1.0 - (-0.5f64).exp()) - 1e-6);
    }

    #[test]
    fn weighted_l2_of_ones_matches_radial_integral() {
        let n = 61;
        let g = grid(MeasureSpec::dirac([0.0; 3]), 4.0, n);
        let w = SmoothingWeight::new(4, 1.0, 1e-12).unwrap();
        let y = weighted_l2(&g, &w, 0.0).unwrap();
        // 4π ∫_0^4 r²(1+r²)^{-4} dr with antiderivative of r²/(1+r²)^4.
        let f = |r: f64| {
            let u = 1.0 + r * r;
            (r.atan() + r * (3.0 * r.powi(4) + 8.0 * r * r - 3.0) / (3.0 * u.powi(3))) / 16.0
        };
        let exact = 4.0 * std::f64::consts::PI * (f(4.0) - f(0.0));
        assert!((y / exact - 1.0).abs() < 0.05, "y {y} exact {exact}");
    }

    #[test]
    fn trace_of_ones_equals_baseline() {
        let g = grid(MeasureSpec::dirac([0.0; 3]), 3.0, 13);
        let states: Vec<(f64, &CharGrid)> = (0..=10).map(|k| (k as f64 / 10.0, &g)).collect();
        let tr = smoothing_trace(&states, &SmoothingWeight::default()).unwrap();
        assert!(tr.rows.iter().all(|r| r.weighted_l2 == r.baseline));
        assert!(tr.fitted_c > 0.0);
    }

    #[test]
    fn decay_orders() {
        let ones = decay_profile(&grid(MeasureSpec::dirac([0.0; 3]), 4.0, 17), 8).unwrap();
        assert_eq!(ones.decay_order, 0);
        assert!(ones.shells.iter().all(|s| s.sup == 1.0));
        let m = decay_profile(&grid(MeasureSpec::maxwellian(), 8.0, 33), 8).unwrap();
        assert!(m.decay_order >= 5);
    }
}
