//! Debye–Yukawa angular cross section `b(cos θ) = K θ^{-2} (log(2/θ))^{2/s-1}`
//! on `(0, π/2]`, its Grad cutoffs, and the scalar integrals built from it.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{graded_toward_zero, graded_upward, integrate_refined, split_panels, Estimate, GaussLegendre, Panel};
use crate::special::{gamma, gamma_upper};

/// Tolerance pair used by the angular integrals.
const ANGULAR_TOL: (f64, f64) = (1e-10, 1e-13);
/// Truncation target for the part of an integral below the finest panel.
const TAIL_TARGET: f64 = 1e-16;
/// Finest angle ever touched; keeps θ^{-2} well inside f64 range.
const FLOOR_EXPONENT: usize = 480;

/// Geometric panel grading θ_j = top·2^{-j}, j < `levels`, with a Gauss rule of `order` nodes per panel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarRule {
    pub levels: usize,
    pub order: usize,
}

impl Default for ScalarRule {
    fn default() -> Self {
        ScalarRule { levels: 40, order: 16 }
    }
}

impl ScalarRule {
    /// Twice the panels and twice the nodes per panel.
    pub fn doubled(self) -> Self {
        ScalarRule { levels: 2 * self.levels, order: 2 * self.order }
    }

    /// Number of geometric levels needed so that an integrand vanishing like
    /// θ^{decay-1} leaves a truncated tail below `TAIL_TARGET`.
    fn levels_for(&self, decay: f64) -> usize {
        let needed = (TAIL_TARGET.log2().abs() / decay).ceil() as usize + 2;
        self.levels.max(needed).min(FLOOR_EXPONENT)
    }
}

/// The weight `b(cos θ)` seen by the sphere quadrature.
pub trait AngularWeight: Send + Sync {
    fn weight(&self, theta: f64) -> f64;
    /// Angles in (0, π/2) where the weight is not smooth.
    fn breakpoints(&self) -> &[f64];
    fn is_cutoff(&self) -> bool;
    fn kernel(&self) -> &AngularKernel;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularKernel {
    s: f64,
    strength: f64,
    #[serde(default)]
    rule: ScalarRule,
}

impl AngularKernel {
    pub fn new(s: f64, strength: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("singularity exponent s must be positive, got {s}")));
        }
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::Domain(format!("kernel strength must be positive, got {strength}")));
        }
        Ok(AngularKernel { s, strength, rule: ScalarRule::default() })
    }

    pub fn with_rule(mut self, rule: ScalarRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn rule(&self) -> ScalarRule {
        self.rule
    }

    /// Exponent 2/s − 1 of the logarithmic factor.
    pub fn log_exponent(&self) -> f64 {
        2.0 / self.s - 1.0
    }

    pub fn eval_b(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.value(theta))
    }

    pub(crate) fn value(&self, theta: f64) -> f64 {
        self.strength * (2.0 / theta).ln().powf(self.log_exponent()) / (theta * theta)
    }

    /// b(cos θ)·sin θ without forming θ^{-2} first.
    fn weighted_sin(&self, theta: f64) -> f64 {
        let sinc = if theta < 1e-4 { 1.0 - theta * theta / 6.0 } else { theta.sin() / theta };
        self.strength * sinc * (2.0 / theta).ln().powf(self.log_exponent()) / theta
    }

    pub fn cutoff(&self, level: f64) -> Result<CutoffKernel> {
        CutoffKernel::new(self.clone(), level)
    }

    /// ∫_0^{top} f over geometric panels; `decay` is the power γ with f ~ θ^{γ-1} near 0.
    fn integrate_from_zero<F: Fn(f64) -> f64>(&self, top: f64, decay: f64, breaks: &[f64], f: F, what: &str) -> Result<Estimate> {
        let rule = GaussLegendre::new(self.rule.order);
        let levels = self.rule.levels_for(decay);
        let panels = split_panels(&graded_toward_zero(top, levels), breaks);
        let theta0 = panels[0].0;
        let tail = theta0 * f(theta0) / decay;
        integrate_refined(&rule, &panels, f, tail, ANGULAR_TOL, what)
    }

    /// ∫_{lower}^{π/2} f with panels doubling away from `lower > 0`.
    fn integrate_band<F: Fn(f64) -> f64>(&self, lower: f64, breaks: &[f64], f: F, what: &str) -> Result<f64> {
        let rule = GaussLegendre::new(self.rule.order);
        let panels: Vec<Panel> = split_panels(&graded_upward(lower, FRAC_PI_2), breaks);
        if panels.is_empty() {
            return Ok(0.0);
        }
        Ok(integrate_refined(&rule, &panels, f, 0.0, ANGULAR_TOL, what)?.value)
    }

    /// ∫_0^{π/2} sin^α(θ/2) b(cos θ) sin θ dθ.
    pub fn angular_moment(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let f = |t: f64| (0.5 * t).sin().powf(alpha) * self.weighted_sin(t);
        Ok(self.integrate_from_zero(FRAC_PI_2, alpha, &[], f, "angular moment")?.value)
    }

    /// λ_α = 2π∫ b sin θ (cos^α(θ/2) + sin^α(θ/2) − 1) dθ.
    pub fn lambda_alpha(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let f = |t: f64| self.weighted_sin(t) * lambda_factor(t, alpha);
        let est = self.integrate_from_zero(FRAC_PI_2, alpha.min(2.0), &[], f, "lambda_alpha")?;
        Ok(2.0 * PI * est.value)
    }

    /// Loss mass a_ε = 2π∫_{θ_ε}^{π/2} b sin θ dθ outside the grazing cap.
    pub fn a_eps(&self, eps: f64) -> Result<f64> {
        let lower = cap_angle(eps)?;
        let v = self.integrate_band(lower, &[], |t| self.weighted_sin(t), "a_eps")?;
        Ok(2.0 * PI * v)
    }

    /// λ_{ε,α} = 2π∫_{θ_ε}^{π/2} b sin θ (cos^α(θ/2) + sin^α(θ/2)) dθ.
    pub fn lambda_eps_alpha(&self, eps: f64, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let lower = cap_angle(eps)?;
        let f = |t: f64| self.weighted_sin(t) * ((0.5 * t).cos().powf(alpha) + (0.5 * t).sin().powf(alpha));
        Ok(2.0 * PI * self.integrate_band(lower, &[], f, "lambda_eps_alpha")?)
    }

    /// ∫_{S²} b min(1, r² sin²(θ/2)) dσ.
    pub fn coercive_weight(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("|xi| must be finite and nonnegative, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let f = |t: f64| {
            let h = r * (0.5 * t).sin();
            self.weighted_sin(t) * (h * h).min(1.0)
        };
        let value = if r > SQRT_2 {
            let kink = 2.0 * (1.0 / r).asin();
            let inner = self.integrate_from_zero(kink, 2.0, &[], f, "coercive weight")?.value;
            inner + self.integrate_band(kink, &[], f, "coercive weight")?
        } else {
            self.integrate_from_zero(FRAC_PI_2, 2.0, &[], f, "coercive weight")?.value
        };
        Ok(2.0 * PI * value)
    }
}

impl AngularWeight for AngularKernel {
    fn weight(&self, theta: f64) -> f64 {
        self.value(theta)
    }
    fn breakpoints(&self) -> &[f64] {
        &[]
    }
    fn is_cutoff(&self) -> bool {
        false
    }
    fn kernel(&self) -> &AngularKernel {
        self
    }
}

/// Grad cutoff b_n = min(b, n).
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffKernel {
    base: AngularKernel,
    level: f64,
    crossings: Vec<f64>,
    mass: f64,
}

impl CutoffKernel {
    pub fn new(base: AngularKernel, level: f64) -> Result<Self> {
        if !(level > 0.0) {
            return Err(Error::Domain(format!("cutoff level must be positive, got {level}")));
        }
        let crossings = if level.is_finite() { level_crossings(&base, level) } else { Vec::new() };
        let mut kernel = CutoffKernel { base, level, crossings, mass: f64::INFINITY };
        if level.is_finite() {
            kernel.mass = kernel.compute_mass()?;
        }
        Ok(kernel)
    }

    pub fn base(&self) -> &AngularKernel {
        &self.base
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Angles where b(cos θ) = n, ascending.
    pub fn crossings(&self) -> &[f64] {
        &self.crossings
    }

    pub fn eval_cutoff(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.weight(theta))
    }

    /// m_n = 2π∫_0^{π/2} b_n sin θ dθ.
    pub fn cutoff_mass(&self) -> f64 {
        self.mass
    }

    fn compute_mass(&self) -> Result<f64> {
        let n = self.level;
        let f = |t: f64| (self.base.value(t).min(n)) * t.sin();
        let est = self.base.integrate_from_zero(FRAC_PI_2, 2.0, &self.crossings, f, "cutoff mass")?;
        Ok(2.0 * PI * est.value)
    }
}

impl AngularWeight for CutoffKernel {
    fn weight(&self, theta: f64) -> f64 {
        self.base.value(theta).min(self.level)
    }
    fn breakpoints(&self) -> &[f64] {
        &self.crossings
    }
    fn is_cutoff(&self) -> bool {
        self.level.is_finite()
    }
    fn kernel(&self) -> &AngularKernel {
        &self.base
    }
}

/// Sign changes of b − n located on a log-spaced scan plus a uniform scan of
/// the upper half (b is not monotone there for large s), refined by bisection.
fn level_crossings(base: &AngularKernel, n: f64) -> Vec<f64> {
    let floor = FRAC_PI_2 * 0.5f64.powi(FLOOR_EXPONENT as i32 / 4);
    let mut samples: Vec<f64> = (0..=8 * (FLOOR_EXPONENT / 4)).map(|k| floor * 2f64.powf(k as f64 / 8.0)).collect();
    samples.extend((0..=256).map(|k| FRAC_PI_2 * (0.5 + k as f64 / 512.0)));
    samples.retain(|&t| t > 0.0 && t <= FRAC_PI_2);
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples.dedup();
    let g = |t: f64| base.value(t) - n;
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            out.push(a);
            continue;
        }
        if ga.signum() == gb.signum() || gb == 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m).signum() == ga.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out.retain(|&t| t < FRAC_PI_2);
    out
}

fn check_angle(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("angle {theta} outside the kernel support (0, pi/2]")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must be positive, got {alpha}")))
    }
}

/// cos^α(θ/2) + sin^α(θ/2) − 1 with the cosine part formed through expm1.
pub(crate) fn lambda_factor(theta: f64, alpha: f64) -> f64 {
    let h = (0.5 * theta).sin();
    (0.5 * alpha * (-h * h).ln_1p()).exp_m1() + h.powf(alpha)
}

/// Half-angle 2 arcsin(ε/π) of the grazing cap Ω_ε.
pub fn cap_angle(eps: f64) -> Result<f64> {
    let max = PI / SQRT_2;
    if !(eps > 0.0) || eps > max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("eps must lie in (0, pi/sqrt 2], got {eps}")));
    }
    let theta = 2.0 * (eps / PI).min(1.0 / SQRT_2).asin();
    Ok(if theta > FRAC_PI_2 - 1e-12 { FRAC_PI_2 } else { theta })
}

/// Closed form α^{-2/s} Γ(2/s) of the model moment.
pub fn model_moment_analytic(alpha: f64, s: f64) -> f64 {
    alpha.powf(-2.0 / s) * gamma(2.0 / s)
}

/// Quadrature of ∫_0^1 u^{α-1} (log 1/u)^{2/s-1} du.
pub fn model_moment_integral(alpha: f64, s: f64) -> Result<f64> {
    model_moment_with(alpha, s, ScalarRule::default())
}

pub fn model_moment_with(alpha: f64, s: f64, rule: ScalarRule) -> Result<f64> {
    check_alpha(alpha)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    let p = 2.0 / s - 1.0;
    let gl = GaussLegendre::new(rule.order);
    let tol = (1e-12, 0.0);

    let near_zero = |u: f64| u.powf(alpha - 1.0) * (1.0 / u).ln().powf(p);
    let panels = graded_toward_zero(0.5, rule.levels_for(alpha));
    let u0 = panels[0].0;
    let lower = integrate_refined(&gl, &panels, near_zero, u0 * near_zero(u0) / alpha, tol, "model moment")?;

    // v = 1 − u; log(1/u) = −log1p(−v) keeps the v → 0 end accurate.
    let near_one = |v: f64| (1.0 - v).powf(alpha - 1.0) * (-(-v).ln_1p()).powf(p);
    let decay = 2.0 / s;
    let panels = graded_toward_zero(0.5, rule.levels_for(decay));
    let v0 = panels[0].0;
    let upper = integrate_refined(&gl, &panels, near_one, v0 * near_one(v0) / decay, tol, "model moment")?;
    Ok(lower.value + upper.value)
}

/// α^{-2/s} Γ_upper(2/s, log 1/ε), the tail factor bounding the grazing remainder.
pub fn remainder_tail_bound(s: f64, eps: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(alpha.powf(-2.0 / s) * gamma_upper(2.0 / s, (1.0 / eps).ln())?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub alpha: f64,
    pub s: f64,
    pub quadrature: f64,
    pub analytic: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub entries: Vec<MomentRow>,
}

impl MomentTable {
    pub fn build(s_values: &[f64], alphas: &[f64], rule: ScalarRule) -> Result<Self> {
        let mut entries = Vec::with_capacity(s_values.len() * alphas.len());
        for &s in s_values {
            for &alpha in alphas {
                let quadrature = model_moment_with(alpha, s, rule)?;
                let analytic = model_moment_analytic(alpha, s);
                let rel_err = ((quadrature - analytic) / analytic).abs();
                entries.push(MomentRow { alpha, s, quadrature, analytic, rel_err });
            }
        }
        Ok(MomentTable { entries })
    }

    pub fn max_rel_err(&self) -> f64 {
        self.entries.iter().map(|r| r.rel_err).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,s,quadrature,analytic,rel_err\n");
        for r in &self.entries {
            let _ = writeln!(out, "{},{},{:.17e},{:.17e},{:.3e}", r.alpha, r.s, r.quadrature, r.analytic, r.rel_err);
        }
        out
    }
}
