//! Bobylev form of the collision operator,
//! `Q̂(ξ) = ∫_{S²} b(ξ·σ/|ξ|) (ψ(ξ⁺)ψ(ξ⁻) − ψ(ξ)ψ(0)) dσ`, `ξ± = ξ/2 ± |ξ|σ/2`,
//! together with the grazing-cap splitting used in the uniqueness argument.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::CharFn;
use crate::error::{Error, Result};
use crate::kernel::{cap_angle, AngularWeight};
use crate::quadrature::GaussLegendre;
use crate::vec3::{dot, norm, perpendicular_frame, scale, Vec3};

/// Smallest polar angle resolved by the sphere rule.
pub const THETA_MIN: f64 = FRAC_PI_2 / (1u64 << 40) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Geometric θ panels between `THETA_MIN` and π/2.
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Uniform azimuth nodes; must be even.
    pub azimuth: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { panels: 24, order: 8, azimuth: 16 }
    }
}

impl QuadratureSettings {
    pub fn doubled(self) -> Self {
        QuadratureSettings { panels: 2 * self.panels, order: 2 * self.order, azimuth: 2 * self.azimuth }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.order == 0 {
            return Err(Error::Domain("quadrature needs at least one panel and one node".into()));
        }
        if self.azimuth < 2 || self.azimuth % 2 != 0 {
            return Err(Error::Domain(format!("azimuth node count must be even, got {}", self.azimuth)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaNode {
    pub theta: f64,
    /// Gauss weight for dθ times sin θ times the azimuth spacing 2π/M.
    pub weight: f64,
    pub cos: f64,
    pub sin: f64,
}

/// Product rule on the band θ ∈ (lower, upper] of the unit sphere around an axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereQuadrature {
    settings: QuadratureSettings,
    lower: f64,
    upper: f64,
    breakpoints: Vec<f64>,
    nodes: Vec<ThetaNode>,
    azimuth: Vec<(f64, f64)>,
}

impl SphereQuadrature {
    /// The full band (THETA_MIN, π/2].
    pub fn new(settings: QuadratureSettings) -> Result<Self> {
        Self::band(settings, THETA_MIN, FRAC_PI_2, &[])
    }

    /// Full band with panel edges added at the kernel's kinks.
    pub fn for_kernel<W: AngularWeight + ?Sized>(settings: QuadratureSettings, kernel: &W) -> Result<Self> {
        Self::band(settings, THETA_MIN, FRAC_PI_2, kernel.breakpoints())
    }

    /// Band (lower, upper] using the global geometric edges that fall inside it plus `breakpoints`.
    pub fn band(settings: QuadratureSettings, lower: f64, upper: f64, breakpoints: &[f64]) -> Result<Self> {
        settings.validate()?;
        if !(lower > 0.0 && lower < upper && upper <= FRAC_PI_2) {
            return Err(Error::Domain(format!("invalid polar band ({lower}, {upper}]")));
        }
        let ratio = (FRAC_PI_2 / THETA_MIN).powf(1.0 / settings.panels as f64);
        let mut edges = vec![lower, upper];
        let mut t = FRAC_PI_2;
        while t > lower {
            if t < upper {
                edges.push(t);
            }
            t /= ratio;
        }
        edges.extend(breakpoints.iter().copied().filter(|&b| b > lower && b < upper));
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs());

        let rule = GaussLegendre::new(settings.order);
        let dphi = 2.0 * PI / settings.azimuth as f64;
        let mut nodes = Vec::with_capacity(edges.len() * settings.order);
        for w in edges.windows(2) {
            for (theta, wt) in rule.mapped(w[0], w[1]) {
                let (sin, cos) = theta.sin_cos();
                nodes.push(ThetaNode { theta, weight: wt * sin * dphi, cos, sin });
            }
        }
        let azimuth = (0..settings.azimuth).map(|k| (k as f64 * dphi).sin_cos()).map(|(s, c)| (c, s)).collect();
        let breakpoints = breakpoints.to_vec();
        Ok(SphereQuadrature { settings, lower, upper, breakpoints, nodes, azimuth })
    }

    /// Same band with extra panel edges.
    pub fn with_breakpoints(&self, points: &[f64]) -> Result<Self> {
        let mut all = self.breakpoints.clone();
        all.extend_from_slice(points);
        Self::band(self.settings, self.lower, self.upper, &all)
    }

    pub fn settings(&self) -> QuadratureSettings {
        self.settings
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn nodes(&self) -> &[ThetaNode] {
        &self.nodes
    }

    /// (cos φ, sin φ) of the azimuth nodes.
    pub fn azimuth(&self) -> &[(f64, f64)] {
        &self.azimuth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() * self.azimuth.len()
    }

    /// ∫ f(θ) dσ over the band for an axially symmetric f.
    pub fn band_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let m = self.azimuth.len() as f64;
        self.nodes.iter().map(|n| n.weight * m * f(n.theta)).sum()
    }

    /// Kernel value times quadrature weight for every θ node.
    pub fn kernel_weights<W: AngularWeight + ?Sized>(&self, kernel: &W) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight * kernel.weight(n.theta)).collect()
    }
}

/// (ξ⁺, ξ⁻) = (ξ/2 + |ξ|σ/2, ξ/2 − |ξ|σ/2).
pub fn xi_plus_minus(xi: Vec3, sigma: Vec3) -> Result<(Vec3, Vec3)> {
    if (norm(sigma) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("sigma {sigma:?} is not a unit vector")));
    }
    let r = norm(xi);
    let plus = [0, 1, 2].map(|i| 0.5 * (xi[i] + r * sigma[i]));
    let minus = [0, 1, 2].map(|i| 0.5 * (xi[i] - r * sigma[i]));
    Ok((plus, minus))
}

/// Orthonormal frame (n, e₁, e₂) attached to ξ ≠ 0.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    pub r: f64,
    pub n: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl Frame {
    pub fn new(xi: Vec3) -> Frame {
        let r = norm(xi);
        let n = scale(1.0 / r, xi);
        let (e1, e2) = perpendicular_frame(n);
        Frame { r, n, e1, e2 }
    }

    /// σ(θ, φ) = cos θ n + sin θ (cos φ e₁ + sin φ e₂).
    #[inline]
    pub fn sigma(&self, node: &ThetaNode, (c, s): (f64, f64)) -> Vec3 {
        [0, 1, 2].map(|i| node.cos * self.n[i] + node.sin * (c * self.e1[i] + s * self.e2[i]))
    }

    #[inline]
    pub fn plus_minus(&self, xi: Vec3, sigma: Vec3) -> (Vec3, Vec3) {
        let h = 0.5 * self.r;
        ([0, 1, 2].map(|i| 0.5 * xi[i] + h * sigma[i]), [0, 1, 2].map(|i| 0.5 * xi[i] - h * sigma[i]))
    }
}

fn check_point<F: CharFn + ?Sized>(psi: &F, point: Vec3, sigma: Vec3) -> Result<()> {
    let r = norm(point);
    if r > psi.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "collision point {point:?} (sigma {sigma:?}) leaves the evaluation ball of radius {}",
            psi.domain_radius()
        )));
    }
    Ok(())
}

/// Node sum of the Bobylev integrand with precomputed `weights` from
/// [`SphereQuadrature::kernel_weights`]. No domain checks.
pub(crate) fn rhs_weighted<F: CharFn + ?Sized>(
    psi: &F,
    xi: Vec3,
    psi_xi: Complex64,
    psi_origin: Complex64,
    weights: &[f64],
    quad: &SphereQuadrature,
) -> Complex64 {
    let r = norm(xi);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let frame = Frame::new(xi);
    let loss = psi_xi * psi_origin;
    let mut acc = Complex64::new(0.0, 0.0);
    for (node, &w) in quad.nodes().iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let mut ring = Complex64::new(0.0, 0.0);
        for &az in quad.azimuth() {
            let (p, m) = frame.plus_minus(xi, frame.sigma(node, az));
            ring += psi.value(p) * psi.value(m) - loss;
        }
        acc += ring * w;
    }
    acc
}

pub fn collision_rhs<F, W>(psi: &F, xi: Vec3, kernel: &W, quad: &SphereQuadrature) -> Result<Complex64>
where
    F: CharFn + ?Sized,
    W: AngularWeight + ?Sized,
{
    let r = norm(xi);
    if r > psi.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("xi {xi:?} outside the evaluation ball")));
    }
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let frame = Frame::new(xi);
    for node in [quad.nodes().first(), quad.nodes().last()].into_iter().flatten() {
        for &az in quad.azimuth() {
            let sigma = frame.sigma(node, az);
            let (p, m) = frame.plus_minus(xi, sigma);
            check_point(psi, p, sigma)?;
            check_point(psi, m, sigma)?;
        }
    }
    let weights = quad.kernel_weights(kernel);
    Ok(rhs_weighted(psi, xi, psi.value(xi), psi.value([0.0; 3]), &weights, quad))
}

/// Symmetric decomposition of the collision integral around ξ plus the grazing-cap split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    /// ½∫ b (ψ(ξ⁺) + ψ(ξ̃⁺) − 2ψ(ζ)) dσ.
    pub i1: Complex64,
    /// ∫ b (ψ(ζ) − ψ(ξ)) dσ.
    pub i2: Complex64,
    /// ∫ b ψ(ξ⁺)(ψ(ξ⁻) − 1) dσ.
    pub i3: Complex64,
    /// ∫_{Ω_ε} b (ψ(ξ⁺)ψ(ξ⁻) − ψ(ξ)) / |ξ|^α dσ.
    pub remainder: Complex64,
    /// ∫_{Ω_ε^c} b ψ(ξ⁺)ψ(ξ⁻) dσ.
    pub gain_outside: Complex64,
    /// a_ε ψ(ξ), with a_ε summed on the same nodes.
    pub loss: Complex64,
    /// Node sum of a_ε.
    pub a_eps: f64,
    /// Unsplit node sum of b (ψ(ξ⁺)ψ(ξ⁻) − ψ(ξ)).
    pub total: Complex64,
    pub eps: f64,
    pub alpha: f64,
    pub xi_norm: f64,
}

impl SplitResult {
    /// |I₁ + I₂ + I₃ − total| relative to the scale of the parts.
    pub fn decomposition_defect(&self) -> f64 {
        let scale = self.i1.norm() + self.i2.norm() + self.i3.norm() + self.total.norm();
        (self.i1 + self.i2 + self.i3 - self.total).norm() / scale.max(f64::MIN_POSITIVE)
    }

    /// |gain − loss + |ξ|^α R − total| relative to the scale of the parts.
    pub fn cap_defect(&self) -> f64 {
        let cap = self.remainder * self.xi_norm.powf(self.alpha);
        let scale = self.gain_outside.norm() + self.loss.norm() + cap.norm() + self.total.norm();
        (self.gain_outside - self.loss + cap - self.total).norm() / scale.max(f64::MIN_POSITIVE)
    }
}

/// Evaluates I₁, I₂, I₃, the cap remainder and the outside gain/loss on one node set
/// with θ_ε = 2 arcsin(ε/π) inserted as a panel edge.
pub fn split_i1_i2_i3<F, W>(psi: &F, xi: Vec3, kernel: &W, eps: f64, alpha: f64, quad: &SphereQuadrature) -> Result<SplitResult>
where
    F: CharFn + ?Sized,
    W: AngularWeight + ?Sized,
{
    let theta_eps = cap_angle(eps)?;
    let r = norm(xi);
    if r == 0.0 {
        return Err(Error::Domain("the split is defined for xi != 0".into()));
    }
    if r > psi.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("xi {xi:?} outside the evaluation ball")));
    }
    let mut cuts = kernel.breakpoints().to_vec();
    cuts.push(theta_eps);
    let quad = quad.with_breakpoints(&cuts)?;
    let frame = Frame::new(xi);
    let psi_xi = psi.value(xi);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = SplitResult {
        i1: zero,
        i2: zero,
        i3: zero,
        remainder: zero,
        gain_outside: zero,
        loss: zero,
        a_eps: 0.0,
        total: zero,
        eps,
        alpha,
        xi_norm: r,
    };
    let mut cap = zero;
    for node in quad.nodes() {
        let w = node.weight * kernel.weight(node.theta);
        let inside = node.theta <= theta_eps;
        for &az in quad.azimuth() {
            let sigma = frame.sigma(node, az);
            let (p, m) = frame.plus_minus(xi, sigma);
            check_point(psi, p, sigma)?;
            let zeta = scale(dot(p, frame.n), frame.n);
            let mirrored = [0, 1, 2].map(|i| 2.0 * zeta[i] - p[i]);
            let (vp, vm, vz, vt) = (psi.value(p), psi.value(m), psi.value(zeta), psi.value(mirrored));
            out.i1 += 0.5 * w * (vp + vt - 2.0 * vz);
            out.i2 += w * (vz - psi_xi);
            out.i3 += w * vp * (vm - 1.0);
            let integrand = vp * vm - psi_xi;
            out.total += w * integrand;
            if inside {
                cap += w * integrand;
            } else {
                out.gain_outside += w * vp * vm;
                out.a_eps += w;
            }
        }
    }
    out.loss = psi_xi * out.a_eps;
    out.remainder = cap / r.powf(alpha);
    Ok(out)
}

/// R_{ε,ψ}(ξ) evaluated with its own graded cap rule down to `THETA_MIN`.
pub fn remainder_r_eps<F, W>(psi: &F, xi: Vec3, kernel: &W, eps: f64, alpha: f64, quad: &SphereQuadrature) -> Result<Complex64>
where
    F: CharFn + ?Sized,
    W: AngularWeight + ?Sized,
{
    let theta_eps = cap_angle(eps)?;
    let r = norm(xi);
    if r == 0.0 {
        return Err(Error::Domain("the remainder is defined for xi != 0".into()));
    }
    if r > psi.domain_radius() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("xi {xi:?} outside the evaluation ball")));
    }
    if theta_eps <= THETA_MIN {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cap = SphereQuadrature::band(quad.settings(), THETA_MIN, theta_eps, kernel.breakpoints())?;
    let weights = cap.kernel_weights(kernel);
    Ok(rhs_weighted(psi, xi, psi.value(xi), Complex64::new(1.0, 0.0), &weights, &cap) / r.powf(alpha))
}

/// Largest ratio, over all sphere nodes, of each part's integrand to its bound
/// c·‖1−ψ‖_α |ξ|^α sin^α(θ/2) with c = 2, 5, 1 for I₁, I₂, I₃.
pub fn part_bound_ratios<F: CharFn + ?Sized>(psi: &F, xi: Vec3, alpha: f64, knorm: f64, quad: &SphereQuadrature) -> [f64; 3] {
    let r = norm(xi);
    if r == 0.0 {
        return [0.0; 3];
    }
    let frame = Frame::new(xi);
    let psi_xi = psi.value(xi);
    let mut worst = [0.0f64; 3];
    for node in quad.nodes() {
        let bound = knorm * r.powf(alpha) * (0.5 * node.theta).sin().powf(alpha);
        for &az in quad.azimuth() {
            let sigma = frame.sigma(node, az);
            let (p, m) = frame.plus_minus(xi, sigma);
            let zeta = scale(dot(p, frame.n), frame.n);
            let mirrored = [0, 1, 2].map(|i| 2.0 * zeta[i] - p[i]);
            let (vp, vm, vz, vt) = (psi.value(p), psi.value(m), psi.value(zeta), psi.value(mirrored));
            let parts = [(vp + vt - 2.0 * vz).norm() / 2.0, (vz - psi_xi).norm() / 5.0, (vp * (vm - 1.0)).norm()];
            for (w, v) in worst.iter_mut().zip(parts) {
                // Rounding in ψ differences is ~1e-16; ignore anything at that level.
                let excess = v - 1e-14;
                if excess > 0.0 {
                    *w = w.max(excess / bound);
                }
            }
        }
    }
    worst
}
