//! The K^α distance `‖ψ − φ‖_α = sup |ψ − φ| / |ξ|^α` and the pointwise
//! inequalities satisfied by every characteristic function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnalyticCharFn, CharFn, CharGrid};
use crate::error::{Error, Result};
use crate::vec3::{add, norm, scale, symmetric_eigenvalues, Vec3};

/// Either representation of a characteristic function.
#[derive(Clone, Copy, Debug)]
pub enum CharRef<'a> {
    Analytic(&'a AnalyticCharFn),
    Grid(&'a CharGrid),
}

impl<'a> From<&'a AnalyticCharFn> for CharRef<'a> {
    fn from(f: &'a AnalyticCharFn) -> Self {
        CharRef::Analytic(f)
    }
}

impl<'a> From<&'a CharGrid> for CharRef<'a> {
    fn from(g: &'a CharGrid) -> Self {
        CharRef::Grid(g)
    }
}

impl CharRef<'_> {
    pub fn value(&self, xi: Vec3) -> Complex64 {
        match self {
            CharRef::Analytic(f) => f.value(xi),
            CharRef::Grid(g) => g.value(xi),
        }
    }
}

/// Radial shells × directions on which analytic pairs are compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDomain {
    pub radius: f64,
    pub shells: usize,
    pub directions: usize,
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain { radius: 8.0, shells: 160, directions: 240 }
    }
}

impl SampleDomain {
    /// Fibonacci-sphere directions plus the coordinate axes and cube diagonals.
    pub fn directions(&self) -> Vec<Vec3> {
        let mut dirs = Vec::with_capacity(self.directions + 14);
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..self.directions {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / self.directions as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            dirs.push([r * phi.cos(), r * phi.sin(), z]);
        }
        for a in 0..3 {
            for sign in [1.0, -1.0] {
                let mut e = [0.0; 3];
                e[a] = sign;
                dirs.push(e);
            }
        }
        let d = 1.0 / 3f64.sqrt();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    dirs.push([sx * d, sy * d, sz * d]);
                }
            }
        }
        dirs
    }

    pub fn r_min(&self) -> f64 {
        self.radius / self.shells as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KAlphaReport {
    pub alpha: f64,
    /// Largest sampled ratio |ψ − φ| / |ξ|^α (or the ξ → 0 limit when that is larger).
    pub norm: f64,
    /// True when the ξ → 0 limit of the ratio is +∞.
    pub infinite: bool,
    /// Location of the largest ratio; the origin when the limit dominates.
    pub argmax: Vec3,
    /// Points with |ξ| below this radius were excluded from sampling.
    pub r_min: f64,
    /// Sampling domain radius.
    pub domain_radius: f64,
    /// Whether the ξ → 0 limit entered the supremum.
    pub limit_included: bool,
}

impl KAlphaReport {
    /// The distance, +∞ when the limit diverges.
    pub fn value(&self) -> f64 {
        if self.infinite {
            f64::INFINITY
        } else {
            self.norm
        }
    }
}

pub fn k_alpha_distance(psi: CharRef, phi: CharRef, alpha: f64) -> Result<KAlphaReport> {
    k_alpha_distance_on(psi, phi, alpha, &SampleDomain::default())
}

/// `domain` is used only when both arguments are analytic; otherwise the grid nodes
/// inside the inscribed ball with |ξ| ≥ Δ are the sample set.
pub fn k_alpha_distance_on(psi: CharRef, phi: CharRef, alpha: f64, domain: &SampleDomain) -> Result<KAlphaReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    match (psi, phi) {
        (CharRef::Grid(a), CharRef::Grid(b)) => {
            if !a.same_geometry(b) {
                return Err(Error::Usage("K^alpha distance between grids of different geometry".into()));
            }
            Ok(grid_sup(a, |idx, _| a.values()[idx] - b.values()[idx], alpha))
        }
        (CharRef::Grid(g), CharRef::Analytic(f)) | (CharRef::Analytic(f), CharRef::Grid(g)) => {
            Ok(grid_sup(g, |idx, xi| g.values()[idx] - f.value(xi), alpha))
        }
        (CharRef::Analytic(a), CharRef::Analytic(b)) => Ok(analytic_sup(a, b, alpha, domain)),
    }
}

fn grid_sup<F: Fn(usize, Vec3) -> Complex64>(g: &CharGrid, diff: F, alpha: f64) -> KAlphaReport {
    let r_min = g.spacing() * (1.0 - 1e-12);
    let r_max = g.radius() * (1.0 + 1e-12);
    let mut best = (0.0, [0.0; 3]);
    for idx in 0..g.len() {
        let xi = g.node_at(idx);
        let r = norm(xi);
        if r < r_min || r > r_max {
            continue;
        }
        let ratio = diff(idx, xi).norm() / r.powf(alpha);
        if ratio > best.0 {
            best = (ratio, xi);
        }
    }
    KAlphaReport {
        alpha,
        norm: best.0,
        infinite: false,
        argmax: best.1,
        r_min: g.spacing(),
        domain_radius: g.radius(),
        limit_included: false,
    }
}

/// Limit of |ψ − φ|/|ξ|^α as ξ → 0 from first and second moments:
/// ψ − φ = −iΔm·ξ − ½ξᵀΔSξ + O(|ξ|³). `None` when the expansion does not decide it.
pub fn taylor_limit(psi: &AnalyticCharFn, phi: &AnalyticCharFn, alpha: f64) -> Option<f64> {
    let (a, b) = (psi.spec().moments(), phi.spec().moments());
    let dm = [0, 1, 2].map(|i| a.mean[i] - b.mean[i]);
    let mut ds = [[0.0; 3]; 3];
    let mut scale_s: f64 = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            ds[i][j] = a.second[i][j] - b.second[i][j];
            scale_s = scale_s.max(a.second[i][j].abs()).max(b.second[i][j].abs());
        }
    }
    let m_norm = norm(dm);
    let m_zero = m_norm <= 1e-14 * (1.0 + norm(a.mean) + norm(b.mean));
    let s_max = symmetric_eigenvalues(ds).iter().map(|e| e.abs()).fold(0.0, f64::max);
    let s_zero = s_max <= 1e-14 * scale_s;
    if alpha < 1.0 {
        Some(0.0)
    } else if alpha == 1.0 {
        Some(if m_zero { 0.0 } else { m_norm })
    } else if !m_zero {
        Some(f64::INFINITY)
    } else if alpha < 2.0 {
        Some(0.0)
    } else if alpha == 2.0 {
        Some(if s_zero { 0.0 } else { 0.5 * s_max })
    } else if !s_zero {
        Some(f64::INFINITY)
    } else if alpha < 3.0 {
        Some(0.0)
    } else {
        None
    }
}

fn analytic_sup(psi: &AnalyticCharFn, phi: &AnalyticCharFn, alpha: f64, domain: &SampleDomain) -> KAlphaReport {
    let ratio = |xi: Vec3| {
        let r = norm(xi);
        (psi.value(xi) - phi.value(xi)).norm() / r.powf(alpha)
    };
    let dirs = domain.directions();
    let dr = domain.radius / domain.shells as f64;
    let mut best = (0.0, [0.0; 3]);
    for k in 1..=domain.shells {
        let r = k as f64 * dr;
        for d in &dirs {
            let xi = scale(r, *d);
            let v = ratio(xi);
            if v > best.0 {
                best = (v, xi);
            }
        }
    }
    // Pattern search around the best sample, staying inside the sampled shell range.
    if best.0 > 0.0 {
        let mut step = dr;
        let (mut v0, mut x0) = best;
        while step > 1e-9 * domain.radius {
            let mut moved = false;
            for a in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut e = [0.0; 3];
                    e[a] = sign * step;
                    let x = add(x0, e);
                    let r = norm(x);
                    if r < dr || r > domain.radius {
                        continue;
                    }
                    let v = ratio(x);
                    if v > v0 {
                        v0 = v;
                        x0 = x;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = (v0, x0);
    }
    let limit = taylor_limit(psi, phi, alpha);
    let mut report = KAlphaReport {
        alpha,
        norm: best.0,
        infinite: false,
        argmax: best.1,
        r_min: dr,
        domain_radius: domain.radius,
        limit_included: limit.is_some(),
    };
    match limit {
        Some(l) if l.is_infinite() => {
            report.infinite = true;
            report.argmax = [0.0; 3];
        }
        Some(l) if l >= report.norm => {
            report.norm = l;
            report.argmax = [0.0; 3];
        }
        _ => {}
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharCheckConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Analytic samples are drawn uniformly from [−w, w]³.
    pub box_half_width: f64,
    /// Exponents for the K^α increment inequality.
    pub alphas: Vec<f64>,
    pub slack: f64,
}

impl Default for CharCheckConfig {
    fn default() -> Self {
        CharCheckConfig { pairs: 10_000, seed: 0x5eed, box_half_width: 5.0, alphas: vec![1.0, 2.0], slack: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityMargin {
    /// Smallest value of (right side − left side) over the sampled pairs.
    pub worst: f64,
    pub witness: (Vec3, Vec3),
    pub violations: usize,
}

impl InequalityMargin {
    fn new() -> Self {
        InequalityMargin { worst: f64::INFINITY, witness: ([0.0; 3], [0.0; 3]), violations: 0 }
    }

    fn record(&mut self, margin: f64, xi: Vec3, eta: Vec3, slack: f64) {
        if margin < -slack {
            self.violations += 1;
        }
        if margin < self.worst {
            self.worst = margin;
            self.witness = (xi, eta);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub alpha: f64,
    pub knorm: f64,
    pub infinite: bool,
    pub margin: InequalityMargin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharCheckReport {
    pub pairs: usize,
    /// |ψ(ξ)ψ(η) − ψ(ξ+η)|² ≤ (1 − |ψ(ξ)|²)(1 − |ψ(η)|²).
    pub product: InequalityMargin,
    /// |ψ(ξ) − ψ(ξ+η)| ≤ ‖ψ − 1‖_α (4|ξ|^{α/2}|η|^{α/2} + |η|^α), one entry per α.
    pub increment: Vec<AlphaCheck>,
}

impl CharCheckReport {
    pub fn violations(&self) -> usize {
        self.product.violations + self.increment.iter().map(|a| a.margin.violations).sum::<usize>()
    }
}

/// Samples seeded (ξ, η) pairs and checks both inequalities; any violation beyond
/// `cfg.slack` is a validation error naming the worst witness. Grid inputs draw node
/// pairs whose sum is again a node, which requires an odd number of points per axis.
pub fn verify_characteristic(psi: CharRef, cfg: &CharCheckConfig) -> Result<CharCheckReport> {
    let one = AnalyticCharFn::one();
    let mut increment = Vec::with_capacity(cfg.alphas.len());
    for &alpha in &cfg.alphas {
        let (knorm, infinite) = match psi {
            CharRef::Analytic(_) => {
                let r = k_alpha_distance(psi, CharRef::Analytic(&one), alpha)?;
                (r.norm, r.infinite)
            }
            // Every sampled pair lives on the cube, so the norm is taken over all nonzero nodes.
            CharRef::Grid(g) => {
                let sup = (0..g.len())
                    .map(|idx| (idx, norm(g.node_at(idx))))
                    .filter(|&(_, r)| r > 0.0)
                    .map(|(idx, r)| (g.values()[idx] - 1.0).norm() / r.powf(alpha))
                    .fold(0.0, f64::max);
                (sup, false)
            }
        };
        increment.push(AlphaCheck { alpha, knorm, infinite, margin: InequalityMargin::new() });
    }
    let mut product = InequalityMargin::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut check = |xi: Vec3, eta: Vec3, a: Complex64, b: Complex64, c: Complex64| {
        let lhs = (a * b - c).norm_sqr();
        let rhs = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr());
        product.record(rhs - lhs, xi, eta, cfg.slack);
        let (rx, re) = (norm(xi), norm(eta));
        for chk in increment.iter_mut() {
            if chk.infinite {
                continue;
            }
            let bound = chk.knorm * (4.0 * (rx * re).powf(0.5 * chk.alpha) + re.powf(chk.alpha));
            chk.margin.record(bound - (a - c).norm(), xi, eta, cfg.slack);
        }
    };

    match psi {
        CharRef::Analytic(f) => {
            let w = cfg.box_half_width;
            for _ in 0..cfg.pairs {
                let xi = [0, 1, 2].map(|_| rng.gen_range(-w..=w));
                let eta = [0, 1, 2].map(|_| rng.gen_range(-w..=w));
                check(xi, eta, f.value(xi), f.value(eta), f.value(add(xi, eta)));
            }
        }
        CharRef::Grid(g) => {
            if g.n() % 2 == 0 {
                return Err(Error::Usage("grid inequality checks need an odd number of points per axis".into()));
            }
            let n = g.n() as i64;
            let c = n / 2;
            for _ in 0..cfg.pairs {
                let mut ia = [0usize; 3];
                let mut ib = [0usize; 3];
                let mut isum = [0usize; 3];
                for a in 0..3 {
                    // Offsets from the centre with the sum kept inside the grid.
                    let u = rng.gen_range(-c..=c);
                    let lo = (-c - u).max(-c);
                    let hi = (c - u).min(c);
                    let v = rng.gen_range(lo..=hi);
                    ia[a] = (c + u) as usize;
                    ib[a] = (c + v) as usize;
                    isum[a] = (c + u + v) as usize;
                }
                let (xa, xb) = (g.node(ia[0], ia[1], ia[2]), g.node(ib[0], ib[1], ib[2]));
                let v = |i: [usize; 3]| g.values()[g.index(i[0], i[1], i[2])];
                check(xa, xb, v(ia), v(ib), v(isum));
            }
        }
    }
    let report = CharCheckReport { pairs: cfg.pairs, product, increment };
    if report.product.violations > 0 {
        let (x, e) = report.product.witness;
        return Err(Error::Validation(format!(
            "product inequality violated {} times; worst margin {:.3e} at xi={x:?}, eta={e:?}",
            report.product.violations, report.product.worst
        )));
    }
    for chk in &report.increment {
        if chk.margin.violations > 0 {
            let (x, e) = chk.margin.witness;
            return Err(Error::Validation(format!(
                "increment inequality (alpha={}) violated {} times; worst margin {:.3e} at xi={x:?}, eta={e:?}",
                chk.alpha, chk.margin.violations, chk.margin.worst
            )));
        }
    }
    Ok(report)
}
