//! Probability measures built from atoms and isotropic Gaussians, with closed-form
//! characteristic functions `ψ(ξ) = ∫ e^{-i v·ξ} dΨ(v)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CharFn;
use crate::error::{Error, Result};
use crate::vec3::{dot, Mat3, Vec3};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec3,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec3,
    pub var: f64,
    pub w: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub gaussians: Vec<GaussianComponent>,
}

/// First moment vector and second-moment matrix ∫ v vᵀ dΨ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: Vec3,
    pub second: Mat3,
}

impl MeasureSpec {
    pub fn dirac(x: Vec3) -> Self {
        MeasureSpec { atoms: vec![Atom { x, w: 1.0 }], gaussians: Vec::new() }
    }

    pub fn gaussian(mean: Vec3, var: f64) -> Self {
        MeasureSpec { atoms: Vec::new(), gaussians: vec![GaussianComponent { mean, var, w: 1.0 }] }
    }

    /// Standard Maxwellian: centred Gaussian with unit variance per axis.
    pub fn maxwellian() -> Self {
        Self::gaussian([0.0; 3], 1.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MeasureSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>() + self.gaussians.iter().map(|g| g.w).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() && self.gaussians.is_empty() {
            return Err(Error::Domain("measure has no components".into()));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !(a.w > 0.0 && a.w.is_finite()) || a.x.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("atom {i}: weight must be positive and location finite")));
            }
        }
        for (i, g) in self.gaussians.iter().enumerate() {
            if !(g.w > 0.0 && g.w.is_finite()) || g.mean.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("gaussian {i}: weight must be positive and mean finite")));
            }
            if !(g.var > 0.0 && g.var.is_finite()) {
                return Err(Error::Domain(format!("gaussian {i}: variance must be positive, got {}", g.var)));
            }
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn moments(&self) -> Moments {
        let total = self.total_weight();
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        let mut add = |w: f64, x: Vec3, var: f64| {
            for i in 0..3 {
                mean[i] += w * x[i] / total;
                for j in 0..3 {
                    let diag = if i == j { var } else { 0.0 };
                    second[i][j] += w * (x[i] * x[j] + diag) / total;
                }
            }
        };
        for a in &self.atoms {
            add(a.w, a.x, 0.0);
        }
        for g in &self.gaussians {
            add(g.w, g.mean, g.var);
        }
        Moments { mean, second }
    }

    /// Variance of the Gaussian envelope factored out of grid interpolation:
    /// the smallest component variance for purely Gaussian measures, zero otherwise.
    pub fn envelope_variance(&self) -> f64 {
        if !self.atoms.is_empty() {
            return 0.0;
        }
        self.gaussians.iter().map(|g| g.var).fold(f64::INFINITY, f64::min).min(1e3)
    }

    /// Shift every component by `m`, which multiplies ψ by e^{-i m·ξ}.
    pub fn translated(&self, m: Vec3) -> Self {
        let shift = |x: Vec3| [x[0] + m[0], x[1] + m[1], x[2] + m[2]];
        MeasureSpec {
            atoms: self.atoms.iter().map(|a| Atom { x: shift(a.x), w: a.w }).collect(),
            gaussians: self
                .gaussians
                .iter()
                .map(|g| GaussianComponent { mean: shift(g.mean), var: g.var, w: g.w })
                .collect(),
        }
    }
}

pub fn fourier_of_measure(spec: &MeasureSpec, xi: Vec3) -> Complex64 {
    let r2 = dot(xi, xi);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for a in &spec.atoms {
        acc += a.w * Complex64::from_polar(1.0, -dot(a.x, xi));
        total += a.w;
    }
    for g in &spec.gaussians {
        acc += g.w * (-0.5 * g.var * r2).exp() * Complex64::from_polar(1.0, -dot(g.mean, xi));
        total += g.w;
    }
    acc / total
}

/// ½ Maxwellian plus six atoms of mass 1/12 at ±e_k; ψ₀ = ½e^{-|ξ|²/2} + (1/6)Σ cos ξ_k.
pub fn example_initial_datum() -> MeasureSpec {
    mixture_with_lattice(0.5)
}

/// Same shape as the example datum with Gaussian weight `0.6`, used as a nearby second datum.
pub fn perturbed_example() -> MeasureSpec {
    mixture_with_lattice(0.6)
}

fn mixture_with_lattice(gaussian_weight: f64) -> MeasureSpec {
    let w = (1.0 - gaussian_weight) / 6.0;
    let mut atoms = Vec::with_capacity(6);
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            let mut x = [0.0; 3];
            x[k] = sign;
            atoms.push(Atom { x, w });
        }
    }
    MeasureSpec { atoms, gaussians: vec![GaussianComponent { mean: [0.0; 3], var: 1.0, w: gaussian_weight }] }
}

/// Named measures exercised by the property suites.
pub fn catalog() -> Vec<(&'static str, MeasureSpec)> {
    vec![
        ("dirac-origin", MeasureSpec::dirac([0.0; 3])),
        ("dirac-shifted", MeasureSpec::dirac([0.7, -0.2, 0.4])),
        ("maxwellian", MeasureSpec::maxwellian()),
        ("shifted-gaussian", MeasureSpec::gaussian([0.5, -0.25, 1.0], 0.7)),
        ("example", example_initial_datum()),
        ("example-perturbed", perturbed_example()),
        (
            "two-atoms-and-gaussian",
            MeasureSpec {
                atoms: vec![Atom { x: [1.0, 0.5, 0.0], w: 0.3 }, Atom { x: [-0.4, 0.0, 0.9], w: 0.2 }],
                gaussians: vec![GaussianComponent { mean: [0.1, 0.1, -0.3], var: 2.0, w: 0.5 }],
            },
        ),
    ]
}

/// Characteristic function of a validated [`MeasureSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCharFn {
    spec: MeasureSpec,
}

impl AnalyticCharFn {
    pub fn new(spec: MeasureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(AnalyticCharFn { spec })
    }

    /// ψ ≡ 1, the transform of δ₀.
    pub fn one() -> Self {
        AnalyticCharFn { spec: MeasureSpec::dirac([0.0; 3]) }
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }
}

impl CharFn for AnalyticCharFn {
    fn value(&self, xi: Vec3) -> Complex64 {
        fourier_of_measure(&self.spec, xi)
    }

    fn domain_radius(&self) -> f64 {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_transforms() {
        let d = MeasureSpec::dirac([0.0; 3]);
        assert_eq!(fourier_of_measure(&d, [1.0, -2.0, 3.0]), Complex64::new(1.0, 0.0));
        let g = MeasureSpec::maxwellian();
        let xi = [0.3, 1.1, -0.7];
        let want = (-0.5 * dot(xi, xi)).exp();
        assert!((fourier_of_measure(&g, xi) - want).norm() < 1e-15);
    }

    #[test]
    fn example_datum_closed_form() {
        let spec = example_initial_datum();
        spec.validate().unwrap();
        assert_eq!(fourier_of_measure(&spec, [0.0; 3]), Complex64::new(1.0, 0.0));
        let pi = std::f64::consts::PI;
        let v = fourier_of_measure(&spec, [pi, 0.0, 0.0]);
        let want = 0.5 * (-pi * pi / 2.0).exp() + (1.0 / 6.0) * (pi.cos() + 2.0);
        assert!((v.re - want).abs() < 1e-15 && v.im.abs() < 1e-15);
        assert!((v.re - 0.170264).abs() < 2e-6);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let text = r#"{"atoms":[{"x":[1,0,0],"w":0.25}],"gaussians":[{"mean":[0,0,0],"var":2.0,"w":0.75}]}"#;
        let spec = MeasureSpec::from_json(text).unwrap();
        assert_eq!(MeasureSpec::from_json(&spec.to_json().unwrap()).unwrap(), spec);
        assert!(MeasureSpec::from_json(r#"{"atoms":[{"x":[1,0,0],"w":0.5}]}"#).is_err());
        assert!(MeasureSpec::from_json(r#"{"gaussians":[{"mean":[0,0,0],"var":0.0,"w":1.0}]}"#).is_err());
        assert!(matches!(MeasureSpec::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn moments_of_example() {
        let m = example_initial_datum().moments();
        assert!(m.mean.iter().all(|c| c.abs() < 1e-15));
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 / 3.0 } else { 0.0 };
                assert!((m.second[i][j] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn envelope_only_for_pure_gaussians() {
        assert_eq!(example_initial_datum().envelope_variance(), 0.0);
        assert_eq!(MeasureSpec::maxwellian().envelope_variance(), 1.0);
    }
}
