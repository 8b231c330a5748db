//! Characteristic functions sampled on a uniform cube `[-R, R]³` with `N` nodes per axis.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AnalyticCharFn, CharFn};
use crate::error::{Error, Result};
use crate::vec3::{dot, Vec3};
use crate::FORMAT_VERSION;

/// Modulus slack absorbing roundoff in `|ψ| ≤ 1`.
pub const MODULUS_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Trilinear,
    #[default]
    Tricubic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharGrid {
    radius: f64,
    n: usize,
    values: Vec<Complex64>,
    envelope: f64,
    interpolation: Interpolation,
    coords: Vec<f64>,
    inv_envelope: Vec<f64>,
}

/// Measured deviations from the characteristic-function invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInvariants {
    pub max_modulus: f64,
    pub hermitian_defect: f64,
    pub origin_defect: f64,
}

/// JSON sidecar written next to a persisted grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub radius: f64,
    pub n: usize,
    pub time: f64,
    pub s: f64,
    pub alpha: f64,
    pub kernel_strength: f64,
    /// Cutoff level n of b_n; `None` for the non-cutoff kernel.
    pub cutoff: Option<f64>,
    pub format_version: u32,
}

impl CharGrid {
    pub fn new(radius: f64, n: usize, values: Vec<Complex64>, envelope: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("grid radius must be positive, got {radius}")));
        }
        if n < 4 {
            return Err(Error::Domain(format!("grid needs at least 4 points per axis, got {n}")));
        }
        if values.len() != n * n * n {
            return Err(Error::Domain(format!("expected {} grid values, got {}", n * n * n, values.len())));
        }
        if !(envelope >= 0.0 && envelope.is_finite()) {
            return Err(Error::Domain(format!("envelope variance must be nonnegative, got {envelope}")));
        }
        let h = radius / (n - 1) as f64;
        // x_i = (2i − (N−1))·R/(N−1) is exactly antisymmetric under i ↦ N−1−i.
        let coords: Vec<f64> = (0..n).map(|i| (2.0 * i as f64 - (n - 1) as f64) * h).collect();
        let inv_envelope = coords.iter().map(|x| (0.5 * envelope * x * x).exp()).collect();
        Ok(CharGrid { radius, n, values, envelope, interpolation: Interpolation::default(), coords, inv_envelope })
    }

    /// Exact analytic values at every node.
    pub fn sample(psi: &AnalyticCharFn, radius: f64, n: usize) -> Result<Self> {
        let mut grid = CharGrid::new(radius, n, vec![Complex64::new(0.0, 0.0); n * n * n], psi.spec().envelope_variance())?;
        for idx in 0..grid.values.len() {
            grid.values[idx] = psi.value(grid.node_at(idx));
        }
        Ok(grid)
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    /// Same geometry, envelope and interpolation with new node values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Usage("value count does not match grid geometry".into()));
        }
        Ok(CharGrid { values, ..self.clone() })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.n - 1) as f64
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn envelope(&self) -> f64 {
        self.envelope
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn split_index(&self, idx: usize) -> [usize; 3] {
        [idx / (self.n * self.n), (idx / self.n) % self.n, idx % self.n]
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [self.coords[i], self.coords[j], self.coords[k]]
    }

    #[inline]
    pub fn node_at(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.split_index(idx);
        self.node(i, j, k)
    }

    /// Index of the node at −ξ.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        self.values.len() - 1 - idx
    }

    pub fn origin_index(&self) -> Option<usize> {
        (self.n % 2 == 1).then(|| {
            let c = self.n / 2;
            self.index(c, c, c)
        })
    }

    /// ψ at ξ = 0: the stored node for odd N, interpolated otherwise.
    pub fn origin_value(&self) -> Complex64 {
        match self.origin_index() {
            Some(idx) => self.values[idx],
            None => self.value([0.0; 3]),
        }
    }

    pub fn same_geometry(&self, other: &CharGrid) -> bool {
        self.n == other.n && self.radius == other.radius
    }

    /// Gaussian envelope e^{-v|ξ|²/2} factored out before interpolating.
    #[inline]
    pub fn envelope_at(&self, xi: Vec3) -> f64 {
        if self.envelope == 0.0 {
            1.0
        } else {
            (-0.5 * self.envelope * dot(xi, xi)).exp()
        }
    }

    /// sup |ψ| over nodes with lo ≤ |ξ| ≤ hi; zero when the shell holds no node.
    pub fn shell_sup(&self, lo: f64, hi: f64) -> f64 {
        (0..self.values.len())
            .filter(|&idx| {
                let r = crate::vec3::norm(self.node_at(idx));
                r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)
            })
            .map(|idx| self.values[idx].norm())
            .fold(0.0, f64::max)
    }

    /// Indices of nodes inside the inscribed ball |ξ| ≤ R.
    pub fn ball_indices(&self) -> Vec<usize> {
        let lim = self.radius * (1.0 + 1e-12);
        (0..self.values.len()).filter(|&idx| crate::vec3::norm(self.node_at(idx)) <= lim).collect()
    }

    pub fn invariants(&self) -> GridInvariants {
        let max_modulus = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let hermitian_defect = (0..self.values.len())
            .map(|idx| (self.values[self.mirror(idx)] - self.values[idx].conj()).norm())
            .fold(0.0, f64::max);
        let origin_defect = (self.origin_value() - 1.0).norm();
        GridInvariants { max_modulus, hermitian_defect, origin_defect }
    }

    /// Fails when |ψ| exceeds `1 + MODULUS_SLACK`, Hermitian symmetry is off by more
    /// than `hermitian_tol`, or ψ(0) differs from 1 by more than `origin_tol`.
    pub fn check_invariants(&self, hermitian_tol: f64, origin_tol: f64) -> Result<GridInvariants> {
        let inv = self.invariants();
        if inv.max_modulus > 1.0 + MODULUS_SLACK {
            return Err(Error::Validation(format!("grid modulus {} exceeds 1", inv.max_modulus)));
        }
        if inv.hermitian_defect > hermitian_tol {
            return Err(Error::Validation(format!("Hermitian defect {:.3e}", inv.hermitian_defect)));
        }
        if inv.origin_defect > origin_tol {
            return Err(Error::Validation(format!("|psi(0) - 1| = {:.3e}", inv.origin_defect)));
        }
        Ok(inv)
    }

    /// Interpolated ψ(ξ); errors when ξ lies outside the cube.
    pub fn interpolate(&self, xi: Vec3) -> Result<Complex64> {
        let lim = self.radius * (1.0 + 1e-12);
        if xi.iter().any(|c| !(c.abs() <= lim)) {
            return Err(Error::Domain(format!("point {xi:?} outside grid cube of half-width {}", self.radius)));
        }
        Ok(self.value(xi))
    }

    #[inline]
    fn axis_stencil(&self, q: f64) -> (usize, [f64; 4], usize) {
        let h = self.spacing();
        let t = ((q + self.radius) / h).clamp(0.0, (self.n - 1) as f64);
        let cell = (t.floor() as usize).min(self.n - 2);
        let (base, w, width) = match self.interpolation {
            Interpolation::Trilinear => {
                let x = t - cell as f64;
                (cell, [1.0 - x, x, 0.0, 0.0], 2)
            }
            Interpolation::Tricubic => {
                let base = cell.saturating_sub(1).min(self.n - 4);
                let x = t - base as f64;
                let (a, b, c, d) = (x, x - 1.0, x - 2.0, x - 3.0);
                (base, [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0], 4)
            }
        };
        let mut w = w;
        if self.envelope != 0.0 {
            for m in 0..width {
                w[m] *= self.inv_envelope[base + m];
            }
        }
        (base, w, width)
    }

    #[inline]
    fn interpolate_clamped(&self, xi: Vec3) -> Complex64 {
        let (bi, wi, width) = self.axis_stencil(xi[0]);
        let (bj, wj, _) = self.axis_stencil(xi[1]);
        let (bk, wk, _) = self.axis_stencil(xi[2]);
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..width {
            let mut plane = Complex64::new(0.0, 0.0);
            for b in 0..width {
                let row = ((bi + a) * n + bj + b) * n + bk;
                let vals = &self.values[row..row + width];
                let mut line = Complex64::new(0.0, 0.0);
                for (v, w) in vals.iter().zip(&wk[..width]) {
                    line += v * w;
                }
                plane += line * wj[b];
            }
            acc += plane * wi[a];
        }
        let c = self.envelope_at(xi.map(|q| q.clamp(-self.radius, self.radius)));
        acc * c
    }

    pub fn save(&self, path: &Path, header: &GridHeader) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        out.flush()?;
        fs::write(sidecar_path(path), serde_json::to_string_pretty(header)?)?;
        Ok(())
    }

    /// Reads a grid written by [`CharGrid::save`]; the envelope is not persisted,
    /// so loaded grids interpolate ψ directly.
    pub fn load(path: &Path) -> Result<(Self, GridHeader)> {
        let header: GridHeader = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Usage(format!(
                "grid format version {} is not supported (expected {FORMAT_VERSION})",
                header.format_version
            )));
        }
        let bytes = fs::read(path)?;
        let count = header.n.pow(3);
        if bytes.len() != 16 * count {
            return Err(Error::Usage(format!("grid file holds {} bytes, header implies {}", bytes.len(), 16 * count)));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok((CharGrid::new(header.radius, header.n, values, 0.0)?, header))
    }
}

/// `<path>.json`, the sidecar holding the grid header.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn sample_to_grid(psi: &AnalyticCharFn, radius: f64, n: usize) -> Result<CharGrid> {
    CharGrid::sample(psi, radius, n)
}

impl CharFn for CharGrid {
    /// Interpolates after clamping ξ into the cube.
    fn value(&self, xi: Vec3) -> Complex64 {
        self.interpolate_clamped(xi)
    }

    fn domain_radius(&self) -> f64 {
        self.radius
    }

    fn eval(&self, xi: Vec3) -> Result<Complex64> {
        self.interpolate(xi)
    }
}
