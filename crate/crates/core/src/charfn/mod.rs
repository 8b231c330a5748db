//! Probability measures, their characteristic functions (analytic and gridded),
//! and the K^α metric.

mod grid;
mod measure;
mod metric;

pub use grid::{sample_to_grid, sidecar_path, CharGrid, GridHeader, GridInvariants, Interpolation, MODULUS_SLACK};
pub use measure::{
    catalog, example_initial_datum, fourier_of_measure, perturbed_example, AnalyticCharFn, Atom, GaussianComponent,
    MeasureSpec, Moments,
};
pub use metric::{
    k_alpha_distance, k_alpha_distance_on, taylor_limit, verify_characteristic, AlphaCheck, CharCheckConfig,
    CharCheckReport, CharRef, InequalityMargin, KAlphaReport, SampleDomain,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::vec3::{norm, Vec3};

/// A characteristic function that can be evaluated at arbitrary frequencies.
pub trait CharFn: Sync {
    /// ψ(ξ) without domain checks; callers keep |ξ| within [`CharFn::domain_radius`].
    fn value(&self, xi: Vec3) -> Complex64;

    /// Radius of the ball on which the representation is trusted.
    fn domain_radius(&self) -> f64;

    fn eval(&self, xi: Vec3) -> Result<Complex64> {
        if norm(xi) > self.domain_radius() * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("point {xi:?} outside the evaluation ball")));
        }
        Ok(self.value(xi))
    }
}
