//! Polar/Fourier discretization of the disk and the unit circle, and the norms measured on it.

mod field;
mod fourier;
mod norms;
mod quadrature;

pub use field::{DiskField, PolarGrid, EXTRAPOLATION_GROWTH_BOUND};
pub use fourier::{BoundarySpectrum, CircleGrid};
pub use norms::{circle_norm, fractional_seminorm, fractional_seminorm_samples, hardy_norm, sobolev_norm};
pub use quadrature::{gauss_legendre, RadialRule};

use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Serializable grid sizes: `n_theta` angles and `panels × per_panel` radial nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub panels: usize,
    pub per_panel: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_theta: 256,
            panels: 8,
            per_panel: 8,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> crate::Result<Arc<PolarGrid>> {
        PolarGrid::new(self.n_theta, self.panels, self.per_panel)
    }

    /// Twice the angles and twice the panels.
    pub fn refined(&self) -> Self {
        Self {
            n_theta: 2 * self.n_theta,
            panels: 2 * self.panels,
            per_panel: self.per_panel,
        }
    }
}

#[allow(unused_imports)]
pub(crate) use fourier::{coeffs_from_samples, lp_mean, samples_from_coeffs};
#[allow(unused_imports)]
pub(crate) use norms::check_exponent;
