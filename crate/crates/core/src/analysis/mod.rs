//! Boundary behaviour, duality identities and the density experiments.

mod adjoint;
mod density;

pub use adjoint::{adjoint_check, orthogonality_check, AdjointReport, DualitySpot, OrthogonalityReport};
pub use density::{density_experiment, density_sobolev_experiment, ArcSplit, DensityReport, DensityRow, RIDGE};

use crate::error::{Error, Result};
use crate::grid::{BoundarySpectrum, DiskField};
use crate::ops::trace;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

type C64 = Complex64;

/// Sample set of a nontangential approach region: from each boundary point `ξ`,
/// rays at angles in `[−β, β]` off the inward normal, with steps `2^{−k}` toward the centre.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorConfig {
    pub aperture: f64,
    pub rays: usize,
    pub depths: usize,
}

impl Default for SectorConfig {
    fn default() -> Self {
        Self {
            aperture: 0.5,
            rays: 8,
            depths: 8,
        }
    }
}

impl SectorConfig {
    pub fn new(aperture: f64, rays: usize, depths: usize) -> Result<Self> {
        let cfg = Self { aperture, rays, depths };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aperture > 0.0 && self.aperture < FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!(
                "aperture {} not in (0, π/2)",
                self.aperture
            )));
        }
        if self.rays == 0 || self.depths == 0 {
            return Err(Error::InvalidConfig(
                "sector needs at least one ray and one depth".into(),
            ));
        }
        Ok(())
    }

    /// Offsets `z/ξ` of the sample points for `ξ = 1`; rotate by `ξ` for other boundary points.
    pub fn offsets(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rays * self.depths);
        for i in 0..self.rays {
            let phi = if self.rays == 1 {
                0.0
            } else {
                -self.aperture + 2.0 * self.aperture * i as f64 / (self.rays - 1) as f64
            };
            for k in 1..=self.depths {
                let rho = 0.5f64.powi(k as i32);
                out.push(1.0 - rho * C64::from_polar(1.0, phi));
            }
        }
        out
    }

    /// Every sample lies in the disk and in the sector at `ξ = 1`.
    pub fn points_valid(&self) -> bool {
        self.offsets()
            .iter()
            .all(|z| z.norm() < 1.0 && (1.0 - z).arg().abs() <= self.aperture + 1e-12)
    }
}

/// Nontangential maximal function sampled at the circle grid angles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NontangentialMax {
    pub values: Vec<f64>,
    pub lp_norm: f64,
    pub trace_lp_norm: f64,
}

/// `M_f(ξ) = sup |f|` over the sector samples at each grid angle, with `‖M_f‖_p` and `‖tr f‖_p`.
pub fn nontangential_max(field: &DiskField, sectors: &SectorConfig, p: f64) -> Result<NontangentialMax> {
    sectors.validate()?;
    crate::grid::check_exponent(p)?;
    let circle = field.grid().circle();
    let offsets = sectors.offsets();
    let values: Vec<f64> = (0..circle.n_theta())
        .into_par_iter()
        .map(|k| {
            let xi = C64::from_polar(1.0, circle.theta(k));
            offsets.iter().map(|o| field.eval(xi * o).norm()).fold(0.0, f64::max)
        })
        .collect();
    let lp_norm = (values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64).powf(1.0 / p);
    let trace_lp_norm = trace(field)?.lp_norm(p);
    Ok(NontangentialMax {
        values,
        lp_norm,
        trace_lp_norm,
    })
}

/// `(r, ‖f(r·) − tr f‖_{L^p(T)})` over the radial nodes, using the exact trace when present.
pub fn fatou_convergence(field: &DiskField, p: f64) -> Result<Vec<(f64, f64)>> {
    crate::grid::check_exponent(p)?;
    let tr = trace(field)?;
    let grid = field.grid();
    grid.radial()
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let ring = BoundarySpectrum::from_coeffs(grid.circle(), field.ring_coeffs(j), false)?;
            Ok((r, ring.sub(&tr).lp_norm(p)))
        })
        .collect()
}

/// `⟨f, g⟩ = Re (1/2π)∫ f g dθ = Re Σ f̂_n ĝ_{−n}`.
pub fn duality_pair(f: &BoundarySpectrum, g: &BoundarySpectrum) -> f64 {
    let m = f.max_mode().min(g.max_mode()) as isize;
    (-m..=m).map(|n| f.mode(n) * g.mode(-n)).sum::<C64>().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;

    #[test]
    fn sector_geometry() {
        let s = SectorConfig::default();
        assert_eq!(s.offsets().len(), 64);
        assert!(s.points_valid());
        assert!(SectorConfig::new(1.7, 4, 4).is_err());
    }

    #[test]
    fn maximal_function_examples() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let c = nontangential_max(
            &DiskField::constant(&g, C64::new(0.0, 2.0)),
            &SectorConfig::default(),
            2.0,
        )
        .unwrap();
        assert!(c.values.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let z = nontangential_max(&g.sample_fn(|z| z), &SectorConfig::default(), 2.0).unwrap();
        assert!(z.values.iter().all(|&v| v <= 1.0));
        assert!(z.lp_norm >= z.trace_lp_norm - 0.01);
    }

    #[test]
    fn fatou_examples() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        for (r, e) in fatou_convergence(&g.sample_fn(|z| z), 2.0).unwrap() {
            assert!((e - (1.0 - r)).abs() < 1e-12);
        }
        let c = fatou_convergence(&DiskField::constant(&g, C64::new(1.0, 1.0)), 3.0).unwrap();
        assert!(c.iter().all(|&(_, e)| e < 1e-14));
    }

    #[test]
    fn pairing_examples() {
        let c = crate::grid::CircleGrid::new(16).unwrap();
        let one = BoundarySpectrum::from_modes(c, &[(0, C64::new(1.0, 0.0))]);
        let e1 = BoundarySpectrum::from_modes(c, &[(1, C64::new(1.0, 0.0))]);
        let em1 = BoundarySpectrum::from_modes(c, &[(-1, C64::new(1.0, 0.0))]);
        assert_eq!(duality_pair(&one, &one), 1.0);
        assert_eq!(duality_pair(&e1, &em1), 1.0);
        assert_eq!(duality_pair(&e1, &e1), 0.0);
    }
}
