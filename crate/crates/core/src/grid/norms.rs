use super::field::{DiskField, EXTRAPOLATION_GROWTH_BOUND};
use super::fourier::{lp_mean, samples_from_coeffs, BoundarySpectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Normalized `L^p` norm of `field` on the circle of radius `r`.
///
/// `r` must be a radial node or `1`; on the unit circle the exact edge is used
/// when the field carries one, otherwise the profiles are extrapolated.
pub fn circle_norm(field: &DiskField, r: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = field.grid();
    if let Some(j) = grid.node_index(r) {
        return Ok(field.ring_lp(j, p));
    }
    if (r - 1.0).abs() <= 1e-12 {
        let edge = match field.edge() {
            Some(e) => e.to_vec(),
            None => field.extrapolate_edge(EXTRAPOLATION_GROWTH_BOUND)?,
        };
        let s = samples_from_coeffs(&edge, grid.padded_len());
        return Ok(lp_mean(&s, p));
    }
    Err(Error::RadiusNotOnGrid(r))
}

/// Maximum of the circle norms over all radial nodes, and over the unit circle
/// when the field carries exact edge values.
pub fn hardy_norm(field: &DiskField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = field.grid();
    let mut best: f64 = 0.0;
    for j in 0..grid.n_r() {
        best = best.max(field.ring_lp(j, p));
    }
    if let Some(edge) = field.edge() {
        let s = samples_from_coeffs(edge, grid.padded_len());
        best = best.max(lp_mean(&s, p));
    }
    Ok(best)
}

/// `(‖φ‖_p^p + ‖∂_t φ‖_p^p)^{1/p}` with `∂_t = ∂_θ/(2π)`; order 0 gives `‖φ‖_p`.
pub fn sobolev_norm(phi: &BoundarySpectrum, p: f64, order: u8) -> Result<f64> {
    check_exponent(p)?;
    let base = phi.lp_norm(p);
    match order {
        0 => Ok(base),
        1 => {
            let dt = phi.derivative().scale(Complex64::new(1.0 / (2.0 * PI), 0.0));
            Ok((base.powf(p) + dt.lp_norm(p).powf(p)).powf(1.0 / p))
        }
        _ => Err(Error::InvalidConfig(format!("Sobolev order {order} not in {{0, 1}}"))),
    }
}

/// Slobodeckij seminorm `(∬ |φ(x)−φ(y)|^p / |x−y|^{1+sp} ds_x ds_y)^{1/p}` over `T×T`.
///
/// Tensor trapezoid rule on the circle grid with chordal distance and the
/// diagonal cells left out; first-order accurate.
pub fn fractional_seminorm(phi: &BoundarySpectrum, s: f64, p: f64) -> Result<f64> {
    fractional_seminorm_samples(&phi.samples(), None, s, p)
}

/// Same double sum over equispaced samples, restricted to `mask × mask` when given.
pub fn fractional_seminorm_samples(values: &[Complex64], mask: Option<&[bool]>, s: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidConfig(format!("fractional order {s} not in (0, 1)")));
    }
    let n = values.len();
    let h = 2.0 * PI / n as f64;
    let inside = |k: usize| mask.is_none_or(|m| m[k]);
    // Kernel depends only on the index distance.
    let kernel: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                let chord = 2.0 * (PI * d as f64 / n as f64).sin();
                chord.powf(-(1.0 + s * p))
            }
        })
        .collect();
    let mut sum = 0.0;
    for k in 0..n {
        if !inside(k) {
            continue;
        }
        for l in 0..n {
            if l == k || !inside(l) {
                continue;
            }
            let d = k.abs_diff(l);
            sum += (values[k] - values[l]).norm().powf(p) * kernel[d];
        }
    }
    Ok((sum * h * h).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CircleGrid, PolarGrid};
    use num_complex::Complex64 as C64;

    #[test]
    fn circle_norm_examples() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let c = g.sample_fn(|_| C64::new(3.0, -4.0));
        for &r in &[g.radial().nodes()[3], 1.0] {
            for &p in &[1.5, 2.0, 4.0] {
                assert!((circle_norm(&c, r, p).unwrap() - 5.0).abs() < 1e-13);
            }
        }
        // 2 panels: 0.5 is a panel edge, not a node; use a grid with a node there.
        let g = PolarGrid::new(32, 1, 3).unwrap();
        assert!(g.node_index(0.5).is_some());
        let f = g.sample_fn(|z| z + z * z);
        let v = circle_norm(&f, 0.5, 2.0).unwrap();
        assert!((v - (0.25f64 + 0.0625).sqrt()).abs() < 1e-14);
        assert!(circle_norm(&f, 0.7, 2.0).is_err());
        assert!(circle_norm(&f, 0.5, 1.0).is_err());
    }

    #[test]
    fn hardy_norm_of_z_is_outer_radius() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let f = g.sample_fn(|z| z).without_edge();
        let rmax = *g.radial().nodes().last().unwrap();
        assert!((hardy_norm(&f, 2.0).unwrap() - rmax).abs() < 1e-14);
        let f = g.sample_fn(|z| z);
        assert!((hardy_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sobolev_norm_matches_quadrature() {
        let c = CircleGrid::new(64).unwrap();
        let phi = BoundarySpectrum::from_fn(c, |t| C64::from_polar(1.0, t));
        assert!((sobolev_norm(&phi, 2.0, 0).unwrap() - 1.0).abs() < 1e-14);
        let expect = (1.0 + 1.0 / (4.0 * PI * PI)).sqrt();
        assert!((sobolev_norm(&phi, 2.0, 1).unwrap() - expect).abs() < 1e-14);
        let k = BoundarySpectrum::from_real_fn(c, |_| -2.0);
        assert!((sobolev_norm(&k, 3.0, 1).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fractional_seminorm_of_exponential() {
        let c = CircleGrid::new(64).unwrap();
        let phi = BoundarySpectrum::from_fn(c, |t| C64::from_polar(1.0, t));
        let v = fractional_seminorm(&phi, 0.5, 2.0).unwrap();
        let n = 64.0;
        assert!((v - 2.0 * PI * (1.0f64 - 1.0 / n).sqrt()).abs() < 1e-12);
        let k = BoundarySpectrum::from_real_fn(c, |_| 7.0);
        assert!(fractional_seminorm(&k, 0.5, 2.0).unwrap() < 1e-12);
    }
}
