use super::SolveReport;
use crate::coeff::{alpha1_from_nu, Coefficient};
use crate::grid::{hardy_norm, BoundarySpectrum, DiskField};
use num_complex::Complex64;

type C64 = Complex64;

/// `W = (1−ν²)^{1/2}∂f`, which solves `∂̄W = α₁W̄` with `α₁ = ∂ν/(1−ν²)`.
///
/// The report carries the spectral residual of that equation relative to
/// `‖W‖_{L²(D)}` and the sup over interior rings of `‖∂f‖_p` and `‖∂̄f‖_p`.
pub fn gradient_field(f: &DiskField, coef: &Coefficient, p: f64) -> crate::Result<(DiskField, SolveReport)> {
    let df = f.d();
    let w = DiskField::pointwise(coef.grid(), &[&df, coef.nu()], |_, v| {
        v[0] * (1.0 - v[1].re * v[1].re).sqrt()
    });
    let alpha1 = alpha1_from_nu(coef).without_edge();
    let resid = DiskField::pointwise(coef.grid(), &[&w.d_bar(), &w, &alpha1], |_, v| {
        v[0] - v[2] * v[1].conj()
    });
    let mut report = SolveReport::default();
    let scale = w.l2_norm();
    report.norm(
        "gradient_residual",
        if scale > 0.0 { resid.l2_norm() / scale } else { 0.0 },
    );
    report.norm("hardy_d", hardy_norm(&df, p)?);
    report.norm("hardy_dbar", hardy_norm(&f.d_bar(), p)?);
    Ok((w, report))
}

/// Boundary limit of `∂f` from the trace alone:
/// `Φ = −ie^{−iθ}(∂_θ tr f − ν ∂_θ conj(tr f))/(1−ν²)`.
pub fn boundary_derivative(trace_f: &BoundarySpectrum, coef: &Coefficient) -> BoundarySpectrum {
    let dt = trace_f.derivative();
    let dtc = trace_f.conj().derivative();
    let nu = coef.nu_on_boundary();
    BoundarySpectrum::pointwise(trace_f.circle(), &[&dt, &dtc, &nu], |theta, v| {
        let nu = v[2].re;
        C64::new(0.0, -1.0) * C64::from_polar(1.0, -theta) * (v[0] - nu * v[1]) / (1.0 - nu * nu)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use std::sync::Arc;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(32, 2, 8).unwrap()
    }

    #[test]
    fn holomorphic_gradients() {
        let g = grid();
        let coef = Coefficient::zero(&g);
        let (w, rep) = gradient_field(&g.sample_fn(|z| z), &coef, 2.0).unwrap();
        assert!(
            w.sub(&DiskField::constant(&g, C64::new(1.0, 0.0)).without_edge())
                .max_abs()
                < 1e-12
        );
        assert!(rep.norms["gradient_residual"] < 1e-12);
        let (w, _) = gradient_field(&DiskField::constant(&g, C64::new(2.0, -1.0)), &coef, 2.0).unwrap();
        assert!(w.max_abs() < 1e-13);
    }

    #[test]
    fn trace_formula_monomials() {
        let g = grid();
        let coef = Coefficient::zero(&g);
        let c = g.circle();
        let phi = boundary_derivative(&BoundarySpectrum::from_modes(c, &[(1, C64::new(1.0, 0.0))]), &coef);
        assert!(
            phi.sub(&BoundarySpectrum::from_modes(c, &[(0, C64::new(1.0, 0.0))]))
                .max_abs()
                < 1e-13
        );
        let phi = boundary_derivative(&BoundarySpectrum::from_modes(c, &[(2, C64::new(1.0, 0.0))]), &coef);
        assert!(
            phi.sub(&BoundarySpectrum::from_modes(c, &[(1, C64::new(2.0, 0.0))]))
                .max_abs()
                < 1e-13
        );
    }
}
