use super::dirichlet::dirichlet_h;
use super::{Certificate, SolveConfig, SolveReport};
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{BoundarySpectrum, DiskField};
use crate::ops::{trace_at_boundary, TraceKind};
use num_complex::Complex64;

type C64 = Complex64;

/// `∂_r u` at `r = 1` from the one-sided cubic through the three outermost
/// nodes and the edge values.
pub fn normal_derivative_stencil(u: &DiskField) -> Result<BoundarySpectrum> {
    let edge = u.edge().ok_or(Error::NoExactTrace)?;
    let grid = u.grid();
    let nr = grid.n_r();
    let nodes = grid.radial().nodes();
    let xs = [nodes[nr - 3], nodes[nr - 2], nodes[nr - 1], 1.0];
    // Derivative at x = 1 of the Lagrange basis on xs.
    let weights: Vec<f64> = (0..4)
        .map(|i| {
            let denom: f64 = (0..4).filter(|&k| k != i).map(|k| xs[i] - xs[k]).product();
            let num: f64 = (0..4)
                .filter(|&k| k != i)
                .map(|skip| {
                    (0..4)
                        .filter(|&k| k != i && k != skip)
                        .map(|k| 1.0 - xs[k])
                        .product::<f64>()
                })
                .sum();
            num / denom
        })
        .collect();
    let m = grid.max_mode() as isize;
    let coeffs = (-m..=m)
        .map(|n| {
            let p = u.profile(n);
            let e = edge[(n + m) as usize];
            weights[0] * p[nr - 3] + weights[1] * p[nr - 2] + weights[2] * p[nr - 1] + weights[3] * e
        })
        .collect();
    BoundarySpectrum::from_coeffs(grid.circle(), coeffs, false)
}

/// Zero-mean solution of `div(σ∇u) = 0` with `∂ₙu = g` on the circle.
///
/// With `∂_θ v = σg`, `v` is the boundary value of the harmonic-type conjugate;
/// `F` solving the `−ν` equation with `Re tr F = v` gives `f = iF` solving the
/// original one with `Im tr f = v`, and `u = Re f = −Im F`.
pub fn neumann(g: &BoundarySpectrum, coef: &Coefficient, cfg: &SolveConfig) -> Result<(DiskField, SolveReport)> {
    cfg.validate()?;
    g.require_real()?;
    let sigma = coef.sigma_on_boundary();
    let sg = BoundarySpectrum::pointwise(g.circle(), &[g, &sigma], |_, v| C64::new(v[0].re * v[1].re, 0.0))
        .into_real(1e-9)?;
    let compat = sg.mean().re;
    let scale = sg.lp_norm(cfg.p);
    if compat.abs() > cfg.outer_tol * scale.max(1.0) {
        return Err(Error::Compatibility(compat));
    }
    let v = sg.antiderivative();
    let (big_f, mut report) = dirichlet_h(&v, &coef.negated(), cfg)?;
    let u = big_f.imag_part().scale(C64::new(-1.0, 0.0));
    let mean = trace_at_boundary(&u, TraceKind::CauchyImage)?.mean();
    let u = u.add_constant(-mean);
    report.norm("compatibility", compat);

    let gscale = g.lp_norm(cfg.p).max(f64::MIN_POSITIVE);
    // Primary: ∂ₙu = ∂_θ(tr v)/σ with tr v = Im tr f = Re tr F.
    let tr_v = trace_at_boundary(&big_f, TraceKind::CauchyImage)?.real_part();
    let dn = BoundarySpectrum::pointwise(g.circle(), &[&tr_v.derivative(), &sigma], |_, x| x[0] / x[1].re);
    let primary = dn.sub(g).lp_norm(cfg.p) / gscale;
    report.certify("normal_derivative_trace", Certificate::at_most(primary, cfg.outer_tol));
    let stencil = normal_derivative_stencil(&u)?.sub(g).lp_norm(cfg.p) / gscale;
    report.norm("normal_derivative_stencil", stencil);
    Ok((u.real_part(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use std::sync::Arc;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(64, 4, 8).unwrap()
    }

    fn cos(g: &Arc<PolarGrid>, k: isize) -> BoundarySpectrum {
        BoundarySpectrum::from_modes(g.circle(), &[(k, C64::new(0.5, 0.0)), (-k, C64::new(0.5, 0.0))])
    }

    #[test]
    fn harmonic_and_constant_sigma() {
        let g = grid();
        let cfg = SolveConfig::default();
        let expect = g.sample_fn(|z| z.re.into());
        for coef in [Coefficient::zero(&g), Coefficient::constant_sigma(&g, 3.0).unwrap()] {
            let (u, rep) = neumann(&cos(&g, 1), &coef, &cfg).unwrap();
            assert!(u.sub(&expect).max_abs() < 1e-9, "{}", u.sub(&expect).max_abs());
            assert!(rep.certificates["normal_derivative_trace"].holds);
            assert!(rep.norms["normal_derivative_stencil"] < 1e-6);
        }
    }

    #[test]
    fn incompatible_data_rejected() {
        let g = grid();
        let one = BoundarySpectrum::from_modes(g.circle(), &[(0, C64::new(1.0, 0.0))]);
        assert!(matches!(
            neumann(&one, &Coefficient::zero(&g), &SolveConfig::default()),
            Err(Error::Compatibility(_))
        ));
    }

    #[test]
    fn stencil_is_exact_for_cubics() {
        let g = grid();
        let u = g.sample_fn(|z| (z.norm().powi(3) - 2.0 * z.norm_sqr()).into());
        let dn = normal_derivative_stencil(&u).unwrap();
        assert!((dn.mean().re - (3.0 - 4.0)).abs() < 1e-10);
    }

    #[test]
    fn radial_sigma_matches_ode_oracle() {
        let g = grid();
        let coef = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let oracle = crate::radial_oracle::RadialOracle::new(0.5).unwrap();
        let (u, _) = neumann(&cos(&g, 2), &coef, &SolveConfig::default()).unwrap();
        for r in [0.3, 0.6, 0.9] {
            let got = BoundarySpectrum::from_coeffs(g.circle(), u.coeffs_at_radius(r), false).unwrap();
            let want = oracle.neumann_ring(&cos(&g, 2), r);
            let err = got.sub(&want).l2_norm() / want.l2_norm();
            assert!(err < 1e-5, "r = {r}: {err}");
        }
    }
}
