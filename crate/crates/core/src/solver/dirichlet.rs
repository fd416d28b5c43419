use super::fredholm::solve_fredholm;
use super::{Certificate, SolveConfig, SolveReport};
use crate::coeff::{alpha_from_nu, nu_to_sigma, similarity_inverse, AlphaField, Coefficient};
use crate::error::{Error, Result};
use crate::grid::{circle_norm, hardy_norm, sobolev_norm, BoundarySpectrum, CircleGrid, DiskField};
use crate::krylov::gmres;
use crate::ops::{cauchy_boundary, trace_at_boundary, TraceKind};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

type C64 = Complex64;

/// Real coordinates of a real spectrum plus one constant, orthonormal in `L²(T)`.
fn pack(x: &BoundarySpectrum, c: f64) -> Vec<f64> {
    let m = x.max_mode() as isize;
    let mut out = Vec::with_capacity(2 * m as usize + 2);
    out.push(x.mode(0).re);
    for n in 1..=m {
        let v = x.mode(n);
        out.push(SQRT_2 * v.re);
        out.push(SQRT_2 * v.im);
    }
    out.push(c);
    out
}

fn unpack(circle: CircleGrid, v: &[f64]) -> (BoundarySpectrum, f64) {
    let m = circle.max_mode() as isize;
    let mut modes = vec![(0, C64::new(v[0], 0.0))];
    for n in 1..=m {
        let i = 2 * n as usize - 1;
        let c = C64::new(v[i], v[i + 1]) / SQRT_2;
        modes.push((n, c));
        modes.push((-n, c.conj()));
    }
    let x = BoundarySpectrum::from_modes(circle, &modes);
    (x, v[v.len() - 1])
}

/// Holomorphic `g` whose trace is `x + i(ℋ₀x + c)`.
fn holomorphic_lift(grid: &std::sync::Arc<crate::grid::PolarGrid>, x: &BoundarySpectrum, c: f64) -> DiskField {
    let m = x.max_mode() as isize;
    let mut modes = vec![(0, x.mode(0) + C64::new(0.0, c))];
    modes.extend((1..=m).map(|n| (n, 2.0 * x.mode(n))));
    cauchy_boundary(grid, &BoundarySpectrum::from_modes(x.circle(), &modes))
}

/// Re-trace and imaginary mean of a field with exact edge values.
fn boundary_data(w: &DiskField) -> Result<(BoundarySpectrum, f64)> {
    let tr = trace_at_boundary(w, TraceKind::CauchyImage)?;
    Ok((tr.real_part(), tr.mean().im))
}

/// Solution of `∂̄w = αw̄` with `Re tr w = ψ` and mean of `Im tr w` equal to `mean_im`.
///
/// The outer unknown is the pair `(x, c′)` generating the holomorphic part
/// `g = 𝒞(x + i(ℋ₀x + c′))`; the map from it to `(Re tr w, mean Im tr w)` is
/// identity plus compact and is inverted by GMRES, each application being one
/// Fredholm solve.
pub fn dirichlet_g(
    psi: &BoundarySpectrum,
    mean_im: f64,
    alpha: &AlphaField,
    cfg: &SolveConfig,
) -> Result<(DiskField, SolveReport)> {
    cfg.validate()?;
    psi.require_real()?;
    let grid = alpha.grid().clone();
    let circle = grid.circle();
    let psi = BoundarySpectrum::from_modes(
        circle,
        &(-(circle.max_mode() as isize)..=circle.max_mode() as isize)
            .map(|n| (n, psi.mode(n)))
            .collect::<Vec<_>>(),
    );
    let mut report = SolveReport::default();

    if alpha.is_zero() {
        let w = holomorphic_lift(&grid, &psi, mean_im);
        report.stage("dirichlet_g", "direct", 0, 0.0, true);
        return Ok((w, report));
    }

    let target = pack(&psi, mean_im);
    let inner_failure = std::cell::RefCell::new(None);
    let forward = |v: &[f64]| -> Vec<f64> {
        let (x, c) = unpack(circle, v);
        let g = holomorphic_lift(&grid, &x, c);
        match solve_fredholm(&g, alpha, cfg).and_then(|(w, _)| boundary_data(&w)) {
            Ok((re, im)) => pack(&re, im),
            Err(e) => {
                inner_failure.borrow_mut().get_or_insert(e);
                vec![0.0; v.len()]
            }
        }
    };
    let out = gmres(
        forward,
        &target,
        Some(target.clone()),
        0.5 * cfg.outer_tol,
        cfg.restart,
        cfg.max_iter,
    );
    if let Some(e) = inner_failure.into_inner() {
        return Err(e);
    }

    let (x, c) = unpack(circle, &out.x);
    let (w, inner) = solve_fredholm(&holomorphic_lift(&grid, &x, c), alpha, cfg)?;
    let (re, im) = boundary_data(&w)?;
    let scale = psi.lp_norm(cfg.p).max(mean_im.abs()).max(f64::MIN_POSITIVE);
    let re_err = re.sub(&psi).lp_norm(cfg.p) / scale;
    let im_err = (im - mean_im).abs() / scale;
    let residual = re_err.max(im_err);
    let ok = residual <= cfg.outer_tol;
    report.stage("dirichlet_g", "gmres", out.iterations, residual, ok);
    report.absorb("inner_", inner);
    if !ok {
        return Err(Error::NotConverged {
            stage: "dirichlet_g".into(),
            iterations: out.iterations,
            residual,
        });
    }
    attach_fatou(&mut report, &w, alpha.sup(), cfg.p)?;
    Ok((w, report))
}

/// Records `‖tr w‖_p ≤ ‖w‖_{H^p} ≤ e^{8‖α‖∞}‖tr w‖_p`.
fn attach_fatou(report: &mut SolveReport, w: &DiskField, alpha_sup: f64, p: f64) -> Result<()> {
    let tr = circle_norm(w, 1.0, p)?;
    let hardy = hardy_norm(w, p)?;
    report.norm("trace_lp", tr);
    report.norm("hardy", hardy);
    let slack = 1e-9 * tr.max(1.0);
    report.certify("fatou_lower", Certificate::at_most(tr, hardy + slack));
    report.certify(
        "fatou_upper",
        Certificate::at_most(hardy, (8.0 * alpha_sup).exp() * tr + slack),
    );
    Ok(())
}

/// Subtracts `i·k·σ^{−1/2}` with `k` the mean of `σ^{1/2} Im tr w`, so that the
/// weighted imaginary mean vanishes. Requires `w` to carry exact edge values.
pub fn normalize_w(w: &DiskField, coef: &Coefficient) -> Result<DiskField> {
    let sig = nu_to_sigma(coef);
    let tr = trace_at_boundary(w, TraceKind::CauchyImage)?;
    let sqrt_sigma = coef.boundary_map(|nu| crate::coeff::nu_to_sigma_value(nu).sqrt());
    let weighted = BoundarySpectrum::pointwise(tr.circle(), &[&tr, &sqrt_sigma], |_, v| {
        C64::new(v[0].im * v[1].re, 0.0)
    });
    let k = weighted.mean().re;
    Ok(w.axpy(C64::new(0.0, -k), &sig.inv_sqrt_sigma))
}

/// The unique normalized solution with `Re tr w = ψ`, for `α` derived from a dilatation.
pub fn dirichlet_g_normalized(
    psi: &BoundarySpectrum,
    alpha: &AlphaField,
    cfg: &SolveConfig,
) -> Result<(DiskField, SolveReport)> {
    let coef = alpha.coefficient().ok_or(Error::AlphaNotFromCoefficient)?;
    let (w1, report) = dirichlet_g(psi, 0.0, alpha, cfg)?;
    Ok((normalize_w(&w1, coef)?, report))
}

/// Solution `f` of `∂̄f = ν·conj(∂f)` with `Re tr f = φ` and `∫ Im tr f = 0`.
pub fn dirichlet_h(phi: &BoundarySpectrum, coef: &Coefficient, cfg: &SolveConfig) -> Result<(DiskField, SolveReport)> {
    phi.require_real()?;
    let sqrt_sigma = coef.boundary_map(|nu| crate::coeff::nu_to_sigma_value(nu).sqrt());
    let psi = BoundarySpectrum::pointwise(phi.circle(), &[phi, &sqrt_sigma], |_, v| {
        C64::new(v[0].re * v[1].re, 0.0)
    })
    .into_real(1e-9)?;
    let alpha = alpha_from_nu(coef);
    let (w, mut report) = dirichlet_g_normalized(&psi, &alpha, cfg)?;
    let f = similarity_inverse(&w, coef);
    let df = f.d().without_edge();
    let resid = DiskField::pointwise(coef.grid(), &[&f.d_bar().without_edge(), &df, coef.nu()], |_, v| {
        v[0] - v[2].re * v[1].conj()
    });
    let scale = df.l2_norm();
    report.norm(
        "beltrami_residual",
        if scale > 0.0 { resid.l2_norm() / scale } else { 0.0 },
    );
    report.norm("hardy_f", hardy_norm(&f, cfg.p)?);
    let phi_w1 = sobolev_norm(phi, cfg.p, 1)?;
    if phi_w1 > 0.0 {
        let tr = trace_at_boundary(&f, TraceKind::CauchyImage)?;
        report.norm("trace_sobolev_ratio", sobolev_norm(&tr.imag_part(), cfg.p, 1)? / phi_w1);
    }
    Ok((f, report))
}

/// `ℋ_νφ = Im tr f` for the normalized solution with `Re tr f = φ`.
pub fn hilbert_nu(
    phi: &BoundarySpectrum,
    coef: &Coefficient,
    cfg: &SolveConfig,
) -> Result<(BoundarySpectrum, SolveReport)> {
    let (f, mut report) = dirichlet_h(phi, coef, cfg)?;
    let h = trace_at_boundary(&f, TraceKind::CauchyImage)?.imag_part();
    let np = phi.lp_norm(cfg.p);
    if np > 0.0 {
        report.norm("hilbert_ratio", h.lp_norm(cfg.p) / np);
    }
    Ok((h, report))
}

/// `u = Re f` for the normalized solution with `Re tr f = φ`, with the
/// Fatou chain and the ring-to-boundary convergence recorded in the report.
pub fn dirichlet_u(phi: &BoundarySpectrum, coef: &Coefficient, cfg: &SolveConfig) -> Result<(DiskField, SolveReport)> {
    let (f, mut report) = dirichlet_h(phi, coef, cfg)?;
    let u = f.real_part();
    let tr = circle_norm(&u, 1.0, cfg.p)?;
    let hardy = hardy_norm(&u, cfg.p)?;
    report.norm("u_trace_lp", tr);
    report.norm("u_hardy", hardy);
    report.certify("u_fatou", Certificate::at_most(tr, hardy * (1.0 + 1e-12) + 1e-14));
    // Convergence of the ring restrictions to the trace, over the outer half of the nodes.
    let grid = u.grid().clone();
    let nodes = grid.radial().nodes();
    let edge = trace_at_boundary(&u, TraceKind::CauchyImage)?;
    let scale = edge.lp_norm(cfg.p).max(f64::MIN_POSITIVE);
    let mut pts = Vec::new();
    for (j, &r) in nodes.iter().enumerate().skip(nodes.len() / 2) {
        let ring = BoundarySpectrum::from_coeffs(grid.circle(), u.ring_coeffs(j), false)?;
        let gap = ring.sub(&edge).lp_norm(cfg.p) / scale;
        if gap > 0.0 {
            pts.push(((1.0 - r).ln(), gap.ln()));
        }
    }
    if let Some(&(_, last)) = pts.last() {
        report.norm("ring_gap_outer", last.exp());
    }
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        report.norm("ring_gap_rate", sxy / sxx);
    }
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use crate::ops::conjugation_h0;
    use std::sync::Arc;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(64, 4, 8).unwrap()
    }

    fn cos(g: &Arc<PolarGrid>, k: isize) -> BoundarySpectrum {
        BoundarySpectrum::from_modes(g.circle(), &[(k, C64::new(0.5, 0.0)), (-k, C64::new(0.5, 0.0))])
    }

    #[test]
    fn holomorphic_cases() {
        let g = grid();
        let cfg = SolveConfig::default();
        let (w, _) = dirichlet_g(&cos(&g, 1), 0.0, &AlphaField::zero(&g), &cfg).unwrap();
        let z = g.sample_fn(|z| z);
        assert!(w.sub(&z).max_abs() < 1e-13);
        let one = BoundarySpectrum::from_modes(g.circle(), &[(0, C64::new(1.0, 0.0))]);
        let (w, _) = dirichlet_g(&one, 5.0, &AlphaField::zero(&g), &cfg).unwrap();
        assert!(w.sub(&DiskField::constant(&g, C64::new(1.0, 5.0))).max_abs() < 1e-13);
    }

    #[test]
    fn self_consistency() {
        let g = grid();
        let cfg = SolveConfig::default();
        let alpha = AlphaField::from_field(g.sample_fn(|z| 0.8 * z.conj() * z + C64::new(0.0, 0.5)));
        let gh = cauchy_boundary(
            &g,
            &BoundarySpectrum::from_modes(g.circle(), &[(0, C64::new(0.3, 1.0)), (2, C64::new(1.0, -0.5))]),
        );
        let (w0, _) = solve_fredholm(&gh, &alpha, &cfg).unwrap();
        let tr0 = trace_at_boundary(&w0, TraceKind::CauchyImage).unwrap();
        let (w, rep) = dirichlet_g(&tr0.real_part(), tr0.mean().im, &alpha, &cfg).unwrap();
        let tr = trace_at_boundary(&w, TraceKind::CauchyImage).unwrap();
        assert!(tr.sub(&tr0).l2_norm() / tr0.l2_norm() < 1e-6, "{:?}", rep.stages);
        assert!(rep.certificates["fatou_lower"].holds && rep.certificates["fatou_upper"].holds);
    }

    #[test]
    fn normalized_cases() {
        let g = grid();
        let cfg = SolveConfig::default();
        let zero = Coefficient::zero(&g);
        let (w, _) = dirichlet_g_normalized(&cos(&g, 1), &alpha_from_nu(&zero), &cfg).unwrap();
        assert!(w.sub(&g.sample_fn(|z| z)).max_abs() < 1e-13);

        let coef = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let alpha = alpha_from_nu(&coef);
        let (w, _) = dirichlet_g_normalized(&BoundarySpectrum::zeros(g.circle()), &alpha, &cfg).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        let (w, _) = dirichlet_g_normalized(&cos(&g, 2).add_constant(C64::new(1.0, 0.0)), &alpha, &cfg).unwrap();
        let again = normalize_w(&w, &coef).unwrap();
        assert!(again.sub(&w).max_abs() < 1e-14);
        assert!(matches!(
            dirichlet_g_normalized(&cos(&g, 1), &AlphaField::zero(&g), &cfg),
            Err(Error::AlphaNotFromCoefficient)
        ));
    }

    #[test]
    fn constant_sigma_hilbert() {
        let g = grid();
        let cfg = SolveConfig::default();
        let coef = Coefficient::constant_sigma(&g, 2.5).unwrap();
        let phi = cos(&g, 1).add(&BoundarySpectrum::from_modes(
            g.circle(),
            &[
                (3, C64::new(0.0, 0.7)),
                (-3, C64::new(0.0, -0.7)),
                (0, C64::new(0.4, 0.0)),
            ],
        ));
        let (h, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let expect = conjugation_h0(&phi).unwrap().scale(C64::new(2.5, 0.0));
        assert!(h.sub(&expect).max_abs() < 1e-8);
        let (f, rep) = dirichlet_h(&phi, &coef, &cfg).unwrap();
        assert!(rep.norms["beltrami_residual"] < 1e-8);
        let tr = trace_at_boundary(&f, TraceKind::CauchyImage).unwrap();
        assert!(tr.real_part().sub(&phi).max_abs() < 1e-8);
    }

    #[test]
    fn zero_nu_hilbert_and_u() {
        let g = grid();
        let cfg = SolveConfig::default();
        let coef = Coefficient::zero(&g);
        let (h, _) = hilbert_nu(&cos(&g, 1), &coef, &cfg).unwrap();
        let sin = BoundarySpectrum::from_modes(g.circle(), &[(1, C64::new(0.0, -0.5)), (-1, C64::new(0.0, 0.5))]);
        assert!(h.sub(&sin).max_abs() < 1e-13);
        let three = BoundarySpectrum::from_modes(g.circle(), &[(0, C64::new(3.0, 0.0))]);
        let (u, _) = dirichlet_u(&three, &Coefficient::radial_quadratic(&g, 0.5).unwrap(), &cfg).unwrap();
        assert!(u.sub(&DiskField::constant(&g, C64::new(3.0, 0.0))).max_abs() < 1e-8);
    }

    #[test]
    fn composition_identity() {
        let g = grid();
        let cfg = SolveConfig::default();
        let coef = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let phi = cos(&g, 2)
            .add_constant(C64::new(0.7, 0.0))
            .add(&cos(&g, 1).scale(C64::new(0.3, 0.0)));
        let (h, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let (hh, _) = hilbert_nu(&h, &coef.negated(), &cfg).unwrap();
        let expect = phi.scale(C64::new(-1.0, 0.0)).add_constant(phi.mean());
        assert!(hh.sub(&expect).max_abs() < 1e-7, "{}", hh.sub(&expect).max_abs());
    }

    #[test]
    fn radial_sigma_matches_ode_oracle() {
        let g = grid();
        let cfg = SolveConfig::default();
        let coef = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let oracle = crate::radial_oracle::RadialOracle::new(0.5).unwrap();
        let sin3 = BoundarySpectrum::from_modes(g.circle(), &[(3, C64::new(0.0, -0.5)), (-3, C64::new(0.0, 0.5))]);
        for phi in [cos(&g, 1), cos(&g, 2), sin3] {
            let (u, _) = dirichlet_u(&phi, &coef, &cfg).unwrap();
            for r in [0.3, 0.6, 0.9] {
                let got = BoundarySpectrum::from_coeffs(g.circle(), u.coeffs_at_radius(r), false).unwrap();
                let want = oracle.dirichlet_ring(&phi, r);
                let err = got.sub(&want).l2_norm() / want.l2_norm();
                assert!(err < 1e-6, "r = {r}: {err}");
            }
        }
    }
}
