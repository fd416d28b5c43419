use beltrami_lab::coeff::Coefficient;
use beltrami_lab::domains::{ConformalMap, MapSpec};
use beltrami_lab::grid::{BoundarySpectrum, GridSpec, PolarGrid};
use beltrami_lab::ops::{analytic_projection, cauchy_area, conjugation_h0};
use beltrami_lab::solver::{hilbert_nu, SolveConfig};
use beltrami_lab::Complex64 as C64;
use proptest::prelude::*;
use std::sync::Arc;

fn grid() -> Arc<PolarGrid> {
    PolarGrid::new(64, 4, 8).unwrap()
}

/// Real trigonometric polynomial of degree ≤ 6 from its nonnegative modes.
fn real_poly(grid: &PolarGrid, modes: &[(f64, f64)]) -> BoundarySpectrum {
    let mut all = vec![(0, C64::new(modes[0].0, 0.0))];
    for (n, &(re, im)) in modes.iter().enumerate().skip(1) {
        let c = C64::new(re, im);
        all.push((n as isize, c));
        all.push((-(n as isize), c.conj()));
    }
    BoundarySpectrum::from_modes(grid.circle(), &all)
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hilbert_nu_is_real_linear(a in -0.5..1.0f64, p in modes(), q in modes(), t in -2.0..2.0f64) {
        let g = grid();
        let coef = Coefficient::radial_quadratic(&g, a).unwrap();
        let cfg = SolveConfig::default();
        let (phi, psi) = (real_poly(&g, &p), real_poly(&g, &q));
        let (hp, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let (hq, _) = hilbert_nu(&psi, &coef, &cfg).unwrap();
        let (hs, _) = hilbert_nu(&phi.add(&psi.scale(t.into())), &coef, &cfg).unwrap();
        let gap = hs.sub(&hp.add(&hq.scale(t.into()))).l2_norm();
        prop_assert!(gap < 1e-8 * (1.0 + hp.l2_norm() + hq.l2_norm()), "{gap}");
    }

    #[test]
    fn zero_coefficient_gives_the_classical_conjugate(p in modes()) {
        let g = grid();
        let phi = real_poly(&g, &p);
        let (h, _) = hilbert_nu(&phi, &Coefficient::zero(&g), &SolveConfig::default()).unwrap();
        prop_assert!(h.sub(&conjugation_h0(&phi).unwrap()).l2_norm() < 1e-10);
    }

    #[test]
    fn conjugate_function_composes_to_minus_identity(a in -0.5..1.0f64, p in modes()) {
        let g = grid();
        let coef = Coefficient::radial_quadratic(&g, a).unwrap();
        let cfg = SolveConfig::default();
        let phi = real_poly(&g, &p);
        let (h, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let (hh, _) = hilbert_nu(&h, &coef.negated(), &cfg).unwrap();
        let expect = phi.scale(C64::new(-1.0, 0.0)).add_constant(phi.mean());
        // Two solves, each converged to the default relative tolerance 1e-8.
        let gap = hh.sub(&expect).l2_norm();
        prop_assert!(gap < 2.0 * cfg.outer_tol * (1.0 + phi.l2_norm()), "{gap}");
    }

    #[test]
    fn analytic_projection_is_idempotent(p in modes(), q in modes()) {
        let g = grid();
        let psi = real_poly(&g, &p).add(&real_poly(&g, &q).scale(C64::new(0.0, 1.0)));
        let once = analytic_projection(&psi);
        prop_assert!(analytic_projection(&once).sub(&once).l2_norm() < 1e-13);
    }

    #[test]
    fn cauchy_transform_inverts_d_bar(c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6)) {
        // w = Σ c_jk z^j conj(z)^k over j + k ≤ 2.
        let g = grid();
        let pows = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        let w = g.sample_fn(|z| {
            pows.iter().zip(&c).map(|(&(j, k), &(re, im))| C64::new(re, im) * z.powi(j) * z.conj().powi(k)).sum()
        });
        let err = cauchy_area(&w).d_bar().sub(&w.clone().without_edge()).l2_norm();
        prop_assert!(err < 1e-10 * (1.0 + w.l2_norm()), "{err}");
    }

    #[test]
    fn small_quadratic_maps_are_accepted(eps in -0.45..0.45f64) {
        let map = ConformalMap::quadratic(eps).unwrap();
        prop_assert!((map.min_abs_dpsi() - (1.0 - 2.0 * eps.abs())).abs() < 1e-2);
        let text = serde_json::to_string(map.spec()).unwrap();
        prop_assert_eq!(serde_json::from_str::<MapSpec>(&text).unwrap(), map.spec().clone());
    }

    #[test]
    fn grid_spec_round_trips(log_n in 3u32..10, panels in 1usize..12, per_panel in 2usize..12) {
        let spec = GridSpec { n_theta: 1 << log_n, panels, per_panel };
        let text = serde_json::to_string(&spec).unwrap();
        prop_assert_eq!(serde_json::from_str::<GridSpec>(&text).unwrap(), spec);
        prop_assert_eq!(spec.refined().n_theta, 2 * spec.n_theta);
    }
}
