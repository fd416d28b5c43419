//! A problem on the image of `z + 0.3z²` solved on the disk, checked by a
//! finite-difference residual in the image domain and by reparametrizing with a
//! disk automorphism.

use beltrami_lab::coeff::NuSample;
use beltrami_lab::domains::{
    image_pde_residual, map_independence_gap, pullback_problem, pushforward_solution, ConformalMap,
};
use beltrami_lab::grid::PolarGrid;
use beltrami_lab::solver::{dirichlet_u, SolveConfig};
use beltrami_lab::Complex64 as C64;

/// `σ = 1 + |w|²/4` on the image domain.
fn nu(w: C64) -> NuSample {
    let s = 1.0 + 0.25 * w.norm_sqr();
    NuSample {
        nu: (1.0 - s) / (1.0 + s),
        dbar_nu: -0.5 * w / ((1.0 + s) * (1.0 + s)),
    }
}

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let cfg = SolveConfig::default();
    let data = |w: C64| w.re + 0.5 * w.im * w.im;
    let map = ConformalMap::quadratic(0.3)?;
    let (coef, phi) = pullback_problem(&map, &grid, nu, data)?;
    let (u, _) = dirichlet_u(&phi, &coef, &cfg)?;
    println!(
        "{} image points, min |psi'| = {:.2}",
        pushforward_solution(&map, &u).len(),
        map.min_abs_dpsi()
    );
    for z in [C64::new(0.0, 0.0), C64::new(0.4, 0.1), C64::new(-0.3, 0.5)] {
        println!(
            "residual at psi({z}) = {:.2e}",
            image_pde_residual(&map, &u, &nu, z, 1e-2)?
        );
    }
    let (a, rot) = (C64::new(0.25, -0.15), 0.6);
    let other = map.compose_automorphism(a, rot)?;
    let (coef2, phi2) = pullback_problem(&other, &grid, nu, data)?;
    let (u2, _) = dirichlet_u(&phi2, &coef2, &cfg)?;
    let points: Vec<C64> = (0..12)
        .map(|k| C64::from_polar(0.2 + 0.05 * k as f64, 0.9 * k as f64))
        .collect();
    println!(
        "map independence gap {:.2e}",
        map_independence_gap(&u, &u2, a, rot, &points)
    );
    Ok(())
}
