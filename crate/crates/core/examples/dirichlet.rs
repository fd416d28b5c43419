//! Dirichlet problem `div(σ∇u) = 0`, `u = φ` on the circle, for `σ = 1 + r²/2`,
//! compared ring by ring with the per-mode ODE reference.

use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::{BoundarySpectrum, PolarGrid};
use beltrami_lab::radial_oracle::RadialOracle;
use beltrami_lab::solver::{dirichlet_u, SolveConfig};

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let coef = Coefficient::radial_quadratic(&grid, 0.5)?;
    let phi = BoundarySpectrum::from_real_fn(grid.circle(), |t| (2.0 * t).cos() + 0.5 * (3.0 * t).sin());
    let (u, report) = dirichlet_u(&phi, &coef, &SolveConfig::default())?;
    for s in &report.stages {
        println!(
            "{:<12} {:<14} {:>4} iterations, residual {:.2e}",
            s.name, s.method, s.iterations, s.residual
        );
    }
    let oracle = RadialOracle::new(0.5)?;
    for r in [0.3, 0.6, 0.9] {
        let got = BoundarySpectrum::from_coeffs(grid.circle(), u.coeffs_at_radius(r), false)?;
        let want = oracle.dirichlet_ring(&phi, r);
        println!(
            "r = {r}: relative error vs ODE {:.2e}",
            got.sub(&want).l2_norm() / want.l2_norm()
        );
    }
    println!("u(0) = {:.12}", u.eval(0.0.into()).re);
    Ok(())
}
