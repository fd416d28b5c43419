//! Neumann problem `∂ₙu = g` for a radial conductivity, and the compatibility
//! condition `∫σg = 0` that it enforces.

use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::{BoundarySpectrum, PolarGrid};
use beltrami_lab::radial_oracle::RadialOracle;
use beltrami_lab::solver::{neumann, SolveConfig};
use beltrami_lab::Error;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let coef = Coefficient::radial_quadratic(&grid, 0.5)?;
    let g = BoundarySpectrum::from_real_fn(grid.circle(), |t| (2.0 * t).cos());
    let (u, report) = neumann(&g, &coef, &SolveConfig::default())?;
    println!(
        "trace-formula certificate: {:?}",
        report.certificates["normal_derivative_trace"]
    );
    println!(
        "one-sided stencil mismatch: {:.2e}",
        report.norms["normal_derivative_stencil"]
    );
    let oracle = RadialOracle::new(0.5)?;
    let got = BoundarySpectrum::from_coeffs(grid.circle(), u.coeffs_at_radius(0.6), false)?;
    let want = oracle.neumann_ring(&g, 0.6);
    println!(
        "r = 0.6 relative error vs ODE: {:.2e}",
        got.sub(&want).l2_norm() / want.l2_norm()
    );

    let bad = g.add_constant(1.0.into());
    match neumann(&bad, &coef, &SolveConfig::default()) {
        Err(Error::Compatibility(c)) => println!("g + 1 rejected, mean of sigma*g = {c:.3}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
