//! Factorization `w = eˢF` of a solution of `∂̄w = αw̄`, with both sign choices
//! for the reflected term and the certificates of each.

use beltrami_lab::coeff::{alpha_from_nu, Coefficient};
use beltrami_lab::expr::Expr;
use beltrami_lab::factor::factorize;
use beltrami_lab::grid::{BoundarySpectrum, PolarGrid};
use beltrami_lab::ops::SignVariant;
use beltrami_lab::solver::{dirichlet_g, SolveConfig};

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let coef = Coefficient::from_expression(&grid, &Expr::parse("0.2*x*y + 0.1*x")?, None)?;
    let alpha = alpha_from_nu(&coef);
    let psi = BoundarySpectrum::from_real_fn(grid.circle(), |t| 2.0 + 0.3 * t.cos());
    let (w, _) = dirichlet_g(&psi, 0.0, &alpha, &SolveConfig::default())?;
    for variant in [SignVariant::Plus, SignVariant::Minus] {
        let fac = factorize(&w, &alpha, variant)?;
        let c = &fac.certificates;
        println!(
            "{variant:?}: |s| = {:.4} <= {:.4}, vanishing part on T {:.1e}, other {:.3}, holomorphy {:.1e}",
            c.s_sup, c.s_bound, c.boundary_residual, c.boundary_other, c.holomorphy_residual
        );
    }
    Ok(())
}
