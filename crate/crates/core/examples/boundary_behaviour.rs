//! Boundary behaviour of a solution: nontangential maximal function, ring-to-trace
//! convergence, and the boundary limit of `∂f` from the trace alone.

use beltrami_lab::analysis::{fatou_convergence, nontangential_max, SectorConfig};
use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::{BoundarySpectrum, PolarGrid, EXTRAPOLATION_GROWTH_BOUND};
use beltrami_lab::ops::{trace_at_boundary, TraceKind};
use beltrami_lab::solver::{boundary_derivative, dirichlet_h, gradient_field, SolveConfig};

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let coef = Coefficient::radial_quadratic(&grid, 0.5)?;
    let phi = BoundarySpectrum::from_real_fn(grid.circle(), |t| t.cos() + 0.5 * (2.0 * t).sin());
    let (f, _) = dirichlet_h(&phi, &coef, &SolveConfig::default())?;

    let m = nontangential_max(&f, &SectorConfig::default(), 2.0)?;
    println!("|M f|_2 = {:.6}, |tr f|_2 = {:.6}", m.lp_norm, m.trace_lp_norm);
    for (r, err) in fatou_convergence(&f, 2.0)?.iter().rev().step_by(16) {
        println!("  r = {r:.4}: |f(r.) - tr f|_2 = {err:.3e}");
    }

    let tr = trace_at_boundary(&f, TraceKind::CauchyImage)?;
    let from_trace = boundary_derivative(&tr, &coef);
    let direct = BoundarySpectrum::from_coeffs(
        grid.circle(),
        f.d().extrapolate_edge(EXTRAPOLATION_GROWTH_BOUND)?,
        false,
    )?;
    println!(
        "boundary df: trace formula vs extrapolation {:.2e}",
        from_trace.sub(&direct).l2_norm() / direct.l2_norm()
    );
    let (_, report) = gradient_field(&f, &coef, 2.0)?;
    println!("gradient equation residual {:.2e}", report.norms["gradient_residual"]);
    Ok(())
}
