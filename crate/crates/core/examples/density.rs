//! Approximating `e^{−iθ}` on the upper half circle by traces whose real part is
//! supported on the lower half: the error falls while the norm on the complement grows.

use beltrami_lab::analysis::{density_experiment, ArcSplit};
use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::PolarGrid;
use beltrami_lab::solver::SolveConfig;
use beltrami_lab::Complex64 as C64;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let circle = grid.circle();
    let split = ArcSplit::upper_semicircle(circle);
    let target: Vec<C64> = circle.thetas().iter().map(|&t| C64::from_polar(1.0, -t)).collect();
    for (name, coef) in [
        ("nu = 0", Coefficient::zero(&grid)),
        ("sigma = 1 + r^2/2", Coefficient::radial_quadratic(&grid, 0.5)?),
    ] {
        let rep = density_experiment(&target, &split, &coef, &SolveConfig::default(), &[4, 8, 16, 32])?;
        println!("{name}");
        for row in &rep.rows {
            println!(
                "  K = {:>2}: error on I {:.3e}, norm on J {:.3e}",
                row.k, row.error_i, row.norm_j
            );
        }
    }
    Ok(())
}
