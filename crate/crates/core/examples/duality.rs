//! Duality identities of `ℋ_ν` on a trigonometric basis, orthogonality of the
//! trace spaces for `ν` and `−ν`, and a weak-duality spot check.

use beltrami_lab::analysis::{adjoint_check, orthogonality_check};
use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::PolarGrid;
use beltrami_lab::solver::SolveConfig;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let cfg = SolveConfig::default();
    let coef = Coefficient::radial_quadratic(&grid, 0.5)?;
    let adj = adjoint_check(&coef, &cfg, 16)?;
    println!(
        "16x16: symmetry {:.2e}, adjoint formula {:.2e}",
        adj.symmetry_violation, adj.adjoint_violation
    );
    let orth = orthogonality_check(&coef, &cfg, 20, 0, &[2, 8, 16])?;
    println!("max pairing over 20 trials {:.2e}", orth.max_pairing);
    for s in &orth.duality {
        println!(
            "  K = {:>2}: distance {:.4} >= functional norm {:.4}",
            s.k, s.inf_side, s.sup_side
        );
    }
    Ok(())
}
