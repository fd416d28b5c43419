//! The Fredholm equation `w − T(αw̄) = g` with a manufactured solution `w* = e^φ`.

use beltrami_lab::coeff::AlphaField;
use beltrami_lab::grid::PolarGrid;
use beltrami_lab::solver::{solve_fredholm, AlphaOperator, SolveConfig};
use beltrami_lab::Complex64 as C64;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    // φ = 0.2 conj(z)² + 0.1|z|², so ∂̄φ = 0.4 conj z + 0.1 z and α = ∂̄φ·w*/conj(w*).
    let phi = |z: C64| 0.2 * z.conj() * z.conj() + 0.1 * z.norm_sqr();
    let w_star = grid.sample_fn(move |z| phi(z).exp());
    let alpha = AlphaField::from_field(grid.sample_fn(move |z| {
        let w = phi(z).exp();
        (0.4 * z.conj() + 0.1 * z) * w / w.conj()
    }));
    let op = AlphaOperator::new(&alpha);
    let rhs = w_star.sub(&op.apply(&w_star));
    let (w, report) = solve_fredholm(&rhs, &alpha, &SolveConfig::default())?;
    let stage = &report.stages[0];
    println!(
        "|alpha|_inf = {:.3}, operator norm estimate {:.3}",
        alpha.sup(),
        report.norms["alpha_operator_norm_estimate"]
    );
    println!(
        "{} in {} iterations, residual {:.2e}",
        stage.method, stage.iterations, stage.residual
    );
    println!(
        "relative error vs w*: {:.2e}",
        w.sub(&w_star).without_edge().l2_norm() / w_star.l2_norm()
    );
    println!("P+ consistency: {:?}", report.certificates["p_plus_consistency"]);
    Ok(())
}
