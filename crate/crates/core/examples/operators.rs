//! The areal Cauchy and Beurling transforms on the polar grid, checked against
//! closed forms and against brute-force quadrature on a small grid.

use beltrami_lab::grid::PolarGrid;
use beltrami_lab::ops::{beurling, cauchy_area, oracle_dense, OracleKind};
use beltrami_lab::Complex64 as C64;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let one = grid.sample_fn(|_| C64::new(1.0, 0.0));
    let zbar = grid.sample_fn(|z| z.conj());
    println!(
        "|T(1) - conj z|_inf     = {:.2e}",
        cauchy_area(&one).sub(&zbar).max_abs()
    );

    let w = grid.sample_fn(|z| z.conj() * z.conj());
    let back = cauchy_area(&w).d_bar().sub(&w.clone().without_edge());
    println!("|dbar T w - w|_2        = {:.2e}", back.l2_norm());
    // S(conj z^2) = ∂ T(conj z^2) = ∂(conj z^3 / 3) = 0.
    println!("|S(conj z^2)|_inf       = {:.2e}", beurling(&w).max_abs());

    let small = PolarGrid::new(32, 2, 8)?;
    let w = small.sample_fn(|z| 0.3 * z.conj() + z * z);
    let dense = oracle_dense(&w, OracleKind::CauchyArea)?;
    let fast = cauchy_area(&w).without_edge();
    println!(
        "fast vs dense (32x16)   = {:.2e} relative, omitted-cell bound {:.2e}",
        dense.field.sub(&fast).l2_norm() / fast.l2_norm(),
        dense.omitted_cell_bound
    );
    Ok(())
}
