//! The generalized conjugate function `ℋ_ν`: the constant-σ scaling and the
//! composition identity `ℋ_{−ν}ℋ_ν φ = −φ + mean φ`.

use beltrami_lab::coeff::Coefficient;
use beltrami_lab::grid::{BoundarySpectrum, PolarGrid};
use beltrami_lab::ops::conjugation_h0;
use beltrami_lab::solver::{hilbert_nu, SolveConfig};
use beltrami_lab::Complex64 as C64;

fn main() -> beltrami_lab::Result<()> {
    let grid = PolarGrid::standard();
    let cfg = SolveConfig::default();
    let phi = BoundarySpectrum::from_real_fn(grid.circle(), |t| 0.4 + t.cos() + 0.3 * (4.0 * t).sin());

    let sigma = 2.0;
    let (h, _) = hilbert_nu(&phi, &Coefficient::constant_sigma(&grid, sigma)?, &cfg)?;
    let scaled = conjugation_h0(&phi)?.scale(C64::new(sigma, 0.0));
    println!(
        "constant sigma: |H phi - sigma H0 phi|_2 = {:.2e}",
        h.sub(&scaled).l2_norm()
    );

    let coef = Coefficient::radial_quadratic(&grid, 0.5)?;
    let (h, report) = hilbert_nu(&phi, &coef, &cfg)?;
    let (hh, _) = hilbert_nu(&h, &coef.negated(), &cfg)?;
    let expect = phi.scale(C64::new(-1.0, 0.0)).add_constant(phi.mean());
    println!(
        "composition:    |H_-nu H_nu phi + phi - mean|_2 = {:.2e}",
        hh.sub(&expect).l2_norm()
    );
    println!("measured |H phi|_p / |phi|_p = {:.6}", report.norms["hilbert_ratio"]);
    Ok(())
}
