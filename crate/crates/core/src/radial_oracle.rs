//! Independent reference for radial conductivities `σ(r) = 1 + a r²`.
//!
//! For `u = Σ u_n(r) e^{inθ}`, `div(σ∇u) = 0` splits into the ODEs
//! `(rσu_n′)′ = σn²u_n/r`. The regular solution is integrated by classical RK4
//! from a small radius, started from its two-term series, and rescaled to the
//! boundary condition.

use crate::error::{Error, Result};
use crate::grid::BoundarySpectrum;
use num_complex::Complex64;

type C64 = Complex64;

const START_RADIUS: f64 = 1e-3;
const STEP: f64 = 2e-4;
/// The state is renormalized when `|u|` exceeds this, so high modes neither overflow nor underflow.
const RESCALE_ABOVE: f64 = 1e150;

/// Per-mode shooting oracle for `σ(r) = 1 + a r²`.
#[derive(Clone, Copy, Debug)]
pub struct RadialOracle {
    a: f64,
}

/// Regular solution at the requested radii plus `u(1)` and `u′(1)`.
struct Shot {
    at: Vec<f64>,
    end_value: f64,
    end_slope: f64,
}

impl RadialOracle {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > -1.0 && a.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "σ = 1 + {a}r² is not positive on the disk"
            )));
        }
        Ok(Self { a })
    }

    fn sigma(&self, r: f64) -> f64 {
        1.0 + self.a * r * r
    }

    /// Regular solution, proportional to `rⁿ(1 + c r² + …)` near the origin.
    fn shoot(&self, n: usize, radii: &[f64]) -> Shot {
        let nf = n as f64;
        let n2 = nf * nf;
        let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] { [y[1] / (r * self.sigma(r)), self.sigma(r) * n2 * y[0] / r] };
        let c = -nf * self.a / (2.0 * (nf + 1.0));
        let r0 = START_RADIUS;
        // Scaled by r₀⁻ⁿ; only ratios of the shot are used.
        let u0 = 1.0 + c * r0 * r0;
        let du0 = nf / r0 + (nf + 2.0) * c * r0;
        let mut y = [u0, r0 * self.sigma(r0) * du0];
        let mut r = r0;
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&i, &j| radii[i].total_cmp(&radii[j]));
        let mut at = vec![0.0; radii.len()];
        let advance = |to: f64, r: &mut f64, y: &mut [f64; 2], at: &mut [f64]| {
            if to <= *r {
                return;
            }
            while *r < to {
                // The growth rate n/r limits the step near the origin for high modes.
                let h = STEP.min(0.005 * *r / nf.max(1.0)).min(to - *r);
                let k1 = rhs(*r, *y);
                let k2 = rhs(*r + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
                let k3 = rhs(*r + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
                let k4 = rhs(*r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
                for i in 0..2 {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                *r += h;
                if y[0].abs() > RESCALE_ABOVE {
                    let f = 1.0 / y[0].abs();
                    y.iter_mut().chain(at.iter_mut()).for_each(|v| *v *= f);
                }
            }
        };
        for i in order {
            let t = radii[i];
            if n == 0 {
                at[i] = 1.0;
                continue;
            }
            if t < r0 {
                at[i] = (t / r0).powi(n as i32) * (1.0 + c * t * t);
                continue;
            }
            advance(t, &mut r, &mut y, &mut at);
            at[i] = y[0];
        }
        if n == 0 {
            return Shot {
                at,
                end_value: 1.0,
                end_slope: 0.0,
            };
        }
        advance(1.0, &mut r, &mut y, &mut at);
        Shot {
            at,
            end_value: y[0],
            end_slope: y[1] / self.sigma(1.0),
        }
    }

    /// Fourier coefficients of the Dirichlet solution on the circle of radius `r`.
    pub fn dirichlet_ring(&self, phi: &BoundarySpectrum, r: f64) -> BoundarySpectrum {
        self.ring(phi, r, |s| s.end_value, true)
    }

    /// Fourier coefficients on the circle of radius `r` of the zero-mean solution
    /// with `∂_r u = g` at `r = 1`; the mean of `g` is ignored.
    pub fn neumann_ring(&self, g: &BoundarySpectrum, r: f64) -> BoundarySpectrum {
        self.ring(g, r, |s| s.end_slope, false)
    }

    fn ring(&self, data: &BoundarySpectrum, r: f64, norm: impl Fn(&Shot) -> f64, keep_mean: bool) -> BoundarySpectrum {
        let m = data.max_mode() as isize;
        let mut modes = Vec::new();
        for n in -m..=m {
            let c = data.mode(n);
            if c == C64::new(0.0, 0.0) || (n == 0 && !keep_mean) {
                continue;
            }
            let shot = self.shoot(n.unsigned_abs(), &[r]);
            modes.push((n, c * shot.at[0] / norm(&shot)));
        }
        BoundarySpectrum::from_modes(data.circle(), &modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;

    #[test]
    fn constant_sigma_gives_powers() {
        let o = RadialOracle::new(0.0).unwrap();
        for n in [1usize, 2, 5] {
            let s = o.shoot(n, &[0.3, 0.7]);
            assert!((s.at[0] / s.end_value - 0.3f64.powi(n as i32)).abs() < 1e-10);
            assert!((s.at[1] / s.end_value - 0.7f64.powi(n as i32)).abs() < 1e-10);
            assert!((s.end_slope / s.end_value - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn high_modes_stay_finite() {
        let o = RadialOracle::new(0.0).unwrap();
        let s = o.shoot(120, &[0.2, 0.9]);
        let ratio = s.at[1] / s.end_value / 0.9f64.powi(120);
        assert!((ratio - 1.0).abs() < 1e-8, "{ratio}");
        assert!(s.at[0].is_finite() && s.end_slope.is_finite());
    }

    #[test]
    fn residual_of_ode_is_small() {
        // Central differences of the shot solution satisfy the ODE.
        let o = RadialOracle::new(0.5).unwrap();
        let n = 2usize;
        let h = 1e-3;
        let r = 0.6;
        let s = o.shoot(n, &[r - h, r, r + h]);
        let (um, u0, up) = (s.at[0], s.at[1], s.at[2]);
        let du = (up - um) / (2.0 * h);
        let d2u = (up - 2.0 * u0 + um) / (h * h);
        let sig = o.sigma(r);
        let dsig = 2.0 * 0.5 * r;
        let lhs = sig * du + r * dsig * du + r * sig * d2u;
        let rhs = sig * (n * n) as f64 * u0 / r;
        assert!((lhs - rhs).abs() < 1e-5 * rhs.abs());
    }

    #[test]
    fn ring_scaling() {
        let c = CircleGrid::new(16).unwrap();
        let o = RadialOracle::new(0.0).unwrap();
        let phi = BoundarySpectrum::from_modes(c, &[(0, C64::new(2.0, 0.0)), (3, C64::new(1.0, 0.0))]);
        let ring = o.dirichlet_ring(&phi, 0.5);
        assert!((ring.mode(0).re - 2.0).abs() < 1e-14);
        assert!((ring.mode(3).re - 0.125).abs() < 1e-10);
        let nm = o.neumann_ring(&phi, 0.5);
        assert_eq!(nm.mode(0), C64::new(0.0, 0.0));
        assert!((nm.mode(3).re - 0.125 / 3.0).abs() < 1e-10);
    }
}
