use super::{Certificate, SolveConfig, SolveReport};
use crate::coeff::AlphaField;
use crate::error::{Error, Result};
use crate::grid::{DiskField, PolarGrid, EXTRAPOLATION_GROWTH_BOUND};
use crate::krylov::gmres;
use crate::ops::{analytic_projection, cauchy_area, trace_at_boundary, TraceKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

type C64 = Complex64;

const POWER_STEPS: usize = 6;
const PICARD_THRESHOLD: f64 = 0.9;
/// Largest negative-mode fraction accepted for a holomorphic right-hand side.
const HOLOMORPHY_TOL: f64 = 1e-8;

/// The real-linear map `w ↦ T(αw̄)`.
pub struct AlphaOperator<'a> {
    alpha: &'a AlphaField,
    grid: Arc<PolarGrid>,
    /// Square roots of the area weights `2π·w_j`, for the `L²(D)` embedding.
    scale: Vec<f64>,
}

impl<'a> AlphaOperator<'a> {
    pub fn new(alpha: &'a AlphaField) -> Self {
        let grid = alpha.grid().clone();
        let scale = grid.radial().weights().iter().map(|w| (2.0 * PI * w).sqrt()).collect();
        Self { alpha, grid, scale }
    }

    /// `T(αw̄)`, with exact edge values.
    pub fn apply(&self, w: &DiskField) -> DiskField {
        let p = self.grid.padded_len();
        let rows = self.grid.n_r();
        let wp = if w.has_edge() {
            w.clone().without_edge().to_padded()
        } else {
            w.to_padded()
        };
        let prod: Vec<C64> = wp
            .iter()
            .zip(&self.alpha.padded()[..rows * p])
            .map(|(w, a)| a * w.conj())
            .collect();
        cauchy_area(&DiskField::from_padded(&self.grid, &prod, false))
    }

    fn pack(&self, f: &DiskField) -> Vec<f64> {
        let nr = self.grid.n_r();
        let mut out = Vec::with_capacity(2 * f.data().len());
        for (i, v) in f.data().iter().enumerate() {
            let s = self.scale[i % nr];
            out.push(s * v.re);
            out.push(s * v.im);
        }
        out
    }

    fn unpack(&self, x: &[f64]) -> DiskField {
        let nr = self.grid.n_r();
        let data = x
            .chunks(2)
            .enumerate()
            .map(|(i, c)| C64::new(c[0], c[1]) / self.scale[i % nr])
            .collect();
        DiskField::from_profiles(&self.grid, data, None).expect("packed length matches grid")
    }

    /// Power-iteration estimate of the operator norm on `L²(D)`.
    pub fn norm_estimate(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.grid.n_modes() * self.grid.n_r();
        let data: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut v = DiskField::from_profiles(&self.grid, data, None).expect("shape");
        let mut est = 0.0;
        for _ in 0..POWER_STEPS {
            let nv = v.l2_norm();
            if nv == 0.0 {
                return 0.0;
            }
            v = v.scale(C64::new(1.0 / nv, 0.0));
            let lv = self.apply(&v).without_edge();
            est = lv.l2_norm();
            v = lv;
        }
        est
    }
}

/// Solves `w − T(αw̄) = g` for holomorphic `g`.
///
/// Picard iteration is used when a power-iteration estimate of `‖T_α‖` is
/// below 0.9, otherwise (or when Picard stalls) restarted GMRES on the real
/// system in the `L²(D)` inner product. The returned `w` is `g + T(αw̄)` for the
/// final iterate, so it carries exact edge values.
pub fn solve_fredholm(g: &DiskField, alpha: &AlphaField, cfg: &SolveConfig) -> Result<(DiskField, SolveReport)> {
    cfg.validate()?;
    let neg = g.negative_mode_fraction();
    if neg > HOLOMORPHY_TOL {
        return Err(Error::NotHolomorphic(neg));
    }
    let g = if g.has_edge() {
        g.clone()
    } else {
        let mut h = g.clone();
        h.set_edge(Some(g.extrapolate_edge(EXTRAPOLATION_GROWTH_BOUND)?));
        h
    };
    let mut report = SolveReport::default();
    let gnorm = g.l2_norm();
    if alpha.is_zero() || gnorm == 0.0 {
        report.stage("fredholm", "direct", 0, 0.0, true);
        return Ok((g, report));
    }

    let op = AlphaOperator::new(alpha);
    let rho = op.norm_estimate(0);
    report.norm("alpha_operator_norm_estimate", rho);
    let residual_of = |w: &DiskField| -> (DiskField, f64) {
        let next = g.add(&op.apply(w));
        let r = next.sub(w).without_edge().l2_norm() / gnorm;
        (next, r)
    };

    let mut method = String::new();
    let mut iterations = 0;
    let mut w = g.clone();
    let mut converged = false;
    if rho < PICARD_THRESHOLD {
        method.push_str("picard");
        let mut history: Vec<f64> = Vec::new();
        while iterations < cfg.max_iter {
            let (next, r) = residual_of(&w);
            iterations += 1;
            w = next;
            // r is the residual of the previous iterate; the new one is smaller by ~ρ.
            if r * rho.max(0.5) <= 0.5 * cfg.inner_tol {
                converged = true;
                break;
            }
            if history.len() >= 3 && r > 0.99 * history[history.len() - 3] {
                break;
            }
            history.push(r);
        }
    }
    if !converged {
        if !method.is_empty() {
            method.push('+');
        }
        method.push_str("gmres");
        let b = op.pack(&g.clone().without_edge());
        let x0 = op.pack(&w.clone().without_edge());
        let apply = |x: &[f64]| -> Vec<f64> {
            let f = op.unpack(x);
            let lf = op.pack(&op.apply(&f).without_edge());
            x.iter().zip(&lf).map(|(a, b)| a - b).collect()
        };
        let out = gmres(apply, &b, Some(x0), 0.25 * cfg.inner_tol, cfg.restart, cfg.max_iter);
        iterations += out.iterations;
        w = op.unpack(&out.x);
    }

    // Finalize: one more application fixes the edge; report the recomputed residual.
    let (w_final, _) = residual_of(&w);
    let (_, residual) = residual_of(&w_final);
    let ok = residual <= cfg.inner_tol;
    report.stage("fredholm", &method, iterations, residual, ok);
    if !ok {
        return Err(Error::NotConverged {
            stage: "fredholm".into(),
            iterations,
            residual,
        });
    }

    let tr_w = trace_at_boundary(&w_final, TraceKind::CauchyImage)?;
    let tr_g = trace_at_boundary(&g, TraceKind::CauchyImage)?;
    let p_plus = analytic_projection(&tr_w).sub(&tr_g).l2_norm() / tr_g.l2_norm().max(f64::MIN_POSITIVE);
    report.certify("p_plus_consistency", Certificate::at_most(p_plus, cfg.inner_tol));
    Ok((w_final, report))
}
