//! Singular integral operators on the polar discretization.
//!
//! The areal Cauchy transform `Tw = −(1/π)∬ w(ξ)/(ξ−z) dm(ξ)` sends input
//! mode `m+1` to output mode `m` through one radial integral, so every
//! operator here is a set of independent per-mode table applications.

mod oracle;
mod workspace;

pub use oracle::{oracle_dense, DenseOracle, OracleKind};
pub use workspace::OperatorWorkspace;

use crate::error::{Error, Result};
use crate::grid::{BoundarySpectrum, DiskField, PolarGrid, EXTRAPOLATION_GROWTH_BOUND};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type C64 = Complex64;
const ZERO: C64 = C64::new(0.0, 0.0);

/// Sign in front of the reflected kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignVariant {
    Plus,
    Minus,
}

impl SignVariant {
    pub fn sign(self) -> f64 {
        match self {
            SignVariant::Plus => 1.0,
            SignVariant::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SignVariant::Plus => SignVariant::Minus,
            SignVariant::Minus => SignVariant::Plus,
        }
    }
}

/// How boundary values are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    /// Exact `r = 1` values carried by fields from the Cauchy-type operators.
    CauchyImage,
    /// Cubic extrapolation of the profiles through the four outermost nodes.
    Smooth,
}

/// Holomorphic extension `Σ_{n≥0} ψ̂_n zⁿ`, with exact edge values.
pub fn cauchy_boundary(grid: &Arc<PolarGrid>, psi: &BoundarySpectrum) -> DiskField {
    let m = grid.max_mode() as isize;
    let nodes = grid.radial().nodes();
    let mut out = DiskField::zeros(grid);
    let mut edge = vec![ZERO; grid.n_modes()];
    for n in 0..=m {
        let c = psi.mode(n);
        for (v, r) in out.profile_mut(n).iter_mut().zip(nodes) {
            *v = c * r.powi(n as i32);
        }
        edge[(n + m) as usize] = c;
    }
    out.set_edge(Some(edge));
    out
}

/// Drops the negative Fourier modes.
pub fn analytic_projection(psi: &BoundarySpectrum) -> BoundarySpectrum {
    let modes: Vec<(isize, C64)> = (0..=psi.max_mode() as isize).map(|n| (n, psi.mode(n))).collect();
    BoundarySpectrum::from_modes(psi.circle(), &modes)
}

/// Harmonic conjugate with zero mean: multiplier `−i·sgn(n)`.
pub fn conjugation_h0(phi: &BoundarySpectrum) -> Result<BoundarySpectrum> {
    phi.require_real()?;
    let m = phi.max_mode() as isize;
    let coeffs = (-m..=m)
        .map(|n| phi.mode(n) * C64::new(0.0, -(n.signum() as f64)))
        .collect();
    BoundarySpectrum::from_coeffs(phi.circle(), coeffs, true)
}

/// Areal Cauchy transform; the result always carries exact edge values.
pub fn cauchy_area(w: &DiskField) -> DiskField {
    let grid = w.grid().clone();
    let ws = grid.workspace();
    let nr = grid.n_r();
    let m = grid.max_mode() as isize;
    let blocks: Vec<(Vec<C64>, C64)> = (-m..=m)
        .into_par_iter()
        .map(|out_mode| {
            let mut buf = vec![ZERO; nr + 1];
            let src = out_mode + 1;
            if src <= m {
                let table = if out_mode < 0 {
                    ws.inner(out_mode.unsigned_abs())
                } else {
                    ws.outer(out_mode as usize)
                };
                OperatorWorkspace::apply(table, w.profile(src), &mut buf);
            }
            let edge = buf[nr];
            buf.truncate(nr);
            (buf, edge)
        })
        .collect();
    assemble(&grid, blocks)
}

fn assemble(grid: &Arc<PolarGrid>, blocks: Vec<(Vec<C64>, C64)>) -> DiskField {
    let mut data = Vec::with_capacity(grid.n_modes() * grid.n_r());
    let mut edge = Vec::with_capacity(grid.n_modes());
    for (p, e) in blocks {
        data.extend(p);
        edge.push(e);
    }
    DiskField::from_profiles(grid, data, Some(edge)).expect("block shapes match grid")
}

/// Beurling transform on the disk, `∂(Tw)`.
///
/// Output mode `m−1` is `m·(Tw)_m(r)/r + w_{m+1}(r)`. Edge values are produced
/// only when `w` carries its own.
pub fn beurling(w: &DiskField) -> DiskField {
    let grid = w.grid().clone();
    let t = cauchy_area(w);
    let nodes = grid.radial().nodes();
    let m = grid.max_mode() as isize;
    let mut out = DiskField::zeros(&grid);
    let mut edge = w.edge().map(|_| vec![ZERO; grid.n_modes()]);
    for mode in (-m + 1)..=m {
        let src = mode + 1;
        let target = mode - 1;
        let tm = t.profile(mode);
        let mf = mode as f64;
        let dst = out.profile_mut(target);
        for j in 0..nodes.len() {
            let wv = if src <= m { w.profile(src)[j] } else { ZERO };
            dst[j] = mf * tm[j] / nodes[j] + wv;
        }
        if let (Some(e), Some(we)) = (edge.as_mut(), w.edge()) {
            let wv = if src <= m { we[(src + m) as usize] } else { ZERO };
            e[(target + m) as usize] = mf * t.edge().unwrap()[(mode + m) as usize] + wv;
        }
    }
    out.set_edge(edge);
    out
}

/// Reflected part `∓(1/π)∬ z·conj(r(ζ))/(1−ζ̄z) dm(ζ)`, holomorphic in `z`.
///
/// Mode `k+1` of the output is `−c̄_k r^{k+1}` with `c_k = 2∫₀¹ r_{−k}(ρ)ρ^{k+1} dρ`;
/// `SignVariant::Minus` negates it.
pub fn reflect_area(r_field: &DiskField, variant: SignVariant) -> DiskField {
    let grid = r_field.grid().clone();
    let ws = grid.workspace();
    let nr = grid.n_r();
    let m = grid.max_mode();
    let nodes = grid.radial().nodes();
    let sign = variant.sign();
    let mut out = DiskField::zeros(&grid);
    let mut edge = vec![ZERO; grid.n_modes()];
    let mut buf = vec![ZERO; nr + 1];
    for k in 0..m {
        OperatorWorkspace::apply(ws.inner(k + 1), r_field.profile(-(k as isize)), &mut buf);
        let coef = -sign * buf[nr].conj();
        let p = (k + 1) as i32;
        for (v, r) in out.profile_mut(p as isize).iter_mut().zip(nodes) {
            *v = coef * r.powi(p);
        }
        edge[m + k + 1] = coef;
    }
    out.set_edge(Some(edge));
    out
}

/// Boundary values of a field.
pub fn trace_at_boundary(field: &DiskField, kind: TraceKind) -> Result<BoundarySpectrum> {
    let coeffs = match kind {
        TraceKind::CauchyImage => field.edge().ok_or(Error::NoExactTrace)?.to_vec(),
        TraceKind::Smooth => field.extrapolate_edge(EXTRAPOLATION_GROWTH_BOUND)?,
    };
    BoundarySpectrum::from_coeffs(field.grid().circle(), coeffs, false)
}

/// Exact edge values when present, otherwise the smooth extrapolation.
pub fn trace(field: &DiskField) -> Result<BoundarySpectrum> {
    if field.has_edge() {
        trace_at_boundary(field, TraceKind::CauchyImage)
    } else {
        trace_at_boundary(field, TraceKind::Smooth)
    }
}
