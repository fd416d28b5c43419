//! Factorization `w = eˢF` of solutions of `∂̄w = αw̄` with `F` holomorphic and `s` bounded.

use crate::coeff::AlphaField;
use crate::grid::DiskField;
use crate::ops::{cauchy_area, reflect_area, trace_at_boundary, SignVariant, TraceKind};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// `|w|` below this fraction of `‖w‖∞` counts as a zero of `w`.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Default holomorphy certification threshold for `F`.
pub const HOLOMORPHY_THRESHOLD: f64 = 1e-6;
/// Relative residual of `∂̄w − αw̄` above which the input is flagged.
const INPUT_RESIDUAL_WARNING: f64 = 1e-6;

/// Measured properties of a factorization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorCertificates {
    /// `‖s‖∞` over the padded grid including the unit circle.
    pub s_sup: f64,
    /// `4‖α‖∞`.
    pub s_bound: f64,
    /// Sup on the circle of the component of `s` expected to vanish there.
    pub boundary_residual: f64,
    /// Sup on the circle of the other component.
    pub boundary_other: f64,
    /// Negative-mode fraction of `F` over interior radii.
    pub holomorphy_residual: f64,
    pub holomorphy_threshold: f64,
    /// `max ||F| − |w||` on the circle relative to `max |w|`.
    pub modulus_mismatch: f64,
    pub min_abs_w: f64,
    pub min_abs_f: f64,
    /// Relative `L²` residual of `∂̄w − αw̄` for the input.
    pub input_residual: f64,
}

impl FactorCertificates {
    /// `‖s‖∞ ≤ 4‖α‖∞ + slack`.
    pub fn bound_holds(&self, slack: f64) -> bool {
        self.s_sup <= self.s_bound + slack
    }

    pub fn holomorphic(&self) -> bool {
        self.holomorphy_residual <= self.holomorphy_threshold
    }
}

/// `w = eˢF`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub s: DiskField,
    pub f: DiskField,
    pub variant: SignVariant,
    pub certificates: FactorCertificates,
    pub warnings: Vec<String>,
}

/// `r = αw̄/w`, set to zero where `|w|` falls below the zero threshold.
pub fn compute_r(w: &DiskField, alpha: &AlphaField) -> DiskField {
    let w = w.clone().without_edge();
    let cut = ZERO_THRESHOLD * w.max_abs();
    DiskField::pointwise(alpha.grid(), &[&w, alpha.field()], |_, v| {
        if v[0].norm() <= cut || v[0].norm() == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            v[1] * v[0].conj() / v[0]
        }
    })
}

/// `s = Tr ∓ (1/π)∬ z·conj(r(ζ))/(1−ζ̄z) dm(ζ)`; `∂̄s = r` and the reflected part is holomorphic.
pub fn compute_s(r_field: &DiskField, variant: SignVariant) -> DiskField {
    cauchy_area(r_field).add(&reflect_area(r_field, variant))
}

/// Factors a solution `w` of `∂̄w = αw̄` as `eˢF`.
///
/// Certification failures are recorded, not raised.
pub fn factorize(w: &DiskField, alpha: &AlphaField, variant: SignVariant) -> crate::Result<Factorization> {
    factorize_with(w, alpha, variant, HOLOMORPHY_THRESHOLD)
}

pub fn factorize_with(
    w: &DiskField,
    alpha: &AlphaField,
    variant: SignVariant,
    threshold: f64,
) -> crate::Result<Factorization> {
    let mut warnings = Vec::new();
    let interior = w.clone().without_edge();
    let resid = DiskField::pointwise(alpha.grid(), &[&interior.d_bar(), &interior, alpha.field()], |_, v| {
        v[0] - v[2] * v[1].conj()
    });
    let wn = interior.l2_norm();
    let input_residual = if wn > 0.0 { resid.l2_norm() / wn } else { 0.0 };
    if input_residual > INPUT_RESIDUAL_WARNING {
        warnings.push(format!("input residual of ∂̄w = αw̄ is {input_residual:.3e}"));
    }

    let r = compute_r(w, alpha);
    let s = compute_s(&r, variant);
    let w_full = if w.has_edge() {
        w.clone()
    } else {
        let mut v = w.clone();
        v.set_edge(Some(w.extrapolate_edge(crate::grid::EXTRAPOLATION_GROWTH_BOUND)?));
        v
    };
    let f = DiskField::pointwise(alpha.grid(), &[&w_full, &s], |_, v| v[0] * (-v[1]).exp());

    let s_trace = trace_at_boundary(&s, TraceKind::CauchyImage)?;
    let s_samples = s_trace.samples_on(s.grid().padded_len());
    let re_sup = s_samples.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let im_sup = s_samples.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let (boundary_residual, boundary_other) = match variant {
        SignVariant::Plus => (re_sup, im_sup),
        SignVariant::Minus => (im_sup, re_sup),
    };
    let wp = w_full.to_padded();
    let fp = f.to_padded();
    let p = s.grid().padded_len();
    let edge_start = wp.len() - p;
    let w_edge_max = wp[edge_start..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let modulus_mismatch = wp[edge_start..]
        .iter()
        .zip(&fp[edge_start..])
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0, f64::max)
        / w_edge_max.max(f64::MIN_POSITIVE);
    let min_abs = |v: &[C64]| v.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);

    let certificates = FactorCertificates {
        s_sup: s.max_abs(),
        s_bound: 4.0 * alpha.sup(),
        boundary_residual,
        boundary_other,
        holomorphy_residual: f.negative_mode_fraction(),
        holomorphy_threshold: threshold,
        modulus_mismatch,
        min_abs_w: min_abs(&wp),
        min_abs_f: min_abs(&fp),
        input_residual,
    };
    Ok(Factorization {
        s,
        f,
        variant,
        certificates,
        warnings,
    })
}
