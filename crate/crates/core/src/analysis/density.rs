use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{fractional_seminorm_samples, BoundarySpectrum, CircleGrid};
use crate::solver::{hilbert_nu, SolveConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;

/// Tikhonov weight of the least-squares fits, relative to the largest column norm squared.
pub const RIDGE: f64 = 1e-14;
/// Width in grid cells of the C¹ ramp that switches the basis on inside `J`.
const RAMP_CELLS: f64 = 2.0;

/// Partition of the circle grid into an arc set `I` and its complement `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSplit {
    in_i: Vec<bool>,
}

impl ArcSplit {
    pub fn from_mask(in_i: Vec<bool>) -> Result<Self> {
        let split = Self { in_i };
        if split.is_empty() || split.count_i() == 0 || split.count_i() == split.len() {
            return Err(Error::InvalidConfig(
                "both I and its complement must be non-empty".into(),
            ));
        }
        Ok(split)
    }

    /// `I` is the union of the open arcs `(a, b)` (radians, taken mod 2π).
    pub fn from_arcs(circle: CircleGrid, arcs: &[(f64, f64)]) -> Result<Self> {
        let mask = (0..circle.n_theta())
            .map(|k| {
                let t = circle.theta(k);
                arcs.iter().any(|&(a, b)| {
                    let len = (b - a).rem_euclid(2.0 * PI);
                    let off = (t - a).rem_euclid(2.0 * PI);
                    off > 0.0 && off < len
                })
            })
            .collect();
        Self::from_mask(mask)
    }

    pub fn upper_semicircle(circle: CircleGrid) -> Self {
        Self::from_arcs(circle, &[(0.0, PI)]).expect("half circle is a proper subset")
    }

    pub fn len(&self) -> usize {
        self.in_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_i.is_empty()
    }

    pub fn in_i(&self) -> &[bool] {
        &self.in_i
    }

    pub fn in_j(&self) -> Vec<bool> {
        self.in_i.iter().map(|b| !b).collect()
    }

    fn count_i(&self) -> usize {
        self.in_i.iter().filter(|&&b| b).count()
    }

    /// Smooth switch on `J`: zero on `I`, rising over `RAMP_CELLS` cells, then one.
    fn ramp(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                if self.in_i[k] {
                    return 0.0;
                }
                let dist = (1..n)
                    .find(|&d| self.in_i[(k + d) % n] || self.in_i[(k + n - d) % n])
                    .unwrap_or(n) as f64;
                let t = (dist / (RAMP_CELLS + 1.0)).min(1.0);
                t * t * (3.0 - 2.0 * t)
            })
            .collect()
    }
}

/// One entry of the basis-size schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub k: usize,
    /// Approximation error on `I` in the experiment's norm.
    pub error_i: f64,
    /// `‖tr ψ‖` on the complement `J` (normalized `L²`).
    pub norm_j: f64,
    /// The fitted imaginary constant.
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
}

impl DensityReport {
    pub fn errors_non_increasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].error_i <= w[0].error_i * (1.0 + slack) + slack)
    }

    pub fn norms_non_decreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].norm_j >= w[0].norm_j * (1.0 - slack) - slack)
    }
}

/// `b_k` on `J`: the ramp times `1, cos θ, sin θ, cos 2θ, …`.
fn j_basis(circle: CircleGrid, split: &ArcSplit, k: usize) -> Vec<Vec<f64>> {
    let ramp = split.ramp();
    (0..k)
        .map(|i| {
            let freq = i.div_ceil(2);
            (0..circle.n_theta())
                .map(|t| {
                    let th = circle.theta(t);
                    let trig = if i == 0 {
                        1.0
                    } else if i % 2 == 1 {
                        (freq as f64 * th).cos()
                    } else {
                        (freq as f64 * th).sin()
                    };
                    ramp[t] * trig
                })
                .collect()
        })
        .collect()
}

fn masked_mean_sq(values: &[f64], mask: &[bool]) -> f64 {
    values
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        / mask.len() as f64
}

/// Ridge-regularized least squares `min ‖A x − b‖² + λ‖x‖²`.
fn ridge_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let scale = a
        .column_iter()
        .map(|c| c.norm_squared())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let lambda = (RIDGE * scale).sqrt();
    let mut aug = DMatrix::zeros(a.nrows() + n, n);
    aug.rows_mut(0, a.nrows()).copy_from(a);
    for i in 0..n {
        aug[(a.nrows() + i, i)] = lambda;
    }
    let mut rhs = DVector::zeros(a.nrows() + n);
    rhs.rows_mut(0, a.nrows()).copy_from(b);
    aug.svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Density(e.to_string()))
}

struct Setup {
    circle: CircleGrid,
    u_i: Vec<f64>,
    v_i: Vec<f64>,
    /// `ℋ_ν` of `u_I` extended by zero (or by its smooth extension).
    h_base: Vec<f64>,
    basis: Vec<Vec<f64>>,
    h_cols: Vec<Vec<f64>>,
}

fn prepare(
    target: &[C64],
    extension: Option<&[f64]>,
    split: &ArcSplit,
    coef: &Coefficient,
    cfg: &SolveConfig,
    k_max: usize,
) -> Result<Setup> {
    let circle = coef.grid().circle();
    if target.len() != circle.n_theta() || split.len() != circle.n_theta() {
        return Err(Error::ShapeMismatch {
            expected: circle.n_theta(),
            got: target.len().min(split.len()),
        });
    }
    let mask = split.in_i();
    let u_i: Vec<f64> = target
        .iter()
        .zip(mask)
        .map(|(t, &m)| if m { t.re } else { 0.0 })
        .collect();
    let v_i: Vec<f64> = target
        .iter()
        .zip(mask)
        .map(|(t, &m)| if m { t.im } else { 0.0 })
        .collect();
    let base = extension.map(|e| e.to_vec()).unwrap_or_else(|| u_i.clone());
    let basis = j_basis(circle, split, k_max);
    let hilbert = |vals: &[f64]| -> Result<Vec<f64>> {
        if vals.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; vals.len()]);
        }
        let phi = BoundarySpectrum::from_real_samples(circle, vals)?;
        Ok(hilbert_nu(&phi, coef, cfg)?.0.real_samples())
    };
    let h_base = hilbert(&base)?;
    let h_cols = basis.par_iter().map(|b| hilbert(b)).collect::<Result<Vec<_>>>()?;
    Ok(Setup {
        circle,
        u_i: base,
        v_i,
        h_base,
        basis,
        h_cols,
    })
}

/// Least-squares approximation on `I` of `target` by traces `ψ = u + iℋ_νu + ic`
/// with `u = u_I ∨ u_J`, `u_J` ranging over `K` smooth basis functions on `J`.
///
/// `target` holds samples at the circle grid angles; only its values on `I` are used.
/// Errors are normalized `L²(I)` norms.
pub fn density_experiment(
    target: &[C64],
    split: &ArcSplit,
    coef: &Coefficient,
    cfg: &SolveConfig,
    schedule: &[usize],
) -> Result<DensityReport> {
    let k_max = schedule.iter().copied().max().unwrap_or(0);
    let s = prepare(target, None, split, coef, cfg, k_max)?;
    let mask = split.in_i();
    let idx: Vec<usize> = (0..mask.len()).filter(|&t| mask[t]).collect();
    // v = v_I − ℋ_ν(u_I ∨ 0) on I, to be matched by B u_J + c.
    let v: Vec<f64> = idx.iter().map(|&t| s.v_i[t] - s.h_base[t]).collect();
    let mut rows = Vec::new();
    for &k in schedule {
        let a = DMatrix::from_fn(idx.len(), k + 1, |r, c| if c < k { s.h_cols[c][idx[r]] } else { 1.0 });
        let x = ridge_solve(&a, &DVector::from_row_slice(&v))?;
        rows.push(assemble_row(&s, split, k, &x, None)?);
    }
    Ok(DensityReport { rows })
}

/// Same scheme with the `W^{1−1/p,p}(I)` error: the fit matches `∂_θ` of the
/// imaginary part on `I`, the constant is then fixed by the mean on `I`.
///
/// `target` must be given on the whole grid; its real part on `J` serves as the
/// extension of `u_I` (the extension-property hypothesis).
pub fn density_sobolev_experiment(
    target: &[C64],
    split: &ArcSplit,
    coef: &Coefficient,
    cfg: &SolveConfig,
    schedule: &[usize],
) -> Result<DensityReport> {
    let k_max = schedule.iter().copied().max().unwrap_or(0);
    let ramp = split.ramp();
    // Extension of u_I: the target's real part, switched off inside J with the same ramp.
    let ext: Vec<f64> = target.iter().zip(&ramp).map(|(t, r)| t.re * (1.0 - r)).collect();
    let s = prepare(target, Some(&ext), split, coef, cfg, k_max)?;
    let circle = s.circle;
    let mask = split.in_i();
    let idx: Vec<usize> = (0..mask.len()).filter(|&t| mask[t]).collect();
    let deriv = |vals: &[f64]| -> Result<Vec<f64>> {
        Ok(BoundarySpectrum::from_real_samples(circle, vals)?
            .derivative()
            .real_samples())
    };
    let target_im: Vec<f64> = target.iter().map(|t| t.im).collect();
    let dv_target = deriv(&target_im)?;
    let dh_base = deriv(&s.h_base)?;
    let dh_cols = s.h_cols.iter().map(|c| deriv(c)).collect::<Result<Vec<_>>>()?;
    let dv: Vec<f64> = idx.iter().map(|&t| dv_target[t] - dh_base[t]).collect();
    let mut rows = Vec::new();
    for &k in schedule {
        let a = DMatrix::from_fn(idx.len(), k, |r, c| dh_cols[c][idx[r]]);
        let mut x = ridge_solve(&a, &DVector::from_row_slice(&dv))?;
        let fitted: Vec<f64> = idx
            .iter()
            .map(|&t| s.h_base[t] + (0..k).map(|c| x[c] * s.h_cols[c][t]).sum::<f64>())
            .collect();
        let c = idx.iter().zip(&fitted).map(|(&t, f)| s.v_i[t] - f).sum::<f64>() / idx.len() as f64;
        x = x.push(c);
        rows.push(assemble_row(&s, split, k, &x, Some(cfg.p))?);
    }
    Ok(DensityReport { rows })
}

/// Builds `ψ` from the fitted coefficients `x = (a_1..a_k, c)` and measures it.
fn assemble_row(s: &Setup, split: &ArcSplit, k: usize, x: &DVector<f64>, sobolev_p: Option<f64>) -> Result<DensityRow> {
    let n = split.len();
    let c = x[k];
    let psi: Vec<C64> = (0..n)
        .map(|t| {
            let mut re = s.u_i[t];
            let mut im = s.h_base[t] + c;
            for j in 0..k {
                re += x[j] * s.basis[j][t];
                im += x[j] * s.h_cols[j][t];
            }
            C64::new(re, im)
        })
        .collect();
    let mask = split.in_i();
    let diff: Vec<C64> = (0..n)
        .map(|t| {
            if mask[t] {
                psi[t] - C64::new(s.u_i[t], s.v_i[t])
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let error_i = match sobolev_p {
        None => {
            let re: Vec<f64> = diff.iter().map(|d| d.re).collect();
            let im: Vec<f64> = diff.iter().map(|d| d.im).collect();
            (masked_mean_sq(&re, mask) + masked_mean_sq(&im, mask)).sqrt()
        }
        Some(p) => {
            let lp = (diff.iter().map(|d| d.norm().powf(p)).sum::<f64>() / n as f64).powf(1.0 / p);
            lp + fractional_seminorm_samples(&diff, Some(mask), 1.0 - 1.0 / p, p)?
        }
    };
    let j_mask = split.in_j();
    let re: Vec<f64> = psi.iter().map(|v| v.re).collect();
    let im: Vec<f64> = psi.iter().map(|v| v.im).collect();
    let norm_j = (masked_mean_sq(&re, &j_mask) + masked_mean_sq(&im, &j_mask)).sqrt();
    Ok(DensityRow {
        k,
        error_i,
        norm_j,
        constant: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;

    fn setup() -> (std::sync::Arc<PolarGrid>, ArcSplit) {
        let g = PolarGrid::new(64, 4, 8).unwrap();
        let split = ArcSplit::upper_semicircle(g.circle());
        (g, split)
    }

    #[test]
    fn split_and_ramp() {
        let (g, split) = setup();
        assert_eq!(split.in_i().iter().filter(|&&b| b).count(), 31);
        let ramp = split.ramp();
        assert!(split.in_i().iter().zip(&ramp).all(|(&i, &r)| !i || r == 0.0));
        assert_eq!(ramp[48], 1.0);
        assert!(ramp[33] > 0.0 && ramp[33] < 1.0);
        assert!(ArcSplit::from_mask(vec![true; g.n_theta()]).is_err());
    }

    #[test]
    fn zero_target_is_exact() {
        let (g, split) = setup();
        let cfg = SolveConfig::default();
        let coef = Coefficient::zero(&g);
        let rep = density_experiment(&vec![C64::new(0.0, 0.0); 64], &split, &coef, &cfg, &[4, 8]).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.error_i == 0.0 && r.norm_j == 0.0 && r.constant == 0.0));
        let rep = density_sobolev_experiment(&vec![C64::new(0.0, 0.0); 64], &split, &coef, &cfg, &[4]).unwrap();
        assert!(rep.rows.iter().all(|r| r.error_i == 0.0));
    }

    #[test]
    fn anti_analytic_target_trends() {
        let (g, split) = setup();
        let cfg = SolveConfig::default();
        let target: Vec<C64> = g.circle().thetas().iter().map(|&t| C64::from_polar(1.0, -t)).collect();
        let rep = density_experiment(&target, &split, &Coefficient::zero(&g), &cfg, &[4, 8, 16, 32]).unwrap();
        assert!(rep.errors_non_increasing(1e-9), "{:?}", rep.rows);
        assert!(rep.norms_non_decreasing(1e-9), "{:?}", rep.rows);
        assert!(rep.rows[3].error_i <= 0.5 * rep.rows[0].error_i, "{:?}", rep.rows);
    }

    #[test]
    fn in_class_target() {
        let (g, split) = setup();
        let cfg = SolveConfig::default();
        let coef = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        // Re tr f is the third basis function on J and zero on I.
        let b = j_basis(g.circle(), &split, 3).pop().unwrap();
        let phi = BoundarySpectrum::from_real_samples(g.circle(), &b).unwrap();
        let (h, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let target: Vec<C64> = b.iter().zip(h.real_samples()).map(|(&a, b)| C64::new(a, b)).collect();
        let rep = density_experiment(&target, &split, &coef, &cfg, &[3, 6]).unwrap();
        assert!(
            rep.rows.iter().all(|r| r.error_i < 10.0 * cfg.outer_tol),
            "{:?}",
            rep.rows
        );
    }

    #[test]
    fn sobolev_variant() {
        let (g, split) = setup();
        let cfg = SolveConfig::default();
        let coef = Coefficient::zero(&g);
        // A global trigonometric real part: the extension plus the basis reproduce it exactly.
        let phi = BoundarySpectrum::from_real_fn(g.circle(), |t| (2.0 * t).cos() + 0.3 * t.sin());
        let (h, _) = hilbert_nu(&phi, &coef, &cfg).unwrap();
        let target: Vec<C64> = phi
            .real_samples()
            .iter()
            .zip(h.real_samples())
            .map(|(&a, b)| C64::new(a, b))
            .collect();
        let rep = density_sobolev_experiment(&target, &split, &coef, &cfg, &[4, 8]).unwrap();
        assert!(rep.rows.iter().all(|r| r.error_i < 1e-6), "{:?}", rep.rows);

        let smooth: Vec<C64> = g
            .circle()
            .thetas()
            .iter()
            .map(|&t| C64::from_polar(1.0, -2.0 * t))
            .collect();
        let rep = density_sobolev_experiment(&smooth, &split, &coef, &cfg, &[4, 8, 16]).unwrap();
        assert!(rep.rows[2].error_i < rep.rows[0].error_i, "{:?}", rep.rows);
    }
}
