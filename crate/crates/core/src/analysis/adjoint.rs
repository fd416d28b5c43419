use super::duality_pair;
use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{BoundarySpectrum, CircleGrid};
use crate::solver::{hilbert_nu, SolveConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

type C64 = Complex64;

/// Degree of the random trigonometric polynomials used in the trials.
const TRIAL_DEGREE: usize = 8;

/// `√2 cos kθ, √2 sin kθ` for `k = 1..K/2`, orthonormal for the normalized `L²(T)` product.
fn trig_basis(circle: CircleGrid, k: usize) -> Vec<BoundarySpectrum> {
    (1..=k / 2)
        .flat_map(|n| {
            let n = n as isize;
            let h = SQRT_2 / 2.0;
            [
                BoundarySpectrum::from_modes(circle, &[(n, C64::new(h, 0.0)), (-n, C64::new(h, 0.0))]),
                BoundarySpectrum::from_modes(circle, &[(n, C64::new(0.0, -h)), (-n, C64::new(0.0, h))]),
            ]
        })
        .collect()
}

fn hilbert_columns(basis: &[BoundarySpectrum], coef: &Coefficient, cfg: &SolveConfig) -> Result<Vec<BoundarySpectrum>> {
    basis
        .par_iter()
        .map(|b| hilbert_nu(b, coef, cfg).map(|(h, _)| h))
        .collect()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Matrix identities of `ℋ_ν` on a `K`-dimensional trigonometric basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjointReport {
    pub k: usize,
    /// `H_ij = ⟨b_i, ℋ_ν b_j⟩`, row-major.
    pub matrix: Vec<f64>,
    /// `max |A − Aᵀ| / max |A|` with `A_ij = ⟨∂_θℋ_ν b_j, b_i⟩`.
    pub symmetry_violation: f64,
    /// `max |Hᵀ − C| / max |H|` with `C` the matrix of `−∂_θℋ_ν∂_θ^{−1}`.
    pub adjoint_violation: f64,
}

/// Builds the matrix of `ℋ_ν` on `K` basis functions (`K` even, `K/2 ≤ M`) by
/// `K` solves and measures the self-adjointness of `∂_θℋ_ν` and the formula
/// `ℋ_ν* = −∂_θℋ_ν∂_θ^{−1}` on zero-mean functions.
pub fn adjoint_check(coef: &Coefficient, cfg: &SolveConfig, k: usize) -> Result<AdjointReport> {
    let circle = coef.grid().circle();
    if k == 0 || !k.is_multiple_of(2) || k / 2 > circle.max_mode() {
        return Err(Error::InvalidConfig(format!(
            "basis size {k} must be even and at most 2M"
        )));
    }
    let basis = trig_basis(circle, k);
    let cols = hilbert_columns(&basis, coef, cfg)?;
    let h = DMatrix::from_fn(k, k, |i, j| duality_pair(&basis[i], &cols[j]));
    let a = DMatrix::from_fn(k, k, |i, j| duality_pair(&cols[j].derivative(), &basis[i]));
    // ∂_θ^{−1}(√2 cos nθ) = (√2 sin nθ)/n and ∂_θ^{−1}(√2 sin nθ) = −(√2 cos nθ)/n.
    let inv_col = |j: usize| -> BoundarySpectrum {
        let n = (j / 2 + 1) as f64;
        if j.is_multiple_of(2) {
            cols[j + 1].scale(C64::new(1.0 / n, 0.0))
        } else {
            cols[j - 1].scale(C64::new(-1.0 / n, 0.0))
        }
    };
    let c = DMatrix::from_fn(k, k, |i, j| -duality_pair(&basis[i], &inv_col(j).derivative()));
    let symmetry_violation = max_abs(&(&a - a.transpose())) / max_abs(&a).max(f64::MIN_POSITIVE);
    let adjoint_violation = max_abs(&(h.transpose() - &c)) / max_abs(&h).max(f64::MIN_POSITIVE);
    Ok(AdjointReport {
        k,
        matrix: h.transpose().as_slice().to_vec(),
        symmetry_violation,
        adjoint_violation,
    })
}

/// Weak duality at `p = 2` on a `K`-dimensional truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualitySpot {
    pub k: usize,
    /// Least-squares distance from the target to the span of `K` traces plus constants.
    pub inf_side: f64,
    /// Largest normalized pairing of the target with the span of `K` annihilator elements.
    pub sup_side: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `|⟨∂_θΦ, tr f⟩| / (‖∂_θΦ‖₂‖tr f‖₂)` per trial.
    pub pairings: Vec<f64>,
    pub max_pairing: f64,
    pub duality: Vec<DualitySpot>,
}

fn random_real(circle: CircleGrid, rng: &mut ChaCha8Rng) -> BoundarySpectrum {
    let deg = TRIAL_DEGREE.min(circle.max_mode()) as isize;
    let mut modes = vec![(0, C64::new(rng.gen_range(-1.0..1.0), 0.0))];
    for n in 1..=deg {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        modes.push((n, c));
        modes.push((-n, c.conj()));
    }
    BoundarySpectrum::from_modes(circle, &modes)
}

/// Real least-squares coordinates of spectra: real and imaginary parts of every coefficient.
fn as_real_vector(s: &BoundarySpectrum) -> Vec<f64> {
    s.coeffs().iter().flat_map(|c| [c.re, c.im]).collect()
}

fn lift(phi: &BoundarySpectrum, h: &BoundarySpectrum) -> BoundarySpectrum {
    phi.add(&h.scale(C64::new(0.0, 1.0)))
}

/// Pairs `tr f = φ + iℋ_νφ` with `∂_θΦ`, `Φ = γ + iℋ_{−ν}γ`, over random real `φ, γ`,
/// and spot-checks weak duality between the distance to the trace space and the
/// norm of the pairing functional on its annihilator, for each `K` in `duality_ks`.
pub fn orthogonality_check(
    coef: &Coefficient,
    cfg: &SolveConfig,
    trials: usize,
    seed: u64,
    duality_ks: &[usize],
) -> Result<OrthogonalityReport> {
    let circle = coef.grid().circle();
    let minus = coef.negated();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(BoundarySpectrum, BoundarySpectrum)> = (0..trials)
        .map(|_| (random_real(circle, &mut rng), random_real(circle, &mut rng)))
        .collect();
    let pairings = pairs
        .par_iter()
        .map(|(phi, gamma)| {
            let (h, _) = hilbert_nu(phi, coef, cfg)?;
            let (hg, _) = hilbert_nu(gamma, &minus, cfg)?;
            let f = lift(phi, &h);
            let dphi = lift(gamma, &hg).derivative();
            let scale = (f.l2_norm() * dphi.l2_norm()).max(f64::MIN_POSITIVE);
            Ok(duality_pair(&dphi, &f).abs() / scale)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_pairing = pairings.iter().cloned().fold(0.0, f64::max);

    let mut duality = Vec::new();
    if let Some(&k_max) = duality_ks.iter().max() {
        let k_max = k_max + k_max % 2;
        if k_max / 2 > circle.max_mode() {
            return Err(Error::InvalidConfig(format!(
                "duality basis {k_max} exceeds the grid band"
            )));
        }
        let basis = trig_basis(circle, k_max);
        let h_plus = hilbert_columns(&basis, coef, cfg)?;
        let h_minus = hilbert_columns(&basis, &minus, cfg)?;
        let target = {
            let deg = TRIAL_DEGREE.min(circle.max_mode()) as isize;
            let modes: Vec<(isize, C64)> = (-deg..=deg)
                .map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            BoundarySpectrum::from_modes(circle, &modes)
        };
        let one = BoundarySpectrum::from_modes(circle, &[(0, C64::new(1.0, 0.0))]);
        for &k in duality_ks {
            let mut f_cols = vec![one.clone(), one.scale(C64::new(0.0, 1.0))];
            f_cols.extend((0..k.min(k_max)).map(|j| lift(&basis[j], &h_plus[j])));
            let g_cols: Vec<BoundarySpectrum> = (0..k.min(k_max))
                .map(|j| lift(&basis[j], &h_minus[j]).derivative())
                .collect();

            let rows = 2 * circle.n_modes();
            let a = DMatrix::from_fn(rows, f_cols.len(), |i, j| as_real_vector(&f_cols[j])[i]);
            let b = DVector::from_vec(as_real_vector(&target));
            let x = a
                .clone()
                .svd(true, true)
                .solve(&b, 1e-12)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let inf_side = (&a * x - &b).norm();

            let gram = DMatrix::from_fn(g_cols.len(), g_cols.len(), |i, j| {
                duality_pair(&g_cols[i], &g_cols[j].conj())
            });
            let c = DVector::from_fn(g_cols.len(), |i, _| duality_pair(&target, &g_cols[i]));
            let sup_side = if g_cols.is_empty() {
                0.0
            } else {
                let y = gram
                    .svd(true, true)
                    .solve(&c, 1e-12)
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                c.dot(&y).max(0.0).sqrt()
            };
            duality.push(DualitySpot { k, inf_side, sup_side });
        }
    }
    Ok(OrthogonalityReport {
        pairings,
        max_pairing,
        duality,
    })
}
