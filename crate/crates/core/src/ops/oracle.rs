use crate::error::{Error, Result};
use crate::grid::{samples_from_coeffs, DiskField};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const MAX_THETA: usize = 64;
const MAX_R: usize = 24;
const REFLECT_REFINEMENT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    /// `−(1/π)∬ w(ξ)/(ξ−z) dm(ξ)`.
    CauchyArea,
    /// `−(1/π)∬ z·conj(w(ξ))/(1−ξ̄z) dm(ξ)`.
    Reflect,
}

/// Brute-force quadrature result.
#[derive(Clone, Debug)]
pub struct DenseOracle {
    pub field: DiskField,
    /// Bound on the contribution of the omitted singular cells.
    pub omitted_cell_bound: f64,
}

/// Direct tensor quadrature of the defining integral at every grid point.
///
/// For the Cauchy kernel the sources are the grid points themselves, `w(z)` is
/// subtracted using `−(1/π)∬ dm(ξ)/(ξ−z) = z̄`, and the source coinciding with
/// the target is skipped; the omitted cell contributes at most
/// `2·max|w|·√(A/π)` for cell area `A`. The reflected
/// kernel is nearly singular for `|ξ̄z| → 1`, so its sources are resampled on
/// a finer angular grid.
pub fn oracle_dense(w: &DiskField, kind: OracleKind) -> Result<DenseOracle> {
    let grid = w.grid();
    let (nt, nr) = (grid.n_theta(), grid.n_r());
    if nt > MAX_THETA || nr > MAX_R {
        return Err(Error::OracleTooLarge { n_theta: nt, n_r: nr });
    }
    let nodes = grid.radial().nodes();
    let weights = grid.radial().weights();
    let ns = match kind {
        OracleKind::CauchyArea => nt,
        OracleKind::Reflect => REFLECT_REFINEMENT * nt,
    };
    let dtheta = 2.0 * PI / ns as f64;
    let values: Vec<Complex64> = (0..nr)
        .flat_map(|j| samples_from_coeffs(&w.ring_coeffs(j), ns))
        .collect();
    let sources: Vec<Complex64> = (0..nr * ns)
        .map(|i| Complex64::from_polar(nodes[i / ns], dtheta * (i % ns) as f64))
        .collect();
    let out: Vec<Complex64> = (0..nr * nt)
        .into_par_iter()
        .map(|t| {
            let (jt, kt) = (t / nt, t % nt);
            let z = Complex64::from_polar(nodes[jt], 2.0 * PI * kt as f64 / nt as f64);
            let wz = values[jt * ns + kt * (ns / nt)];
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..nr * ns {
                let xi = sources[s];
                let dm = weights[s / ns] * dtheta;
                acc += match kind {
                    OracleKind::CauchyArea => {
                        if s == t {
                            continue;
                        }
                        (values[s] - wz) / (xi - z) * dm
                    }
                    OracleKind::Reflect => z * values[s].conj() / (1.0 - xi.conj() * z) * dm,
                };
            }
            match kind {
                OracleKind::CauchyArea => -acc / PI + wz * z.conj(),
                OracleKind::Reflect => -acc / PI,
            }
        })
        .collect();
    let max_w = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_cell = weights.iter().fold(0.0f64, |a, w| a.max(*w)) * dtheta;
    let omitted_cell_bound = match kind {
        OracleKind::CauchyArea => 2.0 * max_w * (max_cell / PI).sqrt(),
        OracleKind::Reflect => 0.0,
    };
    Ok(DenseOracle {
        field: grid.analyze(&out)?,
        omitted_cell_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use crate::ops::{cauchy_area, reflect_area, SignVariant};

    fn rel_l2(a: &DiskField, b: &DiskField) -> f64 {
        a.sub(b).l2_norm() / b.l2_norm()
    }

    #[test]
    fn guards_large_grids() {
        let g = PolarGrid::new(128, 2, 8).unwrap();
        assert!(matches!(
            oracle_dense(&DiskField::zeros(&g), OracleKind::CauchyArea),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn matches_closed_forms() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let one = g.sample_fn(|_| Complex64::new(1.0, 0.0));
        let o = oracle_dense(&one, OracleKind::CauchyArea).unwrap();
        let exact = g.sample_fn(|z| z.conj()).without_edge();
        assert!(rel_l2(&o.field, &exact) < 2e-2, "{}", rel_l2(&o.field, &exact));
        let xi = g.sample_fn(|z| z);
        let o = oracle_dense(&xi, OracleKind::CauchyArea).unwrap();
        let exact = g.sample_fn(|z| Complex64::from(z.norm_sqr() - 1.0)).without_edge();
        assert!(rel_l2(&o.field, &exact) < 2e-2, "{}", rel_l2(&o.field, &exact));
        assert!(o.omitted_cell_bound > 0.0);
    }

    #[test]
    fn reflect_matches_table_version() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let c = g.sample_fn(|_| Complex64::new(0.3, 0.0));
        let o = oracle_dense(&c, OracleKind::Reflect).unwrap();
        let fast = reflect_area(&c, SignVariant::Plus).without_edge();
        assert!(rel_l2(&o.field, &fast) < 2e-2, "{}", rel_l2(&o.field, &fast));
        let r = g.sample_fn(|z| Complex64::new(0.2, 0.1) + 0.3 * z.conj() - 0.1 * z * z);
        let o = oracle_dense(&r, OracleKind::Reflect).unwrap();
        let fast = reflect_area(&r, SignVariant::Plus).without_edge();
        assert!(rel_l2(&o.field, &fast) < 2e-2, "{}", rel_l2(&o.field, &fast));
        let t = cauchy_area(&r).without_edge();
        let o = oracle_dense(&r, OracleKind::CauchyArea).unwrap();
        assert!(rel_l2(&o.field, &t) < 2e-2, "{}", rel_l2(&o.field, &t));
    }
}
