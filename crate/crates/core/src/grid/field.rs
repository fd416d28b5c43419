use super::fourier::{coeffs_from_samples, lp_mean, samples_from_coeffs, BoundarySpectrum, CircleGrid};
use super::quadrature::RadialRule;
use crate::error::{Error, Result};
use crate::ops::OperatorWorkspace;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

type C64 = Complex64;
const ZERO: C64 = C64::new(0.0, 0.0);

/// Default growth bound for smooth trace extrapolation.
pub const EXTRAPOLATION_GROWTH_BOUND: f64 = 10.0;

/// Tensor polar grid: radial Gauss panels times equispaced angles.
pub struct PolarGrid {
    circle: CircleGrid,
    radial: RadialRule,
    workspace: OnceLock<Arc<OperatorWorkspace>>,
}

impl fmt::Debug for PolarGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarGrid")
            .field("n_theta", &self.circle.n_theta())
            .field("panels", &self.radial.panels())
            .field("per_panel", &self.radial.per_panel())
            .finish()
    }
}

impl PolarGrid {
    pub fn new(n_theta: usize, panels: usize, per_panel: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self {
            circle: CircleGrid::new(n_theta)?,
            radial: RadialRule::composite(panels, per_panel)?,
            workspace: OnceLock::new(),
        }))
    }

    /// 256 angles, 8 panels of 8 Gauss nodes.
    pub fn standard() -> Arc<Self> {
        Self::new(256, 8, 8).expect("default grid is valid")
    }

    pub fn circle(&self) -> CircleGrid {
        self.circle
    }

    pub fn radial(&self) -> &RadialRule {
        &self.radial
    }

    pub fn n_theta(&self) -> usize {
        self.circle.n_theta()
    }

    pub fn n_r(&self) -> usize {
        self.radial.len()
    }

    pub fn max_mode(&self) -> usize {
        self.circle.max_mode()
    }

    pub fn n_modes(&self) -> usize {
        self.circle.n_modes()
    }

    pub fn padded_len(&self) -> usize {
        self.circle.padded_len()
    }

    /// Operator tables, built on first use and shared afterwards.
    pub fn workspace(&self) -> &OperatorWorkspace {
        self.workspace.get_or_init(|| Arc::new(OperatorWorkspace::build(self)))
    }

    /// Index of the radial node equal to `r` (to 1e−12), if any.
    pub fn node_index(&self, r: f64) -> Option<usize> {
        self.radial.nodes().iter().position(|&x| (x - r).abs() <= 1e-12)
    }

    /// Decomposes samples laid out radius-major (`j * n_theta + k`).
    pub fn analyze(self: &Arc<Self>, samples: &[C64]) -> Result<DiskField> {
        let (nr, nt) = (self.n_r(), self.n_theta());
        if samples.len() != nr * nt {
            return Err(Error::ShapeMismatch {
                expected: nr * nt,
                got: samples.len(),
            });
        }
        let m = self.max_mode();
        let rings: Vec<Vec<C64>> = samples
            .par_chunks(nt)
            .map(|ring| coeffs_from_samples(ring, m))
            .collect();
        let mut field = DiskField::zeros(self);
        for (j, ring) in rings.iter().enumerate() {
            for (idx, c) in ring.iter().enumerate() {
                field.data[idx * nr + j] = *c;
            }
        }
        Ok(field)
    }

    /// Samples `f(z)` on the padded grid, including the unit circle as exact edge.
    pub fn sample_fn(self: &Arc<Self>, f: impl Fn(C64) -> C64 + Sync) -> DiskField {
        let p = self.padded_len();
        let rows = self.n_r() + 1;
        let samples: Vec<C64> = (0..rows * p)
            .into_par_iter()
            .map(|i| f(self.padded_point(i / p, i % p)))
            .collect();
        DiskField::from_padded(self, &samples, true)
    }

    /// Point of padded row `row` (`n_r` is the unit circle) and angle index `k`.
    pub fn padded_point(&self, row: usize, k: usize) -> C64 {
        let r = self.row_radius(row);
        C64::from_polar(r, 2.0 * PI * k as f64 / self.padded_len() as f64)
    }

    pub fn row_radius(&self, row: usize) -> f64 {
        if row == self.n_r() {
            1.0
        } else {
            self.radial.nodes()[row]
        }
    }
}

/// Mode-wise radial profiles of a function on the disk.
///
/// `data[(n + M) * n_r + j]` holds the coefficient of `e^{inθ}` at node `r_j`.
/// Fields produced by Cauchy-type operators also carry their exact values on
/// the unit circle in `edge`.
#[derive(Clone)]
pub struct DiskField {
    grid: Arc<PolarGrid>,
    data: Vec<C64>,
    edge: Option<Vec<C64>>,
}

impl fmt::Debug for DiskField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiskField")
            .field("grid", &self.grid)
            .field("has_edge", &self.edge.is_some())
            .finish()
    }
}

impl DiskField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![ZERO; grid.n_modes() * grid.n_r()],
            edge: None,
        }
    }

    pub fn constant(grid: &Arc<PolarGrid>, c: C64) -> Self {
        let mut out = Self::zeros(grid);
        out.profile_mut(0).iter_mut().for_each(|v| *v = c);
        let mut edge = vec![ZERO; grid.n_modes()];
        edge[grid.max_mode()] = c;
        out.edge = Some(edge);
        out
    }

    pub fn from_profiles(grid: &Arc<PolarGrid>, data: Vec<C64>, edge: Option<Vec<C64>>) -> Result<Self> {
        let expected = grid.n_modes() * grid.n_r();
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: data.len(),
            });
        }
        if let Some(e) = &edge {
            if e.len() != grid.n_modes() {
                return Err(Error::ShapeMismatch {
                    expected: grid.n_modes(),
                    got: e.len(),
                });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            data,
            edge,
        })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    fn mode_index(&self, n: isize) -> usize {
        let m = self.grid.max_mode() as isize;
        assert!(n.abs() <= m, "mode {n} outside band |n| <= {m}");
        (n + m) as usize
    }

    pub fn profile(&self, n: isize) -> &[C64] {
        let nr = self.grid.n_r();
        let i = self.mode_index(n) * nr;
        &self.data[i..i + nr]
    }

    pub fn profile_mut(&mut self, n: isize) -> &mut [C64] {
        let nr = self.grid.n_r();
        let i = self.mode_index(n) * nr;
        &mut self.data[i..i + nr]
    }

    pub fn edge(&self) -> Option<&[C64]> {
        self.edge.as_deref()
    }

    pub fn edge_mut(&mut self) -> Option<&mut [C64]> {
        self.edge.as_deref_mut()
    }

    pub fn has_edge(&self) -> bool {
        self.edge.is_some()
    }

    pub fn set_edge(&mut self, edge: Option<Vec<C64>>) {
        if let Some(e) = &edge {
            assert_eq!(e.len(), self.grid.n_modes());
        }
        self.edge = edge;
    }

    pub fn without_edge(mut self) -> Self {
        self.edge = None;
        self
    }

    /// Edge values as a spectrum, when exact boundary values are carried.
    pub fn edge_spectrum(&self) -> Option<BoundarySpectrum> {
        self.edge.as_ref().map(|e| {
            BoundarySpectrum::from_coeffs(self.grid.circle(), e.clone(), false).expect("edge length matches circle")
        })
    }

    /// Fourier coefficients on the circle of radius `r_j`.
    pub fn ring_coeffs(&self, j: usize) -> Vec<C64> {
        let nr = self.grid.n_r();
        (0..self.grid.n_modes()).map(|idx| self.data[idx * nr + j]).collect()
    }

    /// Fourier coefficients at an arbitrary radius in `[0, 1]` by panel interpolation.
    pub fn coeffs_at_radius(&self, r: f64) -> Vec<C64> {
        let rule = self.grid.radial();
        let nr = self.grid.n_r();
        let q = rule.panel_of(r);
        let pp = rule.per_panel();
        let mut basis = vec![0.0; pp];
        rule.lagrange_basis(q, r, &mut basis);
        (0..self.grid.n_modes())
            .map(|idx| {
                let off = idx * nr + q * pp;
                basis.iter().zip(&self.data[off..off + pp]).map(|(b, v)| v * b).sum()
            })
            .collect()
    }

    /// Samples laid out radius-major (`j * n_theta + k`).
    pub fn synthesize(&self) -> Vec<C64> {
        let nt = self.grid.n_theta();
        (0..self.grid.n_r())
            .into_par_iter()
            .flat_map_iter(|j| samples_from_coeffs(&self.ring_coeffs(j), nt))
            .collect()
    }

    /// Samples on the padded angular grid; one extra row for the edge when present.
    pub fn to_padded(&self) -> Vec<C64> {
        let p = self.grid.padded_len();
        let nr = self.grid.n_r();
        let rows = nr + usize::from(self.edge.is_some());
        (0..rows)
            .into_par_iter()
            .flat_map_iter(|row| {
                if row == nr {
                    samples_from_coeffs(self.edge.as_ref().unwrap(), p)
                } else {
                    samples_from_coeffs(&self.ring_coeffs(row), p)
                }
            })
            .collect()
    }

    /// Inverse of [`DiskField::to_padded`], truncating to the band.
    pub fn from_padded(grid: &Arc<PolarGrid>, samples: &[C64], has_edge: bool) -> Self {
        let p = grid.padded_len();
        let nr = grid.n_r();
        let m = grid.max_mode();
        let rows = nr + usize::from(has_edge);
        assert_eq!(samples.len(), rows * p, "padded sample shape");
        let rings: Vec<Vec<C64>> = samples.par_chunks(p).map(|ring| coeffs_from_samples(ring, m)).collect();
        let mut out = Self::zeros(grid);
        for (j, ring) in rings.iter().take(nr).enumerate() {
            for (idx, c) in ring.iter().enumerate() {
                out.data[idx * nr + j] = *c;
            }
        }
        if has_edge {
            out.edge = Some(rings[nr].clone());
        }
        out
    }

    /// Pointwise combination `f(z, values)` on the padded grid.
    ///
    /// The edge is kept only when every input carries one.
    pub fn pointwise(grid: &Arc<PolarGrid>, inputs: &[&DiskField], f: impl Fn(C64, &[C64]) -> C64 + Sync) -> Self {
        let has_edge = inputs.iter().all(|x| x.has_edge());
        let padded: Vec<Vec<C64>> = inputs
            .iter()
            .map(|x| {
                if has_edge {
                    x.to_padded()
                } else {
                    (*x).clone().without_edge().to_padded()
                }
            })
            .collect();
        let p = grid.padded_len();
        let rows = grid.n_r() + usize::from(has_edge);
        let samples: Vec<C64> = (0..rows * p)
            .into_par_iter()
            .map_init(
                || vec![ZERO; inputs.len()],
                |vals, i| {
                    for (v, s) in vals.iter_mut().zip(&padded) {
                        *v = s[i];
                    }
                    f(grid.padded_point(i / p, i % p), vals)
                },
            )
            .collect();
        Self::from_padded(grid, &samples, has_edge)
    }

    /// Value at an interior point, via radial interpolation and Fourier synthesis.
    pub fn eval(&self, z: C64) -> C64 {
        let r = z.norm();
        let coeffs = if r >= 1.0 {
            self.edge.clone().unwrap_or_else(|| self.coeffs_at_radius(1.0))
        } else {
            self.coeffs_at_radius(r)
        };
        let m = self.grid.max_mode() as isize;
        let theta = z.arg();
        coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * C64::from_polar(1.0, (idx as isize - m) as f64 * theta))
            .sum()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "fields on different grids");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        let edge = match (&self.edge, &other.edge) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()),
            _ => None,
        };
        Self {
            grid: self.grid.clone(),
            data,
            edge,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: C64, other: &Self) -> Self {
        self.zip_with(other, |x, y| x + a * y)
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|v| v * a).collect(),
            edge: self.edge.as_ref().map(|e| e.iter().map(|v| v * a).collect()),
        }
    }

    /// Adds a constant to mode 0.
    pub fn add_constant(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.profile_mut(0).iter_mut().for_each(|v| *v += c);
        let m = self.grid.max_mode();
        if let Some(e) = out.edge.as_mut() {
            e[m] += c;
        }
        out
    }

    /// Complex conjugate: mode n of the result is the conjugate of mode −n.
    pub fn conj(&self) -> Self {
        let nr = self.grid.n_r();
        let nm = self.grid.n_modes();
        let mut data = vec![ZERO; self.data.len()];
        for idx in 0..nm {
            let src = nm - 1 - idx;
            for j in 0..nr {
                data[idx * nr + j] = self.data[src * nr + j].conj();
            }
        }
        let edge = self
            .edge
            .as_ref()
            .map(|e| (0..nm).map(|idx| e[nm - 1 - idx].conj()).collect());
        Self {
            grid: self.grid.clone(),
            data,
            edge,
        }
    }

    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).scale(C64::new(0.5, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        self.sub(&self.conj()).scale(C64::new(0.0, -0.5))
    }

    fn radial_derivative(&self) -> Vec<C64> {
        let nr = self.grid.n_r();
        let rule = self.grid.radial();
        let mut out = vec![ZERO; self.data.len()];
        for (src, dst) in self.data.chunks(nr).zip(out.chunks_mut(nr)) {
            rule.differentiate(src, dst);
        }
        out
    }

    /// `∂̄ = (∂_x + i∂_y)/2`, spectrally; the edge is dropped.
    pub fn d_bar(&self) -> Self {
        self.wirtinger(true)
    }

    /// `∂ = (∂_x − i∂_y)/2`, spectrally; the edge is dropped.
    pub fn d(&self) -> Self {
        self.wirtinger(false)
    }

    fn wirtinger(&self, bar: bool) -> Self {
        let nr = self.grid.n_r();
        let m = self.grid.max_mode() as isize;
        let nodes = self.grid.radial().nodes();
        let dr = self.radial_derivative();
        let mut out = Self::zeros(&self.grid);
        for n in -m..=m {
            let target = if bar { n + 1 } else { n - 1 };
            if target.abs() > m {
                continue;
            }
            let src = ((n + m) as usize) * nr;
            let dst = ((target + m) as usize) * nr;
            let sign = if bar { -1.0 } else { 1.0 };
            for j in 0..nr {
                let v = self.data[src + j];
                out.data[dst + j] = 0.5 * (dr[src + j] + sign * n as f64 * v / nodes[j]);
            }
        }
        out
    }

    /// `‖f‖_{L²(D)}` (unnormalized area measure).
    pub fn l2_norm(&self) -> f64 {
        let nr = self.grid.n_r();
        let w = self.grid.radial().weights();
        let s: f64 = self
            .data
            .chunks(nr)
            .map(|p| p.iter().zip(w).map(|(v, w)| w * v.norm_sqr()).sum::<f64>())
            .sum();
        (2.0 * PI * s).sqrt()
    }

    /// Maximum modulus over the padded sample points (edge included when present).
    pub fn max_abs(&self) -> f64 {
        self.to_padded().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest ratio, over radial nodes, of negative-mode ℓ² mass to total ℓ² mass.
    pub fn negative_mode_fraction(&self) -> f64 {
        let nr = self.grid.n_r();
        let m = self.grid.max_mode();
        let mut worst: f64 = 0.0;
        for j in 0..nr {
            let mut neg = 0.0;
            let mut total = 0.0;
            for idx in 0..self.grid.n_modes() {
                let v = self.data[idx * nr + j].norm_sqr();
                total += v;
                if idx < m {
                    neg += v;
                }
            }
            if total > 0.0 {
                worst = worst.max((neg / total).sqrt());
            }
        }
        worst
    }

    /// Cubic extrapolation of each profile to `r = 1` through the four outermost nodes.
    pub fn extrapolate_edge(&self, growth_bound: f64) -> Result<Vec<C64>> {
        let nr = self.grid.n_r();
        let nodes = self.grid.radial().nodes();
        if nr < 4 {
            return Err(Error::InvalidGrid("need at least 4 radial nodes".into()));
        }
        let xs = &nodes[nr - 4..];
        let lag: Vec<f64> = (0..4)
            .map(|i| {
                (0..4)
                    .filter(|&k| k != i)
                    .map(|k| (1.0 - xs[k]) / (xs[i] - xs[k]))
                    .product()
            })
            .collect();
        let edge: Vec<C64> = self
            .data
            .chunks(nr)
            .map(|p| p[nr - 4..].iter().zip(&lag).map(|(v, l)| v * l).sum())
            .collect();
        let outer: f64 = self
            .ring_coeffs(nr - 1)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let ext: f64 = edge.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let ratio = if outer > 0.0 {
            ext / outer
        } else if ext > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if !ratio.is_finite() || ratio > growth_bound {
            return Err(Error::ExtrapolationDiverged(ratio));
        }
        Ok(edge)
    }

    /// Normalized `L^p` mean of the samples on ring `j` (padded trapezoid rule).
    pub(crate) fn ring_lp(&self, j: usize, p: f64) -> f64 {
        let s = samples_from_coeffs(&self.ring_coeffs(j), self.grid.padded_len());
        lp_mean(&s, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(32, 2, 8).unwrap()
    }

    #[test]
    fn analyze_constant_and_monomial() {
        let g = grid();
        let ones = vec![C64::new(1.0, 0.0); g.n_r() * g.n_theta()];
        let f = g.analyze(&ones).unwrap();
        assert!(f.profile(0).iter().all(|v| (v - 1.0).norm() < 1e-14));
        assert!(f.profile(1).iter().all(|v| v.norm() < 1e-14));

        let nodes = g.radial().nodes().to_vec();
        let z: Vec<C64> = (0..g.n_r() * g.n_theta())
            .map(|i| C64::from_polar(nodes[i / 32], g.circle().theta(i % 32)))
            .collect();
        let f = g.analyze(&z).unwrap();
        for (v, r) in f.profile(1).iter().zip(&nodes) {
            assert!((v - r).norm() < 1e-14);
        }
        assert!(g.analyze(&z[1..]).is_err());
    }

    #[test]
    fn synthesize_inverts_analyze() {
        let g = grid();
        let f = g.sample_fn(|z| z * z.conj() + z.powi(3) - 2.0 * z.conj().powi(5));
        let back = g.analyze(&f.synthesize()).unwrap();
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn wirtinger_derivatives_of_polynomials() {
        let g = grid();
        let f = g.sample_fn(|z| z * z * z.conj() + 3.0 * z.conj());
        let db = f.d_bar();
        let expect_db = g.sample_fn(|z| z * z + 3.0);
        let d = f.d();
        let expect_d = g.sample_fn(|z| 2.0 * z * z.conj());
        for (a, b) in db.data().iter().zip(expect_db.data()) {
            assert!((a - b).norm() < 1e-11);
        }
        for (a, b) in d.data().iter().zip(expect_d.data()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn conj_and_parts() {
        let g = grid();
        let f = g.sample_fn(|z| C64::new(0.0, 2.0) * z + 1.0);
        let c = f.conj();
        let expect = g.sample_fn(|z| C64::new(0.0, -2.0) * z.conj() + 1.0);
        for (a, b) in c.data().iter().zip(expect.data()) {
            assert!((a - b).norm() < 1e-14);
        }
        let z0 = C64::new(0.3, -0.2);
        assert!((f.real_part().eval(z0).re - (1.0 - 2.0 * z0.im)).abs() < 1e-12);
        assert!((f.imag_part().eval(z0).re - 2.0 * z0.re).abs() < 1e-12);
    }

    #[test]
    fn pointwise_product_and_eval() {
        let g = grid();
        let a = g.sample_fn(|z| z);
        let b = g.sample_fn(|z| z.conj() * z.conj());
        let p = DiskField::pointwise(&g, &[&a, &b], |_, v| v[0] * v[1]);
        let z0 = C64::new(0.4, 0.5);
        assert!((p.eval(z0) - z0 * z0.conj().powi(2)).norm() < 1e-13);
        assert!(p.has_edge());
    }

    #[test]
    fn l2_norm_of_z() {
        let g = grid();
        let f = g.sample_fn(|z| z);
        // ∬|z|² dm = π/2
        assert!((f.l2_norm() - (PI / 2.0).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn extrapolation_recovers_smooth_edge() {
        let g = grid();
        let f = g.sample_fn(|z| (z * 0.5).exp()).without_edge();
        let edge = f.extrapolate_edge(EXTRAPOLATION_GROWTH_BOUND).unwrap();
        let exact = g.sample_fn(|z| (z * 0.5).exp());
        for (a, b) in edge.iter().zip(exact.edge().unwrap()) {
            assert!((a - b).norm() < 1e-7);
        }
    }
}
