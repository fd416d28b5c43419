use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

type C64 = Complex64;

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, plans) = &mut *guard;
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Coefficients `c_n`, `|n| ≤ m`, of equispaced samples, `c_n = (1/L) Σ f_k e^{-inθ_k}`.
pub(crate) fn coeffs_from_samples(samples: &[C64], m: usize) -> Vec<C64> {
    let len = samples.len();
    debug_assert!(len > 2 * m);
    let mut buf = samples.to_vec();
    plan(len, false).process(&mut buf);
    let scale = 1.0 / len as f64;
    (0..=2 * m)
        .map(|idx| {
            let n = idx as isize - m as isize;
            buf[n.rem_euclid(len as isize) as usize] * scale
        })
        .collect()
}

/// Inverse of [`coeffs_from_samples`] onto `len` equispaced angles.
pub(crate) fn samples_from_coeffs(coeffs: &[C64], len: usize) -> Vec<C64> {
    let m = coeffs.len() / 2;
    debug_assert!(len > 2 * m);
    let mut buf = vec![C64::new(0.0, 0.0); len];
    for (idx, c) in coeffs.iter().enumerate() {
        let n = idx as isize - m as isize;
        buf[n.rem_euclid(len as isize) as usize] = *c;
    }
    plan(len, true).process(&mut buf);
    buf
}

/// Equispaced angles `θ_k = 2πk/n_theta` on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleGrid {
    n_theta: usize,
}

impl CircleGrid {
    pub fn new(n_theta: usize) -> Result<Self> {
        if n_theta < 16 || !n_theta.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_theta must be a power of two >= 16, got {n_theta}"
            )));
        }
        Ok(Self { n_theta })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Largest retained Fourier index `M = n_theta/2 − 1`.
    pub fn max_mode(&self) -> usize {
        self.n_theta / 2 - 1
    }

    pub fn n_modes(&self) -> usize {
        2 * self.max_mode() + 1
    }

    /// Length of the zero-padded grid used for products.
    pub fn padded_len(&self) -> usize {
        2 * self.n_theta
    }

    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_theta as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|k| self.theta(k)).collect()
    }
}

/// Fourier coefficients of a function on the unit circle, indices `−M..=M`.
#[derive(Clone, Debug)]
pub struct BoundarySpectrum {
    circle: CircleGrid,
    coeffs: Vec<C64>,
    real: bool,
}

impl BoundarySpectrum {
    pub fn zeros(circle: CircleGrid) -> Self {
        Self {
            circle,
            coeffs: vec![C64::new(0.0, 0.0); circle.n_modes()],
            real: true,
        }
    }

    /// Wraps coefficients; with `real` set, Hermitian symmetry is checked to 1e−12 relative.
    pub fn from_coeffs(circle: CircleGrid, coeffs: Vec<C64>, real: bool) -> Result<Self> {
        if coeffs.len() != circle.n_modes() {
            return Err(Error::ShapeMismatch {
                expected: circle.n_modes(),
                got: coeffs.len(),
            });
        }
        let mut out = Self {
            circle,
            coeffs,
            real: false,
        };
        if real {
            let scale = out.l2_norm().max(f64::MIN_POSITIVE);
            let m = circle.max_mode() as isize;
            let asym = (0..=m)
                .map(|n| (out.mode(n) - out.mode(-n).conj()).norm())
                .fold(0.0, f64::max);
            if asym > 1e-12 * scale {
                return Err(Error::NotReal);
            }
            out.symmetrize();
        }
        Ok(out)
    }

    pub fn from_samples(circle: CircleGrid, samples: &[C64]) -> Result<Self> {
        if samples.len() != circle.n_theta() {
            return Err(Error::ShapeMismatch {
                expected: circle.n_theta(),
                got: samples.len(),
            });
        }
        Ok(Self {
            circle,
            coeffs: coeffs_from_samples(samples, circle.max_mode()),
            real: false,
        })
    }

    pub fn from_real_samples(circle: CircleGrid, samples: &[f64]) -> Result<Self> {
        let c: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        let mut out = Self::from_samples(circle, &c)?;
        out.symmetrize();
        Ok(out)
    }

    /// Samples `f` on the padded grid before truncating, which keeps aliasing low.
    pub fn from_fn(circle: CircleGrid, f: impl Fn(f64) -> C64) -> Self {
        let len = circle.padded_len();
        let samples: Vec<C64> = (0..len).map(|k| f(2.0 * PI * k as f64 / len as f64)).collect();
        Self {
            circle,
            coeffs: coeffs_from_samples(&samples, circle.max_mode()),
            real: false,
        }
    }

    pub fn from_real_fn(circle: CircleGrid, f: impl Fn(f64) -> f64) -> Self {
        let mut out = Self::from_fn(circle, |t| C64::new(f(t), 0.0));
        out.symmetrize();
        out
    }

    /// `Σ c_n e^{inθ}` for a list of `(n, c_n)`.
    pub fn from_modes(circle: CircleGrid, modes: &[(isize, C64)]) -> Self {
        let mut out = Self {
            circle,
            coeffs: vec![C64::new(0.0, 0.0); circle.n_modes()],
            real: false,
        };
        for &(n, c) in modes {
            let i = out.index(n);
            out.coeffs[i] += c;
        }
        out
    }

    fn symmetrize(&mut self) {
        let m = self.circle.max_mode() as isize;
        for n in 1..=m {
            let avg = 0.5 * (self.mode(n) + self.mode(-n).conj());
            let (i, j) = (self.index(n), self.index(-n));
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        let i0 = self.index(0);
        self.coeffs[i0].im = 0.0;
        self.real = true;
    }

    fn index(&self, n: isize) -> usize {
        let m = self.circle.max_mode() as isize;
        assert!(n.abs() <= m, "mode {n} outside band |n| <= {m}");
        (n + m) as usize
    }

    pub fn circle(&self) -> CircleGrid {
        self.circle
    }

    pub fn max_mode(&self) -> usize {
        self.circle.max_mode()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_real_valued(&self) -> bool {
        self.real
    }

    /// Coefficient of `e^{inθ}`; zero outside the band.
    pub fn mode(&self, n: isize) -> C64 {
        let m = self.circle.max_mode() as isize;
        if n.abs() > m {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + m) as usize]
        }
    }

    pub fn mean(&self) -> C64 {
        self.mode(0)
    }

    /// Accepts spectra tagged real or Hermitian to 1e−12 relative.
    pub fn require_real(&self) -> Result<()> {
        if self.real || self.hermitian_defect() <= 1e-12 * self.l2_norm() {
            Ok(())
        } else {
            Err(Error::NotReal)
        }
    }

    fn hermitian_defect(&self) -> f64 {
        let m = self.max_mode() as isize;
        (0..=m)
            .map(|n| (self.mode(n) - self.mode(-n).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Re-tags a spectrum as real if it is Hermitian to `tol` relative.
    pub fn into_real(self, tol: f64) -> Result<Self> {
        let scale = self.l2_norm().max(f64::MIN_POSITIVE);
        if self.hermitian_defect() > tol * scale {
            return Err(Error::NotReal);
        }
        let mut out = self;
        out.symmetrize();
        Ok(out)
    }

    pub fn samples(&self) -> Vec<C64> {
        samples_from_coeffs(&self.coeffs, self.circle.n_theta())
    }

    pub fn samples_on(&self, len: usize) -> Vec<C64> {
        samples_from_coeffs(&self.coeffs, len)
    }

    pub fn real_samples(&self) -> Vec<f64> {
        self.samples().into_iter().map(|c| c.re).collect()
    }

    pub fn eval(&self, theta: f64) -> C64 {
        let m = self.max_mode() as isize;
        (-m..=m)
            .map(|n| self.mode(n) * C64::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    fn map_coeffs(&self, real: bool, f: impl Fn(isize, C64) -> C64) -> Self {
        let m = self.max_mode() as isize;
        let coeffs = (-m..=m).map(|n| f(n, self.mode(n))).collect();
        Self {
            circle: self.circle,
            coeffs,
            real,
        }
    }

    pub fn conj(&self) -> Self {
        let m = self.max_mode() as isize;
        let coeffs = (-m..=m).map(|n| self.mode(-n).conj()).collect();
        Self {
            circle: self.circle,
            coeffs,
            real: self.real,
        }
    }

    pub fn real_part(&self) -> Self {
        let c = self.conj();
        let mut out = self.map_coeffs(true, |n, v| 0.5 * (v + c.mode(n)));
        out.symmetrize();
        out
    }

    pub fn imag_part(&self) -> Self {
        let c = self.conj();
        let mut out = self.map_coeffs(true, |n, v| (v - c.mode(n)) / C64::new(0.0, 2.0));
        out.symmetrize();
        out
    }

    pub fn scale(&self, a: C64) -> Self {
        let real = self.real && a.im == 0.0;
        self.map_coeffs(real, |_, v| v * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map_coeffs(self.real && other.real, |n, v| v + other.mode(n))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map_coeffs(self.real && other.real, |n, v| v - other.mode(n))
    }

    /// Adds `a` to the mean.
    pub fn add_constant(&self, a: C64) -> Self {
        self.map_coeffs(self.real && a.im == 0.0, |n, v| if n == 0 { v + a } else { v })
    }

    /// `∂_θ`, spectrally.
    pub fn derivative(&self) -> Self {
        self.map_coeffs(self.real, |n, v| v * C64::new(0.0, n as f64))
    }

    /// Zero-mean antiderivative; the mean of `self` is ignored.
    pub fn antiderivative(&self) -> Self {
        self.map_coeffs(self.real, |n, v| {
            if n == 0 {
                C64::new(0.0, 0.0)
            } else {
                v / C64::new(0.0, n as f64)
            }
        })
    }

    /// Multiplication by `e^{ikθ}`; modes pushed out of the band are dropped.
    pub fn shift(&self, k: isize) -> Self {
        self.map_coeffs(false, |n, _| self.mode(n - k))
    }

    /// Pointwise combination evaluated on the padded grid and truncated.
    pub fn pointwise(circle: CircleGrid, inputs: &[&BoundarySpectrum], f: impl Fn(f64, &[C64]) -> C64) -> Self {
        let len = circle.padded_len();
        let samples: Vec<Vec<C64>> = inputs.iter().map(|s| s.samples_on(len)).collect();
        let mut vals = vec![C64::new(0.0, 0.0); inputs.len()];
        let out: Vec<C64> = (0..len)
            .map(|k| {
                for (v, s) in vals.iter_mut().zip(&samples) {
                    *v = s[k];
                }
                f(2.0 * PI * k as f64 / len as f64, &vals)
            })
            .collect();
        Self {
            circle,
            coeffs: coeffs_from_samples(&out, circle.max_mode()),
            real: false,
        }
    }

    /// Normalized `(1/2π ∫ |f|^p dθ)^{1/p}` by the trapezoid rule on the padded grid.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s = self.samples_on(self.circle.padded_len());
        lp_mean(&s, p)
    }

    /// Exact `L²` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples_on(self.circle.padded_len())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `(mean |v|^p)^{1/p}` over equispaced samples.
pub(crate) fn lp_mean(values: &[C64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|v| v.norm().powf(p)).sum();
    (sum / values.len() as f64).powf(1.0 / p)
}
