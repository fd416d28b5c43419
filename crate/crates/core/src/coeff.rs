//! The dilatation `ν`, the conductivity `σ = (1−ν)/(1+ν)`, the coefficient
//! `α = −∂̄ν/(1−ν²)` and the similarity transform between solutions of
//! `∂̄f = ν·conj(∂f)` and of `∂̄w = α·w̄`.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{BoundarySpectrum, DiskField, PolarGrid};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C64 = Complex64;

/// `ν` and `∂̄ν` at a point (`∂ν = conj(∂̄ν)` since `ν` is real).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuSample {
    pub nu: f64,
    pub dbar_nu: C64,
}

type NuFn = dyn Fn(C64) -> NuSample + Send + Sync;

#[derive(Clone)]
enum Source {
    Closed(Arc<NuFn>),
    Sampled,
}

/// A real dilatation on the disk together with its Wirtinger derivatives.
#[derive(Clone)]
pub struct Coefficient {
    grid: Arc<PolarGrid>,
    source: Source,
    nu: DiskField,
    dbar_nu: DiskField,
    kappa: f64,
    lipschitz_bound: f64,
    warnings: Vec<String>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("kappa", &self.kappa)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("closed_form", &matches!(self.source, Source::Closed(_)))
            .finish()
    }
}

/// `ν` for a given conductivity value.
pub fn sigma_to_nu(sigma: f64) -> f64 {
    (1.0 - sigma) / (1.0 + sigma)
}

/// `σ` for a given dilatation value.
pub fn nu_to_sigma_value(nu: f64) -> f64 {
    (1.0 - nu) / (1.0 + nu)
}

impl Coefficient {
    /// Builds from a closed form; `kappa` defaults to the sampled sup of `|ν|`.
    pub fn from_fn(
        grid: &Arc<PolarGrid>,
        f: impl Fn(C64) -> NuSample + Send + Sync + 'static,
        kappa: Option<f64>,
    ) -> Result<Self> {
        let f: Arc<NuFn> = Arc::new(f);
        let g = f.clone();
        let nu = grid.sample_fn(move |z| C64::new(g(z).nu, 0.0));
        let g = f.clone();
        let dbar_nu = grid.sample_fn(move |z| g(z).dbar_nu);
        Self::assemble(grid, Source::Closed(f), nu, dbar_nu, kappa, Vec::new())
    }

    pub fn zero(grid: &Arc<PolarGrid>) -> Self {
        Self::constant(grid, 0.0).expect("zero dilatation is admissible")
    }

    pub fn constant(grid: &Arc<PolarGrid>, nu: f64) -> Result<Self> {
        Self::from_fn(
            grid,
            move |_| NuSample {
                nu,
                dbar_nu: C64::new(0.0, 0.0),
            },
            None,
        )
    }

    /// Constant conductivity `σ₀`.
    pub fn constant_sigma(grid: &Arc<PolarGrid>, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidCoefficient(format!("sigma = {sigma} must be positive")));
        }
        Self::constant(grid, sigma_to_nu(sigma))
    }

    /// Radial conductivity `σ(r) = 1 + a·r²`.
    pub fn radial_quadratic(grid: &Arc<PolarGrid>, a: f64) -> Result<Self> {
        if a <= -1.0 {
            return Err(Error::InvalidCoefficient(format!(
                "1 + a r^2 must stay positive on the disk (a = {a})"
            )));
        }
        Self::from_fn(
            grid,
            move |z| {
                let s = 1.0 + a * z.norm_sqr();
                // ∂̄σ = a·z and dν/dσ = −2/(1+σ)².
                NuSample {
                    nu: sigma_to_nu(s),
                    dbar_nu: -2.0 * a * z / ((1.0 + s) * (1.0 + s)),
                }
            },
            None,
        )
    }

    /// `ν` given by an expression in `x, y, r, theta, z`; derivatives are exact.
    pub fn from_expression(grid: &Arc<PolarGrid>, expr: &Expr, kappa: Option<f64>) -> Result<Self> {
        let probe = expr.eval(C64::new(0.3, 0.2));
        if probe.im.abs() > 1e-12 * (1.0 + probe.re.abs()) {
            return Err(Error::InvalidCoefficient(format!(
                "expression {expr} is not real-valued"
            )));
        }
        let e = expr.clone();
        Self::from_fn(
            grid,
            move |z| {
                let d = e.eval_dual(z);
                NuSample {
                    nu: d.v.re,
                    dbar_nu: 0.5 * C64::new(d.dx.re, d.dy.re),
                }
            },
            kappa,
        )
    }

    /// `ν` known only on the grid; `∂̄ν` is obtained by spectral differentiation.
    pub fn from_samples(nu: DiskField, kappa: Option<f64>) -> Result<Self> {
        let grid = nu.grid().clone();
        let nu = nu.real_part();
        let dbar_nu = nu.d_bar();
        let warnings = vec!["dilatation given only on the grid: derivatives from spectral differentiation".to_string()];
        Self::assemble(&grid, Source::Sampled, nu, dbar_nu, kappa, warnings)
    }

    fn assemble(
        grid: &Arc<PolarGrid>,
        source: Source,
        nu: DiskField,
        dbar_nu: DiskField,
        kappa: Option<f64>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let sup = nu.max_abs();
        if !sup.is_finite() {
            return Err(Error::InvalidCoefficient("dilatation is not finite".into()));
        }
        let kappa = kappa.unwrap_or(sup);
        if kappa >= 1.0 || sup > kappa * (1.0 + 1e-12) {
            return Err(Error::InvalidCoefficient(format!(
                "need max |nu| ({sup:.6}) <= kappa ({kappa:.6}) < 1"
            )));
        }
        let lipschitz_bound = 2.0 * dbar_nu.max_abs();
        Ok(Self {
            grid: grid.clone(),
            source,
            nu,
            dbar_nu,
            kappa,
            lipschitz_bound,
            warnings,
        })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.source, Source::Closed(_))
    }

    pub fn nu(&self) -> &DiskField {
        &self.nu
    }

    pub fn dbar_nu(&self) -> &DiskField {
        &self.dbar_nu
    }

    pub fn d_nu(&self) -> DiskField {
        self.dbar_nu.conj()
    }

    /// `ν` and `∂̄ν` at `z`: exact for closed forms, interpolated otherwise.
    pub fn eval(&self, z: C64) -> NuSample {
        match &self.source {
            Source::Closed(f) => f(z),
            Source::Sampled => NuSample {
                nu: self.nu.eval(z).re,
                dbar_nu: self.dbar_nu.eval(z),
            },
        }
    }

    /// `−ν`, which swaps `σ` and `1/σ`.
    pub fn negated(&self) -> Self {
        let source = match &self.source {
            Source::Closed(f) => {
                let f = f.clone();
                let g: Arc<NuFn> = Arc::new(move |z| {
                    let s = f(z);
                    NuSample {
                        nu: -s.nu,
                        dbar_nu: -s.dbar_nu,
                    }
                });
                Source::Closed(g)
            }
            Source::Sampled => Source::Sampled,
        };
        Self {
            grid: self.grid.clone(),
            source,
            nu: self.nu.scale(C64::new(-1.0, 0.0)),
            dbar_nu: self.dbar_nu.scale(C64::new(-1.0, 0.0)),
            kappa: self.kappa,
            lipschitz_bound: self.lipschitz_bound,
            warnings: self.warnings.clone(),
        }
    }

    /// `ν` on the unit circle.
    pub fn nu_on_boundary(&self) -> BoundarySpectrum {
        let circle = self.grid.circle();
        match &self.source {
            Source::Closed(f) => BoundarySpectrum::from_real_fn(circle, |t| f(C64::from_polar(1.0, t)).nu),
            Source::Sampled => self
                .nu
                .edge_spectrum()
                .expect("sampled dilatation keeps its edge")
                .real_part(),
        }
    }

    /// `σ` on the unit circle.
    pub fn sigma_on_boundary(&self) -> BoundarySpectrum {
        self.boundary_map(nu_to_sigma_value)
    }

    /// `g(ν)` on the unit circle, evaluated pointwise.
    pub fn boundary_map(&self, g: impl Fn(f64) -> f64) -> BoundarySpectrum {
        let nu = self.nu_on_boundary();
        let circle = nu.circle();
        BoundarySpectrum::pointwise(circle, &[&nu], |_, v| C64::new(g(v[0].re), 0.0))
            .into_real(1e-9)
            .expect("real map of a real function")
    }

    fn field_map(&self, g: impl Fn(f64) -> f64 + Sync) -> DiskField {
        match &self.source {
            Source::Closed(f) => self.grid.sample_fn(|z| C64::new(g(f(z).nu), 0.0)),
            Source::Sampled => DiskField::pointwise(&self.grid, &[&self.nu], |_, v| C64::new(g(v[0].re), 0.0)),
        }
    }
}

/// `σ` and its square roots on the disk.
#[derive(Clone, Debug)]
pub struct SigmaFields {
    pub sigma: DiskField,
    pub sqrt_sigma: DiskField,
    pub inv_sqrt_sigma: DiskField,
}

/// `σ = (1−ν)/(1+ν)` and `σ^{±1/2}`.
pub fn nu_to_sigma(coef: &Coefficient) -> SigmaFields {
    SigmaFields {
        sigma: coef.field_map(nu_to_sigma_value),
        sqrt_sigma: coef.field_map(|v| nu_to_sigma_value(v).sqrt()),
        inv_sqrt_sigma: coef.field_map(|v| nu_to_sigma_value(v).sqrt().recip()),
    }
}

/// The coefficient `α` of `∂̄w = α·w̄`.
#[derive(Clone, Debug)]
pub struct AlphaField {
    field: DiskField,
    padded: Vec<C64>,
    sup: f64,
    source: Option<Coefficient>,
}

impl AlphaField {
    /// An arbitrary bounded `α`, not tied to a dilatation.
    pub fn from_field(field: DiskField) -> Self {
        let field = if field.has_edge() {
            field
        } else {
            let edge = field.extrapolate_edge(f64::INFINITY).expect("finite extrapolation");
            let mut f = field;
            f.set_edge(Some(edge));
            f
        };
        let padded = field.to_padded();
        let sup = padded.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self {
            field,
            padded,
            sup,
            source: None,
        }
    }

    pub fn zero(grid: &Arc<PolarGrid>) -> Self {
        let mut f = DiskField::zeros(grid);
        f.set_edge(Some(vec![C64::new(0.0, 0.0); grid.n_modes()]));
        Self::from_field(f)
    }

    pub fn field(&self) -> &DiskField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        self.field.grid()
    }

    /// Samples on the padded grid, unit circle last.
    pub fn padded(&self) -> &[C64] {
        &self.padded
    }

    /// `‖α‖_∞` over the padded sample points.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn is_zero(&self) -> bool {
        self.sup == 0.0
    }

    pub fn coefficient(&self) -> Option<&Coefficient> {
        self.source.as_ref()
    }
}

/// `α = −∂̄ν/(1−ν²)`.
pub fn alpha_from_nu(coef: &Coefficient) -> AlphaField {
    let field = match &coef.source {
        Source::Closed(f) => coef.grid.sample_fn(|z| {
            let s = f(z);
            -s.dbar_nu / (1.0 - s.nu * s.nu)
        }),
        Source::Sampled => DiskField::pointwise(&coef.grid, &[&coef.nu, &coef.dbar_nu], |_, v| {
            -v[1] / (1.0 - v[0].re * v[0].re)
        }),
    };
    let mut a = AlphaField::from_field(field);
    a.source = Some(coef.clone());
    a
}

/// `α₁ = ∂ν/(1−ν²)`, the coefficient of the equation satisfied by `(1−ν²)^{1/2}∂f`.
pub fn alpha1_from_nu(coef: &Coefficient) -> DiskField {
    alpha_from_nu(coef).field().conj().scale(C64::new(-1.0, 0.0))
}

/// `w = (f − ν f̄)/√(1−ν²)`.
pub fn similarity_forward(f: &DiskField, coef: &Coefficient) -> DiskField {
    DiskField::pointwise(coef.grid(), &[f, coef.nu()], |_, v| {
        let nu = v[1].re;
        (v[0] - nu * v[0].conj()) / (1.0 - nu * nu).sqrt()
    })
}

/// `f = (w + ν w̄)/√(1−ν²)`.
pub fn similarity_inverse(w: &DiskField, coef: &Coefficient) -> DiskField {
    DiskField::pointwise(coef.grid(), &[w, coef.nu()], |_, v| {
        let nu = v[1].re;
        (v[0] + nu * v[0].conj()) / (1.0 - nu * nu).sqrt()
    })
}

/// Second form of the forward map, `w = σ^{1/2}u + iσ^{−1/2}v` for `f = u + iv`.
pub fn similarity_forward_sigma(f: &DiskField, coef: &Coefficient) -> DiskField {
    DiskField::pointwise(coef.grid(), &[f, coef.nu()], |_, v| {
        let s = nu_to_sigma_value(v[1].re);
        C64::new(s.sqrt() * v[0].re, v[0].im / s.sqrt())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(32, 2, 8).unwrap()
    }

    fn max_diff(a: &DiskField, b: &DiskField) -> f64 {
        a.sub(b).max_abs()
    }

    #[test]
    fn sigma_examples() {
        let g = grid();
        let s = nu_to_sigma(&Coefficient::zero(&g));
        assert!(max_diff(&s.sigma, &DiskField::constant(&g, C64::new(1.0, 0.0))) < 1e-15);
        let s = nu_to_sigma(&Coefficient::constant(&g, 1.0 / 3.0).unwrap());
        assert!(max_diff(&s.sigma, &DiskField::constant(&g, C64::new(0.5, 0.0))) < 1e-15);
        for s0 in [0.2, 1.0, 3.7] {
            assert!((nu_to_sigma_value(sigma_to_nu(s0)) - s0).abs() < 1e-14);
        }
        assert!(Coefficient::constant(&g, 1.0).is_err());
        assert!(Coefficient::constant(&g, 0.5).unwrap().kappa() == 0.5);
    }

    #[test]
    fn alpha_examples() {
        let g = grid();
        assert!(alpha_from_nu(&Coefficient::constant(&g, 0.2).unwrap()).is_zero());
        let kappa = 0.4;
        let c = Coefficient::from_expression(&g, &Expr::parse("0.4*x").unwrap(), None).unwrap();
        let a = alpha_from_nu(&c);
        let expect = g.sample_fn(|z| C64::new(-(kappa / 2.0) / (1.0 - (kappa * z.re).powi(2)), 0.0));
        assert!(max_diff(a.field(), &expect) < 1e-13);
        // Spectral differentiation of sampled ν agrees with the closed form.
        let sampled = Coefficient::from_samples(c.nu().clone().without_edge(), None).unwrap();
        assert!(!sampled.warnings().is_empty());
        let d = sampled.dbar_nu().sub(c.dbar_nu()).without_edge();
        assert!(d.max_abs() < 1e-10);
    }

    #[test]
    fn alpha_is_dbar_log_sqrt_sigma() {
        let g = PolarGrid::new(64, 4, 8).unwrap();
        let c = Coefficient::radial_quadratic(&g, 0.25).unwrap();
        let a = alpha_from_nu(&c);
        // α = ∂̄σ/(2σ) = (a z)/(2σ) for σ = 1 + a r².
        let expect = g.sample_fn(|z| 0.25 * z / (2.0 * (1.0 + 0.25 * z.norm_sqr())));
        assert!(max_diff(a.field(), &expect) < 1e-14);
    }

    #[test]
    fn similarity_examples() {
        let g = grid();
        let c = Coefficient::constant(&g, 1.0 / 3.0).unwrap();
        let one = DiskField::constant(&g, C64::new(1.0, 0.0));
        let w = similarity_forward(&one, &c);
        assert!(max_diff(&w, &DiskField::constant(&g, C64::new(0.5f64.sqrt(), 0.0))) < 1e-15);
        assert!(max_diff(&similarity_inverse(&w, &c), &one) < 1e-15);

        let c = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let f = g.sample_fn(|z| C64::new(0.3, -0.7) * z + z.conj() * z * 0.2 + 1.0);
        let w = similarity_forward(&f, &c);
        assert!(max_diff(&similarity_inverse(&w, &c), &f) < 1e-13);
        assert!(max_diff(&w, &similarity_forward_sigma(&f, &c)) < 1e-13);
        let z0 = Coefficient::zero(&g);
        assert!(max_diff(&similarity_forward(&f, &z0), &f) < 1e-15);
    }

    #[test]
    fn negation_swaps_sigma() {
        let g = grid();
        let c = Coefficient::radial_quadratic(&g, 0.5).unwrap();
        let s = nu_to_sigma(&c).sigma;
        let si = nu_to_sigma(&c.negated()).sigma;
        let prod = DiskField::pointwise(&g, &[&s, &si], |_, v| v[0] * v[1]);
        assert!(max_diff(&prod, &DiskField::constant(&g, C64::new(1.0, 0.0))) < 1e-14);
    }
}
