//! Transport of problems between the disk and a simply connected image domain `Ω = ψ(D)`.
//!
//! A problem on `Ω` with dilatation `ν_Ω` is pulled back to the disk with `ν = ν_Ω∘ψ`;
//! a disk solution is reported at the image points `ψ(z)`, so no inverse map is needed
//! except in the residual diagnostic, which builds a Cartesian stencil in `Ω`.

use crate::coeff::{nu_to_sigma_value, Coefficient, NuSample};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{BoundarySpectrum, CircleGrid, DiskField, PolarGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type C64 = Complex64;
type MapFn = dyn Fn(C64) -> C64 + Send + Sync;

/// Radii and angles of the interior sample used to bound `|ψ'|` from below.
const SAMPLE_RADII: usize = 32;
const SAMPLE_ANGLES: usize = 256;
/// Vertices of the polygonal image of the circle in the crossing check.
const BOUNDARY_VERTICES: usize = 512;
/// `|∂̄ψ| / (1 + |∂ψ|)` above this rejects an expression as non-holomorphic.
const HOLOMORPHY_TOL: f64 = 1e-8;

/// Serializable description of a map, tagged by `kind`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    #[default]
    Identity,
    /// `az + b`.
    Affine { a: C64, b: C64 },
    /// `z + εz²`, injective for `|ε| < 1/2`.
    Quadratic { eps: f64 },
    /// Holomorphic expression in `z`.
    Expression { psi: String },
    /// `base∘m` with the disk automorphism `m(z) = e^{iθ}(z − a)/(1 − āz)`.
    Automorphism { base: Box<MapSpec>, a: C64, rotation: f64 },
}

/// Injective holomorphic map of the closed disk with a nonvanishing derivative.
///
/// Only the sampled invariants are checked; smoothness of the boundary curve
/// beyond that is the caller's responsibility.
#[derive(Clone)]
pub struct ConformalMap {
    spec: MapSpec,
    psi: Arc<MapFn>,
    dpsi: Arc<MapFn>,
    min_abs_dpsi: f64,
}

impl fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalMap")
            .field("spec", &self.spec)
            .field("min_abs_dpsi", &self.min_abs_dpsi)
            .finish()
    }
}

fn closures(spec: &MapSpec) -> Result<(Arc<MapFn>, Arc<MapFn>)> {
    Ok(match spec {
        MapSpec::Identity => (Arc::new(|z| z), Arc::new(|_| C64::new(1.0, 0.0))),
        MapSpec::Affine { a, b } => {
            if a.norm() == 0.0 {
                return Err(Error::InvalidMap("affine map needs a ≠ 0".into()));
            }
            let (a, b) = (*a, *b);
            (Arc::new(move |z| a * z + b), Arc::new(move |_| a))
        }
        MapSpec::Quadratic { eps } => {
            if !(eps.abs() < 0.5) {
                return Err(Error::InvalidMap(format!("quadratic map needs |ε| < 1/2, got {eps}")));
            }
            let e = *eps;
            (Arc::new(move |z| z + e * z * z), Arc::new(move |z| 1.0 + 2.0 * e * z))
        }
        MapSpec::Expression { psi } => {
            let expr = Expr::parse(psi).map_err(|e| Error::InvalidMap(e.to_string()))?;
            let d = expr.clone();
            (Arc::new(move |z| expr.eval(z)), Arc::new(move |z| d.eval_dual(z).d()))
        }
        MapSpec::Automorphism { base, a, rotation } => {
            if !(a.norm() < 1.0) {
                return Err(Error::InvalidMap(format!(
                    "automorphism needs |a| < 1, got {}",
                    a.norm()
                )));
            }
            let (psi, dpsi) = closures(base)?;
            let (a, rot) = (*a, C64::from_polar(1.0, *rotation));
            let m = move |z: C64| rot * (z - a) / (1.0 - a.conj() * z);
            let dm = move |z: C64| rot * (1.0 - a.norm_sqr()) / (1.0 - a.conj() * z).powi(2);
            (Arc::new(move |z| psi(m(z))), Arc::new(move |z| dpsi(m(z)) * dm(z)))
        }
    })
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let orient = |a: C64, b: C64, c: C64| ((b - a).conj() * (c - a)).im;
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl ConformalMap {
    pub fn new(spec: MapSpec) -> Result<Self> {
        let (psi, dpsi) = closures(&spec)?;
        let mut min_abs_dpsi = f64::INFINITY;
        for j in 0..=SAMPLE_RADII {
            let r = j as f64 / SAMPLE_RADII as f64;
            for k in 0..SAMPLE_ANGLES {
                let z = C64::from_polar(r, 2.0 * PI * k as f64 / SAMPLE_ANGLES as f64);
                let d = dpsi(z);
                if !d.norm().is_finite() {
                    return Err(Error::InvalidMap(format!("derivative not finite at {z}")));
                }
                min_abs_dpsi = min_abs_dpsi.min(d.norm());
            }
        }
        if !(min_abs_dpsi > 0.0) {
            return Err(Error::InvalidMap("derivative vanishes on the closed disk".into()));
        }
        if let MapSpec::Expression { psi: src } = &spec {
            let expr = Expr::parse(src).map_err(|e| Error::InvalidMap(e.to_string()))?;
            for z in [C64::new(0.3, 0.2), C64::new(-0.5, 0.4), C64::new(0.1, -0.7)] {
                let d = expr.eval_dual(z);
                if d.d_bar().norm() > HOLOMORPHY_TOL * (1.0 + d.d().norm()) {
                    return Err(Error::InvalidMap(format!("expression {src} is not holomorphic")));
                }
            }
        }
        let map = Self {
            spec,
            psi,
            dpsi,
            min_abs_dpsi,
        };
        if let Some((i, j)) = map.boundary_crossing() {
            return Err(Error::InvalidMap(format!(
                "boundary image crosses itself between edges {i} and {j}"
            )));
        }
        Ok(map)
    }

    pub fn identity() -> Self {
        Self::new(MapSpec::Identity).expect("identity is a valid map")
    }

    pub fn affine(a: C64, b: C64) -> Result<Self> {
        Self::new(MapSpec::Affine { a, b })
    }

    pub fn quadratic(eps: f64) -> Result<Self> {
        Self::new(MapSpec::Quadratic { eps })
    }

    pub fn expression(psi: &str) -> Result<Self> {
        Self::new(MapSpec::Expression { psi: psi.to_owned() })
    }

    /// `ψ∘m` with `m(z) = e^{iθ}(z − a)/(1 − āz)`; onto the same domain.
    pub fn compose_automorphism(&self, a: C64, rotation: f64) -> Result<Self> {
        Self::new(MapSpec::Automorphism {
            base: Box::new(self.spec.clone()),
            a,
            rotation,
        })
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn psi(&self, z: C64) -> C64 {
        (self.psi)(z)
    }

    pub fn dpsi(&self, z: C64) -> C64 {
        (self.dpsi)(z)
    }

    pub fn min_abs_dpsi(&self) -> f64 {
        self.min_abs_dpsi
    }

    /// First pair of non-adjacent edges of the polygonal image of the circle that cross.
    fn boundary_crossing(&self) -> Option<(usize, usize)> {
        let n = BOUNDARY_VERTICES;
        let pts: Vec<C64> = (0..n)
            .map(|k| self.psi(C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)))
            .collect();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `z` with `ψ(z) = w`, by Newton from `guess`.
    pub fn invert(&self, w: C64, guess: C64) -> Result<C64> {
        let mut z = guess;
        for _ in 0..50 {
            let step = (self.psi(z) - w) / self.dpsi(z);
            z -= step;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                return Ok(z);
            }
        }
        let miss = (self.psi(z) - w).norm();
        if miss <= 1e-13 * (1.0 + w.norm()) {
            Ok(z)
        } else {
            Err(Error::InvalidMap(format!(
                "no preimage found for {w} (miss {miss:.3e})"
            )))
        }
    }
}

/// Pulls a problem on `ψ(D)` back to the disk: `ν∘ψ` with `∂̄(ν∘ψ) = (∂̄ν∘ψ)·conj(ψ')`,
/// and the boundary data `φ∘ψ` on the circle.
pub fn pullback_problem(
    map: &ConformalMap,
    grid: &Arc<PolarGrid>,
    nu_on_omega: impl Fn(C64) -> NuSample + Send + Sync + 'static,
    boundary_data_on_omega: impl Fn(C64) -> f64,
) -> Result<(Coefficient, BoundarySpectrum)> {
    let (psi, dpsi) = (map.psi.clone(), map.dpsi.clone());
    let coef = Coefficient::from_fn(
        grid,
        move |z| {
            let s = nu_on_omega(psi(z));
            NuSample {
                nu: s.nu,
                dbar_nu: s.dbar_nu * dpsi(z).conj(),
            }
        },
        None,
    )?;
    let phi = BoundarySpectrum::from_real_fn(grid.circle(), |t| {
        boundary_data_on_omega(map.psi(C64::from_polar(1.0, t)))
    });
    Ok((coef, phi))
}

/// A disk sample reported at its image point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub z: C64,
    pub w: C64,
    pub value: C64,
}

/// Values of a disk field on the grid nodes (and on the circle when the field
/// carries exact boundary values), paired with `ψ(z)`.
pub fn pushforward_solution(map: &ConformalMap, field: &DiskField) -> Vec<ImagePoint> {
    let grid = field.grid();
    let circle: CircleGrid = grid.circle();
    let nt = circle.n_theta();
    let mut radii: Vec<f64> = grid.radial().nodes().to_vec();
    let mut values = field.synthesize();
    if let Some(edge) = field.edge_spectrum() {
        radii.push(1.0);
        values.extend(edge.samples());
    }
    radii
        .iter()
        .enumerate()
        .flat_map(|(j, &r)| (0..nt).map(move |k| (j, k, C64::from_polar(r, circle.theta(k)))))
        .map(|(j, k, z)| ImagePoint {
            z,
            w: map.psi(z),
            value: values[j * nt + k],
        })
        .collect()
}

/// Relative residual of `div(σ_Ω∇U) = 0` at `ψ(z₀)`, `U = u∘ψ^{−1}`, from fourth-order
/// central differences of step `h` on a Cartesian stencil in `Ω`.
///
/// `σ_Ω` and `∇σ_Ω` come from `nu_on_omega`; the residual `σΔU + ∇σ·∇U` is divided
/// by `σ(|U_xx| + |U_yy|) + |∇σ||∇U| + σ|∇U|`.
pub fn image_pde_residual(
    map: &ConformalMap,
    u: &DiskField,
    nu_on_omega: &dyn Fn(C64) -> NuSample,
    z0: C64,
    h: f64,
) -> Result<f64> {
    let w0 = map.psi(z0);
    let value = |dw: C64| -> Result<f64> {
        let z = map.invert(w0 + dw, z0)?;
        if z.norm() >= 1.0 {
            return Err(Error::InvalidMap(format!(
                "stencil point {} leaves the domain",
                w0 + dw
            )));
        }
        Ok(u.eval(z).re)
    };
    let c0 = value(C64::new(0.0, 0.0))?;
    let mut first = [0.0; 2];
    let mut second = [0.0; 2];
    for (axis, dir) in [C64::new(h, 0.0), C64::new(0.0, h)].into_iter().enumerate() {
        let p1 = value(dir)?;
        let m1 = value(-dir)?;
        let p2 = value(2.0 * dir)?;
        let m2 = value(-2.0 * dir)?;
        first[axis] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        second[axis] = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * c0) / (12.0 * h * h);
    }
    let s = nu_on_omega(w0);
    let sigma = nu_to_sigma_value(s.nu);
    // ∂_x ν = 2 Re ∂̄ν, ∂_y ν = 2 Im ∂̄ν for real ν; dσ/dν = −2/(1+ν)².
    let dsig = -2.0 / (1.0 + s.nu).powi(2);
    let grad_sigma = [dsig * 2.0 * s.dbar_nu.re, dsig * 2.0 * s.dbar_nu.im];
    let residual = sigma * (second[0] + second[1]) + grad_sigma[0] * first[0] + grad_sigma[1] * first[1];
    let grad_u = first[0].hypot(first[1]);
    let scale =
        sigma * (second[0].abs() + second[1].abs()) + grad_sigma[0].hypot(grad_sigma[1]) * grad_u + sigma * grad_u;
    Ok(residual.abs() / scale.max(f64::MIN_POSITIVE))
}

/// Largest `|u₂(z) − u₁(m(z))|` over `points`, relative to `max |u₁|` there: the
/// same physical point `ψ₁(m(z)) = ψ₂(z)` seen through the two parametrizations.
pub fn map_independence_gap(u_base: &DiskField, u_composed: &DiskField, a: C64, rotation: f64, points: &[C64]) -> f64 {
    let rot = C64::from_polar(1.0, rotation);
    let m = |z: C64| rot * (z - a) / (1.0 - a.conj() * z);
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &z in points {
        let v1 = u_base.eval(m(z));
        gap = gap.max((u_composed.eval(z) - v1).norm());
        scale = scale.max(v1.norm());
    }
    gap / scale.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{dirichlet_u, SolveConfig};

    fn grid() -> Arc<PolarGrid> {
        PolarGrid::new(128, 4, 8).unwrap()
    }

    /// `σ = 1 + |w|²/4` on the image domain.
    fn nu_omega(w: C64) -> NuSample {
        let sigma = 1.0 + 0.25 * w.norm_sqr();
        // ∂̄σ = w/4; dν/dσ = −2/(1+σ)².
        NuSample {
            nu: (1.0 - sigma) / (1.0 + sigma),
            dbar_nu: -2.0 / (1.0 + sigma).powi(2) * 0.25 * w,
        }
    }

    fn data(w: C64) -> f64 {
        w.re + 0.5 * w.im * w.im
    }

    #[test]
    fn map_validation() {
        assert!(ConformalMap::quadratic(0.5).is_err());
        assert!(ConformalMap::affine(C64::new(0.0, 0.0), C64::new(1.0, 0.0)).is_err());
        assert!(ConformalMap::identity()
            .compose_automorphism(C64::new(1.0, 0.0), 0.0)
            .is_err());
        // z + z²: derivative vanishes at −1/2.
        assert!(ConformalMap::expression("z + z*z").is_err());
        assert!(ConformalMap::expression("z*z*z + 0.01").is_err());
        // Locally injective but the boundary image winds past itself.
        assert!(matches!(ConformalMap::expression("exp(4*z)"), Err(Error::InvalidMap(m)) if m.contains("crosses")));
        assert!(ConformalMap::expression("x").is_err());
        let e = ConformalMap::expression("z + 0.2*z*z").unwrap();
        let q = ConformalMap::quadratic(0.2).unwrap();
        let z = C64::new(0.3, -0.4);
        assert!((e.psi(z) - q.psi(z)).norm() < 1e-15);
        assert!((e.dpsi(z) - q.dpsi(z)).norm() < 1e-14);
        assert!((q.min_abs_dpsi() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn spec_round_trip() {
        let spec = MapSpec::Automorphism {
            base: Box::new(MapSpec::Quadratic { eps: 0.3 }),
            a: C64::new(0.2, -0.1),
            rotation: 0.7,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<MapSpec>(&text).unwrap(), spec);
        let id: MapSpec = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(id, MapSpec::Identity);
    }

    #[test]
    fn automorphism_preserves_the_image() {
        let q = ConformalMap::quadratic(0.3).unwrap();
        let c = q.compose_automorphism(C64::new(0.3, 0.2), 1.1).unwrap();
        let z = C64::new(0.1, 0.5);
        let w = c.psi(z);
        let pre = q.invert(w, z).unwrap();
        assert!(pre.norm() < 1.0);
        // Derivative by the chain rule against a difference quotient.
        let h = 1e-6;
        let fd = (c.psi(z + h) - c.psi(z - h)) / (2.0 * h);
        assert!((fd - c.dpsi(z)).norm() < 1e-8);
    }

    #[test]
    fn identity_and_affine_pullback() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let (coef, phi) = pullback_problem(&ConformalMap::identity(), &g, nu_omega, data).unwrap();
        let direct = Coefficient::from_fn(&g, nu_omega, None).unwrap();
        assert_eq!(coef.nu().sub(direct.nu()).max_abs(), 0.0);
        assert_eq!(coef.dbar_nu().sub(direct.dbar_nu()).max_abs(), 0.0);
        assert_eq!(
            phi.sub(&BoundarySpectrum::from_real_fn(g.circle(), |t| data(C64::from_polar(
                1.0, t
            ))))
            .max_abs(),
            0.0
        );

        let aff = ConformalMap::affine(C64::new(1.5, 0.5), C64::new(-2.0, 1.0)).unwrap();
        let constant = |_| NuSample {
            nu: 0.3,
            dbar_nu: C64::new(0.0, 0.0),
        };
        let (coef, _) = pullback_problem(&aff, &g, constant, data).unwrap();
        assert!(coef.nu().sub(&DiskField::constant(&g, C64::new(0.3, 0.0))).max_abs() < 1e-15);
        assert_eq!(coef.dbar_nu().max_abs(), 0.0);
    }

    #[test]
    fn pushforward_examples() {
        let g = PolarGrid::new(32, 2, 8).unwrap();
        let f = g.sample_fn(|z| z * z);
        let cloud = pushforward_solution(&ConformalMap::identity(), &f);
        assert_eq!(cloud.len(), (g.n_r() + 1) * g.n_theta());
        assert!(cloud.iter().all(|p| p.w == p.z && (p.value - p.z * p.z).norm() < 1e-13));
        let b = C64::new(3.0, -1.0);
        let cloud = pushforward_solution(&ConformalMap::affine(C64::new(1.0, 0.0), b).unwrap(), &f);
        assert!(cloud
            .iter()
            .all(|p| (p.w - p.z - b).norm() < 1e-15 && (p.value - p.z * p.z).norm() < 1e-13));
    }

    #[test]
    fn quadratic_transport_solves_the_image_problem() {
        let g = grid();
        let cfg = SolveConfig::default();
        let map = ConformalMap::quadratic(0.3).unwrap();
        let (coef, phi) = pullback_problem(&map, &g, nu_omega, data).unwrap();
        let (u, _) = dirichlet_u(&phi, &coef, &cfg).unwrap();
        for z in [
            C64::new(0.0, 0.0),
            C64::new(0.4, 0.1),
            C64::new(-0.3, 0.5),
            C64::new(0.1, -0.6),
        ] {
            let res = image_pde_residual(&map, &u, &nu_omega, z, 1e-2).unwrap();
            assert!(res < 1e-5, "residual {res:.3e} at {z}");
        }
    }

    #[test]
    fn transported_solution_is_map_independent() {
        let g = grid();
        let cfg = SolveConfig::default();
        let base = ConformalMap::quadratic(0.3).unwrap();
        let (a, rot) = (C64::new(0.25, -0.15), 0.6);
        let composed = base.compose_automorphism(a, rot).unwrap();
        let solve = |m: &ConformalMap| {
            let (coef, phi) = pullback_problem(m, &g, nu_omega, data).unwrap();
            dirichlet_u(&phi, &coef, &cfg).unwrap().0
        };
        let points: Vec<C64> = (0..12)
            .map(|k| C64::from_polar(0.2 + 0.05 * k as f64, 0.9 * k as f64))
            .collect();
        let gap = map_independence_gap(&solve(&base), &solve(&composed), a, rot, &points);
        assert!(gap < 1e-6, "{gap:.3e}");
    }
}
