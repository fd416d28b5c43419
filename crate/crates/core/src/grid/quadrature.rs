use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, descending in i.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[0, 1]` for integrals `∫ g(ρ) ρ dρ`.
///
/// The interval is cut into equal panels, each carrying the same reference
/// rule. Radial profiles are interpolated panel by panel with the Lagrange
/// polynomial through the panel's nodes.
#[derive(Clone, Debug)]
pub struct RadialRule {
    panels: usize,
    per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
    diff: Vec<f64>,
}

impl RadialRule {
    pub fn composite(panels: usize, per_panel: usize) -> Result<Self> {
        if panels == 0 || per_panel < 2 {
            return Err(Error::InvalidGrid(format!(
                "radial rule needs >= 1 panel and >= 2 nodes per panel (got {panels} x {per_panel})"
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(per_panel);
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for q in 0..panels {
            let a = q as f64 * h;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                let rho = a + 0.5 * h * (x + 1.0);
                nodes.push(rho);
                weights.push(0.5 * h * w * rho);
            }
        }

        let bary: Vec<f64> = (0..per_panel)
            .map(|i| {
                let prod: f64 = (0..per_panel)
                    .filter(|&k| k != i)
                    .map(|k| ref_nodes[i] - ref_nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        let mut diff = vec![0.0; per_panel * per_panel];
        for i in 0..per_panel {
            let mut diag = 0.0;
            for j in 0..per_panel {
                if i != j {
                    let v = (bary[j] / bary[i]) / (ref_nodes[i] - ref_nodes[j]);
                    diff[i * per_panel + j] = v;
                    diag -= v;
                }
            }
            diff[i * per_panel + i] = diag;
        }

        Ok(Self {
            panels,
            per_panel,
            nodes,
            weights,
            ref_nodes,
            bary,
            diff,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn per_panel(&self) -> usize {
        self.per_panel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫₀¹ g(ρ) ρ dρ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest polynomial degree of `g` integrated exactly against `ρ dρ`.
    pub fn exact_degree(&self) -> usize {
        2 * self.per_panel - 2
    }

    pub fn panel_bounds(&self, q: usize) -> (f64, f64) {
        let h = 1.0 / self.panels as f64;
        (q as f64 * h, (q + 1) as f64 * h)
    }

    /// Panel whose closed interval contains `r` (clamped to `[0, 1]`).
    pub fn panel_of(&self, r: f64) -> usize {
        let q = (r * self.panels as f64).floor();
        (q.max(0.0) as usize).min(self.panels - 1)
    }

    /// Values at `x` of the Lagrange basis attached to panel `q`'s nodes.
    pub fn lagrange_basis(&self, q: usize, x: f64, out: &mut [f64]) {
        let (a, b) = self.panel_bounds(q);
        let t = 2.0 * (x - a) / (b - a) - 1.0;
        let mut denom = 0.0;
        for (l, (xl, bl)) in self.ref_nodes.iter().zip(&self.bary).enumerate() {
            let d = t - xl;
            if d == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[l] = 1.0;
                return;
            }
            out[l] = bl / d;
            denom += out[l];
        }
        out.iter_mut().for_each(|o| *o /= denom);
    }

    /// Piecewise-polynomial interpolation of nodal values at radius `r`.
    pub fn interpolate(&self, values: &[Complex64], r: f64) -> Complex64 {
        let q = self.panel_of(r);
        let mut basis = vec![0.0; self.per_panel];
        self.lagrange_basis(q, r, &mut basis);
        let off = q * self.per_panel;
        basis
            .iter()
            .zip(&values[off..off + self.per_panel])
            .map(|(b, v)| v * b)
            .sum()
    }

    /// Panelwise derivative of the interpolant at the nodes.
    pub fn differentiate(&self, values: &[Complex64], out: &mut [Complex64]) {
        let pp = self.per_panel;
        let scale = 2.0 * self.panels as f64;
        for q in 0..self.panels {
            let off = q * pp;
            for i in 0..pp {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..pp {
                    acc += values[off + j] * self.diff[i * pp + j];
                }
                out[off + i] = acc * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((quad - exact).abs() < 1e-14, "degree {deg}: {quad} vs {exact}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn high_order_rule_is_accurate() {
        let (x, w) = gauss_legendre(72);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(140)).sum();
        assert!((quad - 2.0 / 141.0).abs() < 1e-15);
    }

    #[test]
    fn radial_rule_monomials() {
        let rule = RadialRule::composite(8, 8).unwrap();
        for deg in 0..=rule.exact_degree() {
            let quad: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(r, w)| w * r.powi(deg as i32))
                .sum();
            let exact = 1.0 / (deg as f64 + 2.0);
            assert!((quad - exact).abs() < 1e-15, "deg {deg}");
        }
        assert!(rule.nodes().iter().all(|&r| r > 0.0 && r < 1.0));
        assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn differentiation_is_exact_on_panel_polynomials() {
        let rule = RadialRule::composite(4, 8).unwrap();
        let vals: Vec<Complex64> = rule.nodes().iter().map(|r| Complex64::new(r.powi(7), -r * r)).collect();
        let mut d = vec![Complex64::new(0.0, 0.0); vals.len()];
        rule.differentiate(&vals, &mut d);
        for (r, dv) in rule.nodes().iter().zip(&d) {
            let exact = Complex64::new(7.0 * r.powi(6), -2.0 * r);
            assert!((dv - exact).norm() < 1e-11);
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let rule = RadialRule::composite(8, 8).unwrap();
        let vals: Vec<Complex64> = rule
            .nodes()
            .iter()
            .map(|r| Complex64::new(r.powi(5) - 0.5, 0.0))
            .collect();
        for &r in &[0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0] {
            let v = rule.interpolate(&vals, r);
            assert!((v.re - (r.powi(5) - 0.5)).abs() < 1e-13, "r = {r}");
        }
    }
}
