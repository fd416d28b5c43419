use crate::grid::{gauss_legendre, PolarGrid};
use rayon::prelude::*;

/// Gauss points per full-panel integral: exact for `ρ^k · ℓ(ρ)` up to degree 143.
const INNER_POINTS: usize = 72;
/// Gauss points per graded subinterval of the outer integrals.
const OUTER_POINTS: usize = 24;
/// Outer kernels below this size are dropped.
const OUTER_CUTOFF: f64 = 1e-22;

/// Per-mode radial integration tables for the areal Cauchy transform.
///
/// For `k ≥ 1`, `inner[k]` maps nodal values of an input profile to
/// `2∫₀^r g(ρ)(ρ/r)^k dρ`; for `k ≥ 0`, `outer[k]` maps them to
/// `−2∫_r^1 g(ρ)(r/ρ)^k dρ`. Targets are the radial nodes followed by `r = 1`.
/// Entries are exact integrals of the panel Lagrange interpolant.
pub struct OperatorWorkspace {
    n_r: usize,
    max_mode: usize,
    inner: Vec<Vec<f64>>,
    outer: Vec<Vec<f64>>,
}

struct RuleView<'a> {
    nodes: &'a [f64],
    panels: usize,
    per_panel: usize,
    grid: &'a PolarGrid,
}

impl RuleView<'_> {
    fn target(&self, t: usize) -> f64 {
        if t == self.nodes.len() {
            1.0
        } else {
            self.nodes[t]
        }
    }
}

impl OperatorWorkspace {
    pub fn build(grid: &PolarGrid) -> Self {
        let rule = grid.radial();
        let view = RuleView {
            nodes: rule.nodes(),
            panels: rule.panels(),
            per_panel: rule.per_panel(),
            grid,
        };
        let m = grid.max_mode();
        let inner = (1..=m).into_par_iter().map(|k| inner_table(&view, k)).collect();
        let outer = (0..m).into_par_iter().map(|k| outer_table(&view, k)).collect();
        Self {
            n_r: rule.len(),
            max_mode: m,
            inner,
            outer,
        }
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    /// Row-major `(n_r + 1) × n_r` table for `2∫₀^r g (ρ/r)^k dρ`, `1 ≤ k ≤ M`.
    pub fn inner(&self, k: usize) -> &[f64] {
        &self.inner[k - 1]
    }

    /// Row-major `(n_r + 1) × n_r` table for `−2∫_r^1 g (r/ρ)^k dρ`, `0 ≤ k < M`.
    pub fn outer(&self, k: usize) -> &[f64] {
        &self.outer[k]
    }

    /// Whether two workspaces hold bit-identical tables.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        let same = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits()))
        };
        self.n_r == other.n_r && same(&self.inner, &other.inner) && same(&self.outer, &other.outer)
    }

    /// Applies a table to nodal values, producing `n_r + 1` target values.
    pub(crate) fn apply<T>(table: &[f64], src: &[T], out: &mut [T])
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let n = src.len();
        for (row, o) in table.chunks(n).zip(out.iter_mut()) {
            let mut acc = T::default();
            for (a, s) in row.iter().zip(src) {
                acc = acc + *s * *a;
            }
            *o = acc;
        }
    }
}

fn inner_table(view: &RuleView<'_>, k: usize) -> Vec<f64> {
    let rule = view.grid.radial();
    let nr = view.nodes.len();
    let pp = view.per_panel;
    let (gx, gw) = gauss_legendre(INNER_POINTS);
    let mut table = vec![0.0; (nr + 1) * nr];
    let mut basis = vec![0.0; pp];
    for t in 0..=nr {
        let r = view.target(t);
        let row = &mut table[t * nr..(t + 1) * nr];
        for q in 0..view.panels {
            let (a, b) = rule.panel_bounds(q);
            if a >= r {
                break;
            }
            let hi = b.min(r);
            let half = 0.5 * (hi - a);
            for (x, w) in gx.iter().zip(&gw) {
                let rho = a + half * (x + 1.0);
                let kern = 2.0 * half * w * (rho / r).powi(k as i32);
                rule.lagrange_basis(q, rho, &mut basis);
                for (l, bl) in basis.iter().enumerate() {
                    row[q * pp + l] += kern * bl;
                }
            }
        }
    }
    table
}

fn outer_table(view: &RuleView<'_>, k: usize) -> Vec<f64> {
    let rule = view.grid.radial();
    let nr = view.nodes.len();
    let pp = view.per_panel;
    let (gx, gw) = gauss_legendre(OUTER_POINTS);
    let mut table = vec![0.0; (nr + 1) * nr];
    let mut basis = vec![0.0; pp];
    let kf = k as f64;
    for t in 0..nr {
        let r = view.target(t);
        let row = &mut table[t * nr..(t + 1) * nr];
        for q in rule.panel_of(r)..view.panels {
            let (a, b) = rule.panel_bounds(q);
            let mut x = a.max(r);
            while x < b {
                if k > 0 && (r / x).powi(k as i32) < OUTER_CUTOFF {
                    break;
                }
                // Subintervals span at most ~8 e-foldings of (r/ρ)^k.
                let h = (8.0 * x / (kf + 8.0)).min(b - x);
                let half = 0.5 * h;
                for (xi, w) in gx.iter().zip(&gw) {
                    let rho = x + half * (xi + 1.0);
                    let kern = -2.0 * half * w * (r / rho).powi(k as i32);
                    rule.lagrange_basis(q, rho, &mut basis);
                    for (l, bl) in basis.iter().enumerate() {
                        row[q * pp + l] += kern * bl;
                    }
                }
                x += h;
            }
        }
    }
    table
}
