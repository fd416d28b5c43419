//! Restarted GMRES on real vectors with a matrix-free operator.

/// Outcome of a GMRES run.
#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖/‖b‖`, recomputed from scratch.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` to relative residual `tol`, starting from `x0`.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<Vec<f64>>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let residual = |x: &[f64]| -> Vec<f64> {
        let ax = apply(x);
        b.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let restart = restart.max(1);
    let mut iterations = 0;
    let mut r = residual(&x);
    let mut rel = norm(&r) / bnorm;
    while rel > tol && iterations < max_iter {
        let beta = norm(&r);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0;
        while k < restart && iterations < max_iter {
            let mut v = apply(&basis[k]);
            let mut col = vec![0.0; k + 2];
            // Modified Gram–Schmidt with one reorthogonalization pass.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let hij = dot(&v, q);
                    col[i] += hij;
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= hij * b);
                }
            }
            let hn = norm(&v);
            col[k + 1] = hn;
            for i in 0..k {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let d = col[k].hypot(col[k + 1]);
            let (c, s) = if d == 0.0 {
                (1.0, 0.0)
            } else {
                (col[k] / d, col[k + 1] / d)
            };
            cs.push(c);
            sn.push(s);
            col[k] = d;
            col[k + 1] = 0.0;
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(col);
            iterations += 1;
            k += 1;
            if g[k].abs() / bnorm <= tol || hn == 0.0 {
                break;
            }
            basis.push(v.iter().map(|a| a / hn).collect());
        }
        // Back substitution on the k×k triangular system.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (j, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[j][i] * yj;
            }
            y[i] = s / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            x.iter_mut().zip(q).for_each(|(a, b)| *a += yi * b);
        }
        r = residual(&x);
        let new_rel = norm(&r) / bnorm;
        let stalled = new_rel >= rel;
        rel = new_rel;
        if stalled {
            break;
        }
    }
    GmresOutcome {
        converged: rel <= tol,
        x,
        iterations,
        relative_residual: rel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..n * n)
            .map(|i| if i / n == i % n { 2.0 } else { 0.0 } + 0.3 * rng.gen_range(-1.0..1.0) / (n as f64).sqrt())
            .collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mv = |x: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect() };
        let b = mv(&x_true);
        let out = gmres(mv, &b, None, 1e-12, 10, 500);
        assert!(out.converged, "{}", out.relative_residual);
        let err = out
            .x
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn zero_rhs() {
        let out = gmres(|x| x.to_vec(), &[0.0; 5], None, 1e-10, 5, 10);
        assert!(out.converged && out.x.iter().all(|&v| v == 0.0));
    }
}
