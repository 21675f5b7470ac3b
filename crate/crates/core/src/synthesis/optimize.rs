//! Derivative-free simplex search and a finite-difference BFGS polish.
//!
//! Both minimizers are deterministic: given the same objective and start
//! point they produce the same iterate sequence.

/// Result of a minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub iterations: usize,
}

struct Counted<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Nelder–Mead with dimension-adaptive coefficients (Gao & Han).
///
/// Stops after `max_evals` evaluations or when the spread of simplex values
/// drops below `ftol`.
pub fn nelder_mead<F>(f: &F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), obj.call(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = obj.call(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    while obj.evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= ftol {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let worst_x = simplex[n].0.clone();
        let reflected = toward(alpha, &worst_x);
        let fr = obj.call(&reflected);
        if fr < simplex[0].1 {
            let expanded = toward(alpha * beta, &worst_x);
            let fe = obj.call(&expanded);
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst {
            let x = toward(alpha * gamma, &worst_x);
            let v = obj.call(&x);
            (x, v)
        } else {
            let x = toward(-gamma, &worst_x);
            let v = obj.call(&x);
            (x, v)
        };
        if fc < worst.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best_x
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + delta * (v - b))
                .collect();
            let v = obj.call(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        evals: obj.evals,
        iterations,
    }
}

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

const FD_STEP: f64 = 1e-6;

/// Quasi-Newton (BFGS) minimization with finite-difference gradients and an
/// Armijo backtracking line search.
pub fn bfgs<F>(f: &F, x0: &[f64], max_iter: usize, tol: f64) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let mut x = x0.to_vec();
    let mut fx = obj.call(&x);
    let mut g = fd_gradient(f, &x, FD_STEP);
    obj.evals += 2 * n;
    let mut h_inv = identity(n);
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < max_iter {
        if g.iter().all(|gi| gi.abs() < tol) {
            break;
        }
        iterations += 1;
        let mut dir = mat_vec(&h_inv, &g, -1.0);
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            h_inv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = obj.call(&trial);
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if h_inv == identity(n) {
                break;
            }
            h_inv = identity(n);
            continue;
        };

        let g_new = fd_gradient(f, &x_new, FD_STEP);
        obj.evals += 2 * n;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            bfgs_update(&mut h_inv, &s, &y, sy);
        }

        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement.abs() <= tol * (1.0 + fx.abs()) {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Minimum {
        x,
        value: fx,
        evals: obj.evals,
        iterations,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| scale * dot(&m[i * n..(i + 1) * n], v))
        .collect()
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, 1.0);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let m = nelder_mead(&f, &[0.0, 0.0], 0.5, 2000, 1e-14);
        assert!((m.x[0] - 1.0).abs() < 1e-5);
        assert!((m.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let m = bfgs(&rosenbrock, &[-1.2, 1.0, -0.5, 0.3], 2000, 1e-10);
        for xi in &m.x {
            assert!((xi - 1.0).abs() < 1e-4, "{:?}", m.x);
        }
    }

    #[test]
    fn fd_gradient_matches_analytic() {
        let f = |x: &[f64]| x[0].sin() * x[1].exp();
        let g = fd_gradient(&f, &[0.3, -0.2], 1e-6);
        assert!((g[0] - 0.3f64.cos() * (-0.2f64).exp()).abs() < 1e-8);
        assert!((g[1] - 0.3f64.sin() * (-0.2f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn minimizers_are_deterministic() {
        let a = nelder_mead(&rosenbrock, &[0.1, 0.2, 0.3], 0.3, 500, 0.0);
        let b = nelder_mead(&rosenbrock, &[0.1, 0.2, 0.3], 0.3, 500, 0.0);
        assert_eq!(a, b);
        let a = bfgs(&rosenbrock, &[0.1, 0.2, 0.3], 50, 0.0);
        let b = bfgs(&rosenbrock, &[0.1, 0.2, 0.3], 50, 0.0);
        assert_eq!(a, b);
    }
}
