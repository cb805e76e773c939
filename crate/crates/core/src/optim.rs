//! Gradient ascent with Barzilai-Borwein step proposals and a backtracking
//! (Armijo) safeguard.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct AscentOptions<T> {
    pub max_iter: usize,
    /// Stop once the Euclidean gradient norm falls to this value.
    pub grad_tol: T,
    pub initial_step: T,
}

impl<T: Real> Default for AscentOptions<T> {
    fn default() -> Self {
        Self { max_iter: 10_000, grad_tol: T::lit(1e-9), initial_step: T::lit(0.1) }
    }
}

#[derive(Clone, Debug)]
pub struct Ascent<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

/// Maximizes `f`, which returns the objective and writes its gradient into
/// the second argument.
///
/// Close to a maximum the Armijo increase drops below the rounding noise of
/// the objective; there a step is also accepted when the objective stays
/// within that noise and the gradient norm shrinks.
pub fn gradient_ascent<T, F>(mut f: F, x0: Vec<T>, opts: &AscentOptions<T>) -> Ascent<T>
where
    T: Real,
    F: FnMut(&[T], &mut [T]) -> T,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![T::zero(); n];
    let mut value = f(&x, &mut g);
    let mut gn = norm(&g);
    let mut step = opts.initial_step;
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let c1 = T::lit(1e-4);
    let min_step = T::lit(1e-14);
    let max_step = T::lit(1e8);

    let mut iterations = 0;
    while iterations < opts.max_iter {
        if gn <= opts.grad_tol || n == 0 {
            return Ascent { x, value, grad_norm: gn, iterations, converged: true };
        }
        iterations += 1;
        let noise = T::lit(64.0) * T::epsilon() * value.abs().max(T::one());
        let mut alpha = step;
        let accepted = loop {
            for i in 0..n {
                x_new[i] = x[i] + alpha * g[i];
            }
            let v = f(&x_new, &mut g_new);
            if v.is_finite() {
                let sufficient = v >= value + c1 * alpha * gn * gn;
                let flat = v >= value - noise && norm(&g_new) < gn;
                if sufficient || flat {
                    break Some(v);
                }
            }
            alpha *= T::lit(0.5);
            if alpha < min_step {
                break None;
            }
        };
        let Some(v) = accepted else {
            // no acceptable step: stationary to working precision
            let converged = gn <= opts.grad_tol * T::lit(1e3);
            return Ascent { x, value, grad_norm: gn, iterations, converged };
        };
        // Barzilai-Borwein for ascent: s·s / (-s·y)
        let mut ss = T::zero();
        let mut sy = T::zero();
        for i in 0..n {
            let s = x_new[i] - x[i];
            let y = g_new[i] - g[i];
            ss += s * s;
            sy += s * y;
        }
        step = if sy < T::zero() { (ss / -sy).min(max_step).max(min_step) } else { (alpha * T::lit(2.0)).min(max_step) };
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        value = v;
        gn = norm(&g);
    }
    let converged = gn <= opts.grad_tol;
    Ascent { x, value, grad_norm: gn, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn maximizes_concave_quadratic() {
        // f = -(x-1)² - 10(y+2)²
        let res = gradient_ascent(
            |x: &[f64], g: &mut [f64]| {
                g[0] = -2.0 * (x[0] - 1.0);
                g[1] = -20.0 * (x[1] + 2.0);
                -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2)
            },
            vec![5.0, 5.0],
            &AscentOptions::default(),
        );
        assert!(res.converged);
        assert_abs_diff_eq!(res.x[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.x[1], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn maximizes_periodic_function() {
        let res = gradient_ascent(
            |x: &[f64], g: &mut [f64]| {
                g[0] = -x[0].sin();
                x[0].cos()
            },
            vec![0.7],
            &AscentOptions::default(),
        );
        assert!(res.converged);
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-15);
        assert!(res.grad_norm <= 1e-9);
    }

    #[test]
    fn reports_iteration_cap() {
        let opts = AscentOptions { max_iter: 2, ..AscentOptions::default() };
        let res = gradient_ascent(
            |x: &[f64], g: &mut [f64]| {
                g[0] = -2.0 * (x[0] - 100.0);
                -(x[0] - 100.0).powi(2)
            },
            vec![0.0],
            &AscentOptions { initial_step: 1e-6, ..opts },
        );
        assert!(!res.converged);
        assert_eq!(res.iterations, 2);
    }
}
