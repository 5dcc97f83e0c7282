//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when `|∇f|_∞ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Stop when the relative decrease of `f` over one iteration is below this.
    pub rel_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            max_iter: 500,
            grad_tol: 1e-10,
            rel_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `f`; the closure writes the gradient into its second argument and
/// returns the value. Non-finite values are treated as +∞ by the line search.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() {
        return LbfgsResult { x, f: fx, iterations: 0, converged: false };
    }
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut d = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for it in 0..opts.max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= opts.grad_tol {
            return LbfgsResult { x, f: fx, iterations: it, converged: true };
        }
        // two-loop recursion
        d.copy_from_slice(&g);
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let gn = dot(&g, &g).sqrt();
            d.iter_mut().for_each(|v| *v /= gn.max(1.0));
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = -gi;
            }
            slope = -dot(&g, &g);
        }

        let Some((step, fnew)) = wolfe_search(&mut f, &x, fx, slope, &d, &mut xn, &mut gn) else {
            if hist.is_empty() {
                return LbfgsResult { x, f: fx, iterations: it, converged: false };
            }
            hist.clear();
            continue;
        };
        let s: Vec<f64> = d.iter().map(|v| v * step).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let decrease = fx - fnew;
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        let fold = fx;
        fx = fnew;
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        if decrease <= opts.rel_tol * fold.abs().max(1e-300) {
            return LbfgsResult { x, f: fx, iterations: it + 1, converged: true };
        }
    }
    LbfgsResult { x, f: fx, iterations: opts.max_iter, converged: false }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

fn wolfe_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    xn: &mut [f64],
    gn: &mut [f64],
) -> Option<(f64, f64)>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut eval = |a: f64, xn: &mut [f64], gn: &mut [f64]| -> (f64, f64) {
        for ((xi, x0), di) in xn.iter_mut().zip(x).zip(d) {
            *xi = x0 + a * di;
        }
        let v = f(xn, gn);
        if v.is_finite() {
            (v, dot(gn, d))
        } else {
            (f64::INFINITY, f64::NAN)
        }
    };
    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut s_prev = slope0;
    let mut a = 1.0;
    for i in 0..30 {
        let (fa, sa) = eval(a, xn, gn);
        if !fa.is_finite() {
            a = 0.5 * (a_prev + a);
            if a - a_prev < 1e-20 {
                return None;
            }
            continue;
        }
        if fa > f0 + C1 * a * slope0 || (i > 0 && fa >= f_prev) {
            return zoom(&mut eval, f0, slope0, (a_prev, f_prev, s_prev), (a, fa, sa), xn, gn);
        }
        if sa.abs() <= -C2 * slope0 {
            return Some((a, fa));
        }
        if sa >= 0.0 {
            return zoom(&mut eval, f0, slope0, (a, fa, sa), (a_prev, f_prev, s_prev), xn, gn);
        }
        a_prev = a;
        f_prev = fa;
        s_prev = sa;
        a *= 2.0;
    }
    None
}

fn zoom<E>(
    eval: &mut E,
    f0: f64,
    slope0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    xn: &mut [f64],
    gn: &mut [f64],
) -> Option<(f64, f64)>
where
    E: FnMut(f64, &mut [f64], &mut [f64]) -> (f64, f64),
{
    for _ in 0..40 {
        // cubic interpolation when both slopes are known, bisection otherwise
        let mut a = 0.5 * (lo.0 + hi.0);
        if lo.2.is_finite() && hi.2.is_finite() && hi.1.is_finite() {
            let d1 = lo.2 + hi.2 - 3.0 * (lo.1 - hi.1) / (lo.0 - hi.0);
            let disc = d1 * d1 - lo.2 * hi.2;
            if disc >= 0.0 {
                let d2 = disc.sqrt() * (hi.0 - lo.0).signum();
                let c = hi.0 - (hi.0 - lo.0) * (hi.2 + d2 - d1) / (hi.2 - lo.2 + 2.0 * d2);
                let (l, h) = if lo.0 < hi.0 { (lo.0, hi.0) } else { (hi.0, lo.0) };
                let margin = 0.1 * (h - l);
                if c.is_finite() && c > l + margin && c < h - margin {
                    a = c;
                }
            }
        }
        let (fa, sa) = eval(a, xn, gn);
        if !fa.is_finite() || fa > f0 + C1 * a * slope0 || fa >= lo.1 {
            hi = (a, fa, sa);
        } else {
            if sa.abs() <= -C2 * slope0 {
                return Some((a, fa));
            }
            if sa * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, fa, sa);
        }
        if (hi.0 - lo.0).abs() < 1e-16 * lo.0.abs().max(1e-16) {
            break;
        }
    }
    if lo.0 > 0.0 && lo.1 < f0 {
        let (fa, _) = eval(lo.0, xn, gn);
        return Some((lo.0, fa));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            &[-1.2, 1.0],
            &LbfgsOptions { max_iter: 1000, ..Default::default() },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn quadratic_exact() {
        let r = minimize(
            |x, g| {
                let mut v = 0.0;
                for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                    let c = (i + 1) as f64;
                    *gi = 2.0 * c * (xi - 1.0);
                    v += c * (xi - 1.0).powi(2);
                }
                v
            },
            &[0.0; 8],
            &LbfgsOptions::default(),
        );
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-8));
    }
}
