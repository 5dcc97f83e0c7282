//! Fixed-step RK4 for `ẋ = A(x) u` with piecewise-constant `u`, and its exact
//! discrete adjoint.

use crate::symfield::compiled::CompiledFrame;

pub(crate) struct Scratch {
    n: usize,
    m: usize,
    k: [Vec<f64>; 4],
    y: [Vec<f64>; 4],
    a: Vec<f64>,
    bar: [Vec<f64>; 4],
    cols: Vec<f64>,
    jac: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        let v = || vec![0.0; n];
        Scratch {
            n,
            m,
            k: [v(), v(), v(), v()],
            y: [v(), v(), v(), v()],
            a: v(),
            bar: [v(), v(), v(), v()],
            cols: vec![0.0; n * m],
            jac: vec![0.0; n * n],
        }
    }
}

/// One RK4 step in place.
pub(crate) fn step(frame: &CompiledFrame, x: &mut [f64], u: &[f64], h: f64, ws: &mut Scratch) {
    let n = ws.n;
    ws.y[0].copy_from_slice(x);
    frame.combine(&ws.y[0], u, &mut ws.k[0]);
    for s in 1..4 {
        let c = if s == 3 { h } else { 0.5 * h };
        for j in 0..n {
            ws.y[s][j] = x[j] + c * ws.k[s - 1][j];
        }
        let (ys, ks) = (&ws.y[s], &mut ws.k[s]);
        frame.combine(ys, u, ks);
    }
    for j in 0..n {
        x[j] += h / 6.0 * (ws.k[0][j] + 2.0 * ws.k[1][j] + 2.0 * ws.k[2][j] + ws.k[3][j]);
    }
}

pub(crate) fn escaped(x: &[f64], bound: f64) -> bool {
    x.iter().any(|v| !(v.abs() <= bound))
}

/// Integrate over segments with `substeps` equal RK4 steps each, storing the
/// state at the start of every step plus the final state in `states`.
/// Returns `Err(time)` if the trajectory leaves the box.
#[allow(clippy::too_many_arguments)]
pub(crate) fn forward(
    frame: &CompiledFrame,
    x0: &[f64],
    u: &[f64],
    dts: &[f64],
    substeps: usize,
    bound: f64,
    states: &mut Vec<f64>,
    ws: &mut Scratch,
) -> Result<(), f64> {
    let (n, m) = (ws.n, ws.m);
    states.clear();
    states.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut t = 0.0;
    for (k, &dt) in dts.iter().enumerate() {
        let uk = &u[k * m..(k + 1) * m];
        let h = dt / substeps as f64;
        for _ in 0..substeps {
            step(frame, &mut x, uk, h, ws);
            t += h;
            if escaped(&x, bound) {
                return Err(t);
            }
            states.extend_from_slice(&x);
        }
    }
    debug_assert_eq!(states.len(), n * (dts.len() * substeps + 1));
    Ok(())
}

/// Backpropagate `lam` (gradient with respect to the final state) through the
/// steps recorded by [`forward`]. Adds `∂/∂u` into `grad_u`; on return `lam`
/// holds the gradient with respect to the initial state.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward(
    frame: &CompiledFrame,
    u: &[f64],
    dts: &[f64],
    substeps: usize,
    states: &[f64],
    lam: &mut [f64],
    grad_u: &mut [f64],
    ws: &mut Scratch,
) {
    let (n, m) = (ws.n, ws.m);
    let mut idx = dts.len() * substeps;
    for k in (0..dts.len()).rev() {
        let uk = &u[k * m..(k + 1) * m];
        let h = dts[k] / substeps as f64;
        for _ in 0..substeps {
            idx -= 1;
            let x = &states[idx * n..(idx + 1) * n];
            // recompute stage points
            ws.y[0].copy_from_slice(x);
            frame.combine(&ws.y[0], uk, &mut ws.k[0]);
            for s in 1..4 {
                let c = if s == 3 { h } else { 0.5 * h };
                for j in 0..n {
                    ws.y[s][j] = x[j] + c * ws.k[s - 1][j];
                }
                let (ys, ks) = (&ws.y[s], &mut ws.k[s]);
                frame.combine(ys, uk, ks);
            }
            // stage adjoints, last stage first
            let weights = [h / 6.0, h / 3.0, h / 3.0, h / 6.0];
            let feed = [0.5 * h, 0.5 * h, h];
            for s in (0..4).rev() {
                for j in 0..n {
                    ws.a[j] = weights[s] * lam[j];
                }
                if s < 3 {
                    for j in 0..n {
                        ws.a[j] += feed[s] * ws.bar[s + 1][j];
                    }
                }
                frame.combine_jacobian(&ws.y[s], uk, &mut ws.jac);
                for kk in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += ws.jac[j * n + kk] * ws.a[j];
                    }
                    ws.bar[s][kk] = acc;
                }
                frame.eval(&ws.y[s], &mut ws.cols);
                for i in 0..m {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += ws.cols[i * n + j] * ws.a[j];
                    }
                    grad_u[k * m + i] += acc;
                }
            }
            for j in 0..n {
                lam[j] += ws.bar[0][j] + ws.bar[1][j] + ws.bar[2][j] + ws.bar[3][j];
            }
        }
    }
}
