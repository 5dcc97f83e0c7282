//! Triply-warped products `dr² + f² ds_m² + g² ds_k² + h² ds_1²` and the
//! cone-Grushin spaces arising as their asymptotic cones.

mod cone;
mod oracle;

pub use cone::{
    cone_grushin_distance, cone_grushin_distance_full, dilation_isometry_check, hausdorff_dimension_estimate,
    horizontal_distribution_check, singular_axis_scaling, AxisScaling, ConeDistance, ConeGrushinSpace, ConeOptions,
    DilationRow, DilationReport, HausdorffFit, HorizontalReport,
};
pub use oracle::{curvature_oracle, warped_product_metric, OracleOptions};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Value, first and second derivative.
pub type Jet = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpingTriple {
    pub m: u32,
    pub k: u32,
    pub alpha: f64,
    pub c: f64,
}

impl WarpingTriple {
    pub fn new(m: u32, k: u32, alpha: f64, c: f64) -> Result<Self> {
        if m < 2 || k < 2 {
            return Err(Error::Argument("sphere dimensions must be at least 2".into()));
        }
        if !(alpha > 0.0) || !(c > 0.0 && c < 1.0) {
            return Err(Error::Argument(format!("need α > 0 and c ∈ (0,1), got α={alpha}, c={c}")));
        }
        Ok(WarpingTriple { m, k, alpha, c })
    }

    /// `f = r (1+r²)^{-1/4}`.
    pub fn f(&self, r: f64) -> Jet {
        let q = 1.0 + r * r;
        [
            r * q.powf(-0.25),
            (1.0 + 0.5 * r * r) * q.powf(-1.25),
            -0.25 * r * (r * r + 6.0) * q.powf(-2.25),
        ]
    }

    /// `g = (π/2) c r / arctan r`.
    pub fn g(&self, r: f64) -> Jet {
        let kk = FRAC_PI_2 * self.c;
        let a = r.atan();
        let a1 = 1.0 / (1.0 + r * r);
        let a2 = -2.0 * r * a1 * a1;
        // a − r a' vanishes to third order at 0; the series avoids cancellation
        let num = if r < 1e-3 {
            let r2 = r * r;
            r * r2 * (2.0 / 3.0 - r2 * (4.0 / 5.0 - r2 * 6.0 / 7.0))
        } else {
            a - r * a1
        };
        [kk * r / a, kk * num / (a * a), kk * (-r * a2 * a - 2.0 * a1 * num) / (a * a * a)]
    }

    /// `h = (1+r²)^{-α/2}`.
    pub fn h(&self, r: f64) -> Jet {
        let al = self.alpha;
        let q = 1.0 + r * r;
        [
            q.powf(-0.5 * al),
            -al * r * q.powf(-0.5 * al - 1.0),
            al * ((al + 1.0) * r * r - 1.0) * q.powf(-0.5 * al - 2.0),
        ]
    }
}

/// `(Ric(∂r,∂r), Ric(X,X), Ric(Y,Y), Ric(Z,Z))` for unit `X, Y, Z` tangent to
/// `S^m, S^k, S^1`.
pub fn ricci_components(w: &WarpingTriple, r: f64) -> Result<[f64; 4]> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Argument(format!("radius must be positive, got {r}")));
    }
    let (f, g, h) = (w.f(r), w.g(r), w.h(r));
    let (m, k) = (w.m as f64, w.k as f64);
    let ff = f[2] / f[0];
    let gg = g[2] / g[0];
    let hh = h[2] / h[0];
    let fg = f[1] * g[1] / (f[0] * g[0]);
    let fh = f[1] * h[1] / (f[0] * h[0]);
    let gh = g[1] * h[1] / (g[0] * h[0]);
    Ok([
        -m * ff - k * gg - hh,
        -ff + (m - 1.0) * (1.0 - f[1] * f[1]) / (f[0] * f[0]) - k * fg - fh,
        -gg - m * fg + (k - 1.0) * (1.0 - g[1] * g[1]) / (g[0] * g[0]) - gh,
        -hh - m * fh - k * gh,
    ])
}

/// `r ∈ [10⁻³, 10³]`, 200 log-spaced points.
pub fn gate_grid() -> Vec<f64> {
    (0..200).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0)).collect()
}

const GATE_MARGIN: f64 = 1e-8;
const GATE_MAX_ITER: usize = 60;
const GATE_REFINE: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct GateCertificate {
    pub m: u32,
    pub c: f64,
    /// Grid minima of the four components.
    pub minima: [f64; 4],
    pub iterations: usize,
}

fn grid_minima(w: &WarpingTriple, grid: &[f64]) -> Result<[f64; 4]> {
    let mut mins = [f64::INFINITY; 4];
    for &r in grid {
        let ric = ricci_components(w, r)?;
        for j in 0..4 {
            mins[j] = mins[j].min(ric[j]);
        }
    }
    Ok(mins)
}

/// Smallest integer `m > max{k + 4α(α+1), k+1, 2(α+1)}`.
pub fn gate_dimension(k: u32, alpha: f64) -> u32 {
    let k = k as f64;
    let bound = (k + 4.0 * alpha * (alpha + 1.0)).max(k + 1.0).max(2.0 * (alpha + 1.0));
    (bound.floor() + 1.0) as u32
}

/// `m` from the dimension bound, then `c` halved from 1/2 until all four
/// components exceed the margin on [`gate_grid`], then refined by bisection
/// towards the largest passing value.
pub fn parameter_gate(k: u32, alpha: f64) -> Result<GateCertificate> {
    if k < 2 || !(alpha > 0.0) {
        return Err(Error::Argument(format!("need k ≥ 2 and α > 0, got k={k}, α={alpha}")));
    }
    let m = gate_dimension(k, alpha);
    let grid = gate_grid();
    let passes = |c: f64| -> Result<Option<[f64; 4]>> {
        let mins = grid_minima(&WarpingTriple::new(m, k, alpha, c)?, &grid)?;
        Ok(mins.iter().all(|v| *v >= GATE_MARGIN).then_some(mins))
    };
    let mut c = 0.5;
    let mut iterations = 0;
    let mut found = None;
    while iterations < GATE_MAX_ITER {
        iterations += 1;
        if let Some(mins) = passes(c)? {
            found = Some(mins);
            break;
        }
        c *= 0.5;
    }
    let mut minima = found.ok_or(Error::GateFailed(iterations))?;
    if c < 0.5 {
        let (mut lo, mut hi) = (c, 2.0 * c);
        for _ in 0..GATE_REFINE.min(GATE_MAX_ITER - iterations) {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            match passes(mid)? {
                Some(mins) => {
                    lo = mid;
                    minima = mins;
                }
                None => hi = mid,
            }
        }
        c = lo;
    }
    Ok(GateCertificate { m, c, minima, iterations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpingLimitRow {
    pub lambda: f64,
    /// Sup deviations of `f_λ → 0`, `g_λ → ct`, `h_λ → t^{-α}` on the window.
    pub f_dev: f64,
    pub g_dev: f64,
    pub h_dev: f64,
}

impl WarpingLimitRow {
    pub fn max_dev(&self) -> f64 {
        self.f_dev.max(self.g_dev).max(self.h_dev)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpingLimitReport {
    pub window: (f64, f64),
    pub rows: Vec<WarpingLimitRow>,
    pub decreasing: bool,
    pub final_below: bool,
    pub passed: bool,
}

const LIMIT_SAMPLES: usize = 1000;
pub const WARPING_LIMIT_TOL: f64 = 1e-3;

/// Rescaled warping functions
/// `f_λ(t) = t (1+λ²t²)^{-1/4}`, `g_λ(t) = (π/2) c t / arctan(λt)`,
/// `h_λ(t) = λ^α (1+λ²t²)^{-α/2}` against their limits on `[a, b]`.
pub fn asymptotic_warping_limit(w: &WarpingTriple, lambdas: &[f64], window: (f64, f64)) -> Result<WarpingLimitReport> {
    let (a, b) = window;
    if !(a > 0.0 && b > a) {
        return Err(Error::Argument("window must satisfy 0 < a < b".into()));
    }
    let ts: Vec<f64> = (0..=LIMIT_SAMPLES)
        .map(|i| a + (b - a) * i as f64 / LIMIT_SAMPLES as f64)
        .collect();
    let al = w.alpha;
    let rows: Vec<WarpingLimitRow> = lambdas
        .iter()
        .map(|&l| {
            let mut row = WarpingLimitRow {
                lambda: l,
                f_dev: 0.0,
                g_dev: 0.0,
                h_dev: 0.0,
            };
            for &t in &ts {
                let q = 1.0 + l * l * t * t;
                row.f_dev = row.f_dev.max(t * q.powf(-0.25));
                row.g_dev = row.g_dev.max((FRAC_PI_2 * w.c * t / (l * t).atan() - w.c * t).abs());
                // λ^α (1+λ²t²)^{-α/2} = (λ⁻² + t²)^{-α/2}
                row.h_dev = row.h_dev.max(((l.powi(-2) + t * t).powf(-0.5 * al) - t.powf(-al)).abs());
            }
            row
        })
        .collect();
    let decreasing = rows.windows(2).all(|p| p[1].max_dev() <= p[0].max_dev());
    let final_below = rows.last().map_or(false, |r| r.max_dev() < WARPING_LIMIT_TOL);
    Ok(WarpingLimitReport {
        window,
        rows,
        decreasing,
        final_below,
        passed: decreasing && final_below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple() -> WarpingTriple {
        WarpingTriple::new(2, 2, 1.0, 0.1).unwrap()
    }

    #[test]
    fn closed_form_ratios() {
        let w = triple();
        let f = w.f(1.0);
        assert!((f[2] / f[0] + 7.0 / 16.0).abs() < 1e-15);
        let h = w.h(1e-9);
        assert!((h[2] / h[0] + 1.0).abs() < 1e-12);
        let (f, h) = (w.f(1.0), w.h(1.0));
        assert!((f[1] * h[1] / (f[0] * h[0]) + 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_values() {
        let w = triple();
        let f = w.f(1e-12);
        assert!(f[0].abs() < 1e-11 && (f[1] - 1.0).abs() < 1e-12);
        assert!((w.g(1e-8)[0] - FRAC_PI_2 * 0.1).abs() < 1e-12);
        assert!(w.h(0.5)[1] < 0.0);
        assert!(ricci_components(&w, 0.0).is_err());
    }

    #[test]
    fn g_series_branch_is_continuous() {
        let w = triple();
        let below = w.g(1e-3 * (1.0 - 1e-12));
        let above = w.g(1e-3 * (1.0 + 1e-12));
        for j in 0..3 {
            assert!((below[j] - above[j]).abs() <= 1e-9 * below[j].abs().max(1e-6), "{j}");
        }
    }

    #[test]
    fn gate_dimensions() {
        assert_eq!(gate_dimension(2, 1.0), 11);
        assert_eq!(gate_dimension(3, 2.0), 28);
        // integer bound 5 is excluded by the strict inequality
        assert_eq!(gate_dimension(2, 0.5), 6);
        assert_eq!(gate_dimension(2, 0.25), 4);
    }

    #[test]
    fn gate_k2_alpha1() {
        let cert = parameter_gate(2, 1.0).unwrap();
        assert_eq!(cert.m, 11);
        assert!(cert.c > 0.0 && cert.c < 1.0);
        assert!(cert.minima.iter().all(|v| *v > 0.0), "{cert:?}");
        let w = WarpingTriple::new(cert.m, 2, 1.0, cert.c).unwrap();
        for r in gate_grid() {
            assert!(ricci_components(&w, r).unwrap().iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn warping_limit_examples() {
        let w = triple();
        let l: f64 = 1e3;
        let g = FRAC_PI_2 * 0.1 / l.atan();
        assert!((g - 0.1).abs() <= 1e-3 * 0.1);
        assert!((1.0f64 + 1e8).powf(-0.25) <= 1e-2);
        assert!((l / (1.0f64 + l * l).sqrt() - 1.0).abs() <= 1e-5);
        let r = asymptotic_warping_limit(&w, &[10.0, 100.0, 1000.0], (0.5, 2.0)).unwrap();
        assert!(r.decreasing);
        assert!(r.rows[2].g_dev < 1e-3 && r.rows[2].h_dev < 1e-3);
    }
}
