//! Discrete curvature-dimension checks: distortion coefficients, Rényi
//! entropy, optimal couplings by linear programming, Wasserstein interpolation
//! along per-pair geodesics, and the entropy inequality with `τ_{K,N}` weights.
//!
//! Densities of all measures entering a check (endpoints and interpolants)
//! come from one Gaussian kernel estimator, so its bias is shared.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesy::{cc_distance, constant_speed, ControlCurve, DistanceOptions};
use crate::structure::SubRiemannianStructure;
use crate::warped::{cone_grushin_distance, ConeGrushinSpace, ConeOptions};

/// `s_κ(θ)`.
pub fn s_kappa(kappa: f64, theta: f64) -> f64 {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * theta).sin() / r
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        (r * theta).sinh() / r
    } else {
        theta
    }
}

/// `σ_{K,N}^{(t)}(θ)`; `+∞` when `Kθ² ≥ Nπ²`.
pub fn distortion_sigma(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    let k_theta2 = k * theta * theta;
    if k_theta2 >= n * std::f64::consts::PI.powi(2) {
        f64::INFINITY
    } else if k_theta2 == 0.0 {
        t
    } else {
        s_kappa(k / n, t * theta) / s_kappa(k / n, theta)
    }
}

/// `τ_{K,N}^{(t)}(θ) = t^{1/N} σ_{K,N−1}^{(t)}(θ)^{1−1/N}`.
pub fn distortion_tau(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    let sigma = distortion_sigma(k, n - 1.0, t, theta);
    if sigma.is_infinite() {
        return f64::INFINITY;
    }
    t.powf(1.0 / n) * sigma.powf(1.0 - 1.0 / n)
}

/// Reference measure, as a density against coordinate Lebesgue measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    Lebesgue,
    /// `x_1^p`; zero for `x_1 ≤ 0`.
    PowerX { p: f64 },
    /// `λ ·` Lebesgue.
    Scaled { lambda: f64 },
}

impl Reference {
    pub fn density(&self, x: &[f64]) -> f64 {
        match *self {
            Reference::Lebesgue => 1.0,
            Reference::PowerX { p } => {
                if x[0] > 0.0 {
                    x[0].powf(p)
                } else {
                    0.0
                }
            }
            Reference::Scaled { lambda } => lambda,
        }
    }
}

/// Floor on the per-coordinate kernel bandwidth, used when a coordinate has
/// no spread (point masses).
pub const MIN_BANDWIDTH: f64 = 1e-6;

/// Kernel estimate of `dμ/dm` at the support points of `(points, weights)`:
/// Gaussian product kernel with bandwidth `1.06 · std · n^{-1/5}` per coordinate.
pub fn kde_density(points: &[Vec<f64>], weights: &[f64], reference: Reference) -> Result<Vec<f64>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Argument("empty support".into()));
    }
    let dim = points[0].len();
    let total: f64 = weights.iter().sum();
    let factor = 1.06 * (n as f64).powf(-0.2);
    let h: Vec<f64> = (0..dim)
        .map(|c| {
            let mean = points.iter().zip(weights).map(|(p, w)| w * p[c]).sum::<f64>() / total;
            let var = points.iter().zip(weights).map(|(p, w)| w * (p[c] - mean).powi(2)).sum::<f64>() / total;
            (factor * var.sqrt()).max(MIN_BANDWIDTH)
        })
        .collect();
    let norm: f64 = h.iter().map(|hc| hc * (2.0 * std::f64::consts::PI).sqrt()).product();
    points
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let lebesgue = points
                .iter()
                .zip(weights)
                .map(|(x, w)| {
                    let e: f64 = (0..dim).map(|c| ((z[c] - x[c]) / h[c]).powi(2)).sum();
                    w * (-0.5 * e).exp()
                })
                .sum::<f64>()
                / (total * norm);
            let m = reference.density(z);
            if !(m > 0.0) {
                return Err(Error::Density(i));
            }
            Ok(lebesgue / m)
        })
        .collect()
}

/// Finitely supported probability measure with density values against its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub rho: Vec<f64>,
    pub reference: Reference,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>, rho: Vec<f64>, reference: Reference) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Argument("empty support".into()));
        }
        if weights.len() != n || rho.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: if weights.len() != n { weights.len() } else { rho.len() },
            });
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::Dimension { expected: dim, got: p.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Argument("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("weights sum to {total}, not 1")));
        }
        if let Some(i) = rho.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Density(i));
        }
        Ok(DiscreteMeasure {
            points,
            weights,
            rho,
            reference,
        })
    }

    /// Densities from [`kde_density`].
    pub fn with_kde(points: Vec<Vec<f64>>, weights: Vec<f64>, reference: Reference) -> Result<Self> {
        let rho = kde_density(&points, &weights, reference)?;
        Self::new(points, weights, rho, reference)
    }

    /// Equal weights, densities from [`kde_density`].
    pub fn uniform(points: Vec<Vec<f64>>, reference: Reference) -> Result<Self> {
        let n = points.len().max(1);
        Self::with_kde(points, vec![1.0 / n as f64; n], reference)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// CSV with header `x1..xn,weight,rho`.
    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        out.extend(["weight".into(), "rho".into()]);
        let mut s = out.join(",") + "\n";
        for ((p, w), r) in self.points.iter().zip(&self.weights).zip(&self.rho) {
            let row: Vec<String> = p.iter().chain([w, r]).map(|v| format!("{v:e}")).collect();
            s += &row.join(",");
            s.push('\n');
        }
        s
    }
}

/// `S_N(μ|m) = −Σ w_i ρ_i^{−1/N}`.
pub fn renyi_entropy(mu: &DiscreteMeasure, n: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(Error::Argument(format!("entropy parameter must exceed 1, got {n}")));
    }
    let mut s = 0.0;
    for (i, (w, r)) in mu.weights.iter().zip(&mu.rho).enumerate() {
        if !(*r > 0.0) {
            return Err(Error::Density(i));
        }
        s -= w * r.powf(-1.0 / n);
    }
    Ok(s)
}

/// Coupling between two discrete measures, row-major `n0 × n1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub n0: usize,
    pub n1: usize,
    pub coupling: Vec<f64>,
    /// `Σ π_ij c_ij`.
    pub cost: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.n1 + j]
    }

    /// Largest deviation of the row and column sums from `w0`, `w1`.
    pub fn marginal_error(&self, w0: &[f64], w1: &[f64]) -> f64 {
        let rows = (0..self.n0).map(|i| ((0..self.n1).map(|j| self.get(i, j)).sum::<f64>() - w0[i]).abs());
        let cols = (0..self.n1).map(|j| ((0..self.n0).map(|i| self.get(i, j)).sum::<f64>() - w1[j]).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Positive entries `(i, j, π_ij)` in row-major order.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n0)
            .flat_map(|i| (0..self.n1).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = self.get(i, j);
                (v > 0.0).then_some((i, j, v))
            })
            .collect()
    }
}

/// Exact optimal coupling of `w0`, `w1` for the row-major cost matrix `cost`.
pub fn optimal_plan(cost: &[f64], w0: &[f64], w1: &[f64]) -> Result<TransportPlan> {
    let (n0, n1) = (w0.len(), w1.len());
    if cost.len() != n0 * n1 {
        return Err(Error::Dimension {
            expected: n0 * n1,
            got: cost.len(),
        });
    }
    let (s0, s1): (f64, f64) = (w0.iter().sum(), w1.iter().sum());
    if (s0 - s1).abs() > 1e-12 {
        return Err(Error::Plan(format!("marginal masses differ: {s0} vs {s1}")));
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = cost.iter().map(|c| lp.add_var(*c, (0.0, f64::INFINITY))).collect();
    for i in 0..n0 {
        lp.add_constraint((0..n1).map(|j| (vars[i * n1 + j], 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, w0[i]);
    }
    // the last column constraint is implied by the others
    for j in 0..n1.saturating_sub(1) {
        lp.add_constraint((0..n0).map(|i| (vars[i * n1 + j], 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, w1[j]);
    }
    let sol = lp.solve().map_err(|e| Error::Plan(e.to_string()))?;
    // round-off entries would otherwise show up as spurious support points
    let coupling: Vec<f64> = vars
        .iter()
        .map(|v| *sol.var_value(*v))
        .map(|v| if v < 1e-13 { 0.0 } else { v })
        .collect();
    let plan = TransportPlan {
        n0,
        n1,
        cost: coupling.iter().zip(cost).map(|(p, c)| p * c).sum(),
        coupling,
    };
    let err = plan.marginal_error(w0, w1);
    if err > 1e-10 {
        return Err(Error::Plan(format!("marginal error {err:e} after solve")));
    }
    Ok(plan)
}

/// Source of distances and per-pair geodesics.
#[derive(Clone, Debug)]
pub enum Backend {
    Euclidean,
    SubRiemannian {
        structure: SubRiemannianStructure,
        options: DistanceOptions,
    },
    Cone {
        space: ConeGrushinSpace,
        options: ConeOptions,
    },
}

/// A geodesic between two support points, evaluated at constant speed.
#[derive(Clone, Debug)]
pub enum PairGeodesic {
    Segment(Vec<f64>, Vec<f64>),
    Curve(ControlCurve),
    /// Vertices with cumulative length fractions.
    Polyline(Vec<f64>, Vec<Vec<f64>>),
}

impl PairGeodesic {
    /// `e_t` of this geodesic.
    pub fn at(&self, t: f64) -> Vec<f64> {
        match self {
            PairGeodesic::Segment(p, q) => p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect(),
            PairGeodesic::Curve(c) => c.state_at(t * c.duration()),
            PairGeodesic::Polyline(frac, pts) => {
                let k = frac.partition_point(|f| *f <= t).clamp(1, frac.len() - 1) - 1;
                let h = frac[k + 1] - frac[k];
                let s = if h > 0.0 { ((t - frac[k]) / h).clamp(0.0, 1.0) } else { 0.0 };
                pts[k].iter().zip(&pts[k + 1]).map(|(a, b)| a + s * (b - a)).collect()
            }
        }
    }
}

impl Backend {
    pub fn label(&self) -> String {
        match self {
            Backend::Euclidean => "euclidean".into(),
            Backend::SubRiemannian { structure, .. } => structure.label().to_string(),
            Backend::Cone { space, .. } => format!("cone_grushin(k={},alpha={},c={})", space.k, space.alpha, space.c),
        }
    }

    /// Distance and a constant-speed geodesic from `p` to `q`.
    pub fn geodesic(&self, p: &[f64], q: &[f64]) -> Result<(f64, PairGeodesic)> {
        match self {
            Backend::Euclidean => Ok((crate::linalg::dist(p, q), PairGeodesic::Segment(p.to_vec(), q.to_vec()))),
            Backend::SubRiemannian { structure, options } => {
                let est = cc_distance(structure, p, q, options)?;
                if !est.converged {
                    return Err(Error::NonConvergence(format!("no certified geodesic from {p:?} to {q:?}")));
                }
                Ok((est.upper, PairGeodesic::Curve(constant_speed(structure, p, &est)?)))
            }
            Backend::Cone { space, options } => {
                let d = cone_grushin_distance(space, p, q, options)?;
                let (frac, pts) = space.certificate_points(p, q, &d.path);
                Ok((d.estimate, PairGeodesic::Polyline(frac, pts)))
            }
        }
    }
}

/// Discrete Wasserstein geodesic: optimal plan, pair distances and interpolants.
#[derive(Clone, Debug)]
pub struct W2Geodesic {
    pub plan: TransportPlan,
    /// Row-major pair distances `d(x_i, y_j)`.
    pub distances: Vec<f64>,
    pub times: Vec<f64>,
    pub interpolants: Vec<DiscreteMeasure>,
}

impl W2Geodesic {
    pub fn w2(&self) -> f64 {
        self.plan.cost.sqrt()
    }
}

fn check_pair(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<()> {
    if mu0.dim() != mu1.dim() {
        return Err(Error::Dimension {
            expected: mu0.dim(),
            got: mu1.dim(),
        });
    }
    if mu0.reference != mu1.reference {
        return Err(Error::Argument("measures use different reference measures".into()));
    }
    if mu0.len().max(mu1.len()) > 200 {
        return Err(Error::Argument("supports are limited to 200 points".into()));
    }
    Ok(())
}

/// Optimal plan for the squared backend distance, and `μ_t = (e_t)_# π` for each `t`.
pub fn w2_geodesic(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, backend: &Backend, times: &[f64]) -> Result<W2Geodesic> {
    check_pair(mu0, mu1)?;
    if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Argument(format!("interpolation time {t} outside [0, 1]")));
    }
    let (n0, n1) = (mu0.len(), mu1.len());
    let pairs: Vec<(f64, PairGeodesic)> = (0..n0 * n1)
        .into_par_iter()
        .map(|ij| backend.geodesic(&mu0.points[ij / n1], &mu1.points[ij % n1]))
        .collect::<Result<_>>()?;
    let distances: Vec<f64> = pairs.iter().map(|(d, _)| *d).collect();
    let cost: Vec<f64> = distances.iter().map(|d| d * d).collect();
    let plan = optimal_plan(&cost, &mu0.weights, &mu1.weights)?;
    let support = plan.support();
    let interpolants = times
        .iter()
        .map(|&t| {
            let points: Vec<Vec<f64>> = support.iter().map(|&(i, j, _)| pairs[i * n1 + j].1.at(t)).collect();
            let mass: f64 = support.iter().map(|s| s.2).sum();
            let weights = support.iter().map(|s| s.2 / mass).collect();
            DiscreteMeasure::with_kde(points, weights, mu0.reference)
        })
        .collect::<Result<_>>()?;
    Ok(W2Geodesic {
        plan,
        distances,
        times: times.to_vec(),
        interpolants,
    })
}

/// Violation threshold: a margin below `−(floor + budget)` is reported as a violation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CdTolerance {
    pub floor: f64,
    /// Discretization budget calibrated on Euclidean controls.
    pub budget: f64,
}

impl Default for CdTolerance {
    fn default() -> Self {
        CdTolerance { floor: 5e-3, budget: 0.0 }
    }
}

impl CdTolerance {
    pub fn total(&self) -> f64 {
        self.floor + self.budget
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdConfig {
    pub backend: String,
    pub reference: Reference,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub n0: usize,
    pub n1: usize,
    pub tolerance: CdTolerance,
    pub w2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdRow {
    pub t: f64,
    pub entropy: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violated,
    Consistent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdReport {
    pub config: CdConfig,
    pub per_t: Vec<CdRow>,
    pub verdict: Verdict,
    pub min_margin: f64,
    pub note: String,
}

impl CdReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Entropy inequality along the discrete Wasserstein geodesic from `mu0` to `mu1`.
///
/// `margin(t) = RHS(t) − S_N(μ_t)`, where `RHS(t) = −Σ π_ij [τ^{(1−t)}(d_ij) ρ0_i^{−1/N} + τ^{(t)}(d_ij) ρ1_j^{−1/N}]`.
pub fn cd_inequality_check(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    k: f64,
    n: f64,
    times: &[f64],
    backend: &Backend,
    tolerance: CdTolerance,
) -> Result<CdReport> {
    if !(n > 1.0) {
        return Err(Error::Argument(format!("dimension parameter must exceed 1, got {n}")));
    }
    let geo = w2_geodesic(mu0, mu1, backend, times)?;
    let support = geo.plan.support();
    let n1 = mu1.len();
    let per_t = times
        .iter()
        .zip(&geo.interpolants)
        .map(|(&t, mu_t)| {
            let rhs = -support
                .iter()
                .map(|&(i, j, w)| {
                    let d = geo.distances[i * n1 + j];
                    let a = distortion_tau(k, n, 1.0 - t, d);
                    let b = distortion_tau(k, n, t, d);
                    // τ = 0 kills its term even against a zero density factor
                    let term = |tau: f64, rho: f64| if tau == 0.0 { 0.0 } else { tau * rho.powf(-1.0 / n) };
                    w * (term(a, mu0.rho[i]) + term(b, mu1.rho[j]))
                })
                .sum::<f64>();
            let entropy = renyi_entropy(mu_t, n)?;
            Ok(CdRow {
                t,
                entropy,
                rhs,
                margin: rhs - entropy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_margin = per_t.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let verdict = if min_margin < -tolerance.total() {
        Verdict::Violated
    } else {
        Verdict::Consistent
    };
    Ok(CdReport {
        config: CdConfig {
            backend: backend.label(),
            reference: mu0.reference,
            k,
            n,
            n0: mu0.len(),
            n1: mu1.len(),
            tolerance,
            w2: geo.w2(),
        },
        per_t,
        verdict,
        min_margin,
        note: "discrete numerical evidence, not a proof in either direction".into(),
    })
}

/// `nx × ny` cell-centred grid on `[x0, x1] × [y0, y1]`.
pub fn grid_cloud(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let u = (i as f64 + 0.5) / nx as f64;
            let v = (j as f64 + 0.5) / ny as f64;
            pts.push(vec![x.0 + u * (x.1 - x.0), y.0 + v * (y.1 - y.0)]);
        }
    }
    pts
}

/// Settings shared by the Grushin scan, its Euclidean controls and the halfplane suite.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub times: Vec<f64>,
    /// Points per side of each square grid cloud.
    pub grid: usize,
    pub distance: DistanceOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            times: vec![0.25, 0.5, 0.75],
            grid: 6,
            distance: DistanceOptions {
                segments: 20,
                restarts: 2,
                ..Default::default()
            },
        }
    }
}

/// Euclidean controls at the suite's sizes: a translated block and a block
/// dilated by 2, both at `K = 0`.
pub fn euclidean_control_suite(n: f64, opts: &SuiteOptions) -> Result<Vec<CdReport>> {
    let g = opts.grid;
    let a = grid_cloud((0.0, 1.0), (0.0, 1.0), g, g);
    let translated = grid_cloud((2.0, 3.0), (0.5, 1.5), g, g);
    let dilated = grid_cloud((2.0, 4.0), (-0.5, 1.5), g, g);
    let mu0 = DiscreteMeasure::uniform(a, Reference::Lebesgue)?;
    [translated, dilated]
        .into_iter()
        .map(|b| {
            let mu1 = DiscreteMeasure::uniform(b, Reference::Lebesgue)?;
            cd_inequality_check(&mu0, &mu1, 0.0, n, &opts.times, &Backend::Euclidean, CdTolerance::default())
        })
        .collect()
}

/// Budget from the controls: how far below zero their worst margin reaches.
pub fn calibrate_budget(controls: &[CdReport]) -> f64 {
    controls.iter().map(|r| (-r.min_margin).max(0.0)).fold(0.0, f64::max)
}

/// Shape of a Grushin block pair at unit scale: `[x0, x1] × [−h, h]` and the
/// same block raised by `lift`. Scale `s` applies the Grushin dilation
/// `(x, y) ↦ (s x, s² y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockShape {
    pub x: (f64, f64),
    pub half_height: f64,
    pub lift: f64,
}

impl BlockShape {
    /// Blocks `[−w, w] × [−h, h]` symmetric about the singular line.
    pub fn straddling(w: f64, h: f64, lift: f64) -> Self {
        BlockShape {
            x: (-w, w),
            half_height: h,
            lift,
        }
    }

    /// Blocks `[0, w] × [−h, h]` with one side on the singular line.
    pub fn adjacent(w: f64, h: f64, lift: f64) -> Self {
        BlockShape {
            x: (0.0, w),
            half_height: h,
            lift,
        }
    }

    /// The two clouds at scale `s`. Grid points are cell centres, so none lies on `x = 0`.
    pub fn clouds(&self, s: f64, grid: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let x = (self.x.0 * s, self.x.1 * s);
        let (h, l) = (self.half_height * s * s, self.lift * s * s);
        (grid_cloud(x, (-h, h), grid, grid), grid_cloud(x, (l - h, l + h), grid, grid))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanEntry {
    pub scale: f64,
    pub report: CdReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrushinScan {
    pub shape: BlockShape,
    pub budget: f64,
    pub entries: Vec<ScanEntry>,
}

impl GrushinScan {
    /// The violating entry with the most negative margin, if any.
    pub fn witness(&self) -> Option<&ScanEntry> {
        self.entries
            .iter()
            .filter(|e| e.report.verdict == Verdict::Violated)
            .min_by(|a, b| a.report.min_margin.total_cmp(&b.report.min_margin))
    }
}

/// Scan of block pairs of the given shape on the Grushin plane with Lebesgue measure.
/// The budget is calibrated on [`euclidean_control_suite`] with the same `N`, grid and times.
pub fn grushin_violation_scan(
    k: f64,
    n: f64,
    scales: &[f64],
    shape: &BlockShape,
    opts: &SuiteOptions,
) -> Result<GrushinScan> {
    let budget = calibrate_budget(&euclidean_control_suite(n, opts)?);
    let backend = Backend::SubRiemannian {
        structure: crate::structure::library::grushin(),
        options: opts.distance.clone(),
    };
    let tol = CdTolerance { budget, ..Default::default() };
    let entries = scales
        .iter()
        .map(|&s| {
            let (a, b) = shape.clouds(s, opts.grid);
            let mu0 = DiscreteMeasure::uniform(a, Reference::Lebesgue)?;
            let mu1 = DiscreteMeasure::uniform(b, Reference::Lebesgue)?;
            let report = cd_inequality_check(&mu0, &mu1, k, n, &opts.times, &backend, tol)?;
            Ok(ScanEntry { scale: s, report })
        })
        .collect::<Result<_>>()?;
    Ok(GrushinScan {
        shape: *shape,
        budget,
        entries,
    })
}

/// Smallest `N` with nonnegative Bakry–Émery `N`-Ricci curvature for the
/// Grushin halfplane with `m = x^p dx dy`: `2 + (p+1)²/(p−1)`, for `p > 1`.
pub fn halfplane_dimension_threshold(p: f64) -> f64 {
    2.0 + (p + 1.0).powi(2) / (p - 1.0)
}

/// Block pairs inside `{x > 0}` for the weighted halfplane, at `K = 0`.
pub fn halfplane_suite(p: f64, n: f64, opts: &SuiteOptions) -> Result<Vec<CdReport>> {
    let backend = Backend::SubRiemannian {
        structure: crate::structure::library::grushin(),
        options: opts.distance.clone(),
    };
    let reference = Reference::PowerX { p };
    let g = opts.grid;
    let configs = [
        (((0.5, 1.0), (0.0, 0.5)), ((1.5, 2.0), (0.0, 0.5))),
        (((0.5, 1.0), (0.0, 0.5)), ((0.5, 1.0), (1.0, 1.5))),
        (((0.5, 1.0), (0.0, 0.5)), ((1.0, 2.0), (0.5, 1.5))),
    ];
    configs
        .iter()
        .map(|&((ax, ay), (bx, by))| {
            let mu0 = DiscreteMeasure::uniform(grid_cloud(ax, ay, g, g), reference)?;
            let mu1 = DiscreteMeasure::uniform(grid_cloud(bx, by, g, g), reference)?;
            cd_inequality_check(&mu0, &mu1, 0.0, n, &opts.times, &backend, CdTolerance::default())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_cases() {
        assert_eq!(distortion_sigma(0.0, 3.0, 0.3, 5.0), 0.3);
        assert_eq!(distortion_sigma(2.0, 3.0, 0.7, 0.0), 0.7);
        assert!((distortion_sigma(-2.0, 3.0, 1.0, 1.4) - 1.0).abs() < 1e-15);
        assert!(distortion_sigma(1.0, 1.0, 0.5, std::f64::consts::PI).is_infinite());
        assert!(distortion_tau(1.0, 2.0, 0.5, 4.0).is_infinite());
        assert_eq!(distortion_tau(-3.0, 4.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn entropy_examples() {
        let pts = vec![vec![0.0], vec![1.0]];
        let mu = DiscreteMeasure::new(pts.clone(), vec![0.5, 0.5], vec![1.0, 1.0], Reference::Lebesgue).unwrap();
        assert!((renyi_entropy(&mu, 3.0).unwrap() + 1.0).abs() < 1e-15);
        let mu = DiscreteMeasure::new(pts.clone(), vec![0.5, 0.5], vec![2.0, 2.0], Reference::Lebesgue).unwrap();
        assert!((renyi_entropy(&mu, 4.0).unwrap() + 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((renyi_entropy(&mu, 1e12).unwrap() + 1.0).abs() < 1e-9);
        assert!(matches!(
            DiscreteMeasure::new(pts, vec![0.5, 0.5], vec![1.0, 0.0], Reference::Lebesgue),
            Err(Error::Density(1))
        ));
    }

    #[test]
    fn plan_rejects_mass_mismatch() {
        assert!(matches!(optimal_plan(&[0.0; 4], &[0.5, 0.5], &[0.5, 0.6]), Err(Error::Plan(_))));
    }

    #[test]
    fn identical_measures_give_diagonal_plan() {
        let pts = grid_cloud((0.0, 1.0), (0.0, 1.0), 3, 3);
        let mu = DiscreteMeasure::uniform(pts, Reference::Lebesgue).unwrap();
        let geo = w2_geodesic(&mu, &mu, &Backend::Euclidean, &[0.5]).unwrap();
        for i in 0..9 {
            assert!((geo.plan.get(i, i) - 1.0 / 9.0).abs() < 1e-12);
        }
        assert_eq!(geo.plan.cost, 0.0);
        assert_eq!(geo.interpolants[0].points, mu.points);
    }

    #[test]
    fn point_masses_move_along_segments() {
        let d0 = DiscreteMeasure::uniform(vec![vec![0.0]], Reference::Lebesgue).unwrap();
        let d1 = DiscreteMeasure::uniform(vec![vec![1.0]], Reference::Lebesgue).unwrap();
        let geo = w2_geodesic(&d0, &d1, &Backend::Euclidean, &[0.5]).unwrap();
        assert_eq!(geo.interpolants[0].points, vec![vec![0.5]]);
    }

    #[test]
    fn euclidean_translation_is_flat() {
        let reports = euclidean_control_suite(10.0, &SuiteOptions::default()).unwrap();
        for r in &reports {
            assert_eq!(r.verdict, Verdict::Consistent);
            assert!(r.min_margin >= -1e-3, "{r:?}");
        }
        // a pure translation leaves the kernel estimate unchanged
        assert!(reports[0].min_margin.abs() < 1e-12);
    }
}
