use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srlab::cdlab::{
    distortion_sigma, distortion_tau, optimal_plan, renyi_entropy, w2_geodesic, Backend, DiscreteMeasure, Reference,
};
use srlab::geodesy::DistanceOptions;
use srlab::structure::library;

/// `sinh(x)` from its Taylor series.
fn sinh_series(x: f64) -> f64 {
    let (mut term, mut sum) = (x, x);
    for k in 1..40 {
        term *= x * x / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

/// Minimum-cost perfect assignment on a square matrix (Hungarian method with
/// potentials), returned as the total cost.
fn hungarian(cost: &[f64], n: usize) -> f64 {
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let (mut delta, mut j1) = (inf, 0);
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[(p[j] - 1) * n + (j - 1)]).sum()
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize, x: (f64, f64), reference: Reference) -> DiscreteMeasure {
    let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(x.0..x.1), rng.gen_range(-1.0..1.0)]).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasure::with_kde(points, raw.iter().map(|w| w / total).collect(), reference).unwrap()
}

#[test]
fn distortion_examples_against_series() {
    let sigma = distortion_sigma(-1.0, 1.0, 0.5, 1.0);
    let oracle = sinh_series(0.5) / sinh_series(1.0);
    assert!((sigma - oracle).abs() <= 1e-14);
    assert!((sigma - 0.443409).abs() <= 1e-6);
    let tau = distortion_tau(-1.0, 2.0, 0.5, 1.0);
    assert!((tau - (0.5 * oracle).sqrt()).abs() <= 1e-14);
    assert!((tau - 0.470).abs() <= 1e-3);
    assert_eq!(distortion_tau(-1.0, 2.0, 0.0, 1.0), 0.0);
    assert_eq!(distortion_sigma(1.0, 2.0, 0.5, 10.0), f64::INFINITY);
}

proptest! {
    #[test]
    fn tau_at_zero_curvature_is_t(n in 1.01f64..50.0, t in 0.0f64..=1.0, theta in 0.0f64..10.0) {
        prop_assert!((distortion_tau(0.0, n, t, theta) - t).abs() <= 1e-15);
        prop_assert_eq!(distortion_sigma(0.0, n, t, theta), t);
    }

    #[test]
    fn sigma_is_one_at_t_one(k in -5.0f64..5.0, n in 1.5f64..20.0, theta in 0.01f64..1.0) {
        prop_assume!(k != 0.0 && k * theta * theta < n * std::f64::consts::PI.powi(2));
        prop_assert!((distortion_sigma(k, n, 1.0, theta) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropy_scales_with_the_reference(seed in any::<u64>(), lambda in 0.1f64..10.0, n in 1.5f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_measure(&mut rng, 12, (-1.0, 1.0), Reference::Lebesgue);
        let scaled = DiscreteMeasure::with_kde(mu.points.clone(), mu.weights.clone(), Reference::Scaled { lambda }).unwrap();
        for (a, b) in scaled.rho.iter().zip(&mu.rho) {
            prop_assert!((a - b / lambda).abs() <= 1e-12 * b / lambda);
        }
        let s = renyi_entropy(&mu, n).unwrap();
        let sl = renyi_entropy(&scaled, n).unwrap();
        prop_assert!((sl - lambda.powf(1.0 / n) * s).abs() <= 1e-12 * sl.abs());
    }

    #[test]
    fn plan_marginals_are_exact(seed in any::<u64>(), n0 in 1usize..15, n1 in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = |n: usize| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let t: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / t).collect::<Vec<f64>>()
        };
        let (w0, w1) = (weights(n0), weights(n1));
        let cost: Vec<f64> = (0..n0 * n1).map(|_| rng.gen_range(0.0..4.0)).collect();
        let plan = optimal_plan(&cost, &w0, &w1).unwrap();
        prop_assert!(plan.marginal_error(&w0, &w1) <= 1e-10);
        prop_assert!(plan.support().iter().all(|s| s.2 > 0.0));
    }
}

#[test]
fn distortions_are_monotone_in_t() {
    for k in [-10.0, -1.0, -0.1, 0.0] {
        for n in [1.5, 3.0, 10.0] {
            for theta in [0.1, 0.5, 1.0, 3.0] {
                let ts: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
                let s: Vec<f64> = ts.iter().map(|&t| distortion_sigma(k, n, t, theta)).collect();
                let tau: Vec<f64> = ts.iter().map(|&t| distortion_tau(k, n, t, theta)).collect();
                assert!(s.windows(2).all(|w| w[1] >= w[0]), "σ K={k} N={n} θ={theta}");
                assert!(tau.windows(2).all(|w| w[1] >= w[0]), "τ K={k} N={n} θ={theta}");
            }
        }
    }
}

#[test]
fn entropy_examples() {
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
    let mu = DiscreteMeasure::new(pts.clone(), vec![0.5, 0.5], vec![1.0, 1.0], Reference::Lebesgue).unwrap();
    assert!((renyi_entropy(&mu, 3.0).unwrap() + 1.0).abs() <= 1e-15);
    let mu = DiscreteMeasure::new(pts, vec![0.5, 0.5], vec![2.0, 2.0], Reference::Lebesgue).unwrap();
    assert!((renyi_entropy(&mu, 3.0).unwrap() + 2f64.powf(-1.0 / 3.0)).abs() <= 1e-15);
    assert!((renyi_entropy(&mu, 1e9).unwrap() + 1.0).abs() <= 1e-8);
}

#[test]
fn lp_plan_matches_hungarian_on_grushin_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let cloud = |rng: &mut ChaCha8Rng, x: (f64, f64)| -> Vec<Vec<f64>> {
        (0..50).map(|_| vec![rng.gen_range(x.0..x.1), rng.gen_range(-0.5..0.5)]).collect()
    };
    let mu0 = DiscreteMeasure::uniform(cloud(&mut rng, (-1.0, -0.1)), Reference::Lebesgue).unwrap();
    let mu1 = DiscreteMeasure::uniform(cloud(&mut rng, (0.1, 1.0)), Reference::Lebesgue).unwrap();
    let backend = Backend::SubRiemannian {
        structure: library::grushin(),
        options: DistanceOptions {
            segments: 16,
            restarts: 1,
            ..Default::default()
        },
    };
    let geo = w2_geodesic(&mu0, &mu1, &backend, &[]).unwrap();
    let cost: Vec<f64> = geo.distances.iter().map(|d| d * d).collect();
    let assignment = hungarian(&cost, 50) / 50.0;
    assert!((geo.plan.cost - assignment).abs() <= 1e-3, "{} vs {assignment}", geo.plan.cost);
    assert!(geo.plan.marginal_error(&mu0.weights, &mu1.weights) <= 1e-10);
}

#[test]
fn euclidean_interpolants_split_the_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let mu0 = random_measure(&mut rng, 20, (-2.0, 0.0), Reference::Lebesgue);
        let mu1 = random_measure(&mut rng, 25, (0.5, 3.0), Reference::Lebesgue);
        let times = [0.25, 0.5, 0.8];
        let geo = w2_geodesic(&mu0, &mu1, &Backend::Euclidean, &times).unwrap();
        let total = geo.w2();
        for (t, mut_) in times.iter().zip(&geo.interpolants) {
            let a = w2_geodesic(&mu0, mut_, &Backend::Euclidean, &[]).unwrap().w2();
            let b = w2_geodesic(mut_, &mu1, &Backend::Euclidean, &[]).unwrap().w2();
            assert!((a + b - total).abs() <= 2e-3, "t={t}: {a} + {b} vs {total}");
            assert!((a - t * total).abs() <= 2e-3);
        }
    }
}

#[test]
fn hungarian_oracle_sanity() {
    // the anti-diagonal is the unique optimum
    let cost = [5.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 5.0];
    assert_eq!(hungarian(&cost, 3), 3.0);
}
