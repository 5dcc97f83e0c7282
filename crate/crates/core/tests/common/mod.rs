#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srlab::symfield::{rat, PolyVectorField, Polynomial};

pub const CORPUS_SEED: u64 = 7;
pub const CORPUS_SIZE: usize = 200;

/// Random polynomial field in `dim` variables: up to four terms per
/// component, total degree ≤ 3, coefficients `p/q` with `|p| ≤ 5`, `q ≤ 4`.
pub fn random_field(rng: &mut impl Rng, dim: usize) -> PolyVectorField {
    let components = (0..dim)
        .map(|_| {
            let terms = (0..rng.gen_range(0..=4)).map(|_| {
                let mut e = vec![0u32; dim];
                for _ in 0..rng.gen_range(0..=3) {
                    e[rng.gen_range(0..dim)] += 1;
                }
                let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
                (e, c)
            });
            Polynomial::from_terms(dim, terms.collect::<Vec<_>>())
        })
        .collect();
    PolyVectorField::new(components).unwrap()
}

/// The fixed 200-field corpus in three variables.
pub fn corpus() -> Vec<PolyVectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| random_field(&mut rng, 3)).collect()
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Largest relative error between the closed-form Ricci components and the
/// finite-difference oracle on the coordinate metric at radius `r`.
pub fn ricci_oracle_error(w: &srlab::warped::WarpingTriple, r: f64) -> f64 {
    use srlab::warped::{curvature_oracle, ricci_components, warped_product_metric, OracleOptions};
    let (m, k) = (w.m as usize, w.k as usize);
    let n = m + k + 2;
    let mut p = vec![1.1; n];
    p[0] = r;
    let metric = warped_product_metric(w);
    let g = metric(&p);
    let ric = curvature_oracle(&metric, &p, &OracleOptions::default()).unwrap();
    // first angle of each factor, normalized to a unit vector
    let oracle = [0, 1, 1 + m, n - 1].map(|i| ric[(i, i)] / g[(i, i)]);
    let closed = ricci_components(w, r).unwrap();
    oracle.iter().zip(&closed).map(|(o, c)| rel_err(*o, *c)).fold(0.0, f64::max)
}

/// The fixed 50 `(r, m, k, α, c)` samples for the oracle comparison.
pub fn ricci_samples() -> Vec<(srlab::warped::WarpingTriple, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    (0..50)
        .map(|_| {
            let w = srlab::warped::WarpingTriple::new(
                rng.gen_range(2..=6),
                rng.gen_range(2..=4),
                rng.gen_range(0.25..3.0),
                rng.gen_range(0.05..0.95),
            )
            .unwrap();
            (w, 10f64.powf(rng.gen_range(-1.0..1.0)))
        })
        .collect()
}

/// Rank over Q by fraction-exact Gaussian elimination.
pub fn exact_rank(mut rows: Vec<Vec<srlab::symfield::Rational>>) -> usize {
    use num_traits::Zero;
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let p = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &p[c];
                for (x, y) in row.iter_mut().zip(&p) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Growth vector from all iterated brackets `[X_i, [X_j, ...]]`, evaluated
/// exactly at a rational point.
pub fn exact_growth(s: &srlab::structure::SubRiemannianStructure, p: &[srlab::symfield::Rational]) -> Vec<usize> {
    use srlab::symfield::lie_bracket;
    let mut level: Vec<PolyVectorField> = s.generators().to_vec();
    let mut values = Vec::new();
    let mut growth = Vec::new();
    for _ in 0..6 {
        values.extend(level.iter().map(|f| f.evaluate_exact(p).unwrap()));
        let r = exact_rank(values.clone());
        growth.push(r);
        if r == s.dim() {
            break;
        }
        level = s
            .generators()
            .iter()
            .flat_map(|x| level.iter().map(move |y| lie_bracket(x, y).unwrap()))
            .collect();
    }
    growth
}

/// Small invocations of every subcommand, as argument lists.
pub fn cli_suite() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("flag", vec!["--structure", "martinet", "--point", "0,0,0"]),
        ("distance", vec!["--points", "0,0;1,0;0,1", "--segments", "16", "--restarts", "2"]),
        ("geodesic", vec!["--structure", "heisenberg", "--from", "0,0,0", "--to", "0.5,0.2,0.3", "--restarts", "2"]),
        ("nilpotent", vec!["--pairs", "0,0:1,0", "--lambdas", "1,4", "--segments", "16", "--restarts", "2"]),
        ("blowup", vec!["--lambdas", "1,16,256"]),
        ("lift", vec![]),
        ("ricci", vec!["--samples", "20"]),
        ("gate", vec![]),
        ("cone-distance", vec!["--points", "0,0,0,0;0.5,0,0,0.5"]),
        ("dilation-check", vec!["--pairs", "2", "--lambdas", "2"]),
        ("hausdorff", vec!["--alpha", "1", "--ys", "0.25,4"]),
        ("cd-check", vec!["--suite", "euclidean-control", "--grid", "4"]),
    ]
}

/// Run the binary in `cwd` with output directory `out`.
pub fn run_cli(cwd: &std::path::Path, command: &str, args: &[&str], out: &str) -> std::process::Output {
    std::fs::create_dir_all(cwd).unwrap();
    std::process::Command::new(env!("CARGO_BIN_EXE_srlab"))
        .current_dir(cwd)
        .arg(command)
        .args(args)
        .args(["--out", out])
        .env_remove("SRLAB_OUT_DIR")
        .output()
        .expect("binary runs")
}

pub fn scratch_dir(name: &str) -> std::path::PathBuf {
    let d = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}
