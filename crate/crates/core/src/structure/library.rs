//! Shipped structures, all presented in privileged coordinates at the origin.

use super::SubRiemannianStructure;
use crate::error::{Error, Result};
use crate::symfield::{rat, rat_int, PolyVectorField};

fn d(n: usize, j: usize) -> PolyVectorField {
    PolyVectorField::coordinate(n, j)
}

fn mono(n: usize, comp: usize, exps: &[u32], num: i64, den: i64) -> PolyVectorField {
    PolyVectorField::monomial(n, comp, exps.to_vec(), rat(num, den))
}

fn sum(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField {
    a.add(&b).expect("same dimension")
}

/// `{∂x, x∂y}` on R².
pub fn grushin() -> SubRiemannianStructure {
    SubRiemannianStructure::new("grushin", vec![d(2, 0), mono(2, 1, &[1, 0], 1, 1)]).unwrap()
}

/// `{∂x, (x + x²)∂y}` on R²; its nilpotent approximation at 0 is the Grushin plane.
pub fn perturbed_grushin() -> SubRiemannianStructure {
    SubRiemannianStructure::new(
        "perturbed_grushin",
        vec![d(2, 0), sum(mono(2, 1, &[1, 0], 1, 1), mono(2, 1, &[2, 0], 1, 1))],
    )
    .unwrap()
}

/// `{∂x, ∂y + x²∂z}` on R³.
pub fn martinet() -> SubRiemannianStructure {
    SubRiemannianStructure::new("martinet", vec![d(3, 0), sum(d(3, 1), mono(3, 2, &[2, 0, 0], 1, 1))]).unwrap()
}

/// `{∂x, ∂y + x∂z}` on R³.
pub fn heisenberg() -> SubRiemannianStructure {
    SubRiemannianStructure::new("heisenberg", vec![d(3, 0), sum(d(3, 1), mono(3, 2, &[1, 0, 0], 1, 1))]).unwrap()
}

/// `{∂x − (y/2)∂z, ∂y + (x/2)∂z}` on R³.
pub fn heisenberg_symmetric() -> SubRiemannianStructure {
    SubRiemannianStructure::new(
        "heisenberg_symmetric",
        vec![
            sum(d(3, 0), mono(3, 2, &[0, 1, 0], -1, 2)),
            sum(d(3, 1), mono(3, 2, &[1, 0, 0], 1, 2)),
        ],
    )
    .unwrap()
}

/// `{∂x_1, …, ∂x_n}`.
pub fn euclidean(n: usize) -> SubRiemannianStructure {
    SubRiemannianStructure::new(format!("euclidean({n})"), (0..n).map(|j| d(n, j)).collect()).unwrap()
}

/// `{∂x_1, …, ∂x_{k+1}, r²∂y}` on R^{k+2} with `r² = Σ x_i²`.
pub fn cone_grushin_frame(k: usize) -> SubRiemannianStructure {
    let n = k + 2;
    let mut gens: Vec<PolyVectorField> = (0..=k).map(|j| d(n, j)).collect();
    let mut r2 = PolyVectorField::zero(n);
    for j in 0..=k {
        let mut e = vec![0; n];
        e[j] = 2;
        r2 = sum(r2, PolyVectorField::monomial(n, n - 1, e, rat_int(1)));
    }
    gens.push(r2);
    SubRiemannianStructure::new(format!("cone_grushin_frame({k})"), gens).unwrap()
}

/// Look up a shipped structure: `grushin`, `perturbed_grushin`, `martinet`,
/// `heisenberg`, `heisenberg_symmetric`, `euclidean(n)`, `cone_grushin_frame(k)`.
pub fn by_name(name: &str) -> Result<SubRiemannianStructure> {
    let name = name.trim();
    let arg = |prefix: &str| -> Option<Result<usize>> {
        let rest = name.strip_prefix(prefix)?;
        let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
        Some(
            inner
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Argument(format!("bad size in {name:?}"))),
        )
    };
    match name {
        "grushin" => Ok(grushin()),
        "perturbed_grushin" => Ok(perturbed_grushin()),
        "martinet" => Ok(martinet()),
        "heisenberg" => Ok(heisenberg()),
        "heisenberg_symmetric" => Ok(heisenberg_symmetric()),
        "euclidean" => Ok(euclidean(2)),
        _ => {
            if let Some(n) = arg("euclidean") {
                let n = n?;
                if n == 0 {
                    return Err(Error::Argument("euclidean(0)".into()));
                }
                return Ok(euclidean(n));
            }
            if let Some(k) = arg("cone_grushin_frame") {
                return Ok(cone_grushin_frame(k?));
            }
            Err(Error::Argument(format!("unknown structure {name:?}")))
        }
    }
}
