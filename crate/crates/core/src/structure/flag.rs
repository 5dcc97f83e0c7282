use std::collections::HashSet;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;

use super::SubRiemannianStructure;
use crate::error::{check_dim, Error, Result};
use crate::linalg::numeric_rank;
use crate::symfield::{lie_bracket, PolyVectorField, Rational, WeightVector};

pub const DEFAULT_MAX_DEPTH: usize = 6;

/// Growth vector, weights and step of the flag at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flag {
    pub growth: Vec<usize>,
    pub weights: WeightVector,
    pub step: usize,
}

/// Brackets of exact length `i` for `i = 1..=depth`, with repeats and
/// sign-flipped repeats of earlier fields removed.
pub fn bracket_levels(s: &SubRiemannianStructure, depth: usize) -> Vec<Vec<PolyVectorField>> {
    let mut levels = Vec::new();
    let mut seen = HashSet::new();
    let mut push_new = |level: &mut Vec<PolyVectorField>, f: PolyVectorField| {
        if f.is_zero() || seen.contains(&f) {
            return;
        }
        seen.insert(f.neg());
        seen.insert(f.clone());
        level.push(f);
    };
    let mut first = Vec::new();
    for g in s.generators() {
        push_new(&mut first, g.clone());
    }
    levels.push(first);
    for _ in 1..depth {
        let prev = levels.last().unwrap();
        let mut next = Vec::new();
        for x in s.generators() {
            for y in prev {
                push_new(&mut next, lie_bracket(x, y).expect("same dimension"));
            }
        }
        levels.push(next);
    }
    levels
}

/// Flag at `p` from exact bracket evaluation followed by numeric rank.
pub fn flag_at(s: &SubRiemannianStructure, p: &[f64], max_depth: usize) -> Result<Flag> {
    check_dim(s.dim(), p.len())?;
    if max_depth == 0 {
        return Err(Error::Argument("max_depth must be at least 1".into()));
    }
    let n = s.dim();
    let exact: Vec<Rational> = p
        .iter()
        .map(|&x| Rational::from_float(x).ok_or_else(|| Error::Argument(format!("non-finite coordinate {x}"))))
        .collect::<Result<_>>()?;

    let mut columns: Vec<f64> = Vec::new();
    let mut growth = Vec::new();
    let mut seen = HashSet::new();
    let mut level: Vec<PolyVectorField> = Vec::new();
    for depth in 1..=max_depth {
        let candidates: Vec<PolyVectorField> = if depth == 1 {
            s.generators().to_vec()
        } else {
            let mut next = Vec::new();
            for x in s.generators() {
                for y in &level {
                    next.push(lie_bracket(x, y)?);
                }
            }
            next
        };
        level.clear();
        for f in candidates {
            if f.is_zero() || seen.contains(&f) {
                continue;
            }
            seen.insert(f.neg());
            seen.insert(f.clone());
            for c in f.evaluate_exact(&exact)? {
                columns.push(c.to_f64().unwrap_or(f64::NAN));
            }
            level.push(f);
        }
        let cols = columns.len() / n;
        let rank = numeric_rank(&DMatrix::from_column_slice(n, cols, &columns));
        growth.push(rank);
        if rank == n {
            let weights = WeightVector::from_growth(&growth)?;
            return Ok(Flag { growth, weights, step: depth });
        }
    }
    Err(Error::HormanderUndecided(max_depth))
}
