//! Sub-Riemannian structures given by finite families of polynomial fields.

mod control;
mod flag;
pub mod library;
mod lower_bound;
mod separation;

use crate::error::{check_dim, Error, Result};
use crate::symfield::compiled::CompiledFrame;
use crate::symfield::text::{format_field, parse_field};
use crate::symfield::PolyVectorField;

pub use control::{curve_length, minimal_control, CurveSample, MinimalControl};
pub use flag::{bracket_levels, flag_at, Flag, DEFAULT_MAX_DEPTH};
pub use lower_bound::{projection_lower_bound, riemannian_lower_bound_metric, LowerBoundMetric};
pub use separation::{first_order_separation_check, SeparationReport};

/// Coordinate box used when nothing else is declared.
pub const DEFAULT_BOUND: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct SubRiemannianStructure {
    label: String,
    dim: usize,
    generators: Vec<PolyVectorField>,
    frame: CompiledFrame,
    bound: f64,
}

impl SubRiemannianStructure {
    pub fn new(label: impl Into<String>, generators: Vec<PolyVectorField>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Argument("structure needs at least one generator".into()))?;
        let dim = first.dim();
        for g in &generators {
            check_dim(dim, g.dim())?;
        }
        let frame = CompiledFrame::new(&generators);
        Ok(SubRiemannianStructure {
            label: label.into(),
            dim,
            generators,
            frame,
            bound: DEFAULT_BOUND,
        })
    }

    /// Replace the coordinate box `|x_j| <= bound` outside of which integration stops.
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PolyVectorField] {
        &self.generators
    }

    pub fn frame(&self) -> &CompiledFrame {
        &self.frame
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `dim × m` matrix whose columns are the generators at `p`.
    pub fn frame_matrix(&self, p: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.dim;
        let m = self.generators.len();
        let mut buf = vec![0.0; n * m];
        self.frame.eval(p, &mut buf);
        nalgebra::DMatrix::from_fn(n, m, |j, i| buf[i * n + j])
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "dim {}\ngenerators {}\nlabel {}\n",
            self.dim,
            self.generators.len(),
            self.label
        );
        for (i, g) in self.generators.iter().enumerate() {
            s.push_str(&format!("# X{}\n", i + 1));
            s.push_str(&format_field(g));
            s.push('\n');
        }
        s
    }

    /// Parse the structure file format: `dim n`, `generators m`, optional
    /// `label name`, then `m × n` component lines. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut gens = None;
        let mut label = String::from("custom");
        let mut body: Vec<(usize, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let header = |rest: &str| -> Result<usize> {
                rest.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("expected an integer, got {rest:?}"),
                })
            };
            if let Some(rest) = line.strip_prefix("dim ") {
                dim = Some(header(rest)?);
            } else if let Some(rest) = line.strip_prefix("generators ") {
                gens = Some(header(rest)?);
            } else if let Some(rest) = line.strip_prefix("label ") {
                label = rest.trim().to_string();
            } else {
                body.push((lineno, line));
            }
        }
        let dim = dim.ok_or(Error::Parse { line: 0, msg: "missing `dim` header".into() })?;
        let gens = gens.ok_or(Error::Parse { line: 0, msg: "missing `generators` header".into() })?;
        if dim == 0 || gens == 0 {
            return Err(Error::Parse { line: 0, msg: "dim and generators must be positive".into() });
        }
        if body.len() != dim * gens {
            return Err(Error::Parse {
                line: body.last().map_or(0, |b| b.0),
                msg: format!("expected {} component lines, found {}", dim * gens, body.len()),
            });
        }
        let fields = body
            .chunks(dim)
            .map(|chunk| {
                let lines: Vec<&str> = chunk.iter().map(|(_, l)| *l).collect();
                parse_field(&lines, dim, chunk[0].0)
            })
            .collect::<Result<Vec<_>>>()?;
        SubRiemannianStructure::new(label, fields)
    }
}
