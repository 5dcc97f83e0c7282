//! Experiment runner: one subcommand per experiment, CSV/JSON artifacts plus a
//! `manifest.json` in the output directory.
//!
//! Options come from, in increasing priority: built-in defaults, top-level
//! keys of a `--config` file, the file's `[command]` section, and `--key value`
//! flags. `SRLAB_OUT_DIR` overrides the output directory.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, Command};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::carnot::{horizontal_lift, preimage};
use crate::cdlab::{self, BlockShape, CdReport, DiscreteMeasure, Reference, SuiteOptions};
use crate::error::Error;
use crate::geodesy::{cc_distance, geodesic_between, integrate_control, DistanceOptions, PiecewiseControl};
use crate::nilpotent::{
    blow_up_convergence, blow_up_normal, nilpotent_approximation, rescaled_distance, BlowUpSource,
};
use crate::structure::{flag_at, library, SubRiemannianStructure, DEFAULT_MAX_DEPTH};
use crate::warped::{
    cone_grushin_distance, dilation_isometry_check, hausdorff_dimension_estimate, parameter_gate, ricci_components,
    singular_axis_scaling, ConeGrushinSpace, ConeOptions, WarpingTriple,
};

pub const DEFAULT_SEED: u64 = 20240917;
pub const OUT_DIR_ENV: &str = "SRLAB_OUT_DIR";

const COMMON: &[(&str, &str)] = &[("out", "srlab_out"), ("seed", "20240917"), ("threads", "1")];

/// Subcommands with their keys and defaults.
const COMMANDS: &[(&str, &str, &[(&str, &str)])] = &[
    ("flag", "growth vector and weights at a point", &[("structure", "grushin"), ("point", "0,0"), ("depth", "6")]),
    (
        "distance",
        "distance matrix between points",
        &[("structure", "grushin"), ("points", "0,0;1,0"), ("segments", "40"), ("restarts", "16")],
    ),
    (
        "geodesic",
        "minimizing geodesic between two points",
        &[("structure", "grushin"), ("from", "0,0"), ("to", "0,1"), ("segments", "40"), ("restarts", "16")],
    ),
    (
        "nilpotent",
        "nilpotent approximation at the origin and rescaled distances",
        &[
            ("structure", "perturbed_grushin"),
            ("pairs", "0,0:1,0;0,0:0,1"),
            ("lambdas", "1,2,4,8,16,32"),
            ("segments", "40"),
            ("restarts", "8"),
        ],
    ),
    (
        "blowup",
        "rescalings of a normal geodesic against its blow-up line",
        &[
            ("structure", "perturbed_grushin"),
            ("covector", "1,0.5"),
            ("window", "1"),
            ("lambdas", "1,4,16,64,256,1024,4096,16384,65536,262144,1048576"),
            ("tolerance", "1e-3"),
        ],
    ),
    (
        "lift",
        "horizontal lift of a Grushin control curve to the Heisenberg group",
        &[("controls", "1,0;0,1"), ("durations", "1,1"), ("start", "0,0")],
    ),
    (
        "ricci",
        "Ricci components of a warped product on a radial grid",
        &[
            ("m", "11"),
            ("k", "2"),
            ("alpha", "1"),
            ("c", "0.25"),
            ("r_min", "1e-3"),
            ("r_max", "1e3"),
            ("samples", "200"),
        ],
    ),
    ("gate", "warping parameters with positive Ricci curvature", &[("k", "2"), ("alpha", "1")]),
    (
        "cone-distance",
        "cone-Grushin distances between points",
        &[("k", "2"), ("alpha", "1"), ("c", "0.5"), ("points", "0,0,0,0;0,0,0,1")],
    ),
    (
        "dilation-check",
        "cone-Grushin dilation isometry on random pairs",
        &[("k", "2"), ("alpha", "1"), ("c", "0.5"), ("pairs", "20"), ("lambdas", "0.5,2,4")],
    ),
    (
        "hausdorff",
        "axis scaling and Hausdorff dimension of the singular axis",
        &[("k", "2"), ("alpha", "3"), ("c", "0.5"), ("ys", "0.0625,0.25,4,16")],
    ),
    (
        "cd-check",
        "discrete CD(K,N) entropy inequality suites",
        &[
            ("suite", "grushin-scan"),
            ("K", "-10"),
            ("N", "10"),
            ("scales", "1,0.5,0.25,0.125"),
            ("shape", "adjacent"),
            ("width", "0.5"),
            ("height", "0.1"),
            ("lift", "1"),
            ("grid", "6"),
            ("times", "0.25,0.5,0.75"),
            ("segments", "20"),
            ("restarts", "2"),
            ("p", "3"),
        ],
    ),
];

/// Failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "config".into(),
            message: msg.into(),
        }
    }

    fn to_json(&self) -> Value {
        json!({"error": self.kind, "message": self.message, "exit_code": self.code})
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::NonConvergence(_)
            | Error::EstimateFailed(_)
            | Error::GateFailed(_)
            | Error::HormanderUndecided(_)
            | Error::FrameExtensionFailed
            | Error::DomainEscape { .. }
            | Error::OracleConditioning(_) => (3, "numeric"),
            Error::Plan(_) | Error::NotHorizontal { .. } => (4, "invariant"),
            _ => (2, "input"),
        };
        CliError {
            code,
            kind: kind.into(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 4,
            kind: "io".into(),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `key = value` lines with optional `[section]` headers; `#` starts a comment.
/// Section keys are returned as `section.key`.
pub fn parse_config(text: &str) -> crate::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "unterminated section header".into() })?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key".into() });
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Resolved options of one command.
#[derive(Clone, Debug)]
struct Opts {
    command: String,
    values: BTreeMap<String, String>,
}

impl Opts {
    fn raw(&self, key: &str) -> CliResult<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::config(format!("missing option {key}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.raw(key)?;
        v.parse()
            .map_err(|_| CliError::config(format!("option {key}: cannot parse {v:?}")))
    }

    fn positive(&self, key: &str) -> CliResult<f64> {
        let v: f64 = self.parse(key)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::config(format!("option {key} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> CliResult<Vec<f64>> {
        parse_list(self.raw(key)?).ok_or_else(|| CliError::config(format!("option {key}: bad number list")))
    }

    /// `;`-separated points.
    fn points(&self, key: &str) -> CliResult<Vec<Vec<f64>>> {
        self.raw(key)?
            .split(';')
            .map(|p| parse_list(p).ok_or_else(|| CliError::config(format!("option {key}: bad point {p:?}"))))
            .collect()
    }

    fn structure(&self) -> CliResult<SubRiemannianStructure> {
        let name = self.raw("structure")?;
        let path = Path::new(name);
        if path.is_file() {
            let text = std::fs::read_to_string(path)?;
            Ok(SubRiemannianStructure::from_text(&text)?)
        } else {
            Ok(library::by_name(name)?)
        }
    }

    fn distance_options(&self) -> CliResult<DistanceOptions> {
        Ok(DistanceOptions {
            segments: self.parse("segments")?,
            restarts: self.parse("restarts")?,
            seed: self.parse("seed")?,
            ..Default::default()
        })
    }

    fn cone(&self) -> CliResult<ConeGrushinSpace> {
        Ok(ConeGrushinSpace::new(self.parse("k")?, self.positive("alpha")?, self.positive("c")?)?)
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|v| v.trim().parse::<f64>().ok()).collect()
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes artifacts and remembers their names for the manifest.
struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    fn text(&mut self, name: &str, content: &str) -> CliResult<()> {
        std::fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).expect("json serializes");
        s.push('\n');
        self.text(name, &s)
    }
}

fn build_cli() -> Command {
    let mut cmd = Command::new("srlab")
        .about("Sub-Riemannian geometry laboratory")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, keys) in COMMANDS {
        let mut sub = Command::new(*name).about(*about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("flat key = value file with optional [section] headers"),
        );
        for (key, default) in COMMON.iter().chain(keys.iter()) {
            sub = sub.arg(
                Arg::new(*key)
                    .long(*key)
                    .value_name("VALUE")
                    .allow_hyphen_values(true)
                    .action(ArgAction::Set)
                    .help(format!("default: {default}")),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(args: Vec<OsString>) -> CliResult<Opts> {
    let matches = build_cli().try_get_matches_from(args).map_err(|e| {
        let code = if e.use_stderr() { 2 } else { 0 };
        CliError {
            code,
            kind: if code == 0 { "help".into() } else { "config".into() },
            message: e.to_string(),
        }
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let (_, _, keys) = COMMANDS.iter().find(|c| c.0 == name).unwrap();
    let mut values: BTreeMap<String, String> = COMMON
        .iter()
        .chain(keys.iter())
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    if let Some(path) = sub.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{path}: {e}")))?;
        let file = parse_config(&text).map_err(|e| CliError::config(e.to_string()))?;
        for pass in [false, true] {
            for (k, v) in &file {
                let key = match k.split_once('.') {
                    Some((section, key)) if pass && section == name => key,
                    None if !pass => k.as_str(),
                    _ => continue,
                };
                if !values.contains_key(key) {
                    return Err(CliError::config(format!("unknown option {key:?} for {name}")));
                }
                values.insert(key.to_string(), v.clone());
            }
        }
    }
    for (key, _) in COMMON.iter().chain(keys.iter()) {
        if let Some(v) = sub.get_one::<String>(key) {
            values.insert(key.to_string(), v.clone());
        }
    }
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        values.insert("out".into(), dir);
    }
    Ok(Opts {
        command: name.to_string(),
        values,
    })
}

/// Run the binary with `args` (including the program name); returns the exit status.
pub fn run(args: Vec<OsString>) -> i32 {
    let opts = match resolve(args) {
        Ok(o) => o,
        Err(e) if e.code == 0 => {
            print!("{}", e.message);
            return 0;
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            return e.code;
        }
    };
    let dir = PathBuf::from(&opts.values["out"]);
    match execute(&opts, &dir) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            if std::fs::create_dir_all(&dir).is_ok() {
                let _ = std::fs::write(dir.join("error.json"), format!("{:#}\n", e.to_json()));
            }
            e.code
        }
    }
}

fn execute(opts: &Opts, dir: &Path) -> CliResult<()> {
    let threads: usize = opts.parse("threads")?;
    if threads == 0 {
        return Err(CliError::config("threads must be at least 1"));
    }
    let _: u64 = opts.parse("seed")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;
    std::fs::create_dir_all(dir)?;
    let _ = std::fs::remove_file(dir.join("error.json"));
    let mut sink = Sink {
        dir: dir.to_path_buf(),
        files: Vec::new(),
    };
    let started = std::time::SystemTime::now();
    let clock = Instant::now();
    pool.install(|| dispatch(opts, &mut sink))?;
    let started_unix = started
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let manifest = json!({
        "command": opts.command,
        "config": opts.values,
        "versions": {"srlab": env!("CARGO_PKG_VERSION")},
        "outputs": sink.files,
        "timing": {"started_unix": started_unix, "wall_time_s": clock.elapsed().as_secs_f64()},
    });
    sink.json("manifest.json", &manifest)
}

fn dispatch(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    match opts.command.as_str() {
        "flag" => cmd_flag(opts, sink),
        "distance" => cmd_distance(opts, sink),
        "geodesic" => cmd_geodesic(opts, sink),
        "nilpotent" => cmd_nilpotent(opts, sink),
        "blowup" => cmd_blowup(opts, sink),
        "lift" => cmd_lift(opts, sink),
        "ricci" => cmd_ricci(opts, sink),
        "gate" => cmd_gate(opts, sink),
        "cone-distance" => cmd_cone_distance(opts, sink),
        "dilation-check" => cmd_dilation(opts, sink),
        "hausdorff" => cmd_hausdorff(opts, sink),
        "cd-check" => cmd_cd(opts, sink),
        other => Err(CliError::config(format!("unknown command {other}"))),
    }
}

fn cmd_flag(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = opts.structure()?;
    let p = opts.list("point")?;
    let flag = flag_at(&s, &p, opts.parse("depth")?)?;
    sink.json(
        "flag.json",
        &json!({
            "structure": s.label(),
            "point": p,
            "growth": flag.growth,
            "weights": flag.weights.as_slice(),
            "step": flag.step,
        }),
    )
}

fn cmd_distance(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = opts.structure()?;
    let pts = opts.points("points")?;
    let dopts = opts.distance_options()?;
    let mut csv = String::from("i,j,upper,lower,converged\n");
    let mut entries = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let e = cc_distance(&s, &pts[i], &pts[j], &dopts)?;
            csv += &format!("{i},{j},{},{},{}\n", e.upper, e.lower, e.converged);
            entries.push(json!({"i": i, "j": j, "upper": e.upper, "lower": e.lower, "converged": e.converged}));
        }
    }
    sink.text("distance_matrix.csv", &csv)?;
    sink.json("distance.json", &json!({"structure": s.label(), "points": pts, "entries": entries}))
}

fn cmd_geodesic(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = opts.structure()?;
    let (p, q) = (opts.list("from")?, opts.list("to")?);
    let dopts = opts.distance_options()?;
    let est = cc_distance(&s, &p, &q, &dopts)?;
    let c = geodesic_between(&s, &p, &q, &dopts)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=s.dim()).map(|i| format!("x{i}")));
    header.extend((1..=s.num_generators()).map(|i| format!("u{i}")));
    let mut csv = header.join(",") + "\n";
    for k in 0..c.times.len() {
        let mut row = vec![c.times[k]];
        row.extend(&c.states[k]);
        row.extend(&c.controls[k]);
        csv += &csv_row(&row);
        csv.push('\n');
    }
    sink.text("geodesic.csv", &csv)?;
    sink.json(
        "geodesic.json",
        &json!({
            "structure": s.label(), "from": p, "to": q,
            "length": c.length, "upper": est.upper, "lower": est.lower, "converged": est.converged,
        }),
    )
}

/// `a1,a2:b1,b2;...` pairs.
fn parse_pairs(opts: &Opts, key: &str) -> CliResult<Vec<(Vec<f64>, Vec<f64>)>> {
    opts.raw(key)?
        .split(';')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| CliError::config(format!("option {key}: pair {pair:?} needs ':'")))?;
            match (parse_list(a), parse_list(b)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(CliError::config(format!("option {key}: bad pair {pair:?}"))),
            }
        })
        .collect()
}

fn cmd_nilpotent(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = opts.structure()?;
    let origin = vec![0.0; s.dim()];
    let flag = flag_at(&s, &origin, DEFAULT_MAX_DEPTH)?;
    let hat = nilpotent_approximation(&s, &flag.weights)?;
    sink.text("nilpotent.txt", &hat.to_text())?;
    let dopts = opts.distance_options()?;
    let lambdas = opts.list("lambdas")?;
    let mut csv = String::from("pair,lambda,rescaled,nilpotent,deviation\n");
    let mut finals = Vec::new();
    for (i, (x, y)) in parse_pairs(opts, "pairs")?.iter().enumerate() {
        let d_hat = cc_distance(&hat, x, y, &dopts)?.upper;
        let mut last = f64::NAN;
        for &l in &lambdas {
            let d = rescaled_distance(&s, &flag.weights, l, x, y, &dopts)?;
            last = (d - d_hat).abs();
            csv += &format!("{i},{l},{d},{d_hat},{last}\n");
        }
        finals.push(last);
    }
    sink.text("rescaled_distances.csv", &csv)?;
    sink.json(
        "nilpotent.json",
        &json!({
            "structure": s.label(),
            "approximation": hat.label(),
            "weights": flag.weights.as_slice(),
            "growth": flag.growth,
            "final_deviations": finals,
        }),
    )
}

fn cmd_blowup(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = opts.structure()?;
    let origin = vec![0.0; s.dim()];
    let flag = flag_at(&s, &origin, DEFAULT_MAX_DEPTH)?;
    let lam = opts.list("covector")?;
    let window = opts.positive("window")?;
    // initial velocity of the normal geodesic: F Fᵀ λ
    let f = s.frame_matrix(&origin);
    let v = &f * (f.transpose() * DVector::from_vec(lam.clone()));
    let line = blow_up_normal(&s, &flag.weights, v.as_slice(), window)?;
    let report = blow_up_convergence(
        &s,
        &flag.weights,
        &BlowUpSource::Normal(lam.clone()),
        &opts.list("lambdas")?,
        window,
        Some(&line),
        opts.positive("tolerance")?,
    )?;
    sink.text("blowup.csv", &report.to_csv())?;
    sink.json(
        "blowup.json",
        &json!({
            "structure": s.label(),
            "covector": lam,
            "window": window,
            "final_deviation": report.deviations.last(),
            "tolerance": report.tolerance,
            "converged": report.converged,
        }),
    )
}

fn cmd_lift(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let s = library::grushin();
    let start = opts.list("start")?;
    let u = PiecewiseControl::new(opts.list("durations")?, opts.points("controls")?)?;
    let gamma = integrate_control(&s, &start, &u)?;
    let g0 = preimage([start[0], start[1]]);
    let lift = horizontal_lift(&gamma, &g0)?;
    let proj_err = lift
        .projection()
        .iter()
        .zip(&gamma.states)
        .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
        .fold(0.0, f64::max);
    sink.text("lift.csv", &lift.to_csv())?;
    sink.json(
        "lift.json",
        &json!({
            "base_length": gamma.length,
            "lift_length": lift.length,
            "length_error": (lift.length - gamma.length).abs(),
            "projection_error": proj_err,
        }),
    )
}

fn cmd_ricci(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let w = WarpingTriple::new(opts.parse("m")?, opts.parse("k")?, opts.positive("alpha")?, opts.positive("c")?)?;
    let (a, b) = (opts.positive("r_min")?, opts.positive("r_max")?);
    let n: usize = opts.parse("samples")?;
    if n < 2 || b <= a {
        return Err(CliError::config("need samples ≥ 2 and r_max > r_min"));
    }
    let mut csv = String::from("r,ric_r,ric_f,ric_g,ric_h\n");
    let mut mins = [f64::INFINITY; 4];
    for i in 0..n {
        let r = a * (b / a).powf(i as f64 / (n - 1) as f64);
        let ric = ricci_components(&w, r)?;
        for j in 0..4 {
            mins[j] = mins[j].min(ric[j]);
        }
        csv += &csv_row(&[r, ric[0], ric[1], ric[2], ric[3]]);
        csv.push('\n');
    }
    sink.text("ricci_sweep.csv", &csv)?;
    sink.json(
        "ricci.json",
        &json!({"m": w.m, "k": w.k, "alpha": w.alpha, "c": w.c, "minima": mins, "positive": mins.iter().all(|v| *v > 0.0)}),
    )
}

fn cmd_gate(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let (k, alpha) = (opts.parse("k")?, opts.positive("alpha")?);
    let cert = parameter_gate(k, alpha)?;
    sink.json(
        "gate.json",
        &json!({
            "k": k, "alpha": alpha, "m": cert.m, "c": cert.c,
            "minima": cert.minima, "iterations": cert.iterations,
            "positive": cert.minima.iter().all(|v| *v > 0.0),
        }),
    )
}

fn cmd_cone_distance(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let cg = opts.cone()?;
    let pts = opts.points("points")?;
    let copts = ConeOptions::default();
    let mut csv = String::from("i,j,estimate,upper,converged\n");
    let mut entries = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = cone_grushin_distance(&cg, &pts[i], &pts[j], &copts)?;
            csv += &format!("{i},{j},{},{},{}\n", d.estimate, d.upper, d.converged);
            entries.push(json!({"i": i, "j": j, "estimate": d.estimate, "upper": d.upper, "converged": d.converged}));
        }
    }
    sink.text("cone_distances.csv", &csv)?;
    sink.json("cone_distance.json", &json!({"k": cg.k, "alpha": cg.alpha, "c": cg.c, "points": pts, "entries": entries}))
}

/// Random pairs in `[−1, 1]^{k+2}` from the seed.
pub fn random_cone_pairs(cg: &ConeGrushinSpace, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || (0..cg.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    (0..count).map(|_| (point(), point())).collect()
}

fn cmd_dilation(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let cg = opts.cone()?;
    let pairs = random_cone_pairs(&cg, opts.parse("pairs")?, opts.parse("seed")?);
    let rep = dilation_isometry_check(&cg, &pairs, &opts.list("lambdas")?, &ConeOptions::default())?;
    let mut csv = String::from("pair,lambda,scaled,expected,rel_err\n");
    for r in &rep.rows {
        csv += &format!("{},{},{},{},{}\n", r.pair, r.lambda, r.scaled, r.expected, r.rel_err);
    }
    sink.text("dilation.csv", &csv)?;
    sink.json(
        "dilation.json",
        &json!({"k": cg.k, "alpha": cg.alpha, "c": cg.c, "max_rel_err": rep.max_rel_err, "passed": rep.passed}),
    )
}

fn cmd_hausdorff(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let cg = opts.cone()?;
    let axis = singular_axis_scaling(&cg, &opts.list("ys")?, &ConeOptions::default())?;
    let fit = hausdorff_dimension_estimate(cg.alpha, axis.c_tilde)?;
    sink.text("hausdorff_fit.csv", &fit.to_csv())?;
    let mut csv = String::from("y,distance,predicted,rel_err\n");
    for r in &axis.rows {
        csv += &csv_row(&[r.0, r.1, r.2, r.3]);
        csv.push('\n');
    }
    sink.text("axis_scaling.csv", &csv)?;
    sink.json(
        "hausdorff.json",
        &json!({
            "k": cg.k, "alpha": cg.alpha, "c": cg.c,
            "c_tilde": axis.c_tilde,
            "axis_exponent": axis.slope,
            "expected_exponent": axis.exponent,
            "slope": fit.slope,
            "expected_slope": 1.0 + cg.alpha,
        }),
    )
}

fn cmd_cd(opts: &Opts, sink: &mut Sink) -> CliResult<()> {
    let suite = SuiteOptions {
        times: opts.list("times")?,
        grid: opts.parse("grid")?,
        distance: DistanceOptions {
            segments: opts.parse("segments")?,
            restarts: opts.parse("restarts")?,
            seed: opts.parse("seed")?,
            ..Default::default()
        },
    };
    if suite.grid == 0 {
        return Err(CliError::config("grid must be at least 1"));
    }
    let (k, n): (f64, f64) = (opts.parse("K")?, opts.parse("N")?);
    let which = opts.raw("suite")?.to_string();
    let mut labelled: Vec<(String, CdReport, Option<(DiscreteMeasure, DiscreteMeasure)>)> = Vec::new();
    let mut budget = 0.0;
    match which.as_str() {
        "grushin-scan" => {
            let (w, h, l) = (opts.positive("width")?, opts.positive("height")?, opts.positive("lift")?);
            let shape = match opts.raw("shape")? {
                "adjacent" => BlockShape::adjacent(w, h, l),
                "straddling" => BlockShape::straddling(w, h, l),
                other => return Err(CliError::config(format!("unknown shape {other:?}"))),
            };
            let scales = opts.list("scales")?;
            let scan = cdlab::grushin_violation_scan(k, n, &scales, &shape, &suite)?;
            budget = scan.budget;
            for e in scan.entries {
                let (a, b) = shape.clouds(e.scale, suite.grid);
                let mu = (
                    DiscreteMeasure::uniform(a, Reference::Lebesgue)?,
                    DiscreteMeasure::uniform(b, Reference::Lebesgue)?,
                );
                labelled.push((format!("scale={}", e.scale), e.report, Some(mu)));
            }
        }
        "halfplane" => {
            let p = opts.positive("p")?;
            for (i, r) in cdlab::halfplane_suite(p, n, &suite)?.into_iter().enumerate() {
                labelled.push((format!("halfplane p={p} config={i}"), r, None));
            }
        }
        "euclidean-control" => {
            let reports = cdlab::euclidean_control_suite(n, &suite)?;
            budget = cdlab::calibrate_budget(&reports);
            for (r, name) in reports.into_iter().zip(["translation", "dilation"]) {
                labelled.push((name.to_string(), r, None));
            }
        }
        other => return Err(CliError::config(format!("unknown suite {other:?}"))),
    }
    let mut summary = Vec::new();
    for (i, (label, report, measures)) in labelled.iter().enumerate() {
        sink.json(&format!("cd_report_{i}.json"), &report.to_json())?;
        if let Some((a, b)) = measures {
            sink.text(&format!("mu0_{i}.csv"), &a.to_csv())?;
            sink.text(&format!("mu1_{i}.csv"), &b.to_csv())?;
        }
        summary.push(json!({"label": label, "min_margin": report.min_margin, "verdict": report.verdict}));
    }
    let witness = labelled
        .iter()
        .position(|(_, r, _)| r.verdict == cdlab::Verdict::Violated);
    sink.json(
        "cd_summary.json",
        &json!({"suite": which, "K": k, "N": n, "budget": budget, "entries": summary, "witness": witness}),
    )
}
