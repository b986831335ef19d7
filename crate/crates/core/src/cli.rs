//! Command-line front end. Every artifact is a CSV carrying the tool
//! version and a hash of the effective configuration; SVGs are rendered
//! from those CSVs by `plot`.
//!
//! Exit codes: 0 ok, 1 I/O, 2 schema or argument error, 3 numerical
//! non-convergence (a diagnostics JSON is written next to the outputs).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::charvar::{self, Representation, RepresentationJson, Word};
use crate::families::{
    boundary_limit, BoundaryDirection, FamilyError, FunctionFamily, LimitDiagnostics, LogPoint,
    PathSpec, DEFAULT_TOL_PROJ,
};
use crate::hilbert::{self, ConvexDomain, DomainJson, HilbertError};
use crate::linalg::Matrix;
use crate::logmap::{self, LogParams, LoglimitOptions};
use crate::output::{self, num, Csv};
use crate::semialg::{PolyJson, Polynomial, SemiAlgebraicSet, SetJson};
use crate::surface::{self, LogTriple, MarkedRep, Slope, SurfaceError, TraceTriple};

#[derive(Parser, Debug)]
#[command(
    name = "logcompact",
    version,
    about = "Logarithmic limit sets and length-spectrum compactifications"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Seed for every sampling command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Base of the log map is 1/t0.
    #[arg(long, global = true, default_value_t = (-1.0f64).exp())]
    t0: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_PROJ)]
    tol_proj: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    cluster_tol: f64,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    /// Output directory.
    #[serde(skip)]
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Allow replacing existing artifacts.
    #[serde(skip)]
    #[arg(long, global = true)]
    force: bool,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the logarithmic limit set of a semi-algebraic set and cluster it into cones.
    Loglimit {
        set: PathBuf,
        #[arg(long, default_value_t = 4000)]
        samples: usize,
    },
    /// Tropical prevariety membership of a polynomial on a grid of directions.
    Tropicalize {
        poly: PathBuf,
        /// Half-width of the integer cube whose surface gives the directions.
        #[arg(long, default_value_t = 6)]
        grid: i32,
    },
    /// Boundary limits of a family along paths.
    Compactify { family: PathBuf, paths: PathBuf },
    /// Trace, eigenvalue ratio, length and positive trace of words.
    Lengths {
        representation: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "a,b,ab")]
        words: Vec<String>,
    },
    /// Limit length spectra along Dehn-twist paths of the punctured torus.
    TwistDegenerate {
        #[arg(long, value_delimiter = ',', default_value = "3,3,3")]
        triple: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        slope: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0/1,1/0,1/1")]
        curves: Vec<String>,
    },
    /// Hilbert displacement of a projective transformation of a convex domain.
    Hilbert {
        domain: PathBuf,
        /// Matrix as JSON rows, inline or a file; 2x2 input acts on the Klein disk.
        #[arg(long)]
        matrix: String,
        /// Base point, default the domain centre.
        #[arg(long, value_delimiter = ',')]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Render a direction CSV as an SVG chart.
    Plot { csv: PathBuf },
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Schema(String),
    NoConvergence { message: String, diagnostics: Value },
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::NoConvergence { .. } => 3,
        }
    }
}

fn schema(e: impl std::fmt::Display) -> CliError {
    CliError::Schema(e.to_string())
}

fn family_error(e: FamilyError, context: Value) -> CliError {
    match e {
        FamilyError::NotConverged {
            steps,
            ref last_angles,
        } => CliError::NoConvergence {
            message: e.to_string(),
            diagnostics: json!({"error": "not_converged", "steps": steps, "last_angles": last_angles, "context": context}),
        },
        FamilyError::NoEscape {
            steps,
            max_norm,
            radius,
        } => CliError::NoConvergence {
            message: e.to_string(),
            diagnostics: json!({"error": "no_escape", "steps": steps, "max_norm": max_norm, "radius": radius, "context": context}),
        },
        other => schema(other),
    }
}

fn surface_error(e: SurfaceError, context: Value) -> CliError {
    match e {
        SurfaceError::Family(f) => family_error(f, context),
        other => schema(other),
    }
}

/// Effective configuration; its hash goes into every artifact header.
#[derive(Serialize)]
struct ExperimentConfig<'a> {
    command: &'a str,
    inputs: Value,
    #[serde(flatten)]
    common: &'a Common,
}

struct Ctx {
    common: Common,
    hash: String,
    written: Vec<PathBuf>,
}

impl Ctx {
    fn emit(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.common.out.join(name);
        output::write_new(&path, contents, self.common.force).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                CliError::Io(format!(
                    "{} exists; pass --force to replace it",
                    path.display()
                ))
            } else {
                CliError::Io(format!("{}: {e}", path.display()))
            }
        })?;
        self.written.push(path);
        Ok(())
    }

    fn csv<S: Into<String>>(&self, columns: impl IntoIterator<Item = S>) -> Csv {
        Csv::new(columns).with_header(&self.hash)
    }

    fn params(&self) -> Result<LogParams, CliError> {
        let d = LogParams::default();
        LogParams::new(self.common.t0, d.radius_ladder, self.common.cluster_tol).map_err(schema)
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.common
            .seed
            .ok_or_else(|| CliError::Schema("this command samples; --seed is required".into()))
    }

    fn tune<P: 'static>(&self, path: PathSpec<P>) -> PathSpec<P> {
        let path = path.with_tol_proj(self.common.tol_proj);
        match self.common.max_steps {
            Some(n) => path.with_max_steps(n),
            None => path,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| schema(format!("{}: {e}", path.display())))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| schema(format!("{what}: {e}")))
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = cli.common.out.clone();
    let force = cli.common.force;
    let name = command_name(&cli.command);
    match dispatch(cli) {
        Ok(written) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            match &e {
                CliError::Io(m) => eprintln!("error: {m}"),
                CliError::Schema(m) => eprintln!("invalid input: {m}"),
                CliError::NoConvergence {
                    message,
                    diagnostics,
                } => {
                    eprintln!("no convergence: {message}");
                    let path = out.join(format!("{name}-diagnostics.json"));
                    let body = serde_json::to_string_pretty(diagnostics).expect("json") + "\n";
                    match output::write_new(&path, &body, force) {
                        Ok(()) => eprintln!("diagnostics in {}", path.display()),
                        Err(err) => eprintln!("could not write {}: {err}", path.display()),
                    }
                }
            }
            e.code()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Loglimit { .. } => "loglimit",
        Command::Tropicalize { .. } => "tropicalize",
        Command::Compactify { .. } => "compactify",
        Command::Lengths { .. } => "lengths",
        Command::TwistDegenerate { .. } => "twist-degenerate",
        Command::Hilbert { .. } => "hilbert",
        Command::Plot { .. } => "plot",
    }
}

fn dispatch(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let name = command_name(&cli.command);
    // parsed inputs first, so the hash covers file contents rather than paths
    let inputs = match &cli.command {
        Command::Loglimit { set, samples } => json!({"set": read_json(set)?, "samples": samples}),
        Command::Tropicalize { poly, grid } => json!({"poly": read_json(poly)?, "grid": grid}),
        Command::Compactify { family, paths } => {
            json!({"family": read_json(family)?, "paths": read_json(paths)?})
        }
        Command::Lengths {
            representation,
            words,
        } => {
            json!({"representation": read_json(representation)?, "words": words})
        }
        Command::TwistDegenerate {
            triple,
            slope,
            curves,
        } => json!({"triple": triple, "slope": slope, "curves": curves}),
        Command::Hilbert {
            domain,
            matrix,
            x0,
            steps,
        } => {
            let m = match serde_json::from_str::<Value>(matrix) {
                Ok(v) => v,
                Err(_) => read_json(Path::new(matrix))?,
            };
            json!({"domain": read_json(domain)?, "matrix": m, "x0": x0, "steps": steps})
        }
        Command::Plot { csv } => {
            json!({"csv": read(csv)?, "name": csv.file_stem().map(|s| s.to_string_lossy())})
        }
    };
    let config = serde_json::to_value(ExperimentConfig {
        command: name,
        inputs: inputs.clone(),
        common: &cli.common,
    })
    .expect("config serialises");
    let mut ctx = Ctx {
        common: cli.common,
        hash: output::config_hash(&config),
        written: Vec::new(),
    };
    match cli.command {
        Command::Loglimit { .. } => loglimit(&mut ctx, &inputs),
        Command::Tropicalize { .. } => tropicalize(&mut ctx, &inputs),
        Command::Compactify { .. } => compactify(&mut ctx, &inputs),
        Command::Lengths { .. } => lengths(&mut ctx, &inputs),
        Command::TwistDegenerate { .. } => twist_degenerate(&mut ctx, &inputs),
        Command::Hilbert { .. } => hilbert_cmd(&mut ctx, &inputs),
        Command::Plot { .. } => plot(&mut ctx, &inputs),
    }?;
    Ok(ctx.written)
}

fn direction_columns(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i}")).collect()
}

fn loglimit(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let set_json: SetJson = decode(&inputs["set"], "set")?;
    let set = SemiAlgebraicSet::try_from(&set_json).map_err(schema)?;
    let samples = inputs["samples"].as_u64().unwrap_or(4000) as usize;
    let params = ctx.params()?;
    let opts = LoglimitOptions {
        workers: ctx.common.workers.max(1),
        ..LoglimitOptions::default()
    };
    let (cloud, diag) =
        match logmap::loglimit_directions_with(&set, &params, samples, ctx.seed()?, &opts) {
            Ok(r) => r,
            Err(e @ logmap::LogmapError::Bounded { .. }) => {
                return Err(CliError::NoConvergence {
                    message: e.to_string(),
                    diagnostics: json!({"error": "bounded", "detail": e.to_string()}),
                })
            }
            Err(e) => return Err(schema(e)),
        };
    let report = logmap::cluster_cones(&cloud, params.cluster_tol).map_err(schema)?;
    let n = cloud.dim();
    let mut label = vec![0usize; cloud.len()];
    for (ci, c) in report.clusters.iter().enumerate() {
        for &m in &c.members {
            label[m] = ci;
        }
    }
    let mut cols = direction_columns(n);
    cols.push("cluster".into());
    let mut t = ctx.csv(cols);
    t.comment(format!(
        "rays={} per_rung={:?} unstable={}",
        diag.rays, diag.per_rung, diag.unstable
    ));
    for (d, l) in cloud.directions.iter().zip(&label) {
        let mut row: Vec<String> = d.iter().map(|&x| num(x)).collect();
        row.push(l.to_string());
        t.push(row);
    }
    let mut cols = vec![
        "cluster".to_string(),
        "kind".into(),
        "size".into(),
        "angular_diameter".into(),
    ];
    cols.extend((0..n).map(|i| format!("mean{i}")));
    let mut c = ctx.csv(cols);
    for (i, cl) in report.clusters.iter().enumerate() {
        let kind = match cl.kind {
            logmap::ClusterKind::RayLike => "ray",
            logmap::ClusterKind::FaceLike => "face",
        };
        let mut row = vec![
            i.to_string(),
            kind.into(),
            cl.members.len().to_string(),
            num(cl.angular_diameter),
        ];
        row.extend(cl.mean.iter().map(|&x| num(x)));
        c.push(row);
    }
    println!("directions {}", cloud.len());
    println!("clusters {}", report.count());
    println!("face-like {}", report.face_like(0.01));
    let polys = set.polynomials();
    if let [p] = polys.as_slice() {
        let worst = cloud
            .directions
            .iter()
            .map(|d| logmap::tropical_angular_distance(p, d))
            .fold(0.0, f64::max);
        println!("max prevariety distance {worst:.3e}");
    }
    ctx.emit("directions.csv", &t.render())?;
    ctx.emit("clusters.csv", &c.render())
}

/// Unit directions through the integer points on the surface of `[-g, g]^n`.
fn cube_directions(n: usize, g: i32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let side = (2 * g + 1) as usize;
    let total = side.pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        let v: Vec<i32> = (0..n)
            .map(|_| {
                let c = (r % side) as i32 - g;
                r /= side;
                c
            })
            .collect();
        if v.iter().any(|c| c.abs() == g) {
            let f: Vec<f64> = v.iter().map(|&c| c as f64).collect();
            out.push(logmap::normalize(&f).expect("nonzero"));
        }
    }
    out
}

fn tropicalize(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let pj: PolyJson = decode(&inputs["poly"], "poly")?;
    let p = Polynomial::try_from(&pj).map_err(schema)?;
    let g = inputs["grid"].as_i64().unwrap_or(6) as i32;
    if g < 1 || p.arity() == 0 || p.arity() > 4 {
        return Err(schema("need 1 <= grid and 1..=4 variables"));
    }
    let mut cols = direction_columns(p.arity());
    cols.extend(["member".to_string(), "angular_distance".into()]);
    let mut t = ctx.csv(cols);
    let mut members = 0;
    let dirs = cube_directions(p.arity(), g);
    for d in &dirs {
        let m = logmap::tropical_prevariety_member(&p, d, 1e-12);
        members += m as usize;
        let mut row: Vec<String> = d.iter().map(|&x| num(x)).collect();
        row.push((m as u8).to_string());
        row.push(num(logmap::tropical_angular_distance(&p, d)));
        t.push(row);
    }
    println!("grid directions {} on prevariety {}", dirs.len(), members);
    ctx.emit("tropical.csv", &t.render())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FamilyJson {
    Polynomials { members: Vec<NamedPoly> },
    Curves { curves: Vec<String> },
    Words { words: BTreeMap<String, String> },
}

#[derive(Deserialize)]
struct NamedPoly {
    name: String,
    poly: PolyJson,
}

#[derive(Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PathJson {
    Explicit { points: Vec<Vec<f64>> },
    Iterated { rule: String, params: Value },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PathsJson {
    One(PathJson),
    Many(Vec<PathJson>),
    Wrapped { paths: Vec<PathJson> },
}

#[derive(Deserialize)]
struct TwistParams {
    #[serde(default)]
    triple: Option<[f64; 3]>,
    #[serde(default)]
    representation: Option<RepresentationJson>,
    slope: String,
}

#[derive(Deserialize)]
struct MarkovParams {
    #[serde(default)]
    triple: Option<[f64; 3]>,
    moves: Vec<u8>,
}

fn start_rep(
    triple: Option<[f64; 3]>,
    rep: Option<&RepresentationJson>,
) -> Result<Representation, CliError> {
    match (triple, rep) {
        (_, Some(r)) => Representation::try_from(r).map_err(schema),
        (t, None) => {
            let [x, y, z] = t.unwrap_or([3.0; 3]);
            TraceTriple::new(x, y, z).representation().map_err(schema)
        }
    }
}

fn boundary_rows(t: &mut Csv, path: usize, d: &BoundaryDirection) {
    for (n, c) in d.names.iter().zip(&d.coords) {
        t.push(vec![path.to_string(), n.clone(), num(*c)]);
    }
}

fn convergence_rows(t: &mut Csv, path: usize, g: &LimitDiagnostics) {
    for (i, n) in g.norms.iter().enumerate() {
        let a = if i == 0 {
            String::new()
        } else {
            g.angles.get(i - 1).map(|&a| num(a)).unwrap_or_default()
        };
        t.push(vec![path.to_string(), i.to_string(), num(*n), a]);
    }
}

fn compactify(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let family: FamilyJson = decode(&inputs["family"], "family")?;
    let paths: Vec<PathJson> = match decode::<PathsJson>(&inputs["paths"], "paths")? {
        PathsJson::One(p) => vec![p],
        PathsJson::Many(v) | PathsJson::Wrapped { paths: v } => v,
    };
    if paths.is_empty() {
        return Err(schema("no paths given"));
    }
    let t0 = ctx.common.t0;
    let mut bound = ctx.csv(["path", "name", "coordinate"]);
    let mut conv = ctx.csv(["path", "step", "norm", "angle"]);
    match family {
        FamilyJson::Polynomials { members } => {
            let named = members
                .iter()
                .map(|m| {
                    Ok((
                        m.name.clone(),
                        Polynomial::try_from(&m.poly).map_err(schema)?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let refs: Vec<(&str, Polynomial)> =
                named.iter().map(|(n, p)| (n.as_str(), p.clone())).collect();
            let f = FunctionFamily::polynomials(&refs).map_err(schema)?;
            for (i, p) in paths.iter().enumerate() {
                let PathJson::Explicit { points } = p else {
                    return Err(schema("polynomial families take explicit paths"));
                };
                let pts = points
                    .iter()
                    .map(|x| {
                        if x.iter().all(|&c| c > 0.0) {
                            Ok(LogPoint::from_coords(x))
                        } else {
                            Err(schema("explicit path points must be positive"))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let n = pts.len();
                let spec = ctx
                    .tune(PathSpec::explicit(pts))
                    .with_max_steps(ctx.common.max_steps.unwrap_or(n).min(n));
                let (d, g) = boundary_limit(&f, &spec, t0)
                    .map_err(|e| family_error(e, json!({"path": i})))?;
                boundary_rows(&mut bound, i, &d);
                convergence_rows(&mut conv, i, &g);
            }
        }
        FamilyJson::Curves { curves } => {
            let slopes = parse_slopes(&curves)?;
            let words: Vec<(String, Word)> = slopes
                .iter()
                .map(|&c| (c.to_string(), surface::slope_word(c)))
                .collect();
            curve_paths(ctx, &words, &paths, &mut bound, &mut conv)?;
        }
        FamilyJson::Words { words } => {
            let words = words
                .into_iter()
                .map(|(n, w)| Ok((n, Word::parse(&w).map_err(schema)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            curve_paths(ctx, &words, &paths, &mut bound, &mut conv)?;
        }
    }
    ctx.emit("boundary.csv", &bound.render())?;
    ctx.emit("convergence.csv", &conv.render())
}

fn curve_paths(
    ctx: &Ctx,
    words: &[(String, Word)],
    paths: &[PathJson],
    bound: &mut Csv,
    conv: &mut Csv,
) -> Result<(), CliError> {
    let t0 = ctx.common.t0;
    let f = surface::word_family(words).map_err(schema)?;
    // a, b, ab only: Markov paths can run in log-trace coordinates
    let triple_words: Vec<String> = ["a", "b", "ab"].iter().map(|s| s.to_string()).collect();
    let plain = words.len() == 3
        && words
            .iter()
            .zip(&triple_words)
            .all(|((_, w), t)| &w.to_string() == t);
    for (i, p) in paths.iter().enumerate() {
        let ctx_json = json!({"path": i});
        let (d, g) = match p {
            PathJson::Explicit { .. } => return Err(schema("curve families take iterated paths")),
            PathJson::Iterated { rule, params } => match rule.as_str() {
                "twist" => {
                    let tp: TwistParams = decode(params, "twist params")?;
                    let rho = start_rep(tp.triple, tp.representation.as_ref())?;
                    let s: Slope = tp.slope.parse().map_err(schema)?;
                    let path = ctx.tune(
                        surface::twist_path(&rho, s)
                            .map_err(|e| surface_error(e, ctx_json.clone()))?,
                    );
                    boundary_limit(&f, &path, t0).map_err(|e| family_error(e, ctx_json.clone()))?
                }
                "markov" => {
                    let mp: MarkovParams = decode(params, "markov params")?;
                    let [x, y, z] = mp.triple.unwrap_or([3.0; 3]);
                    let start = TraceTriple::new(x, y, z);
                    if plain {
                        let path: PathSpec<LogTriple> =
                            ctx.tune(surface::markov_path(start, &mp.moves).map_err(schema)?);
                        let tf = surface::triple_family();
                        let (d, g) = boundary_limit(&tf, &path, t0)
                            .map_err(|e| family_error(e, ctx_json.clone()))?;
                        let names = words.iter().map(|(n, _)| n.clone()).collect();
                        (
                            BoundaryDirection {
                                names,
                                coords: d.coords,
                            },
                            g,
                        )
                    } else {
                        let rho = start.representation().map_err(schema)?;
                        let path: PathSpec<MarkedRep> = ctx.tune(
                            surface::markov_word_path(&rho, &mp.moves)
                                .map_err(schema)?
                                .with_max_steps(ctx.common.max_steps.unwrap_or(24)),
                        );
                        boundary_limit(&f, &path, t0)
                            .map_err(|e| family_error(e, ctx_json.clone()))?
                    }
                }
                other => return Err(schema(format!("unknown path rule {other:?}"))),
            },
        };
        boundary_rows(bound, i, &d);
        convergence_rows(conv, i, &g);
        println!(
            "path {i}: {}",
            d.names
                .iter()
                .zip(&d.coords)
                .map(|(n, c)| format!("{n}={c:.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    Ok(())
}

fn parse_slopes(v: &[String]) -> Result<Vec<Slope>, CliError> {
    v.iter()
        .map(|s| s.parse::<Slope>().map_err(schema))
        .collect()
}

fn lengths(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let rj: RepresentationJson = decode(&inputs["representation"], "representation")?;
    let rep = Representation::try_from(&rj).map_err(schema)?;
    let words: Vec<String> = decode(&inputs["words"], "words")?;
    let mut t = ctx.csv(["word", "trace", "e", "ell", "J"]);
    for w in &words {
        let word = Word::parse(w).map_err(schema)?;
        let m = charvar::evaluate_word(&rep, &word).map_err(schema)?;
        let tr = m.trace();
        // elliptic and parabolic words have no eigenvalue gap
        let (e, ell) = match charvar::eigen_ratio(&m) {
            Ok(e) => (num(e), num(e.ln())),
            Err(_) => ("nan".into(), "nan".into()),
        };
        println!("{w}: trace {tr} e {e} ell {ell} J {}", tr.abs());
        t.push(vec![word.to_string(), num(tr), e, ell, num(tr.abs())]);
    }
    ctx.emit("lengths.csv", &t.render())
}

fn twist_degenerate(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let triple: Vec<f64> = decode(&inputs["triple"], "triple")?;
    let [x, y, z] = triple[..] else {
        return Err(schema("--triple takes three numbers"));
    };
    let start = TraceTriple::new(x, y, z);
    start.check().map_err(schema)?;
    let rho = start.representation().map_err(schema)?;
    let slopes = parse_slopes(&decode::<Vec<String>>(&inputs["slope"], "slope")?)?;
    let curves = parse_slopes(&decode::<Vec<String>>(&inputs["curves"], "curves")?)?;
    let steps = ctx.common.max_steps.unwrap_or(60);
    let mut cols = vec!["slope".to_string(), "k".into()];
    cols.extend(curves.iter().map(|c| format!("ell_{c}")));
    cols.extend(curves.iter().map(|c| format!("n_{c}")));
    let mut spec = ctx.csv(cols);
    let mut cols = vec!["label".to_string()];
    cols.extend(direction_columns(curves.len()));
    cols.extend(["angle_to_intersection".to_string(), "steps".into()]);
    let mut points = ctx.csv(cols);
    points.comment(format!(
        "curves {}",
        curves
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    for &s in &slopes {
        let context = json!({"slope": s.to_string()});
        let path = ctx
            .tune(surface::twist_path(&rho, s).map_err(schema)?)
            .with_max_steps(steps);
        let (d, g) = surface::limit_spectrum(&path, &curves, ctx.common.t0)
            .map_err(|e| surface_error(e, context))?;
        for row in
            surface::twist_table(&rho, s, &curves, g.steps.saturating_sub(1)).map_err(schema)?
        {
            let mut r = vec![s.to_string(), row.k.to_string()];
            r.extend(row.lengths.iter().chain(&row.normalized).map(|&v| num(v)));
            spec.push(r);
        }
        let angle = surface::intersection_direction(s, &curves)
            .map(|i| logmap::angle(&d.coords, &i.coords))
            .unwrap_or(f64::NAN);
        println!(
            "{s}: ({}) angle to intersection vector {angle:.2e} after {} steps",
            d.coords
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            g.steps
        );
        let mut r = vec![s.to_string()];
        r.extend(d.coords.iter().map(|&c| num(c)));
        r.extend([num(angle), g.steps.to_string()]);
        points.push(r);
    }
    ctx.emit("spectrum.csv", &spec.render())?;
    ctx.emit("limits.csv", &points.render())
}

fn hilbert_cmd(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let dj: DomainJson = decode(&inputs["domain"], "domain")?;
    let domain = ConvexDomain::try_from(&dj).map_err(schema)?;
    let rows: Vec<Vec<f64>> = decode(&inputs["matrix"], "matrix")?;
    let m = Matrix::from_rows(&rows).ok_or_else(|| schema("matrix must be square"))?;
    let m = match m.size() {
        2 => hilbert::klein_isometry(&m).map_err(schema)?,
        3 => m,
        n => return Err(schema(format!("matrix must be 2x2 or 3x3, got {n}x{n}"))),
    };
    let x0 = match inputs["x0"].as_array() {
        Some(_) => {
            let v: Vec<f64> = decode(&inputs["x0"], "x0")?;
            let [a, b] = v[..] else {
                return Err(schema("--x0 takes two numbers"));
            };
            [a, b]
        }
        None => domain.center(),
    };
    let steps = inputs["steps"].as_u64().unwrap_or(50) as usize;
    let report = match hilbert::displacement_rate(&domain, &m, &x0, steps) {
        Ok(r) => r,
        Err(HilbertError::ExitedInterior(k)) => {
            return Err(CliError::NoConvergence {
                message: format!("orbit left the numerical interior at step {k}"),
                diagnostics: json!({"error": "exited_interior", "step": k, "x0": x0}),
            })
        }
        Err(e) => return Err(schema(e)),
    };
    let mut t = ctx.csv(["k", "distance", "rate"]);
    for (i, (d, c)) in report.distances.iter().zip(&report.cesaro).enumerate() {
        t.push(vec![(i + 1).to_string(), num(*d), num(*c)]);
    }
    println!("rate {} after {steps} steps", report.rate);
    ctx.emit("orbit.csv", &t.render())
}

fn plot(ctx: &mut Ctx, inputs: &Value) -> Result<(), CliError> {
    let text = inputs["csv"].as_str().unwrap_or_default();
    let csv = Csv::parse(text).map_err(schema)?;
    let chart = output::chart_from_csv(&csv).map_err(schema)?;
    let stem = inputs["name"].as_str().unwrap_or("plot");
    ctx.emit(&format!("{stem}.svg"), &output::render_svg(&chart))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_surface_counts() {
        assert_eq!(cube_directions(2, 1).len(), 8);
        assert_eq!(cube_directions(3, 2).len(), 125 - 27);
    }

    #[test]
    fn bad_arguments_are_schema_errors() {
        assert_eq!(
            run(["logcompact", "no-such-command"].map(OsString::from)),
            2
        );
        assert_eq!(run(["logcompact", "--help"].map(OsString::from)), 0);
    }
}
