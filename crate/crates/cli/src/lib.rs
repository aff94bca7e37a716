//! Command dispatch and report assembly for the `freegeo` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use freegeo::free_space::{
    dual_face, free_norm, is_gateaux, norming_functional, optimal_representation, FreeError,
};
use freegeo::gallery::{gallery, FamilyKind, GalleryError, GalleryItem, MetricFamily, Params};
use freegeo::io::{
    parse_element, parse_function, space_to_json, ElementInput, IoError, PointRef, SpaceSpec,
};
use freegeo::lip::{aux_f_xy, LipError};
use freegeo::metric::{validate_matrix, MetricError, PointedMetricSpace};
use freegeo::pair_geometry::{
    analyze_pair, classify_space, family_trend, trend_csv, GeometryError,
};
use freegeo::ssd::{
    bilipschitz_distortion, exposedness_probe, find_common_norming, modulus_csv, petr_certificate,
    petr_gamma_cut, petr_n0, slab_point, ssd1_gamma_eps, ssd1_perturb, Main1Setup,
    PerturbationStatus, SsdError,
};
use freegeo::tol::Tolerances;
use freegeo::{FreeElement, LipFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Gallery,
    Norm,
    Represent,
    ClassifyPair,
    ClassifySpace,
    FamilyTrend,
    Modulus,
    Perturb,
    Ssd1,
    CertifyPetr,
    Distort,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn statement(self) -> &'static str {
        match self {
            Command::Validate => "d is a metric: zero diagonal, symmetric, positive off the diagonal, triangle inequality",
            Command::Gallery => "named test space or family truncation",
            Command::Norm => "||mu|| = min transport cost of mu = max <f, mu> over 1-Lipschitz f with f(0) = 0",
            Command::Represent => "an optimal flow gives a molecule combination whose weights sum to ||mu||",
            Command::ClassifyPair => {
                "(x, y) has property (G) iff eta = inf_z G_z(x, y) > 0, and then f_xy peaks at (x, y)"
            }
            Command::ClassifySpace => "the space is locally uniformly non-aligned iff every pair has eta > 0",
            Command::FamilyTrend => "eta and rotundity constant of the distinguished pair along a family",
            Command::Modulus => {
                "sampled lower bound for sup { dist(f, D(mu)) : lip(f) <= 1, <f, mu> >= ||mu|| (1 - eta) }"
            }
            Command::Perturb => {
                "on (M, d_gamma), a 1-Lipschitz g with <g, mu> > 1 - rho lies within max(eps, beta eps / gamma) + 2 sqrt(eps) of a psi attaining its norm at mu"
            }
            Command::Ssd1 => {
                "if f peaks at (x, y) with constant gamma, then g with <g, m_xy> > 1 - gamma_eps is within eps of a function attaining its norm at m_xy"
            }
            Command::CertifyPetr => {
                "on a Petr truncation, f with <f, m_xy> > 1 - gamma_cut is within 4 eps of h with <h, m_xy> = 1"
            }
            Command::Distort => "id: (M, d) -> (M, d_gamma) has bi-Lipschitz distortion 1 + gamma / theta",
        }
    }

    fn needs_seed(self) -> bool {
        matches!(self, Command::Modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One invocation of the tool.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "freegeo",
    version,
    about = "Geometry of Lipschitz-free spaces over finite pointed metric spaces"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Space JSON: `{"n", "labels", "dist"}` or `{"family", "params", "index"}`.
    #[arg(long, conflicts_with = "gallery")]
    pub space: Option<String>,
    /// Named gallery space or family.
    #[arg(long)]
    pub gallery: Option<String>,
    /// Gallery parameters as `K=V`, repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<String>,
    /// Element JSON (file or inline): `{"masses"}` or `{"molecules": [[l, x, y]]}`.
    #[arg(long)]
    pub element: Option<String>,
    /// Function JSON `{"values"}` on the input space (`f` for perturb, `certify-petr`).
    #[arg(long)]
    pub function: Option<String>,
    /// Function JSON `{"values"}` to perturb (on the fattened space for `perturb`).
    #[arg(long)]
    pub g: Option<String>,
    /// Pair `x,y` by index or label.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pair: Vec<String>,
    /// Fattening amount (`perturb`, `distort`)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Target accuracy (`perturb`, `ssd1`, `certify-petr`)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Slab depths for `modulus`, comma separated
    #[arg(long, value_delimiter = ',')]
    pub eta_grid: Vec<f64>,
    /// Slab points sampled per depth (`modulus`)
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Seed for sampling; required by `modulus`, optional elsewhere
    #[arg(long)]
    pub seed: Option<u64>,
    /// Family truncation index (`certify-petr`) or highest index (`family-trend`).
    #[arg(long)]
    pub index: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format; CSV only for `modulus` and `family-trend`
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Free(#[from] FreeError),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ssd(#[from] SsdError),
}

impl CliError {
    /// 2 for violated preconditions and bad parameters, 1 for I/O and
    /// solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Gallery(
                GalleryError::InvalidParam { .. } | GalleryError::UnknownParam(_),
            ) => 2,
            CliError::Ssd(e) if e.is_precondition() => 2,
            CliError::Metric(MetricError::NotMetric(_))
            | CliError::Io(IoError::Metric(MetricError::NotMetric(_))) => 2,
            _ => 1,
        }
    }
}

/// A finished report and the exit code it maps to.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads a file, or takes the argument itself when it is inline JSON.
fn read_arg(arg: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|source| CliError::Read {
        path: arg.to_string(),
        source,
    })
}

fn parse_params(raw: &[String]) -> Result<Params, CliError> {
    let mut params = Params::new();
    for kv in raw.iter().filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("parameter `{kv}` is not of the form K=V")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        params.insert(k.trim().to_string(), v);
    }
    Ok(params)
}

/// What `--space`/`--gallery` resolved to, with its echo for the report.
struct SpaceInput {
    space: Arc<PointedMetricSpace>,
    echo: Value,
}

impl RunConfig {
    fn space_spec(&self) -> Result<SpaceSpec, CliError> {
        match (&self.space, &self.gallery) {
            (Some(s), _) => Ok(serde_json::from_str(&read_arg(s)?).map_err(IoError::from)?),
            (None, Some(name)) => Ok(SpaceSpec::Family {
                family: name.clone(),
                params: parse_params(&self.params)?,
                index: self.index,
            }),
            (None, None) => Err(usage("this command needs --space FILE or --gallery NAME")),
        }
    }

    fn load_space(&self) -> Result<SpaceInput, CliError> {
        let spec = self.space_spec()?;
        let space = Arc::new(spec.resolve()?);
        Ok(SpaceInput {
            space,
            echo: serde_json::to_value(&spec).expect("plain data"),
        })
    }

    fn family(&self) -> Result<MetricFamily, CliError> {
        let name = self
            .gallery
            .as_deref()
            .ok_or_else(|| usage("this command needs --gallery FAMILY"))?;
        let mut params = parse_params(&self.params)?;
        params.remove("index");
        match gallery(name, &params)? {
            GalleryItem::Family(f) => Ok(f),
            GalleryItem::Space(_) => {
                Err(usage(format!("`{name}` is a single space, not a family")))
            }
        }
    }

    fn element(&self, space: &Arc<PointedMetricSpace>) -> Result<(ElementInput, Value), CliError> {
        let arg = self
            .element
            .as_deref()
            .ok_or_else(|| usage("this command needs --element"))?;
        let text = read_arg(arg)?;
        let echo: Value = serde_json::from_str(&text).map_err(IoError::from)?;
        Ok((parse_element(&text, space)?, echo))
    }

    fn function(arg: &str, space: &Arc<PointedMetricSpace>) -> Result<LipFunction, CliError> {
        Ok(parse_function(&read_arg(arg)?, space)?)
    }

    fn pair(&self, space: &PointedMetricSpace) -> Result<(usize, usize), CliError> {
        if self.pair.len() != 2 {
            return Err(usage("this command needs --pair X,Y"));
        }
        // labels take precedence over indices
        let point = |s: &str| PointRef::Label(s.to_string()).resolve(space);
        let (x, y) = (point(&self.pair[0])?, point(&self.pair[1])?);
        space.check_pair(x, y)?;
        Ok((x, y))
    }

    fn gamma(&self) -> Result<f64, CliError> {
        match self.gamma {
            Some(g) if g > 0.0 && g.is_finite() => Ok(g),
            Some(g) => Err(usage(format!("--gamma must be positive, got {g}"))),
            None => Err(usage("this command needs --gamma")),
        }
    }

    fn epsilon(&self, upper: f64) -> Result<f64, CliError> {
        match self.epsilon {
            Some(e) if e > 0.0 && e < upper => Ok(e),
            Some(e) => Err(usage(format!(
                "--epsilon must lie in (0, {upper}), got {e}"
            ))),
            None => Err(usage("this command needs --epsilon")),
        }
    }
}

struct Report {
    status: &'static str,
    inputs: Value,
    result: Value,
    csv: Option<String>,
}

impl Report {
    fn ok(inputs: Value, result: impl Serialize) -> Self {
        Self {
            status: "ok",
            inputs,
            result: to_value(result),
            csv: None,
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

/// Runs one command and writes the report to `--out` or returns it.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    if config.command.needs_seed() && config.seed.is_none() {
        return Err(usage(format!("`{}` needs --seed", config.command.name())));
    }
    let report = dispatch(config)?;
    let text = match config.format {
        Format::Csv => report.csv.ok_or_else(|| {
            usage(format!(
                "`{}` has no CSV form; use --format json",
                config.command.name()
            ))
        })?,
        Format::Json => {
            let tol = Tolerances::current();
            let doc = json!({
                "command": config.command.name(),
                "version": freegeo::VERSION,
                "tolerances": tol,
                "statement": config.command.statement(),
                "status": report.status,
                "inputs": report.inputs,
                "result": report.result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report data serializes");
            s.push('\n');
            s
        }
    };
    let exit_code = match report.status {
        "ok" | "certified" => 0,
        _ => 2,
    };
    if let Some(path) = &config.out {
        write_file(path, &text)?;
    }
    Ok(Outcome {
        report: text,
        exit_code,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn dispatch(c: &RunConfig) -> Result<Report, CliError> {
    match c.command {
        Command::Validate => validate(c),
        Command::Gallery => gallery_cmd(c),
        Command::Norm => norm(c),
        Command::Represent => represent(c),
        Command::ClassifyPair => {
            let s = c.load_space()?;
            let (x, y) = c.pair(&s.space)?;
            let r = analyze_pair(&s.space, x, y)?;
            Ok(Report::ok(json!({ "space": s.echo, "pair": [x, y] }), r))
        }
        Command::ClassifySpace => {
            let s = c.load_space()?;
            Ok(Report::ok(
                json!({ "space": s.echo }),
                classify_space(&s.space)?,
            ))
        }
        Command::FamilyTrend => {
            let family = c.family()?;
            let last = c.index.unwrap_or(10);
            if last < 1 {
                return Err(usage("--index must be at least 1"));
            }
            let indices: Vec<usize> = (1..=last).collect();
            let rows = family_trend(&family, &indices)?;
            let mut r = Report::ok(json!({ "family": family, "max_index": last }), &rows);
            r.csv = Some(trend_csv(&rows));
            Ok(r)
        }
        Command::Modulus => modulus(c),
        Command::Perturb => perturb(c),
        Command::Ssd1 => ssd1(c),
        Command::CertifyPetr => certify_petr(c),
        Command::Distort => {
            let s = c.load_space()?;
            let gamma = c.gamma()?;
            let theta = s.space.uniform_discreteness_constant()?;
            let distortion = bilipschitz_distortion(&s.space, gamma)?;
            let fattened = s.space.gamma_fatten(gamma)?;
            let fat: Value =
                serde_json::from_str(&space_to_json(&fattened)).expect("own output parses");
            Ok(Report::ok(
                json!({ "space": s.echo, "gamma": gamma }),
                json!({ "theta": theta, "distortion": distortion, "fattened": fat }),
            ))
        }
    }
}

fn validate(c: &RunConfig) -> Result<Report, CliError> {
    let spec = c.space_spec()?;
    let report = match &spec {
        SpaceSpec::Explicit { n, dist, .. } => {
            if dist.len() != *n {
                return Err(IoError::SizeMismatch {
                    n: *n,
                    rows: dist.len(),
                }
                .into());
            }
            validate_matrix(dist)?
        }
        SpaceSpec::Family { .. } => {
            let s = spec.resolve()?;
            let n = s.len();
            validate_matrix(
                &(0..n)
                    .map(|i| (0..n).map(|j| s.d(i, j)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            )?
        }
    };
    let status = if report.ok { "ok" } else { "invalid" };
    Ok(Report {
        status,
        inputs: json!({ "space": spec }),
        result: to_value(&report),
        csv: None,
    })
}

fn gallery_cmd(c: &RunConfig) -> Result<Report, CliError> {
    let name = c
        .gallery
        .as_deref()
        .ok_or_else(|| usage("`gallery` needs --gallery NAME"))?;
    let mut params = parse_params(&c.params)?;
    if let Some(i) = c.index {
        params.insert("index".into(), i as f64);
    }
    let inputs = json!({ "gallery": name, "params": params });
    match gallery(name, &params)? {
        GalleryItem::Space(s) => {
            let space: Value = serde_json::from_str(&space_to_json(&s)).expect("own output parses");
            Ok(Report::ok(
                inputs,
                json!({ "space": space, "diameter": s.diameter() }),
            ))
        }
        GalleryItem::Family(f) => Ok(Report::ok(inputs, json!({ "family": f }))),
    }
}

fn norm(c: &RunConfig) -> Result<Report, CliError> {
    let s = c.load_space()?;
    let (e, echo) = c.element(&s.space)?;
    let mu = e.element();
    let r = free_norm(&mu)?;
    let gateaux = if mu.is_zero() {
        None
    } else {
        Some(is_gateaux(&mu, 1e-7)?)
    };
    let flow: Vec<Value> = r
        .flow
        .iter()
        .map(|&(p, q, w)| json!({ "from": p, "to": q, "mass": w }))
        .collect();
    Ok(Report::ok(
        json!({ "space": s.echo, "element": echo }),
        json!({
            "value": r.value,
            "flow_value": r.flow_value,
            "lip_value": r.lip_value,
            "flow": flow,
            "norming_functional": r.functional,
            "gateaux": gateaux,
            "flow_certificate": r.flow_certificate,
            "lip_certificate": r.lip_certificate,
        }),
    ))
}

fn represent(c: &RunConfig) -> Result<Report, CliError> {
    let s = c.load_space()?;
    let (e, echo) = c.element(&s.space)?;
    let mu = e.element();
    let combo = optimal_representation(&mu)?;
    let face = dual_face(&mu)?;
    let ranges = face.coordinate_ranges()?;
    let molecules: Vec<Value> = combo
        .terms()
        .iter()
        .map(|m| json!([m.lambda, m.x, m.y]))
        .collect();
    Ok(Report::ok(
        json!({ "space": s.echo, "element": echo }),
        json!({
            "norm": face.norm,
            "total_weight": combo.total_weight(),
            "molecules": molecules,
            "face_coordinate_ranges": ranges,
        }),
    ))
}

fn modulus(c: &RunConfig) -> Result<Report, CliError> {
    let s = c.load_space()?;
    let (e, echo) = c.element(&s.space)?;
    if c.eta_grid.is_empty() {
        return Err(usage("`modulus` needs --eta-grid a,b,c"));
    }
    let seed = c.seed.expect("checked in run");
    let curve = exposedness_probe(&e.element(), &c.eta_grid, c.samples, seed)?;
    let inputs = json!({
        "space": s.echo, "element": echo, "eta_grid": c.eta_grid, "samples": c.samples, "seed": seed,
    });
    let mut r = Report::ok(inputs, &curve);
    r.csv = Some(modulus_csv(&curve));
    Ok(r)
}

fn perturb(c: &RunConfig) -> Result<Report, CliError> {
    let s = c.load_space()?;
    let (e, echo) = c.element(&s.space)?;
    let gamma = c.gamma()?;
    let epsilon = c.epsilon(1.0)?;
    let combo = e
        .combination()
        .ok_or_else(|| usage("`perturb` needs the element as {\"molecules\": ...}"))?;
    let mut inputs =
        json!({ "space": s.echo, "element": echo, "gamma": gamma, "epsilon": epsilon });
    let precondition = |e: SsdError, inputs: Value| -> Result<Report, CliError> {
        if e.is_precondition() {
            Ok(Report {
                status: "precondition_failed",
                inputs,
                result: json!({ "message": e.to_string() }),
                csv: None,
            })
        } else {
            Err(e.into())
        }
    };
    let f = match &c.function {
        Some(arg) => RunConfig::function(arg, &s.space)?,
        None => match find_common_norming(&s.space, combo) {
            Ok(f) => f,
            Err(e) => return precondition(e, inputs),
        },
    };
    let setup = match Main1Setup::prepare(&s.space, gamma, combo, &f, epsilon) {
        Ok(setup) => setup,
        Err(e) => return precondition(e, inputs),
    };
    let (g, g_source) = match (&c.g, c.seed) {
        (Some(arg), _) => (
            RunConfig::function(arg, &setup.fattened)?,
            "input".to_string(),
        ),
        (None, Some(seed)) => {
            let depth = 0.5 * setup.rho();
            (
                slab_point(&setup.mu, depth, seed)?,
                format!("slab point at depth rho/2 = {depth}"),
            )
        }
        (None, None) => (
            norming_functional(&setup.mu)?,
            "norming functional of mu".to_string(),
        ),
    };
    inputs["g_source"] = json!(g_source);
    inputs["seed"] = json!(c.seed);
    let result = setup.run(&g)?;
    let status = match result.status {
        PerturbationStatus::Certified => "certified",
        PerturbationStatus::RhoTooLarge => "rho_too_large",
        PerturbationStatus::PreconditionFailed => "precondition_failed",
    };
    Ok(Report {
        status,
        inputs,
        result: json!({ "setup_f": setup.f, "g_gamma": setup.g_gamma, "run": result }),
        csv: None,
    })
}

fn ssd1(c: &RunConfig) -> Result<Report, CliError> {
    let s = c.load_space()?;
    let (x, y) = c.pair(&s.space)?;
    let epsilon = c.epsilon(4.0)?;
    let f = aux_f_xy(&s.space, x, y)?;
    let gamma_peak = match f.peaking_check(x, y)? {
        Some(gp) => gp,
        None => {
            return Ok(Report {
                status: "precondition_failed",
                inputs: json!({ "space": s.echo, "pair": [x, y], "epsilon": epsilon }),
                result: json!({ "message": "the pair does not have property (G); f_xy does not peak" }),
                csv: None,
            })
        }
    };
    let gamma_eps = ssd1_gamma_eps(epsilon, gamma_peak);
    let mu = FreeElement::molecule(s.space.clone(), x, y)?;
    let (g, source) = match (&c.g, c.seed) {
        (Some(arg), _) => (RunConfig::function(arg, &s.space)?, "input".to_string()),
        (None, Some(seed)) => (
            slab_point(&mu, 0.5 * gamma_eps, seed)?,
            format!("slab point at depth {}", 0.5 * gamma_eps),
        ),
        (None, None) => (
            norming_functional(&mu)?,
            "norming functional of m_xy".to_string(),
        ),
    };
    let inputs = json!({
        "space": s.echo, "pair": [x, y], "epsilon": epsilon, "seed": c.seed, "g_source": source,
    });
    match ssd1_perturb(x, y, &f, gamma_peak, &g, epsilon) {
        Ok(r) => Ok(Report {
            status: "certified",
            inputs,
            result: json!({ "f_xy": f, "peaking_constant": gamma_peak, "g": g, "perturbation": r }),
            csv: None,
        }),
        Err(e) if e.is_precondition() => Ok(Report {
            status: "precondition_failed",
            inputs,
            result: json!({ "message": e.to_string(), "peaking_constant": gamma_peak, "gamma_eps": gamma_eps }),
            csv: None,
        }),
        Err(e) => Err(e.into()),
    }
}

fn certify_petr(c: &RunConfig) -> Result<Report, CliError> {
    let family = match &c.gallery {
        Some(_) => c.family()?,
        None => MetricFamily::petr(),
    };
    if !matches!(family.kind, FamilyKind::Petr { .. }) {
        return Err(usage("`certify-petr` needs a Petr family"));
    }
    let index = c.index.unwrap_or(12);
    let epsilon = c.epsilon(1.0)?;
    let space = Arc::new(family.generate(index)?.space);
    let (f, source) = match (&c.function, c.seed) {
        (Some(arg), _) => (RunConfig::function(arg, &space)?, "input".to_string()),
        (None, seed) => {
            let mu = FreeElement::molecule(space.clone(), 0, 1)?;
            match seed {
                Some(seed) => {
                    let n0 = petr_n0(&family, epsilon)?.min(index);
                    let depth = 0.5 * petr_gamma_cut(&family, n0, epsilon)?.gamma;
                    (
                        slab_point(&mu, depth, seed)?,
                        format!("slab point at depth gamma_cut/2 = {depth}"),
                    )
                }
                None => (
                    norming_functional(&mu)?,
                    "norming functional of m_xy".to_string(),
                ),
            }
        }
    };
    let inputs = json!({
        "family": family, "index": index, "epsilon": epsilon, "seed": c.seed, "f_source": source,
    });
    match petr_certificate(&family, index, epsilon, &f) {
        Ok(cert) => {
            let status = if cert.certified {
                "certified"
            } else {
                "not_certified"
            };
            Ok(Report {
                status,
                inputs,
                result: json!({ "f": f, "certificate": cert }),
                csv: None,
            })
        }
        Err(e) if e.is_precondition() => Ok(Report {
            status: "precondition_failed",
            inputs,
            result: json!({ "message": e.to_string() }),
            csv: None,
        }),
        Err(e) => Err(e.into()),
    }
}
