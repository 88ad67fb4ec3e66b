//! Command-line front end: argument parsing, layered configuration and
//! deterministic JSON/CSV emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use fibercert_core::brackets::verify_commutation;
use fibercert_core::critical::{singleton_check, TOL_SINGLETON};
use fibercert_core::displacement::{classify_fibers, Displacer, Grid, SearchBudget};
use fibercert_core::dynamics::conservation_report;
use fibercert_core::fiberscan::{projection_coverage, sample_fiber};
use fibercert_core::systems::{self, CATALOG};
use fibercert_core::{sampling, Error, FlowSpec, IntegrableSystem, Method, PhasePoint, SigmaSet};

pub const SCHEMA_VERSION: &str = "fibercert/1";
/// Commutation threshold for a passing `commute` run.
pub const COMMUTE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "fibercert", version, about = "Critical fibers and displacement certificates for integrable systems")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List systems, parameter defaults and predicted critical values.
    Catalog(Common),
    /// Minimax value, critical set and singleton check.
    Critical(Common),
    /// Largest pairwise Poisson bracket over seeded points.
    Commute(Common),
    /// Integrate the flow of the first component; CSV trajectory goes to --out.
    Flow(Common),
    /// Displacement certificates for levels (--level) or fibers (--fiber).
    Displace(Common),
    /// Sample a fiber, classify ranks and measure projection coverage.
    Fiber(Common),
    /// Summary over the whole catalog.
    Report(Common),
}

/// Options shared by every subcommand. Each one may also come from the
/// `--config` file under the same name (with `_` for `-`).
#[derive(Debug, Default, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub system: Option<String>,
    /// Comma-separated `key=value` pairs.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid density (verification, coverage) or sample count (commute).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated levels `c`.
    #[arg(long)]
    pub level: Option<String>,
    /// Fiber values; components separated by `,`, fibers by `;`.
    #[arg(long)]
    pub fiber: Option<String>,
    /// `zero` or `sphere:r`.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Multistart seeds for `fiber`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// `symmetric` or `adaptive`.
    #[arg(long)]
    pub method: Option<String>,
    /// `json` or `markdown` (report), `json` or `csv` (fiber).
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::Parameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Result of a command: the primary document and whether it verified.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub verified: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.verified {
            0
        } else {
            1
        }
    }
}

const KEYS: &[&str] = &[
    "system", "params", "seed", "grid", "level", "fiber", "sigma", "out", "samples", "t_end", "h", "method", "format",
];

/// Command-line values layered over the configuration file.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(common: &Common) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = &common.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| CliError::Usage(format!("config line {} is not key = value", n + 1)))?;
                let k = k.trim().replace('-', "_");
                if !KEYS.contains(&k.as_str()) {
                    return Err(CliError::Usage(format!("unknown config key '{k}'")));
                }
                values.insert(k, v.trim().to_string());
            }
        }
        let cli: [(&str, Option<String>); 13] = [
            ("system", common.system.clone()),
            ("params", common.params.clone()),
            ("seed", common.seed.map(|v| v.to_string())),
            ("grid", common.grid.map(|v| v.to_string())),
            ("level", common.level.clone()),
            ("fiber", common.fiber.clone()),
            ("sigma", common.sigma.clone()),
            ("out", common.out.as_ref().map(|p| p.display().to_string())),
            ("samples", common.samples.map(|v| v.to_string())),
            ("t_end", common.t_end.map(|v| v.to_string())),
            ("h", common.h.map(|v| v.to_string())),
            ("method", common.method.clone()),
            ("format", common.format.clone()),
        ];
        for (k, v) in cli {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| CliError::Usage(format!("cannot parse --{key} '{s}'"))),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parsed("seed", 0)
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.get("out").map(PathBuf::from)
    }

    pub fn system(&self) -> Result<IntegrableSystem, CliError> {
        let name = self.get("system").ok_or_else(|| CliError::Usage("--system is required".into()))?;
        let params = parse_params(self.get("params").unwrap_or(""))?;
        Ok(systems::from_name(name, &params)?)
    }

    pub fn sigma(&self, system: &IntegrableSystem) -> Result<SigmaSet, CliError> {
        parse_sigma(self.get("sigma").unwrap_or("zero"), system)
    }

    pub fn levels(&self) -> Result<Vec<f64>, CliError> {
        self.get("level").map(parse_floats).transpose().map(Option::unwrap_or_default)
    }

    pub fn fibers(&self) -> Result<Vec<Vec<f64>>, CliError> {
        match self.get("fiber") {
            None => Ok(Vec::new()),
            Some(s) => s.split(';').filter(|t| !t.trim().is_empty()).map(parse_floats).collect(),
        }
    }
}

pub fn parse_params(s: &str) -> Result<Vec<(String, f64)>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("parameter '{kv}' is not key=value")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("parameter '{kv}' has no numeric value")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("'{t}' is not a number"))))
        .collect()
}

pub fn parse_sigma(s: &str, system: &IntegrableSystem) -> Result<SigmaSet, CliError> {
    let space = *system.space();
    if s == "zero" {
        return Ok(SigmaSet::zero(space));
    }
    if let Some(r) = s.strip_prefix("sphere:") {
        let r: f64 = r.parse().map_err(|_| CliError::Usage(format!("bad sphere radius in '{s}'")))?;
        return Ok(SigmaSet::sphere_bundle(space, r)?);
    }
    Err(CliError::Usage(format!("--sigma must be 'zero' or 'sphere:r', got '{s}'")))
}

/// Pretty JSON with every float written to 17 significant digits.
struct Exact(PrettyFormatter<'static>);

impl Formatter for Exact {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Serializes `body` with the schema header.
pub fn to_json<T: Serialize>(command: &str, body: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(PrettyFormatter::new()));
    Envelope { schema_version: SCHEMA_VERSION, command, body }
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (name, common) = match &cli.command {
        Command::Catalog(c) => ("catalog", c),
        Command::Critical(c) => ("critical", c),
        Command::Commute(c) => ("commute", c),
        Command::Flow(c) => ("flow", c),
        Command::Displace(c) => ("displace", c),
        Command::Fiber(c) => ("fiber", c),
        Command::Report(c) => ("report", c),
    };
    let s = Settings::resolve(common)?;
    let (doc, verified, side) = match &cli.command {
        Command::Catalog(_) => (cmd_catalog(), true, None),
        Command::Critical(_) => cmd_critical(&s)?,
        Command::Commute(_) => cmd_commute(&s)?,
        Command::Flow(_) => cmd_flow(&s)?,
        Command::Displace(_) => cmd_displace(&s)?,
        Command::Fiber(_) => cmd_fiber(&s)?,
        Command::Report(_) => cmd_report(&s)?,
    };
    let stdout = match doc {
        Doc::Json(v) => to_json(name, &v),
        Doc::Text(t) => t,
    };
    match (s.out(), side) {
        (Some(path), Some(extra)) => std::fs::write(path, extra)?,
        (Some(path), None) => std::fs::write(path, &stdout)?,
        _ => {}
    }
    Ok(Outcome { stdout, verified })
}

enum Doc {
    Json(serde_json::Value),
    Text(String),
}

/// Document, verification flag, and an optional side artifact for `--out`.
type CmdResult = Result<(Doc, bool, Option<String>), CliError>;

fn value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    space: String,
    params: Vec<(&'static str, f64)>,
    constraint: &'static str,
    components: &'static str,
    predicted_y0: &'static str,
}

fn cmd_catalog() -> Doc {
    let rows: Vec<CatalogRow> = CATALOG
        .iter()
        .map(|e| CatalogRow {
            name: e.name,
            space: format!("{:?}", e.space),
            params: e.params.to_vec(),
            constraint: e.constraint,
            components: e.components,
            predicted_y0: e.y0_formula,
        })
        .collect();
    Doc::Json(serde_json::json!({ "systems": value(&rows) }))
}

fn cmd_critical(s: &Settings) -> CmdResult {
    let sys = s.system()?;
    let sigma = s.sigma(&sys)?;
    let report = singleton_check(&sys, &sigma)?;
    let verified = match report.predicted_y0 {
        Some(_) => report.matches_prediction(),
        None => report.is_singleton,
    };
    Ok((Doc::Json(value(&report)), verified, None))
}

fn cmd_commute(s: &Settings) -> CmdResult {
    let sys = s.system()?;
    let n = s.parsed("grid", 1000usize)?;
    let r = verify_commutation(&sys, n, s.seed()?)?;
    let body = serde_json::json!({
        "system": sys.name(),
        "max_abs": r.max_abs,
        "samples": r.samples,
        "worst_point": r.worst_point.coords(),
        "tolerance": COMMUTE_TOL,
    });
    Ok((Doc::Json(body), r.max_abs <= COMMUTE_TOL, None))
}

fn cmd_flow(s: &Settings) -> CmdResult {
    let sys = s.system()?;
    let t_end = s.parsed("t_end", 50.0)?;
    let h = s.parsed("h", 1e-3)?;
    let spec = match s.get("method").unwrap_or("symmetric") {
        "symmetric" => FlowSpec::symmetric(t_end, h),
        "adaptive" => FlowSpec::adaptive(t_end, h),
        m => return Err(CliError::Usage(format!("--method must be symmetric or adaptive, got '{m}'"))),
    };
    spec.validate()?;
    let x0: PhasePoint = sampling::phase_points(sys.space(), 1, 1.0, s.seed()?)[0];
    let (report, traj) = conservation_report(&sys, &x0, &spec)?;
    let mut csv = String::from("t");
    let dim = x0.coords().len();
    for i in 0..dim {
        let _ = write!(csv, ",x{i}");
    }
    for n in sys.component_names() {
        let _ = write!(csv, ",{n}");
    }
    csv.push('\n');
    let dt = t_end / (traj.len() - 1) as f64;
    for (i, x) in traj.iter().enumerate() {
        csv.push_str(&num(i as f64 * dt));
        for v in x.coords().into_iter().chain(sys.eval(x)) {
            csv.push(',');
            csv.push_str(&num(v));
        }
        csv.push('\n');
    }
    let method = match spec.method {
        Method::Symmetric => "symmetric",
        Method::Adaptive { .. } => "adaptive",
    };
    let body = serde_json::json!({
        "system": sys.name(),
        "x0": x0.coords(),
        "t_end": t_end,
        "h": h,
        "method": method,
        "report": value(&report),
    });
    Ok((Doc::Json(body), true, Some(csv)))
}

fn cmd_displace(s: &Settings) -> CmdResult {
    let sys = s.system()?;
    let sigma = s.sigma(&sys)?;
    let seed = s.seed()?;
    let levels = s.levels()?;
    let fibers = s.fibers()?;
    if levels.is_empty() && fibers.is_empty() {
        return Err(CliError::Usage("displace needs --level or --fiber".into()));
    }
    let mut budget = SearchBudget::standard(sys.space(), seed);
    if s.get("grid").is_some() {
        budget.grid = Grid { density: s.parsed("grid", 0)?, seed };
    }
    let mut verified = true;
    let mut certificates = Vec::new();
    if !levels.is_empty() {
        let d = Displacer::for_system(&sys, sigma)?;
        for c in levels {
            match d.search(c, &budget) {
                Ok(cert) => {
                    verified &= cert.is_valid();
                    certificates.push(value(&cert));
                }
                Err(Error::SearchFailure { best_margin }) => {
                    verified = false;
                    certificates.push(serde_json::json!({ "y_or_c": c, "search_failure": { "best_margin": best_margin } }));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let classifications = if fibers.is_empty() {
        Vec::new()
    } else {
        classify_fibers(&sys, &fibers, sigma, &budget)?
    };
    let body = serde_json::json!({
        "system": sys.name(),
        "sigma": sigma.label(),
        "certificates": certificates,
        "fibers": value(&classifications),
    });
    Ok((Doc::Json(body), verified, None))
}

fn cmd_fiber(s: &Settings) -> CmdResult {
    let sys = s.system()?;
    let fibers = s.fibers()?;
    let [y] = fibers.as_slice() else {
        return Err(CliError::Usage("fiber needs exactly one --fiber value".into()));
    };
    if y.len() != sys.k() {
        return Err(CliError::Usage(format!("--fiber needs {} components", sys.k())));
    }
    let seed = s.seed()?;
    let sample = sample_fiber(&sys, y, s.parsed("samples", 200usize)?, seed);
    let grid_n = s.parsed("grid", 500usize)?;
    let grid = sampling::seeded_grid(sys.space(), grid_n, seed);
    let coverage = projection_coverage(&sys, y, &grid);
    let csv = match s.get("format").unwrap_or("json") {
        "json" => None,
        "csv" => {
            let mut t = String::from("point,rank");
            let dim = sample.points.first().map_or(0, |p| p.coords().len());
            for i in 0..dim {
                let _ = write!(t, ",x{i}");
            }
            t.push('\n');
            for (i, (p, r)) in sample.points.iter().zip(&sample.ranks).enumerate() {
                let _ = write!(t, "{i},{r}");
                for v in p.coords() {
                    t.push(',');
                    t.push_str(&num(v));
                }
                t.push('\n');
            }
            Some(t)
        }
        f => return Err(CliError::Usage(format!("--format must be json or csv, got '{f}'"))),
    };
    let body = serde_json::json!({
        "system": sys.name(),
        "sample": value(&sample),
        "coverage": { "fraction": coverage, "grid": grid_n, "seed": seed },
    });
    Ok((Doc::Json(body), true, csv))
}

#[derive(Serialize)]
struct ReportRow {
    system: String,
    params: Vec<(String, f64)>,
    #[serde(rename = "m_H")]
    m_h: f64,
    y0: Vec<f64>,
    predicted_y0: Option<Vec<f64>>,
    max_deviation: Option<f64>,
    is_singleton: bool,
    commutation_max: f64,
    certificate_level: f64,
    certificate_margin: Option<f64>,
    certificate_path: Option<String>,
    certificate_note: Option<String>,
}

/// One summary row: critical data, commutation and a certificate at the
/// midpoint of the range of `H` on Σ (one unit below `m_H` when `H|Σ` is constant).
fn report_row(sys: &IntegrableSystem, seed: u64) -> Result<ReportRow, CliError> {
    let sigma = SigmaSet::zero(*sys.space());
    let crit = singleton_check(sys, &sigma)?;
    let comm = verify_commutation(sys, 1000, seed)?;
    let d = Displacer::for_system(sys, sigma)?;
    let (lo, hi) = d.sigma_range();
    let level = if hi - lo > 1e-9 { (500.0 * (lo + hi)).round() / 1000.0 } else { hi - 1.0 };
    let (margin, path, note) = match d.search(level, &SearchBudget::standard(sys.space(), seed)) {
        Ok(c) => (Some(c.margin), Some(format!("{:?}", c.path).to_lowercase()), None),
        Err(e @ (Error::SearchFailure { .. } | Error::Construction { .. } | Error::Unverifiable(_))) => {
            (None, None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(ReportRow {
        system: sys.name().to_string(),
        params: sys.params().to_vec(),
        m_h: crit.m_h,
        y0: crit.y0,
        predicted_y0: crit.predicted_y0,
        max_deviation: crit.max_deviation_from_prediction,
        is_singleton: crit.is_singleton,
        commutation_max: comm.max_abs,
        certificate_level: level,
        certificate_margin: margin,
        certificate_path: path,
        certificate_note: note,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn cmd_report(s: &Settings) -> CmdResult {
    let seed = s.seed()?;
    let systems: Vec<IntegrableSystem> = match s.get("system") {
        Some(_) => vec![s.system()?],
        None => systems::catalog(),
    };
    let rows: Vec<ReportRow> = systems.iter().map(|sys| report_row(sys, seed)).collect::<Result<_, _>>()?;
    let verified = rows.iter().all(|r| {
        r.is_singleton
            && r.max_deviation.is_none_or(|d| d <= TOL_SINGLETON)
            && r.commutation_max <= COMMUTE_TOL
            && r.certificate_margin.is_some_and(|m| m > 0.0)
    });
    let doc = match s.get("format").unwrap_or("json") {
        "json" => Doc::Json(serde_json::json!({ "seed": seed, "rows": value(&rows) })),
        "markdown" => {
            let mut t = String::from(
                "| system | m_H | y0 computed | y0 predicted | max commutator | margin at c |\n|---|---|---|---|---|---|\n",
            );
            for r in &rows {
                let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let name = if params.is_empty() { r.system.clone() } else { format!("{} ({})", r.system, params.join(", ")) };
                let _ = writeln!(
                    t,
                    "| {name} | {:.6} | {} | {} | {:.3e} | {} (c = {:.6}) |",
                    r.m_h,
                    fmt_vec(&r.y0),
                    r.predicted_y0.as_deref().map_or("-".into(), fmt_vec),
                    r.commutation_max,
                    r.certificate_margin.map_or("none".into(), |m| format!("{m:.6e}")),
                    r.certificate_level,
                );
            }
            Doc::Text(t)
        }
        f => return Err(CliError::Usage(format!("--format must be json or markdown, got '{f}'"))),
    };
    Ok((doc, verified, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json("t", &serde_json::json!({ "x": 0.1, "n": f64::NAN }));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": null"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1);
        assert_eq!(back["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn params_and_fibers_parse() {
        assert_eq!(parse_params("a1=1, a2=2.5").unwrap(), vec![("a1".into(), 1.0), ("a2".into(), 2.5)]);
        assert!(parse_params("a1").is_err());
        let s = Settings { values: [("fiber".to_string(), "0.2,0; 0.8,0".to_string())].into_iter().collect() };
        assert_eq!(s.fibers().unwrap(), vec![vec![0.2, 0.0], vec![0.8, 0.0]]);
    }
}
