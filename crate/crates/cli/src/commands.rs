//! Subcommand implementations. Each returns the rendered report; `main`
//! decides where it goes.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use kappa_core::batch::{self, Axis, Execution, Grid};
use kappa_core::linalg::{det_chio, det_lu, ChioPivot};
use kappa_core::subspaces::{ambient_shape, principal_spectrum, subspace_residual};
use kappa_core::{Chart, KappaReport, Matrix, PivotPolicy};
use serde::Serialize;

use crate::format::{cell, g17, to_json};
use crate::manifest::{load_builtin, load_manifest, Manifest};
use crate::report::{Document, KappaPoint, PrincipalPoint, Provenance, TensorsPoint, SCHEMA};
use crate::{Cli, Command, Format, NumericError, UsageError};

/// Rendered output and the exit code to finish with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

/// Largest relative deviation `verify-example` accepts.
pub const VERIFY_TOL: f64 = 1e-8;

pub fn run(cli: &Cli) -> Result<Outcome> {
    let policy = parse_pivot(&cli.pivot)?;
    match &cli.command {
        Command::VerifyExample => verify_example(cli, policy),
        Command::ChioDet { input, fixed } => chio_det(cli, input, fixed.as_deref()),
        cmd => {
            let spec = cli
                .manifest
                .as_deref()
                .ok_or_else(|| UsageError("--manifest is required for this command".into()))?;
            let m = load_manifest(spec)?;
            let points = resolve_points(cli, &m)?;
            let prov = Provenance::new(&m, pivot_label(&cli.pivot));
            match cmd {
                Command::Tensors => tensors(cli, &m, &points, prov),
                Command::Kappa => kappa(cli, &m, &points, policy, prov),
                Command::Principal => principal(cli, &m, &points, prov),
                Command::Sweep => sweep(cli, &m, &points, policy),
                Command::VerifyExample | Command::ChioDet { .. } => unreachable!(),
            }
        }
    }
}

/// `auto`, `max`, or a 1-based pair `p,q`.
pub fn parse_pivot(s: &str) -> Result<PivotPolicy, UsageError> {
    match s.trim() {
        "auto" => Ok(PivotPolicy::Auto),
        "max" => Ok(PivotPolicy::MaxAbs),
        pair => {
            let (p, q) = parse_pair(pair).ok_or_else(|| UsageError(format!("--pivot: expected auto, max or p,q; got `{s}`")))?;
            if p == q {
                return Err(UsageError(format!("--pivot: indices must differ, got {p},{q}")));
            }
            Ok(PivotPolicy::Fixed(p - 1, q - 1))
        }
    }
}

fn pivot_label(s: &str) -> String {
    s.trim().replace(' ', "")
}

/// Two positive integers separated by a comma.
fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(',')?;
    let a: usize = a.trim().parse().ok()?;
    let b: usize = b.trim().parse().ok()?;
    (a >= 1 && b >= 1).then_some((a, b))
}

/// Splits `name=value,name=value` and puts the values in coordinate order.
fn assignments<'a>(flag: &str, s: &'a str, coords: &[String]) -> Result<Vec<&'a str>, UsageError> {
    let mut slots: Vec<Option<&str>> = vec![None; coords.len()];
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| UsageError(format!("{flag}: `{part}` is not name=value")))?;
        let name = name.trim();
        let k = coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| UsageError(format!("{flag}: unknown coordinate `{name}` (coordinates: {})", coords.join(", "))))?;
        if slots[k].replace(value.trim()).is_some() {
            return Err(UsageError(format!("{flag}: `{name}` given twice")));
        }
    }
    let missing: Vec<&str> = coords
        .iter()
        .zip(&slots)
        .filter(|(_, v)| v.is_none())
        .map(|(c, _)| c.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(UsageError(format!("{flag}: missing {}", missing.join(", "))));
    }
    Ok(slots.into_iter().flatten().collect())
}

fn number(flag: &str, s: &str) -> Result<f64, UsageError> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| UsageError(format!("{flag}: `{s}` is not a finite number")))
}

pub fn parse_at(s: &str, coords: &[String]) -> Result<Vec<f64>, UsageError> {
    assignments("--at", s, coords)?
        .into_iter()
        .map(|v| number("--at", v))
        .collect()
}

pub fn parse_grid(s: &str, coords: &[String]) -> Result<Grid, UsageError> {
    let axes = assignments("--grid", s, coords)?
        .into_iter()
        .map(|v| {
            let parts: Vec<&str> = v.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(UsageError(format!("--grid: `{v}` is not lo:hi:n")));
            };
            let n: usize = n
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| UsageError(format!("--grid: `{n}` is not a positive count")))?;
            Ok(Axis::new(number("--grid", lo.trim())?, number("--grid", hi.trim())?, n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Grid::new(axes))
}

/// `--at`, then `--grid`, then the manifest's own `[eval]` table.
fn resolve_points(cli: &Cli, m: &Manifest) -> Result<Vec<Vec<f64>>> {
    if let Some(at) = &cli.at {
        return Ok(vec![parse_at(at, &m.coords)?]);
    }
    if let Some(grid) = &cli.grid {
        return Ok(parse_grid(grid, &m.coords)?.points());
    }
    match &m.eval {
        Some(e) => Ok(e.points()),
        None => Err(UsageError(format!("manifest `{}` has no [eval] table; pass --at or --grid", m.name)).into()),
    }
}

fn describe_point(coords: &[String], p: &[f64]) -> String {
    coords
        .iter()
        .zip(p)
        .map(|(c, v)| format!("{c}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn at_point<E: std::fmt::Display>(coords: &[String], p: &[f64], e: E) -> anyhow::Error {
    NumericError(format!("at {}: {e}", describe_point(coords, p))).into()
}

fn document<T: Serialize>(command: &'static str, m: &Manifest, prov: Provenance, points: Vec<T>) -> Document<T> {
    Document {
        schema: SCHEMA,
        command,
        provenance: prov,
        coords: m.coords.clone(),
        points,
    }
}

fn unsupported(command: &str, f: Format) -> anyhow::Error {
    UsageError(format!("`{command}` does not support --format {f:?}").to_lowercase()).into()
}

fn tensors(cli: &Cli, m: &Manifest, points: &[Vec<f64>], prov: Provenance) -> Result<Outcome> {
    let rows = batch::map_points(points, Execution::default(), |p| {
        let pg = m.chart.analyze(p)?;
        Ok::<_, kappa_core::GeometryError>(TensorsPoint::new(&pg.tensors, pg.extrinsic.as_ref()))
    });
    let rows = points
        .iter()
        .zip(rows)
        .map(|(p, r)| r.map_err(|e| at_point(&m.coords, p, e)))
        .collect::<Result<Vec<_>>>()?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => Ok(Outcome::ok(to_json(&document("tensors", m, prov, rows)))),
        Format::Text => {
            let mut s = String::new();
            for t in &rows {
                writeln!(s, "point {}", describe_point(&m.coords, &t.point)).unwrap();
                writeln!(s, "  det g = {}", g17(t.det_metric)).unwrap();
                for c in &t.christoffel_first {
                    writeln!(s, "  G_{} = {}", join_index(&c.index[..2]) + "," + &c.index[2].to_string(), g17(c.value)).unwrap();
                }
                for c in &t.riemann {
                    writeln!(s, "  R_{} = {}", join_index(&c.index), g17(c.value)).unwrap();
                }
                writeln!(s, "  scalar R = {}{}", g17(t.scalar_curvature), if t.flat { "  (flat)" } else { "" }).unwrap();
            }
            Ok(Outcome::ok(s))
        }
        f => Err(unsupported("tensors", f)),
    }
}

fn join_index(ix: &[usize]) -> String {
    ix.iter().map(|i| i.to_string()).collect()
}

fn kappa(cli: &Cli, m: &Manifest, points: &[Vec<f64>], policy: PivotPolicy, prov: Provenance) -> Result<Outcome> {
    let format = cli.format.unwrap_or(Format::Json);
    if format == Format::Csv {
        return sweep(cli, m, points, policy);
    }
    let reports = batch::sweep(&m.chart, points, policy, Execution::default());
    let rows = points
        .iter()
        .zip(reports)
        .map(|(p, r)| r.map(|r| KappaPoint::new(p, &r)).map_err(|e| at_point(&m.coords, p, e)))
        .collect::<Result<Vec<_>>>()?;
    match format {
        Format::Json => Ok(Outcome::ok(to_json(&document("kappa", m, prov, rows)))),
        _ => {
            let mut s = String::new();
            for k in &rows {
                write!(s, "{}  kappa2={}  kappa={}", describe_point(&m.coords, &k.point), g17(k.kappa2), g17(k.kappa)).unwrap();
                if let (Some(e), Some(i)) = (k.kappa2_extrinsic, k.kappa2_intrinsic) {
                    write!(s, "  extrinsic={}  intrinsic={}", g17(e), g17(i)).unwrap();
                }
                if let (Some(n), Some(g)) = (k.kappa_n, k.kappa_g) {
                    write!(s, "  kappa_n={}  kappa_g={}", g17(n), g17(g)).unwrap();
                }
                let flags = k.flags.joined();
                if !flags.is_empty() {
                    write!(s, "  [{flags}]").unwrap();
                }
                s.push('\n');
            }
            Ok(Outcome::ok(s))
        }
    }
}

/// One CSV row per point in input order. Failed points get NaN values and
/// the `error` flag instead of aborting the sweep.
pub fn sweep_csv(coords: &[String], points: &[Vec<f64>], reports: &[Result<KappaReport, kappa_core::CurvatureError>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header: Vec<&str> = coords.iter().map(String::as_str).collect();
    header.extend(["kappa2", "kappa", "kappa_n", "kappa_g", "flags"]);
    w.write_record(&header)?;
    for (p, r) in points.iter().zip(reports) {
        let mut row: Vec<String> = p.iter().map(|&v| g17(v)).collect();
        match r {
            Ok(r) => {
                let k = KappaPoint::new(p, r);
                row.extend([g17(k.kappa2), g17(k.kappa), cell(k.kappa_n), cell(k.kappa_g), k.flags.joined()]);
            }
            Err(_) => row.extend([g17(f64::NAN), g17(f64::NAN), String::new(), String::new(), "error".into()]),
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

fn sweep(cli: &Cli, m: &Manifest, points: &[Vec<f64>], policy: PivotPolicy) -> Result<Outcome> {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let reports = batch::sweep(&m.chart, points, policy, Execution::default());
            Ok(Outcome::ok(sweep_csv(&m.coords, points, &reports)?))
        }
        f => Err(unsupported("sweep", f)),
    }
}

fn principal(cli: &Cli, m: &Manifest, points: &[Vec<f64>], prov: Provenance) -> Result<Outcome> {
    let rows = points
        .iter()
        .map(|p| {
            let row = match &m.chart {
                Chart::Metric(_) => {
                    return Err(UsageError(format!(
                        "`principal` needs an immersion or nested manifest; `{}` is a metric",
                        m.name
                    ))
                    .into())
                }
                Chart::Immersion(c) => {
                    let ag = ambient_shape(c, p).map_err(|e| at_point(&m.coords, p, e))?;
                    let r = principal_spectrum(&ag).map_err(|e| at_point(&m.coords, p, e))?;
                    PrincipalPoint::new(p, p, &r, None)
                }
                Chart::Nested(c) => {
                    let y = c.ambient_point(p).map_err(|e| at_point(&m.coords, p, e))?;
                    let ag = ambient_shape(c.outer(), &y).map_err(|e| at_point(&m.coords, p, e))?;
                    let r = principal_spectrum(&ag).map_err(|e| at_point(&m.coords, p, e))?;
                    let res = subspace_residual(&ag, c, p).map_err(|e| at_point(&m.coords, p, e))?;
                    PrincipalPoint::new(p, &y, &r, Some(&res))
                }
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => Ok(Outcome::ok(to_json(&document("principal", m, prov, rows)))),
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                writeln!(s, "point {}", describe_point(&m.coords, &r.point)).unwrap();
                for g in &r.groups {
                    writeln!(s, "  kappa^2 = {}  (multiplicity {})", g17(g.value), g.multiplicity).unwrap();
                }
                writeln!(s, "  k^2 = {}", g17(r.k2)).unwrap();
                if let Some(res) = &r.subspace_residual {
                    writeln!(s, "  subspace kappa^2 = {}  residual = {}", g17(res.kappa2), g17(res.residual)).unwrap();
                }
            }
            Ok(Outcome::ok(s))
        }
        f => Err(unsupported("principal", f)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub manifest: String,
    pub points: usize,
    pub max_rel_deviation: f64,
    pub worst_point: Vec<f64>,
    pub pass: bool,
}

/// `2 m^2 / rho^6`.
pub fn kappa_schwarzschild(m: f64, rho: f64) -> f64 {
    2.0 * m * m / rho.powi(6)
}

/// The same space in isotropic-looking coordinates.
pub fn kappa_isotropic(m: f64, rho: f64) -> f64 {
    kappa_schwarzschild(m, rho) * (4.0 * m / rho).exp() * ((1.0 + m / (2.0 * rho)) * (1.0 + m / rho)).sqrt()
}

fn verify_example(cli: &Cli, policy: PivotPolicy) -> Result<Outcome> {
    type ClosedForm = fn(f64, f64) -> f64;
    let cases: [(&str, ClosedForm); 2] = [("schwarzschild", kappa_schwarzschild), ("isotropic", kappa_isotropic)];
    let mut rows = Vec::new();
    for (name, closed) in cases {
        let man = load_builtin(name).expect("example manifests are built in")?;
        let mass = man
            .params
            .iter()
            .find(|(k, _)| k == "m")
            .map(|&(_, v)| v)
            .context("example manifest has no `m` parameter")?;
        let points = resolve_points(cli, &man)?;
        let reports = batch::sweep(&man.chart, &points, policy, Execution::default());
        let mut worst = (0.0f64, Vec::new());
        for (p, r) in points.iter().zip(reports) {
            let r = r.map_err(|e| at_point(&man.coords, p, e))?;
            let want = closed(mass, p[0]);
            let dev = (r.kappa - want).abs() / want.abs();
            // NaN must not hide behind max()
            if dev.is_nan() || dev > worst.0 || worst.1.is_empty() {
                worst = (if dev.is_nan() { f64::INFINITY } else { dev.max(worst.0) }, p.clone());
            }
        }
        rows.push(VerifyRow {
            manifest: name.into(),
            points: points.len(),
            max_rel_deviation: worst.0,
            worst_point: worst.1,
            pass: worst.0 < VERIFY_TOL,
        });
    }
    let code = if rows.iter().all(|r| r.pass) { 0 } else { crate::EXIT_NUMERIC };
    let text = match cli.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&rows),
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                writeln!(
                    s,
                    "{:<14} points={}  max_rel_deviation={:.3e}  {}",
                    r.manifest,
                    r.points,
                    r.max_rel_deviation,
                    if r.pass { "PASS" } else { "FAIL" }
                )
                .unwrap();
            }
            s
        }
        f => return Err(unsupported("verify-example", f)),
    };
    Ok(Outcome { text, code })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChioResult {
    pub n: usize,
    pub det_lu: f64,
    pub det_chio: f64,
    pub rel_diff: f64,
}

pub fn read_matrix_csv(path: &std::path::Path) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| UsageError(format!("{}:{}: `{f}` is not a number", path.display(), i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(UsageError(format!("{}: expected a square matrix", path.display())).into());
    }
    Ok(Matrix::from_rows(&rows))
}

fn chio_det(cli: &Cli, input: &std::path::Path, fixed: Option<&str>) -> Result<Outcome> {
    let a = read_matrix_csv(input)?;
    let pivot = match fixed {
        None => ChioPivot::MaxAbs,
        Some(s) => {
            let (r, c) = parse_pair(s).ok_or_else(|| UsageError(format!("--fixed: expected r,c (1-based), got `{s}`")))?;
            ChioPivot::Fixed(r - 1, c - 1)
        }
    };
    let lu = det_lu(&a);
    let chio = det_chio(&a, pivot).map_err(|e| NumericError(e.to_string()))?;
    let rel_diff = if lu == chio { 0.0 } else { (lu - chio).abs() / lu.abs().max(chio.abs()) };
    let r = ChioResult {
        n: a.rows(),
        det_lu: lu,
        det_chio: chio,
        rel_diff,
    };
    match cli.format.unwrap_or(Format::Text) {
        Format::Json => Ok(Outcome::ok(to_json(&r))),
        Format::Text => Ok(Outcome::ok(format!(
            "n = {}\nlu = {}\nchio = {}\nrel_diff = {}\n",
            r.n,
            g17(r.det_lu),
            g17(r.det_chio),
            g17(r.rel_diff)
        ))),
        f => Err(unsupported("chio-det", f)),
    }
}
