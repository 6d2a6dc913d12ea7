//! Chart manifests: TOML files describing a chart and where to evaluate it.
//!
//! See `docs/manifest.md` for the grammar. Built-in manifests can be named
//! without a path (`--manifest schwarzschild`).

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use kappa_core::batch::{Axis, Grid};
use kappa_core::geometry::ChartError;
use kappa_core::{Chart, ImmersionChart, MetricChart, NestedChart};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

pub const BUILTINS: &[(&str, &str)] = &[
    ("schwarzschild", include_str!("../manifests/schwarzschild.toml")),
    ("isotropic", include_str!("../manifests/isotropic.toml")),
    ("sphere2", include_str!("../manifests/sphere2.toml")),
    ("sphere3", include_str!("../manifests/sphere3.toml")),
    ("cylinder", include_str!("../manifests/cylinder.toml")),
    ("clifford-torus", include_str!("../manifests/clifford-torus.toml")),
    ("latitude-circle", include_str!("../manifests/latitude-circle.toml")),
    ("plane", include_str!("../manifests/plane.toml")),
    ("polar2", include_str!("../manifests/polar2.toml")),
    ("polar3", include_str!("../manifests/polar3.toml")),
];

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no manifest file or built-in named `{0}` (built-ins: {list})", list = builtin_names().join(", "))]
    Unknown(String),
    #[error("{origin}:{line}: {message}")]
    Syntax { origin: String, line: usize, message: String },
    #[error("{origin}:{line}: expression `{expr}`: {message}")]
    Expression {
        origin: String,
        line: usize,
        expr: String,
        message: String,
    },
    #[error("{origin}:{line}: {message}")]
    Dimension { origin: String, line: usize, message: String },
    #[error("{origin}:{line}: {message}")]
    Invalid { origin: String, line: usize, message: String },
}

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    name: Option<String>,
    description: Option<String>,
    kind: Spanned<String>,
    coords: Spanned<Vec<String>>,
    metric: Option<Spanned<Vec<Spanned<String>>>>,
    immersion: Option<Spanned<Vec<Spanned<String>>>>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    outer: Option<Spanned<RawOuter>>,
    eval: Option<RawEval>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOuter {
    coords: Vec<String>,
    immersion: Spanned<Vec<Spanned<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEval {
    at: Option<Spanned<Vec<Vec<f64>>>>,
    grid: Option<Vec<Spanned<RawAxis>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    coord: String,
    lo: f64,
    hi: f64,
    n: usize,
}

/// Where a manifest asks to be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalSpec {
    Points(Vec<Vec<f64>>),
    Grid(Grid),
}

impl EvalSpec {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            EvalSpec::Points(p) => p.clone(),
            EvalSpec::Grid(g) => g.points(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub name: String,
    pub description: Option<String>,
    /// Path or `builtin:<name>`.
    pub origin: String,
    pub sha256: String,
    pub chart: Chart,
    pub coords: Vec<String>,
    pub params: Vec<(String, f64)>,
    pub eval: Option<EvalSpec>,
}

impl Manifest {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Loads `spec` as a file path, or as a built-in name when no such file exists.
pub fn load_manifest(spec: &str) -> Result<Manifest, ManifestError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: spec.to_string(),
            source,
        })?;
        return parse_manifest(&text, spec);
    }
    if let Some(m) = load_builtin(spec) {
        return m;
    }
    if spec.contains('/') || spec.ends_with(".toml") {
        return Err(ManifestError::Io {
            path: spec.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        });
    }
    Err(ManifestError::Unknown(spec.to_string()))
}

/// A built-in manifest by name, ignoring files in the working directory.
pub fn load_builtin(name: &str) -> Option<Result<Manifest, ManifestError>> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_manifest(text, &format!("builtin:{n}")))
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        line_of(self.text, span)
    }

    fn dimension(&self, span: Range<usize>, message: String) -> ManifestError {
        ManifestError::Dimension {
            origin: self.origin.to_string(),
            line: self.line(span),
            message,
        }
    }

    fn invalid(&self, span: Range<usize>, message: String) -> ManifestError {
        ManifestError::Invalid {
            origin: self.origin.to_string(),
            line: self.line(span),
            message,
        }
    }

    fn chart_error(&self, err: ChartError, list: &Spanned<Vec<Spanned<String>>>) -> ManifestError {
        match err {
            ChartError::Parse { index, source_text, error } => ManifestError::Expression {
                origin: self.origin.to_string(),
                line: self.line(list.get_ref()[index].span()),
                expr: source_text,
                message: error.to_string(),
            },
            ChartError::Dimension(message) => self.dimension(list.span(), message),
        }
    }
}

fn strings(list: &Spanned<Vec<Spanned<String>>>) -> Vec<&str> {
    list.get_ref().iter().map(|s| s.get_ref().as_str()).collect()
}

/// Parses and validates manifest text; `origin` is used in error messages.
pub fn parse_manifest(text: &str, origin: &str) -> Result<Manifest, ManifestError> {
    let ctx = Ctx { text, origin };
    let raw: RawManifest = toml::from_str(text).map_err(|e| ManifestError::Syntax {
        origin: origin.to_string(),
        line: e.span().map_or(1, |s| line_of(text, s)),
        message: e.message().trim().to_string(),
    })?;

    let coords = raw.coords.get_ref().clone();
    if coords.is_empty() {
        return Err(ctx.dimension(raw.coords.span(), "`coords` is empty".into()));
    }
    let params: Vec<(String, f64)> = raw.params.into_iter().collect();
    let param_refs: Vec<(&str, f64)> = params.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let coord_refs: Vec<&str> = coords.iter().map(String::as_str).collect();
    let m = coords.len();

    let kind = raw.kind.get_ref().as_str();
    let expect_absent = |field: &Option<Spanned<Vec<Spanned<String>>>>, key: &str| match field {
        Some(f) => Err(ctx.invalid(f.span(), format!("`{key}` is not used by kind `{kind}`"))),
        None => Ok(()),
    };
    let chart: Chart = match kind {
        "metric" => {
            expect_absent(&raw.immersion, "immersion")?;
            if let Some(o) = &raw.outer {
                return Err(ctx.invalid(o.span(), "`outer` is only used by kind `nested`".into()));
            }
            let list = raw
                .metric
                .as_ref()
                .ok_or_else(|| ctx.invalid(raw.kind.span(), "metric manifest needs a `metric` list".into()))?;
            let need = m * (m + 1) / 2;
            if list.get_ref().len() != need {
                return Err(ctx.dimension(
                    list.span(),
                    format!(
                        "`metric` has {} entries; {m} coordinates need {need} (upper triangle, row by row)",
                        list.get_ref().len()
                    ),
                ));
            }
            MetricChart::new(&coord_refs, &param_refs, &strings(list))
                .map_err(|e| ctx.chart_error(e, list))?
                .into()
        }
        "immersion" | "nested" => {
            expect_absent(&raw.metric, "metric")?;
            let list = raw
                .immersion
                .as_ref()
                .ok_or_else(|| ctx.invalid(raw.kind.span(), format!("{kind} manifest needs an `immersion` list")))?;
            if list.get_ref().len() < m {
                return Err(ctx.dimension(
                    list.span(),
                    format!("`immersion` has {} components for {m} coordinates", list.get_ref().len()),
                ));
            }
            let inner = ImmersionChart::new(&coord_refs, &param_refs, &strings(list))
                .map_err(|e| ctx.chart_error(e, list))?;
            if kind == "immersion" {
                if let Some(o) = &raw.outer {
                    return Err(ctx.invalid(o.span(), "`outer` is only used by kind `nested`".into()));
                }
                inner.into()
            } else {
                let outer_raw = raw
                    .outer
                    .as_ref()
                    .ok_or_else(|| ctx.invalid(raw.kind.span(), "nested manifest needs an `[outer]` table".into()))?;
                let o = outer_raw.get_ref();
                if o.coords.len() != list.get_ref().len() {
                    return Err(ctx.dimension(
                        list.span(),
                        format!(
                            "`immersion` has {} components but `outer.coords` has {} names",
                            list.get_ref().len(),
                            o.coords.len()
                        ),
                    ));
                }
                let oc: Vec<&str> = o.coords.iter().map(String::as_str).collect();
                let outer = ImmersionChart::new(&oc, &param_refs, &strings(&o.immersion))
                    .map_err(|e| ctx.chart_error(e, &o.immersion))?;
                NestedChart::new(outer, inner)
                    .map_err(|e| ctx.dimension(outer_raw.span(), e.to_string()))?
                    .into()
            }
        }
        other => {
            return Err(ctx.invalid(
                raw.kind.span(),
                format!("unknown kind `{other}` (expected metric, immersion or nested)"),
            ))
        }
    };

    let eval = match raw.eval {
        None => None,
        Some(RawEval { at: Some(_), grid: Some(g) }) => {
            let span = g.first().map_or(0..0, |a| a.span());
            return Err(ctx.invalid(span, "`eval` takes either `at` or `grid`, not both".into()));
        }
        Some(RawEval { at: Some(at), grid: None }) => {
            if let Some(bad) = at.get_ref().iter().find(|p| p.len() != m) {
                return Err(ctx.dimension(at.span(), format!("point {bad:?} does not have {m} coordinates")));
            }
            Some(EvalSpec::Points(at.into_inner()))
        }
        Some(RawEval { at: None, grid: Some(axes) }) => Some(EvalSpec::Grid(grid_from_raw(&ctx, &coords, axes)?)),
        Some(RawEval { at: None, grid: None }) => None,
    };

    Ok(Manifest {
        name: raw.name.unwrap_or_else(|| origin.trim_start_matches("builtin:").to_string()),
        description: raw.description,
        origin: origin.to_string(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
        chart,
        coords,
        params,
        eval,
    })
}

fn grid_from_raw(ctx: &Ctx<'_>, coords: &[String], axes: Vec<Spanned<RawAxis>>) -> Result<Grid, ManifestError> {
    let mut slots: Vec<Option<Axis>> = vec![None; coords.len()];
    for axis in &axes {
        let a = axis.get_ref();
        let k = coords
            .iter()
            .position(|c| *c == a.coord)
            .ok_or_else(|| ctx.invalid(axis.span(), format!("grid coordinate `{}` is not declared", a.coord)))?;
        if a.n == 0 {
            return Err(ctx.invalid(axis.span(), format!("grid count for `{}` must be at least 1", a.coord)));
        }
        if slots[k].is_some() {
            return Err(ctx.invalid(axis.span(), format!("grid coordinate `{}` appears twice", a.coord)));
        }
        slots[k] = Some(Axis::new(a.lo, a.hi, a.n));
    }
    let span = axes.first().map_or(0..0, |a| a.span());
    slots
        .into_iter()
        .zip(coords)
        .map(|(s, c)| s.ok_or_else(|| ctx.invalid(span.clone(), format!("grid is missing coordinate `{c}`"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Grid::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses() {
        for (name, text) in BUILTINS {
            let m = parse_manifest(text, name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(m.eval.is_some(), "{name} has no eval block");
        }
    }

    #[test]
    fn schwarzschild_shape() {
        let m = load_manifest("schwarzschild").unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.chart.kind().name(), "metric");
        assert_eq!(m.params, vec![("m".to_string(), 1.0)]);
    }

    #[test]
    fn metric_count_is_checked() {
        let text = "kind = \"metric\"\ncoords = [\"x\", \"y\", \"z\"]\nmetric = [\"1\", \"0\", \"1\"]\n";
        let err = parse_manifest(text, "t.toml").unwrap_err();
        assert!(matches!(err, ManifestError::Dimension { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_expression_names_its_line() {
        let text = "kind = \"immersion\"\ncoords = [\"t\"]\nimmersion = [\n  \"cos(t)\",\n  \"sin(\",\n]\n";
        let err = parse_manifest(text, "t.toml").unwrap_err();
        assert!(matches!(err, ManifestError::Expression { line: 5, .. }), "{err}");
        assert!(err.to_string().starts_with("t.toml:5:"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "kind = \"immersion\"\ncoords = [\"t\"]\nimmersion = [\"t\"]\ncolour = 3\n";
        let err = parse_manifest(text, "t.toml").unwrap_err();
        assert!(matches!(err, ManifestError::Syntax { line: 4, .. }), "{err}");
    }

    #[test]
    fn grid_must_cover_every_coordinate() {
        let text = "kind = \"immersion\"\ncoords = [\"u\", \"v\"]\nimmersion = [\"u\", \"v\", \"u*v\"]\n\
                    [[eval.grid]]\ncoord = \"u\"\nlo = 0\nhi = 1\nn = 2\n";
        let err = parse_manifest(text, "t.toml").unwrap_err();
        assert!(err.to_string().contains("missing coordinate `v`"), "{err}");
    }
}
