//! TOML/JSON documents describing a pair and, optionally, a sweep.
//!
//! ```toml
//! [variety]
//! dim = 2
//! rays = [[1, 0], [0, 1], [-1, -1]]
//! boundary = ["0", "1/2", "0"]
//! # polarization = ["1", "1", "1"]
//!
//! [sweep]
//! param = "t"
//! grid = { start = "0", stop = "9/10", count = 10 }
//! paths = [{ ray = 0, p = "0", q = "1" }]
//! ```
//!
//! Rationals are `"p/q"` strings or bare integers. When `polarization` is
//! omitted the pair is log Fano and `c_i = 1 - b_i`.

use std::fmt;
use std::path::Path;

use num_traits::{One, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::NVector;
use crate::rational::{int, parse_rational, Rational};
use crate::sweep::{FanPiece, Grid, Path as CoeffPath, SweepSpec};
use crate::toric::{ToricPair, ToricPairSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// By extension, falling back to content sniffing.
    pub fn detect(path: Option<&Path>, text: &str) -> Format {
        match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("toml") => Format::Toml,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// A parsed document: the pair and an optional sweep over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub spec: ToricPairSpec,
    pub sweep: Option<SweepSpec>,
}

/// Rational written as a string or an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Rat(Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as a \"p/q\" string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
                parse_rational(v).map(Rat).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
                Ok(Rat(int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
                i64::try_from(v).map(|v| Rat(int(v))).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
                Err(E::custom(format!(
                    "floating-point value {v} is not allowed; write rationals as \"p/q\" strings"
                )))
            }
        }
        d.deserialize_any(V)
    }
}

fn rats(v: &[Rational]) -> Vec<Rat> {
    v.iter().cloned().map(Rat).collect()
}

fn unrats(v: Vec<Rat>) -> Vec<Rational> {
    v.into_iter().map(|r| r.0).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    variety: VarietyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarietyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    rays: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarization: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    log_fano: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    #[serde(default = "default_param")]
    param: String,
    grid: GridDoc,
    #[serde(default)]
    paths: Vec<PathDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fans: Vec<FanDoc>,
}

fn default_param() -> String {
    "t".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    start: Rat,
    stop: Rat,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDoc {
    ray: usize,
    p: Rat,
    q: Rat,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<Rat>,
    rays: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<Vec<Rat>>,
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("line {line}, column {col}")
}

fn read_doc(text: &str, format: Format) -> Result<Doc> {
    match format {
        Format::Toml => toml::from_str(text).map_err(|e| Error::Parse {
            location: e.span().map(|s| line_col(text, s.start)),
            message: e.message().trim().to_string(),
        }),
        Format::Json => serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        }),
    }
}

fn check_len(field: &str, len: usize, expected: usize) -> Result<()> {
    if len != expected {
        return Err(Error::parse(
            field,
            format!("expected {expected} entries (one per ray), found {len}"),
        ));
    }
    Ok(())
}

fn to_rays(rays: Vec<Vec<i64>>) -> Vec<NVector> {
    rays.into_iter().map(NVector).collect()
}

fn spec_from(v: VarietyDoc) -> Result<ToricPairSpec> {
    let d = v.rays.len();
    if let Some(dim) = v.dim {
        if let Some((i, r)) = v.rays.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::parse(
                format!("variety.rays[{i}]"),
                format!("ray has {} coordinates but dim = {dim}", r.len()),
            ));
        }
    }
    let boundary = match v.boundary {
        Some(b) => {
            check_len("variety.boundary", b.len(), d)?;
            unrats(b)
        }
        None => vec![Rational::zero(); d],
    };
    let spec = match v.polarization {
        Some(c) => {
            check_len("variety.polarization", c.len(), d)?;
            let c = unrats(c);
            let log_fano = v
                .log_fano
                .unwrap_or_else(|| c.iter().zip(&boundary).all(|(c, b)| *c == Rational::one() - b));
            ToricPairSpec {
                rays: to_rays(v.rays),
                boundary,
                polarization: c,
                log_fano,
            }
        }
        None => {
            if v.log_fano == Some(false) {
                return Err(Error::parse(
                    "variety.polarization",
                    "required when log_fano = false",
                ));
            }
            ToricPairSpec::log_fano(to_rays(v.rays), boundary)
        }
    };
    Ok(spec)
}

fn sweep_from(s: SweepDoc) -> Result<SweepSpec> {
    if s.grid.count == 0 {
        return Err(Error::parse("sweep.grid.count", "must be at least 1"));
    }
    let fans = s
        .fans
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let d = f.rays.len();
            let boundary = match f.boundary {
                Some(b) => {
                    check_len(&format!("sweep.fans[{i}].boundary"), b.len(), d)?;
                    unrats(b)
                }
                None => vec![Rational::zero(); d],
            };
            Ok(FanPiece {
                from: f.from.map(|r| r.0),
                to: f.to.map(|r| r.0),
                rays: to_rays(f.rays),
                boundary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSpec {
        param: s.param,
        grid: Grid {
            start: s.grid.start.0,
            stop: s.grid.stop.0,
            count: s.grid.count,
        },
        paths: s
            .paths
            .into_iter()
            .map(|p| CoeffPath {
                ray: p.ray,
                p: p.p.0,
                q: p.q.0,
            })
            .collect(),
        fans,
    })
}

/// Parses a document without validating the pair.
pub fn parse_document(text: &str, format: Format) -> Result<Document> {
    let doc = read_doc(text, format)?;
    let spec = spec_from(doc.variety)?;
    let sweep = doc.sweep.map(sweep_from).transpose()?;
    if let Some(s) = &sweep {
        for (i, p) in s.paths.iter().enumerate() {
            if p.ray >= spec.rays.len() && s.fans.is_empty() {
                return Err(Error::parse(
                    format!("sweep.paths[{i}].ray"),
                    format!("ray index {} out of range", p.ray),
                ));
            }
        }
    }
    Ok(Document { spec, sweep })
}

/// Parses the `[variety]` table and checks that it describes a valid pair.
pub fn parse_spec(text: &str, format: Format) -> Result<ToricPairSpec> {
    let spec = parse_document(text, format)?.spec;
    spec.clone().validate()?;
    Ok(spec)
}

pub fn parse_pair(text: &str, format: Format) -> Result<ToricPair> {
    parse_document(text, format)?.spec.validate()
}

/// Reads and validates a pair from a file.
pub fn load_pair(path: &Path) -> Result<ToricPair> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_pair(&text, Format::detect(Some(path), &text))
}

fn to_doc(doc: &Document) -> Doc {
    let spec = &doc.spec;
    let polarization_is_default = spec.log_fano
        && spec
            .polarization
            .iter()
            .zip(&spec.boundary)
            .all(|(c, b)| *c == Rational::one() - b)
        && spec.polarization.len() == spec.boundary.len();
    Doc {
        variety: VarietyDoc {
            dim: Some(spec.dim()),
            rays: spec.rays.iter().map(|r| r.0.clone()).collect(),
            boundary: Some(rats(&spec.boundary)),
            polarization: (!polarization_is_default).then(|| rats(&spec.polarization)),
            log_fano: Some(spec.log_fano),
        },
        sweep: doc.sweep.as_ref().map(|s| SweepDoc {
            param: s.param.clone(),
            grid: GridDoc {
                start: Rat(s.grid.start.clone()),
                stop: Rat(s.grid.stop.clone()),
                count: s.grid.count,
            },
            paths: s
                .paths
                .iter()
                .map(|p| PathDoc {
                    ray: p.ray,
                    p: Rat(p.p.clone()),
                    q: Rat(p.q.clone()),
                })
                .collect(),
            fans: s
                .fans
                .iter()
                .map(|f| FanDoc {
                    from: f.from.clone().map(Rat),
                    to: f.to.clone().map(Rat),
                    rays: f.rays.iter().map(|r| r.0.clone()).collect(),
                    boundary: Some(rats(&f.boundary)),
                })
                .collect(),
        }),
    }
}

pub fn emit(doc: &Document, format: Format) -> Result<String> {
    let d = to_doc(doc);
    match format {
        Format::Toml => toml::to_string(&d).map_err(|e| Error::InvalidArgument(e.to_string())),
        Format::Json => serde_json::to_string_pretty(&d).map_err(|e| Error::InvalidArgument(e.to_string())),
    }
}

pub fn emit_spec(spec: &ToricPairSpec, format: Format) -> Result<String> {
    emit(
        &Document {
            spec: spec.clone(),
            sweep: None,
        },
        format,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::toric::corpus;

    const P2: &str = "[variety]\nrays = [[1,0],[0,1],[-1,-1]]\n";

    #[test]
    fn minimal_document() {
        let spec = parse_spec(P2, Format::Toml).unwrap();
        assert_eq!(spec, corpus::p2());
        assert!(spec.log_fano);
    }

    #[test]
    fn boundary_strings() {
        let text = "[variety]\ndim = 2\nrays = [[1,0],[0,1],[-1,-1]]\nboundary = [\"1/2\", 0, \"0\"]\n";
        let spec = parse_spec(text, Format::Toml).unwrap();
        assert_eq!(spec.boundary, vec![rat(1, 2), int(0), int(0)]);
        assert_eq!(spec.polarization, vec![rat(1, 2), int(1), int(1)]);
    }

    #[test]
    fn bad_boundary_is_not_klt() {
        let text = "[variety]\nrays = [[1,0],[0,1],[-1,-1]]\nboundary = [\"3/2\", \"0\", \"0\"]\n";
        assert!(matches!(parse_spec(text, Format::Toml), Err(Error::NotKlt { index: 0, .. })));
    }

    #[test]
    fn parse_errors_carry_locations() {
        let text = "[variety]\nrays = [[1,0],[0,1],[-1,-1]]\nboundary = [0.5, 0, 0]\n";
        match parse_spec(text, Format::Toml) {
            Err(Error::Parse { location: Some(l), message }) => {
                assert!(l.starts_with("line 3"), "{l}");
                assert!(message.contains("floating-point"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = "[variety]\nrays = [[1,0],[0,1],[-1,-1]]\nboundary = [\"0\"]\n";
        assert!(matches!(
            parse_spec(text, Format::Toml),
            Err(Error::Parse { location: Some(l), .. }) if l == "variety.boundary"
        ));
        let json = "{\"variety\": {\"rays\": [[1,0]], \"bogus\": 1}}";
        assert!(matches!(
            parse_spec(json, Format::Json),
            Err(Error::Parse { location: Some(l), .. }) if l.starts_with("line 1")
        ));
    }

    #[test]
    fn json_documents() {
        let json = r#"{"variety": {"dim": 2, "rays": [[1,0],[0,1],[-1,-1],[1,1]]}}"#;
        assert_eq!(Format::detect(None, json), Format::Json);
        assert_eq!(parse_spec(json, Format::Json).unwrap(), corpus::blp2());
    }

    #[test]
    fn explicit_polarization() {
        let text = "[variety]\nrays = [[1],[-1]]\npolarization = [\"2\", \"1\"]\n";
        let spec = parse_spec(text, Format::Toml).unwrap();
        assert!(!spec.log_fano);
        let text = "[variety]\nrays = [[1],[-1]]\npolarization = [1, 1]\n";
        assert!(parse_spec(text, Format::Toml).unwrap().log_fano);
    }

    #[test]
    fn round_trips() {
        let sweep = "[variety]\nrays = [[1,0],[0,1],[-1,-1]]\n[sweep]\nparam = \"s\"\n\
            grid = { start = \"0\", stop = \"1\", count = 3 }\npaths = [{ ray = 1, p = \"1/3\", q = \"-1/4\" }]\n\
            [[sweep.fans]]\nfrom = \"1/2\"\nrays = [[1,0],[0,1],[-1,-1],[1,1]]\n";
        let doc = parse_document(sweep, Format::Toml).unwrap();
        for format in [Format::Toml, Format::Json] {
            let text = emit(&doc, format).unwrap();
            assert_eq!(parse_document(&text, format).unwrap(), doc, "{text}");
        }
        let polarized = ToricPairSpec::polarized(corpus::p1().rays, vec![rat(1, 3), int(0)], vec![int(2), int(1)]);
        let text = emit_spec(&polarized, Format::Toml).unwrap();
        assert_eq!(parse_document(&text, Format::Toml).unwrap().spec, polarized);
    }
}
