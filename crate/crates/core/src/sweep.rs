//! Exact sweeps of `δ` and `α` over rational grids of coefficient families.
//!
//! The semicontinuity flags are an empirical, toric check: only affine
//! boundary paths and fan switches at prescribed parameter values are modelled.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::NVector;
use crate::invariants::{alpha, delta_with_witness, Classification};
use crate::rational::{int, serde_str, Rational};
use crate::toric::ToricPairSpec;

pub const LABEL: &str = "empirical, toric";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub start: Rational,
    pub stop: Rational,
    pub count: usize,
}

impl Grid {
    /// `count` equally spaced points from `start` to `stop` inclusive.
    pub fn points(&self) -> Vec<Rational> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start.clone()],
            n => {
                let step = (&self.stop - &self.start) / int(n as i64 - 1);
                (0..n).map(|k| &self.start + &step * int(k as i64)).collect()
            }
        }
    }
}

/// `b_ray(t) = p + q t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub ray: usize,
    pub p: Rational,
    pub q: Rational,
}

/// Alternate fan used for `from <= t < to` (missing ends are unbounded).
/// The pair on it is log Fano with the given boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanPiece {
    pub from: Option<Rational>,
    pub to: Option<Rational>,
    pub rays: Vec<NVector>,
    pub boundary: Vec<Rational>,
}

impl FanPiece {
    pub fn covers(&self, t: &Rational) -> bool {
        self.from.as_ref().is_none_or(|f| f <= t) && self.to.as_ref().is_none_or(|e| t < e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub param: String,
    pub grid: Grid,
    pub paths: Vec<Path>,
    pub fans: Vec<FanPiece>,
}

impl SweepSpec {
    /// Index into `fans` of the piece active at `t` (`None` for the base fan).
    pub fn fan_at(&self, t: &Rational) -> Option<usize> {
        self.fans.iter().position(|f| f.covers(t))
    }

    /// The pair at parameter `t`.
    pub fn spec_at(&self, base: &ToricPairSpec, t: &Rational) -> Result<ToricPairSpec> {
        let (rays, mut boundary, mut polarization, log_fano) = match self.fan_at(t) {
            Some(k) => {
                let f = &self.fans[k];
                (f.rays.clone(), f.boundary.clone(), Vec::new(), true)
            }
            None => (
                base.rays.clone(),
                base.boundary.clone(),
                base.polarization.clone(),
                base.log_fano,
            ),
        };
        for path in &self.paths {
            let slot = boundary.get_mut(path.ray).ok_or_else(|| {
                Error::InvalidArgument(format!("path ray index {} out of range", path.ray))
            })?;
            *slot = &path.p + &path.q * t;
        }
        if log_fano {
            polarization = boundary.iter().map(|b| Rational::one() - b).collect();
        }
        Ok(ToricPairSpec {
            rays,
            boundary,
            polarization,
            log_fano,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    #[serde(with = "serde_str")]
    pub t: Rational,
    #[serde(with = "serde_str")]
    pub delta: Rational,
    #[serde(with = "serde_str")]
    pub alpha: Rational,
    pub verdict: Option<Classification>,
    pub witness_ray: Vec<i64>,
    #[serde(skip)]
    pub witness_index: usize,
    /// `None` on the base fan, otherwise the index of the alternate fan.
    pub fan: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvalidPoint {
    #[serde(with = "serde_str")]
    pub t: Rational,
    pub error: String,
}

/// `δ(t)` is at most both neighbours and strictly below at least one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flag {
    #[serde(with = "serde_str")]
    pub t: Rational,
    #[serde(with = "serde_str")]
    pub delta: Rational,
    #[serde(with = "serde_str")]
    pub left: Rational,
    #[serde(with = "serde_str")]
    pub right: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Constant,
    Nondecreasing,
    Nonincreasing,
    Mixed,
}

/// Maximal run of consecutive valid points sharing a witness ray.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(with = "serde_str")]
    pub from: Rational,
    #[serde(with = "serde_str")]
    pub to: Rational,
    pub witness_ray: Vec<i64>,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Structure {
    pub segments: Vec<Segment>,
    /// First parameter value of each segment after the first.
    #[serde(with = "serde_str::vec")]
    pub breakpoints: Vec<Rational>,
    pub piecewise_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub label: &'static str,
    pub rows: Vec<SweepRow>,
    pub invalid: Vec<InvalidPoint>,
    pub flags: Vec<Flag>,
    /// Only for fixed-fan sweeps.
    pub structure: Option<Structure>,
}

fn evaluate(spec: ToricPairSpec, t: &Rational, fan: Option<usize>) -> Result<SweepRow> {
    let pair = spec.validate()?;
    let (delta, witness) = delta_with_witness(&pair)?;
    Ok(SweepRow {
        t: t.clone(),
        alpha: alpha(&pair)?,
        verdict: pair.is_log_fano().then(|| Classification::of(&delta)),
        witness_ray: pair.rays()[witness].0.clone(),
        witness_index: witness,
        delta,
        fan,
    })
}

fn trend(values: &[&Rational]) -> Trend {
    let up = values.windows(2).any(|w| w[1] > w[0]);
    let down = values.windows(2).any(|w| w[1] < w[0]);
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::Nondecreasing,
        (false, true) => Trend::Nonincreasing,
        (true, true) => Trend::Mixed,
    }
}

fn structure(rows: &[SweepRow]) -> Structure {
    let mut segments = Vec::new();
    let mut breakpoints = Vec::new();
    for chunk in rows.chunk_by(|a, b| a.witness_index == b.witness_index) {
        if !segments.is_empty() {
            breakpoints.push(chunk[0].t.clone());
        }
        let deltas: Vec<&Rational> = chunk.iter().map(|r| &r.delta).collect();
        segments.push(Segment {
            from: chunk[0].t.clone(),
            to: chunk[chunk.len() - 1].t.clone(),
            witness_ray: chunk[0].witness_ray.clone(),
            trend: trend(&deltas),
        });
    }
    Structure {
        piecewise_monotone: segments.iter().all(|s| s.trend != Trend::Mixed),
        segments,
        breakpoints,
    }
}

/// Evaluates every grid point (in parallel) and assembles the ordered report.
pub fn sweep(base: &ToricPairSpec, spec: &SweepSpec) -> SweepReport {
    let grid = spec.grid.points();
    let results: Vec<Result<SweepRow>> = grid
        .par_iter()
        .map(|t| {
            let fan = spec.fan_at(t);
            spec.spec_at(base, t).and_then(|s| evaluate(s, t, fan))
        })
        .collect();

    let mut flags = Vec::new();
    for k in 1..results.len().saturating_sub(1) {
        if let (Ok(l), Ok(c), Ok(r)) = (&results[k - 1], &results[k], &results[k + 1]) {
            let d = &c.delta;
            if d <= &l.delta && d <= &r.delta && (d < &l.delta || d < &r.delta) {
                flags.push(Flag {
                    t: c.t.clone(),
                    delta: d.clone(),
                    left: l.delta.clone(),
                    right: r.delta.clone(),
                });
            }
        }
    }

    let mut rows = Vec::new();
    let mut invalid = Vec::new();
    for (t, r) in grid.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => invalid.push(InvalidPoint {
                t: t.clone(),
                error: e.to_string(),
            }),
        }
    }
    let fixed_fan = spec.fans.is_empty();
    SweepReport {
        param: spec.param.clone(),
        label: LABEL,
        structure: (fixed_fan && !rows.is_empty() && invalid.is_empty()).then(|| structure(&rows)),
        rows,
        invalid,
        flags,
    }
}

impl SweepReport {
    /// CSV with header `t,delta,alpha,verdict,witness_ray`; invalid points
    /// appear with verdict `invalid` and empty numeric cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        out.write_record(["t", "delta", "alpha", "verdict", "witness_ray"])
            .map_err(io)?;
        let mut lines: Vec<(Rational, [String; 5])> = self
            .rows
            .iter()
            .map(|r| {
                let ray = NVector(r.witness_ray.clone()).to_string();
                let verdict = r.verdict.map_or_else(|| "-".to_string(), |v| v.to_string());
                (
                    r.t.clone(),
                    [r.t.to_string(), r.delta.to_string(), r.alpha.to_string(), verdict, ray],
                )
            })
            .collect();
        lines.extend(self.invalid.iter().map(|p| {
            (
                p.t.clone(),
                [p.t.to_string(), String::new(), String::new(), "invalid".into(), String::new()],
            )
        }));
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        for (_, rec) in lines {
            out.write_record(&rec).map_err(io)?;
        }
        let bytes = out.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn delta_column(&self) -> Vec<Rational> {
        self.rows.iter().map(|r| r.delta.clone()).collect()
    }

    pub fn is_clean(&self) -> bool {
        self.invalid.is_empty()
    }
}

/// Closed interval grid of `β` values `k/den` for `k` in `lo..=hi`.
pub fn beta_grid(lo: i64, hi: i64, den: i64) -> Grid {
    Grid {
        start: Rational::new(lo.into(), den.into()),
        stop: Rational::new(hi.into(), den.into()),
        count: (hi - lo + 1).max(0) as usize,
    }
}

/// The family `(X, Δ + (1-β) D)` as a sweep in `β`: `b_i(β) = (b_i + a_i) - a_i β`.
pub fn interpolation_sweep(base: &ToricPairSpec, divisor: &[Rational], grid: Grid) -> Result<SweepSpec> {
    if divisor.len() != base.boundary.len() {
        return Err(Error::DimensionMismatch {
            expected: base.boundary.len(),
            found: divisor.len(),
        });
    }
    let paths = divisor
        .iter()
        .zip(&base.boundary)
        .enumerate()
        .filter(|(_, (a, _))| !a.is_zero())
        .map(|(ray, (a, b))| Path {
            ray,
            p: b + a,
            q: -a.clone(),
        })
        .collect();
    Ok(SweepSpec {
        param: "beta".into(),
        grid,
        paths,
        fans: Vec::new(),
    })
}
