//! The `kstab` command line.
//!
//! [`run`] does all the work and returns the exit code together with the
//! text destined for stdout and stderr, so the binary is a thin wrapper and
//! tests can drive the CLI in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use kstab_core::config::{self, Format};
use kstab_core::filtration::{
    gord_stabilize, lct_graded_sequence, lct_monomial, parse_ideal, weight_table_csv,
    delta_hat_sandwich_check, ExtendedFiltration, RationalWeights, StabilizationSearch,
};
use kstab_core::invariants::{
    alpha_m_from_basis, alpha_with_witness, delta_m_from_basis, dstar, interpolation_delta,
    lct_invariant_divisor, verdict, SectionBasis,
};
use kstab_core::rational::{parse_rational, Rational};
use kstab_core::sweep::sweep;
use kstab_core::{Budget, Error, MPoint, PairReport, ToricDivisor, ToricPair};

pub mod exit {
    pub const OK: i32 = 0;
    /// I/O failures and internal cross-check failures.
    pub const FAILURE: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "kstab", version, about = "Exact stability thresholds of toric log Fano pairs")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Number of worker threads.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stability threshold δ with the per-ray table.
    Delta { spec: PathBuf },
    /// Global log canonical threshold α.
    Alpha { spec: PathBuf },
    /// K-stability verdict of a log Fano pair.
    Verdict { spec: PathBuf },
    /// Finite-level approximants δ_m and α_m.
    Approx {
        #[arg(long, value_name = "M")]
        max_m: u64,
        spec: PathBuf,
    },
    /// The divisor D* making (X, Δ + (1-δ)D*) K-semistable.
    Dstar { spec: PathBuf },
    /// δ of (X, Δ + (1-β)D_u).
    Interpolate {
        #[arg(long, value_name = "p/q")]
        beta: String,
        /// Point u of the moment polytope, e.g. "1/2,-1/3" (default: the point of D*).
        #[arg(long)]
        point: Option<String>,
        spec: PathBuf,
    },
    /// Log canonical threshold of an invariant divisor or a monomial ideal.
    Lct(LctArgs),
    /// Jumping numbers, S_m and T_m of a ray filtration.
    Filtration {
        #[arg(long)]
        ray: usize,
        #[arg(long, default_value_t = 1)]
        m: u64,
        /// Multiply the ray weights by this rational before rounding.
        #[arg(long)]
        scale: Option<String>,
        /// Evaluate the extended filtration at this level instead.
        #[arg(long, value_name = "M")]
        extend_to: Option<u64>,
        /// Print the weight table as CSV.
        #[arg(long)]
        csv: bool,
        spec: PathBuf,
    },
    /// Check 1/δ_m - 1/(mα) <= 1/δ̂_m <= 1/δ_m over toric candidates.
    Sandwich {
        #[arg(long, default_value_t = 1)]
        m: u64,
        spec: PathBuf,
    },
    /// Stabilization index N with b_{Np} = b_N^p.
    Gord {
        /// Ideals a_1, a_2, ... as "e,e;e,e" exponent lists.
        #[arg(long, num_args = 1.., required = true)]
        ideals: Vec<String>,
        #[arg(long, default_value_t = 4)]
        p_max: usize,
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        /// Boundary coefficients on the chart, e.g. "0,1/2".
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Sweep a coefficient family over a rational grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV table here (atomically) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["divisor", "ideal"]))]
struct LctArgs {
    /// Coefficients of an invariant divisor, e.g. "1,0,2".
    #[arg(long, requires = "spec")]
    divisor: Option<String>,
    /// Multiplier of the divisor.
    #[arg(long, requires = "divisor")]
    scale: Option<String>,
    /// Monomial ideal, e.g. "2,0;0,3".
    #[arg(long)]
    ideal: Option<String>,
    /// Boundary coefficients on the chart of the ideal.
    #[arg(long, requires = "ideal")]
    boundary: Option<String>,
    spec: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Text and JSON renderings of a result.
struct Rendered {
    text: String,
    json: Value,
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Output {
                    code: exit::OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Output {
                    code: exit::USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let json = cli.json;
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(Failure::Io(e.to_string())),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(r) => Output {
            code: exit::OK,
            stdout: if json {
                serde_json::to_string_pretty(&r.json).expect("json values serialize") + "\n"
            } else {
                r.text
            },
            stderr: String::new(),
        },
        Err(f) => failure(f, json),
    }
}

fn failure(f: Failure, json: bool) -> Output {
    let (code, kind, message) = match &f {
        Failure::Io(m) => (exit::FAILURE, "IoError", m.clone()),
        Failure::Core(e) => {
            let code = if e.is_budget() {
                exit::BUDGET
            } else if matches!(e, Error::CrossCheck(_)) {
                exit::FAILURE
            } else {
                exit::INVALID
            };
            (code, e.kind(), e.to_string())
        }
    };
    let stderr = if json {
        serde_json::to_string_pretty(&json!({ "error": kind, "message": message })).unwrap() + "\n"
    } else {
        format!("error: {message}\n")
    };
    Output {
        code,
        stdout: String::new(),
        stderr,
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> CliResult<ToricPair> {
    let text = read(path)?;
    Ok(config::parse_pair(&text, Format::detect(Some(path), &text))?)
}

fn rationals(text: &str) -> CliResult<Vec<Rational>> {
    Ok(text
        .split(',')
        .map(parse_rational)
        .collect::<kstab_core::Result<Vec<_>>>()?)
}

fn list(values: &[Rational]) -> String {
    format!("({})", values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Value {
    serde_json::to_value(value).expect("report serializes")
}

fn execute(command: Command) -> CliResult<Rendered> {
    match command {
        Command::Delta { spec } => delta_cmd(&load(&spec)?),
        Command::Alpha { spec } => alpha_cmd(&load(&spec)?),
        Command::Verdict { spec } => verdict_cmd(&load(&spec)?),
        Command::Approx { max_m, spec } => approx_cmd(&load(&spec)?, max_m),
        Command::Dstar { spec } => dstar_cmd(&load(&spec)?),
        Command::Interpolate { beta, point, spec } => {
            interpolate_cmd(&load(&spec)?, &beta, point.as_deref())
        }
        Command::Lct(args) => lct_cmd(args),
        Command::Filtration {
            ray,
            m,
            scale,
            extend_to,
            csv,
            spec,
        } => filtration_cmd(&load(&spec)?, ray, m, scale.as_deref(), extend_to, csv),
        Command::Sandwich { m, spec } => sandwich_cmd(&load(&spec)?, m),
        Command::Gord {
            ideals,
            p_max,
            max_n,
            boundary,
        } => gord_cmd(&ideals, p_max, max_n, boundary.as_deref()),
        Command::Sweep { config, out } => sweep_cmd(&config, out.as_deref()),
    }
}

fn ray_table(report: &PairReport) -> String {
    let mut rows = vec![["ray".to_string(), "A".into(), "S".into(), "T".into(), "A/S".into()]];
    for r in &report.rays {
        rows.push([
            kstab_core::NVector(r.ray.clone()).to_string(),
            r.a.to_string(),
            r.s.to_string(),
            r.t.to_string(),
            r.a_over_s.to_string(),
        ]);
    }
    table(&rows)
}

fn table<const N: usize>(rows: &[[String; N]]) -> String {
    let widths: Vec<usize> = (0..N)
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn delta_cmd(pair: &ToricPair) -> CliResult<Rendered> {
    let report = PairReport::new(pair)?;
    let ray = &pair.rays()[report.witness_ray];
    let text = format!(
        "delta = {} (witness ray {ray})\nbarycenter = ({})\n{}",
        report.delta,
        report.barycenter.join(", "),
        ray_table(&report)
    );
    Ok(Rendered {
        text,
        json: to_json(&report),
    })
}

fn alpha_cmd(pair: &ToricPair) -> CliResult<Rendered> {
    let report = PairReport::new(pair)?;
    let (alpha, witness) = alpha_with_witness(pair)?;
    let text = format!(
        "alpha = {alpha} (witness ray {})\n{}",
        pair.rays()[witness],
        ray_table(&report)
    );
    Ok(Rendered {
        text,
        json: to_json(&report),
    })
}

fn verdict_cmd(pair: &ToricPair) -> CliResult<Rendered> {
    let v = verdict(pair)?;
    let report = PairReport::new(pair)?;
    let text = format!(
        "delta = {} \u{2014} {} (witness ray {})\n",
        v.delta,
        v.classification.describe(),
        pair.rays()[v.witness_ray]
    );
    Ok(Rendered {
        text,
        json: to_json(&report),
    })
}

fn approx_cmd(pair: &ToricPair, max_m: u64) -> CliResult<Rendered> {
    if max_m == 0 {
        return Err(Error::InvalidArgument("--max-m must be at least 1".into()).into());
    }
    let report = PairReport::new(pair)?;
    let mut rows = vec![["m".to_string(), "N_m".into(), "delta_m".into(), "alpha_m".into()]];
    let mut entries = Vec::new();
    for m in 1..=max_m {
        let basis = SectionBasis::new(pair, m)?;
        let d = delta_m_from_basis(pair, &basis)?;
        let a = alpha_m_from_basis(pair, &basis)?;
        rows.push([m.to_string(), basis.len().to_string(), d.to_string(), a.to_string()]);
        entries.push(json!({
            "m": m,
            "n_m": basis.len(),
            "delta_m": d.to_string(),
            "alpha_m": a.to_string(),
        }));
    }
    let text = format!(
        "{}delta = {}, alpha = {}\n",
        table(&rows),
        report.delta,
        report.alpha
    );
    Ok(Rendered {
        text,
        json: json!({
            "delta": report.delta.to_string(),
            "alpha": report.alpha.to_string(),
            "rows": entries,
        }),
    })
}

fn dstar_cmd(pair: &ToricPair) -> CliResult<Rendered> {
    let d = dstar(pair)?;
    let after = kstab_core::invariants::delta(&d.interpolated)?;
    let text = format!(
        "delta = {}\npoint = {}\nD* = {}\nboundary with (1 - delta) D* = {}\ndelta after = {}\n",
        d.delta,
        list(d.point.coords()),
        list(&d.divisor.coeffs),
        list(d.interpolated.boundary()),
        after
    );
    Ok(Rendered {
        text,
        json: json!({
            "delta": d.delta.to_string(),
            "point": strings(d.point.coords()),
            "divisor": strings(&d.divisor.coeffs),
            "interpolated_boundary": strings(d.interpolated.boundary()),
            "interpolated_delta": after.to_string(),
        }),
    })
}

fn interpolate_cmd(pair: &ToricPair, beta: &str, point: Option<&str>) -> CliResult<Rendered> {
    let beta = parse_rational(beta)?;
    let u = match point {
        Some(p) => MPoint(rationals(p)?),
        None => dstar(pair)?.point,
    };
    let value = interpolation_delta(pair, &u, &beta)?;
    let interpolated = pair.interpolated_pair(&u, &beta)?;
    let bound = kstab_core::invariants::delta(pair)? / &beta;
    let text = format!(
        "beta = {beta}\npoint = {}\nboundary = {}\ndelta = {value}\ndelta(X, Delta) / beta = {bound}\n",
        list(u.coords()),
        list(interpolated.boundary())
    );
    Ok(Rendered {
        text,
        json: json!({
            "beta": beta.to_string(),
            "point": strings(u.coords()),
            "boundary": strings(interpolated.boundary()),
            "delta": value.to_string(),
            "bound": bound.to_string(),
        }),
    })
}

fn lct_cmd(args: LctArgs) -> CliResult<Rendered> {
    if let Some(ideal) = args.ideal {
        let ideal = parse_ideal(&ideal)?;
        let boundary = match args.boundary {
            Some(b) => rationals(&b)?,
            None => vec![Rational::from_integer(0.into()); ideal.nvars()],
        };
        let value = lct_monomial(&ideal, &boundary)?;
        return Ok(Rendered {
            text: format!("ideal = {ideal}\nlct = {value}\n"),
            json: json!({
                "ideal": to_json(ideal.generators()),
                "boundary": strings(&boundary),
                "lct": value.to_string(),
            }),
        });
    }
    let spec = args.spec.expect("clap enforces a spec with --divisor");
    let pair = load(&spec)?;
    let divisor = ToricDivisor {
        coeffs: rationals(args.divisor.as_deref().unwrap_or_default())?,
    };
    let scale = match args.scale {
        Some(s) => parse_rational(&s)?,
        None => Rational::from_integer(1.into()),
    };
    let value = lct_invariant_divisor(&pair, &divisor, &scale)?;
    Ok(Rendered {
        text: format!("lct = {value}\n"),
        json: json!({
            "divisor": strings(&divisor.coeffs),
            "scale": scale.to_string(),
            "lct": value.to_string(),
        }),
    })
}

fn filtration_cmd(
    pair: &ToricPair,
    ray: usize,
    m: u64,
    scale: Option<&str>,
    extend_to: Option<u64>,
    csv: bool,
) -> CliResult<Rendered> {
    if ray >= pair.num_rays() {
        return Err(Error::InvalidArgument(format!(
            "ray index {ray} out of range (the fan has {} rays)",
            pair.num_rays()
        ))
        .into());
    }
    if m == 0 {
        return Err(Error::InvalidArgument("--m must be at least 1".into()).into());
    }
    let scale = match scale {
        Some(s) => parse_rational(s)?,
        None => Rational::from_integer(1.into()),
    };
    let basis = SectionBasis::new(pair, m)?;
    let base = RationalWeights::from_ray(pair, &basis, ray, &scale)?.round_to_n()?;
    let (points, weights) = match extend_to {
        Some(level) => {
            let mut budget = Budget::from_env();
            ExtendedFiltration::new(pair.moment_polytope(), basis.points.clone(), base)?
                .weights_at(level, &mut budget)?
        }
        None => (basis.points.clone(), base),
    };
    let jumps = weights.jumping_numbers();
    let body = json!({
        "ray": pair.rays()[ray].0,
        "degree": weights.degree(),
        "jumping_numbers": jumps,
        "S_m": weights.s_m().to_string(),
        "T_m": weights.t_m().to_string(),
    });
    let text = if csv {
        weight_table_csv(&points, &weights)?
    } else {
        let mut t = String::new();
        let _ = writeln!(t, "ray {} at degree {}", pair.rays()[ray], weights.degree());
        let _ = writeln!(
            t,
            "jumping numbers = {}",
            jumps.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        );
        let _ = writeln!(t, "S_m = {}", weights.s_m());
        let _ = writeln!(t, "T_m = {}", weights.t_m());
        t
    };
    Ok(Rendered { text, json: body })
}

fn sandwich_cmd(pair: &ToricPair, m: u64) -> CliResult<Rendered> {
    let mut budget = Budget::from_env();
    let r = delta_hat_sandwich_check(pair, m, &mut budget)?;
    let text = format!(
        "m = {}\n1/delta_m - 1/(m alpha) = {}\n1/delta_hat (candidates) = {}\n1/delta_m = {}\n{} candidates on {} charts: {}\n",
        r.m,
        r.lower,
        r.inv_delta_hat,
        r.upper,
        r.candidates,
        r.charts,
        if r.holds() { "holds" } else { "FAILS" }
    );
    let mut json = to_json(&r);
    json["holds"] = Value::Bool(r.holds());
    Ok(Rendered { text, json })
}

fn gord_cmd(ideals: &[String], p_max: usize, max_n: usize, boundary: Option<&str>) -> CliResult<Rendered> {
    let ideals = ideals
        .iter()
        .map(|s| parse_ideal(s))
        .collect::<kstab_core::Result<Vec<_>>>()?;
    let nvars = ideals[0].nvars();
    let boundary = match boundary {
        Some(b) => rationals(b)?,
        None => vec![Rational::from_integer(0.into()); nvars],
    };
    let mut budget = Budget::from_env();
    let seq = gord_stabilize(&ideals, StabilizationSearch { p_max, max_n }, &mut budget)?;
    let cert = seq.certificate().expect("stabilization returns a certificate");
    let b_n = seq.term(cert.n).expect("term N is computed");
    let lct = lct_graded_sequence(&seq, &boundary)?;
    Ok(Rendered {
        text: format!(
            "N = {} (verified for p <= {})\nb_N = {b_n}\nlct = {lct}\n",
            cert.n, cert.p_max
        ),
        json: json!({
            "n": cert.n,
            "p_max": cert.p_max,
            "b_n": to_json(b_n.generators()),
            "lct": lct.to_string(),
        }),
    })
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn sweep_cmd(path: &Path, out: Option<&Path>) -> CliResult<Rendered> {
    let text = read(path)?;
    let doc = config::parse_document(&text, Format::detect(Some(path), &text))?;
    let spec = doc
        .sweep
        .ok_or_else(|| Error::parse(path.display().to_string(), "missing [sweep] table"))?;
    let report = sweep(&doc.spec, &spec);
    let csv = report.to_csv()?;
    let text = match out {
        Some(p) => {
            write_atomic(p, &csv)?;
            let mut t = format!(
                "{} grid points, {} invalid, {} semicontinuity flags ({})\n",
                report.rows.len() + report.invalid.len(),
                report.invalid.len(),
                report.flags.len(),
                report.label
            );
            for f in &report.flags {
                let _ = writeln!(
                    t,
                    "flag at {} = {}: delta = {} (left {}, right {})",
                    report.param, f.t, f.delta, f.left, f.right
                );
            }
            for p in &report.invalid {
                let _ = writeln!(t, "invalid at {} = {}: {}", report.param, p.t, p.error);
            }
            t
        }
        None => csv,
    };
    Ok(Rendered {
        text,
        json: to_json(&report),
    })
}
