//! Command-line front end: run verification suites, sample eigenstate
//! families on a grid, export operator matrices, and dump profile data for
//! plotting.
//!
//! Exit contract: 0 all checks pass, 1 checks ran and some failed,
//! 2 configuration or construction error, 3 I/O error.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use biortho_core::deformation::{
    eigen_p, eigen_q, make_deformed, metric_apply, IdentityMap, MetricKind, SimilarityMap,
};
use biortho_core::distributions::{Distribution, RegularKind};
use biortho_core::green::{kernel_g, GreenMap};
use biortho_core::rankone::RankOneMap;
use biortho_core::spectral::{apply_p0, apply_q0, QuadratureRule, TestFunction};
use biortho_core::verifier::{
    check_quasi_basis, run_suite, Battery, CheckResult, ParamValue, SuiteConfig,
    VerificationReport,
};

const GREEN_DEFAULT_N: usize = 384;
const GREEN_DEFAULT_EXTENT: f64 = 30.0;
const GREEN_DEFAULT_POINTS: usize = 8192;
const DEFAULT_N: usize = 64;

#[derive(Parser)]
#[command(
    name = "biortho",
    version,
    about = "Similarity-deformed position/momentum pairs on a Hermite basis: \
             verify identities, sample eigenstates, export matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Map preset.
    #[arg(long, global = true, value_enum, default_value = "identity")]
    map: MapPreset,

    /// Rank-one deformation strength, as "re,im".
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,

    /// Rank-one u: hermite:k, gaussian:center,width, or a coefficient file.
    #[arg(long, global = true)]
    u: Option<String>,

    /// Rank-one v (defaults to u).
    #[arg(long, global = true)]
    v: Option<String>,

    /// Hermite modes to keep.  Defaults: 64 (384 for green), or the
    /// BIORTHO_DEFAULT_N environment variable.
    #[arg(long, global = true)]
    basis_size: Option<usize>,

    /// Half-width of the uniform grid (green map; sampling commands).
    #[arg(long, global = true)]
    grid_extent: Option<f64>,

    /// Point count of the uniform grid.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Override the map's verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format where a choice exists (matrix export).
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the verification suite and emit its JSON report.
    Verify,
    /// Sample one eigenstate family member on a uniform grid.
    Eigenstate {
        /// eta/eta-up take --x0; mu/mu-up take --p0.
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        p0: Option<f64>,
    },
    /// Export an operator's Hermite-basis matrix ⟨e_m, Ô e_n⟩.
    Matrix {
        #[arg(long, value_enum)]
        operator: OperatorKind,
    },
    /// Dump a data series for plotting.
    Profile {
        #[arg(long, value_enum)]
        what: What,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapPreset {
    Identity,
    Rankone,
    Green,
}

impl MapPreset {
    fn label(self) -> &'static str {
        match self {
            MapPreset::Identity => "identity",
            MapPreset::Rankone => "rankone",
            MapPreset::Green => "green",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// η_{x₀} = T δ_{x₀}
    Eta,
    /// η^{x₀} = (T⁻¹)† δ_{x₀}
    EtaUp,
    /// μ_{p₀} = T θ_{p₀}
    Mu,
    /// μ^{p₀} = (T⁻¹)† θ_{p₀}
    MuUp,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorKind {
    Q,
    P,
    Q0,
    P0,
    #[value(name = "S_eta")]
    SEta,
    #[value(name = "S_eta_up")]
    SEtaUp,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    /// |G(x)| and its real/imaginary parts (green map only).
    Kernel,
    /// Quasi-basis residuals at truncations 16, 32, 64.
    QuasiBasisResiduals,
    /// Samples of every standard battery member.
    Battery,
}

/// Config/construction problems exit 2; filesystem problems exit 3.
enum Failure {
    Config(String),
    Io(String),
}

impl Failure {
    fn io(context: &str, err: std::io::Error) -> Failure {
        Failure::Io(format!("{context}: {err}"))
    }
}

fn cfg<E: std::fmt::Display>(err: E) -> Failure {
    Failure::Config(err.to_string())
}

enum BuiltMap {
    Identity(IdentityMap),
    RankOne(Box<RankOneMap>),
    Green(Box<GreenMap>),
}

impl BuiltMap {
    fn as_dyn(&self) -> &dyn SimilarityMap {
        match self {
            BuiltMap::Identity(m) => m,
            BuiltMap::RankOne(m) => m.as_ref(),
            BuiltMap::Green(m) => m.as_ref(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Cmd::Verify => cmd_verify(cli),
        Cmd::Eigenstate { family, x0, p0 } => cmd_eigenstate(cli, *family, *x0, *p0),
        Cmd::Matrix { operator } => cmd_matrix(cli, *operator),
        Cmd::Profile { what } => cmd_profile(cli, *what),
    }
}

// ---------------------------------------------------------------- parsing

fn parse_complex(s: &str) -> Result<C64, Failure> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| Failure::Config(format!("complex scalars are \"re,im\" pairs, got {s:?}")))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("bad real part in complex scalar {s:?}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("bad imaginary part in complex scalar {s:?}")))?;
    Ok(C64::new(re, im))
}

/// hermite:k, gaussian:center,width (unit-normalized), or a path to a
/// coefficient file ("hermite-coeffs N=…" header, then "re,im" lines).
fn parse_state(spec: &str, n: usize, rule: &QuadratureRule) -> Result<TestFunction, Failure> {
    if let Some(k) = spec.strip_prefix("hermite:") {
        let k: usize = k
            .parse()
            .map_err(|_| Failure::Config(format!("bad hermite index in {spec:?}")))?;
        if k >= n {
            return Err(Failure::Config(format!(
                "hermite:{k} does not fit in a basis of {n} modes"
            )));
        }
        return Ok(TestFunction::basis_vector(n, k));
    }
    if let Some(params) = spec.strip_prefix("gaussian:") {
        let (c, w) = params
            .split_once(',')
            .ok_or_else(|| Failure::Config(format!("gaussian preset wants center,width, got {spec:?}")))?;
        let c: f64 = c
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("bad gaussian center in {spec:?}")))?;
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("bad gaussian width in {spec:?}")))?;
        if !(w > 0.0) {
            return Err(Failure::Config(format!("gaussian width must be positive, got {w}")));
        }
        let samples: Vec<C64> = rule
            .nodes
            .iter()
            .map(|&t| C64::new((-(t - c) * (t - c) / (2.0 * w * w)).exp(), 0.0))
            .collect();
        let f = rule.project(n, &samples);
        let norm = f.norm();
        if norm == 0.0 {
            return Err(Failure::Config(format!("{spec:?} projects to zero on {n} modes")));
        }
        return Ok(f.scaled(C64::new(1.0 / norm, 0.0)));
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::io(&format!("reading {spec:?}"), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Failure::Config(format!("coefficient file {spec:?} is empty")))?;
    let declared: usize = header
        .strip_prefix("hermite-coeffs N=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| {
            Failure::Config(format!(
                "coefficient file {spec:?} must start with \"hermite-coeffs N=…\", got {header:?}"
            ))
        })?;
    if declared != n {
        return Err(Failure::Config(format!(
            "coefficient file {spec:?} declares N={declared} but the basis has {n} modes"
        )));
    }
    let mut coeffs = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        coeffs.push(parse_complex(line).map_err(|_| {
            Failure::Config(format!("bad coefficient on line {} of {spec:?}: {line:?}", i + 2))
        })?);
    }
    if coeffs.len() != n {
        return Err(Failure::Config(format!(
            "coefficient file {spec:?} has {} coefficients, expected {n}",
            coeffs.len()
        )));
    }
    Ok(TestFunction::new(coeffs))
}

fn resolve_n(cli: &Cli) -> Result<usize, Failure> {
    if let Some(n) = cli.basis_size {
        if n == 0 {
            return Err(Failure::Config("--basis-size must be positive".into()));
        }
        return Ok(n);
    }
    if let Ok(s) = std::env::var("BIORTHO_DEFAULT_N") {
        return match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Config(format!(
                "BIORTHO_DEFAULT_N must be a positive integer, got {s:?}"
            ))),
        };
    }
    Ok(match cli.map {
        MapPreset::Green => GREEN_DEFAULT_N,
        _ => DEFAULT_N,
    })
}

fn grid_for(cli: &Cli) -> Option<(f64, usize)> {
    match cli.map {
        MapPreset::Green => Some((
            cli.grid_extent.unwrap_or(GREEN_DEFAULT_EXTENT),
            cli.grid_points.unwrap_or(GREEN_DEFAULT_POINTS),
        )),
        _ => None,
    }
}

/// `honor_grid_flags` routes --grid-extent/--grid-points into the green
/// map's internal grid (verify does this); sampling commands keep the map at
/// its defaults and use those flags for the output grid instead.
fn build_map(cli: &Cli, n: usize, honor_grid_flags: bool) -> Result<BuiltMap, Failure> {
    match cli.map {
        MapPreset::Identity => Ok(BuiltMap::Identity(IdentityMap)),
        MapPreset::Rankone => {
            let alpha = parse_complex(cli.alpha.as_deref().unwrap_or("1,0"))?;
            let rule = QuadratureRule::gauss_hermite(2 * n);
            let u = parse_state(cli.u.as_deref().unwrap_or("hermite:0"), n, &rule)?;
            let v = match cli.v.as_deref() {
                Some(spec) => parse_state(spec, n, &rule)?,
                None => u.clone(),
            };
            Ok(BuiltMap::RankOne(Box::new(
                RankOneMap::new(u, v, alpha).map_err(cfg)?,
            )))
        }
        MapPreset::Green => {
            let (extent, points) = if honor_grid_flags {
                grid_for(cli).unwrap()
            } else {
                (GREEN_DEFAULT_EXTENT, GREEN_DEFAULT_POINTS)
            };
            Ok(BuiltMap::Green(Box::new(
                GreenMap::new(n, extent, points).map_err(cfg)?,
            )))
        }
    }
}

// ----------------------------------------------------------------- output

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(cli: &Cli, content: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::io(&format!("writing {}", path.display()), e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ----------------------------------------------------------------- verify

/// The shape run_suite itself reports when map admission fails, for
/// configurations that die before a suite can even start.
fn construction_report(map: &str, n: usize, grid: Option<(f64, usize)>, tol: f64, reason: &str) -> VerificationReport {
    VerificationReport {
        map: map.into(),
        config: SuiteConfig {
            basis_size: n,
            grid,
            map_tol: tol,
        },
        checks: vec![CheckResult {
            name: "construction".into(),
            anchor: "similarity-map admissibility (round-trip gate, spill/boundary guards)".into(),
            params: vec![("error".into(), ParamValue::Text(reason.into()))],
            residual: f64::NAN,
            tol,
            pass: false,
            ms: None,
        }],
        pass: false,
    }
}

fn emit_report(cli: &Cli, report: &VerificationReport, started: Instant) -> Result<(), Failure> {
    let json = format!("{}\n", report.to_json());
    match &cli.out {
        Some(path) => {
            fs::write(path, &json)
                .map_err(|e| Failure::io(&format!("writing {}", path.display()), e))?;
            for line in report.console_lines() {
                println!("{line}");
            }
            println!(
                "{}: {} checks, {} in {:.2} s — report at {}",
                report.map,
                report.checks.len(),
                if report.pass { "all passed" } else { "FAILURES" },
                started.elapsed().as_secs_f64(),
                path.display()
            );
        }
        None => {
            for line in report.console_lines() {
                eprintln!("{line}");
            }
            print!("{json}");
        }
    }
    Ok(())
}

fn default_tol(map: MapPreset) -> f64 {
    match map {
        MapPreset::Green => 1e-5,
        _ => 1e-10,
    }
}

fn cmd_verify(cli: &Cli) -> Result<i32, Failure> {
    let started = Instant::now();
    let n = resolve_n(cli)?;
    let grid = grid_for(cli);
    let fallback_tol = cli.tol.unwrap_or(default_tol(cli.map));

    let built = match build_map(cli, n, true) {
        Ok(b) => b,
        Err(Failure::Config(msg)) => {
            let report = construction_report(cli.map.label(), n, grid, fallback_tol, &msg);
            emit_report(cli, &report, started)?;
            eprintln!("error: {msg}");
            return Ok(2);
        }
        Err(other) => return Err(other),
    };
    let map = built.as_dyn();
    let tol = cli.tol.unwrap_or_else(|| map.tol());

    let rule = QuadratureRule::gauss_hermite(2 * n);
    let battery = match Battery::standard(n, &rule) {
        Ok(b) => b,
        Err(e) => {
            let msg = e.to_string();
            let report = construction_report(&map.name(), n, grid, tol, &msg);
            emit_report(cli, &report, started)?;
            eprintln!("error: {msg}");
            return Ok(2);
        }
    };

    let report = run_suite(map, &battery, tol);
    emit_report(cli, &report, started)?;
    if report.pass {
        return Ok(0);
    }
    let constructional = report
        .checks
        .iter()
        .any(|c| !c.pass && (c.name == "construction" || c.name == "aborted"));
    if constructional {
        eprintln!("error: the suite could not run to completion; see the report");
        return Ok(2);
    }
    Ok(1)
}

// -------------------------------------------------------------- eigenstate

/// Split a distribution into header descriptions plus sampleable parts.
/// Delta/DeltaDeriv summands stay symbolic (header-only); plane waves and
/// regular kernels are sampled with their combination weight multiplied in.
fn flatten_state(
    dist: &Distribution,
    weight: C64,
    header: &mut Vec<String>,
    parts: &mut Vec<Box<dyn Fn(f64) -> C64>>,
) {
    let w = weight;
    match dist {
        Distribution::Delta { x0 } => {
            header.push(format!(
                "# symbolic: weight=({},{}) Delta(x0={})",
                fmt_f(w.re),
                fmt_f(w.im),
                fmt_f(*x0)
            ));
        }
        Distribution::DeltaDeriv { x0, order } => {
            header.push(format!(
                "# symbolic: weight=({},{}) DeltaDeriv(x0={}, order={order})",
                fmt_f(w.re),
                fmt_f(w.im),
                fmt_f(*x0)
            ));
        }
        Distribution::PlaneWave { p0 } => {
            header.push(format!(
                "# sampled: weight=({},{}) PlaneWave(p0={})",
                fmt_f(w.re),
                fmt_f(w.im),
                fmt_f(*p0)
            ));
            let p0 = *p0;
            let scale = 1.0 / (2.0 * PI).sqrt();
            parts.push(Box::new(move |x| w * C64::new(0.0, p0 * x).exp() * scale));
        }
        Distribution::Regular(RegularKind::Span(f)) => {
            header.push(format!(
                "# sampled: weight=({},{}) HermiteSpan(modes={})",
                fmt_f(w.re),
                fmt_f(w.im),
                f.len()
            ));
            let f = f.clone();
            parts.push(Box::new(move |x| w * f.eval(x)));
        }
        Distribution::Regular(RegularKind::Closed(k)) => {
            let kink = match k.kink {
                Some((at, _)) => format!(" kink_at={}", fmt_f(at)),
                None => String::new(),
            };
            header.push(format!(
                "# sampled: weight=({},{}) Closed[{}]{kink}",
                fmt_f(w.re),
                fmt_f(w.im),
                k.label
            ));
            let eval = k.eval.clone();
            parts.push(Box::new(move |x| w * eval(x)));
        }
        Distribution::LinearComb(terms) => {
            for (c, part) in terms {
                flatten_state(part, w * c, header, parts);
            }
        }
    }
}

fn cmd_eigenstate(cli: &Cli, family: Family, x0: Option<f64>, p0: Option<f64>) -> Result<i32, Failure> {
    let n = resolve_n(cli)?;
    let built = build_map(cli, n, false)?;
    let map = built.as_dyn();

    let (dist, label, param) = match family {
        Family::Eta | Family::EtaUp => {
            let x0 = x0.ok_or_else(|| Failure::Config("--x0 is required for the eta families".into()))?;
            let (lower, upper) = eigen_q(map, x0).map_err(cfg)?;
            match family {
                Family::Eta => (lower, "eta", ("x0", x0)),
                _ => (upper, "eta-up", ("x0", x0)),
            }
        }
        Family::Mu | Family::MuUp => {
            let p0 = p0.ok_or_else(|| Failure::Config("--p0 is required for the mu families".into()))?;
            let (lower, upper) = eigen_p(map, p0).map_err(cfg)?;
            match family {
                Family::Mu => (lower, "mu", ("p0", p0)),
                _ => (upper, "mu-up", ("p0", p0)),
            }
        }
    };

    let extent = cli.grid_extent.unwrap_or(8.0);
    let points = cli.grid_points.unwrap_or(321);
    if !(extent > 0.0) || points < 2 {
        return Err(Failure::Config(
            "eigenstate sampling wants a positive extent and at least two grid points".into(),
        ));
    }

    let mut header = vec![format!(
        "# family={label} map={} {}={}",
        map.name(),
        param.0,
        fmt_f(param.1)
    )];
    let mut parts: Vec<Box<dyn Fn(f64) -> C64>> = Vec::new();
    flatten_state(&dist, C64::new(1.0, 0.0), &mut header, &mut parts);

    let mut csv = header.join("\n");
    csv.push_str("\nx,re,im\n");
    let step = 2.0 * extent / (points - 1) as f64;
    for i in 0..points {
        let x = -extent + step * i as f64;
        let value: C64 = parts.iter().map(|f| f(x)).sum();
        csv.push_str(&format!("{},{},{}\n", fmt_f(x), fmt_f(value.re), fmt_f(value.im)));
    }
    write_output(cli, &csv)?;
    Ok(0)
}

// ------------------------------------------------------------------ matrix

fn cmd_matrix(cli: &Cli, operator: OperatorKind) -> Result<i32, Failure> {
    let n = resolve_n(cli)?;
    let built = build_map(cli, n, false)?;
    let map = built.as_dyn();

    let op_name = match operator {
        OperatorKind::Q => "q",
        OperatorKind::P => "p",
        OperatorKind::Q0 => "q0",
        OperatorKind::P0 => "p0",
        OperatorKind::SEta => "S_eta",
        OperatorKind::SEtaUp => "S_eta_up",
    };

    // Column n holds the expansion of Ô e_n; entry (m, n) is ⟨e_m, Ô e_n⟩.
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    match operator {
        OperatorKind::Q0 => {
            for j in 0..n {
                columns.push(apply_q0(&TestFunction::basis_vector(n, j)).0.coeffs);
            }
        }
        OperatorKind::P0 => {
            for j in 0..n {
                columns.push(apply_p0(&TestFunction::basis_vector(n, j)).0.coeffs);
            }
        }
        OperatorKind::Q | OperatorKind::P => {
            let pair = make_deformed(map, &[]).map_err(cfg)?;
            for j in 0..n {
                let e = TestFunction::basis_vector(n, j);
                let (g, _spill) = match operator {
                    OperatorKind::Q => pair.q(&e).map_err(cfg)?,
                    _ => pair.p(&e).map_err(cfg)?,
                };
                columns.push(g.coeffs);
            }
        }
        OperatorKind::SEta | OperatorKind::SEtaUp => {
            let kind = match operator {
                OperatorKind::SEta => MetricKind::Lower,
                _ => MetricKind::Upper,
            };
            for j in 0..n {
                let e = TestFunction::basis_vector(n, j);
                columns.push(metric_apply(kind, map, &e).map_err(cfg)?.coeffs);
            }
        }
    }

    let content = match cli.format {
        Format::Csv => {
            let mut s = format!("# operator={op_name} map={} n={n}\n", map.name());
            for m in 0..n {
                let row: Vec<String> = (0..n)
                    .flat_map(|j| [fmt_f(columns[j][m].re), fmt_f(columns[j][m].im)])
                    .collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut s = format!(
                "{{\n  \"operator\": \"{op_name}\",\n  \"map\": \"{}\",\n  \"n\": {n},\n  \"rows\": [\n",
                map.name()
            );
            for m in 0..n {
                let row: Vec<String> = (0..n)
                    .flat_map(|j| [fmt_f(columns[j][m].re), fmt_f(columns[j][m].im)])
                    .collect();
                s.push_str(&format!("    [{}]{}\n", row.join(", "), if m + 1 < n { "," } else { "" }));
            }
            s.push_str("  ]\n}\n");
            s
        }
    };
    write_output(cli, &content)?;
    Ok(0)
}

// ----------------------------------------------------------------- profile

fn cmd_profile(cli: &Cli, what: What) -> Result<i32, Failure> {
    let n = resolve_n(cli)?;
    let built = build_map(cli, n, false)?;
    let map = built.as_dyn();

    let content = match what {
        What::Kernel => {
            if !matches!(built, BuiltMap::Green(_)) {
                return Err(Failure::Config(format!(
                    "the {} map has no convolution kernel",
                    map.name()
                )));
            }
            let extent = cli.grid_extent.unwrap_or(10.0);
            let points = cli.grid_points.unwrap_or(401);
            if !(extent > 0.0) || points < 2 {
                return Err(Failure::Config(
                    "kernel sampling wants a positive extent and at least two grid points".into(),
                ));
            }
            let mut s = format!("# map={} kernel G(x)\nx,abs,re,im\n", map.name());
            let step = 2.0 * extent / (points - 1) as f64;
            for i in 0..points {
                let x = -extent + step * i as f64;
                let g = kernel_g(x);
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f(x),
                    fmt_f(g.norm()),
                    fmt_f(g.re),
                    fmt_f(g.im)
                ));
            }
            s
        }
        What::QuasiBasisResiduals => {
            let rule = QuadratureRule::gauss_hermite(2 * n);
            let probe = parse_state(cli.u.as_deref().unwrap_or("gaussian:-3,2"), n, &rule)?;
            let mut s = format!("# map={} quasi-basis residual vs truncation\nm,residual\n", map.name());
            for m in [16usize, 32, 64] {
                let r = check_quasi_basis(map, &probe, &probe, m).map_err(cfg)?;
                s.push_str(&format!("{m},{}\n", fmt_f(r)));
            }
            s
        }
        What::Battery => {
            let rule = QuadratureRule::gauss_hermite(2 * n);
            let battery = Battery::standard(n, &rule).map_err(cfg)?;
            let extent = cli.grid_extent.unwrap_or(8.0);
            let points = cli.grid_points.unwrap_or(161);
            if !(extent > 0.0) || points < 2 {
                return Err(Failure::Config(
                    "battery sampling wants a positive extent and at least two grid points".into(),
                ));
            }
            let mut s = String::from("member,x,re,im\n");
            let step = 2.0 * extent / (points - 1) as f64;
            for (name, f) in &battery.members {
                for i in 0..points {
                    let x = -extent + step * i as f64;
                    let value = f.eval(x);
                    s.push_str(&format!(
                        "\"{name}\",{},{},{}\n",
                        fmt_f(x),
                        fmt_f(value.re),
                        fmt_f(value.im)
                    ));
                }
            }
            s
        }
    };
    write_output(cli, &content)?;
    Ok(0)
}
