//! Command-line interface: argument definitions and the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sinebody_core::centroid::CentroidBody;
use sinebody_core::harness::{self, VerificationReport};
use sinebody_core::sine_polar::sine_polar;
use sinebody_core::{geometry, quadrature, BodyDescriptor, BodyRef, RuleSpec, SphericalRule, StarBody};

use crate::descriptor::DescriptorFile;
use crate::error::{Error, Result};
use crate::report::write_reports;
use crate::suite::{check_p_grid, run_suite, zoo_suite, CheckKind, CheckSpec, RunOptions, SuiteConfig};
use crate::zoo;

/// Numerical sine polarity: volumes, sine polar bodies, L_p-sine centroid
/// bodies and inequality checks for origin-symmetric bodies.
#[derive(Debug, Parser)]
#[command(name = "sinebody", version, about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the volume of a body.
    Volume(BodyArgs),
    /// Tabulate the radial function of the sine polar body on the rule nodes.
    SinePolar(TableArgs),
    /// Tabulate the polar L_p-sine centroid body and its volume product.
    Centroid(CentroidArgs),
    /// Run a verification suite and write one CSV row per check.
    Verify(VerifyArgs),
    /// Volume products of the polar L_p-sine centroid bodies along a p grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    /// Descriptor file, or a built-in name (ball, ball2, ball3, ellipse,
    /// spheroid, square, cube, bicylinder, tricylinder).
    #[arg(long)]
    pub body: String,
    /// Dimension of `ball`, or the expected dimension of the body.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Quadrature rule: uniform:N (n=2), gauss:N or gauss:NxM (n=3), mc:N:SEED.
    #[arg(long)]
    pub rule: Option<String>,
    /// Seed for Monte Carlo rules.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail (exit 1) when the volume product exceeds 1 + tol.
    #[arg(long)]
    pub check: bool,
    /// Pass tolerance of --check.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CentroidArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Exponent p >= 1.
    #[arg(long, conflicts_with = "p_grid")]
    pub p: Option<f64>,
    /// Comma-separated, strictly increasing exponents.
    #[arg(long)]
    pub p_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Comma-separated, strictly increasing exponents.
    #[arg(long)]
    pub p_grid: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite configuration (JSON). Without it, --body selects an ad-hoc
    /// suite and otherwise the built-in zoo suite runs.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Body for an ad-hoc suite.
    #[arg(long, conflicts_with = "config")]
    pub body: Option<String>,
    /// Second body for the pair checks of an ad-hoc suite.
    #[arg(long, requires = "body")]
    pub body2: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Rule used for every dimension of the suite.
    #[arg(long)]
    pub rule: Option<String>,
    #[arg(long, conflicts_with = "p_grid")]
    pub p: Option<f64>,
    #[arg(long)]
    pub p_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pass tolerance for every check.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock times in the wall_ms column.
    #[arg(long)]
    pub timing: bool,
}

/// Runs a parsed command; `Ok(false)` means everything was computed but a
/// verification failed.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Volume(args) => cmd_volume(&args, stdout),
        Command::SinePolar(args) => cmd_sine_polar(&args, stdout),
        Command::Centroid(args) => cmd_centroid(&args, stdout),
        Command::Verify(args) => cmd_verify(&args, stdout, stderr),
        Command::Sweep(args) => cmd_sweep(&args, stdout),
    }
}

/// Maps the result of [`run`] to a process exit code: 0 success, 1 failed
/// verification or computation, 2 malformed input.
pub fn exit_code(result: &Result<bool>) -> i32 {
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}

fn parse_p_grid(text: &str) -> Result<Vec<f64>> {
    let grid = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("--p-grid: {s:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_p_grid(&grid).map_err(|e| Error::Usage(format!("--p-grid: {e}")))?;
    Ok(grid)
}

fn check_p(p: f64) -> Result<f64> {
    if p.is_finite() && p >= 1.0 {
        Ok(p)
    } else {
        Err(Error::Usage(format!("--p must be finite and >= 1, got {p}")))
    }
}

fn rule_for(dim: usize, rule: &Option<String>, seed: Option<u64>) -> Result<SphericalRule> {
    let mut spec = match rule {
        Some(s) => s.parse::<RuleSpec>().map_err(|e| Error::Usage(format!("--rule: {e}")))?,
        None => RuleSpec::default_for(dim),
    };
    if let Some(seed) = seed {
        if !spec.is_deterministic() {
            spec = spec.with_seed(seed);
        }
    }
    spec.build(dim).map_err(|e| Error::Usage(format!("--rule: {e}")))
}

fn load(args: &BodyArgs) -> Result<(BodyDescriptor, SphericalRule)> {
    let body = zoo::resolve(&args.body, args.dim)?;
    let rule = rule_for(body.dim(), &args.rule, args.seed)?;
    Ok((body, rule))
}

/// Output sink: the --out file or stdout.
fn with_output<T>(
    out: &Option<PathBuf>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<T>,
) -> Result<T> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            let value = f(&mut w)?;
            w.flush()?;
            Ok(value)
        }
        None => f(stdout),
    }
}

fn coordinate_header(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("u{i}")).collect()
}

fn cmd_volume(args: &BodyArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (body, rule) = load(args)?;
    let v = quadrature::volume(&body, &rule)?;
    writeln!(stdout, "body,{}", body.label())?;
    writeln!(stdout, "n,{}", body.dim())?;
    writeln!(stdout, "rule,{}", rule.id())?;
    writeln!(stdout, "nodes,{}", rule.len())?;
    writeln!(stdout, "volume,{v}")?;
    Ok(true)
}

fn product_report(name: &str, body: &dyn StarBody, p: Option<f64>, rule: &SphericalRule, product: f64, tol: Option<f64>) -> VerificationReport {
    let tol = tol.unwrap_or(if body.is_smooth() {
        harness::SMOOTH_TOL
    } else {
        harness::NONSMOOTH_TOL
    });
    VerificationReport {
        name: name.to_string(),
        n: body.dim(),
        p,
        body_k: body.label(),
        body_l: None,
        rule: rule.id(),
        seed: rule.spec().seed(),
        lhs: product,
        rhs: 1.0,
        ratio: product,
        tol,
        pass: product.is_finite() && product <= 1.0 + tol,
        equality: (product - 1.0).abs() <= harness::EQUALITY_TOL,
        stderr: None,
        wall_ms: 0.0,
    }
}

fn cmd_sine_polar(args: &TableArgs, stdout: &mut dyn Write) -> Result<bool> {
    let (body, rule) = load(&args.body)?;
    let n = body.dim();
    let parent: BodyRef = Arc::new(body);
    let diamond = sine_polar(parent.clone())?;
    let radii = diamond.rho_on(&rule);
    let volume = quadrature::volume(&diamond, &rule)?;
    let product = quadrature::volume(parent.as_ref(), &rule)? * volume / geometry::unit_ball_volume(n as f64)?.powi(2);
    with_output(&args.out, stdout, |w| {
        let mut csv = csv::Writer::from_writer(&mut *w);
        let mut header = coordinate_header(n);
        header.push("rho".into());
        csv.write_record(&header)?;
        for (u, r) in rule.nodes().zip(&radii) {
            csv.write_record(u.iter().chain(std::iter::once(r)).map(|v| v.to_string()))?;
        }
        csv.flush()?;
        drop(csv);
        writeln!(w, "# volume,{volume}")?;
        writeln!(w, "# product,{product}")?;
        Ok(())
    })?;
    let report = product_report("sine_bs", parent.as_ref(), None, &rule, product, args.tol);
    Ok(!args.check || report.pass)
}

fn cmd_centroid(args: &CentroidArgs, stdout: &mut dyn Write) -> Result<bool> {
    let ps = match (&args.p, &args.p_grid) {
        (Some(p), _) => vec![check_p(*p)?],
        (None, Some(grid)) => parse_p_grid(grid)?,
        (None, None) => return Err(Error::Usage("centroid needs --p or --p-grid".into())),
    };
    let (body, rule) = load(&args.table.body)?;
    let n = body.dim();
    let parent: BodyRef = Arc::new(body);
    let rule = Arc::new(rule);
    let w2 = geometry::unit_ball_volume(n as f64)?.powi(2);
    let mut columns = Vec::with_capacity(ps.len());
    let mut products = Vec::with_capacity(ps.len());
    for &p in &ps {
        let lam = CentroidBody::sine_polar(parent.clone(), p, rule.clone())?;
        let volume = quadrature::volume(&lam, &rule)?;
        columns.push(lam.rho_on(&rule));
        products.push((p, volume, lam.parent_volume() * volume / w2));
    }
    with_output(&args.table.out, stdout, |w| {
        let mut csv = csv::Writer::from_writer(&mut *w);
        let mut header = coordinate_header(n);
        if ps.len() == 1 {
            header.push("rho".into());
        } else {
            header.extend(ps.iter().map(|p| format!("rho_p{p}")));
        }
        csv.write_record(&header)?;
        for (i, u) in rule.nodes().enumerate() {
            let row = u.iter().copied().chain(columns.iter().map(|c| c[i]));
            csv.write_record(row.map(|v| v.to_string()))?;
        }
        csv.flush()?;
        drop(csv);
        for (p, volume, product) in &products {
            writeln!(w, "# p,{p},volume,{volume},product,{product}")?;
        }
        Ok(())
    })?;
    let pass = products
        .iter()
        .all(|(p, _, product)| product_report("lp_sine_bs", parent.as_ref(), Some(*p), &rule, *product, args.table.tol).pass);
    Ok(!args.table.check || pass)
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<bool> {
    let ps = parse_p_grid(&args.p_grid)?;
    let (body, rule) = load(&args.table.body)?;
    let n = body.dim();
    let parent: BodyRef = Arc::new(body);
    let directions = harness::random_directions(n, 64, args.table.body.seed.unwrap_or(7));
    let (steps, sine_product) = harness::large_p_sequence(parent.clone(), &ps, &directions, Arc::new(rule.clone()))?;
    let mut pass = true;
    with_output(&args.table.out, stdout, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["p", "product", "sine_product", "max_gap", "pass"])?;
        for s in &steps {
            let report = product_report("lp_sine_bs", parent.as_ref(), Some(s.p), &rule, s.product, args.table.tol);
            pass &= report.pass;
            csv.write_record([
                s.p.to_string(),
                s.product.to_string(),
                sine_product.to_string(),
                s.max_gap.to_string(),
                report.pass.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(!args.table.check || pass)
}

fn adhoc_suite(args: &VerifyArgs, body: &str) -> Result<SuiteConfig> {
    let mut config = SuiteConfig {
        checks: Vec::new(),
        ..zoo_suite()
    };
    let mut add = |name: &str, arg: &str| -> Result<usize> {
        let descriptor = zoo::resolve(arg, args.dim)?;
        let n = descriptor.dim();
        config
            .bodies
            .insert(name.to_string(), DescriptorFile::from_body(&descriptor.with_name(arg)));
        Ok(n)
    };
    let n = add("K", body)?;
    if let Some(b2) = &args.body2 {
        if add("L", b2)? != n {
            return Err(Error::Usage("--body and --body2 have different dimensions".into()));
        }
    }
    let single = |check| CheckSpec {
        check,
        body: "K".into(),
        body2: None,
        p: None,
    };
    config.checks.push(single(CheckKind::LpSineBs));
    config.checks.push(single(CheckKind::SineBs));
    config.checks.push(single(CheckKind::IteratedPolar));
    if args.body2.is_some() {
        for check in [
            CheckKind::SupBracket,
            CheckKind::FubiniSymmetry,
            CheckKind::SphericalFunction,
            CheckKind::DoubleIntegral,
        ] {
            config.checks.push(CheckSpec {
                body2: Some("L".into()),
                ..single(check)
            });
        }
    }
    Ok(config)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    let mut config = match (&args.config, &args.body) {
        (Some(path), _) => SuiteConfig::load(path)?,
        (None, Some(body)) => adhoc_suite(args, body)?,
        (None, None) => zoo_suite(),
    };
    if let Some(p) = args.p {
        config.p_grid = vec![check_p(p)?];
    }
    if let Some(grid) = &args.p_grid {
        config.p_grid = parse_p_grid(grid)?;
    }
    if let Some(rule) = &args.rule {
        let spec: RuleSpec = rule.parse().map_err(|e| Error::Usage(format!("--rule: {e}")))?;
        let dims = match spec {
            RuleSpec::Uniform { .. } => 2..=2,
            RuleSpec::Gauss { .. } => 3..=3,
            RuleSpec::MonteCarlo { .. } => 2..=64,
        };
        for dim in dims {
            config.rules.insert(dim.to_string(), rule.clone());
        }
    }
    let run = RunOptions {
        tol: args.tol,
        timing: args.timing,
        seed: args.seed,
    };
    let started = Instant::now();
    let outcome = run_suite(&config, &run);
    with_output(&args.out, stdout, |w| write_reports(w, &outcome.reports))?;
    for failure in &outcome.failures {
        writeln!(stderr, "error: {}: {}", failure.check, failure.error)?;
    }
    let failed = outcome.reports.iter().filter(|r| !r.pass).count();
    writeln!(
        stderr,
        "{} checks, {} failed, {} errors{}",
        outcome.reports.len() + outcome.failures.len(),
        failed,
        outcome.failures.len(),
        if args.timing {
            format!(", {:.1} s", started.elapsed().as_secs_f64())
        } else {
            String::new()
        }
    )?;
    Ok(outcome.all_passed())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<bool>, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("sinebody").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let result = run(cli, &mut out, &mut err);
        (result, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn volume_of_the_unit_ball() {
        let (result, out, _) = run_args(&["volume", "--body", "ball3", "--rule", "gauss:8x16"]);
        assert!(result.unwrap());
        let v: f64 = out.lines().find_map(|l| l.strip_prefix("volume,")).unwrap().parse().unwrap();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn p_grid_parsing() {
        assert_eq!(parse_p_grid("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_p_grid("2,1").is_err());
        assert!(parse_p_grid("1,x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(true)), 0);
        assert_eq!(exit_code(&Ok(false)), 1);
        assert_eq!(exit_code(&Err(Error::UnknownBody("x".into()))), 2);
        assert_eq!(exit_code(&Err(Error::Core(sinebody_core::Error::ZeroVolume))), 1);
    }
}
