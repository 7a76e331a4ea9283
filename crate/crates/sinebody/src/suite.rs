//! Verification suites: a declared list of checks over named bodies, run in
//! order with failures collected rather than aborting the run.
//!
//! ```json
//! {"seed": 42, "p_grid": [1, 2, 4], "rules": {"3": "gauss:32x64"},
//!  "checks": [{"check": "lp_sine_bs", "body": "spheroid"},
//!             {"check": "sup_bracket", "body": "ball3", "body2": "cube"}]}
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sinebody_core::harness::{self, CheckOptions, VerificationReport};
use sinebody_core::{BodyDescriptor, BodyRef, RuleSpec, SphericalRule};

use crate::descriptor::DescriptorFile;
use crate::error::{Error, Result};
use crate::zoo;

/// Checks a suite can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `V(K) V(Lambda_p° K) <= w_n^2`
    LpSineBs,
    /// `V(K) V(K^◇) <= w_n^2`
    SineBs,
    /// `V(K^◇) <= V(K°)` for cylinder sets
    PolarDominatesDiamond,
    /// Monte Carlo lower bound for `int_K int_L [x,y]^p`
    DoubleIntegral,
    /// `sup [x,y] >= w_n^{-2/n} (V(K) V(L))^{1/n}`
    SupBracket,
    /// Quadrature lower bound for the bracket kernel against
    /// `rho_K^{n+p}` and `rho_L^{n+p}`
    SphericalFunction,
    /// Symmetry of the mixed volumes of `K` against `Lambda_p° L`
    FubiniSymmetry,
    /// `V(Lambda_p° Lambda_p° K) >= V(K)`
    IteratedPolar,
}

impl CheckKind {
    fn uses_p(self) -> bool {
        !matches!(self, Self::SineBs | Self::PolarDominatesDiamond | Self::SupBracket)
    }

    fn needs_pair(self) -> bool {
        matches!(
            self,
            Self::DoubleIntegral | Self::SupBracket | Self::SphericalFunction | Self::FubiniSymmetry
        )
    }
}

/// One requested check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: CheckKind,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body2: Option<String>,
    /// Exponent; when absent, p-dependent checks run over the suite grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn default_seed() -> u64 {
    42
}

fn default_p_grid() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

fn default_samples() -> usize {
    100_000
}

/// A verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Seed of Monte Carlo rules and samplers.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Rule spec per dimension (keys are dimensions as strings); missing
    /// dimensions use the default rule.
    #[serde(default)]
    pub rules: BTreeMap<String, String>,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    /// Also run every deterministic check on rules of doubled resolution.
    #[serde(default)]
    pub refine: bool,
    /// Sample pairs of the Monte Carlo double-integral check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Extra named bodies; they shadow built-ins of the same name.
    #[serde(default)]
    pub bodies: BTreeMap<String, DescriptorFile>,
    pub checks: Vec<CheckSpec>,
}

/// Run-time options shared by all checks of a suite.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Pass tolerance override.
    pub tol: Option<f64>,
    /// Record wall times; off by default so output is reproducible.
    pub timing: bool,
    /// Overrides the suite seed.
    pub seed: Option<u64>,
}

/// A check that could not be evaluated.
#[derive(Debug)]
pub struct CheckFailure {
    pub check: String,
    pub error: Error,
}

/// Everything a suite run produced.
#[derive(Debug, Default)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub failures: Vec<CheckFailure>,
}

impl SuiteOutcome {
    /// Every check ran and passed.
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.reports.iter().all(|r| r.pass)
    }
}

/// Validates a strictly increasing grid of exponents `>= 1`.
pub fn check_p_grid(grid: &[f64]) -> std::result::Result<(), String> {
    if grid.is_empty() {
        return Err("p grid is empty".into());
    }
    if let Some(p) = grid.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
        return Err(format!("p must be finite and >= 1, got {p}"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("p grid must be strictly increasing".into());
    }
    Ok(())
}

impl SuiteConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_string(),
            source,
        })?;
        config.validate(origin)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let config_error = |reason: String| Error::Config {
            path: origin.to_string(),
            reason,
        };
        check_p_grid(&self.p_grid).map_err(config_error)?;
        for (dim, spec) in &self.rules {
            let d: usize = dim
                .parse()
                .map_err(|_| config_error(format!("rules: key {dim:?} is not a dimension")))?;
            let parsed: RuleSpec = spec
                .parse()
                .map_err(|e: sinebody_core::Error| config_error(format!("rules.{dim}: {e}")))?;
            parsed
                .build(d)
                .map_err(|e| config_error(format!("rules.{dim}: {e}")))?;
        }
        for (name, file) in &self.bodies {
            file.build(&format!("{origin}: bodies.{name}"))?;
        }
        for (i, c) in self.checks.iter().enumerate() {
            if c.check.needs_pair() && c.body2.is_none() {
                return Err(config_error(format!("checks[{i}]: {:?} needs body2", c.check)));
            }
            if let Some(p) = c.p {
                if !(p.is_finite() && p >= 1.0) {
                    return Err(config_error(format!("checks[{i}].p: must be finite and >= 1, got {p}")));
                }
            }
        }
        Ok(())
    }
}

/// The built-in suite over the body zoo (balls, ellipse, spheroid, square,
/// cube, bicylinder, tricylinder) on the default rules.
pub fn zoo_suite() -> SuiteConfig {
    let one = |check, body: &str| CheckSpec {
        check,
        body: body.to_string(),
        body2: None,
        p: None,
    };
    let pair = |check, body: &str, body2: &str, p: Option<f64>| CheckSpec {
        check,
        body: body.to_string(),
        body2: Some(body2.to_string()),
        p,
    };
    let mut checks = Vec::new();
    for body in ["ball2", "ellipse", "square", "ball3", "spheroid", "cube"] {
        checks.push(one(CheckKind::LpSineBs, body));
    }
    for body in ["ball2", "ellipse", "square", "ball3", "spheroid", "cube", "bicylinder", "tricylinder"] {
        checks.push(one(CheckKind::SineBs, body));
    }
    for body in ["ball3", "bicylinder", "tricylinder"] {
        checks.push(one(CheckKind::PolarDominatesDiamond, body));
    }
    for body in ["ball3", "spheroid", "cube"] {
        checks.push(CheckSpec {
            p: Some(2.0),
            ..one(CheckKind::IteratedPolar, body)
        });
    }
    checks.push(pair(CheckKind::FubiniSymmetry, "ball3", "spheroid", Some(2.0)));
    checks.push(pair(CheckKind::FubiniSymmetry, "spheroid", "cube", Some(2.0)));
    checks.push(pair(CheckKind::SupBracket, "ball3", "ball3", None));
    checks.push(pair(CheckKind::SupBracket, "ball3", "spheroid", None));
    checks.push(pair(CheckKind::SupBracket, "bicylinder", "cube", None));
    checks.push(pair(CheckKind::SphericalFunction, "ball3", "ball3", Some(1.0)));
    checks.push(pair(CheckKind::SphericalFunction, "ball3", "spheroid", Some(2.0)));
    checks.push(pair(CheckKind::DoubleIntegral, "ball3", "ball3", Some(2.0)));
    checks.push(pair(CheckKind::DoubleIntegral, "ball3", "spheroid", Some(2.0)));
    SuiteConfig {
        seed: default_seed(),
        rules: BTreeMap::new(),
        p_grid: default_p_grid(),
        refine: false,
        samples: default_samples(),
        bodies: BTreeMap::new(),
        checks,
    }
}

struct Runner<'a> {
    config: &'a SuiteConfig,
    seed: u64,
    opts: CheckOptions,
    rules: BTreeMap<(usize, bool), Arc<SphericalRule>>,
    bodies: BTreeMap<String, BodyRef>,
}

impl Runner<'_> {
    fn body(&mut self, name: &str) -> Result<BodyRef> {
        if let Some(b) = self.bodies.get(name) {
            return Ok(b.clone());
        }
        let body: BodyDescriptor = match self.config.bodies.get(name) {
            Some(file) => file.build(&format!("bodies.{name}"))?.with_name(name),
            None => zoo::builtin(name, None)?,
        };
        let body: BodyRef = Arc::new(body);
        self.bodies.insert(name.to_string(), body.clone());
        Ok(body)
    }

    fn rule(&mut self, dim: usize, doubled: bool) -> Result<Arc<SphericalRule>> {
        if let Some(r) = self.rules.get(&(dim, doubled)) {
            return Ok(r.clone());
        }
        let mut spec = match self.config.rules.get(&dim.to_string()) {
            Some(s) => s.parse::<RuleSpec>()?,
            None => RuleSpec::default_for(dim),
        };
        if !spec.is_deterministic() {
            spec = spec.with_seed(self.seed);
        }
        if doubled {
            spec = spec.doubled();
        }
        let rule = Arc::new(spec.build(dim)?);
        self.rules.insert((dim, doubled), rule.clone());
        Ok(rule)
    }

    /// Runs one check; `None` when a refinement pass was requested on a
    /// Monte Carlo rule, which has no resolution to double.
    fn run_one(&mut self, spec: &CheckSpec, p: Option<f64>, doubled: bool) -> Result<Option<VerificationReport>> {
        let k = self.body(&spec.body)?;
        let l = match &spec.body2 {
            Some(name) => Some(self.body(name)?),
            None => None,
        };
        if doubled && !self.rule(k.dim(), false)?.spec().is_deterministic() {
            return Ok(None);
        }
        let rule = self.rule(k.dim(), doubled)?;
        let p = p.unwrap_or(2.0);
        let opts = &self.opts;
        let l_or_k = l.clone().unwrap_or_else(|| k.clone());
        let report = match spec.check {
            CheckKind::LpSineBs => harness::verify_lp_sine_bs(k, p, rule, opts)?,
            CheckKind::SineBs => harness::verify_sine_bs(k, &rule, opts)?,
            CheckKind::PolarDominatesDiamond => {
                let descriptor = match self.config.bodies.get(&spec.body) {
                    Some(file) => file.build(&spec.body)?.with_name(spec.body.as_str()),
                    None => zoo::builtin(&spec.body, None)?,
                };
                harness::verify_polar_dominates_diamond(&descriptor, &rule, opts)?
            }
            CheckKind::DoubleIntegral => {
                harness::verify_double_integral_ineq(k, l_or_k.clone(), p, self.config.samples, self.seed, opts)?
            }
            CheckKind::SupBracket => harness::verify_sup_bracket_ineq(k, l_or_k.clone(), &rule, opts)?,
            CheckKind::SphericalFunction => {
                let l = l_or_k;
                let n = k.dim() as f64;
                let mut report = harness::verify_spherical_function_ineq(
                    |u| k.rho(u).powf(n + p),
                    |u| l.rho(u).powf(n + p),
                    p,
                    &rule,
                    opts,
                )?;
                report.body_k = k.label();
                report.body_l = Some(l.label());
                report
            }
            CheckKind::FubiniSymmetry => harness::verify_fubini_symmetry(k, l_or_k.clone(), p, rule, opts)?,
            CheckKind::IteratedPolar => harness::verify_iterated_polar(k, p, rule, opts)?,
        };
        Ok(Some(report))
    }
}

/// Runs every check of `config`; a check that cannot be evaluated is
/// recorded in [`SuiteOutcome::failures`] and the suite moves on.
pub fn run_suite(config: &SuiteConfig, run: &RunOptions) -> SuiteOutcome {
    let mut runner = Runner {
        config,
        seed: run.seed.unwrap_or(config.seed),
        opts: CheckOptions {
            tol: run.tol,
            ..CheckOptions::default()
        },
        rules: BTreeMap::new(),
        bodies: BTreeMap::new(),
    };
    let mut outcome = SuiteOutcome::default();
    for spec in &config.checks {
        let ps: Vec<Option<f64>> = match (spec.check.uses_p(), spec.p) {
            (false, _) => vec![None],
            (true, Some(p)) => vec![Some(p)],
            (true, None) => config.p_grid.iter().copied().map(Some).collect(),
        };
        let refinable = config.refine && spec.check != CheckKind::DoubleIntegral;
        for p in ps {
            for doubled in [false, true] {
                if doubled && !refinable {
                    continue;
                }
                let start = Instant::now();
                match runner.run_one(spec, p, doubled) {
                    Ok(None) => {}
                    Ok(Some(mut report)) => {
                        if run.timing {
                            report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
                        }
                        outcome.reports.push(report);
                    }
                    Err(error) => outcome.failures.push(CheckFailure {
                        check: describe(spec, p),
                        error,
                    }),
                }
            }
        }
    }
    outcome
}

fn describe(spec: &CheckSpec, p: Option<f64>) -> String {
    let mut s = format!("{:?}({}", spec.check, spec.body);
    if let Some(b) = &spec.body2 {
        s.push_str(", ");
        s.push_str(b);
    }
    if let Some(p) = p {
        s.push_str(&format!(", p={p}"));
    }
    s.push(')');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_grid_validation() {
        assert!(check_p_grid(&[1.0, 2.0, 8.0]).is_ok());
        assert!(check_p_grid(&[1.0, 1.0]).is_err());
        assert!(check_p_grid(&[0.5, 2.0]).is_err());
        assert!(check_p_grid(&[]).is_err());
    }

    #[test]
    fn config_errors_are_reported() {
        let err = SuiteConfig::parse(r#"{"checks": [], "p_grid": [2, 1]}"#, "s.json").unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
        let err = SuiteConfig::parse(r#"{"checks": [], "rules": {"3": "uniform:8"}}"#, "s.json").unwrap_err();
        assert!(err.is_input_error(), "{err}");
        let err = SuiteConfig::parse(r#"{"checks": [{"check": "sup_bracket", "body": "ball3"}]}"#, "s.json").unwrap_err();
        assert!(err.to_string().contains("body2"), "{err}");
        let err = SuiteConfig::parse(r#"{"checks": [{"check": "nope", "body": "ball3"}]}"#, "s.json").unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn failures_are_collected_and_the_suite_continues() {
        let config = SuiteConfig::parse(
            r#"{"rules": {"3": "gauss:8x16"}, "checks": [
                {"check": "sine_bs", "body": "no-such-body"},
                {"check": "polar_dominates_diamond", "body": "spheroid"},
                {"check": "sine_bs", "body": "ball3"}]}"#,
            "s.json",
        )
        .unwrap();
        let outcome = run_suite(&config, &RunOptions::default());
        assert_eq!(outcome.failures.len(), 2);
        assert_eq!(outcome.reports.len(), 1);
        assert!(outcome.reports[0].pass);
        assert!(!outcome.all_passed());
    }

    #[test]
    fn p_grid_expands_and_refine_doubles() {
        let config = SuiteConfig::parse(
            r#"{"rules": {"2": "uniform:64"}, "p_grid": [1, 3], "refine": true,
                "checks": [{"check": "lp_sine_bs", "body": "ellipse"}]}"#,
            "s.json",
        )
        .unwrap();
        let outcome = run_suite(&config, &RunOptions::default());
        let rules: Vec<&str> = outcome.reports.iter().map(|r| r.rule.as_str()).collect();
        assert_eq!(rules, ["uniform:64", "uniform:128", "uniform:64", "uniform:128"]);
        // ellipses are extremal: the ratio error is pure quadrature error
        for pair in outcome.reports.chunks(2) {
            let (coarse, fine) = ((pair[0].ratio - 1.0).abs(), (pair[1].ratio - 1.0).abs());
            assert!(fine < coarse, "{coarse} -> {fine}");
            assert!(pair[1].pass);
        }
    }
}
