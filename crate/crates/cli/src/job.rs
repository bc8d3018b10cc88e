//! Job files: one TOML document per invocation, schema chosen by the command.

use std::ops::Range;
use std::sync::Arc;

use fraccomp_core::montecarlo::McConfig;
use fraccomp_core::solver::{InitialCondition, SolverConfig, SpaceSymbol};
use fraccomp_core::specfun::{MlParams, WrightParams};
use fraccomp_core::subordinator::OrderVector;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use toml::Spanned;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    EvalMl,
    EvalWright,
    Density,
    InverseDensity,
    Solve,
    ComposeCheck,
    McLimit,
    LimitCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EvalMl => "eval-ml",
            Self::EvalWright => "eval-wright",
            Self::Density => "density",
            Self::InverseDensity => "inverse-density",
            Self::Solve => "solve",
            Self::ComposeCheck => "compose-check",
            Self::McLimit => "mc-limit",
            Self::LimitCheck => "limit-check",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AxisSpec {
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeSpec {
    from: f64,
    to: f64,
    n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
enum SymbolSpec {
    Laplacian {
        #[serde(default = "one")]
        dim: usize,
    },
    FracLaplacianSum {
        terms: Vec<(f64, f64)>,
        #[serde(default = "one")]
        dim: usize,
    },
    RieszFeller {
        alpha: f64,
        theta: f64,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
enum InitialSpec {
    Delta,
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_length")]
    length: f64,
    window: Option<f64>,
}

fn default_n() -> usize {
    1024
}

fn default_length() -> f64 {
    40.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Routes {
    Direct,
    Composed,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RegimeSpec {
    #[default]
    Beta,
    Nu,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalMlFile {
    alpha: Spanned<f64>,
    #[serde(default = "one_f")]
    beta: f64,
    z: Spanned<AxisSpec>,
    #[serde(default)]
    format: Format,
}

fn one_f() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalWrightFile {
    alpha: Spanned<f64>,
    beta: f64,
    z: Spanned<AxisSpec>,
    #[serde(default)]
    format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    orders: Vec<Spanned<(f64, f64)>>,
    t: Spanned<AxisSpec>,
    x: Spanned<AxisSpec>,
    #[serde(default)]
    format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveFile {
    symbol: Spanned<SymbolSpec>,
    orders: Vec<Spanned<(f64, f64)>>,
    t: Spanned<AxisSpec>,
    grid: Option<Spanned<GridSpec>>,
    initial: Option<Spanned<InitialSpec>>,
    #[serde(default)]
    routes: Routes,
    #[serde(default)]
    format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeFile {
    outer_nu: Spanned<f64>,
    inner_nu: Spanned<f64>,
    t: Spanned<AxisSpec>,
    x: Spanned<AxisSpec>,
    #[serde(default)]
    format: Format,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct McFile {
    nu: Spanned<f64>,
    beta: Spanned<f64>,
    delta: Spanned<f64>,
    #[serde(default = "one_f")]
    lambda: f64,
    #[serde(default = "one_f")]
    t: f64,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    regime: RegimeSpec,
    mu: Spanned<AxisSpec>,
    #[serde(default)]
    format: Format,
}

fn default_samples() -> usize {
    100_000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitFile {
    symbol: Spanned<SymbolSpec>,
    nu_small: Spanned<f64>,
    t: Spanned<AxisSpec>,
    grid: Option<Spanned<GridSpec>>,
    initial: Option<Spanned<InitialSpec>>,
    #[serde(default)]
    format: Format,
}

/// A validated job, ready to run.
pub enum Job {
    EvalMl { params: MlParams, z: Vec<f64> },
    EvalWright { params: WrightParams, z: Vec<f64> },
    Density { ov: OrderVector, ts: Vec<f64>, xs: Vec<f64>, inverse: bool },
    Solve { sym: SpaceSymbol, ov: OrderVector, f0: InitialCondition, f0_name: String, ts: Vec<f64>, cfg: SolverConfig, routes: Routes },
    ComposeCheck { outer: f64, inner: f64, ts: Vec<f64>, xs: Vec<f64> },
    McLimit { cfg: McConfig, mus: Vec<f64> },
    LimitCheck { sym: SpaceSymbol, nu_small: f64, f0: InitialCondition, f0_name: String, ts: Vec<f64>, cfg: SolverConfig },
}

pub struct LoadedJob {
    pub job: Job,
    pub format: Format,
}

struct Source<'a> {
    path: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn fail(&self, span: Range<usize>, msg: impl Into<String>) -> CliError {
        CliError::Validation(format!("{}:{}: {}", self.path, self.line(span), msg.into()))
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        toml::from_str(self.text).map_err(|e| {
            let line = e.span().map(|s| format!("{}:", self.line(s))).unwrap_or_default();
            CliError::Validation(format!("{}:{line} {}", self.path, e.message()))
        })
    }

    /// Core constructor errors become validation failures at the field's line.
    fn check<T>(&self, span: Range<usize>, r: fraccomp_core::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| self.fail(span, core_message(&e)))
    }

    fn axis(&self, a: &Spanned<AxisSpec>, name: &str, positive: bool) -> Result<Vec<f64>, CliError> {
        let span = a.span();
        let v = match a.get_ref() {
            AxisSpec::List(v) => v.clone(),
            AxisSpec::Range(r) => {
                if r.n == 0 {
                    return Err(self.fail(span, format!("{name}: n must be >= 1")));
                }
                fraccomp_core::grid::linspace(r.from, r.to, r.n)
            }
        };
        if v.is_empty() {
            return Err(self.fail(span, format!("{name} is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.fail(span, format!("{name} has non-finite entries")));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(self.fail(span, format!("{name} must be strictly increasing")));
        }
        if positive && v[0] <= 0.0 {
            return Err(self.fail(span, format!("{name} values must be > 0")));
        }
        Ok(v)
    }

    fn orders(&self, pairs: &[Spanned<(f64, f64)>], whole: Range<usize>) -> Result<OrderVector, CliError> {
        if pairs.is_empty() {
            return Err(self.fail(whole, "orders is empty"));
        }
        for p in pairs {
            let (l, n) = *p.get_ref();
            self.check(p.span(), OrderVector::new(vec![(l, n)]))?;
        }
        self.check(whole, OrderVector::new(pairs.iter().map(|p| *p.get_ref()).collect()))
    }

    fn symbol(&self, s: &Spanned<SymbolSpec>) -> Result<SpaceSymbol, CliError> {
        let r = match s.get_ref().clone() {
            SymbolSpec::Laplacian { dim } => SpaceSymbol::laplacian(dim),
            SymbolSpec::FracLaplacianSum { terms, dim } => SpaceSymbol::frac_laplacian_sum(terms, dim),
            SymbolSpec::RieszFeller { alpha, theta } => SpaceSymbol::riesz_feller(alpha, theta),
        };
        let sym = self.check(s.span(), r)?;
        if sym.dim != 1 {
            return Err(self.fail(s.span(), "the command line solves problems on the line only (dim = 1)"));
        }
        Ok(sym)
    }

    fn grid(&self, g: Option<&Spanned<GridSpec>>) -> Result<SolverConfig, CliError> {
        let (spec, span) = match g {
            Some(g) => (g.get_ref().clone(), g.span()),
            None => (GridSpec { n: default_n(), length: default_length(), window: None }, 0..0),
        };
        let cfg = self.check(span.clone(), SolverConfig::line(spec.n, spec.length))?;
        Ok(match spec.window {
            Some(w) if !(w > 0.0) => return Err(self.fail(span, format!("grid.window must be > 0, got {w}"))),
            Some(w) => cfg.with_window(w),
            None => cfg,
        })
    }

    fn initial(&self, i: Option<&Spanned<InitialSpec>>) -> Result<(InitialCondition, String), CliError> {
        match i.map(|s| (s.get_ref().clone(), s.span())) {
            None | Some((InitialSpec::Delta, _)) => Ok((InitialCondition::Delta, "delta".into())),
            Some((InitialSpec::Gaussian { sigma }, span)) => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(self.fail(span, format!("gaussian sigma must be > 0, got {sigma}")));
                }
                let f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync> =
                    Arc::new(move |g: f64| Complex64::new((-0.5 * sigma * sigma * g * g).exp(), 0.0));
                Ok((InitialCondition::Fourier(f), format!("gaussian(sigma={sigma:e})")))
            }
        }
    }
}

fn core_message(e: &fraccomp_core::Error) -> String {
    match e {
        fraccomp_core::Error::InvalidParams(m)
        | fraccomp_core::Error::InvalidConfig(m)
        | fraccomp_core::Error::InvalidSymbol(m) => m.clone(),
        other => other.to_string(),
    }
}

fn whole_span(pairs: &[Spanned<(f64, f64)>]) -> Range<usize> {
    match (pairs.first(), pairs.last()) {
        (Some(a), Some(b)) => a.span().start..b.span().end,
        _ => 0..0,
    }
}

/// Parses and validates `text` as a job for `command`; `seed` overrides the file.
pub fn load(command: Command, path: &str, text: &str, seed: Option<u64>) -> Result<LoadedJob, CliError> {
    let src = Source { path, text };
    let (job, format) = match command {
        Command::EvalMl => {
            let f: EvalMlFile = src.parse()?;
            let params = src.check(f.alpha.span(), MlParams::new(*f.alpha.get_ref(), f.beta))?;
            (Job::EvalMl { params, z: src.axis(&f.z, "z", false)? }, f.format)
        }
        Command::EvalWright => {
            let f: EvalWrightFile = src.parse()?;
            let params = src.check(f.alpha.span(), WrightParams::new(*f.alpha.get_ref(), f.beta))?;
            (Job::EvalWright { params, z: src.axis(&f.z, "z", false)? }, f.format)
        }
        Command::Density | Command::InverseDensity => {
            let f: DensityFile = src.parse()?;
            let ov = src.orders(&f.orders, whole_span(&f.orders))?;
            let ts = src.axis(&f.t, "t", true)?;
            let xs = src.axis(&f.x, "x", false)?;
            (Job::Density { ov, ts, xs, inverse: command == Command::InverseDensity }, f.format)
        }
        Command::Solve => {
            let f: SolveFile = src.parse()?;
            let sym = src.symbol(&f.symbol)?;
            let ov = src.orders(&f.orders, whole_span(&f.orders))?;
            let ts = src.axis(&f.t, "t", true)?;
            let cfg = src.grid(f.grid.as_ref())?;
            if ts[0] < cfg.t_floor {
                return Err(src.fail(f.t.span(), format!("t values must be >= {:e}", cfg.t_floor)));
            }
            let (f0, f0_name) = src.initial(f.initial.as_ref())?;
            (Job::Solve { sym, ov, f0, f0_name, ts, cfg, routes: f.routes }, f.format)
        }
        Command::ComposeCheck => {
            let f: ComposeFile = src.parse()?;
            for (v, name) in [(&f.outer_nu, "outer_nu"), (&f.inner_nu, "inner_nu")] {
                let n = *v.get_ref();
                if !(n > 0.0 && n < 1.0) {
                    return Err(src.fail(v.span(), format!("{name} must lie in (0, 1), got {n}")));
                }
            }
            let ts = src.axis(&f.t, "t", true)?;
            let xs = src.axis(&f.x, "x", true)?;
            (Job::ComposeCheck { outer: *f.outer_nu.get_ref(), inner: *f.inner_nu.get_ref(), ts, xs }, f.format)
        }
        Command::McLimit => {
            let f: McFile = src.parse()?;
            let mut cfg = src.check(
                f.beta.span(),
                McConfig::new(*f.nu.get_ref(), *f.beta.get_ref(), *f.delta.get_ref(), f.lambda, f.t, f.samples, seed.unwrap_or(f.seed)),
            )?;
            if f.regime == RegimeSpec::Nu {
                cfg = cfg.nu_regime();
            }
            let mus = src.axis(&f.mu, "mu", false)?;
            if mus[0] < 0.0 {
                return Err(src.fail(f.mu.span(), "mu values must be >= 0"));
            }
            (Job::McLimit { cfg, mus }, f.format)
        }
        Command::LimitCheck => {
            let f: LimitFile = src.parse()?;
            let sym = src.symbol(&f.symbol)?;
            let nu = *f.nu_small.get_ref();
            if !(nu > 0.0 && nu <= 0.05) {
                return Err(src.fail(f.nu_small.span(), format!("nu_small must lie in (0, 0.05], got {nu}")));
            }
            let ts = src.axis(&f.t, "t", true)?;
            let cfg = src.grid(f.grid.as_ref())?;
            let (f0, f0_name) = src.initial(f.initial.as_ref())?;
            (Job::LimitCheck { sym, nu_small: nu, f0, f0_name, ts, cfg }, f.format)
        }
    };
    Ok(LoadedJob { job, format })
}
