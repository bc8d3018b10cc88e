//! Fundamental solutions of `sum_i lambda_i D_t^{nu_i} u = O_x u` on the line or
//! (radially) in the plane.
//!
//! Two independent routes: [`solve_direct`] inverts the Laplace–Fourier symbol
//! `sum_k Fhat f_k sum_i lambda_i mu^{nu_i-k-1} / (phi(mu) - F(gamma))` frequency
//! by frequency, while [`solve_composed`] integrates the space solution
//! `Fhat g e^{s F(gamma)}` against the time kernel in `s`. Composition in `x`
//! commutes with the Fourier transform, so the composed route sums
//! `e^{s_j F}` with kernel-weighted coefficients before a single synthesis;
//! this equals composing `u_1(s_j, .)` fields one by one.

mod spectral;
mod symbol;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

pub use spectral::{FourierGrid, RadialGrid, SpectralGrid};
pub use symbol::{SpaceSymbol, SymbolKind};

use crate::caputo::{caputo_derivative_all, CaputoOrder, SampledFn};
use crate::composition::KernelRule;
use crate::defaults::{ALIAS_WARN, SPECTRAL_TAIL, S_MAX};
use crate::error::{Error, Result};
use crate::gamma::rgamma;
use crate::grid::GridFunction;
use crate::laplace::{invert_auto, invert_auto_complex, TransformFn};
use crate::subordinator::{invert_exp_phi, kernel_scale, time_kernel_value, KernelKind, OrderVector};

/// Initial datum `f_k`.
#[derive(Clone, Default)]
pub enum InitialCondition {
    #[default]
    Zero,
    /// Symbolic Dirac mass at the origin (`Fhat = 1`); only allowed as `f_0`.
    Delta,
    /// Closed-form Fourier transform (radial in two dimensions).
    Fourier(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    /// Samples on an increasing grid; transformed with the trapezoid rule (lines only).
    Samples { xs: Vec<f64>, values: Vec<f64> },
}

impl std::fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Delta => f.write_str("Delta"),
            Self::Fourier(_) => f.write_str("Fourier(..)"),
            Self::Samples { xs, .. } => write!(f, "Samples({} points)", xs.len()),
        }
    }
}

impl InitialCondition {
    pub fn transform(&self, gamma: f64) -> Complex64 {
        match self {
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::Delta => Complex64::new(1.0, 0.0),
            Self::Fourier(f) => f(gamma),
            Self::Samples { xs, values } => FourierGrid::transform_samples(xs, values, gamma),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// `sum_i lambda_i D^{nu_i} u = O_x u` with data `f_k = d^k u / dt^k (0, .)`, and for the
/// pure time problem a boundary term with `L h(mu) = sum c mu^p`.
#[derive(Debug, Clone)]
pub struct TimeProblemSpec {
    pub ov: OrderVector,
    pub initial_conditions: Vec<InitialCondition>,
    /// `[(c, p)]` with `L h(mu) = sum c mu^p`.
    pub boundary_h: Option<Vec<(f64, f64)>>,
}

impl TimeProblemSpec {
    pub fn new(ov: OrderVector, initial_conditions: Vec<InitialCondition>, boundary_h: Option<Vec<(f64, f64)>>) -> Result<Self> {
        let need = ov.conditions();
        if initial_conditions.len() != need {
            return Err(Error::InvalidConfig(format!(
                "orders up to {} need {need} initial conditions, got {}",
                ov.max_nu(),
                initial_conditions.len()
            )));
        }
        if initial_conditions.iter().skip(1).any(|c| matches!(c, InitialCondition::Delta)) {
            return Err(Error::UnsupportedIC("a Dirac datum is only supported for f_0".into()));
        }
        Ok(Self { ov, initial_conditions, boundary_h })
    }

    /// `f_0 = delta`, remaining data zero.
    pub fn delta(ov: OrderVector) -> Self {
        let mut ics = vec![InitialCondition::Zero; ov.conditions()];
        ics[0] = InitialCondition::Delta;
        Self { ov, initial_conditions: ics, boundary_h: None }
    }

    /// Time problem whose solution is the inverse kernel: `L h = sum lambda_i mu^{nu_i - 1}`.
    pub fn inverse_kernel(ov: OrderVector) -> Self {
        let h = ov.pairs().iter().map(|&(l, n)| (l, n - 1.0)).collect();
        let mut s = Self::delta(ov);
        s.boundary_h = Some(h);
        s
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == 2 && self.initial_conditions.iter().any(|c| matches!(c, InitialCondition::Samples { .. })) {
            return Err(Error::UnsupportedIC("sampled data are supported on the line only".into()));
        }
        Ok(())
    }

    fn active(&self) -> impl Iterator<Item = (usize, &InitialCondition)> {
        self.initial_conditions.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: SpectralGrid,
    /// Relative tolerance of each time inversion.
    pub time_tol: f64,
    /// Smallest admissible solve time.
    pub t_floor: f64,
    /// Crop line output to `|x| <= x_window`.
    pub x_window: Option<f64>,
    /// Gauss-Legendre order of the composition panels.
    pub panel_order: usize,
}

impl SolverConfig {
    pub fn new(grid: SpectralGrid) -> Self {
        Self { grid, time_tol: 1e-11, t_floor: 1e-3, x_window: None, panel_order: 20 }
    }

    pub fn line(n: usize, length: f64) -> Result<Self> {
        Ok(Self::new(SpectralGrid::Line(FourierGrid::new(n, length)?)))
    }

    /// Smallest power of two for which `|exp(t_min F(gamma_max))| < 1e-12`, capped at `2^16`.
    pub fn auto_line(sym: &SpaceSymbol, t_min: f64, length: f64) -> Result<Self> {
        let mut n = 64;
        loop {
            let g = FourierGrid::new(n, length)?;
            if (t_min * sym.eval(g.gamma_max()).re).exp() < SPECTRAL_TAIL || n >= 1 << 16 {
                return Ok(Self::new(SpectralGrid::Line(g)));
            }
            n *= 2;
        }
    }

    pub fn with_window(mut self, w: f64) -> Self {
        self.x_window = Some(w);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveRoute {
    Space,
    Time,
    Direct,
    Composed,
    Limit,
}

impl SolveRoute {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Space => "space-transform",
            Self::Time => "time-transform",
            Self::Direct => "direct-transform",
            Self::Composed => "composition",
            Self::Limit => "stationary-limit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest accepted refinement delta of the time inversions.
    pub max_refinement_delta: f64,
    /// Largest `|U(t, gamma_edge)| / |U(t, 0)|`.
    pub spectral_tail: f64,
    /// Largest imaginary part left after synthesis (asserted below `1e-8`).
    pub imag_residue: f64,
    /// Largest `int |k| / |int k|` of the composition kernels.
    pub oscillation_index: f64,
    /// Largest `|sum_j c_j - 1|` of the inverse-kernel rules (unit mass expected).
    pub mass_defect: f64,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    fn absorb(&mut self, o: Diagnostics) {
        self.max_refinement_delta = self.max_refinement_delta.max(o.max_refinement_delta);
        self.spectral_tail = self.spectral_tail.max(o.spectral_tail);
        self.imag_residue = self.imag_residue.max(o.imag_residue);
        self.oscillation_index = self.oscillation_index.max(o.oscillation_index);
        self.mass_defect = self.mass_defect.max(o.mass_defect);
        self.warnings.extend(o.warnings);
    }
}

/// Dirac component of a time-problem solution: `weight * delta(x - location)` at row `t_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassRow {
    pub t_index: usize,
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SolutionField {
    /// Rows are times, columns are `x` (or `r` on radial grids).
    pub values: GridFunction,
    pub route: SolveRoute,
    pub diagnostics: Diagnostics,
    pub point_masses: Vec<PointMassRow>,
}

impl SolutionField {
    pub fn ts(&self) -> &[f64] {
        &self.values.rows
    }

    pub fn xs(&self) -> &[f64] {
        &self.values.cols
    }

    pub fn sup_difference(&self, other: &SolutionField) -> Result<f64> {
        self.values.sup_difference(&other.values)
    }
}

fn check_times(ts: &[f64], cfg: &SolverConfig) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidConfig("no solve times given".into()));
    }
    if let Some(&t) = ts.iter().find(|&&t| !(t >= cfg.t_floor) || !t.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "solve time {t} is below the configured floor {}; near-delta fields are not resolvable",
            cfg.t_floor
        )));
    }
    Ok(())
}

fn check_symbol(sym: &SpaceSymbol, cfg: &SolverConfig) -> Result<()> {
    if sym.dim != cfg.grid.dim() {
        return Err(Error::InvalidConfig(format!(
            "symbol is {}-dimensional but the grid is {}-dimensional",
            sym.dim,
            cfg.grid.dim()
        )));
    }
    Ok(())
}

/// Per-time spectral work shared by all routes.
struct Spectrum {
    uhat: Vec<Complex64>,
    diag: Diagnostics,
}

fn assemble(
    cfg: &SolverConfig,
    ts: &[f64],
    route: SolveRoute,
    per_t: impl Fn(f64, &[f64]) -> Result<Spectrum>,
) -> Result<SolutionField> {
    let freqs = cfg.grid.frequencies();
    let points = cfg.grid.points();
    let keep: Vec<usize> = match (cfg.x_window, &cfg.grid) {
        (Some(w), SpectralGrid::Line(_)) => (0..points.len()).filter(|&j| points[j].abs() <= w + 1e-12).collect(),
        _ => (0..points.len()).collect(),
    };
    let mut diag = Diagnostics::default();
    let mut values = Vec::with_capacity(ts.len() * keep.len());
    // Index of gamma = 0 (lines) or the smallest radius (radial) for the tail ratio.
    let origin = match &cfg.grid {
        SpectralGrid::Line(g) => g.n / 2,
        SpectralGrid::Radial(_) => 0,
    };
    for &t in ts {
        let sp = per_t(t, &freqs)?;
        let (u, imag) = cfg.grid.synthesize(&sp.uhat);
        let mut d = sp.diag;
        d.imag_residue = imag;
        let edge = match &cfg.grid {
            SpectralGrid::Line(_) => sp.uhat[0].norm().max(sp.uhat[freqs.len() - 1].norm()),
            SpectralGrid::Radial(_) => sp.uhat[freqs.len() - 1].norm(),
        };
        let base = sp.uhat[origin].norm().max(f64::MIN_POSITIVE);
        d.spectral_tail = edge / base;
        if d.spectral_tail > ALIAS_WARN {
            d.warnings.push(format!(
                "alias warning: spectral tail {:.2e} at t = {t} exceeds {ALIAS_WARN:e}",
                d.spectral_tail
            ));
        }
        if imag > 1e-8 {
            return Err(Error::NonConvergence(format!(
                "imaginary residue {imag:.2e} after synthesis at t = {t}"
            )));
        }
        diag.absorb(d);
        values.extend(keep.iter().map(|&j| u[j]));
    }
    let xs = keep.iter().map(|&j| points[j]).collect();
    Ok(SolutionField {
        values: GridFunction::new(ts.to_vec(), xs, values)?,
        route,
        diagnostics: diag,
        point_masses: vec![],
    })
}

/// `u_1(t, .)` from `Fhat u_1(t, gamma) = Fhat g(gamma) exp(t F(gamma))`.
pub fn solve_space(sym: &SpaceSymbol, g0: &InitialCondition, ts: &[f64], cfg: &SolverConfig) -> Result<SolutionField> {
    check_symbol(sym, cfg)?;
    check_times(ts, cfg)?;
    if sym.dim == 2 && matches!(g0, InitialCondition::Samples { .. }) {
        return Err(Error::UnsupportedIC("sampled data are supported on the line only".into()));
    }
    assemble(cfg, ts, SolveRoute::Space, |t, freqs| {
        let uhat = freqs.par_iter().map(|&g| g0.transform(g) * (sym.eval(g) * t).exp()).collect();
        Ok(Spectrum { uhat, diag: Diagnostics::default() })
    })
}

/// `u_2(t, x)` from `L u_2(mu, x) = L h(mu) exp(-x phi(mu))` (zero `a_k`).
pub fn solve_time(spec: &TimeProblemSpec, ts: &[f64], xs: &[f64]) -> Result<SolutionField> {
    let h = spec
        .boundary_h
        .clone()
        .ok_or_else(|| Error::InvalidConfig("the time problem needs a boundary term h".into()))?;
    if ts.iter().any(|&t| !(t > 0.0)) || xs.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidConfig("times must be > 0 and positions >= 0".into()));
    }
    let (drift, rest) = spec.ov.split_drift();
    let mut point_masses = vec![];
    let values: Vec<f64> = if rest.is_empty() {
        // exp(-x drift mu) * sum c mu^p is a Dirac in t only for p = 0.
        if h.iter().any(|&(_, p)| p != 0.0) {
            return Err(Error::InvalidConfig("pure drift time problems need L h constant".into()));
        }
        let c: f64 = h.iter().map(|p| p.0).sum();
        for (i, &t) in ts.iter().enumerate() {
            point_masses.push(PointMassRow { t_index: i, location: t / drift, weight: c / drift });
        }
        vec![0.0; ts.len() * xs.len()]
    } else {
        let pts: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
        pts.par_iter()
            .enumerate()
            .map(|(i, &(t, x))| {
                invert_exp_phi(&spec.ov, &h, t, x)
                    .map_err(|e| Error::InversionFailure { index: i, reason: e.to_string() })
            })
            .collect::<Result<_>>()?
    };
    Ok(SolutionField {
        values: GridFunction::new(ts.to_vec(), xs.to_vec(), values)?,
        route: SolveRoute::Time,
        diagnostics: Diagnostics::default(),
        point_masses,
    })
}

/// `sum_k c_k sum_{i: ceil(nu_i) > k} lambda_i mu^{nu_i-k-1} / (phi(mu) - F)` inverted at `t`.
fn direct_value(ov: &OrderVector, coeffs: &[(usize, Complex64)], f: Complex64, t: f64, tol: f64) -> Result<(Complex64, f64)> {
    let pairs = ov.pairs().to_vec();
    let cs = coeffs.to_vec();
    let real = f.im == 0.0 && cs.iter().all(|c| c.1.im == 0.0);
    let tf = TransformFn::new("numerator / (phi(mu) - F(gamma))", move |mu: Complex64| {
        let mut num = Complex64::new(0.0, 0.0);
        let mut phi = Complex64::new(0.0, 0.0);
        for &(l, n) in &pairs {
            let p = mu.powf(n);
            phi += p * l;
            for &(k, c) in &cs {
                if n.ceil() as usize > k {
                    num += c * l * mu.powf(n - k as f64 - 1.0);
                }
            }
        }
        num / (phi - f)
    });
    if real {
        let inv = invert_auto(&tf, t, tol)?;
        Ok((Complex64::new(inv.value, 0.0), inv.refinement_delta))
    } else {
        let inv = invert_auto_complex(&tf, t, tol)?;
        Ok((inv.value, inv.refinement_delta))
    }
}

/// Direct Laplace–Fourier inversion.
pub fn solve_direct(sym: &SpaceSymbol, spec: &TimeProblemSpec, ts: &[f64], cfg: &SolverConfig) -> Result<SolutionField> {
    check_symbol(sym, cfg)?;
    check_times(ts, cfg)?;
    spec.check_dim(sym.dim)?;
    let active: Vec<(usize, InitialCondition)> = spec.active().map(|(k, c)| (k, c.clone())).collect();
    assemble(cfg, ts, SolveRoute::Direct, |t, freqs| {
        let out: Vec<(Complex64, f64)> = freqs
            .par_iter()
            .enumerate()
            .map(|(i, &g)| {
                let coeffs: Vec<(usize, Complex64)> = active.iter().map(|(k, c)| (*k, c.transform(g))).collect();
                if coeffs.iter().all(|c| c.1 == Complex64::new(0.0, 0.0)) {
                    return Ok((Complex64::new(0.0, 0.0), 0.0));
                }
                direct_value(&spec.ov, &coeffs, sym.eval(g), t, cfg.time_tol).map_err(|e| Error::InversionFailure {
                    index: i,
                    reason: format!("gamma = {g}, t = {t}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let diag = Diagnostics {
            max_refinement_delta: out.iter().map(|o| o.1).fold(0.0, f64::max),
            ..Default::default()
        };
        Ok(Spectrum { uhat: out.into_iter().map(|o| o.0).collect(), diag })
    })
}

/// Geometric grading depth so the first panel is narrower than `1e-3 / |F(gamma_edge)|`.
fn grading_depth(sym: &SpaceSymbol, cfg: &SolverConfig, scale: f64) -> u32 {
    let fmax = sym.eval(cfg.grid.edge()).norm().max(1.0);
    ((scale * fmax * 1e3).log2().ceil().max(0.0) as u32 + 2).min(80)
}

/// Composition of the space solution with the time kernel. Data in the `k`-th
/// derivative enter by superposition: each pairs `g = f_k` with the time kernel
/// whose boundary transform is `sum_{ceil(nu_i) > k} lambda_i mu^{nu_i-k-1}`.
pub fn solve_composed(sym: &SpaceSymbol, spec: &TimeProblemSpec, ts: &[f64], cfg: &SolverConfig) -> Result<SolutionField> {
    check_symbol(sym, cfg)?;
    check_times(ts, cfg)?;
    spec.check_dim(sym.dim)?;
    let ov = &spec.ov;
    let (drift, rest) = ov.split_drift();
    let active: Vec<(usize, InitialCondition)> = spec.active().map(|(k, c)| (k, c.clone())).collect();
    assemble(cfg, ts, SolveRoute::Composed, |t, freqs| {
        let fs: Vec<Complex64> = freqs.iter().map(|&g| sym.eval(g)).collect();
        let mut uhat = vec![Complex64::new(0.0, 0.0); freqs.len()];
        let mut diag = Diagnostics { oscillation_index: 1.0, ..Default::default() };
        for (k, ic) in &active {
            let ghat: Vec<Complex64> = freqs.iter().map(|&g| ic.transform(g)).collect();
            if rest.is_empty() {
                // Pure drift: the inverse kernel is a Dirac at s = t / drift.
                let s0 = t / drift;
                for ((u, g), f) in uhat.iter_mut().zip(&ghat).zip(&fs) {
                    *u += g * (f * s0).exp();
                }
                continue;
            }
            let scale = kernel_scale(ov, KernelKind::Inverse, t);
            let depth = grading_depth(sym, cfg, scale);
            let kk = *k;
            let rule = KernelRule::build(|s| time_kernel_value(ov, kk, t, s), scale, depth, cfg.panel_order, S_MAX)
                .map_err(|e| Error::InversionFailure { index: kk, reason: format!("time kernel at t = {t}: {e}") })?;
            diag.oscillation_index = diag.oscillation_index.max(rule.oscillation_index());
            if kk == 0 {
                let m: f64 = rule.coefficients.iter().sum();
                diag.mass_defect = diag.mass_defect.max((m - 1.0).abs());
            }
            uhat.par_iter_mut().zip(&ghat).zip(&fs).for_each(|((u, g), f)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, c) in rule.nodes.iter().zip(&rule.coefficients) {
                    acc += (f * s).exp() * c;
                }
                *u += g * acc;
            });
        }
        Ok(Spectrum { uhat, diag })
    })
}

/// Stationary field `F^-1[Fhat f_0 Lambda / (Lambda - F)]`, obtained by inverting
/// `Fhat f_0 Lambda / (mu (Lambda - F))` at each `t` (constant in `t`).
pub fn limit_field(sym: &SpaceSymbol, f0: &InitialCondition, lambda: f64, ts: &[f64], cfg: &SolverConfig) -> Result<SolutionField> {
    check_symbol(sym, cfg)?;
    check_times(ts, cfg)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParams(format!("lambda must be > 0, got {lambda}")));
    }
    assemble(cfg, ts, SolveRoute::Limit, |t, freqs| {
        let out: Vec<(Complex64, f64)> = freqs
            .par_iter()
            .map(|&g| {
                let c = f0.transform(g) * lambda / (lambda - sym.eval(g));
                let tf = TransformFn::new("c / mu", move |mu: Complex64| c / mu);
                if c.im == 0.0 {
                    invert_auto(&tf, t, 1e-13).map(|i| (Complex64::new(i.value, 0.0), i.refinement_delta))
                } else {
                    invert_auto_complex(&tf, t, 1e-13).map(|i| (i.value, i.refinement_delta))
                }
            })
            .collect::<Result<_>>()?;
        let diag = Diagnostics {
            max_refinement_delta: out.iter().map(|o| o.1).fold(0.0, f64::max),
            ..Default::default()
        };
        Ok(Spectrum { uhat: out.into_iter().map(|o| o.0).collect(), diag })
    })
}

/// The order-`nu_small` solution with datum `f_0` next to its stationary limit.
pub fn limit_check_nu_zero(
    sym: &SpaceSymbol,
    f0: &InitialCondition,
    nu_small: f64,
    ts: &[f64],
    cfg: &SolverConfig,
) -> Result<(SolutionField, SolutionField)> {
    if !(nu_small > 0.0 && nu_small <= 0.05) {
        return Err(Error::InvalidParams(format!("nu_small must lie in (0, 0.05], got {nu_small}")));
    }
    let spec = TimeProblemSpec::new(OrderVector::single(nu_small)?, vec![f0.clone()], None)?;
    Ok((solve_direct(sym, &spec, ts, cfg)?, limit_field(sym, f0, 1.0, ts, cfg)?))
}

/// Sup of `|sum_i lambda_i D_t^{nu_i} u - O_x u|` for a Dirac datum and orders in `(0, 1]`,
/// on `t_n = n horizon / steps` with `t_n >= t_min` and `x_lo <= |x| <= x_hi`.
///
/// The time derivative is the L1 Caputo scheme applied to the directly solved
/// field; `O_x u` is synthesized from `F U + L^-1[phi/mu](t)`, which removes the
/// Dirac part of `F U` that lives at `x = 0` and leaves a decaying spectrum.
pub fn pde_residual(
    sym: &SpaceSymbol,
    ov: &OrderVector,
    cfg: &SolverConfig,
    horizon: f64,
    steps: usize,
    t_min: f64,
    x_range: (f64, f64),
) -> Result<f64> {
    if ov.max_nu() > 1.0 {
        return Err(Error::InvalidParams("the residual check covers orders in (0, 1]".into()));
    }
    let spec = TimeProblemSpec::delta(ov.clone());
    let h = horizon / steps as f64;
    let ts: Vec<f64> = (1..=steps).map(|n| n as f64 * h).collect();
    let field = solve_direct(sym, &spec, &ts, cfg)?;
    let xs = field.xs().to_vec();
    let action = assemble(cfg, &ts, SolveRoute::Direct, |t, freqs| {
        let asym: f64 = ov.pairs().iter().map(|&(l, n)| l * t.powf(-n) * rgamma(1.0 - n)).sum();
        let out: Vec<Complex64> = freqs
            .par_iter()
            .map(|&g| {
                let f = sym.eval(g);
                direct_value(ov, &[(0, Complex64::new(1.0, 0.0))], f, t, cfg.time_tol).map(|(u, _)| f * u + asym)
            })
            .collect::<Result<_>>()?;
        Ok(Spectrum { uhat: out, diag: Diagnostics::default() })
    })?;
    let mut worst = 0.0f64;
    for (j, &x) in xs.iter().enumerate() {
        if !(x.abs() >= x_range.0 && x.abs() <= x_range.1) {
            continue;
        }
        let mut col = vec![0.0];
        col.extend(field.values.column(j));
        let mut ts0 = vec![0.0];
        ts0.extend(&ts);
        let f = SampledFn::new(ts0, col)?;
        let mut lhs = vec![0.0; steps + 1];
        for &(l, n) in ov.pairs() {
            let d = caputo_derivative_all(&f, CaputoOrder::new(n)?)?;
            for (a, b) in lhs.iter_mut().zip(d) {
                *a += l * b;
            }
        }
        for (n, &t) in ts.iter().enumerate() {
            if t >= t_min {
                worst = worst.max((lhs[n + 1] - action.values.at(n, j)).abs());
            }
        }
    }
    Ok(worst)
}
