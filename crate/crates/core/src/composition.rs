//! Stochastic composition `(f <> g)(t, x) = int_0^inf f(s, x) g(t, s) ds`.

use crate::defaults::S_MAX;
use crate::error::{Error, Result};
use crate::grid::{integration_weights, GridFunction};
use crate::quad::{gauss_legendre, semi_infinite, TailOptions};

type Kernel2<'a> = Box<dyn Fn(f64, f64) -> f64 + Send + Sync + 'a>;

/// One factor of a composition.
pub enum ComposableFn<'a> {
    /// Pointwise `(a, b) -> k(a, b)`: `(s, x)` for the outer factor, `(t, s)` for the inner one.
    Density {
        eval: Kernel2<'a>,
        /// Exponential decay rate in `s`, if known; sets the first quadrature panel.
        decay_hint: Option<f64>,
    },
    /// `g(t, .) = delta(. - location(t))`.
    PointMass { location: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> },
}

impl<'a> ComposableFn<'a> {
    pub fn density(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'a) -> Self {
        Self::Density { eval: Box::new(f), decay_hint: None }
    }

    pub fn with_decay(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'a, rate: f64) -> Self {
        Self::Density { eval: Box::new(f), decay_hint: Some(rate) }
    }

    pub fn point_mass(location: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self::PointMass { location: Box::new(location) }
    }

    fn hint(&self) -> Option<f64> {
        match self {
            Self::Density { decay_hint, .. } => *decay_hint,
            Self::PointMass { .. } => None,
        }
    }
}

impl std::fmt::Debug for ComposableFn<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Density { decay_hint, .. } => f.debug_struct("Density").field("decay_hint", decay_hint).finish(),
            Self::PointMass { .. } => f.write_str("PointMass"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composed {
    pub value: f64,
    pub error: f64,
    /// `int |f g| / |int f g|`; one for same-signed integrands.
    pub oscillation_index: f64,
}

/// `(f <> g)(t, x)` to an absolute target of about `1e-8`.
pub fn compose(f: &ComposableFn, g: &ComposableFn, t: f64, x: f64) -> Result<Composed> {
    let fe = match f {
        ComposableFn::Density { eval, .. } => eval,
        ComposableFn::PointMass { .. } => {
            return Err(Error::InvalidParams("the outer factor must be a density in s".into()))
        }
    };
    let ge = match g {
        ComposableFn::PointMass { location } => {
            return Ok(Composed { value: fe(location(t), x), error: 0.0, oscillation_index: 1.0 });
        }
        ComposableFn::Density { eval, .. } => eval,
    };
    let rate = match (f.hint(), g.hint()) {
        (Some(a), Some(b)) => a.max(b),
        (a, b) => a.or(b).unwrap_or(1.0),
    };
    let mut opts = TailOptions::new(1.0 / rate, S_MAX);
    opts.panel_tol = 1e-11;
    opts.quiet_tol = 1e-10;
    let r = semi_infinite(|s| fe(s, x) * ge(t, s), opts)?;
    Ok(Composed { value: r.value, error: r.error, oscillation_index: r.oscillation_index() })
}

#[derive(Debug, Clone)]
pub struct GridComposition {
    pub field: GridFunction,
    /// Sup difference between the full-grid rule and the rule on every other `s` sample.
    pub refinement_delta: f64,
}

fn compose_on(f: &GridFunction, g: &GridFunction, take: &[usize]) -> Vec<f64> {
    let s: Vec<f64> = take.iter().map(|&k| f.rows[k]).collect();
    let w = integration_weights(&s);
    let (nt, nx) = (g.rows.len(), f.cols.len());
    let mut out = vec![0.0; nt * nx];
    for i in 0..nt {
        let gi = g.row(i);
        let o = &mut out[i * nx..(i + 1) * nx];
        for (wk, &k) in w.iter().zip(take) {
            let c = wk * gi[k];
            if c == 0.0 {
                continue;
            }
            for (oj, fj) in o.iter_mut().zip(f.row(k)) {
                *oj += c * fj;
            }
        }
    }
    out
}

/// Grid form of [`compose`]: `f` on `(s, x)`, `g` on `(t, s)`, sharing the `s` axis.
pub fn compose_grid(f: &GridFunction, g: &GridFunction) -> Result<GridComposition> {
    if f.rows != g.cols {
        return Err(Error::GridMismatch(format!(
            "outer s-axis has {} points, inner s-axis has {} (or they differ)",
            f.rows.len(),
            g.cols.len()
        )));
    }
    let ns = f.rows.len();
    if ns < 3 {
        return Err(Error::GridMismatch("shared s-axis needs at least 3 points".into()));
    }
    let all: Vec<usize> = (0..ns).collect();
    let fine = compose_on(f, g, &all);
    let mut half: Vec<usize> = (0..ns).step_by(2).collect();
    if half.last() != Some(&(ns - 1)) {
        half.push(ns - 1);
    }
    let coarse = compose_on(f, g, &half);
    let delta = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let field = GridFunction::new(g.rows.clone(), f.cols.clone(), fine)?;
    Ok(GridComposition { field, refinement_delta: delta })
}

/// Fixed quadrature rule in `s` on `[0, inf)`, graded geometrically toward zero
/// so integrands with boundary layers of any width near `s = 0` are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SRule {
    /// Panels `[0, a], [a, 2a], [2a, 4a], ...` with `a = scale * 2^-depth`, up to `scale * 2^reach`.
    pub fn geometric(scale: f64, depth: u32, reach: u32, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut push = |a: f64, b: f64| {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + h * xi);
                weights.push(h * wi);
            }
        };
        let mut lo = scale * 2f64.powi(-(depth as i32));
        push(0.0, lo);
        while lo < scale * 2f64.powi(reach as i32) {
            push(lo, 2.0 * lo);
            lo *= 2.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, w)| w * f(s)).sum()
    }
}

/// `s`-rule with the inner kernel folded into the weights: `int h(s) k(s) ds ~ sum c_j h(s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRule {
    pub nodes: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// `sum |c_j|`, the discrete `int |k|`.
    pub abs_mass: f64,
}

impl KernelRule {
    /// Geometric panels as in [`SRule::geometric`], extended until two consecutive
    /// panels carry less than `1e-15` of the accumulated `int |k|`.
    pub fn build(
        kernel: impl Fn(f64) -> Result<f64> + Sync,
        scale: f64,
        depth: u32,
        order: usize,
        s_max: f64,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let (x, w) = gauss_legendre(order);
        let mut rule = Self { nodes: vec![], coefficients: vec![], abs_mass: 0.0 };
        let panel = |a: f64, b: f64, rule: &mut Self| -> Result<f64> {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            let vals: Vec<(f64, f64)> = x
                .par_iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let s = c + h * xi;
                    kernel(s).map(|k| (s, h * wi * k))
                })
                .collect::<Result<_>>()?;
            let mut abs = 0.0;
            for (s, cf) in vals {
                rule.nodes.push(s);
                rule.coefficients.push(cf);
                abs += cf.abs();
            }
            rule.abs_mass += abs;
            Ok(abs)
        };
        let mut lo = scale * 2f64.powi(-(depth as i32));
        panel(0.0, lo, &mut rule)?;
        let mut quiet = 0;
        while quiet < 2 || lo < scale {
            if 2.0 * lo > s_max {
                return Err(Error::TailDivergence(s_max));
            }
            let abs = panel(lo, 2.0 * lo, &mut rule)?;
            quiet = if abs < 1e-15 * rule.abs_mass { quiet + 1 } else { 0 };
            lo *= 2.0;
        }
        Ok(rule)
    }

    /// `|sum c_j| / sum |c_j|` inverted: one for a nonnegative kernel.
    pub fn oscillation_index(&self) -> f64 {
        let s: f64 = self.coefficients.iter().sum();
        if s == 0.0 {
            f64::INFINITY
        } else {
            self.abs_mass / s.abs()
        }
    }
}
