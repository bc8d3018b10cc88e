//! Densities of (multi-order) stable subordinators and their inverses.
//!
//! For an order vector `nu = [(lambda_i, nu_i)]` with Bernstein-type symbol
//! `phi(mu) = sum lambda_i mu^nu_i`:
//!
//! * the subordinator density `u(t, x)` has x-Laplace transform `exp(-t phi(mu))`;
//! * the inverse density `l(t, x)` has t-Laplace transform `phi(mu)/mu * exp(-x phi(mu))`.
//!
//! Single orders below one are evaluated through the Wright function,
//! `l_nu(t, x) = t^-nu W_{-nu,1-nu}(-x t^-nu)` and `u_nu(t, x) = nu t l_nu(x, t) / x`.
//! Everything else goes through Talbot inversion. Orders equal to one act
//! as a drift and are peeled off as a shift before inverting.
//!
//! When some `nu_i > 1` the transforms above grow along every vertical line
//! of the right half plane. No function has them as Laplace transforms, so
//! pointwise values cannot be produced; the inversion reports the failure
//! instead of returning numbers. Transform-level identities
//! ([`inverse_mgf`], [`subordinator_t_laplace`]) remain valid for every order.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::defaults::{DENSITY_X_FLOOR, MASS_X_MAX};
use crate::error::{Error, Result};
use crate::gamma::rgamma;
use crate::laplace::{invert_kernel, saddle_hyperbola, TransformFn};
use crate::quad::{semi_infinite, TailOptions};
use crate::specfun::{mittag_leffler, wright, MlParams, WrightParams, UNDERFLOW_EXPONENT};

/// Weighted orders `[(lambda_i, nu_i)]`, all `lambda_i > 0`, `0 < nu_i <= 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVector {
    pairs: Vec<(f64, f64)>,
}

impl OrderVector {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParams("order vector is empty".into()));
        }
        for &(l, n) in &pairs {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParams(format!("lambda_i must be > 0, got {l}")));
            }
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::InvalidParams(format!("nu_i must be > 0, got {n}")));
            }
            if n > 3.0 {
                return Err(Error::InvalidParams(format!("nu_i must be <= 3, got {n}")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn single(nu: f64) -> Result<Self> {
        Self::new(vec![(1.0, nu)])
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn max_nu(&self) -> f64 {
        self.pairs.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Number of initial conditions the Caputo problem needs: `max ceil(nu_i)`.
    pub fn conditions(&self) -> usize {
        self.pairs.iter().map(|p| p.1.ceil() as usize).max().unwrap_or(1)
    }

    /// `alpha * nu` (orders scaled, weights kept).
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.pairs.iter().map(|&(l, n)| (l, alpha * n)).collect())
    }

    /// All orders equal: the single `(sum lambda, nu)` it collapses to.
    pub fn collapsed(&self) -> Option<(f64, f64)> {
        let n0 = self.pairs[0].1;
        if self.pairs.iter().all(|p| p.1 == n0) {
            Some((self.pairs.iter().map(|p| p.0).sum(), n0))
        } else {
            None
        }
    }

    /// `phi(mu) = sum lambda_i mu^nu_i`.
    pub fn phi(&self, mu: Complex64) -> Complex64 {
        self.pairs.iter().map(|&(l, n)| mu.powf(n) * l).sum()
    }

    /// `phi(mu) / mu`.
    pub fn phi_over_mu(&self, mu: Complex64) -> Complex64 {
        self.pairs.iter().map(|&(l, n)| mu.powf(n - 1.0) * l).sum()
    }

    /// Drift (total weight of `nu_i = 1`) and the remaining orders.
    pub fn split_drift(&self) -> (f64, Vec<(f64, f64)>) {
        let drift = self.pairs.iter().filter(|p| p.1 == 1.0).map(|p| p.0).sum();
        let rest = self.pairs.iter().copied().filter(|p| p.1 != 1.0).collect();
        (drift, rest)
    }
}

fn phi_pairs(p: &[(f64, f64)], mu: Complex64) -> Complex64 {
    p.iter().map(|&(l, n)| mu.powf(n) * l).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Subordinator,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelValues {
    Grid(Vec<f64>),
    /// Dirac mass at `location` (order exactly one); never sampled on a grid.
    PointMass { location: f64 },
}

/// A kernel `x -> k(t, x)` at fixed time, sampled on `xs`.
#[derive(Debug, Clone)]
pub struct SignedKernel {
    pub kind: KernelKind,
    pub time: f64,
    pub xs: Vec<f64>,
    pub values: KernelValues,
    /// Indices whose abscissa fell below the density floor (value set to the limit 0).
    pub floored: Vec<usize>,
    /// `int k(t, x) dx` over `[0, inf)` by adaptive quadrature of the pointwise kernel.
    pub total_mass: f64,
    pub mass_tolerance: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("time must be > 0, got {t}")));
    }
    Ok(())
}

/// Rough `-ln` of the kernel far in its thin tail, driven by the largest order below one.
fn thin_tail_exponent(pairs: &[(f64, f64)], scaled_arg: impl Fn(f64, f64) -> f64) -> f64 {
    pairs
        .iter()
        .filter(|p| p.1 < 1.0)
        .map(|&(l, n)| {
            let x = scaled_arg(l, n);
            (1.0 - n) * (n.powf(n) * x).powf(1.0 / (1.0 - n))
        })
        .fold(0.0, f64::max)
}

/// `l(t, x)` pointwise (density part only; see [`point_mass`]).
pub fn inverse_value(ov: &OrderVector, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    if let Some((l, n)) = ov.collapsed() {
        if n < 1.0 {
            let w = wright(WrightParams::new(-n, 1.0 - n)?, -l * x / t.powf(n))?;
            return Ok(l * t.powf(-n) * w);
        }
        if n == 1.0 {
            return Ok(0.0);
        }
    }
    time_kernel_value(ov, 0, t, x)
}

/// Inverse of `sum_{i: ceil(nu_i) > j} lambda_i mu^{nu_i - j - 1} exp(-x phi(mu))` at `t`:
/// the time-problem kernel for an initial datum in the `j`-th derivative (`j = 0` is `l`).
pub fn time_kernel_value(ov: &OrderVector, j: usize, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let num: Vec<(f64, f64)> =
        ov.pairs.iter().filter(|p| p.1.ceil() as usize > j).map(|&(l, n)| (l, n - j as f64 - 1.0)).collect();
    if num.is_empty() {
        return Err(Error::InvalidParams(format!("no order exceeds derivative index {j}")));
    }
    invert_exp_phi(ov, &num, t, x)
}

/// Inverse of `sum c_k mu^{p_k} exp(-x phi(mu))` at `t`, for `numerator = [(c_k, p_k)]`.
pub fn invert_exp_phi(ov: &OrderVector, numerator: &[(f64, f64)], t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    let num = numerator.to_vec();
    let (drift, rest) = ov.split_drift();
    if rest.is_empty() {
        return Err(Error::InvalidParams("pure drift kernels are point masses".into()));
    }
    let tau = t - drift * x;
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let underflow = ov.max_nu() < 1.0 && thin_tail_exponent(&rest, |l, n| l * x / tau.powf(n)) > UNDERFLOW_EXPONENT;
    if underflow {
        return Ok(0.0);
    }
    let (num_c, rest_c) = (num.clone(), rest.clone());
    // Numerator times exp(-x phi) with the drift factor exp(-drift x mu) removed.
    let f = TransformFn::new("sum lambda mu^(nu-j-1) exp(-x phi_rest(mu))", move |mu: Complex64| {
        let po: Complex64 = num_c.iter().map(|&(l, p)| mu.powf(p) * l).sum();
        po * (-(phi_pairs(&rest_c, mu)) * x).exp()
    });
    let rest_l = rest.clone();
    let f = f.with_log(move |mu: Complex64| {
        let po: Complex64 = num.iter().map(|&(l, p)| mu.powf(p) * l).sum();
        po.ln() - phi_pairs(&rest_l, mu) * x
    });
    invert_kernel(&f, tau, 1e-12, saddle_hyperbola(&rest, x, tau)).map(|v| v.value)
}

/// `u(t, x)` pointwise.
pub fn subordinator_value(ov: &OrderVector, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if x < DENSITY_X_FLOOR {
        return Ok(0.0);
    }
    if let Some((l, n)) = ov.collapsed() {
        if n < 1.0 {
            // u_nu(s, x) = nu s x^{-1-nu} W_{-nu,1-nu}(-s x^-nu), s = lambda t
            let s = l * t;
            let w = wright(WrightParams::new(-n, 1.0 - n)?, -s * x.powf(-n))?;
            return Ok(n * s * x.powf(-1.0 - n) * w);
        }
        if n == 1.0 {
            return Ok(0.0);
        }
    }
    let (drift, rest) = ov.split_drift();
    let xi = x - drift * t;
    if xi <= 0.0 {
        return Ok(0.0);
    }
    if ov.max_nu() < 1.0 && thin_tail_exponent(&rest, |l, n| l * t / xi.powf(n)) > UNDERFLOW_EXPONENT {
        return Ok(0.0);
    }
    let rest_c = rest.clone();
    let f = TransformFn::new("exp(-t phi_rest(mu))", move |mu: Complex64| {
        (-(phi_pairs(&rest_c, mu)) * t).exp()
    });
    let rest_l = rest.clone();
    let f = f.with_log(move |mu: Complex64| -(phi_pairs(&rest_l, mu)) * t);
    invert_kernel(&f, xi, 1e-12, saddle_hyperbola(&rest, t, xi)).map(|v| v.value)
}

/// Location of the Dirac mass when every order equals one.
pub fn point_mass(ov: &OrderVector, kind: KernelKind, t: f64) -> Option<f64> {
    match ov.collapsed() {
        Some((l, n)) if n == 1.0 => Some(match kind {
            KernelKind::Subordinator => l * t,
            KernelKind::Inverse => t / l,
        }),
        _ => None,
    }
}

fn kernel_value(ov: &OrderVector, kind: KernelKind, t: f64, x: f64) -> Result<f64> {
    match kind {
        KernelKind::Subordinator => subordinator_value(ov, t, x),
        KernelKind::Inverse => inverse_value(ov, t, x),
    }
}

/// Natural x-scale of the kernel at time `t`.
pub fn kernel_scale(ov: &OrderVector, kind: KernelKind, t: f64) -> f64 {
    let s: f64 = ov
        .pairs
        .iter()
        .map(|&(l, n)| match kind {
            KernelKind::Subordinator => (l * t).powf(1.0 / n),
            KernelKind::Inverse => t.powf(n) / l,
        })
        .fold(0.0, f64::max);
    s.max(1e-6)
}

/// `int_0^inf x^k kernel(t, x) dx`.
pub fn kernel_moment(ov: &OrderVector, kind: KernelKind, t: f64, k: u32) -> Result<(f64, f64)> {
    check_time(t)?;
    if let Some(x0) = point_mass(ov, kind, t) {
        return Ok((x0.powi(k as i32), 0.0));
    }
    let mut failure = None;
    let opts = TailOptions::new(kernel_scale(ov, kind, t), MASS_X_MAX);
    let r = semi_infinite(
        |x| match kernel_value(ov, kind, t, x) {
            Ok(v) => x.powi(k as i32) * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    Ok((r.value, r.error))
}

fn sample(ov: &OrderVector, kind: KernelKind, t: f64, xs: &[f64]) -> Result<SignedKernel> {
    check_time(t)?;
    let (mass, tol) = kernel_moment(ov, kind, t, 0)?;
    if let Some(location) = point_mass(ov, kind, t) {
        return Ok(SignedKernel {
            kind,
            time: t,
            xs: xs.to_vec(),
            values: KernelValues::PointMass { location },
            floored: vec![],
            total_mass: mass,
            mass_tolerance: tol,
        });
    }
    let values: Vec<f64> = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            kernel_value(ov, kind, t, x)
                .map_err(|e| Error::InversionFailure { index: i, reason: e.to_string() })
        })
        .collect::<Result<_>>()?;
    let floored = match kind {
        KernelKind::Subordinator => xs
            .iter()
            .enumerate()
            .filter(|(_, &x)| (0.0..DENSITY_X_FLOOR).contains(&x))
            .map(|(i, _)| i)
            .collect(),
        KernelKind::Inverse => vec![],
    };
    Ok(SignedKernel {
        kind,
        time: t,
        xs: xs.to_vec(),
        values: KernelValues::Grid(values),
        floored,
        total_mass: mass,
        mass_tolerance: tol,
    })
}

/// `u(t, .)` on `xs`.
pub fn subordinator_density(ov: &OrderVector, t: f64, xs: &[f64]) -> Result<SignedKernel> {
    sample(ov, KernelKind::Subordinator, t, xs)
}

/// `l(t, .)` on `xs`.
pub fn inverse_density(ov: &OrderVector, t: f64, xs: &[f64]) -> Result<SignedKernel> {
    sample(ov, KernelKind::Inverse, t, xs)
}

/// `int e^{-delta x} l(t, x) dx`. Single orders use `E_{nu,1}(-delta t^nu / lambda)`,
/// valid for every order; mixtures integrate the kernel.
pub fn inverse_mgf(ov: &OrderVector, t: f64, delta: f64) -> Result<f64> {
    check_time(t)?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidParams(format!("delta must be >= 0, got {delta}")));
    }
    match ov.collapsed() {
        Some((l, n)) => mittag_leffler(MlParams::new(n, 1.0)?, -delta * t.powf(n) / l),
        None => inverse_mgf_quadrature(ov, t, delta),
    }
}

/// [`inverse_mgf`] by direct x-quadrature of the inverse density.
pub fn inverse_mgf_quadrature(ov: &OrderVector, t: f64, delta: f64) -> Result<f64> {
    check_time(t)?;
    if let Some(x0) = point_mass(ov, KernelKind::Inverse, t) {
        return Ok((-delta * x0).exp());
    }
    let mut failure = None;
    let r = semi_infinite(
        |x| match inverse_value(ov, t, x) {
            Ok(v) => (-delta * x).exp() * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        TailOptions::new(kernel_scale(ov, KernelKind::Inverse, t), MASS_X_MAX),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// `int e^{-delta t} u(t, x) dt = x^{nu-1} E_{nu,nu}(-delta x^nu / lambda) / lambda`.
pub fn subordinator_t_laplace(lambda: f64, nu: f64, delta: f64, x: f64) -> Result<f64> {
    OrderVector::new(vec![(lambda, nu)])?;
    if !(x > 0.0) {
        return Err(Error::InvalidParams(format!("x must be > 0, got {x}")));
    }
    let e = mittag_leffler(MlParams::new(nu, nu)?, -delta * x.powf(nu) / lambda)?;
    Ok(x.powf(nu - 1.0) * e / lambda)
}

/// [`subordinator_t_laplace`] by direct t-quadrature of the density.
pub fn subordinator_t_laplace_quadrature(lambda: f64, nu: f64, delta: f64, x: f64) -> Result<f64> {
    let ov = OrderVector::new(vec![(lambda, nu)])?;
    if nu == 1.0 {
        // Dirac at t = x / lambda, with dt-Jacobian 1 / lambda.
        return Ok((-delta * x / lambda).exp() / lambda);
    }
    let mut failure = None;
    let r = semi_infinite(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            match subordinator_value(&ov, t, x) {
                Ok(v) => (-delta * t).exp() * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        TailOptions::new(x.powf(nu) / lambda, MASS_X_MAX),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// `int e^{-z t} l(t, x) dt = (phi(z) / z) e^{-x phi(z)}`, for any orders.
pub fn inverse_t_laplace(ov: &OrderVector, z: f64, x: f64) -> Result<f64> {
    if !(z > 0.0) || !(x >= 0.0) {
        return Err(Error::InvalidParams(format!("need z > 0 and x >= 0, got ({z}, {x})")));
    }
    let phi: f64 = ov.pairs.iter().map(|&(l, n)| l * z.powf(n)).sum();
    Ok(phi / z * (-x * phi).exp())
}

/// [`inverse_t_laplace`] by direct t-quadrature of the pointwise inverse density.
pub fn inverse_t_laplace_quadrature(ov: &OrderVector, z: f64, x: f64) -> Result<f64> {
    if !(z > 0.0) || !(x > 0.0) {
        return Err(Error::InvalidParams(format!("need z > 0 and x > 0, got ({z}, {x})")));
    }
    let mut failure = None;
    let mut opts = TailOptions::new(1.0 / z, MASS_X_MAX);
    opts.panel_tol = 1e-15;
    opts.quiet_tol = 1e-16;
    let r = semi_infinite(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            match inverse_value(ov, t, x) {
                Ok(v) => (-z * t).exp() * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Exact mean of the single-order inverse subordinator: `t^nu / (lambda Gamma(1 + nu))`.
pub fn inverse_mean(lambda: f64, nu: f64, t: f64) -> f64 {
    t.powf(nu) * rgamma(1.0 + nu) / lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn levy_half() {
        // u_{1/2}(t, x) = t / (2 sqrt(pi) x^{3/2}) exp(-t^2 / (4x))
        let ov = OrderVector::single(0.5).unwrap();
        for &(t, x) in &[(1.0, 1.0), (0.5, 0.2), (2.0, 3.0)] {
            let ex = t / (2.0 * PI.sqrt() * f64::powf(x, 1.5)) * (-t * t / (4.0 * x)).exp();
            let v = subordinator_value(&ov, t, x).unwrap();
            assert!((v - ex).abs() < 1e-12, "{t} {x}: {v} vs {ex}");
            let l = inverse_value(&ov, t, x).unwrap();
            let lex = (-x * x / (4.0 * t)).exp() / (PI * t).sqrt();
            assert!((l - lex).abs() < 1e-12);
        }
    }

    #[test]
    fn order_one_is_a_point_mass() {
        let ov = OrderVector::single(1.0).unwrap();
        let k = inverse_density(&ov, 2.0, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(k.values, KernelValues::PointMass { location: 2.0 });
    }

    #[test]
    fn validation_messages() {
        let e = OrderVector::new(vec![(1.0, -0.5)]).unwrap_err();
        assert_eq!(e, Error::InvalidParams("nu_i must be > 0, got -0.5".into()));
        assert!(OrderVector::new(vec![(0.0, 0.5)]).is_err());
    }

    #[test]
    fn drift_mixture_matches_transform() {
        // [(1, 0.5), (1, 1)]: check the x-Laplace transform of u by quadrature.
        let ov = OrderVector::new(vec![(1.0, 0.5), (1.0, 1.0)]).unwrap();
        let mu: f64 = 0.7;
        let r = semi_infinite(
            |x| (-mu * x).exp() * subordinator_value(&ov, 1.0, x).unwrap(),
            TailOptions::new(1.0, 1e6),
        )
        .unwrap();
        assert!((r.value - (-(mu.sqrt() + mu)).exp()).abs() < 1e-8, "{}", r.value);
    }
}
