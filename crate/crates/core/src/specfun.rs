//! Mittag-Leffler and Wright functions on the real axis.
//!
//! Both are evaluated by their power series whenever the accumulated
//! rounding (bounded by `eps * sum |term_k|`) stays below the target; when
//! cancellation makes the series useless they are recovered from a Laplace
//! representation instead:
//!
//! * `E_{a,b}(z)     = L^{-1}[ s^{a-b} / (s^a - z) ](1)`   for `z < 0`
//! * `W_{-n,b}(-x)   = L^{-1}[ s^{-b} exp(-x s^n) ](1)`    for `0 < n < 1`, `x > 0`
//! * `W_{a,b}(z)     = L^{-1}[ s^{-b} exp(z s^-a) ](1)`     for `a > 0`
//!
//! Accuracy target: `1e-12 * max(1, |value|)`.

use num_complex::Complex64;

use crate::defaults::{SERIES_MAX_TERMS, SERIES_STOP, SPECFUN_TOL};
use crate::error::{Error, Result};
use crate::gamma::{factorial, gamma_sign, ln_gamma, rgamma};
use crate::laplace::{invert_auto, invert_kernel, saddle_hyperbola, TransformFn};

/// Asymptotic decay exponent past which thin tails are returned as zero.
pub const UNDERFLOW_EXPONENT: f64 = 80.0;

/// Per-term relative rounding of a series term (power, factorial and 1/Gamma).
const TERM_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "Mittag-Leffler needs alpha > 0 and finite beta, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightParams {
    pub alpha: f64,
    pub beta: f64,
}

impl WrightParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "Wright needs alpha > -1 and finite beta, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Series,
    LaplaceInversion,
    /// Thin tail below the absolute resolution: returned as exact zero.
    Underflow,
    Closed,
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: f64,
    pub route: Route,
    /// A-posteriori bound on the absolute error.
    pub error_bound: f64,
}

/// Outcome of a raw series summation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesSum {
    pub value: f64,
    pub abs_sum: f64,
    pub terms: usize,
}

impl SeriesSum {
    pub fn error_bound(&self) -> f64 {
        TERM_EPS * self.abs_sum + f64::EPSILON * self.value.abs()
    }
}

/// Kahan-compensated sum of `term(k)`, stopping after three consecutive
/// non-zero decreasing terms below `SERIES_STOP` relative to `sum |term|`.
fn sum_series<F: FnMut(usize) -> f64>(mut term: F) -> Result<SeriesSum> {
    let mut s = 0.0;
    let mut c = 0.0;
    let mut abs_sum = 0.0;
    let mut quiet = 0;
    let mut last = f64::INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::NonConvergence(format!("series term {k} overflowed")));
        }
        if t == 0.0 {
            continue;
        }
        let y = t - c;
        let u = s + y;
        c = (u - s) - y;
        s = u;
        abs_sum += t.abs();
        if t.abs() <= SERIES_STOP * abs_sum && t.abs() <= last {
            quiet += 1;
            if quiet == 3 {
                return Ok(SeriesSum { value: s, abs_sum, terms: k + 1 });
            }
        } else {
            quiet = 0;
        }
        last = t.abs();
    }
    Err(Error::NonConvergence(format!(
        "series did not converge in {SERIES_MAX_TERMS} terms"
    )))
}

/// `z^k / Gamma(a)` without intermediate overflow.
#[inline]
fn pow_over_gamma(z: f64, k: usize, a: f64, extra_ln: f64) -> f64 {
    if z == 0.0 {
        return if k == 0 { rgamma(a) * (-extra_ln).exp() } else { 0.0 };
    }
    let ln_mag = k as f64 * z.abs().ln() - extra_ln;
    if a < 170.0 && ln_mag.abs() < 600.0 {
        return z.powi(k as i32) * rgamma(a) * (-extra_ln).exp();
    }
    let sign = if z < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 } * gamma_sign(a);
    if sign == 0.0 {
        return 0.0;
    }
    sign * (ln_mag - ln_gamma(a)).exp()
}

/// Raw Mittag-Leffler series `sum z^k / Gamma(alpha k + beta)`.
pub fn mittag_leffler_series(p: MlParams, z: f64) -> Result<SeriesSum> {
    if z == 0.0 {
        let v = rgamma(p.beta);
        return Ok(SeriesSum { value: v, abs_sum: v.abs(), terms: 1 });
    }
    sum_series(|k| pow_over_gamma(z, k, p.alpha * k as f64 + p.beta, 0.0))
}

/// Raw Wright series `sum z^k / (k! Gamma(alpha k + beta))`.
pub fn wright_series(p: WrightParams, z: f64) -> Result<SeriesSum> {
    if z == 0.0 {
        let v = rgamma(p.beta);
        return Ok(SeriesSum { value: v, abs_sum: v.abs(), terms: 1 });
    }
    sum_series(|k| {
        let a = p.alpha * k as f64 + p.beta;
        if k <= 170 {
            let t = pow_over_gamma(z, k, a, 0.0);
            if t.is_finite() && t.abs() < 1e300 {
                return t / factorial(k);
            }
        }
        pow_over_gamma(z, k, a, ln_gamma(k as f64 + 1.0))
    })
}

fn accept(sum: &SeriesSum, tol: f64) -> bool {
    sum.error_bound() <= tol * sum.value.abs().max(1.0)
}

fn via_inversion(f: TransformFn, what: &str) -> Result<Evaluation> {
    let inv = invert_auto(&f, 1.0, 1e-13)
        .map_err(|e| Error::NonConvergence(format!("{what}: {e}")))?;
    Ok(Evaluation {
        value: inv.value,
        route: Route::LaplaceInversion,
        error_bound: inv.refinement_delta + 1e-16 * inv.contour_magnitude,
    })
}

/// `E_{alpha,beta}(z)` with the route that produced it.
pub fn mittag_leffler_eval(p: MlParams, z: f64) -> Result<Evaluation> {
    let series = mittag_leffler_series(p, z);
    if let Ok(s) = &series {
        if accept(s, 0.5 * SPECFUN_TOL) || z >= 0.0 {
            return Ok(Evaluation { value: s.value, route: Route::Series, error_bound: s.error_bound() });
        }
    }
    if z < 0.0 {
        return ml_inversion(p, z);
    }
    series.map(|s| Evaluation { value: s.value, route: Route::Series, error_bound: s.error_bound() })
}

/// Laplace route for `z < 0`. Poles of `s^(a-b)/(s^a - z)` on the principal
/// sheet (`|arg s| = pi/a < pi`, i.e. `a > 1`) are removed analytically: each
/// contributes `s_j^(1-b) e^{s_j} / a` and the remainder is smooth.
fn ml_inversion(p: MlParams, z: f64) -> Result<Evaluation> {
    let (a, b) = (p.alpha, p.beta);
    let mut poles = Vec::new();
    let ang = std::f64::consts::PI / a;
    if ang < std::f64::consts::PI * (1.0 - 1e-12) {
        let r = (-z).powf(1.0 / a);
        poles.push(Complex64::from_polar(r, ang));
        poles.push(Complex64::from_polar(r, -ang));
    }
    let residues: Vec<Complex64> = poles.iter().map(|&sj| sj.powf(1.0 - b) / a).collect();
    let pole_part = poles
        .iter()
        .zip(&residues)
        .map(|(&sj, &rj)| rj * sj.exp())
        .sum::<Complex64>()
        .re;
    let (pl, rs) = (poles.clone(), residues.clone());
    let f = TransformFn::new("s^(a-b)/(s^a - z) minus its principal-sheet poles", move |s: Complex64| {
        let mut v = s.powf(a - b) / (s.powf(a) - z);
        for (&sj, &rj) in pl.iter().zip(&rs) {
            v -= rj / (s - sj);
        }
        v
    });
    let mut e = via_inversion(f, "Mittag-Leffler")?;
    e.value += pole_part;
    Ok(e)
}

/// `E_{alpha,beta}(z)`.
pub fn mittag_leffler(p: MlParams, z: f64) -> Result<f64> {
    mittag_leffler_eval(p, z).map(|e| e.value)
}

/// `-ln |W_{-n,b}(-x)|` asymptotically: `(1 - n) (n^n x)^(1/(1-n))`.
fn wright_decay_exponent(n: f64, x: f64) -> f64 {
    (1.0 - n) * (n.powf(n) * x).powf(1.0 / (1.0 - n))
}

/// `W_{alpha,beta}(z)` with the route that produced it.
pub fn wright_eval(p: WrightParams, z: f64) -> Result<Evaluation> {
    if p.alpha == 0.0 {
        return Ok(Evaluation { value: z.exp() * rgamma(p.beta), route: Route::Closed, error_bound: 0.0 });
    }
    let series = wright_series(p, z);
    if let Ok(s) = &series {
        let positive_terms = z >= 0.0 && p.alpha > 0.0 && p.beta > 0.0;
        if accept(s, 0.5 * SPECFUN_TOL) || positive_terms {
            return Ok(Evaluation { value: s.value, route: Route::Series, error_bound: s.error_bound() });
        }
    }
    let (a, b) = (p.alpha, p.beta);
    if a < 0.0 && z < 0.0 {
        let n = -a;
        let x = -z;
        // Beyond this |W| < 1e-33, far below the absolute accuracy target.
        if wright_decay_exponent(n, x) > UNDERFLOW_EXPONENT {
            return Ok(Evaluation { value: 0.0, route: Route::Underflow, error_bound: 1e-300 });
        }
        let f = TransformFn::new("s^-b exp(-x s^n)", move |s: Complex64| {
            s.powf(-b) * (-(s.powf(n)) * x).exp()
        })
        .with_log(move |s: Complex64| -b * s.ln() - s.powf(n) * x);
        let inv = invert_kernel(&f, 1.0, 1e-13, saddle_hyperbola(&[(1.0, n)], x, 1.0))
            .map_err(|e| Error::NonConvergence(format!("Wright: {e}")))?;
        return Ok(Evaluation {
            value: inv.value,
            route: Route::LaplaceInversion,
            error_bound: inv.refinement_delta + 1e-16 * inv.contour_magnitude,
        });
    }
    if a > 0.0 {
        let f = TransformFn::new("s^-b exp(z s^-a)", move |s: Complex64| {
            s.powf(-b) * (s.powf(-a) * z).exp()
        });
        return via_inversion(f, "Wright");
    }
    match series {
        Ok(s) => Err(Error::NonConvergence(format!(
            "Wright({a}, {b}) at z = {z}: series cancellation (bound {:.2e}) and no inversion route",
            s.error_bound()
        ))),
        Err(e) => Err(e),
    }
}

/// `W_{alpha,beta}(z)`.
pub fn wright(p: WrightParams, z: f64) -> Result<f64> {
    wright_eval(p, z).map(|e| e.value)
}
