//! Compound-Poisson approximation of stable (pseudo-)subordinators.
//!
//! `Y_delta = sum_{k <= N(t delta^-alpha)} X_k S_k(1)` with Pareto jumps
//! `P{X > x} = (delta / x)^beta` on `[delta, inf)` and independent marginals
//! `S_k(1)` of Laplace transform `e^{-mu^nu}`. As `delta -> 0` the Laplace
//! transform of `Y_delta` tends to that of `S_beta(lambda t Gamma(1 - beta/nu))`
//! when `alpha = beta`, and, with the jumps frozen at `X = delta`, to that of
//! `S_nu(lambda t)` when `alpha = nu`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::defaults::MC_MAX_OSCILLATION;
use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::quad::{semi_infinite, TailOptions};

/// Fewest samples accepted by [`McConfig`].
pub const MIN_SAMPLES: usize = 10_000;

/// Which power of `delta` scales the Poisson clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    Beta,
    Nu,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jumps {
    /// `P{X > x} = (delta / x)^beta`.
    Pareto,
    /// `X = delta`, the `beta -> inf` limit of the Pareto law.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub nu: f64,
    pub beta: f64,
    pub delta_cutoff: f64,
    pub poisson_rate: f64,
    pub t: f64,
    pub samples: usize,
    pub seed: u64,
    pub scaling: Scaling,
    pub jumps: Jumps,
}

impl McConfig {
    /// Pareto jumps with the clock scaled by `delta^-beta`.
    pub fn new(nu: f64, beta: f64, delta_cutoff: f64, poisson_rate: f64, t: f64, samples: usize, seed: u64) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(nu > 0.0) || !nu.is_finite() {
            return bad(format!("nu must be > 0, got {nu}"));
        }
        if !(beta > 0.0 && beta < nu) {
            return bad(format!("beta must lie in (0, nu) = (0, {nu}), got {beta}"));
        }
        if !(delta_cutoff > 0.0) || !delta_cutoff.is_finite() {
            return bad(format!("delta_cutoff must be > 0, got {delta_cutoff}"));
        }
        if !(poisson_rate > 0.0) || !poisson_rate.is_finite() {
            return bad(format!("poisson_rate must be > 0, got {poisson_rate}"));
        }
        if !(t > 0.0) || !t.is_finite() {
            return bad(format!("t must be > 0, got {t}"));
        }
        if samples < MIN_SAMPLES {
            return bad(format!("samples must be >= {MIN_SAMPLES}, got {samples}"));
        }
        Ok(Self { nu, beta, delta_cutoff, poisson_rate, t, samples, seed, scaling: Scaling::Beta, jumps: Jumps::Pareto })
    }

    /// Clock scaled by `delta^-nu`, jumps frozen at `delta`.
    pub fn nu_regime(mut self) -> Self {
        self.scaling = Scaling::Nu;
        self.jumps = Jumps::Degenerate;
        self
    }

    pub fn with_scaling(mut self, scaling: Scaling, jumps: Jumps) -> Result<Self> {
        if let Scaling::Explicit(a) = scaling {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidParams(format!("alpha must be > 0, got {a}")));
            }
        }
        self.scaling = scaling;
        self.jumps = jumps;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        match self.scaling {
            Scaling::Beta => self.beta,
            Scaling::Nu => self.nu,
            Scaling::Explicit(a) => a,
        }
    }

    /// Mean jump count `lambda t delta^-alpha`.
    pub fn clock_rate(&self) -> f64 {
        self.poisson_rate * self.t * self.delta_cutoff.powf(-self.alpha())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample {
    pub value: f64,
    pub weight: f64,
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Kanter's representation of a positive stable variable with `E e^{-mu S} = e^{-mu^nu}`, `0 < nu < 1`.
fn kanter(nu: f64, rng: &mut impl Rng) -> f64 {
    let u = PI * (1.0 - rng.gen::<f64>()); // (0, pi]
    let u = if u >= PI { PI * (1.0 - f64::EPSILON) } else { u };
    let e: f64 = rng.sample(Exp1);
    let a = (nu * u).sin() / u.sin().powf(1.0 / nu);
    let b = ((1.0 - nu) * u).sin() / e;
    a * b.powf((1.0 - nu) / nu)
}

fn marginal_draw(nu: f64, rng: &mut impl Rng) -> f64 {
    if nu == 1.0 {
        1.0
    } else {
        kanter(nu, rng)
    }
}

/// Draws of `S_nu(1)`. Only `nu <= 1` has a sampler; every weight is one.
pub fn sample_pseudo_marginal(nu: f64, count: usize, seed: u64) -> Result<Vec<WeightedSample>> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParams(format!("nu must be > 0, got {nu}")));
    }
    if nu > 1.0 {
        return Err(no_kernel(nu));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| WeightedSample { value: marginal_draw(nu, &mut stream(seed, i)), weight: 1.0 })
        .collect())
}

fn no_kernel(nu: f64) -> Error {
    Error::KernelNotAvailable(format!(
        "e^(-mu^{nu}) grows along vertical lines for nu > 1, so no signed density u_nu(1, .) exists to sample"
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Average of `e^{-mu Y}` over full draws.
    Plain,
    /// Average of `E[e^{-mu Y} | N, X] = exp(-mu^nu sum X_k^nu)`; used for `nu > 1`.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub estimator: Estimator,
    /// `sum |w| / |sum w|` of the sample weights.
    pub oscillation_index: f64,
    pub mean_jumps: f64,
}

/// Monte Carlo estimate of `E e^{-mu Y_delta}`.
pub fn compound_poisson_mgf(cfg: &McConfig, mu: f64) -> Result<McEstimate> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParams(format!("mu must be >= 0, got {mu}")));
    }
    let estimator = if cfg.nu <= 1.0 { Estimator::Plain } else { Estimator::Conditional };
    let rate = cfg.clock_rate();
    let (nu, beta, delta) = (cfg.nu, cfg.beta, cfg.delta_cutoff);
    let jumps = cfg.jumps;
    let counts = Poisson::new(rate).map_err(|e| Error::InvalidParams(format!("clock rate {rate}: {e}")))?;
    let draws: Vec<(WeightedSample, u64)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i);
            let n = counts.sample(&mut rng) as u64;
            let mut acc = 0.0;
            if jumps == Jumps::Degenerate && estimator == Estimator::Plain {
                // Stability: S_1 + ... + S_n has the law of n^{1/nu} S_1.
                if n > 0 {
                    acc = delta * (n as f64).powf(1.0 / nu) * marginal_draw(nu, &mut rng);
                }
                return (WeightedSample { value: (-mu * acc).exp(), weight: 1.0 }, n);
            }
            for _ in 0..n {
                let x = match jumps {
                    Jumps::Pareto => delta * (1.0 - rng.gen::<f64>()).powf(-1.0 / beta),
                    Jumps::Degenerate => delta,
                };
                acc += match estimator {
                    Estimator::Plain => x * marginal_draw(nu, &mut rng),
                    Estimator::Conditional => x.powf(nu),
                };
            }
            let value = match estimator {
                Estimator::Plain => (-mu * acc).exp(),
                Estimator::Conditional => (-mu.powf(nu) * acc).exp(),
            };
            (WeightedSample { value, weight: 1.0 }, n)
        })
        .collect();

    let (mut sw, mut sabs, mut swv, mut jumps_total) = (0.0, 0.0, 0.0, 0u64);
    for (s, n) in &draws {
        sw += s.weight;
        sabs += s.weight.abs();
        swv += s.weight * s.value;
        jumps_total += n;
    }
    let osc = sabs / sw.abs();
    if !(osc <= MC_MAX_OSCILLATION) {
        return Err(Error::VarianceBlowup(osc));
    }
    let m = draws.len() as f64;
    let estimate = swv / m;
    // Weights do not self-normalize: the target is the plain weighted mean.
    let var = draws.iter().map(|(s, _)| (s.weight * s.value - estimate).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McEstimate {
        estimate,
        stderr: (var / m).sqrt(),
        estimator,
        oscillation_index: osc,
        mean_jumps: jumps_total as f64 / m,
    })
}

/// Parameters of the deterministic pre-limit transform, free of the `beta < nu` restriction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub lambda: f64,
    pub t: f64,
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub jumps: Jumps,
}

impl From<&McConfig> for ChainParams {
    fn from(c: &McConfig) -> Self {
        Self { lambda: c.poisson_rate, t: c.t, nu: c.nu, beta: c.beta, alpha: c.alpha(), jumps: c.jumps }
    }
}

/// `exp{-lambda t delta^-alpha (1 - e^{-(mu delta)^nu}) - lambda t nu mu^nu delta^{beta-alpha} int_delta^inf e^{-(mu x)^nu} x^{nu-beta-1} dx}`,
/// the exact Laplace transform of `Y_delta`. Degenerate jumps keep the first term only.
pub fn pre_limit_chain(p: &ChainParams, mu: f64, delta: f64) -> Result<f64> {
    if mu == 0.0 {
        return Ok(1.0);
    }
    let lt = p.lambda * p.t;
    let c = (mu * delta).powf(p.nu);
    let mut exponent = -lt * delta.powf(-p.alpha) * -(-c).exp_m1();
    if p.jumps == Jumps::Pareto {
        // x = delta e^y: delta^{beta-alpha} int = delta^{nu-alpha} int_0^inf exp(-c e^{nu y} + (nu-beta) y) dy
        let (nu, b) = (p.nu, p.beta);
        let y_star = (-c.ln() / nu).max(0.0);
        let mag = if nu > b { (y_star * (nu - b)).exp() } else { 1.0 };
        let mut opts = TailOptions::new(y_star + 4.0 / nu, 1e6);
        opts.panel_tol = 1e-15 * mag;
        opts.quiet_tol = 1e-17 * mag;
        let j = semi_infinite(|y| (-c * (nu * y).exp() + (nu - b) * y).exp(), opts)?.value;
        exponent -= lt * nu * mu.powf(nu) * delta.powf(nu - p.alpha) * j;
    }
    Ok(exponent.exp())
}

pub fn theoretical_mgf_chain(cfg: &McConfig, mu: f64, delta: f64) -> Result<f64> {
    pre_limit_chain(&ChainParams::from(cfg), mu, delta)
}

/// `lim_{delta -> 0}` of [`pre_limit_chain`], from the leading powers of `delta` in its exponent.
pub fn chain_limit(p: &ChainParams, mu: f64) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    let lt = p.lambda * p.t;
    let (a, b, nu) = (p.alpha, p.beta, p.nu);
    // exponent ~ -k delta^{e - alpha}
    let (k, e) = match p.jumps {
        Jumps::Degenerate => (lt * mu.powf(nu), nu),
        Jumps::Pareto if b < nu => (lt * mu.powf(b) * gamma(1.0 - b / nu), b),
        Jumps::Pareto if b > nu => (lt * mu.powf(nu) * b / (b - nu), nu),
        // logarithmic factor: only the sign of e - alpha matters
        Jumps::Pareto => return if a < b { 1.0 } else { 0.0 },
    };
    if a < e {
        1.0
    } else if a == e {
        (-k).exp()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(McConfig::new(2.0, 0.5, 0.01, 1.0, 1.0, 100_000, 1).is_ok());
        assert!(McConfig::new(2.0, 2.5, 0.01, 1.0, 1.0, 100_000, 1).is_err());
        assert!(McConfig::new(2.0, 0.5, 0.0, 1.0, 1.0, 100_000, 1).is_err());
        assert!(McConfig::new(2.0, 0.5, 0.01, 1.0, 1.0, 999, 1).is_err());
    }

    #[test]
    fn kanter_laplace_transform() {
        let s = sample_pseudo_marginal(0.5, 200_000, 7).unwrap();
        assert!(s.iter().all(|w| w.weight == 1.0 && w.value >= 0.0));
        let v: Vec<f64> = s.iter().map(|w| (-w.value).exp()).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64 / v.len() as f64).sqrt();
        assert!((m - (-1f64).exp()).abs() < 4.0 * sd, "{m} +- {sd}");
    }

    #[test]
    fn pseudo_marginals_have_no_sampler() {
        assert!(matches!(sample_pseudo_marginal(1.5, 10, 0), Err(Error::KernelNotAvailable(_))));
    }

    #[test]
    fn mu_zero_is_exact() {
        let cfg = McConfig::new(2.0, 0.5, 0.01, 1.0, 1.0, 10_000, 5).unwrap();
        let e = compound_poisson_mgf(&cfg, 0.0).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(theoretical_mgf_chain(&cfg, 0.0, 0.01).unwrap(), 1.0);
    }

    #[test]
    fn table_entry_alpha_equals_nu_below_beta_keeps_a_beta_factor() {
        // Pareto jumps with beta = 3 > nu = alpha = 2: the limit is e^{-3}, not e^{-1}.
        let p = ChainParams { lambda: 1.0, t: 1.0, nu: 2.0, beta: 3.0, alpha: 2.0, jumps: Jumps::Pareto };
        let v = pre_limit_chain(&p, 1.0, 1e-6).unwrap();
        assert!((v - (-3f64).exp()).abs() < 1e-6, "{v}");
        assert_eq!(chain_limit(&p, 1.0), (-3f64).exp());
    }
}
