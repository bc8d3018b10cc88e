//! Caputo derivative of sampled functions.
//!
//! For `m - 1 < alpha < m` the derivative is the order-`a = alpha - m + 1`
//! Caputo derivative of `g = f^{(m-1)}`, which is discretized by the L1
//! product rule
//!
//! `D^a g(t_n) ~ h^{-a} / Gamma(2 - a) * sum_j b_j (g_{n-j} - g_{n-j-1})`,
//! `b_j = (j + 1)^{1-a} - j^{1-a}`.
//!
//! `g` itself comes from second-order finite differences on the uniform grid.

use crate::error::{Error, Result};
use crate::gamma::{gamma, rgamma};

/// Fractional order `alpha` in `(0, 3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaputoOrder {
    alpha: f64,
    m: usize,
}

impl CaputoOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 3.0) {
            return Err(Error::OrderOutOfRange(alpha));
        }
        Ok(Self { alpha, m: alpha.ceil() as usize })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ceil(alpha)`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_integer(&self) -> bool {
        self.alpha == self.m as f64
    }
}

/// Samples of `f` on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    ts: Vec<f64>,
    values: Vec<f64>,
    /// Exact `f^{(k)}(0)` for `k = 0..m-1`, when known.
    pub boundary_derivs: Option<Vec<f64>>,
}

impl SampledFn {
    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ts.len() != values.len() || ts.len() < 2 {
            return Err(Error::InsufficientGrid(format!(
                "need at least 2 samples with matching lengths, got {} times and {} values",
                ts.len(),
                values.len()
            )));
        }
        if ts[0] != 0.0 {
            return Err(Error::InsufficientGrid(format!("grid must start at t = 0, starts at {}", ts[0])));
        }
        let h = ts[1] - ts[0];
        if !(h > 0.0) {
            return Err(Error::InsufficientGrid("times must be strictly increasing".into()));
        }
        for (i, w) in ts.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(w[1].abs() * 1e-6) {
                return Err(Error::InsufficientGrid(format!("nonuniform grid at index {}", i + 1)));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InsufficientGrid("non-finite sample".into()));
        }
        Ok(Self { ts, values, boundary_derivs: None })
    }

    /// Samples `f` at `n + 1` uniform points on `[0, horizon]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || n < 1 {
            return Err(Error::InsufficientGrid(format!("bad sampling horizon {horizon} / {n} intervals")));
        }
        let h = horizon / n as f64;
        let ts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let values = ts.iter().map(|&t| f(t)).collect();
        Self::new(ts, values)
    }

    pub fn with_boundary_derivs(mut self, d: Vec<f64>) -> Self {
        self.boundary_derivs = Some(d);
        self
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        self.ts[1] - self.ts[0]
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let h = self.step();
        let n = (t / h).round();
        if !(n >= 0.0) || n as usize >= self.ts.len() || (n * h - t).abs() > 1e-6 * h {
            return Err(Error::InsufficientGrid(format!("t = {t} is not a grid point")));
        }
        Ok(n as usize)
    }
}

/// Finite-difference weights for the `k`-th derivative at `x0` (Fornberg).
fn fd_weights(x0: f64, xs: &[f64], k: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for s in (1..=mn).rev() {
                    c[i][s] = c1 * (s as f64 * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for s in (1..=mn).rev() {
                c[j][s] = (c4 * c[j][s] - s as f64 * c[j][s - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// Second-order accurate `k`-th derivative at every grid point.
fn derivative_samples(f: &SampledFn, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(f.values.clone());
    }
    let n = f.ts.len();
    let central = 2 * k.div_ceil(2) + 1;
    let one_sided = k + 2;
    if n < one_sided.max(central) {
        return Err(Error::InsufficientGrid(format!("derivative of order {k} needs {} samples, have {n}", one_sided.max(central))));
    }
    let h = f.step();
    let half = central / 2;
    // Stencil weights in units of h; interior weights are shared.
    let unit: Vec<f64> = (0..central).map(|i| i as f64 - half as f64).collect();
    let w_mid = fd_weights(0.0, &unit, k);
    let scale = h.powi(k as i32);
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        if i >= half && i + half < n {
            *o = w_mid.iter().enumerate().map(|(j, w)| w * f.values[i - half + j]).sum::<f64>() / scale;
        } else {
            let start = if i < half { 0 } else { n - one_sided };
            let pts: Vec<f64> = (0..one_sided).map(|j| (start + j) as f64 - i as f64).collect();
            let w = fd_weights(0.0, &pts, k);
            *o = w.iter().enumerate().map(|(j, w)| w * f.values[start + j]).sum::<f64>() / scale;
        }
    }
    Ok(out)
}

fn l1_weights(a: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| ((j + 1) as f64).powf(1.0 - a) - (j as f64).powf(1.0 - a)).collect()
}

fn l1_at(g: &[f64], b: &[f64], n: usize, coeff: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        s += b[j] * (g[n - j] - g[n - j - 1]);
    }
    coeff * s
}

fn check_prefix(ord: CaputoOrder, n: usize) -> Result<()> {
    if n < ord.m() {
        return Err(Error::InsufficientGrid(format!(
            "order {} needs at least {} grid points before t, have {n}",
            ord.alpha(),
            ord.m() + 1
        )));
    }
    Ok(())
}

/// Caputo derivative of `f` at the grid time `t`.
pub fn caputo_derivative(f: &SampledFn, ord: CaputoOrder, t: f64) -> Result<f64> {
    let n = f.index_of(t)?;
    if n == 0 {
        return Err(Error::InsufficientGrid("t must be at least ts[1]".into()));
    }
    check_prefix(ord, n)?;
    if ord.is_integer() {
        return Ok(derivative_samples(f, ord.m())?[n]);
    }
    let a = ord.alpha() - (ord.m() - 1) as f64;
    let g = derivative_samples(f, ord.m() - 1)?;
    let b = l1_weights(a, n);
    Ok(l1_at(&g, &b, n, f.step().powf(-a) * rgamma(2.0 - a)))
}

/// Caputo derivative at every grid point (zero at `t = 0` for fractional orders).
pub fn caputo_derivative_all(f: &SampledFn, ord: CaputoOrder) -> Result<Vec<f64>> {
    let len = f.ts.len();
    check_prefix(ord, len - 1)?;
    if ord.is_integer() {
        return derivative_samples(f, ord.m());
    }
    let a = ord.alpha() - (ord.m() - 1) as f64;
    let g = derivative_samples(f, ord.m() - 1)?;
    let b = l1_weights(a, len);
    let coeff = f.step().powf(-a) * rgamma(2.0 - a);
    Ok((0..len).map(|n| l1_at(&g, &b, n, coeff)).collect())
}

/// Composite Simpson on uniform samples; a 3/8 panel absorbs an odd tail.
pub(crate) fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        2 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ => {
            let (even_end, tail) = if n % 2 == 0 { (n, 0.0) } else {
                let k = n - 3;
                (k, 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]))
            };
            let mut s = y[0] + y[even_end];
            for (i, v) in y.iter().enumerate().take(even_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            s * h / 3.0 + tail
        }
    }
}

/// `|mu^alpha L[f](mu) - sum_k mu^{alpha-k-1} f^{(k)}(0) - L[D^alpha f](mu)|`,
/// both transforms by quadrature on `[0, horizon]`.
pub fn laplace_identity_residual(f: &SampledFn, ord: CaputoOrder, mu: f64, horizon: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParams(format!("mu must be > 0, got {mu}")));
    }
    let n = f.index_of(horizon)?;
    let h = f.step();
    let head = SampledFn::new(f.ts[..=n].to_vec(), f.values[..=n].to_vec())?;
    let damp: Vec<f64> = head.ts.iter().map(|&t| (-mu * t).exp()).collect();
    for k in 0..ord.m() {
        let d = derivative_samples(&head, k)?;
        let tail = damp[n] * d[n].abs();
        if tail > 1e-8 {
            return Err(Error::HorizonTooShort(format!(
                "exp(-mu t) f^({k})(t) = {tail:e} at horizon {horizon}"
            )));
        }
    }
    let boundary: Vec<f64> = match &f.boundary_derivs {
        Some(b) if b.len() >= ord.m() => b[..ord.m()].to_vec(),
        Some(b) => {
            return Err(Error::InvalidParams(format!("need {} boundary derivatives, got {}", ord.m(), b.len())))
        }
        None => (0..ord.m()).map(|k| derivative_samples(&head, k).map(|d| d[0])).collect::<Result<_>>()?,
    };
    let a = ord.alpha();
    let lf: Vec<f64> = damp.iter().zip(&head.values).map(|(e, v)| e * v).collect();
    let mut lhs = mu.powf(a) * simpson(&lf, h);
    for (k, b) in boundary.iter().enumerate() {
        lhs -= mu.powf(a - k as f64 - 1.0) * b;
    }
    let d = caputo_derivative_all(&head, ord)?;
    let ld: Vec<f64> = damp.iter().zip(&d).map(|(e, v)| e * v).collect();
    let rhs = simpson(&ld, h);
    Ok((lhs - rhs).abs())
}

/// `D^alpha t^p = Gamma(p + 1) / Gamma(p + 1 - alpha) t^{p - alpha}` for `p >= ceil(alpha)`.
pub fn power_rule(p: f64, alpha: f64, t: f64) -> f64 {
    gamma(p + 1.0) * rgamma(p + 1.0 - alpha) * t.powf(p - alpha)
}
