//! Quadrature primitives: adaptive Gauss–Kronrod on finite intervals,
//! Gauss–Legendre product rules, and a geometric panel walk for
//! integrals over `[0, inf)`.

use crate::defaults::{TAIL_PANELS_QUIET, TAIL_PANEL_TOL};
use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_676_463,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a quadrature: value, error estimate and the integral of `|f|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub abs_value: f64,
}

impl QuadResult {
    /// `int |f| / |int f|`; large values flag cancellation.
    pub fn oscillation_index(&self) -> f64 {
        if self.value == 0.0 {
            if self.abs_value == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_value / self.value.abs()
        }
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> QuadResult {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    QuadResult { value, error: err, abs_value: abs * h.abs() }
}

/// Adaptive Gauss–Kronrod 10/21 with bisection of the worst interval.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult::default());
    }
    let mut parts = vec![(a, b, gk21(&mut f, a, b))];
    loop {
        let (value, error, abs) = parts.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.2.value, acc.1 + p.2.error, acc.2 + p.2.abs_value)
        });
        if !value.is_finite() {
            return Err(Error::NonConvergence(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(QuadResult { value, error, abs_value: abs });
        }
        if parts.len() >= max_intervals {
            // Return the best effort; callers inspect `error`.
            return Ok(QuadResult { value, error, abs_value: abs });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.2.error > best.1 { (i, p.2.error) } else { best });
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(QuadResult { value, error, abs_value: abs });
        }
        parts.push((lo, mid, gk21(&mut f, lo, mid)));
        parts.push((mid, hi, gk21(&mut f, mid, hi)));
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Options for [`semi_infinite`].
#[derive(Debug, Clone, Copy)]
pub struct TailOptions {
    /// Width of the first panel `[0, scale]`.
    pub scale: f64,
    /// Hard ceiling for the upper limit.
    pub s_max: f64,
    /// Per-panel absolute tolerance for the adaptive rule.
    pub panel_tol: f64,
    /// Panels smaller than this in magnitude count as quiet.
    pub quiet_tol: f64,
}

impl TailOptions {
    pub fn new(scale: f64, s_max: f64) -> Self {
        Self { scale, s_max, panel_tol: 1e-13, quiet_tol: TAIL_PANEL_TOL }
    }
}

/// `int_0^inf f`: adaptive rule on `[0, scale]`, then doubling panels until
/// three consecutive panels contribute less than `quiet_tol` each.
pub fn semi_infinite<F: FnMut(f64) -> f64>(mut f: F, opts: TailOptions) -> Result<QuadResult> {
    let mut total = adaptive(&mut f, 0.0, opts.scale, opts.panel_tol, 1e-14, 400)?;
    let mut lo = opts.scale;
    let mut quiet = 0;
    while quiet < TAIL_PANELS_QUIET {
        let hi = 2.0 * lo;
        if hi > opts.s_max {
            return Err(Error::TailDivergence(opts.s_max));
        }
        let p = adaptive(&mut f, lo, hi, opts.panel_tol, 1e-14, 200)?;
        total.value += p.value;
        total.error += p.error;
        total.abs_value += p.abs_value;
        if p.abs_value < opts.quiet_tol {
            quiet += 1;
            total.error += p.abs_value;
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_degree_31() {
        let r = gk21(&mut |x: f64| x.powi(30) + x.powi(31), -1.0, 1.0);
        assert!((r.value - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_weights_sum() {
        for n in [1, 5, 16, 20, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * n as i32 - 2)).sum();
            assert!((m - 2.0 / (2 * n - 1) as f64).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12, 500).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn tail_walk() {
        let r = semi_infinite(|x: f64| (-x).exp(), TailOptions::new(1.0, 1e4)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let slow = semi_infinite(|x: f64| 1.0 / (1.0 + x), TailOptions::new(1.0, 1e4));
        assert!(matches!(slow, Err(Error::TailDivergence(_))));
    }
}
