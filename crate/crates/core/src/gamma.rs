//! Gamma function family.
//!
//! Lanczos approximation (g = 607/128, 14 terms) with reflection for
//! arguments below one half. Integer arguments up to 170 come from an exact
//! factorial table so that power series with factorial denominators stay
//! correctly rounded.

use std::f64::consts::PI;
use std::sync::OnceLock;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn factorials() -> &'static [f64; 171] {
    static TABLE: OnceLock<[f64; 171]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; 171];
        for k in 1..171 {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// `n!` for `n <= 170`, `inf` beyond.
pub fn factorial(n: usize) -> f64 {
    if n <= 170 {
        factorials()[n]
    } else {
        f64::INFINITY
    }
}

fn lanczos_series(x: f64) -> f64 {
    let mut ser = 0.999_999_999_999_997_092;
    let mut y = x;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    ser
}

/// `sin(pi x)` with exact zeros at the integers.
pub fn sinpi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function. Poles return `inf` with the sign of the approach from the right.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x == x.floor() && x <= 171.0 {
        return factorial(x as usize - 1);
    }
    if x < 0.5 {
        return PI / (sinpi(x) * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    // Gamma(x) = sqrt(2 pi) ser / x * b^(x + 1/2) e^-b with b = x + g;
    // the power is split in two halves to stay finite up to x ~ 171.
    let b = x + LANCZOS_G;
    let half = b.powf(0.5 * (x + 0.5));
    SQRT_2PI * lanczos_series(x) / x * half * (half * (-b).exp())
}

/// `1 / Gamma(x)`, entire: zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x < 0.5 {
        // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        let g = gamma(1.0 - x);
        if g.is_infinite() {
            let s = sinpi(x);
            return s.signum() * (ln_gamma(1.0 - x) + s.abs().ln() - PI.ln()).exp();
        }
        return sinpi(x) * g / PI;
    }
    if x > 171.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI.ln() - sinpi(x).abs().ln() - ln_gamma(1.0 - x);
    }
    if x == x.floor() && x <= 171.0 {
        return factorial(x as usize - 1).ln();
    }
    let b = x + LANCZOS_G;
    (x + 0.5) * b.ln() - b + (SQRT_2PI * lanczos_series(x) / x).ln()
}

/// Sign of `Gamma(x)` (zero at poles).
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if is_nonpositive_integer(x) {
        0.0
    } else if (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
