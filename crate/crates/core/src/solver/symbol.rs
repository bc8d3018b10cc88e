use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type SymbolFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// `-sum lambda_i |gamma|^{2 beta_i}`.
    FracLaplacianSum(Vec<(f64, f64)>),
    /// `-|gamma|^{alpha theta} exp(sgn(gamma) i pi theta / 2)`, one dimension only.
    RieszFeller { alpha: f64, theta: f64 },
    Custom { name: String },
}

/// Fourier multiplier `F` of a space operator, with `Re F < 0` away from the origin.
///
/// The convention is `(F u)(gamma) = int e^{i gamma x} u(x) dx`. In two
/// dimensions symbols are radial and receive `|gamma|`.
#[derive(Clone)]
pub struct SpaceSymbol {
    pub kind: SymbolKind,
    pub dim: usize,
    eval: SymbolFn,
}

impl fmt::Debug for SpaceSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceSymbol").field("kind", &self.kind).field("dim", &self.dim).finish()
    }
}

const PROBES: [f64; 9] = [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0];

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > 2 {
        return Err(Error::InvalidSymbol(format!("dimension must be 1 or 2, got {dim}")));
    }
    Ok(())
}

impl SpaceSymbol {
    pub fn frac_laplacian_sum(terms: Vec<(f64, f64)>, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if terms.is_empty() {
            return Err(Error::InvalidSymbol("fractional Laplacian sum needs at least one term".into()));
        }
        for &(l, b) in &terms {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidSymbol(format!("lambda_i must be > 0, got {l}")));
            }
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::InvalidSymbol(format!("beta_i must lie in (0, 1], got {b}")));
            }
        }
        let t = terms.clone();
        let eval: SymbolFn =
            Arc::new(move |g: f64| Complex64::new(-t.iter().map(|&(l, b)| l * g.abs().powf(2.0 * b)).sum::<f64>(), 0.0));
        Ok(Self { kind: SymbolKind::FracLaplacianSum(terms), dim, eval })
    }

    /// `-gamma^2`.
    pub fn laplacian(dim: usize) -> Result<Self> {
        Self::frac_laplacian_sum(vec![(1.0, 1.0)], dim)
    }

    /// `theta = 1` has `Re F = 0` and is rejected.
    pub fn riesz_feller(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::InvalidSymbol(format!("Riesz-Feller alpha must be > 1, got {alpha}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidSymbol(format!(
                "Riesz-Feller theta must lie in (0, 1) so that Re F < 0, got {theta}"
            )));
        }
        let phase = std::f64::consts::FRAC_PI_2 * theta;
        let eval: SymbolFn = Arc::new(move |g: f64| {
            if g == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            -Complex64::from_polar(g.abs().powf(alpha * theta), g.signum() * phase)
        });
        Ok(Self { kind: SymbolKind::RieszFeller { alpha, theta }, dim: 1, eval })
    }

    /// User symbol, probed for `Re F < 0` on a spread of frequencies of both signs.
    pub fn custom(name: impl Into<String>, dim: usize, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        check_dim(dim)?;
        let name = name.into();
        for g in PROBES.iter().flat_map(|&g| [g, -g]) {
            let v = f(g);
            if !(v.re < 0.0) || !v.im.is_finite() {
                return Err(Error::InvalidSymbol(format!("{name}: Re F({g}) = {} is not negative", v.re)));
            }
        }
        Ok(Self { kind: SymbolKind::Custom { name }, dim, eval: Arc::new(f) })
    }

    #[inline]
    pub fn eval(&self, gamma: f64) -> Complex64 {
        (self.eval)(gamma)
    }

    /// Even and real-valued: solutions are symmetric in `x`.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, SymbolKind::FracLaplacianSum(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_feller_is_hermitian_with_negative_real_part() {
        let s = SpaceSymbol::riesz_feller(1.5, 0.8).unwrap();
        for g in [0.3, 1.0, 7.0] {
            let (a, b) = (s.eval(g), s.eval(-g));
            assert!((a - b.conj()).norm() < 1e-15);
            assert!(a.re < 0.0);
        }
        assert!(matches!(SpaceSymbol::riesz_feller(1.5, 1.0), Err(Error::InvalidSymbol(_))));
    }

    #[test]
    fn custom_symbols_are_probed() {
        assert!(SpaceSymbol::custom("ok", 1, |g| Complex64::new(-g * g - g.abs(), 0.0)).is_ok());
        assert!(matches!(
            SpaceSymbol::custom("bad", 1, |g| Complex64::new(g, 0.0)),
            Err(Error::InvalidSymbol(_))
        ));
    }

    #[test]
    fn laplacian_values() {
        let s = SpaceSymbol::frac_laplacian_sum(vec![(1.0, 1.0), (2.0, 0.5)], 1).unwrap();
        assert_eq!(s.eval(-3.0), Complex64::new(-15.0, 0.0));
        assert!(SpaceSymbol::frac_laplacian_sum(vec![(1.0, 1.5)], 1).is_err());
    }
}
