use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Periodic grid `x_j = -L/2 + j L / n`, frequencies `gamma_k = (k - n/2) 2 pi / L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    pub n: usize,
    pub length: f64,
}

impl FourierGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("grid size must be a power of two >= 16, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidConfig(format!("grid length must be > 0, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn d_gamma(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn gamma_max(&self) -> f64 {
        0.5 * self.n as f64 * self.d_gamma()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| -0.5 * self.length + j as f64 * self.dx()).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        let h = self.n as f64 / 2.0;
        (0..self.n).map(|k| (k as f64 - h) * self.d_gamma()).collect()
    }

    /// `u(x_j) = (1 / 2 pi) int e^{-i gamma x_j} U(gamma) d gamma` by the rectangle rule;
    /// returns the real part and the largest imaginary residue.
    pub fn synthesize(&self, uhat: &[Complex64]) -> (Vec<f64>, f64) {
        let n = self.n;
        let mut buf: Vec<Complex64> =
            uhat.iter().enumerate().map(|(k, &u)| if k % 2 == 0 { u } else { -u }).collect();
        // The Nyquist bin stands for both +-gamma_max; keep its Hermitian average.
        buf[0] = Complex64::new(buf[0].re, 0.0);
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let c = self.d_gamma() / (2.0 * PI) * if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let mut imag = 0.0f64;
        let re = buf
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let v = if j % 2 == 0 { *v } else { -*v } * c;
                imag = imag.max(v.im.abs());
                v.re
            })
            .collect();
        (re, imag)
    }

    /// Trapezoid-rule transform `int e^{i gamma x} g(x) dx` of samples on any increasing grid.
    pub fn transform_samples(xs: &[f64], values: &[f64], gamma: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..xs.len().saturating_sub(1) {
            let h = 0.5 * (xs[i + 1] - xs[i]);
            acc += Complex64::from_polar(h * values[i], gamma * xs[i]);
            acc += Complex64::from_polar(h * values[i + 1], gamma * xs[i + 1]);
        }
        acc
    }
}

/// Radial grid for isotropic problems in the plane:
/// `u(r) = (1 / 2 pi) int_0^rho_max U(rho) J0(rho r) rho d rho` on Gauss-Legendre panels.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub rho_max: f64,
    pub rs: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(rho_max: f64, rs: Vec<f64>) -> Result<Self> {
        if !(rho_max > 0.0) || !rho_max.is_finite() {
            return Err(Error::InvalidConfig(format!("rho_max must be > 0, got {rho_max}")));
        }
        if rs.is_empty() || rs.iter().any(|&r| !(r >= 0.0)) || rs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("radii must be nonnegative and increasing".into()));
        }
        let r_max = rs.last().copied().unwrap_or(0.0);
        // Each panel spans at most a quarter period of J0(rho r_max).
        let width = (0.5 * PI / r_max.max(1e-12)).min(0.5);
        let panels = (rho_max / width).ceil() as usize;
        let h = rho_max / panels as f64;
        let (x, w) = gauss_legendre(16);
        let mut nodes = Vec::with_capacity(panels * 16);
        let mut weights = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            let c = (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
        Ok(Self { rho_max, rs, nodes, weights })
    }

    pub fn rhos(&self) -> &[f64] {
        &self.nodes
    }

    pub fn synthesize(&self, uhat: &[Complex64]) -> (Vec<f64>, f64) {
        let mut imag = 0.0f64;
        let vals = self
            .rs
            .iter()
            .map(|&r| {
                let mut s = Complex64::new(0.0, 0.0);
                for ((&rho, &w), &u) in self.nodes.iter().zip(&self.weights).zip(uhat) {
                    s += u * (w * rho * libm::j0(rho * r));
                }
                let v = s / (2.0 * PI);
                imag = imag.max(v.im.abs());
                v.re
            })
            .collect();
        (vals, imag)
    }
}

/// Where the field is synthesized.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralGrid {
    Line(FourierGrid),
    Radial(RadialGrid),
}

impl SpectralGrid {
    pub fn dim(&self) -> usize {
        match self {
            Self::Line(_) => 1,
            Self::Radial(_) => 2,
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        match self {
            Self::Line(g) => g.gammas(),
            Self::Radial(g) => g.rhos().to_vec(),
        }
    }

    /// Output abscissae: `x` for lines, `r` for radial grids.
    pub fn points(&self) -> Vec<f64> {
        match self {
            Self::Line(g) => g.xs(),
            Self::Radial(g) => g.rs.clone(),
        }
    }

    pub fn synthesize(&self, uhat: &[Complex64]) -> (Vec<f64>, f64) {
        match self {
            Self::Line(g) => g.synthesize(uhat),
            Self::Radial(g) => g.synthesize(uhat),
        }
    }

    /// Largest frequency on the grid.
    pub fn edge(&self) -> f64 {
        match self {
            Self::Line(g) => g.gamma_max(),
            Self::Radial(g) => g.rho_max,
        }
    }
}
