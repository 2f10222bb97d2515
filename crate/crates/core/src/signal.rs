//! Sampled 1D signals and their elementary symmetries.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid1D;

/// Edge amplitude below which a constructed signal counts as contained in its window.
pub const EDGE_TOL: f64 = 1e-10;

/// Distance (in units of the Gaussian width) kept between a bump's center and
/// the window edge, and between its carrier frequency and Nyquist.
const GAUSSIAN_MARGIN: f64 = 4.0;
const SPECTRAL_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::Precondition(format!("expected {} samples, got {}", grid.count(), values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Precondition("signal values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.count()] }
    }

    /// Samples `f(x_k)` of a closure.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    /// Unit-norm Gaussian `2^{1/4} e^{-pi (x-c)^2} e^{2 pi i eta x}`.
    pub fn gaussian(grid: Grid1D, center: f64, modulation: f64) -> Result<Self> {
        let half = 0.5 * grid.length();
        if center.abs() > half - GAUSSIAN_MARGIN {
            return Err(Error::Precondition(format!(
                "gaussian center {center} is within {GAUSSIAN_MARGIN} of the window edge ±{half}"
            )));
        }
        if modulation.abs() > grid.nyquist() - SPECTRAL_MARGIN {
            return Err(Error::Precondition(format!(
                "gaussian modulation {modulation} too close to Nyquist {} (grid spacing {})",
                grid.nyquist(),
                grid.spacing()
            )));
        }
        let amp = 2f64.powf(0.25);
        Self::from_fn(grid, |x| {
            let d = x - center;
            Complex64::from_polar(amp * (-PI * d * d).exp(), 2.0 * PI * modulation * x)
        })
    }

    /// `n`-th unit-norm Hermite function for the weight `e^{-pi x^2}`.
    pub fn hermite(grid: Grid1D, n: usize) -> Result<Self> {
        let edge = hermite_value(n, 0.5 * grid.length()).abs();
        if edge >= EDGE_TOL {
            return Err(Error::Precondition(format!(
                "hermite({n}) has amplitude {edge:e} at the window edge ±{}",
                0.5 * grid.length()
            )));
        }
        // The Hermite functions are eigenfunctions of the Fourier transform, so
        // the same decay test at Nyquist bounds spectral aliasing.
        let spec = hermite_value(n, grid.nyquist()).abs();
        if spec >= EDGE_TOL {
            return Err(Error::Precondition(format!(
                "hermite({n}) is under-resolved: amplitude {spec:e} at Nyquist {}",
                grid.nyquist()
            )));
        }
        Self::from_fn(grid, |x| Complex64::new(hermite_value(n, x), 0.0))
    }

    /// Unit-norm hyperbolic secant `sqrt(pi/(2w)) sech(pi x / w)`.
    pub fn sech(grid: Grid1D, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Precondition(format!("sech width must be positive, got {width}")));
        }
        let amp = (PI / (2.0 * width)).sqrt();
        let f = |x: f64| amp / (PI * x / width).cosh();
        let edge = f(0.5 * grid.length());
        if edge >= EDGE_TOL {
            return Err(Error::Precondition(format!(
                "sech of width {width} has amplitude {edge:e} at the window edge"
            )));
        }
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Riemann-sum `L^p` norm; `p = f64::INFINITY` gives the max modulus.
    pub fn norm(&self, p: f64) -> f64 {
        lp_norm(self.values.iter().map(|v| v.norm()), p, self.grid.spacing())
    }

    pub fn norm_sq(&self) -> f64 {
        let n = self.norm(2.0);
        n * n
    }

    /// `sum f_k conj(g_k) dx`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.check_same(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.spacing())
    }

    pub fn check_same(&self, other: &Signal) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &Signal, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Signal> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Signal { grid: self.grid, values })
    }

    /// Pointwise modulus as a real signal.
    pub fn modulus(&self) -> Signal {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    /// Circular translation `(T_u f)(x) = f(x - u)`; `u` must be on-grid.
    pub fn translate(&self, u: f64) -> Result<Signal> {
        let s = self.grid.steps("translation", u)?;
        let n = self.len() as i64;
        let shift = s.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(shift);
        Ok(Signal { grid: self.grid, values })
    }

    /// Modulation `(M_eta f)(x) = e^{2 pi i eta x} f(x)`; `eta` must be a multiple of `1/L`.
    pub fn modulate(&self, eta: f64) -> Result<Signal> {
        let m = crate::grid::steps_of("modulation", eta, self.grid.dual_spacing())?;
        let eta = m as f64 * self.grid.dual_spacing();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::cis(2.0 * PI * eta * self.grid.point(k)))
            .collect();
        Ok(Signal { grid: self.grid, values })
    }

    /// Centered Fourier transform, sampled on the dual grid.
    pub fn fourier(&self) -> Signal {
        Signal { grid: self.grid.dual(), values: fft::centered(&self.values, self.grid.spacing(), false) }
    }

    /// Inverse of [`Signal::fourier`]: treats `self` as a spectrum and returns
    /// the signal on the dual of its grid.
    pub fn inverse_fourier(&self) -> Signal {
        let n = self.len() as f64;
        // dxi for the inverse is the spacing of the spectrum grid; fft::centered
        // expects the spacing of the output grid.
        let dx_out = 1.0 / (n * self.grid.spacing());
        Signal { grid: self.grid.dual(), values: fft::centered(&self.values, dx_out, true) }
    }

    /// Fraction of `||f||_2^2` within one sixteenth of the window of either edge.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total = self.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let band = self.len() / 16;
        let n = self.len();
        let edge: f64 = self.values[..band].iter().chain(&self.values[n - band..]).map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid.spacing();
        edge / total
    }

    /// Index of the largest modulus; ties resolve to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (k, v) in self.values.iter().enumerate() {
            let a = v.norm();
            if a > best_val {
                best = k;
                best_val = a;
            }
        }
        best
    }

    /// Writes `x,re,im` rows with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{}", self.grid.point(k), v.re, v.im)?;
        }
        Ok(())
    }
}

/// Value at `x` of the `n`-th normalised Hermite function with weight `e^{-pi x^2}`.
pub fn hermite_value(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 2f64.powf(0.25) * (-PI * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (4.0 * PI / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Riemann-sum `L^p` norm of a sequence of moduli with cell measure `w`.
///
/// Terms are summed in ascending order, which makes the result independent
/// of the order of the samples (so permutations of the grid preserve it
/// bit for bit). Moduli are first rescaled by a power of two near their
/// maximum so that `a^p` neither underflows nor overflows; the rescaling is
/// exact, so results match the unscaled sum whenever that one is finite and normal.
pub(crate) fn lp_norm(moduli: impl Iterator<Item = f64>, p: f64, w: f64) -> f64 {
    if p.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    let mut terms: Vec<f64> = moduli.collect();
    let peak = terms.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return if peak == 0.0 { 0.0 } else { peak };
    }
    let scale = 2f64.powi(peak.log2().ceil() as i32);
    if p == 1.0 {
        terms.sort_unstable_by(f64::total_cmp);
        return w * terms.iter().sum::<f64>();
    }
    for a in terms.iter_mut() {
        let b = *a / scale;
        *a = if p == 2.0 { b * b } else { b.powf(p) };
    }
    terms.sort_unstable_by(f64::total_cmp);
    let sum = w * terms.iter().sum::<f64>();
    scale * if p == 2.0 { sum.sqrt() } else { sum.powf(1.0 / p) }
}
