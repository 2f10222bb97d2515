use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::field::TFField;
use crate::grid::{Grid1D, TFGrid};
use crate::signal::Signal;

/// Analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WindowSpec {
    Gaussian,
    Hermite {
        n: usize,
    },
    #[serde(skip)]
    Sampled(Signal),
}

impl WindowSpec {
    /// Samples the window on `grid`, checking unit norm.
    pub fn signal(&self, grid: Grid1D) -> Result<Signal> {
        let s = match self {
            WindowSpec::Gaussian => Signal::gaussian(grid, 0.0, 0.0)?,
            WindowSpec::Hermite { n } => Signal::hermite(grid, *n)?,
            WindowSpec::Sampled(s) => {
                if !s.grid().same_as(&grid) {
                    return Err(Error::IncompatibleGrids("sampled window lives on another grid".into()));
                }
                s.clone()
            }
        };
        let n = s.norm(2.0);
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!("window norm is {n}, expected 1")));
        }
        Ok(s)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, WindowSpec::Gaussian)
    }

    /// Closed-form ambiguity function where one is known.
    pub fn ambiguity_closed_form(&self, x: f64, w: f64) -> Option<f64> {
        let r2 = x * x + w * w;
        match self {
            WindowSpec::Gaussian => Some((-0.5 * PI * r2).exp()),
            WindowSpec::Hermite { n } => Some((-0.5 * PI * r2).exp() * laguerre(*n, PI * r2)),
            WindowSpec::Sampled(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            WindowSpec::Gaussian => "gaussian".into(),
            WindowSpec::Hermite { n } => format!("hermite{n}"),
            WindowSpec::Sampled(_) => "sampled".into(),
        }
    }
}

/// Laguerre polynomial `L_n(t)` by the three-term recurrence.
pub(crate) fn laguerre(n: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_tf(f: &Signal, window: &Signal, tf: &TFGrid) -> Result<Vec<usize>> {
    f.check_same(window)?;
    if !tf.omega.same_as(&f.grid().dual()) {
        return Err(Error::IncompatibleGrids(format!(
            "frequency axis {:?} is not the dual of the signal grid {:?}",
            tf.omega,
            f.grid()
        )));
    }
    let n = f.len() as i64;
    let origin = f.grid().origin() as i64;
    tf.x.points()
        .map(|x| {
            let s = f.grid().steps("time node", x)?;
            Ok((s + origin).rem_euclid(n) as usize)
        })
        .collect()
}

/// `V_phi f(x, w) = sum_t f(t) conj(phi(t - x)) e^{-2 pi i t w} dt`, one FFT per time node.
pub fn stft(f: &Signal, window: &Signal, tf: &TFGrid) -> Result<TFField> {
    let nodes = check_tf(f, window, tf)?;
    let n = f.len();
    let origin = f.grid().origin();
    let dx = f.grid().spacing();
    let plan = fft::forward_plan(n);
    let fv = f.values();
    let wv = window.values();
    let mut values = Vec::with_capacity(tf.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for node in nodes {
        // node is the index of x; phi(t_k - x) sits at index k - node + origin.
        let shift = (node + n - origin) % n;
        for k in 0..n {
            buf[k] = fv[k] * wv[(k + n - shift) % n].conj();
        }
        fft::centered_line(&mut buf, dx, false, plan.as_ref());
        values.extend_from_slice(&buf);
    }
    Ok(TFField::from_parts(*tf, values))
}

/// Spectrogram `|V_phi f|^2` as a real field.
pub fn phaseless(f: &Signal, window: &Signal, tf: &TFGrid) -> Result<TFField> {
    Ok(stft(f, window, tf)?.map(|v| Complex64::new(v.norm_sqr(), 0.0)))
}

/// Sup-norm of `V(T_u M_eta f)(x, w) - e^{-2 pi i u w} V f(x - u, w - eta)`
/// over the full time-frequency grid of `f`.
pub fn covariance_residual(f: &Signal, window: &Signal, u: f64, eta: f64) -> Result<f64> {
    let tf = TFGrid::full(f.grid());
    let moved = f.modulate(eta)?.translate(u)?;
    let lhs = stft(&moved, window, &tf)?;
    let base = stft(f, window, &tf)?;
    let rhs = base.shift(u, eta)?.map_indexed(|_, w, v| v * Complex64::cis(-2.0 * PI * u * w));
    Ok(lhs.sub(&rhs)?.norm(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn setup() -> (Grid1D, Signal) {
        let g = Grid1D::new(32.0, 512).unwrap();
        (g, Signal::gaussian(g, 0.0, 0.0).unwrap())
    }

    #[test]
    fn gaussian_stft_is_gaussian_bump() {
        let (g, phi) = setup();
        let tf = TFGrid::for_signal(&g, 16.0, 8).unwrap();
        let v = stft(&phi, &phi, &tf).unwrap();
        let want = TFField::from_fn(tf, |x, w| Complex64::from_polar((-0.5 * PI * (x * x + w * w)).exp(), -PI * x * w))
            .unwrap();
        assert!(v.sub(&want).unwrap().norm(f64::INFINITY) < 1e-10);
    }

    #[test]
    fn zero_signal_gives_zero_field() {
        let (g, phi) = setup();
        let v = stft(&Signal::zeros(g), &phi, &TFGrid::full(&g)).unwrap();
        assert_eq!(v.norm(f64::INFINITY), 0.0);
    }

    #[test]
    fn isometry_on_random_signal() {
        let (g, phi) = setup();
        let f = rng::random_signal(g, &mut rng::stream(11), 5, 8.0, 6.0).unwrap();
        let v = stft(&f, &phi, &TFGrid::full(&g)).unwrap();
        assert!((v.norm(2.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn covariance_lattice_small() {
        let (g, phi) = setup();
        let f = Signal::hermite(g, 2).unwrap();
        assert_eq!(covariance_residual(&f, &phi, 0.0, 0.0).unwrap(), 0.0);
        assert!(covariance_residual(&f, &phi, 2.0, 0.0).unwrap() < 1e-12);
        assert!(covariance_residual(&f, &phi, 0.0, 3.0 / 32.0).unwrap() < 1e-12);
        assert!(covariance_residual(&f, &phi, 0.01, 0.0).is_err());
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3.0), 1.0);
        assert_eq!(laguerre(1, 0.25), 0.75);
        assert!((laguerre(2, 1.0) - (1.0 - 2.0 + 0.5)).abs() < 1e-15);
    }
}
