use std::f64::consts::PI;

use num_complex::Complex64;
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::TFField;
use crate::grid::TFGrid;
use crate::rng;
use crate::signal::Signal;

use super::ambiguity::{ambiguity, measurement_to_ambiguity_product};

/// Summary of a recovery run, serialised as the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub tau: f64,
    pub masked_fraction: f64,
    pub anchor_index: usize,
    /// Relative error against a known ground truth, when one was supplied.
    pub error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub signal: Signal,
    pub report: RecoveryReport,
}

/// Recovers `f` up to a global phase from the spectrogram `p = |V_phi f|^2`
/// sampled on the full self-dual grid of `window`.
///
/// The ambiguity function of `f` is obtained by dividing the rearranged 2D
/// transform of `p` by `conj(A phi)` wherever `|A phi| >= tau` (zero
/// elsewhere). Inverting in frequency gives `R(x, t) = f(t) conj(f(t - x))`;
/// the anchor `t0` is the first maximiser of `|f|^2 = R(0, .)` and
/// `f(t) = R(t - t0, t) / sqrt(R(0, t0))`.
pub fn recover(p: &TFField, window: &Signal, tau: f64) -> Result<Recovery> {
    if !(tau > 0.0) {
        return Err(Error::Precondition(format!("threshold must be positive, got {tau}")));
    }
    let tf = TFGrid::full(window.grid());
    if !p.grid().same_as(&tf) {
        return Err(Error::IncompatibleGrids("measurement must live on the window's full grid".into()));
    }
    if p.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroInput("zero measurement".into()));
    }
    let m = measurement_to_ambiguity_product(p)?;
    let aphi = ambiguity(window)?;
    let n = tf.x.count();
    let origin = tf.x.origin();
    if aphi.get(origin, origin).norm() < tau {
        return Err(Error::Precondition(format!(
            "threshold {tau} masks the origin where |A phi| = {}",
            aphi.get(origin, origin).norm()
        )));
    }
    let mut masked = 0usize;
    let mut af = vec![Complex64::new(0.0, 0.0); tf.len()];
    for (i, (mv, av)) in m.values().iter().zip(aphi.values()).enumerate() {
        if av.norm() >= tau {
            af[i] = mv / av.conj();
        } else {
            masked += 1;
        }
    }
    // R(x, .) = inverse transform in w of e^{-pi i x w} Af(x, w).
    let dt = window.grid().spacing();
    let plan = fft::inverse_plan(n);
    let mut r = vec![Complex64::new(0.0, 0.0); tf.len()];
    for ix in 0..n {
        let x = tf.x.point(ix);
        let row = &mut r[ix * n..(ix + 1) * n];
        for iw in 0..n {
            row[iw] = af[ix * n + iw] * Complex64::cis(-PI * x * tf.omega.point(iw));
        }
        fft::centered_line(row, dt, true, plan.as_ref());
    }
    let diag: Vec<f64> = r[origin * n..(origin + 1) * n].iter().map(|v| v.re).collect();
    let mut t0 = 0;
    for (k, &v) in diag.iter().enumerate() {
        if v > diag[t0] {
            t0 = k;
        }
    }
    let peak = diag[t0];
    if !(peak > 0.0) {
        return Err(Error::Degenerate("recovered intensity has no positive maximum".into()));
    }
    let anchor = peak.sqrt();
    let values = (0..n)
        .map(|k| {
            let ix = (k + n + origin - t0) % n;
            r[ix * n + k] / anchor
        })
        .collect();
    let signal = Signal::new(*window.grid(), values)?;
    Ok(Recovery {
        signal,
        report: RecoveryReport { tau, masked_fraction: masked as f64 / tf.len() as f64, anchor_index: t0, error: None },
    })
}

/// Adds i.i.d. Gaussian noise at the given SNR (in dB, relative to the mean
/// squared measurement) and clips the result at zero.
pub fn add_measurement_noise(p: &TFField, snr_db: f64, rng: &mut SplitMix64) -> TFField {
    let n = p.values().len() as f64;
    let power = p.values().iter().map(|v| v.re * v.re).sum::<f64>() / n;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let values = p.values().iter().map(|v| Complex64::new((v.re + sigma * rng::normal(rng)).max(0.0), 0.0)).collect();
    TFField::from_parts(*p.grid(), values)
}
