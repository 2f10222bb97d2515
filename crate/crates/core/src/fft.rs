//! FFT plumbing shared by the signal and field types.
//!
//! All transforms use the kernel `e^{-2 pi i x xi}` with Riemann-sum
//! weights, so that a signal on a grid of spacing `dx` maps to samples of its
//! continuum Fourier transform on the dual grid.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_forward(n)
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_inverse(n)
}

#[inline]
fn alt(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// In-place centered transform of one line with node spacing `dx`.
///
/// Forward: `F_m = dx (-1)^{m + N/2} DFT[(-1)^k f_k]_m`.
/// Inverse: `f_k = dxi (-1)^{k + N/2} IDFT[(-1)^m F_m]_k` where `dxi = 1/(N dx)`.
pub(crate) fn centered_line(buf: &mut [Complex64], dx: f64, inverse: bool, fft: &dyn Fft<f64>) {
    let n = buf.len();
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= alt(k);
    }
    fft.process(buf);
    let w = if inverse { 1.0 / (n as f64 * dx) } else { dx };
    for (m, v) in buf.iter_mut().enumerate() {
        *v *= w * alt(m + half);
    }
}

pub(crate) fn centered(values: &[Complex64], dx: f64, inverse: bool) -> Vec<Complex64> {
    let n = values.len();
    let plan = if inverse { inverse_plan(n) } else { forward_plan(n) };
    let mut buf = values.to_vec();
    centered_line(&mut buf, dx, inverse, plan.as_ref());
    buf
}

/// Signed integer frequency index of raw DFT bin `m`, in `[-N/2, N/2)`.
#[inline]
pub(crate) fn signed_bin(m: usize, n: usize) -> f64 {
    if m < n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Applies `values -> IDFT(mult * DFT(values))` along one axis of length `n`,
/// where `mult[m]` is indexed by raw DFT bin.
pub(crate) fn apply_line_multiplier(buf: &mut [Complex64], mult: &[f64]) {
    let n = buf.len();
    forward_plan(n).process(buf);
    let inv_n = 1.0 / n as f64;
    for (v, m) in buf.iter_mut().zip(mult) {
        *v *= m * inv_n;
    }
    inverse_plan(n).process(buf);
}

/// Raw (unnormalised, uncentered) 2D DFT of a row-major `rows x cols` array.
pub(crate) fn raw_2d(values: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let row_plan = if inverse { inverse_plan(cols) } else { forward_plan(cols) };
    for row in values.chunks_exact_mut(cols) {
        row_plan.process(row);
    }
    let col_plan = if inverse { inverse_plan(rows) } else { forward_plan(rows) };
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = values[r * cols + c];
        }
        col_plan.process(&mut col);
        for r in 0..rows {
            values[r * cols + c] = col[r];
        }
    }
}

/// Centered 2D transform of a row-major array with spacings `(dx_rows, dx_cols)`.
pub(crate) fn centered_2d(
    values: &mut [Complex64],
    rows: usize,
    cols: usize,
    dx_rows: f64,
    dx_cols: f64,
    inverse: bool,
) {
    let row_plan = if inverse { inverse_plan(cols) } else { forward_plan(cols) };
    for row in values.chunks_exact_mut(cols) {
        centered_line(row, dx_cols, inverse, row_plan.as_ref());
    }
    let col_plan = if inverse { inverse_plan(rows) } else { forward_plan(rows) };
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = values[r * cols + c];
        }
        centered_line(&mut col, dx_rows, inverse, col_plan.as_ref());
        for r in 0..rows {
            values[r * cols + c] = col[r];
        }
    }
}
