use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::bracket;
use crate::signal::{lp_norm, Signal};

/// Margin (in length units) kept between the outermost annulus and the window edge.
pub const GRID_MARGIN: f64 = 4.0;

/// Radii `j_n`, scales `2^{-n} <j_n>^{-sigma}` and verified tails for the
/// bump construction, together with the recentred, normalised seed.
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusSchedule {
    #[serde(skip)]
    pub seed: Signal,
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
    /// `j_1 < j_2 < ...` with `2 j_n < j_{n+1}`.
    pub radii: Vec<f64>,
    pub scales: Vec<f64>,
    /// `||h 1_{|x| >= j_n/2}||_{X^p_{2 sigma}} + ||h 1_{|x| >= j_n/2}||_{L^q_sigma}`.
    pub tails: Vec<f64>,
    /// Translation applied to move the seed's peak to the origin.
    pub recentre_shift: f64,
    /// Factor applied so that `min(||h||_{L^p(B)}, ||h||_{L^q(B)}) = 1`.
    pub normalisation: f64,
}

impl AnnulusSchedule {
    pub fn n_max(&self) -> usize {
        self.radii.len()
    }

    /// `j_n` for `n = 1..=n_max`.
    pub fn radius(&self, n: usize) -> f64 {
        self.radii[n - 1]
    }

    pub fn scale(&self, n: usize) -> f64 {
        self.scales[n - 1]
    }
}

/// `||w(x) f 1_S||_{L^p}` over samples selected by `keep(x)`.
pub(crate) fn masked_norm(f: &Signal, p: f64, weight_power: f64, keep: impl Fn(f64) -> bool) -> f64 {
    let g = f.grid();
    let moduli = f.values().iter().enumerate().map(|(k, v)| {
        let x = g.point(k);
        if keep(x) {
            v.norm() * bracket(x).powf(weight_power)
        } else {
            0.0
        }
    });
    lp_norm(moduli, p, g.spacing())
}

/// Smallest admissible radii for a decreasing tail function: `j_n` is the
/// smallest even integer with `tail(j_n) <= 2^{-3n}` and `j_n >= 2 j_{n-1} + 2`.
pub fn select_radii(tail: impl Fn(f64) -> f64, n_max: usize, limit: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut radii = Vec::with_capacity(n_max);
    let mut tails = Vec::with_capacity(n_max);
    let mut j = 2.0;
    for n in 1..=n_max {
        let target = 2f64.powi(-3 * n as i32);
        while tail(j) > target {
            j += 2.0;
            if j > limit {
                return Err(Error::InfeasibleGrid(format!(
                    "no radius up to {limit} brings the tail below 2^-{}",
                    3 * n
                )));
            }
        }
        radii.push(j);
        tails.push(tail(j));
        j = 2.0 * j + 2.0;
    }
    Ok((radii, tails))
}

/// Builds the annulus schedule for seed `h`.
pub fn select_annulus_schedule(h: &Signal, sigma: f64, p: f64, q: f64, n_max: usize) -> Result<AnnulusSchedule> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    if !(sigma >= 0.0 && p >= 1.0 && p.is_finite() && q >= 1.0) {
        return Err(Error::Precondition(format!("invalid exponents sigma={sigma}, p={p}, q={q}")));
    }
    let grid = *h.grid();
    let peak = h.argmax();
    let shift = -grid.point(peak);
    let centred = h.translate(shift)?;
    let in_ball = |x: f64| x.abs() <= 1.0;
    let mass = masked_norm(&centred, p, 0.0, in_ball).min(masked_norm(&centred, q, 0.0, in_ball));
    if mass == 0.0 {
        return Err(Error::ZeroInput("seed has no mass in the unit ball around its peak".into()));
    }
    let seed = centred.scale(Complex64::new(1.0 / mass, 0.0));
    let tail = |j: f64| {
        let outside = |x: f64| x.abs() >= 0.5 * j;
        masked_norm(&seed, p, 2.0 * sigma, outside) + masked_norm(&seed, q, sigma, outside)
    };
    let half = 0.5 * grid.length();
    let (radii, tails) = select_radii(tail, n_max, half)?;
    let outer = 2.0 * radii[n_max - 1] + GRID_MARGIN;
    if outer > half {
        return Err(Error::InfeasibleGrid(format!(
            "the outermost annulus needs a window of length at least {} (have {})",
            2.0 * outer,
            grid.length()
        )));
    }
    for &j in &radii {
        grid.steps("bump position", 1.5 * j)?;
    }
    let scales = radii.iter().enumerate().map(|(i, &j)| 2f64.powi(-(i as i32 + 1)) * bracket(j).powf(-sigma)).collect();
    Ok(AnnulusSchedule { seed, sigma, p, q, radii, scales, tails, recentre_shift: shift, normalisation: 1.0 / mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    /// Continuum `||h 1_{|x| >= a}||_2^2` for `h = 2^{1/4} e^{-pi x^2}` by composite Simpson.
    fn gaussian_tail_sq(a: f64) -> f64 {
        let n = 20_000;
        let b = a + 12.0;
        let h = (b - a) / n as f64;
        let f = |x: f64| 2f64.sqrt() * (-2.0 * std::f64::consts::PI * x * x).exp();
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        2.0 * s * h / 3.0
    }

    fn grid() -> Grid1D {
        Grid1D::new(256.0, 4096).unwrap()
    }

    #[test]
    fn gaussian_schedule_radii() {
        let h = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        let s = select_annulus_schedule(&h, 0.0, 2.0, 2.0, 5).unwrap();
        assert_eq!(s.radii, vec![2.0, 6.0, 14.0, 30.0, 62.0]);
        for (n, t) in s.tails.iter().enumerate() {
            assert!(*t <= 2f64.powi(-3 * (n as i32 + 1)));
        }
    }

    #[test]
    fn first_radius_matches_quadrature_oracle() {
        let h = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        let s = select_annulus_schedule(&h, 0.0, 2.0, 2.0, 1).unwrap();
        let ball = (1.0 - gaussian_tail_sq(1.0)).sqrt();
        let tail = |j: f64| 2.0 * gaussian_tail_sq(0.5 * j).sqrt() / ball;
        let oracle = (1..100).map(|k| 2.0 * k as f64).find(|&j| tail(j) <= 0.125).unwrap();
        assert_eq!(s.radii[0], oracle);
        // Left Riemann sums of a decreasing integrand over nodes >= a lie
        // between the integrals from a and from a - dx.
        let j = s.radii[0];
        let dx = grid().spacing();
        let upper = 2.0 * gaussian_tail_sq(0.5 * j - dx).sqrt() / ball;
        assert!(
            s.tails[0] >= tail(j) * (1.0 - 1e-3) && s.tails[0] <= upper * (1.0 + 1e-3),
            "{} {} {}",
            s.tails[0],
            tail(j),
            upper
        );
    }

    #[test]
    fn heavier_weight_needs_larger_radii() {
        let g = Grid1D::new(512.0, 4096).unwrap();
        let h = Signal::gaussian(g, 0.0, 0.0).unwrap();
        let s0 = select_annulus_schedule(&h, 0.0, 2.0, 2.0, 5).unwrap();
        let s1 = select_annulus_schedule(&h, 1.0, 2.0, 2.0, 5).unwrap();
        for (a, b) in s0.radii.iter().zip(&s1.radii) {
            assert!(b >= a);
        }
        // The minimal disjoint ladder dominates here, so the weight shows up in the tails.
        for (t1, t0) in s1.tails.iter().zip(&s0.tails) {
            assert!(t1 >= t0);
        }
        assert!(s1.tails[0] > s0.tails[0]);
        for (n, t) in s1.tails.iter().enumerate() {
            assert!(*t <= 2f64.powi(-3 * (n as i32 + 1)));
        }
    }

    #[test]
    fn small_window_reports_required_length() {
        let g = Grid1D::new(64.0, 1024).unwrap();
        let h = Signal::gaussian(g, 0.0, 0.0).unwrap();
        match select_annulus_schedule(&h, 0.0, 2.0, 2.0, 5) {
            Err(Error::InfeasibleGrid(msg)) => assert!(msg.contains("256"), "{msg}"),
            other => panic!("expected infeasible grid, got {other:?}"),
        }
    }

    #[test]
    fn recentres_on_peak() {
        let h = Signal::gaussian(grid(), 3.0, 0.0).unwrap();
        let s = select_annulus_schedule(&h, 0.0, 2.0, 2.0, 2).unwrap();
        assert_eq!(s.recentre_shift, -3.0);
        assert_eq!(s.seed.argmax(), grid().origin());
    }
}
