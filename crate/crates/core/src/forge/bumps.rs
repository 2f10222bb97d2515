use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::norms::bracket;
use crate::signal::Signal;

use super::schedule::{masked_norm, AnnulusSchedule};

/// Translated, rescaled copies of the seed: `eps_n = 2^{-n} <j_n>^{-sigma} tau_{3 j_n / 2} h`.
pub fn build_bumps(schedule: &AnnulusSchedule) -> Result<Vec<Signal>> {
    (1..=schedule.n_max())
        .map(|n| {
            let shifted = schedule.seed.translate(1.5 * schedule.radius(n))?;
            Ok(shifted.scale(Complex64::new(schedule.scale(n), 0.0)))
        })
        .collect()
}

fn in_annulus(j: f64) -> impl Fn(f64) -> bool {
    move |x: f64| (j..=2.0 * j).contains(&x.abs())
}

/// Measured quantities of the four bump bounds for one index `n`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub radius: f64,
    pub scale: f64,
    /// `||eps_n||_{L^p} / (scale ||h||_{L^p})`, equal to 1 up to rounding.
    pub gub_lp: f64,
    /// Same for `L^q`.
    pub gub_lq: f64,
    /// `||eps_n||_{X^p_sigma ∩ L^q} / (2^{-n} ||h||_{X^p_sigma ∩ L^q})`.
    pub gub_x: f64,
    /// `||eps_n||_{L^q(A_n)} 2^n <j_n>^sigma`, at least 1.
    pub mcb: f64,
    /// `||eps_n||_{X(A_n^c)}`.
    pub mtb: f64,
    /// `mtb / (2^{-4n} <j_n>^{-sigma})`.
    pub mtb_constant: f64,
    /// `sup_{l < n} ||eps_l||_{X(A_n)}`; zero for `n = 1`.
    pub sob: f64,
    /// `sob / (2^{-3n} <j_n>^{-sigma})`.
    pub sob_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// `log2(mtb_{n+1} / mtb_n)`; `-inf` once the tail underflows to zero.
    pub mtb_slopes: Vec<f64>,
    /// Same for the overlap quantity, starting at `n = 2`.
    pub sob_slopes: Vec<f64>,
}

impl BoundReport {
    pub fn max_gub_deviation(&self) -> f64 {
        self.rows.iter().flat_map(|r| [(r.gub_lp - 1.0).abs(), (r.gub_lq - 1.0).abs()]).fold(0.0, f64::max)
    }

    pub fn min_mcb(&self) -> f64 {
        self.rows.iter().map(|r| r.mcb).fold(f64::INFINITY, f64::min)
    }

    pub fn max_implicit_constant(&self) -> f64 {
        self.rows.iter().flat_map(|r| [r.mtb_constant, r.sob_constant]).fold(0.0, f64::max)
    }

    pub fn max_slope(&self) -> f64 {
        self.mtb_slopes.iter().chain(&self.sob_slopes).copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn log2_ratio(next: f64, prev: f64) -> f64 {
    if next == 0.0 {
        f64::NEG_INFINITY
    } else if prev == 0.0 {
        f64::INFINITY
    } else {
        (next / prev).log2()
    }
}

/// Measures the global upper, mass concentration, mass tail and overlap
/// bounds for every bump.
pub fn verify_lemma_bounds(schedule: &AnnulusSchedule, bumps: &[Signal]) -> BoundReport {
    let (sigma, p, q) = (schedule.sigma, schedule.p, schedule.q);
    let h = &schedule.seed;
    let all = |_: f64| true;
    let x_norm = |f: &Signal, keep: &dyn Fn(f64) -> bool| masked_norm(f, p, sigma, keep);
    let h_p = h.norm(p);
    let h_q = h.norm(q);
    let h_x = x_norm(h, &all) + h_q;
    let mut rows = Vec::with_capacity(bumps.len());
    for (i, eps) in bumps.iter().enumerate() {
        let n = i + 1;
        let j = schedule.radius(n);
        let scale = schedule.scale(n);
        let weight = bracket(j).powf(-sigma);
        let annulus = in_annulus(j);
        let mcb = masked_norm(eps, q, 0.0, &annulus) / scale;
        let mtb = x_norm(eps, &|x| !annulus(x));
        let sob = bumps[..i].iter().map(|e| x_norm(e, &annulus)).fold(0.0, f64::max);
        rows.push(BoundRow {
            n,
            radius: j,
            scale,
            gub_lp: eps.norm(p) / (scale * h_p),
            gub_lq: eps.norm(q) / (scale * h_q),
            gub_x: (x_norm(eps, &all) + eps.norm(q)) / (2f64.powi(-(n as i32)) * h_x),
            mcb,
            mtb,
            mtb_constant: mtb / (2f64.powi(-4 * n as i32) * weight),
            sob,
            sob_constant: sob / (2f64.powi(-3 * n as i32) * weight),
        });
    }
    let mtb_slopes = rows.windows(2).map(|w| log2_ratio(w[1].mtb, w[0].mtb)).collect();
    let sob_slopes =
        rows.iter().skip(1).collect::<Vec<_>>().windows(2).map(|w| log2_ratio(w[1].sob, w[0].sob)).collect();
    BoundReport { rows, mtb_slopes, sob_slopes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::select_annulus_schedule;
    use crate::grid::Grid1D;

    fn fixture(sigma: f64) -> (AnnulusSchedule, Vec<Signal>) {
        let g = Grid1D::new(512.0, 4096).unwrap();
        let h = Signal::gaussian(g, 0.0, 0.0).unwrap();
        let s = select_annulus_schedule(&h, sigma, 2.0, 2.0, 5).unwrap();
        let b = build_bumps(&s).unwrap();
        (s, b)
    }

    #[test]
    fn bumps_peak_at_centre_of_annulus() {
        let (s, bumps) = fixture(0.0);
        for (i, e) in bumps.iter().enumerate() {
            assert_eq!(e.grid().point(e.argmax()), 1.5 * s.radii[i]);
        }
    }

    #[test]
    fn bumps_nearly_orthogonal() {
        let (_, bumps) = fixture(0.0);
        for a in 0..bumps.len() {
            for b in a + 1..bumps.len() {
                assert!(bumps[a].inner(&bumps[b]).unwrap().norm() < 1e-8);
            }
        }
    }

    #[test]
    fn bounds_hold_for_both_weights() {
        for sigma in [0.0, 1.0] {
            let (s, bumps) = fixture(sigma);
            let r = verify_lemma_bounds(&s, &bumps);
            assert!(r.max_gub_deviation() < 1e-10, "{sigma}: {}", r.max_gub_deviation());
            assert!(r.min_mcb() >= 1.0 - 1e-12, "{sigma}: {}", r.min_mcb());
            assert!(r.max_implicit_constant() <= 8.0, "{sigma}: {:?}", r.rows);
            assert!(r.max_slope() <= -3.5, "{sigma}: {:?} {:?}", r.mtb_slopes, r.sob_slopes);
        }
    }
}
