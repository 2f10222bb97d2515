use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{disjointness_witness, phase_inf_distance, Norm};
use crate::signal::Signal;

use super::schedule::{masked_norm, AnnulusSchedule};

/// `k = c_n + b_n` and `k_n = c_n - b_n`, with `c_n = h + delta sum_{j <= n} eps_j`
/// and `b_n = delta sum_{j > n} eps_j` (the sum stops at the last bump).
#[derive(Debug, Clone)]
pub struct InstabilityPair {
    pub n: usize,
    pub delta: f64,
    pub c: Signal,
    pub b: Signal,
    pub k: Signal,
    pub k_n: Signal,
}

fn weighted_sum(base: Signal, terms: &[Signal], delta: f64) -> Result<Signal> {
    terms.iter().try_fold(base, |acc, e| acc.add(&e.scale(Complex64::new(delta, 0.0))))
}

pub fn assemble_pair(schedule: &AnnulusSchedule, bumps: &[Signal], delta: f64, n: usize) -> Result<InstabilityPair> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n > bumps.len() {
        return Err(Error::Precondition(format!("n = {n} exceeds the {} available bumps", bumps.len())));
    }
    let c = weighted_sum(schedule.seed.clone(), &bumps[..n], delta)?;
    let b = weighted_sum(Signal::zeros(*schedule.seed.grid()), &bumps[n..], delta)?;
    let k = c.add(&b)?;
    let k_n = c.sub(&b)?;
    Ok(InstabilityPair { n, delta, c, b, k, k_n })
}

impl InstabilityPair {
    /// Target lower bound `a_n = 2^n` for the stability ratio.
    pub fn target(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    /// `||h - k|| / delta` in the given norm.
    pub fn closeness(&self, seed: &Signal, norm: &Norm) -> Result<f64> {
        Ok(norm.eval(&seed.sub(&self.k)?) / self.delta)
    }

    /// Disjointness witness of the decomposition `k = c_n + b_n`.
    pub fn witness(&self, norm: &Norm) -> Result<f64> {
        disjointness_witness(&self.k, &self.c, &self.b, norm)
    }
}

/// Value of `inf_lambda ||k - lambda k_n||_num / || |k| - |k_n| ||_den`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityRatio {
    pub n: usize,
    pub numerator: f64,
    pub denominator: f64,
    /// `+inf` when the denominator vanishes identically in floating point
    /// while the numerator does not.
    pub ratio: f64,
}

impl StabilityRatio {
    pub fn is_unbounded(&self) -> bool {
        self.ratio.is_infinite()
    }
}

pub fn instability_ratio(pair: &InstabilityPair, numerator: &Norm, denominator: &Norm) -> Result<StabilityRatio> {
    if pair.b.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::Degenerate("k and k_n coincide (no bumps beyond n)".into()));
    }
    let num = phase_inf_distance(&pair.k, &pair.k_n, numerator, None)?.distance;
    let diff = pair.k.zip_with(&pair.k_n, |a, b| Complex64::new(a.norm() - b.norm(), 0.0))?;
    let den = denominator.eval(&diff);
    let ratio = if den == 0.0 { f64::INFINITY } else { num / den };
    Ok(StabilityRatio { n: pair.n, numerator: num, denominator: den, ratio })
}

/// One point of the unit-circle sweep of `||k - lambda k_n||_{L^q}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DichotomyRow {
    /// `lambda = e^{i angle}`.
    pub angle: f64,
    pub far_from_one: bool,
    pub lhs: f64,
    pub bound: f64,
}

/// Sweeps `lambda` over `points` equally spaced unit numbers and pairs the
/// measured `||k - lambda k_n||_{L^q}` with its lower bound: for
/// `|lambda - 1| >= 1/2` the bound is `||h||_q / 2 - 2 delta sum ||eps_j||_q`,
/// otherwise the localisation to `A_{n+1}`
/// `delta ||eps_{n+1}||_{L^q(A_{n+1})} - 2 ||h||_{L^q(A_{n+1})} - 2 delta sum_{j != n+1} ||eps_j||_{L^q(A_{n+1})}`.
pub fn lower_bound_sweep(
    schedule: &AnnulusSchedule,
    bumps: &[Signal],
    pair: &InstabilityPair,
    points: usize,
) -> Result<Vec<DichotomyRow>> {
    if pair.n >= bumps.len() {
        return Err(Error::Precondition("the sweep needs at least one bump beyond n".into()));
    }
    let q = schedule.q;
    let delta = pair.delta;
    let far_bound = 0.5 * schedule.seed.norm(q) - 2.0 * delta * bumps.iter().map(|e| e.norm(q)).sum::<f64>();
    let j = schedule.radius(pair.n + 1);
    let annulus = move |x: f64| (j..=2.0 * j).contains(&x.abs());
    let near_bound = delta * masked_norm(&bumps[pair.n], q, 0.0, annulus)
        - 2.0 * masked_norm(&schedule.seed, q, 0.0, annulus)
        - 2.0
            * delta
            * bumps
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != pair.n)
                .map(|(_, e)| masked_norm(e, q, 0.0, annulus))
                .sum::<f64>();
    (0..points)
        .map(|m| {
            let angle = 2.0 * std::f64::consts::PI * m as f64 / points as f64;
            let lambda = Complex64::from_polar(1.0, angle);
            let far = (lambda - 1.0).norm() >= 0.5;
            let lhs = pair.k.zip_with(&pair.k_n, |a, b| a - lambda * b)?.norm(q);
            Ok(DichotomyRow { angle, far_from_one: far, lhs, bound: if far { far_bound } else { near_bound } })
        })
        .collect()
}
