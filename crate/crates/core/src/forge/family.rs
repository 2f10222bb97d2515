use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::TFGrid;
use crate::norms::{bracket, littlewood_paley, phase_inf_distance, LpMode, Norm};
use crate::signal::{lp_norm, Signal};
use crate::transforms::{stft, WindowSpec};

use super::bumps::log2_ratio;
use super::schedule::{select_radii, GRID_MARGIN};

/// Exponents and grid choices for the STFT-level family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub q: f64,
    /// Smoothness `s' > s` of the closeness norm `W^{s',p}_r ∩ L^q`.
    pub s_closeness: f64,
    /// Closeness target: `||V f - V f_eps||_{W^{s',p}_r ∩ L^q} < epsilon`.
    pub epsilon: f64,
    pub n_max: usize,
    /// Length of the time axis of the sampled transform.
    pub x_length: f64,
    pub x_stride: usize,
    /// Dyadic range `j_min..=j_max` of the Littlewood-Paley display.
    pub lp_range: (i32, i32),
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            s: 1.0,
            p: 2.0,
            r: 1.0,
            q: 2.0,
            s_closeness: 1.25,
            epsilon: 0.1,
            n_max: 3,
            x_length: 12.0,
            x_stride: 1,
            lp_range: (2, 6),
        }
    }
}

/// One perturbed member: `f_{eps,k}` flips the sign of every bump after the `k`-th.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyMember {
    pub k: usize,
    /// `inf_lambda ||V f_eps - lambda V f_{eps,k}||_{L^q}`.
    pub numerator: f64,
    /// `|| |V f_eps| - |V f_{eps,k}| ||_{W^{s,p}_r}`.
    pub denominator: f64,
    pub ratio: f64,
    /// Smallest `|w|` at which `V f_eps - V f_{eps,k}` exceeds `1e-4` of its peak.
    pub difference_onset: f64,
    /// Sup distance between the modulation-built field and a direct STFT of the member signal, relative to its peak.
    pub ansatz_residual: f64,
}

/// Littlewood-Paley reduction of one measurement difference at level `j`.
#[derive(Debug, Clone, Serialize)]
pub struct LpReductionRow {
    pub k: usize,
    pub j: i32,
    /// `|| |V f_{eps,k}| - |V f_eps| ||_{W^{s,p}}`.
    pub lhs: f64,
    /// `2^{js} ||D||_{L^p}`.
    pub low: f64,
    /// `2^{-j d} (|| |V f_{eps,k}| ||_{W^{s+d,p}} + || |V f_eps| ||_{W^{s+d,p}})`.
    pub high: f64,
    /// `lhs / (low + high)`.
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityFamily {
    pub params: FamilyParams,
    #[serde(skip)]
    pub grid: TFGrid,
    /// `j_n`; the modulations are `a_n = 3 j_n / 2`.
    pub radii: Vec<f64>,
    pub modulations: Vec<f64>,
    pub scales: Vec<f64>,
    /// Largest `|w|` at which `V f` still exceeds `1e-4` of its peak.
    pub seed_halfwidth: f64,
    /// Frequency tails of `V f` beyond `|w| >= j_n / 2` in `L^p_{2r} ∩ L^q_r`.
    pub tails: Vec<f64>,
    pub delta: f64,
    /// `||V f||_{W^{s',p}_{2r} ∩ L^q}`.
    pub seed_norm: f64,
    /// `||V f - V f_eps||_{W^{s',p}_r ∩ L^q}`.
    pub closeness: f64,
    pub ansatz_residual: f64,
    pub members: Vec<FamilyMember>,
    pub lp_rows: Vec<LpReductionRow>,
    #[serde(skip)]
    pub f_eps: Signal,
    #[serde(skip)]
    pub perturbed: Vec<Signal>,
}

impl InstabilityFamily {
    /// `log2(R_{k+1} / R_k)` for consecutive members.
    pub fn growth(&self) -> Vec<f64> {
        self.members.windows(2).map(|w| log2_ratio(w[1].ratio, w[0].ratio)).collect()
    }

    pub fn max_lp_constant(&self) -> f64 {
        self.lp_rows.iter().map(|r| r.constant).fold(0.0, f64::max)
    }
}

pub fn frequency_tail(u: &TFField, p: f64, q: f64, r: f64, j: f64) -> f64 {
    let g = u.grid();
    let w = g.cell_area();
    let masked = |power: f64| {
        u.values().iter().enumerate().map(move |(i, v)| {
            let (x, om) = g.coords(i);
            if om.abs() >= 0.5 * j {
                v.norm() * bracket(x.hypot(om)).powf(power)
            } else {
                0.0
            }
        })
    };
    lp_norm(masked(2.0 * r), p, w) + lp_norm(masked(r), q, w)
}

/// Smallest and largest `|w|` over samples whose modulus exceeds `1e-4` of the peak.
fn onset_radius(field: &TFField) -> (f64, f64) {
    let peak = field.norm(f64::INFINITY);
    let g = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 1e-4 * peak)
        .map(|(i, _)| g.coords(i).1.abs())
        .fold((f64::INFINITY, 0.0), |(lo, hi), w| (lo.min(w), hi.max(w)))
}

fn combine(base: &TFField, bumps: &[TFField], coeffs: &[f64]) -> TFField {
    let mut values = base.values().to_vec();
    for (b, &c) in bumps.iter().zip(coeffs) {
        for (v, e) in values.iter_mut().zip(b.values()) {
            *v += e * c;
        }
    }
    TFField::from_parts(*base.grid(), values)
}

fn combine_signal(base: &Signal, bumps: &[Signal], coeffs: &[f64]) -> Result<Signal> {
    bumps.iter().zip(coeffs).try_fold(base.clone(), |acc, (b, &c)| acc.add(&b.scale(Complex64::new(c, 0.0))))
}

fn relative_sup(a: &TFField, b: &TFField) -> Result<f64> {
    let peak = b.norm(f64::INFINITY);
    Ok(a.sub(b)?.norm(f64::INFINITY) / peak)
}

fn moduli_diff(a: &TFField, b: &TFField) -> Result<TFField> {
    a.zip_with(b, |x, y| Complex64::new(x.norm() - y.norm(), 0.0))
}

/// Builds `f_eps = f + delta sum_n eps_n M_{a_n} f` and the sign-flipped
/// members `f_{eps,k}`, and measures their stability ratios.
///
/// The transforms of the members are assembled from frequency shifts of
/// `V f` and checked against direct transforms of the member signals.
pub fn stft_instability_family(f: &Signal, window: &WindowSpec, params: &FamilyParams) -> Result<InstabilityFamily> {
    let FamilyParams { s, p, r, q, s_closeness, epsilon, n_max, .. } = *params;
    if s_closeness <= s {
        return Err(Error::Precondition("closeness smoothness must exceed s".into()));
    }
    if !(epsilon > 0.0) || n_max == 0 {
        return Err(Error::Precondition("epsilon must be positive and n_max at least 1".into()));
    }
    let sgrid = *f.grid();
    let tf = TFGrid::for_signal(&sgrid, params.x_length, params.x_stride)?;
    let phi = window.signal(sgrid)?;
    let u = stft(f, &phi, &tf)?;
    let seed_halfwidth = onset_radius(&u).1;

    let half = 0.5 * tf.omega.length();
    let (radii, tails) = select_radii(|j| frequency_tail(&u, p, q, r, j), n_max, half)?;
    let outer = 2.0 * radii[n_max - 1] + GRID_MARGIN;
    if outer > half {
        return Err(Error::InfeasibleGrid(format!(
            "the modulation ladder needs a frequency window of length at least {} (have {}); use a finer signal grid",
            2.0 * outer,
            tf.omega.length()
        )));
    }
    let modulations: Vec<f64> = radii.iter().map(|j| 1.5 * j).collect();
    let scales: Vec<f64> =
        radii.iter().enumerate().map(|(i, &j)| 2f64.powi(-(i as i32 + 1)) * bracket(j).powf(-r)).collect();

    let bump_fields = modulations.iter().map(|&a| u.shift(0.0, a)).collect::<Result<Vec<_>>>()?;
    let bump_signals = modulations.iter().map(|&a| f.modulate(a)).collect::<Result<Vec<_>>>()?;

    let closeness_norm = Norm::intersection(Norm::Sobolev { s: s_closeness, p, r }, Norm::Lebesgue { q });
    let seed_norm = Norm::intersection(Norm::Sobolev { s: s_closeness, p, r: 2.0 * r }, Norm::Lebesgue { q }).eval(&u);
    let unit_perturbation = combine(&TFField::zeros(tf), &bump_fields, &scales);
    let unit_size = closeness_norm.eval(&unit_perturbation);
    let delta = (0.5 * epsilon / unit_size).min(0.5);
    let closeness = closeness_norm.eval(&unit_perturbation.scale(Complex64::new(delta, 0.0)));
    if closeness >= epsilon {
        return Err(Error::Precondition(format!("closeness target {epsilon} unreachable: achieved {closeness}")));
    }
    drop(unit_perturbation);

    let coeffs_eps: Vec<f64> = scales.iter().map(|c| delta * c).collect();
    let v_eps = combine(&u, &bump_fields, &coeffs_eps);
    let f_eps = combine_signal(f, &bump_signals, &coeffs_eps)?;
    let ansatz_residual = relative_sup(&stft(&f_eps, &phi, &tf)?, &v_eps)?;

    let denominator_norm = Norm::Sobolev { s, p, r };
    let numerator_norm = Norm::Lebesgue { q };
    let (lp_lo, lp_hi) = params.lp_range;
    let smooth_gap = s_closeness - s;
    let high_eps = Norm::Sobolev { s: s + smooth_gap, p, r: 0.0 }.eval(&v_eps.modulus());
    let mut members = Vec::with_capacity(n_max);
    let mut perturbed = Vec::with_capacity(n_max);
    let mut lp_rows = Vec::new();
    for k in 0..n_max {
        let coeffs: Vec<f64> = coeffs_eps.iter().enumerate().map(|(i, &c)| if i < k { c } else { -c }).collect();
        let v_k = combine(&u, &bump_fields, &coeffs);
        let f_k = combine_signal(f, &bump_signals, &coeffs)?;
        let residual = relative_sup(&stft(&f_k, &phi, &tf)?, &v_k)?;
        let numerator = phase_inf_distance(&v_eps, &v_k, &numerator_norm, None)?.distance;
        let diff = moduli_diff(&v_eps, &v_k)?;
        let denominator = denominator_norm.eval(&diff);
        let ratio = if denominator == 0.0 { f64::INFINITY } else { numerator / denominator };

        let onset = onset_radius(&v_eps.sub(&v_k)?).0;

        let lhs = Norm::Sobolev { s, p, r: 0.0 }.eval(&diff);
        let lp_norm_d = diff.norm(p);
        let high_k = Norm::Sobolev { s: s + smooth_gap, p, r: 0.0 }.eval(&v_k.modulus());
        for j in lp_lo..=lp_hi {
            // Precondition check only: the projection itself is not needed for the display.
            littlewood_paley(&diff, j, LpMode::Below)?;
            let low = 2f64.powf(j as f64 * s) * lp_norm_d;
            let high = 2f64.powf(-(j as f64) * smooth_gap) * (high_k + high_eps);
            lp_rows.push(LpReductionRow { k, j, lhs, low, high, constant: lhs / (low + high) });
        }
        members.push(FamilyMember {
            k,
            numerator,
            denominator,
            ratio,
            difference_onset: onset,
            ansatz_residual: residual,
        });
        perturbed.push(f_k);
    }

    Ok(InstabilityFamily {
        params: params.clone(),
        grid: tf,
        radii,
        modulations,
        scales,
        seed_halfwidth,
        tails,
        delta,
        seed_norm,
        closeness,
        ansatz_residual,
        members,
        lp_rows,
        f_eps,
        perturbed,
    })
}

/// `|V f_eps^{(n)}|` for `n = 0..=n_bumps`, where `f_eps^{(n)}` keeps only the
/// first `n` modulated copies `delta 2^{-m} M_{a_m} f` with the minimal
/// disjoint ladder `j_1 = 2`, `j_{m+1} = 2 j_m + 2`.
pub fn cheeger_trend_fields(
    f: &Signal,
    window: &WindowSpec,
    tf: &TFGrid,
    delta: f64,
    n_bumps: usize,
) -> Result<Vec<TFField>> {
    let phi = window.signal(*f.grid())?;
    let u = stft(f, &phi, tf)?;
    let mut radii = Vec::with_capacity(n_bumps);
    let mut j = 2.0;
    for _ in 0..n_bumps {
        radii.push(j);
        j = 2.0 * j + 2.0;
    }
    if let Some(last) = radii.last() {
        let outer = 2.0 * last + GRID_MARGIN;
        if outer > 0.5 * tf.omega.length() {
            return Err(Error::InfeasibleGrid(format!(
                "{n_bumps} bumps need a frequency window of length at least {}",
                2.0 * outer
            )));
        }
    }
    let bumps = radii.iter().map(|j| u.shift(0.0, 1.5 * j)).collect::<Result<Vec<_>>>()?;
    let coeffs: Vec<f64> = (1..=n_bumps).map(|m| delta * 2f64.powi(-(m as i32))).collect();
    Ok((0..=n_bumps).map(|n| combine(&u, &bumps[..n], &coeffs[..n]).modulus()).collect())
}
