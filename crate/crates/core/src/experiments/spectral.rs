use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid1D, TFGrid};
use crate::norms::{phase_inf_distance, Norm};
use crate::rng;
use crate::signal::Signal;
use crate::transforms::{
    add_measurement_noise, ambiguity, ambiguity_relation_residual, covariance_residual, phaseless, recover, stft,
    window_comparison_ratio, WindowSpec,
};

use super::{at_most, max_of, Assertion, Experiment, Table, Tables};

fn fixture(grid: Grid1D, name: &str, seed: u64) -> Result<Signal> {
    match name {
        "gaussian" => Signal::gaussian(grid, 0.0, 0.0),
        n if n.starts_with("hermite") => Signal::hermite(grid, n[7..].parse().unwrap_or(0)),
        _ => rng::random_signal(grid, &mut rng::stream(seed), 4, 0.2 * grid.length(), 0.15 * grid.nyquist()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsometryParams {
    pub length: f64,
    pub count: usize,
    pub fixtures: usize,
    pub tol: f64,
}

impl Default for IsometryParams {
    fn default() -> Self {
        Self { length: 32.0, count: 512, fixtures: 20, tol: 1e-4 }
    }
}

pub struct IsometrySweep;

impl Experiment for IsometrySweep {
    type Params = IsometryParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let tf = TFGrid::full(&g);
        let mut t = Table::new("isometry", &["fixture", "window", "norm_f", "norm_window", "norm_v", "deviation"]);
        for k in 0..p.fixtures {
            // Four Hermite functions, the rest random; windows alternate.
            let name = if k < 4 { format!("hermite{k}") } else { format!("random{k}") };
            let f = fixture(g, &name, seed.wrapping_add(k as u64))?;
            let spec = if k % 2 == 0 { WindowSpec::Gaussian } else { WindowSpec::Hermite { n: 1 } };
            let phi = spec.signal(g)?;
            let v = stft(&f, &phi, &tf)?;
            let (nf, np, nv) = (f.norm(2.0), phi.norm(2.0), v.norm(2.0));
            t.push(vec![
                name.into(),
                spec.label().into(),
                nf.into(),
                np.into(),
                nv.into(),
                (nv / (nf * np) - 1.0).abs().into(),
            ]);
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let dev = t.get("isometry")?.floats("deviation")?;
        Ok(vec![at_most("max_isometry_deviation", "transforms.isometry", max_of(&dev), p.tol)])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceParams {
    pub length: f64,
    pub count: usize,
    /// Lattice steps; each must be on the respective grid.
    pub time_step: f64,
    pub frequency_step: f64,
    pub tol: f64,
}

impl Default for CovarianceParams {
    fn default() -> Self {
        Self { length: 32.0, count: 512, time_step: 1.0, frequency_step: 0.125, tol: 1e-8 }
    }
}

pub struct CovarianceLattice;

impl Experiment for CovarianceLattice {
    type Params = CovarianceParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let f = fixture(g, "random", seed)?;
        let mut t = Table::new("covariance", &["window", "u", "eta", "residual"]);
        for spec in [WindowSpec::Gaussian, WindowSpec::Hermite { n: 2 }] {
            let phi = spec.signal(g)?;
            for a in -2i32..=2 {
                for b in -2i32..=2 {
                    let (u, eta) = (a as f64 * p.time_step, b as f64 * p.frequency_step);
                    let r = covariance_residual(&f, &phi, u, eta)?;
                    t.push(vec![spec.label().into(), u.into(), eta.into(), r.into()]);
                }
            }
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let r = t.get("covariance")?.floats("residual")?;
        Ok(vec![at_most("max_covariance_residual", "transforms.covariance", max_of(&r), p.tol)])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmbiguityParams {
    pub length: f64,
    pub count: usize,
    pub tol: f64,
}

impl Default for AmbiguityParams {
    fn default() -> Self {
        Self { length: 16.0, count: 256, tol: 1e-3 }
    }
}

pub struct AmbiguityRelation;

impl Experiment for AmbiguityRelation {
    type Params = AmbiguityParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let mut t = Table::new("ambiguity", &["fixture", "window", "residual"]);
        for name in ["gaussian", "hermite1", "hermite2", "hermite3", "hermite4", "random"] {
            let f = fixture(g, name, seed)?;
            for spec in [WindowSpec::Gaussian, WindowSpec::Hermite { n: 1 }] {
                let r = ambiguity_relation_residual(&f, &spec.signal(g)?)?;
                t.push(vec![name.into(), spec.label().into(), r.into()]);
            }
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let r = t.get("ambiguity")?.floats("residual")?;
        Ok(vec![at_most("max_relative_residual", "transforms.ambiguity_relation", max_of(&r), p.tol)])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverParams {
    pub length: f64,
    pub count: usize,
    /// Threshold relative to `|A phi(0, 0)|`.
    pub tau_relative: f64,
    /// Signal-to-noise ratio in dB; ignored by the noiseless run.
    pub snr_db: f64,
    pub tol: f64,
}

fn recovery_table(p: &RecoverParams, seed: u64, noisy: bool) -> Result<Table> {
    let g = Grid1D::new(p.length, p.count)?;
    let tf = TFGrid::full(&g);
    let phi = WindowSpec::Gaussian.signal(g)?;
    let a0 = ambiguity(&phi)?.get(g.origin(), g.origin()).norm();
    let tau = p.tau_relative * a0;
    let mut t = Table::new("recovery", &["fixture", "tau", "masked_fraction", "relative_error"]);
    for (k, name) in ["gaussian", "hermite1", "hermite2"].into_iter().enumerate() {
        let f = fixture(g, name, seed)?;
        let mut meas = phaseless(&f, &phi, &tf)?;
        if noisy {
            meas = add_measurement_noise(&meas, p.snr_db, &mut rng::stream(seed.wrapping_add(k as u64)));
        }
        let rec = recover(&meas, &phi, tau)?;
        let d = phase_inf_distance(&rec.signal, &f, &Norm::l2(), None)?.distance / f.norm(2.0);
        t.push(vec![name.into(), tau.into(), rec.report.masked_fraction.into(), d.into()]);
    }
    Ok(t)
}

pub struct RecoverNoiseless;

impl Experiment for RecoverNoiseless {
    type Params = RecoverParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        Ok(vec![recovery_table(p, seed, false)?])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let e = t.get("recovery")?.floats("relative_error")?;
        Ok(vec![at_most("max_relative_error", "transforms.recover_roundtrip", max_of(&e), p.tol)])
    }
}

impl Default for RecoverParams {
    fn default() -> Self {
        Self { length: 16.0, count: 256, tau_relative: 1e-6, snr_db: 30.0, tol: 1e-2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoisyParams {
    pub length: f64,
    pub count: usize,
    pub tau_relative: f64,
    pub snr_db: f64,
    pub tol: f64,
    /// Extra relative thresholds reported alongside `tau_relative`.
    pub tau_sweep: Vec<f64>,
}

impl Default for NoisyParams {
    fn default() -> Self {
        let base = RecoverParams::default();
        Self {
            length: base.length,
            count: base.count,
            tau_relative: base.tau_relative,
            snr_db: base.snr_db,
            tol: 1e-1,
            tau_sweep: vec![1e-4, 1e-3, 1e-2, 1e-1, 3e-1],
        }
    }
}

pub struct RecoverNoisy;

impl Experiment for RecoverNoisy {
    type Params = NoisyParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let base = RecoverParams {
            length: p.length,
            count: p.count,
            tau_relative: p.tau_relative,
            snr_db: p.snr_db,
            tol: p.tol,
        };
        let mut sweep = Table::new("tau_sweep", &["tau_relative", "fixture", "masked_fraction", "relative_error"]);
        for &rel in &p.tau_sweep {
            let t = recovery_table(&RecoverParams { tau_relative: rel, ..base.clone() }, seed, true)?;
            let (names, masked, errors) =
                (t.text("fixture")?, t.floats("masked_fraction")?, t.floats("relative_error")?);
            for i in 0..names.len() {
                sweep.push(vec![rel.into(), names[i].into(), masked[i].into(), errors[i].into()]);
            }
        }
        Ok(vec![recovery_table(&base, seed, true)?, sweep])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let e = max_of(&t.get("recovery")?.floats("relative_error")?);
        // The ambiguity division is unstable under noise; this is reported, not gated.
        let mut out = vec![Assertion::report(
            "max_relative_error_noisy",
            "transforms.recover_roundtrip",
            e <= p.tol,
            format!("{e:e} <= {:e} at {} dB", p.tol, p.snr_db),
        )];
        let sweep = t.get("tau_sweep")?;
        let (rel, err) = (sweep.floats("tau_relative")?, sweep.floats("relative_error")?);
        let best = p
            .tau_sweep
            .iter()
            .map(|&r| (r, (0..rel.len()).filter(|&i| rel[i] == r).map(|i| err[i]).fold(0.0, f64::max)))
            .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        out.push(Assertion::report(
            "best_threshold_in_sweep",
            "transforms.recover_roundtrip",
            best.1 <= p.tol,
            format!("max error {:e} at tau_relative {:e}", best.1, best.0),
        ));
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowRatioParams {
    pub length: f64,
    pub count: usize,
}

impl Default for WindowRatioParams {
    fn default() -> Self {
        Self { length: 16.0, count: 256 }
    }
}

pub struct WindowRatioRun;

impl Experiment for WindowRatioRun {
    type Params = WindowRatioParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let tf = TFGrid::full(&g);
        let (x0, w0) = (tf.x.point(0), tf.omega.point(0));
        let corner = (1.0 + x0 * x0 + w0 * w0).sqrt();
        let mut t = Table::new(
            "window_ratio",
            &["phi", "big_phi", "sup", "corner_bracket", "origin_value", "zero_locus_points", "max_locus_radius_error"],
        );
        let pairs = [
            (WindowSpec::Gaussian, WindowSpec::Gaussian),
            (WindowSpec::Gaussian, WindowSpec::Hermite { n: 1 }),
            (WindowSpec::Hermite { n: 1 }, WindowSpec::Gaussian),
        ];
        for (phi, big) in pairs {
            let r = window_comparison_ratio(&phi, &big, g)?;
            let o = r.field.get(g.origin(), g.origin()).re;
            // A Phi for Hermite 1 vanishes on the circle pi r^2 = 1.
            let radius = (1.0 / std::f64::consts::PI).sqrt();
            let err = r.zero_locus.iter().map(|(x, w)| (x.hypot(*w) - radius).abs()).fold(0.0, f64::max);
            t.push(vec![
                phi.label().into(),
                big.label().into(),
                r.sup.into(),
                corner.into(),
                o.into(),
                r.zero_locus.len().into(),
                err.into(),
            ]);
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let t = t.get("window_ratio")?;
        let sup = t.floats("sup")?;
        let corner = t.floats("corner_bracket")?;
        let origin = t.floats("origin_value")?;
        let locus = t.floats("zero_locus_points")?;
        let err = t.floats("max_locus_radius_error")?;
        let cell = 2.0 * (p.length / p.count as f64).max(1.0 / p.length);
        Ok(vec![
            Assertion::gate(
                "identical_windows_sup_at_corner",
                "transforms.window_ratio",
                (sup[0] - corner[0]).abs() <= 1e-12 * corner[0] && locus[0] == 0.0,
                format!("sup {:e}, corner {:e}, {} zero points", sup[0], corner[0], locus[0]),
            ),
            Assertion::gate(
                "hermite_denominator_vanishes_on_circle",
                "transforms.window_ratio",
                sup[1].is_infinite() && locus[1] > 0.0 && err[1] <= cell,
                format!("sup {:e}, {} zero points, radius error {:e} <= {cell:e}", sup[1], locus[1], err[1]),
            ),
            Assertion::gate(
                "finite_at_origin",
                "transforms.window_ratio",
                origin.iter().all(|v| v.is_finite()),
                format!("origin values {origin:?}"),
            ),
        ])
    }
}
