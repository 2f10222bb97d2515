use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::TFField;
use crate::grid::{Grid1D, TFGrid};
use crate::norms::{modulus_sobolev_ratio, Norm, NormSpec};
use crate::parallel::par_map;
use crate::rng;
use crate::transforms::{stft, WindowSpec};

use super::{max_of, Assertion, Experiment, Table, Tables};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdParams {
    pub length: f64,
    pub count: usize,
    pub draws: usize,
    /// Pinned bound on the modulus ratio of smooth fields at `s = 1`.
    pub constant: f64,
    pub s_below: f64,
    pub s_above: f64,
    pub p: f64,
    pub r: f64,
    /// Nodal-line spacings of the rough family.
    pub spacings: Vec<f64>,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            length: 8.0,
            count: 256,
            draws: 100,
            constant: 1.0,
            s_below: 1.0,
            s_above: 1.6,
            p: 2.0,
            r: 0.0,
            spacings: vec![1.0, 0.5, 0.25],
        }
    }
}

/// `sin(pi x / e) e^{-pi |z|^2 / 4}` and rotated or crossed variants: the
/// modulus has a kink along every nodal line.
fn nodal_field(g: TFGrid, spacing: f64, kind: &str) -> Result<TFField> {
    let envelope = |x: f64, w: f64| (-0.25 * PI * (x * x + w * w)).exp();
    let wave = |t: f64| (PI * t / spacing).sin();
    TFField::from_fn(g, |x, w| {
        let v = match kind {
            "lines" => Complex64::new(wave(x), 0.0),
            "diagonal" => Complex64::new(wave((x + w) / 2f64.sqrt()), 0.0),
            "grid" => Complex64::new(wave(x) * wave(w), 0.0),
            _ => Complex64::new(wave(x), 0.0) * Complex64::cis(PI * w),
        };
        v * envelope(x, w)
    })
}

const NODAL_KINDS: [&str; 4] = ["lines", "diagonal", "grid", "phased"];

pub struct ModulusThreshold;

impl Experiment for ModulusThreshold {
    type Params = ThresholdParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let below = Norm::Sobolev { s: p.s_below, p: p.p, r: p.r };
        let above = Norm::Sobolev { s: p.s_above, p: p.p, r: p.r };
        let g = Grid1D::new(p.length, p.count)?;
        let tf = TFGrid::full(&g);
        let phi = WindowSpec::Gaussian.signal(g)?;
        let indices: Vec<usize> = (0..p.draws).collect();
        let draws = par_map(&indices, |&k| -> Result<(f64, f64)> {
            let f = rng::random_signal(
                g,
                &mut rng::stream(seed.wrapping_add(k as u64)),
                4,
                0.2 * g.length(),
                0.15 * g.nyquist(),
            )?;
            let v = stft(&f, &phi, &tf)?;
            Ok((modulus_sobolev_ratio(&v, &below)?, modulus_sobolev_ratio(&v, &above)?))
        });
        let mut smooth = Table::new("smooth", &["draw", "ratio_below", "ratio_above"]);
        for (k, d) in draws.into_iter().enumerate() {
            let (lo, hi) = d?;
            smooth.push(vec![k.into(), lo.into(), hi.into()]);
        }
        let mut nodal = Table::new("nodal", &["kind", "spacing", "ratio_below", "ratio_above"]);
        for kind in NODAL_KINDS {
            for &e in &p.spacings {
                let v = nodal_field(tf, e, kind)?;
                nodal.push(vec![
                    kind.into(),
                    e.into(),
                    modulus_sobolev_ratio(&v, &below)?.into(),
                    modulus_sobolev_ratio(&v, &above)?.into(),
                ]);
            }
        }
        let mut regime = Table::new("regime", &["s", "p", "below_threshold"]);
        for s in [p.s_below, p.s_above] {
            regime.push(vec![
                s.into(),
                p.p.into(),
                NormSpec::new(s, p.p, p.r, 2.0, 0.0)?.below_modulus_threshold().into(),
            ]);
        }
        Ok(vec![smooth, nodal, regime])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let smooth = t.get("smooth")?;
        let worst = max_of(&smooth.floats("ratio_below")?);
        let nodal = t.get("nodal")?;
        let rough = max_of(&nodal.floats("ratio_above")?);
        let rough_below = max_of(&nodal.floats("ratio_below")?);
        let regime = t.get("regime")?.bools("below_threshold")?;
        Ok(vec![
            Assertion::gate(
                "smooth_fields_below_constant",
                "norms.modulus_threshold",
                smooth.len() == p.draws && worst < p.constant,
                format!("max over {} draws {worst:e} < {:e}", smooth.len(), p.constant),
            ),
            Assertion::gate(
                "nodal_family_exceeds_constant_above_threshold",
                "norms.modulus_threshold",
                rough > p.constant,
                format!(
                    "s = {}: max {rough:e} > {:e}; same family at s = {}: {rough_below:e}",
                    p.s_above, p.constant, p.s_below
                ),
            ),
            Assertion::gate(
                "regime_flags",
                "norms.modulus_threshold",
                regime == [true, false],
                format!("below-threshold flags {regime:?}"),
            ),
        ])
    }
}
