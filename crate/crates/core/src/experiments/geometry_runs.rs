use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::TFField;
use crate::forge::cheeger_trend_fields;
use crate::geometry::{
    cheeger_estimate, gluing_bound, gluing_check, poincare_constant, stability_certificate, CheegerFamily, DomainMask,
    EXCISION_CELLS,
};
use crate::grid::{Grid1D, TFGrid};
use crate::rng;
use crate::signal::Signal;
use crate::transforms::{fock_polynomial_field, stft, FockField, WindowSpec};

use super::{at_least, at_most, max_of, Assertion, Experiment, Table, Tables};

fn gabor_modulus(f: &Signal, tf: &TFGrid) -> Result<TFField> {
    let phi = WindowSpec::Gaussian.signal(*f.grid())?;
    Ok(stft(f, &phi, tf)?.modulus())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheegerGaussianParams {
    pub length: f64,
    /// Coarse sample count; the refined run doubles it.
    pub count: usize,
    pub tolerance: f64,
}

impl Default for CheegerGaussianParams {
    fn default() -> Self {
        Self { length: 8.0, count: 64, tolerance: 0.1 }
    }
}

pub struct CheegerGaussian;

impl Experiment for CheegerGaussian {
    type Params = CheegerGaussianParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let mut t = Table::new(
            "cheeger",
            &["count", "nx", "nw", "value", "family", "level_best", "disk_best", "half_plane_best", "total_mass"],
        );
        let mut cands = Table::new("candidates", &["count", "family", "mass", "boundary", "ratio"]);
        for count in [p.count, 2 * p.count] {
            let g = Grid1D::new(p.length, count)?;
            let tf = TFGrid::for_signal(&g, p.length, 1)?;
            let w = gabor_modulus(&Signal::gaussian(g, 0.0, 0.0)?, &tf)?;
            let r = cheeger_estimate(&w, &CheegerFamily::ALL)?;
            let (nx, nw) = tf.shape();
            t.push(vec![
                count.into(),
                nx.into(),
                nw.into(),
                r.value.into(),
                r.family.tag().into(),
                r.family_best(CheegerFamily::Level).into(),
                r.family_best(CheegerFamily::Disk).into(),
                r.family_best(CheegerFamily::HalfPlane).into(),
                r.total_mass.into(),
            ]);
            for row in &r.table {
                cands.push(vec![
                    count.into(),
                    row.candidate.family().tag().into(),
                    row.mass.into(),
                    row.boundary.into(),
                    row.ratio.into(),
                ]);
            }
        }
        Ok(vec![t, cands])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let v = t.get("cheeger")?.floats("value")?;
        let change = (v[1] / v[0] - 1.0).abs();
        Ok(vec![
            Assertion::gate(
                "finite_and_positive",
                "geometry.cheeger_upper_bound",
                v.iter().all(|h| h.is_finite() && *h > 0.0),
                format!("{v:?}"),
            ),
            at_most("refinement_change", "geometry.cheeger_upper_bound", change, p.tolerance),
            Assertion::report(
                "half_plane_reference",
                "geometry.cheeger_upper_bound",
                (v[1] - SQRT_2).abs() <= 0.05 * SQRT_2,
                format!("{:e} against the axis cut value sqrt 2", v[1]),
            ),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheegerTrendParams {
    pub length: f64,
    pub count: usize,
    pub x_length: f64,
    pub x_stride: usize,
    pub delta: f64,
    pub bumps: usize,
    pub min_drop: f64,
}

impl Default for CheegerTrendParams {
    fn default() -> Self {
        Self { length: 8.0, count: 1024, x_length: 8.0, x_stride: 8, delta: 0.1, bumps: 4, min_drop: 4.0 }
    }
}

pub struct CheegerTrend;

impl Experiment for CheegerTrend {
    type Params = CheegerTrendParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let tf = TFGrid::for_signal(&g, p.x_length, p.x_stride)?;
        let f = Signal::gaussian(g, 0.0, 0.0)?;
        let fields = cheeger_trend_fields(&f, &WindowSpec::Gaussian, &tf, p.delta, p.bumps)?;
        let mut t = Table::new("trend", &["bumps", "value", "family", "total_mass"]);
        for (n, w) in fields.iter().enumerate() {
            let r = cheeger_estimate(w, &CheegerFamily::ALL)?;
            t.push(vec![n.into(), r.value.into(), r.family.tag().into(), r.total_mass.into()]);
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let v = t.get("trend")?.floats("value")?;
        let increases: Vec<usize> = (1..v.len()).filter(|&n| v[n] > v[n - 1]).collect();
        let drop = v[0] / v[v.len() - 1];
        Ok(vec![
            Assertion::gate(
                "non_increasing_in_bumps",
                "forge.cheeger_trend",
                increases.is_empty(),
                format!("{v:?}, increases at {increases:?}"),
            ),
            at_least("drop_first_to_last", "forge.cheeger_trend", drop, p.min_drop),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GluingParams {
    pub length: f64,
    pub count: usize,
    pub weight_exponent: f64,
    pub perturbation: f64,
}

impl Default for GluingParams {
    fn default() -> Self {
        Self { length: 16.0, count: 256, weight_exponent: 1.0, perturbation: 0.05 }
    }
}

fn gluing_signal(g: Grid1D, name: &str, seed: u64) -> Result<Signal> {
    match name {
        "gaussian" => Signal::gaussian(g, 0.0, 0.0),
        "hermite1" => Signal::hermite(g, 1),
        "hermite2" => Signal::hermite(g, 2),
        "two_bumps" => Signal::gaussian(g, -1.2, 0.0)?.add(&Signal::gaussian(g, 1.2, 0.0)?),
        _ => rng::random_signal(g, &mut rng::stream(seed), 3, 1.0, 1.0),
    }
}

/// Competitors: small time-frequency atoms added to `f`, a global phase, a
/// sign flip of the right half-line and a random perturbation.
fn adversaries(f: &Signal, eps: f64, seed: u64) -> Result<Vec<(String, Signal)>> {
    let g = *f.grid();
    let mut out = Vec::new();
    for (u, eta) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, -1.0)] {
        let atom = Signal::gaussian(g, u, eta)?.scale(Complex64::new(eps, 0.0));
        out.push((format!("atom({u},{eta})"), f.add(&atom)?));
    }
    out.push(("global_phase".into(), f.scale(Complex64::cis(0.9))));
    let flip = Signal::from_fn(g, |x| Complex64::new(if x > 0.0 { -1.0 } else { 1.0 }, 0.0))?;
    out.push(("flip_right".into(), f.zip_with(&flip, |a, b| a * b)?));
    let noise = rng::random_signal(g, &mut rng::stream(seed ^ 0x5eed), 3, 1.5, 1.5)?;
    let scale = eps * f.norm(2.0) / noise.norm(2.0);
    out.push(("random".into(), f.add(&noise.scale(Complex64::new(scale, 0.0)))?));
    Ok(out)
}

pub struct ConnectivityGluing;

impl Experiment for ConnectivityGluing {
    type Params = GluingParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let tf = TFGrid::full(&g);
        let phi = WindowSpec::Gaussian.signal(g)?;
        let mut triples = Table::new(
            "triples",
            &["fixture", "domain", "split_angle", "overlap", "lambda", "c_a", "c_b", "c_omega", "bound", "holds"],
        );
        let mut rows = Table::new(
            "adversaries",
            &[
                "fixture",
                "split_angle",
                "label",
                "ratio_a",
                "ratio_b",
                "ratio_omega",
                "distance_omega",
                "measurement_omega",
            ],
        );
        let names = ["gaussian", "hermite1", "hermite2", "two_bumps", "random"];
        let splits = [(0.0, 0.5), (0.25 * PI, 1.0)];
        for (k, name) in names.iter().enumerate() {
            let fs = gluing_signal(g, name, seed.wrapping_add(k as u64))?;
            let f = stft(&fs, &phi, &tf)?;
            let competitors = adversaries(&fs, p.perturbation, seed.wrapping_add(k as u64))?
                .into_iter()
                .map(|(label, s)| Ok((label, stft(&s, &phi, &tf)?)))
                .collect::<Result<Vec<_>>>()?;
            for (s, &(theta, overlap)) in splits.iter().enumerate() {
                let (domain, omega) = if s == 0 {
                    ("disk3", DomainMask::disk(tf, (0.0, 0.0), 3.0))
                } else {
                    ("box3x2", DomainMask::from_fn(tf, |x, w| x.abs() <= 3.0 && w.abs() <= 2.0))
                };
                let half = 0.5 * overlap;
                let a = omega.intersection(&DomainMask::half_plane(tf, theta, -half))?;
                let b = omega.intersection(&DomainMask::half_plane(tf, theta + PI, -half))?;
                let check = gluing_check(&f, &competitors, &omega, &a, &b, p.weight_exponent)?;
                triples.push(vec![
                    (*name).into(),
                    domain.into(),
                    theta.into(),
                    overlap.into(),
                    check.lambda.into(),
                    check.c_a.into(),
                    check.c_b.into(),
                    check.c_omega.into(),
                    check.bound.into(),
                    check.holds.into(),
                ]);
                for r in &check.rows {
                    rows.push(vec![
                        (*name).into(),
                        theta.into(),
                        r.label.clone().into(),
                        r.ratio[0].into(),
                        r.ratio[1].into(),
                        r.ratio[2].into(),
                        r.distance[2].into(),
                        r.measurement[2].into(),
                    ]);
                }
            }
        }
        let mut arith = Table::new("arithmetic", &["c_a", "c_b", "lambda", "value", "expected"]);
        for (ca, cb, l, want) in
            [(1.0, 1.0, 0.5, SQRT_2 * (2.0 + SQRT_2)), (0.0, 0.0, 0.3, 0.0), (3.0, 4.0, 0.25, 5.0 * (4.0 + SQRT_2))]
        {
            arith.push(vec![ca.into(), cb.into(), l.into(), gluing_bound(ca, cb, l)?.into(), want.into()]);
        }
        Ok(vec![triples, rows, arith])
    }

    fn check(_p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let tr = t.get("triples")?;
        let holds = tr.bools("holds")?;
        let lambda = tr.floats("lambda")?;
        let c_omega = tr.floats("c_omega")?;
        let bound = tr.floats("bound")?;
        // Recomputed from the stored constants rather than trusting the flag.
        let c_a = tr.floats("c_a")?;
        let c_b = tr.floats("c_b")?;
        let mut recomputed = true;
        for i in 0..holds.len() {
            let b = gluing_bound(c_a[i], c_b[i], lambda[i])?;
            recomputed &= b == bound[i] && (c_omega[i] <= b * (1.0 + 1e-6)) == holds[i];
        }
        let ar = t.get("arithmetic")?;
        let exact = ar.floats("value")? == ar.floats("expected")?;
        let worst = (0..holds.len()).map(|i| c_omega[i] / bound[i]).fold(0.0, f64::max);
        Ok(vec![
            Assertion::gate(
                "gluing_bound_holds",
                "geometry.gluing_soundness",
                holds.len() == 10 && holds.iter().all(|&h| h) && recomputed,
                format!("{} triples, worst c_omega / bound = {worst:e}", holds.len()),
            ),
            Assertion::gate(
                "connectivity_in_range",
                "geometry.connectivity_range",
                lambda.iter().all(|&l| l > 0.0 && l <= 0.5),
                format!(
                    "lambda in [{:e}, {:e}]",
                    lambda.iter().cloned().fold(f64::INFINITY, f64::min),
                    max_of(&lambda)
                ),
            ),
            Assertion::gate("arithmetic_exact", "geometry.gluing_bound", exact, "three closed-form cases".into()),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareParams {
    pub count: usize,
    pub tolerance: f64,
    pub neck_widths: Vec<f64>,
    pub dilation_tolerance: f64,
}

impl Default for PoincareParams {
    fn default() -> Self {
        Self { count: 128, tolerance: 0.02, neck_widths: vec![1.0, 0.6, 0.4, 0.2], dilation_tolerance: 0.05 }
    }
}

fn dumbbell(g: TFGrid, neck: f64) -> DomainMask {
    DomainMask::from_fn(g, |x, w| {
        (x - 1.75).hypot(w) <= 1.0 || (x + 1.75).hypot(w) <= 1.0 || (x.abs() <= 1.75 && w.abs() <= 0.5 * neck)
    })
}

pub struct PoincareSquare;

impl Experiment for PoincareSquare {
    type Params = PoincareParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let mut cases = Table::new("cases", &["case", "nodes", "mu1", "constant", "connected", "status"]);
        let square = TFGrid::square(1.0, p.count)?;
        let one = |g: TFGrid| TFField::from_fn(g, |_, _| Complex64::new(1.0, 0.0));
        let mut push = |name: &str, omega: &DomainMask, w: &TFField| -> Result<f64> {
            let r = poincare_constant(omega, w, false)?;
            cases.push(vec![
                name.into(),
                r.nodes.into(),
                r.mu1.into(),
                r.constant.into(),
                r.connected.into(),
                r.status.clone().into(),
            ]);
            Ok(r.constant)
        };
        push("unit_square", &DomainMask::full(square), &one(square)?)?;
        let split = DomainMask::from_fn(square, |x, _| x.abs() > 0.1);
        push("split_square", &split, &one(square)?)?;
        for (label, length, radius) in [("disk_r1", 4.0, 1.0), ("disk_r2", 8.0, 2.0)] {
            let g = TFGrid::square(length, p.count)?;
            push(label, &DomainMask::disk(g, (0.0, 0.0), radius), &one(g)?)?;
        }
        let mut neck = Table::new("neck", &["width", "poincare", "cheeger"]);
        let g = TFGrid::square(6.0, p.count)?;
        for &width in &p.neck_widths {
            let omega = dumbbell(g, width);
            let c = poincare_constant(&omega, &one(g)?, false)?.constant;
            let ones: Vec<f64> = omega.inside().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let indicator = TFField::from_real(g, &ones)?;
            let h = cheeger_estimate(&indicator, &CheegerFamily::ALL)?.value;
            neck.push(vec![width.into(), c.into(), h.into()]);
        }
        Ok(vec![cases, neck])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let c = t.get("cases")?;
        let mu = c.floats("mu1")?;
        let constant = c.floats("constant")?;
        let err = (mu[0] / (PI * PI) - 1.0).abs();
        let scale = constant[3] / constant[2];
        let n = t.get("neck")?;
        let cp = n.floats("poincare")?;
        let h = n.floats("cheeger")?;
        let cp_up = cp.windows(2).all(|w| w[1] > w[0]);
        let h_down = h.windows(2).all(|w| w[1] < w[0]);
        Ok(vec![
            at_most("unit_square_eigenvalue", "geometry.poincare_square", err, p.tolerance),
            Assertion::gate(
                "disconnected_is_infinite",
                "geometry.poincare_disconnected",
                constant[1].is_infinite(),
                format!("C = {:e}", constant[1]),
            ),
            at_most("dilation_scaling", "geometry.poincare_dilation", (scale / 2.0 - 1.0).abs(), p.dilation_tolerance),
            Assertion::gate("neck_monotone", "geometry.poincare_neck", cp_up, format!("C_poinc {cp:?}")),
            Assertion::gate(
                "cheeger_poincare_coupling",
                "geometry.cheeger_poincare_coupling",
                cp_up == h_down,
                format!("h {h:?}"),
            ),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateParams {
    pub length: f64,
    pub count: usize,
    pub fixtures: usize,
    pub domain_radius: f64,
    pub root_radius: f64,
    pub perturbations: Vec<f64>,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self {
            length: 12.0,
            count: 192,
            fixtures: 20,
            domain_radius: 2.0,
            root_radius: 1.0,
            perturbations: vec![0.01, 0.05],
        }
    }
}

pub struct CertificatePolynomial;

impl Experiment for CertificatePolynomial {
    type Params = CertificateParams;

    fn tables(p: &Self::Params, seed: u64) -> Result<Vec<Table>> {
        let g = TFGrid::square(p.length, p.count)?;
        let omega = DomainMask::disk(g, (0.0, 0.0), p.domain_radius);
        let mut r = rng::stream(seed);
        let root = |r: &mut SplitMix64| {
            Complex64::from_polar(p.root_radius * r.random::<f64>().sqrt(), 2.0 * PI * r.random::<f64>())
        };
        let mut t = Table::new(
            "certificates",
            &[
                "fixture",
                "degree",
                "epsilon",
                "modulus_term",
                "gradient_term",
                "log_gradient_term",
                "poincare",
                "bound",
                "distance",
                "sound",
                "zeros",
                "excised_fraction",
                "nodes",
                "dropped",
            ],
        );
        for k in 0..p.fixtures {
            let degree = k % 4;
            let roots: Vec<Complex64> = (0..degree).map(|_| root(&mut r)).collect();
            let extra: Vec<Complex64> = (0..degree + 1).map(|_| root(&mut r)).collect();
            let eps = p.perturbations[k % p.perturbations.len()];
            let phase = Complex64::cis(2.0 * PI * r.random::<f64>());
            let (f1, _) = fock_polynomial_field(&roots, g)?;
            let (q, _) = fock_polynomial_field(&extra, g)?;
            let f2 = FockField {
                field: f1.field.zip_with(&q.field, |a, b| phase * (a + eps * b))?,
                valid: f1.valid.clone(),
            };
            let c = stability_certificate(&f1, &f2, &omega, 2.0, EXCISION_CELLS)?;
            t.push(vec![
                k.into(),
                degree.into(),
                eps.into(),
                c.modulus_term.into(),
                c.gradient_term.into(),
                c.log_gradient_term.into(),
                c.poincare.into(),
                c.bound.into(),
                c.distance.into(),
                c.sound.into(),
                c.zeros.len().into(),
                c.excised_fraction.into(),
                c.nodes.into(),
                c.dropped.into(),
            ]);
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let c = t.get("certificates")?;
        let bound = c.floats("bound")?;
        let distance = c.floats("distance")?;
        let degree = c.floats("degree")?;
        let t3 = c.floats("log_gradient_term")?;
        let unsound: Vec<usize> = (0..bound.len()).filter(|&i| !(bound[i] >= distance[i])).collect();
        let constant_t3: Vec<f64> = (0..degree.len()).filter(|&i| degree[i] == 0.0).map(|i| t3[i]).collect();
        let worst = (0..bound.len()).map(|i| distance[i] / bound[i]).fold(0.0, f64::max);
        Ok(vec![
            Assertion::gate(
                "bound_dominates_distance",
                "geometry.certificate_soundness",
                bound.len() == p.fixtures && unsound.is_empty(),
                format!("{} fixtures, worst distance / bound = {worst:e}, failing {unsound:?}", bound.len()),
            ),
            Assertion::gate(
                "constant_has_no_log_term",
                "geometry.certificate_constant",
                !constant_t3.is_empty() && constant_t3.iter().all(|&v| v == 0.0),
                format!("{} constant fixtures, terms {constant_t3:?}", constant_t3.len()),
            ),
        ])
    }
}
