use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forge::{
    assemble_pair, build_bumps, instability_ratio, lower_bound_sweep, select_annulus_schedule, stft_instability_family,
    FamilyParams, InstabilityFamily,
};
use crate::grid::Grid1D;
use crate::norms::{disjointness_witness, Norm};
use crate::signal::Signal;
use crate::transforms::WindowSpec;

use super::{at_least, at_most, max_of, Assertion, Experiment, Table, Tables};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderParams {
    pub length: f64,
    pub count: usize,
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub n_max: usize,
    /// Inclusive range of `n` on which the blow-up is asserted.
    pub window: (usize, usize),
    pub min_growth: f64,
    pub sweep_points: usize,
}

impl Default for LadderParams {
    fn default() -> Self {
        Self {
            length: 512.0,
            count: 4096,
            delta: 0.1,
            p: 2.0,
            q: 2.0,
            sigma: 0.0,
            n_max: 5,
            window: (2, 4),
            min_growth: 1.8,
            sweep_points: 64,
        }
    }
}

pub struct GaussianRatio;

impl Experiment for GaussianRatio {
    type Params = LadderParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let h = Signal::gaussian(g, 0.0, 0.0)?;
        let schedule = select_annulus_schedule(&h, p.sigma, p.p, p.q, p.n_max)?;
        let bumps = build_bumps(&schedule)?;
        let num = Norm::Lebesgue { q: p.q };
        let den = Norm::Weighted { p: p.p, r: p.sigma };
        let mut ratios =
            Table::new("ratio", &["n", "split_radius", "split_scale", "numerator", "denominator", "ratio", "target"]);
        let mut sweep = Table::new("dichotomy", &["n", "angle", "far_from_one", "lhs", "bound"]);
        for n in 0..p.n_max {
            let pair = assemble_pair(&schedule, &bumps, p.delta, n)?;
            let r = instability_ratio(&pair, &num, &den)?;
            ratios.push(vec![
                n.into(),
                schedule.radius(n + 1).into(),
                schedule.scale(n + 1).into(),
                r.numerator.into(),
                r.denominator.into(),
                r.ratio.into(),
                2f64.powi(n as i32).into(),
            ]);
            for row in lower_bound_sweep(&schedule, &bumps, &pair, p.sweep_points)? {
                sweep.push(vec![n.into(), row.angle.into(), row.far_from_one.into(), row.lhs.into(), row.bound.into()]);
            }
        }
        Ok(vec![ratios, sweep])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let table = t.get("ratio")?;
        let n = table.floats("n")?;
        let ratio = table.floats("ratio")?;
        let target = table.floats("target")?;
        let (lo, hi) = p.window;
        let in_window: Vec<usize> = (0..n.len()).filter(|&i| (lo..=hi).contains(&(n[i] as usize))).collect();
        let mut out = Vec::new();
        let below: Vec<String> =
            in_window.iter().filter(|&&i| !(ratio[i] >= target[i])).map(|&i| format!("n={}", n[i])).collect();
        out.push(Assertion::gate(
            "ratio_exceeds_two_to_n",
            "forge.ratio_divergence",
            !in_window.is_empty() && below.is_empty(),
            format!("window {lo}..={hi}: {} rows, failing {below:?}", in_window.len()),
        ));
        let mut worst = f64::INFINITY;
        for w in in_window.windows(2) {
            let g = ratio[w[1]] / ratio[w[0]];
            // An unbounded ratio after a finite one counts as growth.
            let g = if g.is_nan() { f64::INFINITY } else { g };
            worst = worst.min(g);
        }
        out.push(at_least("min_growth_factor", "forge.ratio_divergence", worst, p.min_growth));
        let sweep = t.get("dichotomy")?;
        let far = sweep.bools("far_from_one")?;
        let lhs = sweep.floats("lhs")?;
        let bound = sweep.floats("bound")?;
        let far_ok = (0..far.len()).filter(|&i| far[i]).all(|i| bound[i] > 0.0 && lhs[i] >= bound[i]);
        out.push(Assertion::gate(
            "far_branch_lower_bound",
            "forge.dichotomy",
            far_ok,
            format!("{} far rows checked", far.iter().filter(|&&f| f).count()),
        ));
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    pub length: f64,
    pub count: usize,
    pub p: f64,
    pub q: f64,
    pub sigmas: Vec<f64>,
    pub n_max: usize,
    pub gub_tol: f64,
    pub mcb_tol: f64,
    pub max_constant: f64,
    pub max_slope: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            length: 512.0,
            count: 4096,
            p: 2.0,
            q: 2.0,
            sigmas: vec![0.0, 1.0],
            n_max: 5,
            gub_tol: 1e-10,
            mcb_tol: 1e-12,
            max_constant: 8.0,
            max_slope: -3.5,
        }
    }
}

pub struct BumpBounds;

impl Experiment for BumpBounds {
    type Params = BoundParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let g = Grid1D::new(p.length, p.count)?;
        let h = Signal::gaussian(g, 0.0, 0.0)?;
        let mut rows = Table::new(
            "bounds",
            &[
                "sigma",
                "n",
                "radius",
                "scale",
                "gub_lp",
                "gub_lq",
                "gub_x",
                "mcb",
                "mtb",
                "mtb_constant",
                "sob",
                "sob_constant",
            ],
        );
        let mut slopes = Table::new("slopes", &["sigma", "quantity", "step", "log2_ratio"]);
        for &sigma in &p.sigmas {
            let schedule = select_annulus_schedule(&h, sigma, p.p, p.q, p.n_max)?;
            let bumps = build_bumps(&schedule)?;
            let report = crate::forge::verify_lemma_bounds(&schedule, &bumps);
            for r in &report.rows {
                rows.push(vec![
                    sigma.into(),
                    r.n.into(),
                    r.radius.into(),
                    r.scale.into(),
                    r.gub_lp.into(),
                    r.gub_lq.into(),
                    r.gub_x.into(),
                    r.mcb.into(),
                    r.mtb.into(),
                    r.mtb_constant.into(),
                    r.sob.into(),
                    r.sob_constant.into(),
                ]);
            }
            for (k, s) in report.mtb_slopes.iter().enumerate() {
                slopes.push(vec![sigma.into(), "mtb".into(), k.into(), (*s).into()]);
            }
            for (k, s) in report.sob_slopes.iter().enumerate() {
                slopes.push(vec![sigma.into(), "sob".into(), k.into(), (*s).into()]);
            }
        }
        Ok(vec![rows, slopes])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let b = t.get("bounds")?;
        let dev =
            b.floats("gub_lp")?.into_iter().chain(b.floats("gub_lq")?).map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        let mcb = b.floats("mcb")?.into_iter().fold(f64::INFINITY, f64::min);
        let constant = max_of(&b.floats("mtb_constant")?).max(max_of(&b.floats("sob_constant")?));
        let slope = max_of(&t.get("slopes")?.floats("log2_ratio")?);
        Ok(vec![
            at_most("global_upper_bound_deviation", "forge.lemma_bounds", dev, p.gub_tol),
            at_least("mass_concentration_min", "forge.lemma_bounds", mcb, 1.0 - p.mcb_tol),
            at_most("implicit_constant_max", "forge.lemma_bounds", constant, p.max_constant),
            at_most("decay_slope_max", "forge.lemma_bounds", slope, p.max_slope),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyRunParams {
    pub length: f64,
    pub count: usize,
    pub seed_width: f64,
    pub family: FamilyParams,
    /// Pinned constant of the Littlewood-Paley display.
    pub lp_constant: f64,
}

impl Default for FamilyRunParams {
    fn default() -> Self {
        Self { length: 16.0, count: 2048, seed_width: 0.75, family: FamilyParams::default(), lp_constant: 1.0 }
    }
}

fn build_family(p: &FamilyRunParams) -> Result<InstabilityFamily> {
    let g = Grid1D::new(p.length, p.count)?;
    let f = Signal::sech(g, p.seed_width)?;
    stft_instability_family(&f, &WindowSpec::Gaussian, &p.family)
}

fn family_table(fam: &InstabilityFamily) -> Table {
    let mut t =
        Table::new("family", &["delta", "closeness", "epsilon", "seed_norm", "seed_halfwidth", "ansatz_residual"]);
    t.push(vec![
        fam.delta.into(),
        fam.closeness.into(),
        fam.params.epsilon.into(),
        fam.seed_norm.into(),
        fam.seed_halfwidth.into(),
        fam.ansatz_residual.into(),
    ]);
    t
}

pub struct SobolevRatio;

impl Experiment for SobolevRatio {
    type Params = FamilyRunParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let fam = build_family(p)?;
        let mut m = Table::new(
            "members",
            &[
                "k",
                "radius",
                "modulation",
                "numerator",
                "denominator",
                "ratio",
                "target",
                "difference_onset",
                "ansatz_residual",
            ],
        );
        for mem in &fam.members {
            m.push(vec![
                mem.k.into(),
                fam.radii[mem.k].into(),
                fam.modulations[mem.k].into(),
                mem.numerator.into(),
                mem.denominator.into(),
                mem.ratio.into(),
                2f64.powi(mem.k as i32).into(),
                mem.difference_onset.into(),
                mem.ansatz_residual.into(),
            ]);
        }
        Ok(vec![m, family_table(&fam)])
    }

    fn check(_p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let m = t.get("members")?;
        let ratio = m.floats("ratio")?;
        let target = m.floats("target")?;
        let onset = m.floats("difference_onset")?;
        let modulation = m.floats("modulation")?;
        let fam = t.get("family")?;
        let halfwidth = fam.floats("seed_halfwidth")?[0];
        let closeness = fam.floats("closeness")?[0];
        let epsilon = fam.floats("epsilon")?[0];
        let failing: Vec<usize> = (0..ratio.len()).filter(|&k| !(ratio[k] > target[k])).collect();
        let support_ok = (0..onset.len()).all(|k| onset[k] >= modulation[k] - halfwidth);
        let residual = max_of(&m.floats("ansatz_residual")?).max(fam.floats("ansatz_residual")?[0]);
        Ok(vec![
            Assertion::gate(
                "ratio_exceeds_two_to_k",
                "forge.ratio_divergence",
                !ratio.is_empty() && failing.is_empty(),
                format!("ratios {ratio:?}, failing k {failing:?}"),
            ),
            Assertion::gate(
                "seed_closeness",
                "forge.family_closeness",
                closeness < epsilon,
                format!("{closeness:e} < {epsilon:e}"),
            ),
            Assertion::gate(
                "difference_lives_at_high_frequency",
                "forge.family_support",
                support_ok,
                format!("onsets {onset:?}, seed half-width {halfwidth}"),
            ),
            at_most("stft_ansatz_residual", "forge.family_ansatz", residual, 1e-10),
        ])
    }
}

pub struct LpReduction;

impl Experiment for LpReduction {
    type Params = FamilyRunParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let fam = build_family(p)?;
        let mut t = Table::new("lp_rows", &["k", "j", "lhs", "low", "high", "constant"]);
        for r in &fam.lp_rows {
            t.push(vec![r.k.into(), r.j.into(), r.lhs.into(), r.low.into(), r.high.into(), r.constant.into()]);
        }
        Ok(vec![t])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let rows = t.get("lp_rows")?;
        let j = rows.floats("j")?;
        let (lo, hi) = p.family.lp_range;
        let covered = (lo..=hi).all(|v| j.contains(&(v as f64)));
        let c = max_of(&rows.floats("constant")?);
        Ok(vec![
            Assertion::gate("lp_range_covered", "forge.lp_reduction", covered, format!("j in {lo}..={hi}")),
            at_most("lp_constant_max", "forge.lp_reduction", c, p.lp_constant),
        ])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisjointnessParams {
    pub ladder: LadderParams,
    /// Pinned `C` in `rho <= C 4^{-n}`.
    pub constant: f64,
}

impl Default for DisjointnessParams {
    fn default() -> Self {
        Self { ladder: LadderParams::default(), constant: 1.0 }
    }
}

pub struct DisjointnessLink;

impl Experiment for DisjointnessLink {
    type Params = DisjointnessParams;

    fn tables(p: &Self::Params, _seed: u64) -> Result<Vec<Table>> {
        let l = &p.ladder;
        let g = Grid1D::new(l.length, l.count)?;
        let h = Signal::gaussian(g, 0.0, 0.0)?;
        let schedule = select_annulus_schedule(&h, l.sigma, l.p, l.q, l.n_max)?;
        let bumps = build_bumps(&schedule)?;
        let norm = Norm::Lebesgue { q: l.q };
        let mut w = Table::new("witness", &["n", "rho", "scaled", "bound"]);
        for n in 0..l.n_max {
            let pair = assemble_pair(&schedule, &bumps, l.delta, n)?;
            let rho = pair.witness(&norm)?;
            let decay = 4f64.powi(-(n as i32));
            w.push(vec![n.into(), rho.into(), (rho / decay).into(), (p.constant * decay).into()]);
        }
        // Split supports give rho = 0; two equal halves give rho = 1.
        let small = Grid1D::new(32.0, 256)?;
        let base = Signal::gaussian(small, 0.0, 0.0)?;
        let step = Signal::from_fn(small, |x| Complex64::new(if x < 0.0 { 1.0 } else { 0.0 }, 0.0))?;
        let left = base.zip_with(&step, |a, b| a * b)?;
        let right = base.sub(&left)?;
        let mut e = Table::new("edge_cases", &["case", "rho", "expected"]);
        e.push(vec!["disjoint_supports".into(), disjointness_witness(&base, &left, &right, &norm)?.into(), 0.0.into()]);
        let doubled = base.scale(Complex64::new(2.0, 0.0));
        e.push(vec!["equal_halves".into(), disjointness_witness(&doubled, &base, &base, &norm)?.into(), 1.0.into()]);
        Ok(vec![w, e])
    }

    fn check(p: &Self::Params, t: &Tables) -> Result<Vec<Assertion>> {
        let w = t.get("witness")?;
        let rho = w.floats("rho")?;
        let bound = w.floats("bound")?;
        let failing: Vec<usize> = (0..rho.len()).filter(|&i| !(rho[i] <= bound[i])).collect();
        let e = t.get("edge_cases")?;
        let got = e.floats("rho")?;
        let want = e.floats("expected")?;
        Ok(vec![
            Assertion::gate(
                "witness_decays_like_four_to_minus_n",
                "forge.disjointness_link",
                failing.is_empty(),
                format!("max rho 4^n = {:e} against C = {}", max_of(&w.floats("scaled")?), p.constant),
            ),
            Assertion::gate(
                "edge_cases_exact",
                "norms.disjointness_witness",
                got == want,
                format!("{got:?} == {want:?}"),
            ),
        ])
    }
}
