use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::TFGrid;
use crate::parallel::par_map;

use super::contour::{bilinear, isocontour, Segment};
use super::mask::DomainMask;

pub const LEVEL_COUNT: usize = 256;
/// Thresholds span twelve decades below the peak.
const LEVEL_DECADES: f64 = 12.0;
pub const DISK_CENTRES_PER_AXIS: usize = 12;
pub const DISK_RADII: usize = 24;
pub const CIRCLE_SAMPLES: usize = 256;
pub const DIRECTIONS: usize = 64;
pub const OFFSETS: usize = 256;
const HALF_MASS_SLACK: f64 = 1e-9;
/// Samples below this fraction of the peak are zeroed before the sweep. On
/// transform outputs they are rounding noise, and a flat noise floor over a
/// wide tail region has a spuriously small boundary-to-mass ratio.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Level sets with fewer nodes than this on either side are skipped: the
/// interpolated contour of a handful of nodes encloses far less than their cells.
const MIN_LEVEL_NODES: usize = 16;

/// Candidate families for the Cheeger sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerFamily {
    Level,
    Disk,
    HalfPlane,
}

impl CheegerFamily {
    pub const ALL: [CheegerFamily; 3] = [CheegerFamily::Level, CheegerFamily::Disk, CheegerFamily::HalfPlane];

    pub fn tag(self) -> &'static str {
        match self {
            CheegerFamily::Level => "level",
            CheegerFamily::Disk => "disk",
            CheegerFamily::HalfPlane => "half_plane",
        }
    }
}

/// Shape of a single candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Candidate {
    /// `{Ws >= threshold}` or its complement.
    Level { threshold: f64, superlevel: bool },
    /// `{|z - centre| <= radius}` or its complement.
    Disk { centre: (f64, f64), radius: f64, inside: bool },
    /// `{x cos(theta) + w sin(theta) >= offset}`.
    HalfPlane { theta: f64, offset: f64 },
}

impl Candidate {
    pub fn family(&self) -> CheegerFamily {
        match self {
            Candidate::Level { .. } => CheegerFamily::Level,
            Candidate::Disk { .. } => CheegerFamily::Disk,
            Candidate::HalfPlane { .. } => CheegerFamily::HalfPlane,
        }
    }
}

/// Best candidate of one slice of a family (one threshold, one centre or one direction).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CandidateRow {
    pub candidate: Candidate,
    pub mass: f64,
    pub boundary: f64,
    pub ratio: f64,
}

/// Upper bound on the Cheeger ratio over the swept candidate families.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerReport {
    pub value: f64,
    pub kind: &'static str,
    pub family: CheegerFamily,
    pub best: CandidateRow,
    pub total_mass: f64,
    #[serde(skip)]
    pub witness: DomainMask,
    pub table: Vec<CandidateRow>,
}

impl CheegerReport {
    /// Smallest ratio reached within one family, `+inf` when it has no feasible row.
    pub fn family_best(&self, family: CheegerFamily) -> f64 {
        self.table.iter().filter(|r| r.candidate.family() == family).map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }
}

struct Sweep<'a> {
    grid: TFGrid,
    w: &'a [f64],
    cell: f64,
    total: f64,
}

impl<'a> Sweep<'a> {
    fn half(&self) -> f64 {
        0.5 * self.total * (1.0 + HALF_MASS_SLACK)
    }

    fn row(&self, candidate: Candidate, mass: f64, boundary: f64) -> Option<CandidateRow> {
        // Complement masses are differences of running sums; a residue at
        // rounding level is an empty set.
        if mass <= NOISE_FLOOR * self.total || mass > self.half() {
            return None;
        }
        Some(CandidateRow { candidate, mass, boundary, ratio: boundary / mass })
    }

    fn levels(&self) -> Vec<CandidateRow> {
        let ws = smooth(&self.grid, self.w);
        let peak = ws.iter().cloned().fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..ws.len()).collect();
        order.sort_by(|&a, &b| ws[b].total_cmp(&ws[a]).then(a.cmp(&b)));
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        for &i in &order {
            prefix.push(prefix.last().unwrap() + self.w[i] * self.cell);
        }
        let levels: Vec<usize> = (0..LEVEL_COUNT).collect();
        par_map(&levels, |&i| {
            let t = peak * 10f64.powf(-LEVEL_DECADES * i as f64 / (LEVEL_COUNT - 1) as f64);
            let count = order.partition_point(|&k| ws[k] >= t);
            let upper = prefix[count];
            if count < MIN_LEVEL_NODES || order.len() - count < MIN_LEVEL_NODES {
                return None;
            }
            let boundary = weighted(&self.grid, self.w, &isocontour(&self.grid, &ws, t));
            let sup = self.row(Candidate::Level { threshold: t, superlevel: true }, upper, boundary);
            let sub = self.row(Candidate::Level { threshold: t, superlevel: false }, self.total - upper, boundary);
            better(sup, sub)
        })
        .into_iter()
        .flatten()
        .collect()
    }

    fn disks(&self) -> Vec<CandidateRow> {
        let g = self.grid;
        let (x0, x1) = (g.x.point(0), g.x.point(g.x.count() - 1));
        let (w0, w1) = (g.omega.point(0), g.omega.point(g.omega.count() - 1));
        let rmin = 2.0 * g.x.spacing().max(g.omega.spacing());
        let rmax = 0.5 * (x1 - x0).min(w1 - w0);
        let radii: Vec<f64> =
            (0..DISK_RADII).map(|k| rmin * (rmax / rmin).powf(k as f64 / (DISK_RADII - 1) as f64)).collect();
        let n = DISK_CENTRES_PER_AXIS;
        let centres: Vec<(f64, f64)> = (0..n * n)
            .map(|k| {
                let (a, b) = (k / n, k % n);
                (x0 + (x1 - x0) * (a as f64 + 0.5) / n as f64, w0 + (w1 - w0) * (b as f64 + 0.5) / n as f64)
            })
            .collect();
        par_map(&centres, |&(cx, cw)| {
            let mut dist: Vec<(f64, usize)> = (0..g.len())
                .map(|i| {
                    let (x, w) = g.coords(i);
                    ((x - cx).hypot(w - cw), i)
                })
                .collect();
            dist.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            let mut best: Option<CandidateRow> = None;
            let (mut k, mut mass) = (0usize, 0.0);
            for &r in &radii {
                while k < dist.len() && dist[k].0 <= r {
                    mass += self.w[dist[k].1] * self.cell;
                    k += 1;
                }
                let boundary = circle_integral(&g, self.w, (cx, cw), r);
                let inside = self.row(Candidate::Disk { centre: (cx, cw), radius: r, inside: true }, mass, boundary);
                let outside = self.row(
                    Candidate::Disk { centre: (cx, cw), radius: r, inside: false },
                    self.total - mass,
                    boundary,
                );
                best = better(best, better(inside, outside));
            }
            best
        })
        .into_iter()
        .flatten()
        .collect()
    }

    fn half_planes(&self) -> Vec<CandidateRow> {
        let g = self.grid;
        let directions: Vec<usize> = (0..DIRECTIONS).collect();
        par_map(&directions, |&k| {
            let theta = 2.0 * PI * k as f64 / DIRECTIONS as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let mut proj: Vec<(f64, usize)> = (0..g.len())
                .map(|i| {
                    let (x, w) = g.coords(i);
                    (x * c + w * s, i)
                })
                .collect();
            // Descending projection: a prefix is a half-plane {proj >= t}.
            proj.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
            let mut prefix = Vec::with_capacity(proj.len() + 1);
            prefix.push(0.0);
            for &(_, i) in &proj {
                prefix.push(prefix.last().unwrap() + self.w[i] * self.cell);
            }
            let (hi, lo) = (proj[0].0, proj[proj.len() - 1].0);
            let mut offsets: Vec<f64> =
                (0..OFFSETS).map(|m| hi - (hi - lo) * (m as f64 + 0.5) / OFFSETS as f64).collect();
            // Largest feasible prefix, cut midway to the next projection value.
            let half = self.half();
            let m = prefix.partition_point(|&v| v <= half) - 1;
            if m > 0 && m < proj.len() {
                offsets.push(0.5 * (proj[m - 1].0 + proj[m].0));
            }
            let mut best = None;
            for t in offsets {
                let count = proj.partition_point(|p| p.0 >= t);
                let boundary = line_integral(&g, self.w, theta, t);
                best = better(best, self.row(Candidate::HalfPlane { theta, offset: t }, prefix[count], boundary));
            }
            best
        })
        .into_iter()
        .flatten()
        .collect()
    }

    fn mask(&self, candidate: &Candidate) -> DomainMask {
        match *candidate {
            Candidate::Level { threshold, superlevel } => {
                let ws = smooth(&self.grid, self.w);
                let inside = ws.iter().map(|&v| (v >= threshold) == superlevel).collect();
                DomainMask::new(self.grid, inside).expect("same grid")
            }
            Candidate::Disk { centre, radius, inside } => {
                let d = DomainMask::disk(self.grid, centre, radius);
                if inside {
                    d
                } else {
                    d.complement()
                }
            }
            Candidate::HalfPlane { theta, offset } => DomainMask::half_plane(self.grid, theta, offset),
        }
    }
}

fn better(a: Option<CandidateRow>, b: Option<CandidateRow>) -> Option<CandidateRow> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.ratio < x.ratio { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn weighted(grid: &TFGrid, w: &[f64], segs: &[Segment]) -> f64 {
    super::contour::weighted_length(grid, w, segs)
}

/// 3x3 binomial smoothing with renormalised weights at the frame.
pub fn smooth(grid: &TFGrid, v: &[f64]) -> Vec<f64> {
    let (nx, nw) = grid.shape();
    let k = [1.0, 2.0, 1.0];
    let mut out = vec![0.0; v.len()];
    for ix in 0..nx {
        for iw in 0..nw {
            let (mut s, mut norm) = (0.0, 0.0);
            for (a, ka) in k.iter().enumerate() {
                for (b, kb) in k.iter().enumerate() {
                    let (jx, jw) = (ix as isize + a as isize - 1, iw as isize + b as isize - 1);
                    if jx < 0 || jw < 0 || jx >= nx as isize || jw >= nw as isize {
                        continue;
                    }
                    s += ka * kb * v[jx as usize * nw + jw as usize];
                    norm += ka * kb;
                }
            }
            out[ix * nw + iw] = s / norm;
        }
    }
    out
}

/// `W` integrated along the circle `|z - c| = r` by a 256-gon.
pub fn circle_integral(grid: &TFGrid, w: &[f64], centre: (f64, f64), radius: f64) -> f64 {
    let pt = |k: usize| {
        let a = 2.0 * PI * k as f64 / CIRCLE_SAMPLES as f64;
        (centre.0 + radius * a.cos(), centre.1 + radius * a.sin())
    };
    let segs: Vec<Segment> = (0..CIRCLE_SAMPLES).map(|k| Segment { a: pt(k), b: pt(k + 1) }).collect();
    weighted(grid, w, &segs)
}

/// `W` integrated along `{x cos(theta) + w sin(theta) = offset}` inside the node hull.
pub fn line_integral(grid: &TFGrid, w: &[f64], theta: f64, offset: f64) -> f64 {
    let (x0, x1) = (grid.x.point(0), grid.x.point(grid.x.count() - 1));
    let (w0, w1) = (grid.omega.point(0), grid.omega.point(grid.omega.count() - 1));
    let (c, s) = (theta.cos(), theta.sin());
    // Parametrise by arclength along the direction (-s, c) from the foot point.
    let foot = (offset * c, offset * s);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, d, a, b) in [(foot.0, -s, x0, x1), (foot.1, c, w0, w1)] {
        if d.abs() < 1e-15 {
            if p < a || p > b {
                return 0.0;
            }
            continue;
        }
        let (t1, t2) = ((a - p) / d, (b - p) / d);
        lo = lo.max(t1.min(t2));
        hi = hi.min(t1.max(t2));
    }
    if hi <= lo {
        return 0.0;
    }
    let step = 0.5 * grid.x.spacing().min(grid.omega.spacing());
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|k| {
            let t = lo + (k as f64 + 0.5) * h;
            bilinear(grid, w, foot.0 - t * s, foot.1 + t * c)
        })
        .sum::<f64>()
        * h
}

/// Upper bound on `inf |W|_{L1(dC)} / |W|_{L1(C)}` over candidate sets `C`
/// carrying at most half the mass of `W`. Values below `NOISE_FLOOR` times
/// the peak are treated as zero.
pub fn cheeger_estimate(w: &TFField, families: &[CheegerFamily]) -> Result<CheegerReport> {
    let peak = w.values().iter().map(|v| v.re).fold(0.0, f64::max);
    let values: Vec<f64> = w.values().iter().map(|v| if v.re < NOISE_FLOOR * peak { 0.0 } else { v.re }).collect();
    if w.values().iter().any(|v| v.im != 0.0 || v.re < 0.0 || !v.re.is_finite()) {
        return Err(Error::Precondition("weight must be real, finite and nonnegative".into()));
    }
    if families.is_empty() {
        return Err(Error::Precondition("no candidate family selected".into()));
    }
    cheeger_on_values(*w.grid(), &values, families)
}

pub(crate) fn cheeger_on_values(grid: TFGrid, w: &[f64], families: &[CheegerFamily]) -> Result<CheegerReport> {
    let cell = grid.cell_area();
    let total: f64 = w.iter().sum::<f64>() * cell;
    if total <= 0.0 {
        return Err(Error::ZeroInput("Cheeger weight has zero mass".into()));
    }
    let sweep = Sweep { grid, w, cell, total };
    let mut table = Vec::new();
    for fam in CheegerFamily::ALL {
        if !families.contains(&fam) {
            continue;
        }
        table.extend(match fam {
            CheegerFamily::Level => sweep.levels(),
            CheegerFamily::Disk => sweep.disks(),
            CheegerFamily::HalfPlane => sweep.half_planes(),
        });
    }
    let best = table
        .iter()
        .fold(None, |acc: Option<&CandidateRow>, r| match acc {
            Some(b) if b.ratio <= r.ratio => Some(b),
            _ => Some(r),
        })
        .copied()
        .ok_or_else(|| Error::Degenerate("no candidate satisfies the half-mass constraint".into()))?;
    Ok(CheegerReport {
        value: best.ratio,
        kind: "upper bound",
        family: best.candidate.family(),
        best,
        total_mass: total,
        witness: sweep.mask(&best.candidate),
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn field(grid: TFGrid, f: impl Fn(f64, f64) -> f64) -> TFField {
        TFField::from_fn(grid, |x, w| Complex64::new(f(x, w), 0.0)).unwrap()
    }

    fn gaussian_modulus(n: usize) -> TFField {
        let g = TFGrid::square(8.0, n).unwrap();
        field(g, |x, w| (-0.5 * PI * (x * x + w * w)).exp() / 2f64.sqrt())
    }

    #[test]
    fn gaussian_value_is_root_two() {
        let r = cheeger_estimate(&gaussian_modulus(64), &CheegerFamily::ALL).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 0.03, "{:?}", r.best);
        assert_eq!(r.kind, "upper bound");
    }

    #[test]
    fn witness_respects_half_mass() {
        let w = gaussian_modulus(64);
        let r = cheeger_estimate(&w, &CheegerFamily::ALL).unwrap();
        let vals: Vec<f64> = w.values().iter().map(|v| v.re).collect();
        assert!(r.witness.integral(&vals) <= 0.5 * r.total_mass * (1.0 + 1e-6));
        assert!((r.witness.integral(&vals) - r.best.mass).abs() < 1e-12 * r.total_mass);
    }

    #[test]
    fn straight_cut_of_constant_field_is_exact() {
        let g = TFGrid::square(4.0, 32).unwrap();
        let vals = vec![1.0; g.len()];
        let span = g.omega.point(31) - g.omega.point(0);
        assert!((line_integral(&g, &vals, 0.0, 0.3) - span).abs() < 1e-12);
        assert_eq!(line_integral(&g, &vals, 0.0, 10.0), 0.0);
    }

    #[test]
    fn two_bumps_cut_between() {
        let g = TFGrid::square(16.0, 128).unwrap();
        let mut last = f64::INFINITY;
        let h = g.x.spacing();
        for d in [2.0, 4.0, 6.0, 8.0] {
            let w = field(g, |x, y| {
                (-PI * ((x - d / 2.0).powi(2) + y * y)).exp() + (-PI * ((x + d / 2.0).powi(2) + y * y)).exp()
            });
            let r = cheeger_estimate(&w, &[CheegerFamily::HalfPlane]).unwrap();
            assert!(r.value < last);
            last = r.value;
            // Cut within half a cell of the symmetry axis; mass on each side is ~1.
            let t = d / 2.0 - h / 2.0;
            let oracle = 2.0 * (-PI * t * t).exp();
            assert!(r.value <= oracle * 1.05, "{d}: {} vs {oracle}", r.value);
            if d >= 8.0 {
                assert!(r.value < (-d * d / 16.0).exp());
            }
        }
    }

    #[test]
    fn zero_field_is_rejected() {
        let g = TFGrid::square(4.0, 16).unwrap();
        assert!(matches!(cheeger_estimate(&TFField::zeros(g), &CheegerFamily::ALL), Err(Error::ZeroInput(_))));
    }

    #[test]
    fn more_families_never_increase_value() {
        let w = gaussian_modulus(48);
        let one = cheeger_estimate(&w, &[CheegerFamily::Disk]).unwrap().value;
        let all = cheeger_estimate(&w, &CheegerFamily::ALL).unwrap().value;
        assert!(all <= one);
    }

    fn smooth_step(t: f64) -> f64 {
        0.5 * (1.0 + (t / 0.15).tanh())
    }

    #[test]
    fn plateau_prefers_level_set() {
        let g = TFGrid::square(16.0, 256).unwrap();
        let w = field(g, |x, y| {
            let r = x.hypot(y);
            smooth_step(1.0 - r) + 0.05 * smooth_step(r - 3.0) * smooth_step(6.0 - r)
        });
        let r = cheeger_estimate(&w, &[CheegerFamily::Level, CheegerFamily::HalfPlane]).unwrap();
        let level = r.family_best(CheegerFamily::Level);
        let plane = r.family_best(CheegerFamily::HalfPlane);
        assert!(level < plane);
        assert_eq!(r.family, CheegerFamily::Level);
    }

    #[test]
    fn gaussian_refinement_is_stable() {
        let a = cheeger_estimate(&gaussian_modulus(64), &CheegerFamily::ALL).unwrap().value;
        let b = cheeger_estimate(&gaussian_modulus(128), &CheegerFamily::ALL).unwrap().value;
        assert!((b / a - 1.0).abs() < 0.1);
    }
}
