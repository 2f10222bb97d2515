//! Marching squares on the node lattice of a time-frequency grid.

use crate::grid::TFGrid;

/// A straight piece of an isocontour, endpoints in `(x, w)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b.0 - self.a.0).hypot(self.b.1 - self.a.1)
    }

    pub fn midpoint(&self) -> (f64, f64) {
        (0.5 * (self.a.0 + self.b.0), 0.5 * (self.a.1 + self.b.1))
    }
}

/// Segments of `{v = level}` for row-major node values `v` on `grid`, with
/// linear interpolation along cell edges. Saddle cells are resolved by the
/// cell-centre average. The grid frame itself never contributes.
pub fn isocontour(grid: &TFGrid, v: &[f64], level: f64) -> Vec<Segment> {
    let (nx, nw) = grid.shape();
    let (hx, hw) = (grid.x.spacing(), grid.omega.spacing());
    let (x0, w0) = (grid.x.point(0), grid.omega.point(0));
    let mut out = Vec::new();
    for ix in 0..nx - 1 {
        for iw in 0..nw - 1 {
            // Corners counter-clockwise: (ix,iw), (ix+1,iw), (ix+1,iw+1), (ix,iw+1).
            let c = [v[ix * nw + iw], v[(ix + 1) * nw + iw], v[(ix + 1) * nw + iw + 1], v[ix * nw + iw + 1]];
            let above = c.map(|t| t >= level);
            let code = above.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k));
            if code == 0 || code == 15 {
                continue;
            }
            let pos = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
            // Crossing on edge k between corner k and corner k+1.
            let cross = |k: usize| {
                let (a, b) = (k, (k + 1) % 4);
                let t = if c[a] == c[b] { 0.5 } else { (level - c[a]) / (c[b] - c[a]) };
                let (pa, pb) = (pos[a], pos[b]);
                let u = pa.0 + t * (pb.0 - pa.0);
                let s = pa.1 + t * (pb.1 - pa.1);
                (x0 + (ix as f64 + u) * hx, w0 + (iw as f64 + s) * hw)
            };
            let crossing: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            match crossing.len() {
                2 => out.push(Segment { a: cross(crossing[0]), b: cross(crossing[1]) }),
                4 => {
                    let centre_above = 0.25 * c.iter().sum::<f64>() >= level;
                    // Pair edges so that the centre joins corners of its own side.
                    let pairs = if centre_above == above[0] { [(0, 3), (1, 2)] } else { [(0, 1), (2, 3)] };
                    for (p, q) in pairs {
                        out.push(Segment { a: cross(p), b: cross(q) });
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Bilinear interpolation of a real field at `(x, w)`; zero outside the node hull.
pub fn bilinear(grid: &TFGrid, v: &[f64], x: f64, w: f64) -> f64 {
    let (nx, nw) = grid.shape();
    let fx = (x - grid.x.point(0)) / grid.x.spacing();
    let fw = (w - grid.omega.point(0)) / grid.omega.spacing();
    if !(fx >= 0.0 && fw >= 0.0 && fx <= (nx - 1) as f64 && fw <= (nw - 1) as f64) {
        return 0.0;
    }
    let ix = (fx.floor() as usize).min(nx - 2);
    let iw = (fw.floor() as usize).min(nw - 2);
    let (tx, tw) = (fx - ix as f64, fw - iw as f64);
    let at = |a: usize, b: usize| v[a * nw + b];
    (1.0 - tx) * (1.0 - tw) * at(ix, iw)
        + tx * (1.0 - tw) * at(ix + 1, iw)
        + tx * tw * at(ix + 1, iw + 1)
        + (1.0 - tx) * tw * at(ix, iw + 1)
}

/// `sum over segments of W(midpoint) * length`.
pub fn weighted_length(grid: &TFGrid, w: &[f64], segments: &[Segment]) -> f64 {
    segments
        .iter()
        .map(|s| {
            let (mx, mw) = s.midpoint();
            bilinear(grid, w, mx, mw) * s.length()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_length() {
        let g = TFGrid::square(4.0, 256).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|i| {
                let (x, w) = g.coords(i);
                x.hypot(w)
            })
            .collect();
        let segs = isocontour(&g, &v, 1.0);
        let len: f64 = segs.iter().map(Segment::length).sum();
        assert!((len - 2.0 * PI).abs() < 1e-3, "{len}");
    }

    #[test]
    fn straight_line_is_exact() {
        let g = TFGrid::square(4.0, 64).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| g.coords(i).0).collect();
        let segs = isocontour(&g, &v, 0.3);
        let len: f64 = segs.iter().map(Segment::length).sum();
        let span = g.omega.point(63) - g.omega.point(0);
        assert!((len - span).abs() < 1e-12);
        let ones = vec![1.0; g.len()];
        assert!((weighted_length(&g, &ones, &segs) - span).abs() < 1e-12);
    }

    #[test]
    fn bilinear_reproduces_affine() {
        let g = TFGrid::square(4.0, 32).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|i| {
                let (x, w) = g.coords(i);
                2.0 * x - w + 0.5
            })
            .collect();
        let got = bilinear(&g, &v, 0.3, -0.71);
        assert!((got - (0.6 + 0.71 + 0.5)).abs() < 1e-12);
        assert_eq!(bilinear(&g, &v, 10.0, 0.0), 0.0);
    }
}
