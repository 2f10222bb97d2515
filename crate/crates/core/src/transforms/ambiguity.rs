use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::TFField;
use crate::grid::TFGrid;
use crate::signal::Signal;

use super::stft::stft;

/// `Af(x, w) = e^{pi i x w} V_f f(x, w)` on the full grid of `f`.
pub fn ambiguity(f: &Signal) -> Result<TFField> {
    let tf = TFGrid::full(f.grid());
    let v = stft(f, f, &tf)?;
    Ok(v.map_indexed(|x, w, z| z * Complex64::cis(PI * x * w)))
}

fn require_self_dual(f: &Signal) -> Result<TFGrid> {
    let tf = TFGrid::full(f.grid());
    if !tf.is_self_dual() {
        return Err(Error::IncompatibleGrids(format!(
            "ambiguity relation needs a self-dual grid (L^2 = N), got L = {}, N = {}",
            f.grid().length(),
            f.grid().count()
        )));
    }
    Ok(tf)
}

/// Rearranges the 2D Fourier transform of a spectrogram `P` into
/// `M(x, w) = F P(w, -x)`, which equals `Af(x, w) conj(A phi(x, w))`.
pub fn measurement_to_ambiguity_product(p: &TFField) -> Result<TFField> {
    let g = *p.grid();
    if !g.is_self_dual() {
        return Err(Error::IncompatibleGrids("measurement grid must be self-dual".into()));
    }
    let fp = p.fourier_2d();
    let n = g.x.count();
    let mut values = Vec::with_capacity(g.len());
    for ix in 0..n {
        let ib = (n - ix) % n;
        for iw in 0..n {
            values.push(fp.get(iw, ib));
        }
    }
    Ok(TFField::from_parts(g, values))
}

/// Relative sup-norm residual of `F|V_phi f|^2 (w, -x) = Af(x, w) conj(A phi(x, w))`.
pub fn ambiguity_relation_residual(f: &Signal, window: &Signal) -> Result<f64> {
    let tf = require_self_dual(f)?;
    let p = super::stft::phaseless(f, window, &tf)?;
    let lhs = measurement_to_ambiguity_product(&p)?;
    let af = ambiguity(f)?;
    let aphi = ambiguity(window)?;
    let rhs = af.zip_with(&aphi, |a, b| a * b.conj())?;
    let scale = rhs.norm(f64::INFINITY);
    if scale == 0.0 {
        return Ok(lhs.norm(f64::INFINITY));
    }
    Ok(lhs.sub(&rhs)?.norm(f64::INFINITY) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::transforms::WindowSpec;

    fn grid() -> Grid1D {
        Grid1D::new(16.0, 256).unwrap()
    }

    #[test]
    fn gaussian_ambiguity_closed_form() {
        let phi = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        let a = ambiguity(&phi).unwrap();
        let want = TFField::from_fn(*a.grid(), |x, w| {
            Complex64::new(WindowSpec::Gaussian.ambiguity_closed_form(x, w).unwrap(), 0.0)
        })
        .unwrap();
        assert!(a.sub(&want).unwrap().norm(f64::INFINITY) < 1e-10);
        assert!((a.get(128, 128).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_ambiguity_closed_form() {
        for n in 1..4 {
            let h = Signal::hermite(grid(), n).unwrap();
            let a = ambiguity(&h).unwrap();
            let spec = WindowSpec::Hermite { n };
            let want =
                TFField::from_fn(*a.grid(), |x, w| Complex64::new(spec.ambiguity_closed_form(x, w).unwrap(), 0.0))
                    .unwrap();
            assert!(a.sub(&want).unwrap().norm(f64::INFINITY) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn relation_holds_for_shifted_fixture() {
        let phi = Signal::gaussian(grid(), 0.0, 0.0).unwrap();
        let f = Signal::hermite(grid(), 1).unwrap().translate(0.5).unwrap().modulate(0.75).unwrap();
        assert!(ambiguity_relation_residual(&f, &phi).unwrap() < 1e-10);
    }

    #[test]
    fn relation_rejects_non_self_dual() {
        let g = Grid1D::new(32.0, 512).unwrap();
        let phi = Signal::gaussian(g, 0.0, 0.0).unwrap();
        assert!(ambiguity_relation_residual(&phi, &phi).is_err());
    }
}
