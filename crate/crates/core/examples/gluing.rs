//! Connectivity of a two-piece cover and the resulting gluing bound.

use stftlab::geometry::{connectivity, gluing_bound, DomainMask};
use stftlab::transforms::{stft, WindowSpec};
use stftlab::{Grid1D, Result, Signal, TFGrid};

fn main() -> Result<()> {
    let g = Grid1D::new(16.0, 256)?;
    let phi = WindowSpec::Gaussian.signal(g)?;
    let tf = TFGrid::square(16.0, 256)?;
    for (name, f) in [("gaussian", Signal::gaussian(g, 0.0, 0.0)?), ("hermite2", Signal::hermite(g, 2)?)] {
        let w = stft(&f, &phi, &tf)?.modulus();
        let omega = DomainMask::disk(tf, (0.0, 0.0), 3.0);
        for overlap in [0.25, 0.5, 1.0] {
            let a = omega.intersection(&DomainMask::half_plane(tf, 0.0, -overlap / 2.0))?;
            let b = omega.intersection(&DomainMask::half_plane(tf, std::f64::consts::PI, -overlap / 2.0))?;
            let lambda = connectivity(&w, &a, &b)?;
            println!(
                "{name:<9} overlap {overlap:<4}: lambda {lambda:.4}, bound with c_A = c_B = 1: {:.3}",
                gluing_bound(1.0, 1.0, lambda)?
            );
        }
    }
    Ok(())
}
