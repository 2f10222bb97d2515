//! Taking the modulus is bounded on W^{1,2} but not above the threshold s = 1 + 1/p.

use num_complex::Complex64;
use stftlab::norms::{modulus_sobolev_ratio, Norm, NormSpec};
use stftlab::{Result, TFField, TFGrid};

fn main() -> Result<()> {
    let g = TFGrid::square(8.0, 256)?;
    let pi = std::f64::consts::PI;
    for spacing in [1.0, 0.5, 0.25] {
        // A field with nodal lines: |F| has kinks where sin changes sign.
        let f = TFField::from_fn(g, |x, w| {
            Complex64::new((pi * x / spacing).sin() * (-pi * (x * x + w * w) / 4.0).exp(), 0.0)
        })?;
        let below = modulus_sobolev_ratio(&f, &Norm::Sobolev { s: 1.0, p: 2.0, r: 0.0 })?;
        let above = modulus_sobolev_ratio(&f, &Norm::Sobolev { s: 1.6, p: 2.0, r: 0.0 })?;
        println!("line spacing {spacing:<4}: s = 1 ratio {below:.4}, s = 1.6 ratio {above:.4}");
    }
    for s in [1.0, 1.4, 1.6] {
        let spec = NormSpec::new(s, 2.0, 0.0, 2.0, 0.0)?;
        println!("s = {s}, p = 2: below threshold {}", spec.below_modulus_threshold());
    }
    Ok(())
}
