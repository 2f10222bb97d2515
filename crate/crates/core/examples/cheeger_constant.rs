//! Cheeger upper bound of a Gabor modulus, and how it collapses once bumps are added.

use stftlab::forge::cheeger_trend_fields;
use stftlab::geometry::{cheeger_estimate, CheegerFamily};
use stftlab::transforms::{stft, WindowSpec};
use stftlab::{Grid1D, Result, Signal, TFGrid};

fn main() -> Result<()> {
    for count in [64, 128] {
        let g = Grid1D::new(8.0, count)?;
        let f = Signal::gaussian(g, 0.0, 0.0)?;
        let phi = WindowSpec::Gaussian.signal(g)?;
        let w = stft(&f, &phi, &TFGrid::for_signal(&g, 8.0, 1)?)?.modulus();
        let r = cheeger_estimate(&w, &CheegerFamily::ALL)?;
        println!("gaussian, N = {count}: h <= {:.4} via {}", r.value, r.family.tag());
    }

    let g = Grid1D::new(8.0, 1024)?;
    let f = Signal::gaussian(g, 0.0, 0.0)?;
    let tf = TFGrid::for_signal(&g, 8.0, 8)?;
    for (n, w) in cheeger_trend_fields(&f, &WindowSpec::Gaussian, &tf, 0.1, 4)?.iter().enumerate() {
        let r = cheeger_estimate(&w.modulus(), &CheegerFamily::ALL)?;
        println!("{n} bumps: h <= {:.3e}", r.value);
    }
    Ok(())
}
