//! STFT of a few fixtures: isometry, covariance and the ambiguity relation.

use stftlab::transforms::{ambiguity_relation_residual, covariance_residual, stft, WindowSpec};
use stftlab::{Grid1D, Result, Signal, TFGrid};

fn main() -> Result<()> {
    let g = Grid1D::new(32.0, 512)?;
    let phi = WindowSpec::Gaussian.signal(g)?;
    let fixtures = [
        ("gaussian", Signal::gaussian(g, 1.5, 2.0)?),
        ("hermite3", Signal::hermite(g, 3)?),
        ("sech", Signal::sech(g, 1.0)?),
    ];
    for (name, f) in &fixtures {
        let v = stft(f, &phi, &TFGrid::full(&g))?;
        let ratio = v.norm(2.0) / (f.norm(2.0) * phi.norm(2.0));
        let cov = covariance_residual(f, &phi, 2.0 * g.spacing(), 4.0 * g.dual_spacing())?;
        println!("{name:<9} |V f| / (|f| |phi|) = {ratio:.12}   covariance residual {cov:.2e}");
    }

    let d = Grid1D::new(16.0, 256)?;
    let h = Signal::hermite(d, 2)?;
    let window = WindowSpec::Hermite { n: 1 }.signal(d)?;
    println!(
        "ambiguity relation residual (hermite2, hermite1 window): {:.2e}",
        ambiguity_relation_residual(&h, &window)?
    );
    Ok(())
}
