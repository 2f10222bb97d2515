//! Gabor-side instability family measured in a weighted Sobolev norm.

use stftlab::forge::{stft_instability_family, FamilyParams};
use stftlab::transforms::WindowSpec;
use stftlab::{Grid1D, Result, Signal};

fn main() -> Result<()> {
    let g = Grid1D::new(16.0, 2048)?;
    let seed = Signal::sech(g, 0.75)?;
    let fam = stft_instability_family(&seed, &WindowSpec::Gaussian, &FamilyParams::default())?;
    println!("closeness of f_eps to the seed: {:.3}", fam.closeness);
    for m in &fam.members {
        println!("k = {}: ratio {:.3e}, difference starts at |x| = {}", m.k, m.ratio, m.difference_onset);
    }
    println!("largest Littlewood-Paley constant: {:.2e}", fam.max_lp_constant());
    Ok(())
}
