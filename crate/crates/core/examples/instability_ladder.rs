//! Build the bump ladder on a Gaussian seed and watch the stability ratio blow up.

use stftlab::forge::{assemble_pair, build_bumps, instability_ratio, select_annulus_schedule, verify_lemma_bounds};
use stftlab::norms::Norm;
use stftlab::{Grid1D, Result, Signal};

fn main() -> Result<()> {
    let g = Grid1D::new(512.0, 4096)?;
    let h = Signal::gaussian(g, 0.0, 0.0)?;
    let schedule = select_annulus_schedule(&h, 0.0, 2.0, 2.0, 5)?;
    let bumps = build_bumps(&schedule)?;
    println!("annulus radii {:?}", schedule.radii);

    let bounds = verify_lemma_bounds(&schedule, &bumps);
    println!("bump bounds: gub deviation {:.1e}, mcb min {:.6}", bounds.max_gub_deviation(), bounds.min_mcb());

    for n in 0..5 {
        let pair = assemble_pair(&schedule, &bumps, 0.1, n)?;
        let r = instability_ratio(&pair, &Norm::l2(), &Norm::l2())?;
        println!("n = {n}: ratio {:>12.4e}  (2^n = {})", r.ratio, pair.target());
    }
    Ok(())
}
