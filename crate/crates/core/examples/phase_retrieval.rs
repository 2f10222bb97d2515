//! Recover a signal from its spectrogram and measure the error up to a global phase.

use num_complex::Complex64;
use stftlab::norms::{phase_inf_distance, Norm};
use stftlab::transforms::{add_measurement_noise, phaseless, recover, WindowSpec};
use stftlab::{rng, Grid1D, Result, Signal, TFGrid};

fn main() -> Result<()> {
    // Recovery needs a self-dual grid: L^2 = N.
    let g = Grid1D::new(16.0, 256)?;
    let phi = WindowSpec::Gaussian.signal(g)?;
    let tau = 1e-6 * WindowSpec::Gaussian.ambiguity_closed_form(0.0, 0.0).unwrap();
    let f = Signal::hermite(g, 2)?.scale(Complex64::cis(0.7));
    let p = phaseless(&f, &phi, &TFGrid::full(&g))?;

    let clean = recover(&p, &phi, tau)?;
    let err = phase_inf_distance(&clean.signal, &f, &Norm::l2(), None)?;
    println!("noiseless: relative error {:.2e}, global phase {:.4}", err.distance / f.norm(2.0), err.lambda.arg());
    println!("           masked fraction {:.3}", clean.report.masked_fraction);

    let noisy = add_measurement_noise(&p, 30.0, &mut rng::stream(7));
    for rel in [1e-6, 1e-3, 1e-1] {
        let rec = recover(&noisy, &phi, rel * tau / 1e-6)?;
        let d = phase_inf_distance(&rec.signal, &f, &Norm::l2(), None)?;
        println!("30 dB, tau {rel:.0e}: relative error {:.3e}", d.distance / f.norm(2.0));
    }
    Ok(())
}
