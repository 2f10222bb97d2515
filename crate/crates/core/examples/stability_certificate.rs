//! Phase-removal certificate for polynomial Fock fields under small perturbations.

use num_complex::Complex64;
use stftlab::geometry::{stability_certificate, DomainMask, EXCISION_CELLS};
use stftlab::transforms::{fock_polynomial_field, FockField};
use stftlab::{Result, TFGrid};

fn main() -> Result<()> {
    let g = TFGrid::square(12.0, 192)?;
    let omega = DomainMask::disk(g, (0.0, 0.0), 2.0);
    let fixtures: [&[Complex64]; 3] =
        [&[], &[Complex64::new(0.5, 0.2)], &[Complex64::new(-0.4, 0.1), Complex64::new(0.3, -0.6)]];
    let (q, _) = fock_polynomial_field(&[Complex64::new(0.2, 0.9)], g)?;
    for roots in fixtures {
        let (f1, _) = fock_polynomial_field(roots, g)?;
        for eps in [0.01, 0.05] {
            let phase = Complex64::cis(1.1);
            let f2 = FockField {
                field: f1.field.zip_with(&q.field, |a, b| phase * (a + eps * b))?,
                valid: f1.valid.clone(),
            };
            let c = stability_certificate(&f1, &f2, &omega, 2.0, EXCISION_CELLS)?;
            println!(
                "degree {} eps {eps}: distance {:.4} <= bound {:.4} (third term {:.2e}, {} zeros excised)",
                roots.len(),
                c.distance,
                c.bound,
                c.log_gradient_term,
                c.zeros.len()
            );
        }
    }
    Ok(())
}
