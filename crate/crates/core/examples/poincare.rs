//! Neumann Poincare constants: the unit square against pi, and a disconnected domain.

use num_complex::Complex64;
use stftlab::geometry::{poincare_constant, DomainMask};
use stftlab::{Result, TFField, TFGrid};

fn main() -> Result<()> {
    let g = TFGrid::square(1.0, 128)?;
    let one = TFField::from_fn(g, |_, _| Complex64::new(1.0, 0.0))?;
    let square = DomainMask::full(g);
    let r = poincare_constant(&square, &one, false)?;
    println!("unit square: mu1 = {:.5} (pi^2 = {:.5}), C = {:.5}", r.mu1, std::f64::consts::PI.powi(2), r.constant);

    let split = DomainMask::from_fn(g, |x, _| x.abs() > 0.1);
    let r = poincare_constant(&split, &one, false)?;
    println!("split square: connected {}, C = {}", r.connected, r.constant);

    let wide = TFGrid::square(8.0, 128)?;
    let unit = TFField::from_fn(wide, |_, _| Complex64::new(1.0, 0.0))?;
    let disk = DomainMask::disk(wide, (0.0, 0.0), 2.0);
    let r = poincare_constant(&disk, &unit, true)?;
    println!("disk of radius 2 under the Gaussian measure: C = {:.4}", r.constant);
    Ok(())
}
