//! Run a built-in experiment, write its tables and verify them from disk.

use stftlab::experiments::{self, ExperimentManifest};
use stftlab::Result;

fn main() -> Result<()> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "window-ratio".into());
    let dir = std::env::temp_dir().join(format!("stftlab-{id}"));
    let mut m = ExperimentManifest::new(&id);
    m.out = Some(dir.clone());
    let r = experiments::run(&m)?;
    for a in &r.assertions {
        println!("{:<5} {} {}", if a.passed { "pass" } else { "fail" }, a.name, a.detail);
    }
    let v = experiments::verify(&dir)?;
    println!("{id}: passed {}, stored tables consistent {} ({})", r.passed(), v.consistent, dir.display());
    Ok(())
}
