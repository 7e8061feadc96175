//! Run a study config and print its checks.
//!
//! `cargo run --release --example study -- configs/poincare.toml [out dir]`

use std::path::PathBuf;

use porous_homog::experiments::{run_study, StudySpec};

fn main() -> porous_homog::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "configs/poincare.toml".into()),
    );
    let spec = StudySpec::load(&path, &[])?;
    let report = run_study(&spec)?;
    for c in &report.checks {
        println!(
            "{} {}: {:.4e} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    if let Some(out) = args.next() {
        report.write(std::path::Path::new(&out))?;
    }
    println!(
        "{} {}",
        spec.name,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(())
}
