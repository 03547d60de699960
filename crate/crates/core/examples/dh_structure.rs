// Structure check of a dH pencil and the half-plane classification: the
// Stokes skeleton has the constant pressure in `ker E ∩ ker(BQ)`.

use std::error::Error;

use pencilkit::dhcheck::{
    default_probes, dh_classify, dh_kernel_ejr, DhClassification, DhTolerances,
};
use pencilkit::fixtures::{get_fixture, FixtureParams};
use pencilkit::sections::section;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = get_fixture(
        "stokes_skeleton",
        &FixtureParams {
            n: 5,
            ..Default::default()
        },
    )?;
    let s = section(f.pencil()?, f.default_window)?;
    let r = dh_classify(&s, &default_probes(), DhTolerances::defaults(&s)?)?;
    println!("structure ok: {}", r.structure_ok);
    println!("common kernel dim: {}", r.common_kernel_dim);
    for p in &r.probes {
        println!("  probe {}+{}i: {:.3e}", p.re, p.im, p.sigma_min);
    }
    let ejr = dh_kernel_ejr(&s)?;
    println!(
        "ker(E^2 + R^2 - J^2) vs stacked kernel angle: {:.3e}",
        ejr.angle_to_stacked
    );
    if !r.structure_ok || r.classification != DhClassification::PointSingular {
        return Err("expected a point-singular dH pencil".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
