// Two distinct mild solutions with the same initial value when the common
// kernel is nontrivial, and a uniqueness margin when it is trivial.

use std::error::Error;

use pencilkit::fixtures::{get_fixture, FixtureParams};
use pencilkit::odae::{uniqueness_demo, UniquenessReport};
use pencilkit::sections::section;
use pencilkit::SparseVec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let times = [0.0, 0.5, 1.0];
    let stokes = get_fixture(
        "stokes_skeleton",
        &FixtureParams {
            n: 4,
            ..Default::default()
        },
    )?;
    let s = section(stokes.pencil()?, stokes.default_window)?;
    match uniqueness_demo(&s, &SparseVec::new(), &times, 1e-10)? {
        UniquenessReport::NonUnique {
            kernel_dim,
            max_distance,
            ..
        } => {
            println!("stokes: kernel dim {kernel_dim}, solutions differ by up to {max_distance:.3}")
        }
        UniquenessReport::Unique { .. } => return Err("expected non-uniqueness".into()),
    }
    let diag = get_fixture("diag_reciprocal", &FixtureParams::default())?;
    let s = section(diag.dh_variant.as_ref().ok_or("missing dH casting")?, 8)?;
    match uniqueness_demo(&s, &SparseVec::basis(1), &times, 1e-10)? {
        UniquenessReport::Unique { margin, .. } => {
            println!("diag_reciprocal: unique, margin {margin:.3e}")
        }
        UniquenessReport::NonUnique { .. } => return Err("expected uniqueness".into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
