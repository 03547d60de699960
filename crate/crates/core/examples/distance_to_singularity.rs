// Stacked sigma_min of `[A; E]` on growing sections: `sqrt(2)/n` for
// `E = A = diag(1/j)`, and the witness drifting to infinity.

use std::error::Error;

use pencilkit::fixtures::{get_fixture, FixtureParams};
use pencilkit::sections::distance_sweep;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = get_fixture("diag_reciprocal", &FixtureParams::default())?;
    let rows = distance_sweep(f.pencil()?, &[2, 4, 8, 16, 32])?;
    for r in &rows {
        println!(
            "n = {:2}: {:.6e} (witness centred at {})",
            r.n, r.stacked_sigma_min, r.witness_support_center
        );
        if (r.stacked_sigma_min - 2f64.sqrt() / r.n as f64).abs() > 1e-13 {
            return Err("distance bound should be sqrt(2)/n".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
