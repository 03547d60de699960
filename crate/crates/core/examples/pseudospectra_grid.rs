// sigma_min over a grid for `lambda E - E`, `E = diag(1/j)`: every point
// is regular on a section yet the values shrink like 1/n.

use std::error::Error;

use pencilkit::fixtures::{get_fixture, FixtureParams};
use pencilkit::sections::section;
use pencilkit::spectra::{spectra_grid, Rect, Tolerances};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = get_fixture("mult_by_E", &FixtureParams::default())?;
    let rect: Rect = "-1,3,-1,1".parse()?;
    for n in [4, 16] {
        let s = section(f.pencil()?, n)?;
        let g = spectra_grid(&s, rect, (9, 5), Tolerances::defaults(&s)?)?;
        let worst = g
            .values
            .iter()
            .map(|v| v.sigma_min)
            .fold(f64::INFINITY, f64::min);
        let at_two = g.at(6, 2).sigma_min;
        println!("n = {n}: min sigma {worst:.3e}, at lambda = 2: {at_two:.3e}");
        if (at_two - 1.0 / n as f64).abs() > 1e-14 {
            return Err("sigma_min(2E - E) should be 1/n".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
