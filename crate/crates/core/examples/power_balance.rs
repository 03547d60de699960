// Power balance and Hamiltonian decay along a reference trajectory of the
// three-field template.

use std::error::Error;

use pencilkit::fixtures::{get_fixture, poro_trajectory, FixtureParams};
use pencilkit::sections::section;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = get_fixture("poroelasticity_template", &FixtureParams::default())?;
    let s = section(f.pencil()?, f.default_window)?;
    let tr = poro_trajectory(&s, 0)?;
    for (i, t) in tr.times.iter().enumerate().step_by(5) {
        println!(
            "t = {t:.1}: H = {:.6}, balance residual {:.2e}",
            tr.hamiltonian[i], tr.residual_pbe[i]
        );
    }
    let worst = tr.residual_pbe.iter().copied().fold(0.0, f64::max);
    if worst > 1e-6 || tr.hamiltonian.windows(2).any(|w| w[1] > w[0] + 1e-8) {
        return Err("power balance violated".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
