// Truncated singular functions against their analytic tail bounds, and
// the factorial series solution with `f(0) = 0` of the shifted identity.

use std::error::Error;

use faer::c64;
use pencilkit::fixtures::{get_fixture, verify_singular_function, FixtureParams};
use pencilkit::odae::series_solution;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = FixtureParams::default();
    let ia = get_fixture("backward_shift_diag", &params)?;
    let probes = [c64::new(1.0, 0.0), c64::new(-2.0, 0.0), c64::new(0.0, 1.0)];
    for r in verify_singular_function(&ia, &probes, 30)? {
        println!(
            "({}, {}): {:.3e} <= {:.3e}",
            r.probe_re, r.probe_im, r.residual, r.tail_bound
        );
        if !r.within_bound {
            return Err("tail bound violated".into());
        }
    }
    let si = get_fixture("shift_identity", &params)?;
    let gen = si.witnesses.generator.clone().ok_or("missing generator")?;
    let tr = series_solution(si.pencil()?, &gen, &[0.0, 1.0], 15)?;
    println!(
        "||f(0)|| = {}, ||f(1)|| = {:.4}, residual {:.3e}",
        tr.states[0].norm(),
        tr.states[1].norm(),
        tr.residual_classical[1]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
