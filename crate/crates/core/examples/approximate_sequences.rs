// Residual table for the approximate singular polynomials of the block
// chain, with the Gram lower bound on their norms.

use std::error::Error;

use pencilkit::approxsing::{gram_lower_bound, sequence_residuals};
use pencilkit::fixtures::{approxchain_probes, approxchain_residual, get_fixture, FixtureParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = get_fixture(
        "approxchain",
        &FixtureParams {
            n: 6,
            ..Default::default()
        },
    )?;
    let seq = f.witnesses.sequence.clone().ok_or("missing sequence")?;
    let gram = gram_lower_bound(&seq, seq.range())?;
    println!("xi = {}", gram.xi);
    let rows = sequence_residuals(f.pencil()?, &seq, &approxchain_probes(), seq.range())?;
    for r in rows
        .iter()
        .filter(|r| r.probe_re == 1.0 && r.probe_im == 0.0)
    {
        println!(
            "n = {}: fwd {:.3e}, rev {:.3e}",
            r.n, r.fwd_residual, r.rev_residual
        );
    }
    for r in &rows {
        let expected = approxchain_residual(r.n, faer::c64::new(r.probe_re, r.probe_im));
        if (r.fwd_residual - expected).abs() > 1e-12 * expected {
            return Err("residual differs from the closed form".into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
