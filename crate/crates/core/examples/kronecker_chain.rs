// Recover the minimal index and singular polynomial of an `L_k` block.

use std::error::Error;

use pencilkit::fixtures::{get_fixture, FixtureParams};
use pencilkit::sections::section;
use pencilkit::singpoly::{
    certifying_probes, chain_to_polynomial, extract_right_chain, verify_singular_polynomial, Side,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for k in 1..=4 {
        let f = get_fixture(
            "kronecker_L",
            &FixtureParams {
                k,
                ..Default::default()
            },
        )?;
        let s = section(f.pencil()?, k + 1)?;
        let chain = extract_right_chain(&s, 1e-10)?.ok_or("L_k always has a right chain")?;
        let q = chain_to_polynomial(&chain);
        let r = verify_singular_polynomial(&s, &q, Side::Right, &certifying_probes(k))?;
        println!(
            "L_{k}: minimal index {}, residual {r:.3e}",
            chain.minimal_index
        );
        if chain.minimal_index != k || r > 1e-12 {
            return Err(format!("unexpected chain for L_{k}").into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
