// Round trip of a structured pencil through the JSON file format.

use std::error::Error;

use pencilkit::opmodel::{Pencil, SpaceDescriptor, StructuredOperator, WeightRule};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let n = SpaceDescriptor::L2N;
    let p = Pencil::new(
        StructuredOperator::diagonal(n, WeightRule::ReciprocalIndex),
        StructuredOperator::shift(n, -1, WeightRule::one()),
    )?;
    let text = p.to_json_string()?;
    println!("{text}");
    let back = Pencil::from_json_str(&text)?;
    if back != p {
        return Err("round trip changed the pencil".into());
    }
    println!("A e_3 = {:?}", back.a.apply_basis(3)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
