//! Gate counts and depths of the XOR-only permutation circuit, and one
//! netlist.

use galoiscache::circuit::{emit_netlist, permutation_cost};
use galoiscache::field::FieldSpec;
use galoiscache::skew::SkewParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 2..=7 {
        let (report, _) = permutation_cost(&SkewParams::standard(FieldSpec::binary(n)?))?;
        let deepest = report.per_way.iter().map(|c| c.depth).max().unwrap_or(0);
        println!(
            "GF(2^{n}) {}: {} XOR gates in total, deepest way multiplier {deepest}, critical path {}",
            report.modulus, report.total_xor_count, report.critical_path_depth
        );
    }

    let (_, nets) = permutation_cost(&SkewParams::standard(FieldSpec::binary(3)?))?;
    print!("{}", emit_netlist(&nets[3], "mul_w3"));
    Ok(())
}
