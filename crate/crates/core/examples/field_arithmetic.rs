//! GF(2^n) and GF(p) arithmetic: encoding, products, inverses and the
//! constant-multiplication matrices used by the circuit model.

use galoiscache::field::{format_poly, is_irreducible, FieldSpec, GfElement, STANDARD_MODULI};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = FieldSpec::binary(3)?;
    println!("{f}");
    println!("42 encodes {}", format_poly(42));

    let x = GfElement(0b010);
    let x2p1 = GfElement(0b101);
    println!("x * (x^2+1) = {}", format_poly(f.mul(x, x2p1)?.0));
    println!("inverse of x = {}", format_poly(f.inv(x)?.0));

    println!("multiplication table of {f}:");
    for a in f.elements() {
        let row: Vec<String> = f.elements().map(|b| f.mul(a, b).map(|p| p.0.to_string())).collect::<Result<_, _>>()?;
        println!("  {}", row.join(" "));
    }

    for (n, m) in STANDARD_MODULI {
        println!("n={n} modulus {m:#b} ({}) irreducible: {}", format_poly(m), is_irreducible(n, m)?);
    }

    let m = f.const_mul_matrix(x)?;
    println!("times-x matrix columns: {:?}", m.columns());

    let p7 = FieldSpec::prime(7)?;
    println!("in {p7}: 3 * 5 = {}, 1/3 = {}", p7.mul(GfElement(3), GfElement(5))?.0, p7.inv(GfElement(3))?.0);
    Ok(())
}
