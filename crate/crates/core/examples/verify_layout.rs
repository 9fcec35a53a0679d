//! Exhaustive layout checks for a few fields, plus the ring negative control.

use galoiscache::field::{FieldSpec, GfElement};
use galoiscache::skew::{verify_diagonalization, verify_way_bijection, RingSkew, SkewParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 2..=5 {
        let sp = SkewParams::standard(FieldSpec::binary(n)?);
        let d = verify_diagonalization(&sp);
        let b = verify_way_bijection(&sp);
        println!(
            "{}: {} intersections checked, {} violations; {} way maps checked, {} violations",
            sp.field(),
            d.checked,
            d.violations.len(),
            b.checked,
            b.violations.len()
        );
    }

    let sp = SkewParams::new(FieldSpec::binary(2)?, 1, 1, 0)?;
    let (t, t2) = (GfElement(1), GfElement(2));
    for s in 0..4 {
        let w = sp.solve_intersection_way(t, t2, GfElement(s), GfElement(0))?;
        println!("domain 1 set {s} meets domain 2 set 0 in way {}", w.0);
    }

    let ring = RingSkew { n: 2, a: 1, b: 1, c: 0 };
    let r = verify_diagonalization(&ring);
    println!("Z/4 layout: {} violations, e.g. {:?}", r.violations.len(), r.violations.first());
    Ok(())
}
