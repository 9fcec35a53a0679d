use galoiscache::attack::{sweep_detection_vs_field, AttackKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [AttackKind::GaloisPrimeProbe, AttackKind::Collusion] {
        println!("{kind}");
        for row in sweep_detection_vs_field(kind, 2..=5, 10_000, 3, 1.0)? {
            println!(
                "  {:<24} theory {:.4}  measured {:.4}  within 3 sd: {}",
                row.field, row.theoretical, row.empirical, row.within_3sd
            );
        }
    }
    Ok(())
}
