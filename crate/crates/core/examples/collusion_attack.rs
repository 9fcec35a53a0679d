//! Two colluding domains against a Galois cache. One fills the cache, the
//! other squeezes it down to a single line per set, and a victim access that
//! lands on a surviving line reveals the victim's set.

use galoiscache::attack::{run_collusion_attack, AttackScenario, Collusion};
use galoiscache::cache::Cache;
use galoiscache::field::FieldSpec;
use galoiscache::skew::SkewParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sp = SkewParams::standard(FieldSpec::binary(3)?);

    // One trial by hand.
    let sc = AttackScenario::collusion(sp.clone(), 1, 4);
    let plan = Collusion::from_scenario(&sc);
    let mut cache = Cache::new(sc.cache.clone())?;
    plan.prime_all(&mut cache)?;
    plan.squeeze(&mut cache)?;
    println!("prober lines left: {}", cache.resident_count(1));
    let victim_addr = cache.config().address_of(0, 5);
    let out = cache.access(2, victim_addr)?;
    println!("victim (set 5) filled physical set {} way {}", out.physical_set, out.way);
    let obs = plan.probe(&mut cache)?;
    println!("drained prober sets {:?}, inferred victim set {:?}", obs.drained_sets, obs.inferred_set);

    // Many trials with a random victim set.
    let sc = AttackScenario::collusion(sp, 20_000, 4).with_victim_set(None);
    let r = run_collusion_attack(&sc)?;
    println!(
        "detection {:.4} (expected {:.4}), correct when fired: {:?}, false positive rate {}",
        r.detection_rate,
        r.theoretical_rate.unwrap_or(f64::NAN),
        r.correct_given_fired,
        r.false_positive_rate
    );
    Ok(())
}
