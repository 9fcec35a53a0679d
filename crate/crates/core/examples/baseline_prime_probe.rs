//! Prime+Probe on a conventional LRU cache: every victim access is seen.

use galoiscache::attack::{run_baseline_prime_probe, AttackScenario};
use galoiscache::cache::{CacheConfig, Replacement};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cache = CacheConfig::conventional(4, 4, Replacement::Lru);
    let r = run_baseline_prime_probe(&AttackScenario::baseline(cache.clone(), 2, 1000, 0))?;
    println!("victim in the primed set: detection rate {}", r.detection_rate);

    let idle = AttackScenario::baseline(cache, 2, 1000, 0).with_victim_probability(0.5);
    let r = run_baseline_prime_probe(&idle)?;
    println!(
        "victim active half the time: {} true positives, {} true negatives, {} false positives",
        r.true_positives, r.true_negatives, r.false_positives
    );
    Ok(())
}
