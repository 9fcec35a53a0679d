// GF(4) walk-through: domain 1 fills the cache, domain 2 touches set 0 once,
// and domain 1 re-reads everything. The victim displaced exactly one line,
// in the way where its set meets one of domain 1's sets, and the re-read
// first misses in that set.

use galoiscache::cache::{Cache, CacheConfig};
use galoiscache::field::{FieldSpec, GfElement};
use galoiscache::skew::SkewParams;
use galoiscache::trace::{AccessKind, Trace};

const SEEDS: u64 = 2000;

fn script(cfg: &CacheConfig) -> Trace {
    let mut t = Trace::default();
    for tag in 0..4 {
        for set in 0..4 {
            t.push(1, AccessKind::Read, cfg.address_of(tag, set));
        }
    }
    t.push(2, AccessKind::Read, cfg.address_of(0, 0));
    t
}

#[test]
fn single_victim_access_costs_one_probe_miss() {
    let sp = SkewParams::standard(FieldSpec::binary(2).unwrap());
    let mut way_hits = [0u64; 4];
    for seed in 0..SEEDS {
        let cfg = CacheConfig::galois(sp.clone()).with_seed(seed);
        let mut cache = Cache::new(cfg.clone()).unwrap();
        let stats = script(&cfg).replay(&mut cache).unwrap();
        assert_eq!(stats[&1].misses, 16);
        assert_eq!(stats[&1].self_evictions, 0);
        assert_eq!(stats[&2].evictions_caused, 1);

        // Find the hole the victim left and check it matches the layout.
        let victim_cells: Vec<(u32, u32)> = (0..4)
            .filter(|&w| {
                let phys = sp.permute(GfElement(2), GfElement(0), GfElement(w)).unwrap().0;
                cache.line(0, phys, w).is_some_and(|l| l.domain == 2)
            })
            .map(|w| (sp.permute(GfElement(2), GfElement(0), GfElement(w)).unwrap().0, w))
            .collect();
        assert_eq!(victim_cells.len(), 1);
        let (phys, way) = victim_cells[0];
        way_hits[way as usize] += 1;
        let lost_set = sp.logical_set(GfElement(1), GfElement(phys), GfElement(way)).unwrap();
        let predicted = sp.solve_intersection_way(GfElement(2), GfElement(1), GfElement(0), lost_set).unwrap();
        assert_eq!(predicted.0, way);

        let probe: Vec<u64> =
            (0..4).flat_map(|tag| (0..4).map(move |set| (tag, set))).map(|(tag, set)| cfg.address_of(tag, set)).collect();
        // Probe the evicted set's survivors first so the refill cannot cascade.
        let mut order: Vec<u64> = probe.iter().copied().filter(|&a| cfg.decompose_address(a).set_index != lost_set.0).collect();
        order.extend(probe.iter().copied().filter(|&a| cfg.decompose_address(a).set_index == lost_set.0));
        let results = cache.observe_probe(1, &order).unwrap();
        let misses: Vec<u32> =
            results.iter().filter(|r| !r.hit).map(|r| cfg.decompose_address(r.addr).set_index).collect();
        assert!(!misses.is_empty());
        assert_eq!(misses[0], lost_set.0, "seed {seed}");
    }
    // The victim's way is uniform over the four candidates.
    for count in way_hits {
        let freq = count as f64 / SEEDS as f64;
        assert!((freq - 0.25).abs() < 0.05, "{way_hits:?}");
    }
}
