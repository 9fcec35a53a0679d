//! Replays a small multi-domain trace on a Galois cache and a conventional
//! cache of the same size.

use galoiscache::cache::{Cache, CacheConfig, Replacement};
use galoiscache::field::FieldSpec;
use galoiscache::skew::SkewParams;
use galoiscache::trace::Trace;

const TRACE: &str = "\
# domain kind address
1 R 0x000
1 R 0x040
1 R 0x080
1 R 0x0c0
2 W 0x000
2 R 0x100
3 R 0x000
1 R 0x000
1 R 0x040
2 R 0x000
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace: Trace = TRACE.parse()?;
    let sp = SkewParams::standard(FieldSpec::binary(2)?);
    let configs = [
        ("galois 4x4", CacheConfig::galois(sp).with_seed(1)),
        ("conventional 4x4 lru", CacheConfig::conventional(4, 4, Replacement::Lru)),
    ];
    for (name, cfg) in configs {
        let mut cache = Cache::new(cfg)?;
        let stats = trace.replay(&mut cache)?;
        println!("{name}:");
        for (domain, s) in stats {
            println!(
                "  domain {domain}: {} hits, {} misses, {} foreign evictions",
                s.hits, s.misses, s.evictions_caused
            );
        }
    }
    Ok(())
}
