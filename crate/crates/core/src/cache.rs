//! Functional (untimed) cache models.
//!
//! Three organizations share one engine:
//!
//! * **Galois**: `N x N` lines with `N = p^n`. Logical set `s` of domain `t`
//!   occupies cell `(Π(t, s, w), w)` in way `w`. Replacement is random.
//! * **Conventional**: the baseline set-associative cache; set `s` occupies
//!   physical set `s` in every way. LRU or random replacement.
//! * **Stacked Galois**: `2^k` independent Galois instances selected by the
//!   address bits just above the set index.
//!
//! Lines are tagged with their owning domain and are never shared across
//! domains. On a miss the lowest-way invalid candidate is filled; only when
//! every candidate is valid is a victim chosen.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skew::SkewParams;

pub const DEFAULT_LINE_OFFSET_BITS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("domain {domain} is out of range: this cache admits {limit} domains")]
    DomainOutOfRange { domain: u32, limit: u32 },
    #[error("invalid cache geometry: {0}")]
    Geometry(String),
    #[error("{0} replacement is not available for this cache kind")]
    Replacement(&'static str),
    #[error("probe list is empty")]
    EmptyProbe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheKind {
    Galois,
    Conventional,
    StackedGalois,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    Random,
    Lru,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheConfig {
    pub kind: CacheKind,
    pub num_sets: u32,
    pub num_ways: u32,
    pub skew: Option<SkewParams>,
    pub replacement: Replacement,
    pub seed: u64,
    pub line_offset_bits: u32,
    pub stack_bits: u32,
}

impl CacheConfig {
    /// A square Galois cache over `skew`'s field.
    pub fn galois(skew: SkewParams) -> Self {
        let order = skew.order();
        CacheConfig {
            kind: CacheKind::Galois,
            num_sets: order,
            num_ways: order,
            skew: Some(skew),
            replacement: Replacement::Random,
            seed: 0,
            line_offset_bits: DEFAULT_LINE_OFFSET_BITS,
            stack_bits: 0,
        }
    }

    /// `2^stack_bits` Galois caches side by side.
    pub fn stacked(skew: SkewParams, stack_bits: u32) -> Self {
        CacheConfig { kind: CacheKind::StackedGalois, stack_bits, ..Self::galois(skew) }
    }

    pub fn conventional(num_sets: u32, num_ways: u32, replacement: Replacement) -> Self {
        CacheConfig {
            kind: CacheKind::Conventional,
            num_sets,
            num_ways,
            skew: None,
            replacement,
            seed: 0,
            line_offset_bits: DEFAULT_LINE_OFFSET_BITS,
            stack_bits: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_line_offset_bits(mut self, bits: u32) -> Self {
        self.line_offset_bits = bits;
        self
    }

    pub fn instances(&self) -> u32 {
        1 << self.stack_bits
    }

    /// How many distinct domain ids the cache accepts.
    pub fn domain_limit(&self) -> u32 {
        match (&self.kind, &self.skew) {
            (CacheKind::Conventional, _) => u32::MAX,
            (_, Some(sp)) => sp.order(),
            (_, None) => 0,
        }
    }

    pub fn validate(&self) -> Result<(), CacheError> {
        let geo = |m: String| Err(CacheError::Geometry(m));
        if self.num_sets == 0 || self.num_ways == 0 {
            return geo("sets and ways must be positive".into());
        }
        if self.line_offset_bits >= 32 {
            return geo(format!("line offset of {} bits is too large", self.line_offset_bits));
        }
        if self.stack_bits > 8 {
            return geo(format!("at most 2^8 stacked instances, got 2^{}", self.stack_bits));
        }
        let lines = self.num_sets as u64 * self.num_ways as u64 * self.instances() as u64;
        if lines > 1 << 24 {
            return geo(format!("{lines} lines is more than this simulator holds"));
        }
        match self.kind {
            CacheKind::Conventional => {
                if self.stack_bits != 0 {
                    return geo("only stacked-galois caches have stack bits".into());
                }
            }
            CacheKind::Galois | CacheKind::StackedGalois => {
                let Some(sp) = &self.skew else {
                    return geo("a galois cache needs skew parameters".into());
                };
                if self.num_sets != sp.order() || self.num_ways != sp.order() {
                    return geo(format!(
                        "a galois cache over a field of order {} must be {0} x {0}, got {} x {}",
                        sp.order(),
                        self.num_sets,
                        self.num_ways
                    ));
                }
                if self.replacement == Replacement::Lru {
                    return Err(CacheError::Replacement("lru"));
                }
                if self.kind == CacheKind::Galois && self.stack_bits != 0 {
                    return geo("use the stacked-galois kind for stack bits".into());
                }
            }
        }
        Ok(())
    }

    /// Splits a byte address into tag, set index and (stacked only) instance.
    ///
    /// The line offset is dropped, the next `log2(num_sets)` bits give the set
    /// index, the next `stack_bits` the instance, and the rest is the tag. For
    /// set counts that are not powers of two the same split is done by
    /// division, so every address still maps to exactly one set.
    pub fn decompose_address(&self, addr: u64) -> AddressParts {
        let line = addr >> self.line_offset_bits;
        let sets = self.num_sets as u64;
        let set_index = (line % sets) as u32;
        let rest = line / sets;
        let instance = (rest & (self.instances() as u64 - 1)) as u32;
        let tag = rest >> self.stack_bits;
        AddressParts { tag, set_index, instance }
    }

    /// Inverse of [`decompose_address`](Self::decompose_address), with a
    /// zero line offset.
    pub fn compose_address(&self, parts: AddressParts) -> u64 {
        let rest = (parts.tag << self.stack_bits) | parts.instance as u64;
        (rest * self.num_sets as u64 + parts.set_index as u64) << self.line_offset_bits
    }

    /// Address of the line with tag `tag` in logical set `set`.
    pub fn address_of(&self, tag: u64, set: u32) -> u64 {
        self.compose_address(AddressParts { tag, set_index: set, instance: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AddressParts {
    pub tag: u64,
    pub set_index: u32,
    pub instance: u32,
}

/// Owner and tag of a valid line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidentLine {
    pub domain: u32,
    pub tag: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheLine {
    valid: bool,
    domain: u32,
    tag: u64,
}

impl CacheLine {
    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn resident(&self) -> Option<ResidentLine> {
        self.valid.then_some(ResidentLine { domain: self.domain, tag: self.tag })
    }

    fn holds(&self, domain: u32, tag: u64) -> bool {
        self.valid && self.domain == domain && self.tag == tag
    }
}

/// Result of one access. `victim_line` is simulator-internal; adversaries
/// only ever see `hit` (see [`Cache::observe_probe`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessOutcome {
    pub hit: bool,
    pub instance: u32,
    pub physical_set: u32,
    pub way: u32,
    pub victim_line: Option<ResidentLine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DomainStats {
    pub hits: u64,
    pub misses: u64,
    pub evictions_caused: u64,
    pub self_evictions: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub addr: u64,
    pub hit: bool,
}

/// Simulator state: lines, replacement state, RNG and per-domain counters.
#[derive(Debug, Clone)]
pub struct Cache {
    config: CacheConfig,
    lines: Vec<CacheLine>,
    last_use: Vec<u64>,
    clock: u64,
    rng: ChaCha8Rng,
    stats: BTreeMap<u32, DomainStats>,
    // Galois kinds: set_base[s] = a·s + c, way_shift[t * N + w] = b·t·w.
    set_base: Vec<u32>,
    way_shift: Vec<u32>,
}

impl Cache {
    pub fn new(config: CacheConfig) -> Result<Self, CacheError> {
        config.validate()?;
        let total = (config.num_sets * config.num_ways * config.instances()) as usize;
        let (set_base, way_shift) = match &config.skew {
            Some(sp) if config.kind != CacheKind::Conventional => {
                let n = sp.order();
                let f = sp.field();
                let set_base = (0..n)
                    .map(|s| f.add_raw(f.mul_raw(sp.a().0, s), sp.c().0))
                    .collect();
                let mut way_shift = Vec::with_capacity((n * n) as usize);
                for t in 0..n {
                    let bt = f.mul_raw(sp.b().0, t);
                    way_shift.extend((0..n).map(|w| f.mul_raw(bt, w)));
                }
                (set_base, way_shift)
            }
            _ => (Vec::new(), Vec::new()),
        };
        Ok(Cache {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            lines: vec![CacheLine::default(); total],
            last_use: vec![0; total],
            clock: 0,
            stats: BTreeMap::new(),
            set_base,
            way_shift,
            config,
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn stats(&self) -> &BTreeMap<u32, DomainStats> {
        &self.stats
    }

    pub fn domain_stats(&self, domain: u32) -> DomainStats {
        self.stats.get(&domain).copied().unwrap_or_default()
    }

    #[inline]
    fn index(&self, instance: u32, phys: u32, way: u32) -> usize {
        ((instance * self.config.num_sets + phys) * self.config.num_ways + way) as usize
    }

    #[inline]
    fn physical_set(&self, domain: u32, set: u32, way: u32) -> u32 {
        match self.config.kind {
            CacheKind::Conventional => set,
            _ => {
                let f = self.config.skew.as_ref().expect("validated").field();
                let n = self.config.num_ways;
                f.add_raw(self.set_base[set as usize], self.way_shift[(domain * n + way) as usize])
            }
        }
    }

    /// Simulator-side view of one cell.
    pub fn line(&self, instance: u32, physical_set: u32, way: u32) -> Option<ResidentLine> {
        self.lines.get(self.index(instance, physical_set, way))?.resident()
    }

    /// Number of valid lines owned by `domain`.
    pub fn resident_count(&self, domain: u32) -> usize {
        self.lines.iter().filter(|l| l.valid && l.domain == domain).count()
    }

    pub fn valid_count(&self) -> usize {
        self.lines.iter().filter(|l| l.valid).count()
    }

    fn check_domain(&self, domain: u32) -> Result<(), CacheError> {
        let limit = self.config.domain_limit();
        if domain >= limit {
            return Err(CacheError::DomainOutOfRange { domain, limit });
        }
        Ok(())
    }

    /// One access by `domain` to byte address `addr`.
    pub fn access(&mut self, domain: u32, addr: u64) -> Result<AccessOutcome, CacheError> {
        self.check_domain(domain)?;
        let parts = self.config.decompose_address(addr);
        Ok(self.access_parts(domain, parts))
    }

    fn access_parts(&mut self, domain: u32, parts: AddressParts) -> AccessOutcome {
        self.clock += 1;
        let ways = self.config.num_ways;
        let AddressParts { tag, set_index, instance } = parts;

        let mut first_invalid = None;
        for w in 0..ways {
            let phys = self.physical_set(domain, set_index, w);
            let idx = self.index(instance, phys, w);
            let line = self.lines[idx];
            if line.holds(domain, tag) {
                self.last_use[idx] = self.clock;
                self.stats.entry(domain).or_default().hits += 1;
                return AccessOutcome { hit: true, instance, physical_set: phys, way: w, victim_line: None };
            }
            if !line.valid && first_invalid.is_none() {
                first_invalid = Some(w);
            }
        }

        let way = match first_invalid {
            Some(w) => w,
            None => self.choose_victim(domain, set_index, instance),
        };
        let phys = self.physical_set(domain, set_index, way);
        let idx = self.index(instance, phys, way);
        let victim_line = self.lines[idx].resident();
        self.lines[idx] = CacheLine { valid: true, domain, tag };
        self.last_use[idx] = self.clock;

        let stats = self.stats.entry(domain).or_default();
        stats.misses += 1;
        match victim_line {
            Some(v) if v.domain == domain => stats.self_evictions += 1,
            Some(_) => stats.evictions_caused += 1,
            None => {}
        }
        AccessOutcome { hit: false, instance, physical_set: phys, way, victim_line }
    }

    fn choose_victim(&mut self, domain: u32, set: u32, instance: u32) -> u32 {
        let ways = self.config.num_ways;
        match self.config.replacement {
            Replacement::Random => (self.rng.next_u64() % ways as u64) as u32,
            Replacement::Lru => (0..ways)
                .min_by_key(|&w| {
                    let phys = self.physical_set(domain, set, w);
                    self.last_use[self.index(instance, phys, w)]
                })
                .expect("at least one way"),
        }
    }

    /// Accesses each address in order and reports only hit or miss, which is
    /// all an adversary can time. Probes mutate the cache like any access.
    pub fn observe_probe(&mut self, domain: u32, addrs: &[u64]) -> Result<Vec<ProbeResult>, CacheError> {
        if addrs.is_empty() {
            return Err(CacheError::EmptyProbe);
        }
        self.check_domain(domain)?;
        Ok(addrs
            .iter()
            .map(|&addr| {
                let parts = self.config.decompose_address(addr);
                let hit = self.access_parts(domain, parts).hit;
                ProbeResult { addr, hit }
            })
            .collect())
    }

    /// Invalidates every line. The RNG stream is left where it is, so a
    /// flushed cache does not replay the draws of a fresh one.
    pub fn flush_all(&mut self, reset_stats: bool) {
        self.lines.fill(CacheLine::default());
        self.last_use.fill(0);
        if reset_stats {
            self.stats.clear();
        }
    }
}
