//! Monte Carlo Prime+Probe experiments.
//!
//! Three protocols are scripted against the cache model:
//!
//! * [`AttackKind::BaselinePrimeProbe`]: classic Prime+Probe on a
//!   conventional cache. The adversary fills one set, the victim touches the
//!   same set, and the probe sees the eviction.
//! * [`AttackKind::GaloisPrimeProbe`]: the same attack on a Galois cache. The
//!   victim's fill lands in a uniformly random way of its own set, and only
//!   one of those cells belongs to the adversary's primed set, so the probe
//!   fires with probability `1/N` and its miss count says nothing about which
//!   victim set was touched.
//! * [`AttackKind::Collusion`]: two adversary domains cooperate. The prober
//!   fills the whole cache, the squeezer fills all but one of its own sets so
//!   that each prober set keeps exactly one line, the victim accesses, and the
//!   prober probes everything. A prober set with all `N` lines missing pins the
//!   victim's set through the unique intersection of the layouts.
//!
//! Scheduling is synchronous and favours the attacker. Every trial runs on a
//! fresh cache seeded with `seed + trial_index`, so trials are independent and
//! are run in parallel; aggregation is order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{Cache, CacheConfig, CacheError, CacheKind};
use crate::field::{FieldSpec, GfElement};
use crate::skew::{SkewError, SkewParams};
use crate::stats::{self, ChiSquareResult, Interval};

/// Tag space used for the victim's one-off accesses. Adversary and warm-up
/// tags stay far below it.
const FRESH_TAG_BASE: u64 = 1 << 40;

/// Upper bound on prime passes before giving up.
const MAX_PRIME_PASSES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{attack} needs a {expected:?} cache, got {got:?}")]
    CacheKind { attack: AttackKind, expected: CacheKind, got: CacheKind },
    #[error("{attack} needs {expected} adversary domain(s), got {got}")]
    AdversaryCount { attack: AttackKind, expected: usize, got: usize },
    #[error("domain {0} is used for more than one role")]
    DuplicateDomain(u32),
    #[error("set {set} is out of range for a cache with {sets} sets")]
    SetOutOfRange { set: u32, sets: u32 },
    #[error("victim access probability {0} is not in [0, 1]")]
    Probability(f64),
    #[error("domain {domain} did not settle into its set after {passes} prime passes")]
    PrimeDidNotConverge { domain: u32, passes: usize },
    #[error("field GF(2^{0}) cannot host this attack")]
    Field(u32),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Skew(#[from] SkewError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[serde(rename = "baseline-pp")]
    BaselinePrimeProbe,
    #[serde(rename = "galois-pp")]
    GaloisPrimeProbe,
    Collusion,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::BaselinePrimeProbe => "baseline-pp",
            AttackKind::GaloisPrimeProbe => "galois-pp",
            AttackKind::Collusion => "collusion",
        }
    }

    pub fn detection_definition(self) -> &'static str {
        match self {
            AttackKind::BaselinePrimeProbe | AttackKind::GaloisPrimeProbe => {
                "victim accessed and the adversary's probe of its primed set saw at least one miss"
            }
            AttackKind::Collusion => {
                "victim accessed and exactly one prober set missed on all of its lines, \
                 and that set maps back to the victim's true set"
            }
        }
    }
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Background accesses by an uninvolved domain between protocol steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Noise {
    pub domain: u32,
    /// Uniformly random fresh accesses injected after each step.
    pub accesses_per_step: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackScenario {
    pub kind: AttackKind,
    pub cache: CacheConfig,
    pub victim_domain: u32,
    /// Prime+Probe: `[adversary]`. Collusion: `[prober, squeezer]`.
    pub adversary_domains: Vec<u32>,
    /// Victim's logical set; `None` draws it uniformly per trial.
    pub victim_target_set: Option<u32>,
    /// Set primed by the adversary in the Prime+Probe kinds.
    pub adversary_set: u32,
    /// Squeezer set left unfilled in the collusion attack; `None` picks the
    /// highest index.
    pub unfilled_set: Option<u32>,
    pub trials: u64,
    pub seed: u64,
    pub victim_access_probability: f64,
    pub noise: Option<Noise>,
}

impl AttackScenario {
    /// Classic Prime+Probe against a conventional cache; adversary 1 primes
    /// the victim's set.
    pub fn baseline(cache: CacheConfig, victim_target_set: u32, trials: u64, seed: u64) -> Self {
        AttackScenario {
            kind: AttackKind::BaselinePrimeProbe,
            cache,
            victim_domain: 0,
            adversary_domains: vec![1],
            victim_target_set: Some(victim_target_set),
            adversary_set: victim_target_set,
            unfilled_set: None,
            trials,
            seed,
            victim_access_probability: 1.0,
            noise: None,
        }
    }

    /// Adversary 1 primes its set 0 against victim domain 2.
    pub fn galois_prime_probe(skew: SkewParams, trials: u64, seed: u64) -> Self {
        AttackScenario {
            kind: AttackKind::GaloisPrimeProbe,
            cache: CacheConfig::galois(skew),
            victim_domain: 2,
            adversary_domains: vec![1],
            victim_target_set: Some(0),
            adversary_set: 0,
            unfilled_set: None,
            trials,
            seed,
            victim_access_probability: 1.0,
            noise: None,
        }
    }

    /// Domains 1 (prober) and 0 (squeezer) collude against domain 2.
    pub fn collusion(skew: SkewParams, trials: u64, seed: u64) -> Self {
        AttackScenario {
            kind: AttackKind::Collusion,
            adversary_domains: vec![1, 0],
            ..Self::galois_prime_probe(skew, trials, seed)
        }
    }

    pub fn with_victim_probability(mut self, p: f64) -> Self {
        self.victim_access_probability = p;
        self
    }

    pub fn with_victim_set(mut self, set: Option<u32>) -> Self {
        self.victim_target_set = set;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.cache.validate()?;
        let kind = self.kind;
        let expected_kind = match kind {
            AttackKind::BaselinePrimeProbe => CacheKind::Conventional,
            _ => CacheKind::Galois,
        };
        if self.cache.kind != expected_kind {
            return Err(ScenarioError::CacheKind { attack: kind, expected: expected_kind, got: self.cache.kind });
        }
        let expected_adversaries = if kind == AttackKind::Collusion { 2 } else { 1 };
        if self.adversary_domains.len() != expected_adversaries {
            return Err(ScenarioError::AdversaryCount {
                attack: kind,
                expected: expected_adversaries,
                got: self.adversary_domains.len(),
            });
        }
        let mut domains = vec![self.victim_domain];
        domains.extend(&self.adversary_domains);
        domains.extend(self.noise.map(|n| n.domain));
        let limit = self.cache.domain_limit();
        for (i, &d) in domains.iter().enumerate() {
            if d >= limit {
                return Err(CacheError::DomainOutOfRange { domain: d, limit }.into());
            }
            if domains[..i].contains(&d) {
                return Err(ScenarioError::DuplicateDomain(d));
            }
        }
        let sets = self.cache.num_sets;
        for set in [self.victim_target_set, Some(self.adversary_set), self.unfilled_set]
            .into_iter()
            .flatten()
        {
            if set >= sets {
                return Err(ScenarioError::SetOutOfRange { set, sets });
            }
        }
        if !(0.0..=1.0).contains(&self.victim_access_probability) {
            return Err(ScenarioError::Probability(self.victim_access_probability));
        }
        Ok(())
    }

    fn skew(&self) -> &SkewParams {
        self.cache.skew.as_ref().expect("validated galois scenario")
    }

    /// Detection rate predicted by the layout argument: `activity / N` for
    /// the Galois kinds, `activity` for the conventional baseline when the
    /// adversary primes the victim's set.
    pub fn theoretical_rate(&self) -> Option<f64> {
        let activity = self.victim_access_probability;
        match self.kind {
            AttackKind::BaselinePrimeProbe => match self.victim_target_set {
                Some(s) if s == self.adversary_set => Some(activity),
                Some(_) => Some(0.0),
                None => None,
            },
            _ => Some(activity / self.cache.num_ways as f64),
        }
    }
}

/// What happened in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub victim_active: bool,
    pub victim_set: u32,
    /// The adversary's decision rule triggered.
    pub fired: bool,
    /// Collusion only: the victim set recovered from the probe.
    pub inferred_set: Option<u32>,
    /// Total probe misses seen by the (probing) adversary.
    pub probe_misses: u32,
    /// Simulator-side: way in which the victim's fill displaced an
    /// adversary line, if it did.
    pub eviction_way: Option<u32>,
}

impl TrialRecord {
    fn correct(&self) -> bool {
        self.victim_active && self.fired && self.inferred_set.is_none_or(|s| s == self.victim_set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub attack: AttackKind,
    pub detection_definition: String,
    pub trials: u64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
    /// True positives over all trials.
    pub detection_rate: f64,
    /// 95% Wilson interval for `detection_rate`.
    pub detection_ci: Interval,
    /// False positives over trials where a correct detection was impossible
    /// or did not happen (false positives plus true negatives).
    pub false_positive_rate: f64,
    pub theoretical_rate: Option<f64>,
    pub fired_trials: u64,
    /// Fraction of firing trials that named the right victim set.
    pub correct_given_fired: Option<f64>,
    /// `probe_miss_histogram[k]` = trials whose probe saw `k` misses.
    pub probe_miss_histogram: Vec<u64>,
    /// Galois kinds: per way, trials where the victim displaced an adversary
    /// line in that way.
    pub eviction_way_histogram: Option<Vec<u64>>,
    /// Collusion: `[victim set][inferred set]` over firing trials.
    pub per_set_confusion: Option<Vec<Vec<u64>>>,
}

impl DetectionReport {
    pub fn from_trials(sc: &AttackScenario, records: &[TrialRecord]) -> Self {
        let n = sc.cache.num_sets as usize;
        let ways = sc.cache.num_ways as usize;
        let (mut tp, mut fp, mut fneg, mut tn) = (0u64, 0u64, 0u64, 0u64);
        let mut fired_trials = 0u64;
        let mut correct_fired = 0u64;
        let mut misses_hist: Vec<u64> = Vec::new();
        let mut way_hist = vec![0u64; ways];
        let mut confusion = vec![vec![0u64; n]; n];
        for r in records {
            let correct = r.correct();
            match (r.fired, correct, r.victim_active) {
                (true, true, _) => tp += 1,
                (true, false, _) => fp += 1,
                (false, _, true) => fneg += 1,
                (false, _, false) => tn += 1,
            }
            if r.fired {
                fired_trials += 1;
                if correct {
                    correct_fired += 1;
                }
                if let Some(inferred) = r.inferred_set {
                    confusion[r.victim_set as usize][inferred as usize] += 1;
                }
            }
            let k = r.probe_misses as usize;
            if misses_hist.len() <= k {
                misses_hist.resize(k + 1, 0);
            }
            misses_hist[k] += 1;
            if let Some(w) = r.eviction_way {
                way_hist[w as usize] += 1;
            }
        }
        let trials = records.len() as u64;
        let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let galois = sc.kind != AttackKind::BaselinePrimeProbe;
        DetectionReport {
            attack: sc.kind,
            detection_definition: sc.kind.detection_definition().to_string(),
            trials,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fneg,
            true_negatives: tn,
            detection_rate: rate(tp, trials),
            detection_ci: stats::wilson_interval(tp, trials, stats::Z_95),
            false_positive_rate: rate(fp, fp + tn),
            theoretical_rate: sc.theoretical_rate(),
            fired_trials,
            correct_given_fired: (fired_trials > 0).then(|| rate(correct_fired, fired_trials)),
            probe_miss_histogram: misses_hist,
            eviction_way_histogram: galois.then_some(way_hist),
            per_set_confusion: (sc.kind == AttackKind::Collusion).then_some(confusion),
        }
    }
}

/// Runs every trial of `sc` and returns the per-trial records in trial order.
pub fn run_trials(sc: &AttackScenario) -> Result<Vec<TrialRecord>, ScenarioError> {
    sc.validate()?;
    (0..sc.trials)
        .into_par_iter()
        .map(|i| run_trial(sc, i))
        .collect()
}

/// Runs `sc`, dispatching on its kind.
pub fn run_scenario(sc: &AttackScenario) -> Result<DetectionReport, ScenarioError> {
    let records = run_trials(sc)?;
    Ok(DetectionReport::from_trials(sc, &records))
}

pub fn run_baseline_prime_probe(sc: &AttackScenario) -> Result<DetectionReport, ScenarioError> {
    expect_kind(sc, AttackKind::BaselinePrimeProbe)?;
    run_scenario(sc)
}

pub fn run_galois_prime_probe(sc: &AttackScenario) -> Result<DetectionReport, ScenarioError> {
    expect_kind(sc, AttackKind::GaloisPrimeProbe)?;
    run_scenario(sc)
}

pub fn run_collusion_attack(sc: &AttackScenario) -> Result<DetectionReport, ScenarioError> {
    expect_kind(sc, AttackKind::Collusion)?;
    run_scenario(sc)
}

fn expect_kind(sc: &AttackScenario, kind: AttackKind) -> Result<(), ScenarioError> {
    if sc.kind != kind {
        // The kind decides the cache organization, so report it as such.
        let expected = if kind == AttackKind::BaselinePrimeProbe { CacheKind::Conventional } else { CacheKind::Galois };
        return Err(ScenarioError::CacheKind { attack: kind, expected, got: sc.cache.kind });
    }
    Ok(())
}

/// Per-trial state shared by the protocols.
struct Trial<'a> {
    sc: &'a AttackScenario,
    cache: Cache,
    rng: ChaCha8Rng,
    fresh: u64,
}

impl<'a> Trial<'a> {
    fn new(sc: &'a AttackScenario, index: u64) -> Result<Self, ScenarioError> {
        let seed = sc.seed.wrapping_add(index);
        let cache = Cache::new(sc.cache.clone().with_seed(seed))?;
        // Separate stream for scenario decisions so they do not shift the
        // replacement draws.
        let rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        Ok(Trial { sc, cache, rng, fresh: FRESH_TAG_BASE })
    }

    fn address(&self, tag: u64, set: u32) -> u64 {
        self.cache.config().address_of(tag, set)
    }

    fn fresh_address(&mut self, set: u32) -> u64 {
        self.fresh += 1;
        self.address(self.fresh, set)
    }

    fn noise(&mut self) -> Result<(), ScenarioError> {
        let Some(noise) = self.sc.noise else { return Ok(()) };
        for _ in 0..noise.accesses_per_step {
            let set = self.rng.random_range(0..self.cache.config().num_sets);
            let addr = self.fresh_address(set);
            self.cache.access(noise.domain, addr)?;
        }
        Ok(())
    }

    fn victim_step(&mut self, victim_set: u32) -> Result<(bool, Option<u32>), ScenarioError> {
        let active = self.rng.random_bool(self.sc.victim_access_probability);
        if !active {
            return Ok((false, None));
        }
        let addr = self.fresh_address(victim_set);
        let out = self.cache.access(self.sc.victim_domain, addr)?;
        let evicted_adversary = out
            .victim_line
            .filter(|v| self.sc.adversary_domains.contains(&v.domain))
            .map(|_| out.way);
        Ok((true, evicted_adversary))
    }

    fn pick_victim_set(&mut self) -> u32 {
        match self.sc.victim_target_set {
            Some(s) => s,
            None => self.rng.random_range(0..self.cache.config().num_sets),
        }
    }
}

/// Re-accesses `addrs` until one full pass hits on every line. With random
/// replacement a single pass may displace the domain's own lines, but the
/// number of its resident lines never drops, so the loop terminates.
pub fn prime_until_resident(cache: &mut Cache, domain: u32, addrs: &[u64]) -> Result<usize, ScenarioError> {
    for pass in 1..=MAX_PRIME_PASSES {
        let probe = cache.observe_probe(domain, addrs)?;
        if probe.iter().all(|p| p.hit) {
            return Ok(pass);
        }
    }
    Err(ScenarioError::PrimeDidNotConverge { domain, passes: MAX_PRIME_PASSES })
}

fn run_trial(sc: &AttackScenario, index: u64) -> Result<TrialRecord, ScenarioError> {
    match sc.kind {
        AttackKind::BaselinePrimeProbe | AttackKind::GaloisPrimeProbe => prime_probe_trial(sc, index),
        AttackKind::Collusion => collusion_trial(sc, index),
    }
}

fn prime_probe_trial(sc: &AttackScenario, index: u64) -> Result<TrialRecord, ScenarioError> {
    let mut tr = Trial::new(sc, index)?;
    let adversary = sc.adversary_domains[0];
    let ways = sc.cache.num_ways as u64;
    let victim_set = tr.pick_victim_set();

    if sc.kind == AttackKind::GaloisPrimeProbe {
        // Victim runs for a while first: it fills every one of its sets, which
        // by the per-way bijection occupies every cell exactly once.
        let sets = sc.cache.num_sets;
        for s in 0..sets {
            for tag in 0..ways {
                let addr = tr.address(tag, s);
                tr.cache.access(sc.victim_domain, addr)?;
            }
        }
        tr.noise()?;
    }

    let primed: Vec<u64> = (0..ways).map(|tag| tr.address(tag, sc.adversary_set)).collect();
    prime_until_resident(&mut tr.cache, adversary, &primed)?;
    tr.noise()?;

    let (victim_active, eviction_way) = tr.victim_step(victim_set)?;
    tr.noise()?;

    let probe = tr.cache.observe_probe(adversary, &primed)?;
    let probe_misses = probe.iter().filter(|p| !p.hit).count() as u32;
    Ok(TrialRecord {
        trial: index,
        victim_active,
        victim_set,
        fired: probe_misses > 0,
        inferred_set: None,
        probe_misses,
        eviction_way: if sc.kind == AttackKind::GaloisPrimeProbe { eviction_way } else { None },
    })
}

/// The two-adversary protocol, exposed step by step.
#[derive(Debug, Clone)]
pub struct Collusion {
    skew: SkewParams,
    prober: u32,
    squeezer: u32,
    victim: u32,
    unfilled_set: u32,
}

/// What the prober learns from one full-cache probe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollusionObservation {
    /// Misses per prober set.
    pub misses_per_set: Vec<u32>,
    /// Prober sets in which every line missed.
    pub drained_sets: Vec<u32>,
    /// Victim set implied by the single drained set, if exactly one.
    pub inferred_set: Option<u32>,
}

impl Collusion {
    pub fn new(skew: SkewParams, prober: u32, squeezer: u32, victim: u32, unfilled_set: Option<u32>) -> Self {
        let unfilled_set = unfilled_set.unwrap_or(skew.order() - 1);
        Collusion { skew, prober, squeezer, victim, unfilled_set }
    }

    pub fn from_scenario(sc: &AttackScenario) -> Self {
        Self::new(
            sc.skew().clone(),
            sc.adversary_domains[0],
            sc.adversary_domains[1],
            sc.victim_domain,
            sc.unfilled_set,
        )
    }

    fn order(&self) -> u32 {
        self.skew.order()
    }

    pub fn unfilled_set(&self) -> u32 {
        self.unfilled_set
    }

    /// The way of prober set `s` whose cell survives the squeeze: where it
    /// meets the squeezer's unfilled set.
    pub fn surviving_way(&self, prober_set: u32) -> u32 {
        self.skew
            .solve_intersection_way(
                GfElement(self.prober),
                GfElement(self.squeezer),
                GfElement(prober_set),
                GfElement(self.unfilled_set),
            )
            .expect("distinct domains")
            .0
    }

    /// Step (a): the prober fills every one of its sets. Into an empty cache
    /// with lowest-way fill, line `k` of each set lands in way `k`.
    pub fn prime_all(&self, cache: &mut Cache) -> Result<(), ScenarioError> {
        let n = self.order();
        for s in 0..n {
            let addrs: Vec<u64> = (0..n as u64).map(|tag| cache.config().address_of(tag, s)).collect();
            prime_until_resident(cache, self.prober, &addrs)?;
        }
        Ok(())
    }

    /// Step (b): the squeezer fills all of its sets but one, leaving the
    /// prober one line per set.
    pub fn squeeze(&self, cache: &mut Cache) -> Result<(), ScenarioError> {
        let n = self.order();
        for s in (0..n).filter(|&s| s != self.unfilled_set) {
            let addrs: Vec<u64> = (0..n as u64).map(|tag| cache.config().address_of(tag, s)).collect();
            prime_until_resident(cache, self.squeezer, &addrs)?;
        }
        Ok(())
    }

    /// Step (d): probe every prober set, touching the expected survivor
    /// first so that refills of the drained lines cannot displace it before
    /// it is observed.
    pub fn probe(&self, cache: &mut Cache) -> Result<CollusionObservation, ScenarioError> {
        let n = self.order();
        let mut misses_per_set = Vec::with_capacity(n as usize);
        let mut drained_sets = Vec::new();
        for s in 0..n {
            let survivor = self.surviving_way(s) as u64;
            let order = std::iter::once(survivor).chain((0..n as u64).filter(|&t| t != survivor));
            let addrs: Vec<u64> = order.map(|tag| cache.config().address_of(tag, s)).collect();
            let misses = cache.observe_probe(self.prober, &addrs)?.iter().filter(|p| !p.hit).count() as u32;
            if misses == n {
                drained_sets.push(s);
            }
            misses_per_set.push(misses);
        }
        let inferred_set = match drained_sets[..] {
            [s] => Some(self.infer_victim_set(s)),
            _ => None,
        };
        Ok(CollusionObservation { misses_per_set, drained_sets, inferred_set })
    }

    /// Maps a drained prober set back to the victim set that shares its
    /// surviving cell.
    pub fn infer_victim_set(&self, prober_set: u32) -> u32 {
        let w = GfElement(self.surviving_way(prober_set));
        let phys = self.skew.permute(GfElement(self.prober), GfElement(prober_set), w).expect("in range");
        self.skew.logical_set(GfElement(self.victim), phys, w).expect("in range").0
    }
}

fn collusion_trial(sc: &AttackScenario, index: u64) -> Result<TrialRecord, ScenarioError> {
    let mut tr = Trial::new(sc, index)?;
    let plan = Collusion::from_scenario(sc);
    let victim_set = tr.pick_victim_set();

    plan.prime_all(&mut tr.cache)?;
    tr.noise()?;
    plan.squeeze(&mut tr.cache)?;
    tr.noise()?;
    let (victim_active, eviction_way) = tr.victim_step(victim_set)?;
    tr.noise()?;
    let obs = plan.probe(&mut tr.cache)?;

    Ok(TrialRecord {
        trial: index,
        victim_active,
        victim_set,
        fired: obs.inferred_set.is_some(),
        inferred_set: obs.inferred_set,
        probe_misses: obs.misses_per_set.iter().sum(),
        eviction_way,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub field: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub ci: Interval,
    /// Empirical rate within three binomial standard deviations of theory.
    pub within_3sd: bool,
}

/// Detection rate against GF(2^n) for each `n`, with default moduli and
/// `a = b = 1, c = 0`. Returns an empty table for zero trials.
pub fn sweep_detection_vs_field(
    kind: AttackKind,
    n_range: std::ops::RangeInclusive<u32>,
    trials: u64,
    seed: u64,
    victim_access_probability: f64,
) -> Result<Vec<SweepRow>, ScenarioError> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for n in n_range {
        let field = FieldSpec::binary(n).map_err(|_| ScenarioError::Field(n))?;
        let skew = SkewParams::standard(field);
        let sc = match kind {
            AttackKind::GaloisPrimeProbe => AttackScenario::galois_prime_probe(skew, trials, seed),
            AttackKind::Collusion => AttackScenario::collusion(skew, trials, seed),
            AttackKind::BaselinePrimeProbe => return Err(ScenarioError::CacheKind {
                attack: kind,
                expected: CacheKind::Conventional,
                got: CacheKind::Galois,
            }),
        }
        .with_victim_probability(victim_access_probability);
        if sc.cache.num_sets < 3 {
            return Err(ScenarioError::Field(n));
        }
        let report = run_scenario(&sc)?;
        let theoretical = sc.theoretical_rate().expect("galois kinds have a prediction");
        rows.push(SweepRow {
            n,
            field: field.to_string(),
            theoretical,
            empirical: report.detection_rate,
            ci: report.detection_ci,
            within_3sd: stats::within_sd(report.detection_rate, theoretical, trials, 3.0),
        });
    }
    Ok(rows)
}

/// Runs the Galois Prime+Probe once per victim set and tests whether the
/// adversary's probe miss count depends on the set.
pub fn miss_count_leakage(base: &AttackScenario, trials_per_set: u64) -> Result<(ChiSquareResult, Vec<Vec<u64>>), ScenarioError> {
    expect_kind(base, AttackKind::GaloisPrimeProbe)?;
    let sets = base.cache.num_sets;
    let mut table = Vec::with_capacity(sets as usize);
    for s in 0..sets {
        let sc = AttackScenario {
            victim_target_set: Some(s),
            trials: trials_per_set,
            seed: base.seed.wrapping_add(s as u64 * trials_per_set),
            ..base.clone()
        };
        let mut hist = run_scenario(&sc)?.probe_miss_histogram;
        hist.resize(base.cache.num_ways as usize + 1, 0);
        table.push(hist);
    }
    Ok((stats::chi_square_homogeneity(&table), table))
}
