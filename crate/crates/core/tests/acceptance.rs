//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use galoiscache::attack::{self, AttackScenario};
use galoiscache::cache::{CacheConfig, Replacement};
use galoiscache::circuit::{self, matrix_to_network, unreduced_serial_depth, Schedule};
use galoiscache::field::{format_poly, is_irreducible, FieldSpec, GfElement, STANDARD_MODULI};
use galoiscache::skew::{verify_diagonalization, verify_way_bijection, RingSkew, SetLayout, SkewParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binomial standard deviations allowed around a theoretical rate.
const SD_WINDOW: f64 = 3.0;
/// Significance level below which the miss-count distribution leaks.
const CHI_SQUARE_ALPHA: f64 = 0.01;
const RATE_TRIALS: u64 = 100_000;
const BASELINE_TRIALS: u64 = 1_000;
const RANDOM_SKEWS_PER_FIELD: usize = 10;
const LAYOUT_BUDGET: Duration = Duration::from_secs(60);
const ATTACK_BUDGET_PER_FIELD: Duration = Duration::from_secs(60);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn binary(n: u32) -> FieldSpec {
    let m = STANDARD_MODULI.iter().find(|(d, _)| *d == n).map(|&(_, m)| m);
    FieldSpec::new(2, n, m).unwrap()
}

/// Defaults plus seeded random (a, b, c) for GF(2^2)..GF(2^6).
fn layout_sweep() -> Vec<SkewParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for n in 2..=6 {
        let f = binary(n);
        out.push(SkewParams::standard(f));
        for _ in 0..RANDOM_SKEWS_PER_FIELD {
            let q = f.order();
            let (a, b, c) = (rng.random_range(1..q), rng.random_range(1..q), rng.random_range(0..q));
            out.push(SkewParams::new(f, a, b, c).unwrap());
        }
    }
    out
}

fn c1_diagonalization() -> Outcome {
    let start = Instant::now();
    let sweep = layout_sweep();
    let mut bad = Vec::new();
    let mut checked = 0;
    for sp in &sweep {
        let r = verify_diagonalization(sp);
        checked += r.checked;
        if !r.holds() {
            bad.push(format!("{} a={} b={} c={}", sp.field(), sp.a().0, sp.b().0, sp.c().0));
        }
    }
    let elapsed = start.elapsed();
    let control = verify_diagonalization(&RingSkew { n: 2, a: 1, b: 1, c: 0 });
    outcome(
        bad.is_empty() && !control.holds() && elapsed < LAYOUT_BUDGET,
        format!(
            "{} layouts, {checked} tuples, failing {bad:?}, {:.1?}; Z/4 control: {} violations",
            sweep.len(),
            elapsed,
            control.violations.len()
        ),
    )
}

fn c2_bijection() -> Outcome {
    let sweep = layout_sweep();
    let bad = sweep.iter().filter(|sp| !verify_way_bijection(*sp).holds()).count();
    let control = verify_way_bijection(&RingSkew { n: 2, a: 2, b: 1, c: 0 });
    outcome(
        bad == 0 && !control.holds(),
        format!("{} layouts, {bad} with violations; Z/4 with a=2 control: {} violations", sweep.len(), control.violations.len()),
    )
}

fn c3_intersection_oracle() -> Outcome {
    let mut fields: Vec<FieldSpec> = [2, 3, 5, 7, 11, 13].iter().map(|&p| FieldSpec::prime(p).unwrap()).collect();
    fields.extend((2..=4).map(binary));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tuples = 0u64;
    let mut mismatches = Vec::new();
    for f in &fields {
        let q = f.order();
        let mut skews = vec![SkewParams::standard(*f)];
        for _ in 0..3 {
            let (a, b, c) = (rng.random_range(1..q), rng.random_range(1..q), rng.random_range(0..q));
            skews.push(SkewParams::new(*f, a, b, c).unwrap());
        }
        for sp in &skews {
            for t in 0..q {
                for t2 in (0..q).filter(|&t2| t2 != t) {
                    for s in 0..q {
                        for s2 in 0..q {
                            tuples += 1;
                            let brute: Vec<u32> =
                                (0..q).filter(|&w| sp.physical_set(t, s, w) == sp.physical_set(t2, s2, w)).collect();
                            let solved = sp.solve_intersection_way(GfElement(t), GfElement(t2), GfElement(s), GfElement(s2));
                            if brute.len() != 1 || solved.map(|w| w.0).ok() != Some(brute[0]) {
                                mismatches.push((f.to_string(), t, t2, s, s2));
                            }
                        }
                    }
                }
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{} fields, {tuples} tuples, first mismatches {:?}", fields.len(), &mismatches[..mismatches.len().min(3)]))
}

fn rate_line(n: u32, r: &attack::DetectionReport, elapsed: Duration) -> (bool, String) {
    let expected = 1.0 / f64::from(1u32 << n);
    let ok = galoiscache::stats::within_sd(r.detection_rate, expected, r.trials, SD_WINDOW);
    let sd = galoiscache::stats::binomial_sd(expected, r.trials);
    (
        ok && elapsed < ATTACK_BUDGET_PER_FIELD,
        format!("n={n}: {:.5} vs {expected:.5} ({:+.2} sd, {elapsed:.1?})", r.detection_rate, (r.detection_rate - expected) / sd),
    )
}

fn c4_galois_prime_probe() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 2..=4 {
        let start = Instant::now();
        let sc = AttackScenario::galois_prime_probe(SkewParams::standard(binary(n)), RATE_TRIALS, 40 + n as u64);
        let r = attack::run_galois_prime_probe(&sc).unwrap();
        let (ok, line) = rate_line(n, &r, start.elapsed());
        pass &= ok && r.false_positives == 0;
        parts.push(line);
    }
    outcome(pass, parts.join("; "))
}

fn c5_collusion() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 2..=3 {
        let start = Instant::now();
        let sc = AttackScenario::collusion(SkewParams::standard(binary(n)), RATE_TRIALS, 50 + n as u64).with_victim_set(None);
        let r = attack::run_collusion_attack(&sc).unwrap();
        let (ok, line) = rate_line(n, &r, start.elapsed());
        let idle = attack::run_collusion_attack(&AttackScenario { trials: 10_000, ..sc.clone().with_victim_probability(0.0) }).unwrap();
        let inference_exact = r.correct_given_fired == Some(1.0);
        pass &= ok && inference_exact && r.false_positive_rate == 0.0 && idle.false_positive_rate == 0.0;
        parts.push(format!(
            "{line}, correct|fired {:?}, fp {} (idle fp {})",
            r.correct_given_fired, r.false_positive_rate, idle.false_positive_rate
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c6_baseline() -> Outcome {
    let cache = CacheConfig::conventional(4, 4, Replacement::Lru);
    let r = attack::run_baseline_prime_probe(&AttackScenario::baseline(cache, 0, BASELINE_TRIALS, 6)).unwrap();
    outcome(r.detection_rate == 1.0, format!("4x4 LRU, {} trials: rate {}", r.trials, r.detection_rate))
}

fn c7_leakage() -> Outcome {
    let base = AttackScenario::galois_prime_probe(SkewParams::standard(binary(2)), RATE_TRIALS, 70);
    let (chi, table) = attack::miss_count_leakage(&base, RATE_TRIALS).unwrap();
    outcome(
        chi.p_value > CHI_SQUARE_ALPHA,
        format!("GF(4): chi2 {:.3}, dof {}, p {:.4}; rows {table:?}", chi.statistic, chi.degrees_of_freedom, chi.p_value),
    )
}

fn primes_to(limit: u32) -> Vec<u32> {
    (2..=limit).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn axioms_hold(f: &FieldSpec) -> bool {
    let e = GfElement;
    let q = f.order();
    let zero = e(0);
    let one = e(1);
    for x in 0..q {
        let x = e(x);
        if f.add(x, zero).unwrap() != x || f.mul(x, one).unwrap() != x || f.add(x, f.neg(x).unwrap()).unwrap() != zero {
            return false;
        }
        if x != zero && f.mul(x, f.inv(x).unwrap()).unwrap() != one {
            return false;
        }
        for y in 0..q {
            let y = e(y);
            let xy = f.mul(x, y).unwrap();
            if f.add(x, y).unwrap() != f.add(y, x).unwrap() || xy != f.mul(y, x).unwrap() {
                return false;
            }
            if x != zero && y != zero && xy == zero {
                return false;
            }
            for z in 0..q {
                let z = e(z);
                if f.mul(xy, z).unwrap() != f.mul(x, f.mul(y, z).unwrap()).unwrap()
                    || f.add(f.add(x, y).unwrap(), z).unwrap() != f.add(x, f.add(y, z).unwrap()).unwrap()
                    || f.mul(x, f.add(y, z).unwrap()).unwrap() != f.add(xy, f.mul(x, z).unwrap()).unwrap()
                {
                    return false;
                }
            }
        }
    }
    true
}

fn c8_field_arithmetic() -> Outcome {
    let mut fields: Vec<FieldSpec> = (1..=8).map(|n| FieldSpec::binary(n).unwrap()).collect();
    fields.extend(primes_to(256).into_iter().map(|p| FieldSpec::prime(p).unwrap()));
    let failing: Vec<String> = fields.iter().filter(|f| !axioms_hold(f)).map(|f| f.to_string()).collect();
    let table_ok = STANDARD_MODULI.iter().all(|&(n, m)| is_irreducible(n, m) == Ok(true));
    let encoding = format_poly(42);
    outcome(
        failing.is_empty() && table_ok && encoding == "x^5+x^3+x",
        format!("{} fields, failing {failing:?}; standard moduli irreducible: {table_ok}; 42 = {encoding}", fields.len()),
    )
}

fn c9_circuit() -> Outcome {
    let mut mismatches = 0u64;
    let mut depth_violations = Vec::new();
    for n in 2..=8 {
        let f = FieldSpec::binary(n).unwrap();
        for k in f.elements() {
            let m = f.const_mul_matrix(k).unwrap();
            for schedule in [Schedule::Balanced, Schedule::Serial] {
                let net = matrix_to_network(&m, schedule);
                mismatches += f.elements().filter(|&x| net.evaluate(x.0) != f.mul(k, x).unwrap().0).count() as u64;
            }
            let d = unreduced_serial_depth(&f, k);
            if d > n - 1 {
                depth_violations.push((n, k.0, d));
            }
        }
    }
    let emit_all = |n: u32| {
        let (_, nets) = circuit::permutation_cost(&SkewParams::standard(FieldSpec::binary(n).unwrap())).unwrap();
        nets.iter().enumerate().map(|(w, net)| circuit::emit_netlist(net, &format!("mul_w{w}"))).collect::<Vec<_>>()
    };
    let deterministic = (2..=6).all(|n| emit_all(n) == emit_all(n));
    outcome(
        mismatches == 0 && depth_violations.is_empty() && deterministic,
        format!("GF(2^2)..GF(2^8): {mismatches} mismatches, depth violations {depth_violations:?}, netlists deterministic: {deterministic}"),
    )
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = galoiscache::cli::run(std::iter::once("galoiscache").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

fn strip_timestamp(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("generated_at_unix");
    v
}

fn c10_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    std::fs::write(&trace, "0 R 0x0\n1 R 0x40\n2 W 0x1000\n0 R 0x0\n1 R 0x80\n2 R 0x1000\n").unwrap();
    let trace = trace.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["verify", "--n", "3"],
        vec!["simulate", trace, "--n", "2", "--seed", "9"],
        vec!["attack", "baseline-pp", "--trials", "200", "--seed", "1"],
        vec!["attack", "galois-pp", "--n", "3", "--trials", "2000", "--seed", "2", "--victim-set", "random"],
        vec!["attack", "collusion", "--n", "2", "--trials", "2000", "--seed", "3", "--victim-set", "random"],
        vec!["attack", "sweep", "--trials", "500", "--seed", "4"],
        vec!["cost", "--n", "4"],
    ];
    let mut failing = Vec::new();
    for cmd in &commands {
        let mut plain = cmd.clone();
        plain.push("--no-timestamp");
        let (c1, a) = cli(&plain);
        let (c2, b) = cli(&plain);
        let (c3, stamped) = cli(cmd);
        let ok = c1 == 0 && c2 == 0 && c3 == 0 && a == b && strip_timestamp(&stamped) == strip_timestamp(&a);
        if !ok {
            failing.push(cmd.join(" "));
        }
    }
    outcome(failing.is_empty(), format!("{} commands, failing {failing:?}", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 diagonalization", c1_diagonalization),
        ("2 per-way bijection", c2_bijection),
        ("3 intersection oracle", c3_intersection_oracle),
        ("4 galois prime+probe rate", c4_galois_prime_probe),
        ("5 collusion attack", c5_collusion),
        ("6 baseline contrast", c6_baseline),
        ("7 leakage nullity", c7_leakage),
        ("8 field arithmetic", c8_field_arithmetic),
        ("9 circuit cost", c9_circuit),
        ("10 reproducibility", c10_reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
