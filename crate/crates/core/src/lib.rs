//! A multi-domain skewed cache simulator.
//!
//! Each security domain sees the cache through its own layout,
//! `Π(t, s, w) = a·s + b·t·w + c` over a finite field, chosen so that every
//! set of one domain meets every set of every other domain in exactly one
//! cell. The crate provides the field arithmetic, the layout and its
//! exhaustive verifiers, a functional cache model, Monte Carlo Prime+Probe and
//! collusion experiments, and an XOR-gate cost model of the layout circuit.

pub mod field;
pub mod skew;
pub mod cache;
pub mod trace;
pub mod stats;
pub mod attack;
pub mod circuit;
pub mod cli;

pub use cache::{AccessOutcome, Cache, CacheConfig, CacheError, CacheKind, DomainStats, Replacement};
pub use field::{BinaryMatrix, FieldError, FieldSpec, GfElement};
pub use skew::{verify_diagonalization, verify_way_bijection, SkewError, SkewParams};
pub use trace::{Trace, TraceError};
pub use attack::{AttackKind, AttackScenario, DetectionReport, ScenarioError};
pub use circuit::{permutation_cost, CostReport, XorNetwork};
