//! The skewing permutation `Π(t, s, w) = a·s + b·t·w + c` and its verifiers.
//!
//! `t` is a security-domain id, `s` a set index within that domain and `w` a
//! way. Every symbol is a field element, so for two distinct domains the
//! equation `Π(t, s, w) = Π(t', s', w)` is linear in `w` with a nonzero
//! coefficient and has exactly one solution: any set of one domain meets any
//! set of another domain in exactly one (physical set, way) cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldSpec, GfElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkewError {
    #[error("skew constant `{0}` must be non-zero")]
    ZeroConstant(&'static str),
    #[error("domains are equal ({0}); their sets coincide or are disjoint in every way")]
    SameDomain(u32),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Constants of the skewing permutation over a fixed field, with `b·t`
/// precomputed for every domain id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewParams {
    field: FieldSpec,
    a: GfElement,
    b: GfElement,
    c: GfElement,
    bt_cache: Vec<u32>,
    // Multiplicative inverses, filled for fields of order <= INVERSE_TABLE_LIMIT.
    inv_cache: Vec<u32>,
}

const INVERSE_TABLE_LIMIT: u32 = 1 << 16;

impl SkewParams {
    pub fn new(field: FieldSpec, a: u32, b: u32, c: u32) -> Result<Self, SkewError> {
        let a = field.element(a)?;
        let b = field.element(b)?;
        let c = field.element(c)?;
        if a.0 == 0 {
            return Err(SkewError::ZeroConstant("a"));
        }
        if b.0 == 0 {
            return Err(SkewError::ZeroConstant("b"));
        }
        let bt_cache = (0..field.order()).map(|t| field.mul_raw(b.0, t)).collect();
        let inv_cache = if field.order() <= INVERSE_TABLE_LIMIT {
            (0..field.order())
                .map(|x| if x == 0 { 0 } else { field.inv_raw(x) })
                .collect()
        } else {
            Vec::new()
        };
        Ok(SkewParams { field, a, b, c, bt_cache, inv_cache })
    }

    /// `a = 1, b = 1, c = 0`.
    pub fn standard(field: FieldSpec) -> Self {
        Self::new(field, 1, 1, 0).expect("unit constants are valid in every field")
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn a(&self) -> GfElement {
        self.a
    }

    pub fn b(&self) -> GfElement {
        self.b
    }

    pub fn c(&self) -> GfElement {
        self.c
    }

    /// Number of sets, ways and admissible domains.
    pub fn order(&self) -> u32 {
        self.field.order()
    }

    /// The precomputed `b·t`.
    pub fn bt(&self, t: GfElement) -> Result<GfElement, SkewError> {
        self.field.element(t.0)?;
        Ok(GfElement(self.bt_cache[t.0 as usize]))
    }

    /// Physical set index of logical set `s` at way `w` for domain `t`.
    pub fn permute(&self, t: GfElement, s: GfElement, w: GfElement) -> Result<GfElement, SkewError> {
        for v in [t, s, w] {
            self.field.element(v.0)?;
        }
        Ok(GfElement(self.permute_raw(t.0, s.0, w.0)))
    }

    #[inline]
    pub(crate) fn permute_raw(&self, t: u32, s: u32, w: u32) -> u32 {
        let f = &self.field;
        let as_ = f.mul_raw(self.a.0, s);
        let btw = f.mul_raw(self.bt_cache[t as usize], w);
        f.add_raw(f.add_raw(as_, btw), self.c.0)
    }

    /// `Π(t, s, w)` for every way `w`, indexed by way.
    pub fn permute_all_ways(&self, t: GfElement, s: GfElement) -> Result<Vec<GfElement>, SkewError> {
        self.field.element(t.0)?;
        self.field.element(s.0)?;
        Ok((0..self.order())
            .map(|w| GfElement(self.permute_raw(t.0, s.0, w)))
            .collect())
    }

    /// The unique way where set `s` of domain `t` meets set `s2` of domain
    /// `t2`: `w = a·(s2 − s)·b⁻¹·(t − t2)⁻¹`.
    pub fn solve_intersection_way(
        &self,
        t: GfElement,
        t2: GfElement,
        s: GfElement,
        s2: GfElement,
    ) -> Result<GfElement, SkewError> {
        for v in [t, t2, s, s2] {
            self.field.element(v.0)?;
        }
        if t == t2 {
            return Err(SkewError::SameDomain(t.0));
        }
        Ok(GfElement(self.solve_raw(t.0, t2.0, s.0, s2.0)))
    }

    #[inline]
    fn inverse(&self, x: u32) -> u32 {
        match self.inv_cache.get(x as usize) {
            Some(&inv) => inv,
            None => self.field.inv_raw(x),
        }
    }

    #[inline]
    fn solve_raw(&self, t: u32, t2: u32, s: u32, s2: u32) -> u32 {
        let f = &self.field;
        let num = f.mul_raw(self.a.0, f.sub_raw(s2, s));
        let den = f.mul_raw(self.b.0, f.sub_raw(t, t2));
        f.mul_raw(num, self.inverse(den))
    }

    /// Inverse of `permute` in its set argument: the logical set of domain
    /// `t` that occupies physical set `phys` at way `w`.
    pub fn logical_set(&self, t: GfElement, phys: GfElement, w: GfElement) -> Result<GfElement, SkewError> {
        for v in [t, phys, w] {
            self.field.element(v.0)?;
        }
        let f = &self.field;
        let btw = f.mul_raw(self.bt_cache[t.0 as usize], w.0);
        let rest = f.sub_raw(f.sub_raw(phys.0, btw), self.c.0);
        Ok(GfElement(f.mul_raw(rest, self.inverse(self.a.0))))
    }
}

/// Anything that maps (domain, set, way) to a physical set over a square
/// `order x order` cache. The verifiers are written against this trait so
/// that a deliberately broken layout can be fed through them.
pub trait SetLayout {
    fn order(&self) -> u32;

    fn physical_set(&self, t: u32, s: u32, w: u32) -> u32;

    /// Closed-form prediction of the intersection way, if the layout has one.
    fn predicted_intersection(&self, _t: u32, _t2: u32, _s: u32, _s2: u32) -> Option<u32> {
        None
    }
}

impl SetLayout for SkewParams {
    fn order(&self) -> u32 {
        self.field.order()
    }

    fn physical_set(&self, t: u32, s: u32, w: u32) -> u32 {
        self.permute_raw(t, s, w)
    }

    fn predicted_intersection(&self, t: u32, t2: u32, s: u32, s2: u32) -> Option<u32> {
        (t != t2).then(|| self.solve_raw(t, t2, s, s2))
    }
}

/// The same formula evaluated in the integer ring `Z/2^n` instead of
/// GF(2^n). For n > 1 the ring has zero divisors, so diagonalization fails;
/// this layout is the negative control for the verifiers.
#[derive(Debug, Clone, Copy)]
pub struct RingSkew {
    pub n: u32,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

impl SetLayout for RingSkew {
    fn order(&self) -> u32 {
        1 << self.n
    }

    fn physical_set(&self, t: u32, s: u32, w: u32) -> u32 {
        let mask = (1u64 << self.n) - 1;
        let v = self.a as u64 * s as u64 + self.b as u64 * t as u64 * w as u64 + self.c as u64;
        (v & mask) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalViolation {
    pub t: u32,
    pub t2: u32,
    pub s: u32,
    pub s2: u32,
    /// Every way where the two sets meet; correct layouts have exactly one.
    pub ways: Vec<u32>,
    /// Closed-form witness, when it disagrees with the enumeration.
    pub predicted: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BijectionViolation {
    pub t: u32,
    pub w: u32,
    /// Physical sets hit by more than one logical set.
    pub collisions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport<V> {
    pub checked: u64,
    pub violations: Vec<V>,
}

impl<V> VerificationReport<V> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively checks that every set of every domain meets every set of
/// every other domain in exactly one way, and that the closed-form solution
/// names that way.
pub fn verify_diagonalization<L: SetLayout + ?Sized>(layout: &L) -> VerificationReport<DiagonalViolation> {
    let n = layout.order() as usize;
    // placement[t][s * n + w] = physical set of (t, s, w)
    let placement: Vec<Vec<u32>> = (0..n as u32)
        .map(|t| {
            let mut v = Vec::with_capacity(n * n);
            for s in 0..n as u32 {
                v.extend((0..n as u32).map(|w| layout.physical_set(t, s, w)));
            }
            v
        })
        .collect();
    // occupants[t]: for each (w, physical set), the logical sets of t placed
    // there, stored as offsets into a flat list.
    let occupants: Vec<(Vec<usize>, Vec<u32>)> = placement
        .iter()
        .map(|table| {
            let mut starts = vec![0usize; n * n + 1];
            for s in 0..n {
                for w in 0..n {
                    starts[w * n + table[s * n + w] as usize + 1] += 1;
                }
            }
            for i in 0..n * n {
                starts[i + 1] += starts[i];
            }
            let mut fill = starts.clone();
            let mut members = vec![0u32; n * n];
            for s in 0..n {
                for w in 0..n {
                    let slot = w * n + table[s * n + w] as usize;
                    members[fill[slot]] = s as u32;
                    fill[slot] += 1;
                }
            }
            (starts, members)
        })
        .collect();

    let mut checked = 0u64;
    let mut violations = Vec::new();
    let mut meetings = vec![0u32; n];
    let mut first_way = vec![0u32; n];
    for t in 0..n {
        for t2 in (0..n).filter(|&t2| t2 != t) {
            let (starts, members) = &occupants[t2];
            for s in 0..n {
                meetings.fill(0);
                for w in 0..n {
                    let slot = w * n + placement[t][s * n + w] as usize;
                    for &s2 in &members[starts[slot]..starts[slot + 1]] {
                        if meetings[s2 as usize] == 0 {
                            first_way[s2 as usize] = w as u32;
                        }
                        meetings[s2 as usize] += 1;
                    }
                }
                for s2 in 0..n {
                    checked += 1;
                    let (t, t2, s, s2) = (t as u32, t2 as u32, s as u32, s2 as u32);
                    let predicted = layout.predicted_intersection(t, t2, s, s2);
                    let unique = meetings[s2 as usize] == 1;
                    let agrees = predicted.is_none_or(|p| p == first_way[s2 as usize]);
                    if !(unique && agrees) {
                        let ways = (0..n as u32)
                            .filter(|&w| {
                                placement[t as usize][(s * n as u32 + w) as usize]
                                    == placement[t2 as usize][(s2 * n as u32 + w) as usize]
                            })
                            .collect();
                        violations.push(DiagonalViolation { t, t2, s, s2, ways, predicted });
                    }
                }
            }
        }
    }
    VerificationReport { checked, violations }
}

/// Exhaustively checks that `s -> Π(t, s, w)` is a permutation for every
/// domain and way.
pub fn verify_way_bijection<L: SetLayout + ?Sized>(layout: &L) -> VerificationReport<BijectionViolation> {
    let order = layout.order();
    let mut checked = 0u64;
    let mut violations = Vec::new();
    let mut seen = vec![0u32; order as usize];
    for t in 0..order {
        for w in 0..order {
            checked += 1;
            seen.iter_mut().for_each(|c| *c = 0);
            for s in 0..order {
                seen[layout.physical_set(t, s, w) as usize] += 1;
            }
            let collisions: Vec<u32> = (0..order).filter(|&p| seen[p as usize] > 1).collect();
            if !collisions.is_empty() {
                violations.push(BijectionViolation { t, w, collisions });
            }
        }
    }
    VerificationReport { checked, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u32) -> GfElement {
        GfElement(v)
    }

    fn gf4() -> SkewParams {
        SkewParams::standard(FieldSpec::binary(2).unwrap())
    }

    #[test]
    fn permute_examples() {
        let sp = gf4();
        for s in 0..4 {
            for w in 0..4 {
                assert_eq!(sp.permute(e(0), e(s), e(w)).unwrap(), e(s));
            }
        }
        for w in 0..4 {
            assert_eq!(sp.permute(e(1), e(0), e(w)).unwrap(), e(w));
        }
        assert_eq!(sp.permute(e(2), e(1), e(3)).unwrap(), e(0));
        assert!(sp.permute(e(4), e(0), e(0)).is_err());
    }

    #[test]
    fn permute_all_ways_examples() {
        let sp = gf4();
        let v = |t, s| -> Vec<u32> { sp.permute_all_ways(e(t), e(s)).unwrap().into_iter().map(|x| x.0).collect() };
        assert_eq!(v(0, 2), vec![2, 2, 2, 2]);
        assert_eq!(v(1, 0), vec![0, 1, 2, 3]);
        assert_eq!(v(3, 0), vec![0, 3, 1, 2]);
    }

    #[test]
    fn intersection_examples() {
        let sp = gf4();
        assert_eq!(sp.solve_intersection_way(e(1), e(3), e(2), e(2)).unwrap(), e(0));
        assert_eq!(sp.solve_intersection_way(e(1), e(3), e(2), e(1)).unwrap(), e(2));
        let gf7 = SkewParams::new(FieldSpec::prime(7).unwrap(), 2, 3, 1).unwrap();
        let brute: Vec<u32> = (0..7)
            .filter(|&w| gf7.permute_raw(1, 0, w) == gf7.permute_raw(4, 5, w))
            .collect();
        assert_eq!(brute, vec![2]);
        assert_eq!(gf7.solve_intersection_way(e(1), e(4), e(0), e(5)).unwrap(), e(2));
        assert_eq!(sp.solve_intersection_way(e(2), e(2), e(0), e(1)), Err(SkewError::SameDomain(2)));
    }

    #[test]
    fn zero_constants_rejected() {
        let f = FieldSpec::binary(2).unwrap();
        assert_eq!(SkewParams::new(f, 0, 1, 0), Err(SkewError::ZeroConstant("a")));
        assert_eq!(SkewParams::new(f, 1, 0, 0), Err(SkewError::ZeroConstant("b")));
        assert!(SkewParams::new(f, 1, 1, 4).is_err());
    }

    #[test]
    fn verifier_examples() {
        let r = verify_diagonalization(&gf4());
        assert_eq!(r.checked, 192);
        assert!(r.holds());
        let r = verify_diagonalization(&SkewParams::standard(FieldSpec::binary(3).unwrap()));
        assert_eq!(r.checked, 3584);
        assert!(r.holds());
        let gf7 = SkewParams::new(FieldSpec::prime(7).unwrap(), 3, 5, 2).unwrap();
        assert!(verify_diagonalization(&gf7).holds());

        let b = verify_way_bijection(&gf4());
        assert_eq!(b.checked, 16);
        assert!(b.holds());
        let sp = SkewParams::new(FieldSpec::binary(4).unwrap(), 7, 5, 9).unwrap();
        let b = verify_way_bijection(&sp);
        assert_eq!(b.checked, 256);
        assert!(b.holds());
    }

    #[test]
    fn ring_layout_violates() {
        let ring = RingSkew { n: 2, a: 1, b: 1, c: 0 };
        let r = verify_diagonalization(&ring);
        assert!(!r.violations.is_empty());
        // t = 2, t' = 0: 2w mod 4 only reaches even sets.
        assert!(r.violations.iter().any(|v| v.t == 2 && v.t2 == 0 && v.ways.len() != 1));
    }

    #[test]
    fn domain_zero_is_unskewed() {
        let sp = SkewParams::new(FieldSpec::binary(3).unwrap(), 5, 3, 0).unwrap();
        for s in 0..8 {
            let expected = sp.field().mul(e(5), e(s)).unwrap();
            for w in 0..8 {
                assert_eq!(sp.permute(e(0), e(s), e(w)).unwrap(), expected);
            }
        }
    }

    #[test]
    fn logical_set_inverts_permute() {
        let sp = SkewParams::new(FieldSpec::binary(3).unwrap(), 3, 6, 5).unwrap();
        for t in 0..8 {
            for s in 0..8 {
                for w in 0..8 {
                    let phys = sp.permute(e(t), e(s), e(w)).unwrap();
                    assert_eq!(sp.logical_set(e(t), phys, e(w)).unwrap(), e(s));
                }
            }
        }
    }
}
