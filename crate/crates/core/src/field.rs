//! Exact arithmetic in prime fields GF(p) and binary extension fields GF(2^n).
//!
//! Elements of GF(2^n) are stored as little-endian coefficient bit-vectors:
//! bit `i` of the value is the coefficient of `x^i`. Under this encoding the
//! set index `42 = 0b101010` is the polynomial `x^5 + x^3 + x`, addition is
//! XOR and multiplication is carry-less multiplication reduced by the modulus.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest extension degree accepted for binary fields.
pub const MAX_BINARY_DEGREE: u32 = 16;

/// Largest prime accepted for prime fields.
pub const MAX_PRIME: u32 = 1 << 20;

/// Reducing polynomials for GF(2^2)..GF(2^7).
///
/// `x^2 + x + 1` is the only irreducible quadratic; the rest are the
/// low-weight trinomials usually quoted for cache geometries 8x8 to 128x128.
pub const STANDARD_MODULI: [(u32, u32); 6] = [
    (2, 0b111),
    (3, 0b1011),
    (4, 0b1_0011),
    (5, 0b10_0101),
    (6, 0b100_0011),
    (7, 0b1000_0011),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("element {value} is out of range for a field of order {order}")]
    OutOfRange { value: u32, order: u32 },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} exceeds the supported maximum {MAX_PRIME}")]
    PrimeTooLarge(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("GF({p}^{n}) is not supported: extension fields are only available for p = 2")]
    UnsupportedExtension { p: u32, n: u32 },
    #[error("binary extension degree {0} exceeds the supported maximum {MAX_BINARY_DEGREE}")]
    DegreeTooLarge(u32),
    #[error("modulus {modulus:#b} does not have degree {n}")]
    DegreeMismatch { modulus: u32, n: u32 },
    #[error("modulus {0:#b} is reducible over GF(2)")]
    Reducible(u32),
    #[error("operation requires a field of characteristic 2")]
    NotBinary,
}

/// A field element. Its meaning depends on the [`FieldSpec`] it is used with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GfElement(pub u32);

impl GfElement {
    pub const ZERO: GfElement = GfElement(0);
    pub const ONE: GfElement = GfElement(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }
}

impl From<u32> for GfElement {
    fn from(v: u32) -> Self {
        GfElement(v)
    }
}

impl fmt::Display for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite field GF(p^n).
///
/// For `n == 1` the field is the integers modulo the prime `p` and `modulus`
/// is unused (stored as 0). For `p == 2, n > 1` the modulus is an irreducible
/// polynomial of degree exactly `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u32,
    n: u32,
    modulus: u32,
    order: u32,
}

impl FieldSpec {
    /// Builds GF(p^n), validating every invariant. `modulus` is only
    /// consulted for binary extension fields; `None` selects
    /// [`default_modulus`].
    pub fn new(p: u32, n: u32, modulus: Option<u32>) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if n == 1 {
            return Self::prime(p);
        }
        if p != 2 {
            return Err(FieldError::UnsupportedExtension { p, n });
        }
        match modulus {
            Some(m) => Self::binary_with_modulus(n, m),
            None => Self::binary(n),
        }
    }

    /// The prime field GF(p).
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(FieldError::PrimeTooLarge(p));
        }
        Ok(FieldSpec { p, n: 1, modulus: 0, order: p })
    }

    /// GF(2^n) with the default reducing polynomial. `n == 1` yields GF(2).
    pub fn binary(n: u32) -> Result<Self, FieldError> {
        if n == 1 {
            return Self::prime(2);
        }
        let modulus = default_modulus(n)?;
        Self::binary_with_modulus(n, modulus)
    }

    /// GF(2^n) reduced by `modulus`, which must be irreducible of degree `n`.
    pub fn binary_with_modulus(n: u32, modulus: u32) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if n > MAX_BINARY_DEGREE {
            return Err(FieldError::DegreeTooLarge(n));
        }
        if n == 1 {
            return Self::prime(2);
        }
        if !is_irreducible(n, modulus)? {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(FieldSpec { p: 2, n, modulus, order: 1 << n })
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.n
    }

    /// The reducing polynomial; 0 for prime fields.
    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, `p^n`.
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// True when addition is XOR (any field of characteristic 2).
    #[inline]
    pub fn is_binary(&self) -> bool {
        self.p == 2
    }

    /// Validates that `v` is an element of this field.
    pub fn element(&self, v: u32) -> Result<GfElement, FieldError> {
        if v < self.order {
            Ok(GfElement(v))
        } else {
            Err(FieldError::OutOfRange { value: v, order: self.order })
        }
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = GfElement> {
        (0..self.order).map(GfElement)
    }

    pub fn add(&self, x: GfElement, y: GfElement) -> Result<GfElement, FieldError> {
        self.element(x.0)?;
        self.element(y.0)?;
        Ok(GfElement(self.add_raw(x.0, y.0)))
    }

    pub fn sub(&self, x: GfElement, y: GfElement) -> Result<GfElement, FieldError> {
        self.element(x.0)?;
        self.element(y.0)?;
        Ok(GfElement(self.sub_raw(x.0, y.0)))
    }

    pub fn neg(&self, x: GfElement) -> Result<GfElement, FieldError> {
        self.element(x.0)?;
        Ok(GfElement(self.sub_raw(0, x.0)))
    }

    pub fn mul(&self, x: GfElement, y: GfElement) -> Result<GfElement, FieldError> {
        self.element(x.0)?;
        self.element(y.0)?;
        Ok(GfElement(self.mul_raw(x.0, y.0)))
    }

    pub fn inv(&self, x: GfElement) -> Result<GfElement, FieldError> {
        self.element(x.0)?;
        if x.0 == 0 {
            return Err(FieldError::InverseOfZero);
        }
        Ok(GfElement(self.inv_raw(x.0)))
    }

    /// `x / y`.
    pub fn div(&self, x: GfElement, y: GfElement) -> Result<GfElement, FieldError> {
        let y_inv = self.inv(y)?;
        self.mul(x, y_inv)
    }

    // Unchecked variants. Callers guarantee operands are < order.

    #[inline]
    pub(crate) fn add_raw(&self, x: u32, y: u32) -> u32 {
        if self.p == 2 {
            x ^ y
        } else {
            ((x as u64 + y as u64) % self.p as u64) as u32
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, x: u32, y: u32) -> u32 {
        if self.p == 2 {
            x ^ y
        } else {
            ((x as u64 + self.p as u64 - y as u64) % self.p as u64) as u32
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, x: u32, y: u32) -> u32 {
        if self.n == 1 {
            return ((x as u64 * y as u64) % self.p as u64) as u32;
        }
        // Shift-and-add with the reduction interleaved: x is doubled
        // (multiplied by the polynomial x) once per bit of y and folded back
        // below degree n whenever bit n appears.
        let top = 1u32 << self.n;
        let mut a = x;
        let mut b = y;
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub(crate) fn inv_raw(&self, x: u32) -> u32 {
        debug_assert!(x != 0);
        // x^(order - 2) = x^-1 in any finite field.
        self.pow_raw(x, self.order as u64 - 2)
    }

    pub(crate) fn pow_raw(&self, x: u32, mut e: u64) -> u32 {
        let mut base = x;
        let mut acc = 1u32;
        while e != 0 {
            if e & 1 != 0 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    /// The GF(2)-linear map `x -> k * x` as an n x n binary matrix.
    /// Column `j` is `k * x^j`.
    pub fn const_mul_matrix(&self, k: GfElement) -> Result<BinaryMatrix, FieldError> {
        if !self.is_binary() {
            return Err(FieldError::NotBinary);
        }
        self.element(k.0)?;
        let columns: Vec<u32> = (0..self.n).map(|j| self.mul_raw(k.0, 1 << j)).collect();
        Ok(BinaryMatrix::from_columns(self.n as usize, &columns))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF(2^{}) mod {}", self.n, format_poly(self.modulus))
        }
    }
}

/// Renders a GF(2) polynomial, e.g. `0b1011` as `x^3+x+1`.
pub fn format_poly(poly: u32) -> String {
    if poly == 0 {
        return "0".to_string();
    }
    let mut terms = Vec::new();
    for i in (0..32).rev() {
        if poly >> i & 1 == 1 {
            terms.push(match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            });
        }
    }
    terms.join("+")
}

/// The reducing polynomial used when none is given.
///
/// Degrees 2..=7 use [`STANDARD_MODULI`]. Larger degrees use the irreducible
/// trinomial `x^n + x^k + 1` with the smallest `k`, or, when no trinomial
/// exists, the numerically smallest irreducible polynomial of degree `n`.
pub fn default_modulus(n: u32) -> Result<u32, FieldError> {
    if n < 2 {
        return Err(FieldError::DegreeMismatch { modulus: 0, n });
    }
    if n > MAX_BINARY_DEGREE {
        return Err(FieldError::DegreeTooLarge(n));
    }
    if let Some(&(_, m)) = STANDARD_MODULI.iter().find(|(deg, _)| *deg == n) {
        return Ok(m);
    }
    let top = 1u32 << n;
    for k in 1..n {
        let candidate = top | (1 << k) | 1;
        if is_irreducible(n, candidate)? {
            return Ok(candidate);
        }
    }
    for low in (1..top).step_by(2) {
        let candidate = top | low;
        if is_irreducible(n, candidate)? {
            return Ok(candidate);
        }
    }
    unreachable!("an irreducible polynomial exists for every degree")
}

/// Trial division of `candidate` (degree `n`) by every polynomial of degree
/// 1 through n/2.
pub fn is_irreducible(n: u32, candidate: u32) -> Result<bool, FieldError> {
    if n == 0 || n > 31 || poly_degree(candidate) != Some(n) {
        return Err(FieldError::DegreeMismatch { modulus: candidate, n });
    }
    for d in 1..=n / 2 {
        for low in 0..(1u32 << d) {
            let divisor = (1u32 << d) | low;
            if poly_rem(candidate, divisor) == 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn poly_degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("nonzero divisor");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if (p as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A dense matrix over GF(2) with at most 32 columns. Row `i` is stored as a
/// bitmask over input bits; applying the matrix to a bit-vector `x` sets
/// output bit `i` to the parity of `row[i] & x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMatrix {
    n_cols: usize,
    rows: Vec<u32>,
}

impl BinaryMatrix {
    pub fn from_rows(n_cols: usize, rows: Vec<u32>) -> Self {
        assert!(n_cols <= 32, "at most 32 columns");
        BinaryMatrix { n_cols, rows }
    }

    /// Square matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(n_rows: usize, columns: &[u32]) -> Self {
        let rows = (0..n_rows)
            .map(|i| {
                columns
                    .iter()
                    .enumerate()
                    .fold(0u32, |row, (j, col)| row | ((col >> i & 1) << j))
            })
            .collect();
        Self::from_rows(columns.len(), rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| 1 << i).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |col, (i, row)| col | ((row >> j & 1) << i))
    }

    pub fn columns(&self) -> Vec<u32> {
        (0..self.n_cols).map(|j| self.column(j)).collect()
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |out, (i, row)| out | (((row & x).count_ones() & 1) << i))
    }

    /// Rank over GF(2), by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n_cols {
            let bit = 1u32 << col;
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            for r in 0..rows.len() {
                if r != rank && rows[r] & bit != 0 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.n_rows() == self.n_cols && self.rank() == self.n_cols
    }
}

/// The matrix of plain (unreduced) polynomial multiplication by the
/// constant `k`, mapping an `n`-bit input to a `2n - 1`-bit product.
pub fn unreduced_mul_matrix(n: u32, k: GfElement) -> BinaryMatrix {
    let columns: Vec<u32> = (0..n).map(|j| k.0 << j).collect();
    let n_rows = (2 * n).saturating_sub(1) as usize;
    let rows = (0..n_rows)
        .map(|i| {
            columns
                .iter()
                .enumerate()
                .fold(0u32, |row, (j, col)| row | ((col >> i & 1) << j))
        })
        .collect();
    BinaryMatrix::from_rows(n as usize, rows)
}
