//! Arithmetic in the prime field F_p and in F_p[X].
//!
//! Residues are kept in least nonnegative form `[0, p-1]`. Products go through
//! `u128`, which is why the modulus is capped below 2^62.

mod poly;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use poly::FpPolynomial;

/// Upper limit (exclusive) on supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 62;

// Deterministic for every n < 3.3 * 10^24, which covers u64.
const MILLER_RABIN_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod_u64(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, n);
        }
        base = mul_mod_u64(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin test, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &w in &MILLER_RABIN_WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MILLER_RABIN_WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An odd prime `3 <= p < 2^62`, with the data Tonelli–Shanks needs
/// precomputed once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: u64,
    odd_part: u64,
    two_adicity: u32,
    nonresidue: u64,
}

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if !(3..MODULUS_LIMIT).contains(&p) || p.is_multiple_of(2) || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        let two_adicity = (p - 1).trailing_zeros();
        let odd_part = (p - 1) >> two_adicity;
        let half = (p - 1) / 2;
        let nonresidue = (2..p)
            .find(|&z| pow_mod_u64(z, half, p) == p - 1)
            .expect("every odd prime has a quadratic nonresidue");
        Ok(Self {
            p,
            odd_part,
            two_adicity,
            nonresidue,
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FpElement {
        FpElement {
            value: v % self.p,
            modulus: *self,
        }
    }

    pub fn elem_signed(&self, v: i64) -> FpElement {
        FpElement {
            value: self.reduce_i128(v as i128),
            modulus: *self,
        }
    }

    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod_u64(a, b, self.p)
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod_u64(a, e, self.p)
    }

    /// Inverse of a nonzero residue.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// Least absolute value representative in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i64 {
        let a = a % self.p;
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn character(&self, a: u64) -> QuadraticCharacter {
        let a = a % self.p;
        if a == 0 {
            return QuadraticCharacter::Zero;
        }
        if self.pow(a, (self.p - 1) / 2) == 1 {
            QuadraticCharacter::Residue
        } else {
            QuadraticCharacter::Nonresidue
        }
    }

    /// One square root of `a` (the smaller of the pair), or `None` for a
    /// nonresidue.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        match self.character(a) {
            QuadraticCharacter::Zero => return Some(0),
            QuadraticCharacter::Nonresidue => return None,
            QuadraticCharacter::Residue => {}
        }
        let root = if self.two_adicity == 1 {
            self.pow(a, (self.p + 1) / 4)
        } else {
            self.tonelli_shanks(a)
        };
        Some(root.min(self.p - root))
    }

    fn tonelli_shanks(&self, a: u64) -> u64 {
        let mut m = self.two_adicity;
        let mut c = self.pow(self.nonresidue, self.odd_part);
        let mut t = self.pow(a, self.odd_part);
        let mut r = self.pow(a, self.odd_part.div_ceil(2));
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        r
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// Result of the Euler criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticCharacter {
    Residue,
    Nonresidue,
    Zero,
}

/// A residue modulo a [`PrimeModulus`].
///
/// Operator impls panic when the moduli differ; use [`FpElement::checked_add`]
/// and friends where the inputs are not known to agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpElement {
    value: u64,
    modulus: PrimeModulus,
}

impl FpElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn pow(&self, e: u64) -> FpElement {
        self.modulus.elem(self.modulus.pow(self.value, e))
    }

    pub fn inv(&self) -> Option<FpElement> {
        self.modulus.inv(self.value).map(|v| self.modulus.elem(v))
    }

    /// Least absolute value form `(x)_p`.
    pub fn to_signed(&self) -> i64 {
        self.modulus.to_signed(self.value)
    }

    pub(crate) fn same_modulus(&self, other: &FpElement) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: other.modulus.value(),
            });
        }
        Ok(())
    }

    pub fn checked_add(self, rhs: FpElement) -> Result<FpElement> {
        self.same_modulus(&rhs)?;
        Ok(self + rhs)
    }

    pub fn checked_mul(self, rhs: FpElement) -> Result<FpElement> {
        self.same_modulus(&rhs)?;
        Ok(self * rhs)
    }
}

impl fmt::Display for FpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FpElement {
    type Output = FpElement;
    fn add(self, rhs: FpElement) -> FpElement {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpElement {
            value: self.modulus.add(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for FpElement {
    type Output = FpElement;
    fn sub(self, rhs: FpElement) -> FpElement {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpElement {
            value: self.modulus.sub(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for FpElement {
    type Output = FpElement;
    fn mul(self, rhs: FpElement) -> FpElement {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        FpElement {
            value: self.modulus.mul(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for FpElement {
    type Output = FpElement;
    fn neg(self) -> FpElement {
        FpElement {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

/// All `y` in `[0, p-1]` with `y^2 = a`, ascending.
pub fn sqrt_mod(a: FpElement) -> Vec<FpElement> {
    let m = a.modulus;
    match m.sqrt(a.value) {
        None => Vec::new(),
        Some(0) => vec![m.elem(0)],
        Some(r) => vec![m.elem(r), m.elem(m.value() - r)],
    }
}

pub fn is_qr(a: FpElement) -> QuadraticCharacter {
    a.modulus.character(a.value)
}

pub fn poly_eval(f: &FpPolynomial, x: FpElement) -> Result<FpElement> {
    f.eval(x)
}

pub fn discriminant(f: &FpPolynomial) -> Result<FpElement> {
    f.discriminant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        for p in [0, 1, 2, 4, 9, 15, 561, 1 << 62, (1 << 62) + 1] {
            assert!(PrimeModulus::new(p).is_err(), "{p}");
        }
        assert!(PrimeModulus::new(4611686018427387847).is_ok()); // largest prime < 2^62
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "{n}");
        }
        // strong pseudoprimes to several small bases
        assert!(!is_prime(3215031751));
        assert!(!is_prime(3825123056546413051));
    }

    #[test]
    fn sqrt_examples() {
        let m = fp(7);
        let roots: Vec<u64> = sqrt_mod(m.elem(4)).iter().map(|r| r.value()).collect();
        assert_eq!(roots, vec![2, 5]);
        assert!(sqrt_mod(m.elem(3)).is_empty());
        let zero: Vec<u64> = sqrt_mod(m.elem(0)).iter().map(|r| r.value()).collect();
        assert_eq!(zero, vec![0]);
    }

    #[test]
    fn qr_examples() {
        let m = fp(7);
        assert_eq!(is_qr(m.elem(2)), QuadraticCharacter::Residue);
        assert_eq!(is_qr(m.elem(0)), QuadraticCharacter::Zero);
        assert_eq!(is_qr(m.elem(5)), QuadraticCharacter::Nonresidue);
    }

    #[test]
    fn sqrt_exhaustive_small_primes() {
        // covers p = 1 mod 8 (deep Tonelli–Shanks) and p = 3 mod 4
        for p in [3u64, 5, 7, 13, 17, 41, 73, 97, 113, 257, 8191, 9973] {
            let m = fp(p);
            let mut squares = vec![0u32; p as usize];
            for y in 0..p {
                squares[m.mul(y, y) as usize] += 1;
            }
            for a in 0..p {
                let roots = sqrt_mod(m.elem(a));
                assert_eq!(roots.len() as u32, squares[a as usize], "p={p} a={a}");
                for r in &roots {
                    assert_eq!(m.mul(r.value(), r.value()), a);
                }
                if roots.len() == 2 {
                    assert_eq!(m.add(roots[0].value(), roots[1].value()), 0);
                    assert_eq!(is_qr(m.elem(a)), QuadraticCharacter::Residue);
                }
            }
        }
    }

    #[test]
    fn qr_matches_sqrt_up_to_ten_thousand() {
        let primes: Vec<u64> = (3..10_000).filter(|&n| is_prime(n)).collect();
        for p in primes.iter().copied().step_by(37) {
            let m = fp(p);
            for a in 1..p {
                let residue = is_qr(m.elem(a)) == QuadraticCharacter::Residue;
                assert_eq!(residue, sqrt_mod(m.elem(a)).len() == 2, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn large_modulus_sqrt() {
        let m = fp(4611686018427387847);
        for a in [2u64, 3, 5, 123456789, 4611686018427387846] {
            for r in sqrt_mod(m.elem(a)) {
                assert_eq!(m.mul(r.value(), r.value()), a);
            }
        }
    }

    #[test]
    fn signed_form() {
        let m = fp(7);
        assert_eq!(m.elem(6).to_signed(), -1);
        assert_eq!(m.elem(3).to_signed(), 3);
        assert_eq!(m.elem(4).to_signed(), -3);
        assert_eq!(m.elem_signed(-10).value(), 4);
    }

    #[test]
    fn checked_ops_detect_mismatch() {
        let a = fp(7).elem(3);
        let b = fp(11).elem(3);
        assert!(matches!(
            a.checked_add(b),
            Err(Error::ModulusMismatch { .. })
        ));
        assert_eq!(a.checked_mul(fp(7).elem(5)).unwrap().value(), 1);
    }
}
