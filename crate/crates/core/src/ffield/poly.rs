use std::fmt;

use super::{FpElement, PrimeModulus};
use crate::error::{Error, Result};

/// Polynomial over F_p, coefficients in ascending degree with no trailing
/// zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpPolynomial {
    coeffs: Vec<u64>,
    modulus: PrimeModulus,
}

impl FpPolynomial {
    pub fn new(modulus: PrimeModulus, coeffs: Vec<u64>) -> Self {
        let p = modulus.value();
        let mut f = Self {
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
            modulus,
        };
        f.normalize();
        f
    }

    pub fn from_signed(modulus: PrimeModulus, coeffs: &[i64]) -> Self {
        Self::new(
            modulus,
            coeffs
                .iter()
                .map(|&c| modulus.reduce_i128(c as i128))
                .collect(),
        )
    }

    pub fn zero(modulus: PrimeModulus) -> Self {
        Self {
            coeffs: Vec::new(),
            modulus,
        }
    }

    pub fn constant(modulus: PrimeModulus, c: u64) -> Self {
        Self::new(modulus, vec![c])
    }

    /// `c * X^degree`.
    pub fn monomial(modulus: PrimeModulus, c: u64, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = c;
        Self::new(modulus, coeffs)
    }

    /// Parses the comma-separated, ascending-degree text form, e.g.
    /// `"1,0,0,1"` for X^3 + 1. Negative entries are reduced mod p.
    pub fn parse(modulus: PrimeModulus, text: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for tok in text.split(',') {
            let tok = tok.trim();
            let c: i128 = tok.parse().map_err(|_| {
                Error::InvalidPolynomial(format!("bad coefficient `{tok}` in `{text}`"))
            })?;
            coeffs.push(modulus.reduce_i128(c));
        }
        Ok(Self::new(modulus, coeffs))
    }

    /// Inverse of [`FpPolynomial::parse`].
    pub fn to_text(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FpElement {
        self.modulus.elem(self.coeffs.get(i).copied().unwrap_or(0))
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coefficient(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    /// Horner evaluation on a raw residue.
    #[inline]
    pub fn eval_raw(&self, x: u64) -> u64 {
        let m = &self.modulus;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| m.add(m.mul(acc, x), c))
    }

    pub fn eval(&self, x: FpElement) -> Result<FpElement> {
        if x.modulus() != self.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: x.modulus().value(),
            });
        }
        Ok(self.modulus.elem(self.eval_raw(x.value())))
    }

    pub fn derivative(&self) -> Self {
        let m = &self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| m.mul(c, i as u64 % m.value()))
            .collect();
        Self::new(self.modulus, coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = &self.modulus;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                m.add(
                    self.coeffs.get(i).copied().unwrap_or(0),
                    other.coeffs.get(i).copied().unwrap_or(0),
                )
            })
            .collect();
        Self::new(self.modulus, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(self.modulus.value() - 1))
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = &self.modulus;
        Self::new(
            self.modulus,
            self.coeffs.iter().map(|&a| m.mul(a, c)).collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.modulus);
        }
        let m = &self.modulus;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = m.add(out[i + j], m.mul(a, b));
            }
        }
        Self::new(self.modulus, out)
    }

    /// Euclidean division; `None` when `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let db = divisor.degree()?;
        let m = &self.modulus;
        let inv_lc = m.inv(divisor.leading_coefficient())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= db {
            return Some((Self::zero(self.modulus), self.clone()));
        }
        let mut quot = vec![0u64; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = m.mul(rem[k + db], inv_lc);
            quot[k] = c;
            if c != 0 {
                for (j, &d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = m.sub(rem[k + j], m.mul(c, d));
                }
            }
        }
        rem.truncate(db);
        Some((Self::new(self.modulus, quot), Self::new(self.modulus, rem)))
    }

    pub fn monic(&self) -> Self {
        match self.modulus.inv(self.leading_coefficient()) {
            Some(inv) => self.scale(inv),
            None => self.clone(),
        }
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `f(X + t)`.
    pub fn shift(&self, t: u64) -> Self {
        let m = &self.modulus;
        let t = t % m.value();
        // Horner in the ring: acc = acc * (X + t) + c
        let mut acc: Vec<u64> = Vec::with_capacity(self.coeffs.len());
        for &c in self.coeffs.iter().rev() {
            let mut next = vec![0u64; acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i + 1] = m.add(next[i + 1], a);
                next[i] = m.add(next[i], m.mul(a, t));
            }
            next[0] = m.add(next[0], c);
            acc = next;
        }
        Self::new(self.modulus, acc)
    }

    /// Resultant `Res(self, other)` with `Res(f, g) = lc(f)^deg g * prod g(roots of f)`,
    /// via the Euclidean remainder sequence over F_p.
    pub fn resultant(&self, other: &Self) -> FpElement {
        let m = self.modulus;
        let (Some(_), Some(_)) = (self.degree(), other.degree()) else {
            return m.elem(0);
        };
        let mut a = self.clone();
        let mut b = other.clone();
        let mut acc = 1u64;
        loop {
            let da = a.degree().expect("nonzero") as u64;
            let db = b.degree().expect("nonzero") as u64;
            if db == 0 {
                return m.elem(m.mul(acc, m.pow(b.leading_coefficient(), da)));
            }
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            let Some(dr) = r.degree() else {
                return m.elem(0);
            };
            if (da * db) % 2 == 1 {
                acc = m.neg(acc);
            }
            acc = m.mul(acc, m.pow(b.leading_coefficient(), da - dr as u64));
            a = b;
            b = r;
        }
    }

    /// `disc(f) = (-1)^{m(m-1)/2} Res(f, f') / lc(f)`. Zero exactly when f
    /// has a repeated root over the algebraic closure.
    pub fn discriminant(&self) -> Result<FpElement> {
        let m = self.modulus;
        let deg = match self.degree() {
            Some(d) if d >= 1 => d as u64,
            _ => {
                return Err(Error::InvalidPolynomial(
                    "discriminant of a constant polynomial".into(),
                ))
            }
        };
        let res = self.resultant(&self.derivative());
        let inv_lc = m
            .inv(self.leading_coefficient())
            .expect("nonzero leading coefficient");
        let mut d = m.mul(res.value(), inv_lc);
        if (deg * (deg - 1) / 2) % 2 == 1 {
            d = m.neg(d);
        }
        Ok(m.elem(d))
    }

    /// Square root in F_p[X] of a monic polynomial, if one exists.
    pub fn monic_square_root(&self) -> Option<Self> {
        let deg = self.degree()?;
        if deg % 2 == 1 || self.leading_coefficient() != 1 {
            return None;
        }
        let m = &self.modulus;
        let k = deg / 2;
        let inv2 = m.inv(2).expect("p is odd");
        // h = X^k + h_{k-1} X^{k-1} + ...; matched from the top down
        let mut h = vec![0u64; k + 1];
        h[k] = 1;
        for j in 1..=k {
            let mut cross = 0u64;
            for i in 1..j {
                cross = m.add(cross, m.mul(h[k - i], h[k - (j - i)]));
            }
            h[k - j] = m.mul(m.sub(self.coeffs[deg - j], cross), inv2);
        }
        let h = Self::new(self.modulus, h);
        (h.mul(&h) == *self).then_some(h)
    }

    /// True when `f = c * h^2` for a constant c, i.e. `y^2 - f(x)` factors
    /// over the algebraic closure.
    pub fn is_constant_times_square(&self) -> bool {
        match self.degree() {
            None | Some(0) => true,
            Some(_) => self.monic().monic_square_root().is_some(),
        }
    }
}

impl fmt::Display for FpPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn poly(p: u64, c: &[u64]) -> FpPolynomial {
        FpPolynomial::new(fp(p), c.to_vec())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            poly(5, &[0, 0, 0, 1]).eval(fp(5).elem(1)).unwrap().value(),
            1
        );
        assert_eq!(
            poly(7, &[1, 0, 0, 1]).eval(fp(7).elem(6)).unwrap().value(),
            0
        );
        assert_eq!(
            FpPolynomial::zero(fp(7))
                .eval(fp(7).elem(3))
                .unwrap()
                .value(),
            0
        );
        assert!(matches!(
            poly(7, &[1, 1]).eval(fp(11).elem(1)),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(poly(7, &[0, 0, 0, 1]).discriminant().unwrap().value(), 0);
        assert_eq!(poly(7, &[1, 1, 0, 1]).discriminant().unwrap().value(), 4);
        assert_eq!(poly(5, &[1, 0, 1]).discriminant().unwrap().value(), 1);
        assert!(poly(5, &[3]).discriminant().is_err());
    }

    #[test]
    fn cubic_discriminant_matches_closed_form() {
        let m = fp(101);
        for a in 0..101u64 {
            for b in (0..101u64).step_by(7) {
                let f = poly(101, &[b, a, 0, 1]);
                // -4a^3 - 27b^2
                let expect = m.sub(m.neg(m.mul(4, m.pow(a, 3))), m.mul(27, m.mul(b, b)));
                assert_eq!(f.discriminant().unwrap().value(), expect, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let f = FpPolynomial::parse(fp(7), "1, 0,0,1").unwrap();
        assert_eq!(f.coeffs(), &[1, 0, 0, 1]);
        assert_eq!(f.to_text(), "1,0,0,1");
        assert_eq!(
            FpPolynomial::parse(fp(7), "-1,8").unwrap().coeffs(),
            &[6, 1]
        );
        assert!(FpPolynomial::parse(fp(7), "1,x").is_err());
        assert_eq!(FpPolynomial::parse(fp(7), "0,0").unwrap().to_text(), "0");
    }

    #[test]
    fn square_detection() {
        let m = fp(7);
        let x1 = poly(7, &[1, 1]);
        assert!(x1.mul(&x1).is_constant_times_square());
        assert!(x1.mul(&x1).scale(3).is_constant_times_square());
        assert!(!poly(7, &[0, 0, 0, 1]).is_constant_times_square());
        assert!(!poly(7, &[1, 0, 1, 0, 1, 0, 0])
            .mul(&poly(7, &[0, 1]))
            .is_constant_times_square());
        let h = poly(7, &[2, 5, 1]);
        assert_eq!(h.mul(&h).monic_square_root().unwrap(), h);
        let _ = m;
    }

    #[test]
    fn shift_matches_evaluation() {
        let f = poly(101, &[3, 2, 0, 1, 7]);
        let g = f.shift(17);
        for x in 0..101 {
            assert_eq!(g.eval_raw(x), f.eval_raw((x + 17) % 101));
        }
    }

    fn root_multiplicity_repeated(f: &FpPolynomial) -> bool {
        // repeated root in F_p, or gcd(f, f') of degree >= 1 (roots outside F_p)
        let p = f.modulus().value();
        let fd = f.derivative();
        let in_field = (0..p).any(|x| f.eval_raw(x) == 0 && fd.eval_raw(x) == 0);
        in_field || f.gcd(&fd).degree().unwrap_or(0) >= 1
    }

    proptest! {
        #[test]
        fn eval_agrees_with_power_sum(
            coeffs in proptest::collection::vec(0u64..10007, 0..8),
            x in 0u64..10007,
        ) {
            let m = fp(10007);
            let f = FpPolynomial::new(m, coeffs.clone());
            let naive = coeffs.iter().enumerate().fold(0u64, |acc, (i, &c)| {
                m.add(acc, m.mul(c, m.pow(x, i as u64)))
            });
            prop_assert_eq!(f.eval_raw(x), naive);
        }

        #[test]
        fn discriminant_zero_iff_repeated_root(
            p in prop::sample::select(vec![3u64, 5, 7, 11, 13, 31, 101]),
            coeffs in proptest::collection::vec(0u64..101, 2..7),
        ) {
            let f = FpPolynomial::new(fp(p), coeffs);
            prop_assume!(f.degree().unwrap_or(0) >= 1);
            let d = f.discriminant().unwrap();
            prop_assert_eq!(d.is_zero(), root_multiplicity_repeated(&f));
        }

        #[test]
        fn div_rem_reconstructs(
            a in proptest::collection::vec(0u64..31, 0..8),
            b in proptest::collection::vec(0u64..31, 1..5),
        ) {
            let m = fp(31);
            let a = FpPolynomial::new(m, a);
            let b = FpPolynomial::new(m, b);
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b).unwrap();
            prop_assert_eq!(q.mul(&b).add(&r), a);
            prop_assert!(r.degree().is_none_or(|d| d < b.degree().unwrap()));
        }
    }
}
