//! Exponential sums, discrepancy checks, Weyl majorants and Vinogradov
//! system counts.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::FpPolynomial;

/// Explicit constant placed in front of the Erdős–Turán right-hand side.
pub const ERDOS_TURAN_CONSTANT: f64 = 3.0;

/// Default cap on `M^{m-1}` for the Weyl majorant loop.
pub const WEYL_TERM_LIMIT: f64 = 1e9;

/// Default cap on the number of distinct power-sum vectors held at once.
pub const VINOGRADOV_STATE_LIMIT: usize = 20_000_000;

/// Constant `C_W = 2^m` multiplying the Weyl majorant.
pub fn weyl_constant(m: u32) -> f64 {
    2f64.powi(m as i32)
}

#[inline]
fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * t)
}

/// `sum_{n=1}^{M} e(f(n))` for a real polynomial given by ascending
/// coefficients. Each `f(n)` is reduced mod 1 before exponentiating.
pub fn exp_sum_real(coeffs: &[f64], m: u64) -> Complex64 {
    (1..=m)
        .map(|n| {
            let x = n as f64;
            let v = coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, &c| (acc * x + c).rem_euclid(1.0));
            e(v)
        })
        .sum()
}

/// `sum_{n=1}^{M} e(k g(n) / p)`; phases are formed from exact residues.
pub fn exp_sum_mod(g: &FpPolynomial, k: i64, m: u64) -> Complex64 {
    let fp = g.modulus();
    let p = fp.value();
    let k = fp.elem_signed(k).value();
    (1..=m)
        .map(|n| {
            let r = fp.mul(k, g.eval_raw(n % p));
            e(r as f64 / p as f64)
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErdosTuranReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares the discrepancy of `seq` on `[alpha, beta]` with the
/// Erdős–Turán majorant built from its first `K` Weyl sums, scaled by
/// [`ERDOS_TURAN_CONSTANT`].
pub fn erdos_turan_check(
    seq: &[f64],
    alpha: f64,
    beta: f64,
    k_max: u32,
) -> Result<ErdosTuranReport> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha > beta {
        return Err(Error::param(
            "interval",
            format!("need 0 <= alpha <= beta <= 1, got [{alpha}, {beta}]"),
        ));
    }
    if k_max == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    if let Some(bad) = seq.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::param("seq", format!("point {bad} outside [0, 1]")));
    }
    let m = seq.len() as f64;
    let hits = seq.iter().filter(|&&g| g >= alpha && g <= beta).count() as f64;
    let lhs = (hits - m * (beta - alpha)).abs();
    let kf = k_max as f64;
    let mut acc = m / kf;
    for k in 1..=k_max {
        let s: Complex64 = seq.iter().map(|&g| e(k as f64 * g)).sum();
        acc += (1.0 / kf + (beta - alpha).min(1.0 / k as f64)) * s.norm();
    }
    let rhs = ERDOS_TURAN_CONSTANT * acc;
    Ok(ErdosTuranReport {
        lhs,
        rhs,
        pass: lhs <= rhs,
    })
}

/// Right-hand side of Weyl's inequality for leading coefficient
/// `theta = num/den`, without the implied constant:
///
/// `M^{1 - m/2^{m-1}} (sum_{|l_i| < M} min(M, ||theta m! l_1...l_{m-1}||^{-1}))^{2^{1-m}}`
///
/// Terms where the argument is an integer contribute `M`.
pub fn weyl_majorant(num: u64, den: u64, m: u32, big_m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::param("m", "Weyl majorant needs degree >= 2"));
    }
    if big_m == 0 || den == 0 {
        return Err(Error::param("M", "M and the denominator must be positive"));
    }
    let cells = (big_m as f64).powi(m as i32 - 1);
    if cells > WEYL_TERM_LIMIT {
        return Err(Error::GuardExceeded {
            what: "weyl_majorant",
            needed: cells,
            limit: WEYL_TERM_LIMIT,
        });
    }
    let q = den as i128;
    let factorial = (1..=m as i128).fold(1i128, |acc, i| acc * i % q);
    let base = (num as i128 % q) * factorial % q;
    let mf = big_m as f64;
    let span = 2 * big_m - 1;
    let dims = (m - 1) as usize;

    // odometer over (l_1, ..., l_{m-1}) in (-M, M)^{m-1}
    let mut idx = vec![0u64; dims];
    let mut sum = 0.0f64;
    loop {
        let mut r = base;
        for &i in &idx {
            let l = i as i128 - (big_m as i128 - 1);
            r = r * l.rem_euclid(q) % q;
        }
        let dist = r.min(q - r);
        sum += if dist == 0 {
            mf
        } else {
            mf.min(q as f64 / dist as f64)
        };
        let mut d = 0;
        loop {
            if d == dims {
                let exp = 1.0 - m as f64 / 2f64.powi(m as i32 - 1);
                return Ok(mf.powf(exp) * sum.powf(2f64.powi(1 - m as i32)));
            }
            idx[d] += 1;
            if idx[d] < span {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylIdentityReport {
    pub lhs: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub pass: bool,
}

/// One Weyl differencing step as an identity:
/// `|S|^2 = sum_{|h| < M} sum_{n, n+h in [1, M]} e(k (g(n+h) - g(n)) / p)`.
pub fn weyl_square_identity(g: &FpPolynomial, k: i64, m: u64) -> WeylIdentityReport {
    let s = exp_sum_mod(g, k, m);
    let lhs = s.norm_sqr();
    let fp = g.modulus();
    let p = fp.value();
    let kk = fp.elem_signed(k).value();
    let phase: Vec<u64> = (0..=m).map(|n| fp.mul(kk, g.eval_raw(n % p))).collect();
    let mi = m as i64;
    let mut rhs = Complex64::new(0.0, 0.0);
    for h in -(mi - 1)..=(mi - 1) {
        let lo = 1.max(1 - h);
        let hi = mi.min(mi - h);
        for n in lo..=hi {
            let d = fp.sub(phase[(n + h) as usize], phase[n as usize]);
            rhs += e(d as f64 / p as f64);
        }
    }
    let pass = (Complex64::new(lhs, 0.0) - rhs).norm() < 1e-6 * (m as f64) * (m as f64);
    WeylIdentityReport {
        lhs,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        pass,
    }
}

/// Parameters of `J_{k,m}(H)`: `k` variables per side, `m` equations,
/// variables in `[1, H]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VinogradovInstance {
    pub k: u32,
    pub m: u32,
    pub h: u64,
}

impl VinogradovInstance {
    pub fn new(k: u32, m: u32, h: u64) -> Result<Self> {
        if k == 0 || m == 0 || h == 0 {
            return Err(Error::param("vinogradov", "k, m and H must all be >= 1"));
        }
        Ok(Self { k, m, h })
    }
}

/// `(s_1, ..., s_m)` with `s_j = sum_i x_i^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PowerSumVector(pub Vec<u64>);

/// Distribution of power-sum vectors over ordered k-tuples in `[1, H]^k`.
pub fn power_sum_distribution(
    inst: &VinogradovInstance,
    state_limit: usize,
) -> Result<HashMap<PowerSumVector, u128>> {
    let VinogradovInstance { k, m, h } = *inst;
    let log2_h = (h as f64).log2();
    if 2.0 * k as f64 * log2_h >= 126.0 {
        return Err(Error::Overflow("count_vinogradov: H^{2k} exceeds u128"));
    }
    if (m as f64) * log2_h + (k as f64).log2() >= 63.0 {
        return Err(Error::Overflow("count_vinogradov: k H^m exceeds u64"));
    }
    let single: Vec<Vec<u64>> = (1..=h)
        .map(|x| (1..=m).map(|j| x.pow(j)).collect())
        .collect();
    let mut dist: HashMap<PowerSumVector, u128> = HashMap::new();
    dist.insert(PowerSumVector(vec![0; m as usize]), 1);
    for _ in 0..k {
        let entries: Vec<(PowerSumVector, u128)> = dist.into_iter().collect();
        dist = entries
            .par_chunks(4096)
            .map(|chunk| {
                let mut local: HashMap<PowerSumVector, u128> = HashMap::new();
                for (s, c) in chunk {
                    for powers in &single {
                        let key =
                            PowerSumVector(s.0.iter().zip(powers).map(|(a, b)| a + b).collect());
                        *local.entry(key).or_insert(0) += c;
                    }
                }
                local
            })
            .reduce(HashMap::new, |mut a, b| {
                if a.len() < b.len() {
                    return merge_into(b, a);
                }
                for (key, c) in b {
                    *a.entry(key).or_insert(0) += c;
                }
                a
            });
        if dist.len() > state_limit {
            return Err(Error::GuardExceeded {
                what: "count_vinogradov",
                needed: dist.len() as f64,
                limit: state_limit as f64,
            });
        }
    }
    Ok(dist)
}

fn merge_into(
    mut big: HashMap<PowerSumVector, u128>,
    small: HashMap<PowerSumVector, u128>,
) -> HashMap<PowerSumVector, u128> {
    for (key, c) in small {
        *big.entry(key).or_insert(0) += c;
    }
    big
}

/// Exact `J_{k,m}(H) = sum_s r(s)^2`, where `r(s)` counts ordered k-tuples
/// with power-sum vector s.
pub fn count_vinogradov(inst: &VinogradovInstance) -> Result<u128> {
    count_vinogradov_with_limit(inst, VINOGRADOV_STATE_LIMIT)
}

pub fn count_vinogradov_with_limit(inst: &VinogradovInstance, state_limit: usize) -> Result<u128> {
    let dist = power_sum_distribution(inst, state_limit)?;
    Ok(dist.values().map(|&r| r * r).sum())
}

/// `kappa(m)` values, `m^2 - 1` unless overridden.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaTable {
    pub overrides: BTreeMap<u32, u32>,
}

impl KappaTable {
    pub fn get(&self, m: u32) -> Result<u32> {
        if m < 2 {
            return Err(Error::param("m", "kappa(m) is defined for m >= 2"));
        }
        Ok(self.overrides.get(&m).copied().unwrap_or(m * m - 1))
    }
}

pub fn kappa(m: u32) -> Result<u32> {
    KappaTable::default().get(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::PrimeModulus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(p: u64, c: &[u64]) -> FpPolynomial {
        FpPolynomial::new(PrimeModulus::new(p).unwrap(), c.to_vec())
    }

    #[test]
    fn exp_sum_examples() {
        let g = poly(101, &[0, 1]);
        assert!(exp_sum_mod(&g, 3, 101).norm() < 1e-9);
        let s = exp_sum_mod(&g, 101, 101);
        assert!((s.re - 101.0).abs() < 1e-9 && s.im.abs() < 1e-9);
        assert!(exp_sum_real(&[0.0, 1.0 / 3.0], 3).norm() < 1e-12);
    }

    #[test]
    fn complete_sums_vanish_and_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = [31u64, 101, 211][rng.gen_range(0..3)];
            let c: Vec<u64> = (0..4).map(|_| rng.gen_range(0..p)).collect();
            let g = poly(p, &c);
            let m = rng.gen_range(1..400);
            let k = rng.gen_range(-50..50);
            assert!(exp_sum_mod(&g, k, m).norm() <= m as f64 + 1e-9);
        }
        let lin = poly(211, &[5, 7]);
        for k in 1..211 {
            assert!(exp_sum_mod(&lin, k, 211).norm() < 1e-9);
        }
    }

    #[test]
    fn erdos_turan_examples() {
        let m = 200;
        let seq: Vec<f64> = (1..=m).map(|n| n as f64 / m as f64).collect();
        let r = erdos_turan_check(&seq, 0.0, 1.0, 5).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);

        let seq = vec![0.5; m];
        let r = erdos_turan_check(&seq, 0.4, 0.6, 10).unwrap();
        assert!((r.lhs - 0.8 * m as f64).abs() < 1e-9);
        assert!(r.pass && r.rhs > r.lhs);

        assert!(erdos_turan_check(&seq, 0.6, 0.4, 10).is_err());
        assert!(erdos_turan_check(&seq, 0.1, 0.4, 0).is_err());
        assert!(erdos_turan_check(&[1.5], 0.1, 0.4, 1).is_err());
    }

    #[test]
    fn erdos_turan_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let n = rng.gen_range(1..200);
            let seq: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            let r = erdos_turan_check(&seq, a.min(b), a.max(b), rng.gen_range(1..20)).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn weyl_majorant_examples() {
        assert!((weyl_majorant(1, 101, 2, 1).unwrap() - 1.0).abs() < 1e-12);
        for m in 2..=4u32 {
            let big_m = 7u64;
            let mf = big_m as f64;
            let expect = mf.powf(1.0 - m as f64 / 2f64.powi(m as i32 - 1))
                * (mf * (2.0 * mf - 1.0).powi(m as i32 - 1)).powf(2f64.powi(1 - m as i32));
            let v = weyl_majorant(0, 101, m, big_m).unwrap();
            assert!((v - expect).abs() < 1e-9 * expect);
            assert!(v >= mf - 1e-9);
        }
        // direct summation for m = 2, theta = 1/101, M = 10
        let mut sum = 0.0;
        for l in -9i64..=9 {
            let r = (2 * l).rem_euclid(101);
            let d = r.min(101 - r);
            sum += if d == 0 {
                10.0
            } else {
                (101.0 / d as f64).min(10.0)
            };
        }
        let v = weyl_majorant(1, 101, 2, 10).unwrap();
        assert!((v - sum.sqrt()).abs() < 1e-12);
        assert!(matches!(
            weyl_majorant(1, 101, 4, 2000),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn weyl_identity_examples() {
        let r = weyl_square_identity(&poly(13, &[0, 0, 1]), 1, 1);
        assert!((r.lhs - 1.0).abs() < 1e-12 && r.pass);
        let r = weyl_square_identity(&poly(13, &[0, 0, 1]), 1, 5);
        assert!(r.pass, "{r:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = [13u64, 101, 1009][rng.gen_range(0..3)];
            let c: Vec<u64> = (0..4).map(|_| rng.gen_range(0..p)).collect();
            let r = weyl_square_identity(&poly(p, &c), rng.gen_range(1..50), rng.gen_range(1..80));
            assert!(r.pass, "{r:?}");
        }
    }

    fn brute_vinogradov(k: u32, m: u32, h: u64) -> u128 {
        let vars = 2 * k as usize;
        let mut x = vec![1u64; vars];
        let mut count = 0u128;
        loop {
            let ok = (1..=m).all(|j| {
                let l: u64 = x[..k as usize].iter().map(|v| v.pow(j)).sum();
                let r: u64 = x[k as usize..].iter().map(|v| v.pow(j)).sum();
                l == r
            });
            count += ok as u128;
            let mut d = 0;
            loop {
                if d == vars {
                    return count;
                }
                x[d] += 1;
                if x[d] <= h {
                    break;
                }
                x[d] = 1;
                d += 1;
            }
        }
    }

    #[test]
    fn vinogradov_examples() {
        let j = |k, m, h| count_vinogradov(&VinogradovInstance::new(k, m, h).unwrap()).unwrap();
        assert_eq!(j(1, 1, 3), 3);
        assert_eq!(j(2, 2, 3), 15);
        assert_eq!(brute_vinogradov(2, 2, 3), 15);
        for h in 1..=30 {
            assert_eq!(j(2, 2, h), 2 * (h as u128) * (h as u128) - h as u128);
        }
        for (k, m, h) in [(2, 1, 5), (3, 2, 4), (3, 3, 3), (2, 3, 6)] {
            let v = j(k, m, h);
            assert_eq!(v, brute_vinogradov(k, m, h), "k={k} m={m} h={h}");
            assert!(v >= (h as u128).pow(k));
            assert!(v <= (h as u128).pow(2 * k));
        }
        assert!(VinogradovInstance::new(0, 1, 1).is_err());
    }

    #[test]
    fn vinogradov_guard() {
        let inst = VinogradovInstance::new(4, 2, 30).unwrap();
        assert!(matches!(
            count_vinogradov_with_limit(&inst, 100),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(3).unwrap(), 8);
        assert_eq!(kappa(4).unwrap(), 15);
        assert_eq!(kappa(2).unwrap(), 3);
        assert!(kappa(1).is_err());
        let mut t = KappaTable::default();
        t.overrides.insert(3, 7);
        assert_eq!(t.get(3).unwrap(), 7);
    }
}
