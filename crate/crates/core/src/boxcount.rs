//! Exact counts of solutions of `y^2 = f(x)` and `y = f(x)` in a box
//! `[R+1, R+M] x [S+1, S+M]` modulo p, and the bound formulas they are
//! compared against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::kappa;
use crate::error::{Error, Result};
use crate::ffield::{FpPolynomial, PrimeModulus};

/// Default stand-in for every `o(1)` exponent.
pub const DEFAULT_EPS: f64 = 0.05;

/// Implied constant used when judging the Weil deviation.
pub const WEIL_CONSTANT: f64 = 10.0;

const DEFAULT_CHUNK: u64 = 4096;

/// Closed integer box `[r+1, r+m] x [s+1, s+m]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Box2 {
    pub r: u64,
    pub s: u64,
    pub m: u64,
}

impl Box2 {
    pub fn new(r: u64, s: u64, m: u64) -> Self {
        Self { r, s, m }
    }

    /// Parses `R,S,M`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<u64> = text
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::param("box", format!("expected R,S,M, got `{text}`")))?;
        match parts.as_slice() {
            [r, s, m] => Ok(Self::new(*r, *s, *m)),
            _ => Err(Error::param("box", format!("expected R,S,M, got `{text}`"))),
        }
    }

    /// Checks `M >= 1`, `R + M < p` and `S + M < p`: the box never wraps
    /// and never touches the residue 0.
    pub fn validate(&self, p: u64) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidBox("empty box (M = 0)".into()));
        }
        let fits = |start: u64| start.checked_add(self.m).is_some_and(|end| end < p);
        if !fits(self.r) || !fits(self.s) {
            return Err(Error::InvalidBox(format!(
                "box R={} S={} M={} does not fit inside [1, {}]",
                self.r,
                self.s,
                self.m,
                p - 1
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn contains_x(&self, x: u64) -> bool {
        x > self.r && x <= self.r + self.m
    }

    #[inline]
    pub fn contains_y(&self, y: u64) -> bool {
        y > self.s && y <= self.s + self.m
    }

    pub fn xs(&self) -> std::ops::RangeInclusive<u64> {
        self.r + 1..=self.r + self.m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Naive,
    SqrtScan,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: u64,
    pub main_term: f64,
    pub bound_value: f64,
    pub method: CountMethod,
}

fn check_input(f: &FpPolynomial, bx: &Box2) -> Result<()> {
    if f.degree().unwrap_or(0) < 1 {
        return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
    }
    bx.validate(f.modulus().value())
}

/// Sums `per_x` over the box's x-range in chunks of `chunk` columns. The
/// result does not depend on `chunk` or on the thread count.
fn sum_over_columns<F>(bx: &Box2, chunk: u64, per_x: F) -> u64
where
    F: Fn(u64) -> u64 + Sync,
{
    let chunk = chunk.max(1);
    let first = bx.r + 1;
    let n_chunks = bx.m.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = first + c * chunk;
            let hi = (lo + chunk).min(first + bx.m);
            (lo..hi).map(&per_x).sum::<u64>()
        })
        .sum()
}

/// Number of `(x, y)` in the box with `y^2 = f(x) (mod p)`, via square roots.
pub fn count_curve_points(f: &FpPolynomial, bx: &Box2) -> Result<CountReport> {
    count_curve_points_with(f, bx, CountMethod::SqrtScan)
}

pub fn count_curve_points_with(
    f: &FpPolynomial,
    bx: &Box2,
    method: CountMethod,
) -> Result<CountReport> {
    let count = curve_count_chunked(f, bx, method, DEFAULT_CHUNK)?;
    let p = f.modulus().value();
    let deg = f.degree().expect("checked");
    let bound_value = if deg >= 3 {
        bound_i(bx.m, p, deg, DEFAULT_EPS)?.value
    } else {
        2.0 * bx.m as f64
    };
    Ok(CountReport {
        count,
        main_term: main_term(bx.m, p),
        bound_value,
        method,
    })
}

/// Same count with an explicit chunk size; exposed so the chunking contract
/// can be exercised directly.
pub fn curve_count_chunked(
    f: &FpPolynomial,
    bx: &Box2,
    method: CountMethod,
    chunk: u64,
) -> Result<u64> {
    check_input(f, bx)?;
    let m = f.modulus();
    let count = match method {
        CountMethod::SqrtScan => sum_over_columns(bx, chunk, |x| sqrt_column(&m, f, bx, x)),
        CountMethod::Naive => sum_over_columns(bx, chunk, |x| {
            let v = f.eval_raw(x);
            (bx.s + 1..=bx.s + bx.m)
                .filter(|&y| m.mul(y, y) == v)
                .count() as u64
        }),
    };
    Ok(count)
}

#[inline]
fn sqrt_column(m: &PrimeModulus, f: &FpPolynomial, bx: &Box2, x: u64) -> u64 {
    match m.sqrt(f.eval_raw(x)) {
        None => 0,
        // y = 0 never lies in [S+1, S+M]
        Some(0) => 0,
        Some(y) => bx.contains_y(y) as u64 + bx.contains_y(m.value() - y) as u64,
    }
}

/// Number of `(x, y)` in the box with `y = f(x) (mod p)`.
pub fn count_graph_points(f: &FpPolynomial, bx: &Box2) -> Result<CountReport> {
    count_graph_points_with(f, bx, CountMethod::SqrtScan)
}

pub fn count_graph_points_with(
    f: &FpPolynomial,
    bx: &Box2,
    method: CountMethod,
) -> Result<CountReport> {
    let count = graph_count_chunked(f, bx, method, DEFAULT_CHUNK)?;
    let p = f.modulus().value();
    let deg = f.degree().expect("checked");
    let bound_value = if deg >= 2 {
        bound_j(bx.m, p, deg, DEFAULT_EPS)?
    } else {
        bx.m as f64
    };
    Ok(CountReport {
        count,
        main_term: main_term(bx.m, p),
        bound_value,
        method,
    })
}

pub fn graph_count_chunked(
    f: &FpPolynomial,
    bx: &Box2,
    method: CountMethod,
    chunk: u64,
) -> Result<u64> {
    check_input(f, bx)?;
    let count = match method {
        CountMethod::SqrtScan => {
            sum_over_columns(bx, chunk, |x| bx.contains_y(f.eval_raw(x)) as u64)
        }
        CountMethod::Naive => sum_over_columns(bx, chunk, |x| {
            let v = f.eval_raw(x);
            (bx.s + 1..=bx.s + bx.m).filter(|&y| y == v).count() as u64
        }),
    };
    Ok(count)
}

fn main_term(m: u64, p: u64) -> f64 {
    (m as f64) * (m as f64) / p as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilReport {
    pub count: u64,
    pub main_term: f64,
    pub deviation: f64,
    /// `sqrt(p) * (ln p)^2`, before the implied constant.
    pub weil_budget: f64,
}

impl WeilReport {
    pub fn within(&self, constant: f64) -> bool {
        self.deviation <= constant * self.weil_budget
    }
}

/// Exact count against the Weil main term `M^2/p`. Requires `y^2 - f(x)` to
/// be absolutely irreducible, which for odd p means f is not a constant
/// times a square.
pub fn weil_error(f: &FpPolynomial, bx: &Box2) -> Result<WeilReport> {
    check_input(f, bx)?;
    if f.is_constant_times_square() {
        return Err(Error::Reducible(format!(
            "f = {} is a constant times a square in F_p[X]",
            f.to_text()
        )));
    }
    let p = f.modulus().value();
    let count = curve_count_chunked(f, bx, CountMethod::SqrtScan, DEFAULT_CHUNK)?;
    let main = main_term(bx.m, p);
    let lp = (p as f64).ln();
    Ok(WeilReport {
        count,
        main_term: main,
        deviation: (count as f64 - main).abs(),
        weil_budget: (p as f64).sqrt() * lp * lp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// cubic, `M < p^{1/8}`
    CubicSmall,
    /// cubic, `p^{1/8} <= M < p^{5/23}`
    CubicMiddle,
    /// cubic, `p^{5/23} <= M < p^{1/3}`
    CubicWide,
    /// cubic, `M >= p^{1/3}`: both terms of the wide-range bound kept
    CubicFull,
    /// degree at least 4, via kappa(m)
    HigherDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub value: f64,
    pub regime: BoundRegime,
}

/// Upper-bound shape for `I_f(M; R, S)` with every `o(1)` replaced by `eps`.
pub fn bound_i(m: u64, p: u64, deg: usize, eps: f64) -> Result<BoundEstimate> {
    if deg < 3 {
        return Err(Error::param("deg", "bound on I_f needs degree >= 3"));
    }
    if m == 0 {
        return Err(Error::param("M", "must be at least 1"));
    }
    let mf = m as f64;
    let pf = p as f64;
    let (lm, lp) = (mf.ln(), pf.ln());
    if deg == 3 {
        let lead = mf.powf(1.0 + eps);
        let (value, regime) = if 8.0 * lm < lp {
            (mf.powf(1.0 / 3.0 + eps), BoundRegime::CubicSmall)
        } else if 23.0 * lm < 5.0 * lp {
            (
                lead * (mf.powi(4) / pf).powf(1.0 / 6.0),
                BoundRegime::CubicMiddle,
            )
        } else if 3.0 * lm < lp {
            (
                lead * (mf.powi(3) / pf).powf(1.0 / 16.0),
                BoundRegime::CubicWide,
            )
        } else {
            (
                mf.powf(1.0 / 3.0 + eps) + lead * (mf.powi(3) / pf).powf(1.0 / 16.0),
                BoundRegime::CubicFull,
            )
        };
        return Ok(BoundEstimate { value, regime });
    }
    let k = kappa(deg as u32)? as f64;
    let two_k = 2.0 * k;
    let value = mf * (mf.powi(3) / pf).powf(1.0 / two_k + eps)
        + mf.powf(1.0 - (deg as f64 - 3.0) / two_k + eps);
    Ok(BoundEstimate {
        value,
        regime: BoundRegime::HigherDegree,
    })
}

/// `M^2/p + M^{1 - 1/2^{m-1}} p^eps`, the bound shape for `J_f(M; R, S)`.
pub fn bound_j(m: u64, p: u64, deg: usize, eps: f64) -> Result<f64> {
    if deg < 2 {
        return Err(Error::param("m", "bound on J_f needs degree >= 2"));
    }
    let mf = m as f64;
    let pf = p as f64;
    let exponent = 1.0 - 0.5f64.powi(deg as i32 - 1);
    Ok(mf * mf / pf + mf.powf(exponent) * pf.powf(eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::PrimeModulus;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(p: u64, c: &[u64]) -> FpPolynomial {
        FpPolynomial::new(PrimeModulus::new(p).unwrap(), c.to_vec())
    }

    fn naive_curve(f: &FpPolynomial, bx: &Box2) -> u64 {
        let p = f.modulus().value();
        let mut n = 0;
        for x in bx.xs() {
            for y in bx.s + 1..=bx.s + bx.m {
                if (y * y) % p == f.eval_raw(x) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn curve_examples() {
        let f = poly(5, &[0, 0, 0, 1]);
        assert_eq!(
            count_curve_points(&f, &Box2::new(0, 0, 1)).unwrap().count,
            1
        );
        let f = poly(7, &[1, 0, 0, 1]);
        assert_eq!(
            count_curve_points(&f, &Box2::new(0, 0, 6)).unwrap().count,
            6
        );
        let f = poly(7, &[5, 0, 0, 1]);
        assert_eq!(
            count_curve_points(&f, &Box2::new(0, 0, 2)).unwrap().count,
            0
        );
    }

    #[test]
    fn graph_examples() {
        let f = poly(11, &[0, 0, 1]);
        assert_eq!(
            count_graph_points(&f, &Box2::new(0, 0, 3)).unwrap().count,
            1
        );
        assert_eq!(
            count_graph_points(&f, &Box2::new(0, 0, 10)).unwrap().count,
            10
        );
        let f = poly(5, &[1, 0, 1]);
        assert_eq!(
            count_graph_points(&f, &Box2::new(0, 0, 2)).unwrap().count,
            1
        );
    }

    #[test]
    fn box_validation() {
        let f = poly(5, &[0, 0, 0, 1]);
        assert!(matches!(
            count_curve_points(&f, &Box2::new(0, 0, 0)),
            Err(Error::InvalidBox(_))
        ));
        assert!(matches!(
            count_curve_points(&f, &Box2::new(1, 0, 4)),
            Err(Error::InvalidBox(_))
        ));
        assert!(count_curve_points(&f, &Box2::new(0, 0, 4)).is_ok());
        assert!(matches!(
            count_curve_points(&poly(5, &[3]), &Box2::new(0, 0, 2)),
            Err(Error::InvalidPolynomial(_))
        ));
        assert_eq!(Box2::parse("1, 2,3").unwrap(), Box2::new(1, 2, 3));
        assert!(Box2::parse("1,2").is_err());
    }

    #[test]
    fn weil_examples() {
        let f = poly(5, &[0, 0, 0, 1]);
        assert!(matches!(
            weil_error(&f, &Box2::new(0, 0, 0)),
            Err(Error::InvalidBox(_))
        ));
        let f = poly(7, &[1, 2, 1]);
        assert!(matches!(
            weil_error(&f, &Box2::new(0, 0, 3)),
            Err(Error::Reducible(_))
        ));
        let f = poly(10007, &[3, 2, 0, 1]);
        let w = weil_error(&f, &Box2::new(0, 0, 9000)).unwrap();
        assert_eq!(w.count, 8001);
        assert!(w.within(WEIL_CONSTANT));
        assert!((w.main_term - 81_000_000.0 / 10007.0).abs() < 1e-9);
    }

    #[test]
    fn bound_i_regimes() {
        let p = 1u64 << 40; // regime thresholds only depend on logs
        let eps = 0.05;
        let small = bound_i(20, p, 3, eps).unwrap(); // 20 < 2^5
        assert_eq!(small.regime, BoundRegime::CubicSmall);
        assert!((small.value - 20f64.powf(1.0 / 3.0 + eps)).abs() < 1e-9);

        let wide = bound_i(1 << 9, p, 3, eps).unwrap(); // 2^(200/23) ~ 2^8.7
        assert_eq!(wide.regime, BoundRegime::CubicWide);
        let mf = 512f64;
        let expect = (mf.powi(3) / p as f64).powf(1.0 / 16.0) * mf.powf(1.0 + eps);
        assert!((wide.value - expect).abs() < 1e-9 * expect);

        assert_eq!(
            bound_i(100, p, 3, eps).unwrap().regime,
            BoundRegime::CubicMiddle
        );
        assert_eq!(
            bound_i(1 << 14, p, 3, eps).unwrap().regime,
            BoundRegime::CubicFull
        );
        assert!(bound_i(10, p, 2, eps).is_err());
    }

    #[test]
    fn bound_i_degree_four() {
        let p = 1u64 << 40;
        let m = 1u64 << 10; // p^{1/4}
        let b = bound_i(m, p, 4, 0.0).unwrap();
        let mf = m as f64;
        let expect = mf * (mf.powi(3) / p as f64).powf(1.0 / 30.0) + mf.powf(1.0 - 1.0 / 30.0);
        assert_eq!(b.regime, BoundRegime::HigherDegree);
        assert!((b.value - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn bound_j_examples() {
        let p = 1u64 << 40;
        let m = 1u64 << 20;
        let expect = 1.0 + (p as f64).powf(0.25);
        assert!((bound_j(m, p, 2, 0.0).unwrap() - expect).abs() < 1e-9 * expect);
        let v = bound_j(100, 1_000_000, 3, 0.0).unwrap();
        assert!((v - (0.01 + 100f64.powf(0.75))).abs() < 1e-12);
        let v = bound_j(1, 101, 2, 0.0).unwrap();
        assert!((v - (1.0 / 101.0 + 1.0)).abs() < 1e-12);
        assert!(bound_j(1, 101, 1, 0.0).is_err());
    }

    #[test]
    fn oracle_equivalence_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let p = [31u64, 101, 211][rng.gen_range(0..3)];
            let deg = rng.gen_range(1..6);
            let mut c: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..p)).collect();
            c.push(rng.gen_range(1..p));
            let f = poly(p, &c);
            let m = rng.gen_range(1..p - 1);
            let bx = Box2::new(rng.gen_range(0..p - m), rng.gen_range(0..p - m), m);
            let fast = count_curve_points(&f, &bx).unwrap().count;
            let slow = count_curve_points_with(&f, &bx, CountMethod::Naive)
                .unwrap()
                .count;
            assert_eq!(fast, slow);
            assert_eq!(fast, naive_curve(&f, &bx));
            assert!(fast <= 2 * m);
            let g = count_graph_points(&f, &bx).unwrap().count;
            assert_eq!(
                g,
                count_graph_points_with(&f, &bx, CountMethod::Naive)
                    .unwrap()
                    .count
            );
            assert!(g <= m);
        }
    }

    proptest! {
        #[test]
        fn chunking_does_not_change_counts(
            c in proptest::collection::vec(0u64..211, 4),
            r in 0u64..100, s in 0u64..100, m in 1u64..100, chunk in 1u64..300,
        ) {
            let mut c = c;
            c.push(1);
            let f = poly(211, &c);
            let bx = Box2::new(r, s, m);
            let a = curve_count_chunked(&f, &bx, CountMethod::SqrtScan, chunk).unwrap();
            let b = curve_count_chunked(&f, &bx, CountMethod::SqrtScan, 1 << 20).unwrap();
            prop_assert_eq!(a, b);
            let a = graph_count_chunked(&f, &bx, CountMethod::SqrtScan, chunk).unwrap();
            let b = graph_count_chunked(&f, &bx, CountMethod::SqrtScan, 1 << 20).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn translating_x_recenters_the_polynomial(
            c in proptest::collection::vec(0u64..101, 4),
            r in 0u64..60, t in 0u64..60, s in 0u64..40, m in 1u64..40,
        ) {
            prop_assume!(t <= r);
            let mut c = c;
            c.push(1);
            let f = poly(101, &c);
            let shifted = f.shift(t);
            let a = count_curve_points(&f, &Box2::new(r, s, m)).unwrap().count;
            let b = count_curve_points(&shifted, &Box2::new(r - t, s, m)).unwrap().count;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn counts_are_monotone_in_box_size(
            c in proptest::collection::vec(0u64..211, 3),
            r in 0u64..100, s in 0u64..100, m in 1u64..100,
        ) {
            let mut c = c;
            c.push(1);
            let f = poly(211, &c);
            let small = Box2::new(r, s, m);
            let big = Box2::new(r, s, m + 10);
            prop_assert!(count_curve_points(&f, &small).unwrap().count
                <= count_curve_points(&f, &big).unwrap().count);
            prop_assert!(count_graph_points(&f, &small).unwrap().count
                <= count_graph_points(&f, &big).unwrap().count);
        }
    }
}
