//! Orbits of `u_n = f(u_{n-1})` over F_p.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::boxcount::Box2;
use crate::error::{Error, Result};
use crate::ffield::{FpElement, FpPolynomial};

/// Largest p for which `trajectory_length` also runs the seen-set scan.
pub const SEEN_SET_LIMIT: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub f: FpPolynomial,
    pub u0: FpElement,
    pub values: Vec<u64>,
    pub tail_length: Option<u64>,
    pub cycle_length: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fills in tail and cycle lengths.
    pub fn resolve(&mut self) -> Result<TrajectoryLength> {
        let t = trajectory_length(&self.f, self.u0)?;
        self.tail_length = Some(t.tail);
        self.cycle_length = Some(t.cycle);
        Ok(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryLength {
    pub tail: u64,
    pub cycle: u64,
    /// Smallest t with `u_t = u_s` for some `s < t`.
    pub total: u64,
}

fn check_start(f: &FpPolynomial, u0: FpElement) -> Result<()> {
    if f.modulus() != u0.modulus() {
        return Err(Error::ModulusMismatch {
            left: f.modulus().value(),
            right: u0.modulus().value(),
        });
    }
    Ok(())
}

/// `u_0, ..., u_{N-1}`.
pub fn iterate(f: &FpPolynomial, u0: FpElement, n: usize) -> Result<Trajectory> {
    check_start(f, u0)?;
    if n == 0 {
        return Err(Error::param("N", "need at least one term"));
    }
    let mut values = Vec::with_capacity(n);
    let mut u = u0.value();
    values.push(u);
    for _ in 1..n {
        u = f.eval_raw(u);
        values.push(u);
    }
    Ok(Trajectory {
        f: f.clone(),
        u0,
        values,
        tail_length: None,
        cycle_length: None,
    })
}

/// Brent's cycle detection.
pub fn trajectory_length_brent(f: &FpPolynomial, u0: FpElement) -> Result<TrajectoryLength> {
    check_start(f, u0)?;
    let x0 = u0.value();
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = x0;
    let mut hare = f.eval_raw(x0);
    while tortoise != hare {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = f.eval_raw(hare);
        lam += 1;
    }
    let mut tortoise = x0;
    let mut hare = x0;
    for _ in 0..lam {
        hare = f.eval_raw(hare);
    }
    let mut mu = 0u64;
    while tortoise != hare {
        tortoise = f.eval_raw(tortoise);
        hare = f.eval_raw(hare);
        mu += 1;
    }
    Ok(TrajectoryLength {
        tail: mu,
        cycle: lam,
        total: mu + lam,
    })
}

/// Records the first index of each value until one repeats.
pub fn trajectory_length_seen_set(f: &FpPolynomial, u0: FpElement) -> Result<TrajectoryLength> {
    check_start(f, u0)?;
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut u = u0.value();
    let mut t = 0u64;
    loop {
        if let Some(&s) = seen.get(&u) {
            return Ok(TrajectoryLength {
                tail: s,
                cycle: t - s,
                total: t,
            });
        }
        seen.insert(u, t);
        u = f.eval_raw(u);
        t += 1;
    }
}

/// `T_{f,u0}` by Brent, confirmed by the seen-set scan when `p <= 10^8`.
pub fn trajectory_length(f: &FpPolynomial, u0: FpElement) -> Result<TrajectoryLength> {
    let brent = trajectory_length_brent(f, u0)?;
    if f.modulus().value() <= SEEN_SET_LIMIT {
        let seen = trajectory_length_seen_set(f, u0)?;
        if seen != brent {
            return Err(Error::CrossCheck(format!(
                "trajectory length: brent {brent:?} vs seen-set {seen:?}"
            )));
        }
    }
    Ok(brent)
}

/// `max_{k,m < N} |u_k - u_m|` with ordinary integer distance on `[0, p-1]`.
pub fn diameter(f: &FpPolynomial, u0: FpElement, n: usize) -> Result<u64> {
    let t = iterate(f, u0, n)?;
    Ok(diameter_of(&t.values))
}

pub fn diameter_of(values: &[u64]) -> u64 {
    match (values.iter().max(), values.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => 0,
    }
}

/// `min{ sqrt(N p), N^{1 + 1/(2^{m-1} - 1)} p^{-eps} }`, the lower-bound
/// shape for the diameter of an orbit of a degree-m map.
pub fn bound_diameter(n: u64, p: u64, m: u32, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("N", "need N >= 1"));
    }
    if m < 2 {
        return Err(Error::param("m", "need degree >= 2"));
    }
    let (nf, pf) = (n as f64, p as f64);
    let e = 1.0 + 1.0 / (2f64.powi(m as i32 - 1) - 1.0);
    Ok((nf * pf).sqrt().min(nf.powf(e) * pf.powf(-eps)))
}

/// `#{n < N-1 : (u_n, u_{n+1}) in box}`.
pub fn consecutive_pairs_in_box(values: &[u64], bx: &Box2) -> u64 {
    values
        .windows(2)
        .filter(|w| bx.contains_x(w[0]) && bx.contains_y(w[1]))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxcount::count_graph_points;
    use crate::ffield::PrimeModulus;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(p: u64, c: &[u64]) -> FpPolynomial {
        FpPolynomial::new(PrimeModulus::new(p).unwrap(), c.to_vec())
    }

    fn el(p: u64, v: u64) -> FpElement {
        PrimeModulus::new(p).unwrap().elem(v)
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(
            iterate(&poly(5, &[1, 0, 1]), el(5, 0), 4).unwrap().values,
            vec![0, 1, 2, 0]
        );
        assert_eq!(
            iterate(&poly(7, &[0, 1]), el(7, 4), 5).unwrap().values,
            vec![4; 5]
        );
        assert_eq!(
            iterate(&poly(7, &[0, 0, 1]), el(7, 3), 4).unwrap().values,
            vec![3, 2, 4, 2]
        );
        assert!(iterate(&poly(7, &[0, 1]), el(7, 4), 0).is_err());
        assert!(matches!(
            iterate(&poly(7, &[0, 1]), el(11, 4), 2),
            Err(Error::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn length_examples() {
        let t = trajectory_length(&poly(5, &[1, 0, 1]), el(5, 0)).unwrap();
        assert_eq!((t.tail, t.cycle, t.total), (0, 3, 3));
        let t = trajectory_length(&poly(7, &[0, 0, 1]), el(7, 3)).unwrap();
        assert_eq!((t.tail, t.cycle, t.total), (1, 2, 3));
        // 2 is fixed by X^2 - X
        let t = trajectory_length(&poly(7, &[0, 6, 1]), el(7, 2)).unwrap();
        assert_eq!(t.total, 1);
        let mut traj = iterate(&poly(7, &[0, 0, 1]), el(7, 3), 4).unwrap();
        traj.resolve().unwrap();
        assert_eq!((traj.tail_length, traj.cycle_length), (Some(1), Some(2)));
    }

    #[test]
    fn brent_matches_seen_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for p in [101u64, 1009, 10007] {
            for _ in 0..1000 {
                let deg = rng.gen_range(1..=4);
                let c: Vec<u64> = (0..=deg).map(|_| rng.gen_range(0..p)).collect();
                let f = poly(p, &c);
                let u0 = el(p, rng.gen_range(0..p));
                let a = trajectory_length_brent(&f, u0).unwrap();
                let b = trajectory_length_seen_set(&f, u0).unwrap();
                assert_eq!(a, b);
                assert!(a.total <= p && a.cycle >= 1);
                let v = iterate(&f, u0, a.total as usize + 1).unwrap().values;
                assert_eq!(v[a.total as usize], v[a.tail as usize]);
            }
        }
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&poly(5, &[1, 0, 1]), el(5, 0), 3).unwrap(), 2);
        assert_eq!(diameter(&poly(5, &[1, 0, 1]), el(5, 3), 1).unwrap(), 0);
        assert_eq!(diameter(&poly(7, &[0, 0, 1]), el(7, 3), 4).unwrap(), 2);
    }

    #[test]
    fn bound_examples() {
        let (n, p) = (50u64, 10007u64);
        let b = bound_diameter(n, p, 2, 0.1).unwrap();
        let want = ((n * p) as f64)
            .sqrt()
            .min((n * n) as f64 * (p as f64).powf(-0.1));
        assert!((b - want).abs() < 1e-9);
        let b = bound_diameter(1, p, 2, 0.1).unwrap();
        assert!((b - (p as f64).powf(-0.1)).abs() < 1e-12);
        let p = 1u64 << 30;
        // N = p^{1/3}, m = 3: min{p^{2/3}, N^{4/3}} = p^{4/9}
        let b = bound_diameter(1 << 10, p, 3, 0.0).unwrap();
        assert!((b - (p as f64).powf(4.0 / 9.0)).abs() < 1e-6 * b);
        assert!(bound_diameter(0, 7, 2, 0.0).is_err());
        assert!(bound_diameter(3, 7, 1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn diameter_is_monotone_and_bounded(
            c in prop::collection::vec(0u64..1009, 3..5),
            u0 in 0u64..1009,
            n in 1usize..300,
        ) {
            let f = poly(1009, &c);
            let vals = iterate(&f, el(1009, u0), n + 1).unwrap().values;
            let d1 = diameter_of(&vals[..n]);
            let d2 = diameter_of(&vals);
            prop_assert!(d1 <= d2 && d2 <= 1008);
            let brute = vals.iter()
                .flat_map(|a| vals.iter().map(move |b| a.abs_diff(*b)))
                .max().unwrap();
            prop_assert_eq!(d2, brute);
        }

        #[test]
        fn orbit_pairs_lie_on_the_graph(
            c in prop::collection::vec(0u64..1009, 3..5),
            u0 in 0u64..1009,
            r in 0u64..500, s in 0u64..500, m in 1u64..500,
        ) {
            let f = poly(1009, &c);
            let vals = iterate(&f, el(1009, u0), 400).unwrap().values;
            let bx = Box2::new(r, s, m);
            let pairs = consecutive_pairs_in_box(&vals[..vals.len().min(
                trajectory_length(&f, el(1009, u0)).unwrap().total as usize + 1)], &bx);
            prop_assert!(pairs <= count_graph_points(&f, &bx).unwrap().count);
        }
    }
}
