//! Slow, direct reference computations. Nothing here shares code with the
//! routines it checks beyond the field arithmetic.

use crate::boxcount::Box2;
use crate::ffield::{FpPolynomial, PrimeModulus};
use crate::hyperelliptic::CubeBox;
use crate::lattice::{det_mod, lemma6_row, rank, CongruenceLattice, ConvexBox};

/// `#{(x, y) in box : y^2 = f(x)}` by the double loop.
pub fn curve_count_scan(f: &FpPolynomial, bx: &Box2) -> u64 {
    let m = f.modulus();
    let mut n = 0;
    for x in bx.r + 1..=bx.r + bx.m {
        let fx = f.eval_raw(x);
        for y in bx.s + 1..=bx.s + bx.m {
            n += (m.mul(y, y) == fx) as u64;
        }
    }
    n
}

/// `#{(x, y) in box : y = f(x)}` by the double loop.
pub fn graph_count_scan(f: &FpPolynomial, bx: &Box2) -> u64 {
    let mut n = 0;
    for x in bx.r + 1..=bx.r + bx.m {
        let fx = f.eval_raw(x);
        for y in bx.s + 1..=bx.s + bx.m {
            n += (y == fx) as u64;
        }
    }
    n
}

/// Searches alpha directly, with `alpha^{4g+2-2i}` computed by `pow`.
pub fn isomorphic_direct(modulus: PrimeModulus, g: usize, a: &[u64], b: &[u64]) -> bool {
    (1..modulus.value()).any(|alpha| {
        (0..2 * g).all(|i| {
            let w = modulus.pow(alpha, (4 * g + 2 - 2 * i) as u64);
            a[i] % modulus.value() == modulus.mul(w, b[i])
        })
    })
}

/// Squarefree test by `gcd(f, f') = 1`.
pub fn is_squarefree_gcd(f: &FpPolynomial) -> bool {
    f.gcd(&f.derivative()).degree() == Some(0)
}

fn weierstrass(modulus: PrimeModulus, a: &[u64]) -> FpPolynomial {
    let mut c = a.to_vec();
    c.push(0);
    c.push(1);
    FpPolynomial::new(modulus, c)
}

fn cube_vectors(cube: &CubeBox) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    cube.for_each(|v| out.push(v.to_vec()));
    out
}

/// `N(H_b; B)` by testing every vector of the cube.
pub fn class_size_scan(modulus: PrimeModulus, b: &[u64], cube: &CubeBox) -> u64 {
    cube_vectors(cube)
        .iter()
        .filter(|a| isomorphic_direct(modulus, cube.g, a, b))
        .count() as u64
}

/// `(number of nonsingular vectors, T(B))` with T as the count of
/// isomorphic ordered pairs.
pub fn pair_count(modulus: PrimeModulus, cube: &CubeBox) -> (u64, u128) {
    let vecs: Vec<Vec<u64>> = cube_vectors(cube)
        .into_iter()
        .filter(|a| is_squarefree_gcd(&weierstrass(modulus, a)))
        .collect();
    let mut pairs = 0u128;
    for (i, a) in vecs.iter().enumerate() {
        pairs += 1;
        for b in &vecs[i + 1..] {
            if isomorphic_direct(modulus, cube.g, a, b) {
                pairs += 2;
            }
        }
    }
    (vecs.len() as u64, pairs)
}

/// `J_{k,m}(H)` by running over all `H^{2k}` tuples.
pub fn vinogradov_exhaustive(k: u32, m: u32, h: u64) -> u128 {
    let n = 2 * k as usize;
    let mut x = vec![1u64; n];
    let mut count = 0u128;
    loop {
        let ok = (1..=m).all(|j| {
            let lhs: u128 = x[..k as usize].iter().map(|&v| (v as u128).pow(j)).sum();
            let rhs: u128 = x[k as usize..].iter().map(|&v| (v as u128).pow(j)).sum();
            lhs == rhs
        });
        count += ok as u128;
        let mut i = n;
        loop {
            if i == 0 {
                return count;
            }
            i -= 1;
            if x[i] < h {
                x[i] += 1;
                break;
            }
            x[i] = 1;
        }
    }
}

/// Every integer vector of `scale D` tested against the congruence.
pub fn lattice_points_naive(l: &CongruenceLattice, d: &ConvexBox, scale: f64) -> Vec<Vec<i64>> {
    let b: Vec<i64> = d
        .halfwidths
        .iter()
        .map(|w| (w * scale).floor() as i64)
        .collect();
    let mut out = Vec::new();
    let mut x: Vec<i64> = b.iter().map(|v| -v).collect();
    loop {
        if l.contains(&x) {
            out.push(x.clone());
        }
        let mut i = x.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < b[i] {
                x[i] += 1;
                break;
            }
            x[i] = -b[i];
        }
    }
}

/// Successive minima by sorting every lattice vector of `scale D` by gauge
/// and keeping those that raise the rank. Exact once `scale >= lambda_n`.
pub fn minima_naive(l: &CongruenceLattice, d: &ConvexBox, scale: f64) -> Vec<f64> {
    let mut pts = lattice_points_naive(l, d, scale);
    pts.retain(|v| v.iter().any(|&x| x != 0));
    pts.sort_by(|a, b| d.gauge(a).total_cmp(&d.gauge(b)));
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut lambdas = Vec::new();
    for v in pts {
        chosen.push(v.clone());
        if rank(&chosen).expect("small entries") == chosen.len() {
            lambdas.push(d.gauge(&v));
        } else {
            chosen.pop();
        }
        if chosen.len() == l.dim() {
            break;
        }
    }
    lambdas
}

/// Every `(x, y) in F_p^2` with `f(x) = g(y)` and the full determinant zero.
pub fn lemma6_exhaustive(f: &FpPolynomial, g: &FpPolynomial, xs: &[u64], ys: &[u64]) -> u64 {
    let md = f.modulus();
    let n = xs.len();
    let nodes: Vec<Vec<u64>> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| lemma6_row(md, n, x, y))
        .collect();
    let gy: Vec<u64> = (0..md.value()).map(|y| g.eval_raw(y)).collect();
    let mut count = 0;
    for x in 0..md.value() {
        let fx = f.eval_raw(x);
        for (y, &v) in gy.iter().enumerate() {
            if v != fx {
                continue;
            }
            let mut rows = vec![lemma6_row(md, n, x, y as u64)];
            rows.extend(nodes.iter().cloned());
            count += (det_mod(&rows, md) == 0) as u64;
        }
    }
    count
}

/// `max |u_k - u_m|` over all pairs.
pub fn diameter_pairwise(values: &[u64]) -> u64 {
    let mut d = 0;
    for a in values {
        for b in values {
            d = d.max(a.abs_diff(*b));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_sanity() {
        assert_eq!(vinogradov_exhaustive(1, 1, 3), 3);
        assert_eq!(vinogradov_exhaustive(2, 2, 4), 2 * 16 - 4);
        assert_eq!(vinogradov_exhaustive(8, 3, 2), 12870);
        assert_eq!(diameter_pairwise(&[3, 2, 4, 2]), 2);
        let md = PrimeModulus::new(7).unwrap();
        assert!(isomorphic_direct(md, 1, &[1, 2], &[1, 1]));
        assert!(!isomorphic_direct(md, 1, &[1, 1], &[2, 1]));
        let f = FpPolynomial::new(md, vec![1, 0, 0, 1]);
        assert_eq!(curve_count_scan(&f, &Box2::new(0, 0, 6)), 6);
    }
}
