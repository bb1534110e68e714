//! Weierstrass curves `Y^2 = X^{2g+1} + a_{2g-1} X^{2g-1} + ... + a_0` and
//! their isomorphism classes inside small coefficient cubes.
//!
//! Two vectors are isomorphic when `a_i = alpha^{4g+2-2i} b_i` for some
//! nonzero alpha. Every weight is even, so the action factors through
//! `beta = alpha^2`: `a_i = beta^{2g+1-i} b_i`. Orbits are walked over the
//! `(p-1)/2` squares beta, which is what keeps per-vector work at O(p g).

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxcount::Box2;
use crate::error::{Error, Result};
use crate::ffield::{FpElement, FpPolynomial, PrimeModulus, QuadraticCharacter};

/// Default cap on `M^{2g}` for censuses.
pub const CENSUS_CELL_LIMIT: f64 = 1e9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurveVector {
    g: usize,
    a: Vec<u64>,
    modulus: PrimeModulus,
}

impl CurveVector {
    pub fn new(modulus: PrimeModulus, g: usize, a: Vec<u64>) -> Result<Self> {
        if g == 0 {
            return Err(Error::param("g", "genus must be at least 1"));
        }
        if a.len() != 2 * g {
            return Err(Error::param(
                "a",
                format!("genus {g} needs {} coefficients, got {}", 2 * g, a.len()),
            ));
        }
        let p = modulus.value();
        Ok(Self {
            g,
            a: a.into_iter().map(|c| c % p).collect(),
            modulus,
        })
    }

    /// Parses `a_0,...,a_{2g-1}`.
    pub fn parse(modulus: PrimeModulus, g: usize, text: &str) -> Result<Self> {
        let a = text
            .split(',')
            .map(|t| t.trim().parse::<i128>().map(|v| modulus.reduce_i128(v)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::param("a", format!("bad coefficient list `{text}`")))?;
        Self::new(modulus, g, a)
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.a
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn to_text(&self) -> String {
        self.a
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// `X^{2g+1} + a_{2g-1} X^{2g-1} + ... + a_0` (no `X^{2g}` term).
    pub fn weierstrass_polynomial(&self) -> FpPolynomial {
        let mut c = self.a.clone();
        c.push(0);
        c.push(1);
        FpPolynomial::new(self.modulus, c)
    }

    pub fn is_nonsingular(&self) -> bool {
        !self
            .weierstrass_polynomial()
            .discriminant()
            .expect("degree 2g+1 >= 3")
            .is_zero()
    }

    /// Image under alpha: `a_i -> alpha^{4g+2-2i} a_i`.
    pub fn act(&self, alpha: FpElement) -> CurveVector {
        let m = self.modulus;
        let beta = m.mul(alpha.value(), alpha.value());
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(i, &c)| m.mul(c, m.pow(beta, (2 * self.g + 1 - i) as u64)))
            .collect();
        CurveVector {
            g: self.g,
            a,
            modulus: m,
        }
    }

    fn check_compatible(&self, other: &CurveVector) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: other.modulus.value(),
            });
        }
        if self.g != other.g {
            return Err(Error::GenusMismatch {
                left: self.g,
                right: other.g,
            });
        }
        Ok(())
    }
}

/// Coefficient cube `[R_0+1, R_0+M] x ... x [R_{2g-1}+1, R_{2g-1}+M]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeBox {
    pub g: usize,
    pub r: Vec<u64>,
    pub m: u64,
}

impl CubeBox {
    pub fn new(g: usize, r: Vec<u64>, m: u64) -> Result<Self> {
        if g == 0 || r.len() != 2 * g {
            return Err(Error::param(
                "box",
                format!("genus {g} needs {} offsets, got {}", 2 * g, r.len()),
            ));
        }
        Ok(Self { g, r, m })
    }

    /// `[1, M]^{2g}`.
    pub fn origin(g: usize, m: u64) -> Result<Self> {
        Self::new(g, vec![0; 2 * g], m)
    }

    pub fn validate(&self, p: u64) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidBox("empty cube (M = 0)".into()));
        }
        for (j, &r) in self.r.iter().enumerate() {
            if r.checked_add(self.m).is_none_or(|end| end >= p) {
                return Err(Error::InvalidBox(format!(
                    "coordinate {j}: R={r} M={} leaves [1, {}]",
                    self.m,
                    p - 1
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, a: &[u64]) -> bool {
        a.iter()
            .zip(&self.r)
            .all(|(&x, &r)| x > r && x <= r + self.m)
    }

    pub fn volume(&self) -> u128 {
        (self.m as u128).pow(2 * self.g as u32)
    }

    /// Odometer over all vectors, first coordinate slowest.
    pub fn for_each(&self, mut visit: impl FnMut(&[u64])) {
        let dims = 2 * self.g;
        let mut v: Vec<u64> = self.r.iter().map(|r| r + 1).collect();
        loop {
            visit(&v);
            let mut d = dims;
            loop {
                if d == 0 {
                    return;
                }
                d -= 1;
                v[d] += 1;
                if v[d] <= self.r[d] + self.m {
                    break;
                }
                v[d] = self.r[d] + 1;
            }
        }
    }
}

/// Table of `beta^{2g+1-i}` for every square beta, one row per beta.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    g: usize,
    modulus: PrimeModulus,
    rows: Vec<u64>,
}

impl OrbitTable {
    pub fn new(modulus: PrimeModulus, g: usize) -> Self {
        let p = modulus.value();
        let width = 2 * g;
        let mut rows = Vec::with_capacity(((p - 1) / 2) as usize * width);
        for alpha in 1..=(p - 1) / 2 {
            let beta = modulus.mul(alpha, alpha);
            // exponents 2g+1, 2g, ..., 2 for i = 0..2g-1
            let mut pw = vec![0u64; width];
            let mut acc = modulus.mul(beta, beta);
            for i in (0..width).rev() {
                pw[i] = acc;
                acc = modulus.mul(acc, beta);
            }
            rows.extend(pw);
        }
        Self { g, modulus, rows }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.rows.chunks_exact(2 * self.g)
    }

    /// Lexicographically least vector in the orbit of `a`.
    pub fn canonical_key(&self, a: &[u64]) -> Vec<u64> {
        let m = &self.modulus;
        let mut best = a.to_vec();
        let mut cand = vec![0u64; a.len()];
        for row in self.rows() {
            for ((c, &x), &w) in cand.iter_mut().zip(a).zip(row) {
                *c = m.mul(x, w);
            }
            if cand < best {
                best.copy_from_slice(&cand);
            }
        }
        best
    }

    /// Distinct orbit members of `a` lying in `cube`.
    pub fn orbit_in_box(&self, a: &[u64], cube: &CubeBox) -> Vec<Vec<u64>> {
        let m = &self.modulus;
        let mut hits: Vec<Vec<u64>> = self
            .rows()
            .map(|row| {
                a.iter()
                    .zip(row)
                    .map(|(&x, &w)| m.mul(x, w))
                    .collect::<Vec<u64>>()
            })
            .filter(|v| cube.contains(v))
            .collect();
        hits.sort_unstable();
        hits.dedup();
        hits
    }
}

/// Every alpha in F_p^* with `a_i = alpha^{4g+2-2i} b_i` for all i.
pub fn isomorphism_scalars(a: &CurveVector, b: &CurveVector) -> Result<Vec<FpElement>> {
    a.check_compatible(b)?;
    let m = a.modulus;
    let g = a.g;
    let mut out = Vec::new();
    for alpha in 1..m.value() {
        let beta = m.mul(alpha, alpha);
        let ok = (0..2 * g).all(|i| {
            let w = m.pow(beta, (2 * g + 1 - i) as u64);
            a.a[i] == m.mul(w, b.a[i])
        });
        if ok {
            out.push(m.elem(alpha));
        }
    }
    Ok(out)
}

pub fn is_isomorphic(a: &CurveVector, b: &CurveVector) -> Result<bool> {
    Ok(!isomorphism_scalars(a, b)?.is_empty())
}

/// Lexicographically least member of the orbit of `a`.
pub fn canonical_representative(a: &CurveVector) -> CurveVector {
    let table = OrbitTable::new(a.modulus, a.g);
    CurveVector {
        g: a.g,
        a: table.canonical_key(&a.a),
        modulus: a.modulus,
    }
}

/// Distinct vectors in the orbit of `a`, sorted.
pub fn orbit(a: &CurveVector) -> Vec<CurveVector> {
    let mut v: Vec<CurveVector> = (1..a.modulus.value())
        .map(|alpha| a.act(a.modulus.elem(alpha)))
        .collect();
    v.sort_by(|x, y| x.a.cmp(&y.a));
    v.dedup();
    v
}

/// `{alpha : alpha . a = a}`.
pub fn stabilizer(a: &CurveVector) -> Vec<FpElement> {
    (1..a.modulus.value())
        .map(|alpha| a.modulus.elem(alpha))
        .filter(|&alpha| a.act(alpha) == *a)
        .collect()
}

/// `N(H_b; B)`: vectors of the cube isomorphic to `b`, found by walking the
/// orbit of b rather than scanning the cube.
pub fn count_isomorphic_in_box(b: &CurveVector, cube: &CubeBox) -> Result<u64> {
    if cube.g != b.g {
        return Err(Error::GenusMismatch {
            left: b.g,
            right: cube.g,
        });
    }
    cube.validate(b.modulus.value())?;
    if !b.is_nonsingular() {
        return Err(Error::Singular);
    }
    let table = OrbitTable::new(b.modulus, b.g);
    Ok(table.orbit_in_box(&b.a, cube).len() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCensus {
    /// Number of isomorphism classes meeting the cube.
    pub class_count: u64,
    /// `sum_H N(H; B)`: nonsingular vectors in the cube.
    pub total_nonsingular: u64,
    /// `T(B) = sum_H N(H; B)^2`.
    pub second_moment: u128,
    pub max_class_size: u64,
    /// `M^{2g}`, reported next to `total_nonsingular`.
    pub cube_volume: u128,
    pub singular_count: u64,
}

impl ClassCensus {
    /// `total^2 / T`, the Cauchy–Schwarz lower bound on the class count.
    pub fn cauchy_schwarz_lower_bound(&self) -> f64 {
        if self.second_moment == 0 {
            return 0.0;
        }
        (self.total_nonsingular as f64).powi(2) / self.second_moment as f64
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    pub max_cells: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            max_cells: CENSUS_CELL_LIMIT,
        }
    }
}

/// Class sizes keyed by canonical representative, for every nonsingular
/// vector of the cube, plus the number of singular vectors skipped.
pub fn class_sizes(
    modulus: PrimeModulus,
    cube: &CubeBox,
    opts: &CensusOptions,
) -> Result<(BTreeMap<Vec<u64>, u64>, u64)> {
    cube.validate(modulus.value())?;
    let cells = (cube.m as f64).powi(2 * cube.g as i32);
    if cells > opts.max_cells {
        return Err(Error::GuardExceeded {
            what: "class_census (use a smaller cube or sample it)",
            needed: cells,
            limit: opts.max_cells,
        });
    }
    let table = OrbitTable::new(modulus, cube.g);
    let g = cube.g;
    let first = cube.r[0] + 1..=cube.r[0] + cube.m;
    let (merged, singular) = first
        .into_par_iter()
        .map(|x0| {
            // slice with the first coordinate pinned
            let mut slice_r = cube.r.clone();
            slice_r[0] = x0 - 1;
            let mut local: HashMap<Vec<u64>, u64> = HashMap::new();
            let mut singular = 0u64;
            let mut poly_buf = vec![0u64; 2 * g + 2];
            poly_buf[2 * g + 1] = 1;
            for_each_in_slice(&slice_r, cube.m, |v| {
                poly_buf[..2 * g].copy_from_slice(v);
                let f = FpPolynomial::new(modulus, poly_buf.clone());
                if f.discriminant().expect("degree >= 3").is_zero() {
                    singular += 1;
                } else {
                    *local.entry(table.canonical_key(v)).or_insert(0) += 1;
                }
            });
            (local, singular)
        })
        .reduce(
            || (HashMap::new(), 0),
            |(mut a, sa), (b, sb)| {
                let (mut big, small) = if a.len() >= b.len() {
                    (a, b)
                } else {
                    (b, std::mem::take(&mut a))
                };
                for (k, c) in small {
                    *big.entry(k).or_insert(0) += c;
                }
                (big, sa + sb)
            },
        );
    Ok((merged.into_iter().collect(), singular))
}

fn for_each_in_slice(r: &[u64], m: u64, mut visit: impl FnMut(&[u64])) {
    // first coordinate fixed at r[0] + 1
    let dims = r.len();
    let mut v: Vec<u64> = r.iter().map(|x| x + 1).collect();
    loop {
        visit(&v);
        let mut d = dims;
        loop {
            if d == 1 {
                return;
            }
            d -= 1;
            v[d] += 1;
            if v[d] <= r[d] + m {
                break;
            }
            v[d] = r[d] + 1;
        }
    }
}

/// Census of isomorphism classes of nonsingular curves with coefficient
/// vector in the cube.
pub fn class_census(modulus: PrimeModulus, cube: &CubeBox) -> Result<ClassCensus> {
    class_census_with(modulus, cube, &CensusOptions::default())
}

pub fn class_census_with(
    modulus: PrimeModulus,
    cube: &CubeBox,
    opts: &CensusOptions,
) -> Result<ClassCensus> {
    let (sizes, singular_count) = class_sizes(modulus, cube, opts)?;
    Ok(ClassCensus {
        class_count: sizes.len() as u64,
        total_nonsingular: sizes.values().sum(),
        second_moment: sizes.values().map(|&n| (n as u128) * (n as u128)).sum(),
        max_class_size: sizes.values().copied().max().unwrap_or(0),
        cube_volume: cube.volume(),
        singular_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharpnessWitness {
    /// `Y^2 = X^{2g+1} + X^{2g-1} + ... + X + 1`.
    pub curve: CurveVector,
    /// Quadratic residues in `[1, floor(M^{1/(2g+1)})]`.
    pub residues: Vec<u64>,
    /// `#A` where `A = {alpha : alpha^2 in Q}`.
    pub witness_count: u64,
    /// Distinct cube vectors produced by A (alpha and -alpha coincide).
    pub witness_vectors: u64,
    /// `N(H; [1, M]^{2g})`.
    pub class_size: u64,
    /// `class_size >= witness_count`.
    pub holds: bool,
}

fn integer_root_floor(m: u64, k: u32) -> u64 {
    let mut r = (m as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && (r as u128).pow(k) > m as u128 {
        r -= 1;
    }
    while ((r + 1) as u128).pow(k) <= m as u128 {
        r += 1;
    }
    r
}

/// The all-ones curve against `[1, M]^{2g}`: every alpha with `alpha^2` a
/// small quadratic residue sends it into the cube.
pub fn sharpness_witness(modulus: PrimeModulus, m: u64, g: usize) -> Result<SharpnessWitness> {
    let p = modulus.value();
    if m == 0 || m >= p {
        return Err(Error::InvalidBox(format!(
            "[1, {m}] must lie inside [1, {}]",
            p - 1
        )));
    }
    let cube = CubeBox::origin(g, m)?;
    let curve = CurveVector::new(modulus, g, vec![1; 2 * g])?;
    let top = integer_root_floor(m, 2 * g as u32 + 1);
    let residues: Vec<u64> = (1..=top)
        .filter(|&q| modulus.character(q) == QuadraticCharacter::Residue)
        .collect();
    let alphas: Vec<u64> = (1..p)
        .filter(|&a| residues.binary_search(&modulus.mul(a, a)).is_ok())
        .collect();
    let mut vectors: Vec<Vec<u64>> = alphas
        .iter()
        .map(|&a| curve.act(modulus.elem(a)).a)
        .collect();
    debug_assert!(vectors.iter().all(|v| cube.contains(v)));
    vectors.sort_unstable();
    vectors.dedup();
    let class_size = count_isomorphic_in_box(&curve, &cube)?;
    let witness_count = alphas.len() as u64;
    Ok(SharpnessWitness {
        curve,
        residues,
        witness_count,
        witness_vectors: vectors.len() as u64,
        class_size,
        holds: class_size >= witness_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerCongruence {
    pub lambda: FpElement,
    /// Coordinate paired with `a_{2g-1}`: `2g + 1 - h`.
    pub index: usize,
    pub r: u64,
    pub s: u64,
    /// Solutions of `Y^h = lambda X^2` with `X in [R+1, R+M]`, `Y in [S+1, S+M]`.
    pub t_count: u64,
    /// `N(H_b; B)` when b is nonsingular.
    pub class_size: Option<u64>,
}

/// Pairs coordinates `2g+1-h` and `2g-1` of the isomorphism relation into
/// the two-variable congruence `a_{2g-1}^h = lambda a_{2g+1-h}^2` with
/// `lambda = b_{2g-1}^h / b_{2g+1-h}^2`.
pub fn reduce_to_power_congruence(
    b: &CurveVector,
    h: usize,
    cube: &CubeBox,
) -> Result<PowerCongruence> {
    let g = b.g;
    if !(2..=2 * g + 1).contains(&h) {
        return Err(Error::param(
            "h",
            format!("need 2 <= h <= {}, got {h}", 2 * g + 1),
        ));
    }
    if cube.g != g {
        return Err(Error::GenusMismatch {
            left: g,
            right: cube.g,
        });
    }
    let m = b.modulus;
    cube.validate(m.value())?;
    let j = 2 * g + 1 - h;
    let (bj, btop) = (b.a[j], b.a[2 * g - 1]);
    if bj == 0 || btop == 0 {
        return Err(Error::param(
            "b",
            format!("b_{j} and b_{} must be nonzero", 2 * g - 1),
        ));
    }
    let lambda = m.mul(
        m.pow(btop, h as u64),
        m.inv(m.mul(bj, bj)).expect("nonzero"),
    );
    let inv_lambda = m.inv(lambda).expect("nonzero");
    let (r, s) = (cube.r[j], cube.r[2 * g - 1]);
    let xs = Box2::new(r, s, cube.m);
    let t_count = (s + 1..=s + cube.m)
        .map(|y| {
            let target = m.mul(m.pow(y, h as u64), inv_lambda);
            match m.sqrt(target) {
                None | Some(0) => 0,
                Some(x) => xs.contains_x(x) as u64 + xs.contains_x(m.value() - x) as u64,
            }
        })
        .sum();
    let class_size = if b.is_nonsingular() {
        Some(count_isomorphic_in_box(b, cube)?)
    } else {
        None
    };
    Ok(PowerCongruence {
        lambda: m.elem(lambda),
        index: j,
        r,
        s,
        t_count,
        class_size,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NBoundBranch {
    /// `(M^{1/h} + M (M^4/p)^{2/(h(h+1))}) M^eps`, odd h in `[3, 2g+1]`
    OddPower,
    /// `M^2/p + M^{1/2+eps}`, genus at least 2
    QuadraticMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundN {
    pub value: f64,
    pub branch: NBoundBranch,
}

/// Smallest applicable upper-bound shape for `N(H; B)`.
pub fn bound_n(m: u64, p: u64, g: usize, h: usize, eps: f64) -> Result<BoundN> {
    let mf = m as f64;
    let pf = p as f64;
    let mut best: Option<BoundN> = None;
    let mut offer = |value: f64, branch| {
        if best.is_none_or(|b| value < b.value) {
            best = Some(BoundN { value, branch });
        }
    };
    if h % 2 == 1 && h >= 3 && h <= 2 * g + 1 {
        let hf = h as f64;
        let v = (mf.powf(1.0 / hf) + mf * (mf.powi(4) / pf).powf(2.0 / (hf * (hf + 1.0))))
            * mf.powf(eps);
        offer(v, NBoundBranch::OddPower);
    }
    if g >= 2 {
        offer(
            mf * mf / pf + mf.powf(0.5 + eps),
            NBoundBranch::QuadraticMap,
        );
    }
    best.ok_or_else(|| {
        Error::param(
            "h",
            format!("no bound applies for g={g}, h={h} (need odd h in [3, 2g+1] or g >= 2)"),
        )
    })
}
