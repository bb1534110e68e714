//! Lattices `{X in Z^n : c . X = 0 mod p}` against boxes, plus the small
//! determinant and plane-curve counts that sit next to them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::{FpElement, FpPolynomial, PrimeModulus};

pub const MAX_DIM: usize = 6;
/// Cap on enumerated free-coordinate tuples.
pub const ENUMERATION_LIMIT: f64 = 1e9;
pub const AUX_M_LIMIT: u64 = 1_000_000;
/// Halfwidth factor of the box attached to a shifted elliptic count.
pub const THM2_FACTOR: u64 = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceLattice {
    pub coeffs: Vec<i64>,
    pub p: u64,
}

impl CongruenceLattice {
    pub fn new(coeffs: Vec<i64>, p: u64) -> Result<Self> {
        PrimeModulus::new(p)?;
        if !(2..=MAX_DIM).contains(&coeffs.len()) {
            return Err(Error::param(
                "n",
                format!("dimension must be in [2, {MAX_DIM}], got {}", coeffs.len()),
            ));
        }
        Ok(Self { coeffs, p })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn modulus(&self) -> PrimeModulus {
        PrimeModulus::new(self.p).expect("checked in new")
    }

    fn residues(&self) -> Vec<u64> {
        let m = self.modulus();
        self.coeffs
            .iter()
            .map(|&c| m.elem_signed(c).value())
            .collect()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let m = self.modulus();
        let s = self.coeffs.iter().zip(x).fold(0u64, |acc, (&c, &v)| {
            m.add(
                acc,
                m.mul(m.elem_signed(c).value(), m.elem_signed(v).value()),
            )
        });
        s == 0
    }

    /// Index of Γ in `Z^n`.
    pub fn determinant(&self) -> u64 {
        if self.residues().iter().any(|&c| c != 0) {
            self.p
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexBox {
    pub halfwidths: Vec<f64>,
}

impl ConvexBox {
    pub fn new(halfwidths: Vec<f64>) -> Result<Self> {
        if halfwidths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::param("halfwidths", "must be positive and finite"));
        }
        Ok(Self { halfwidths })
    }

    pub fn cube(n: usize, w: f64) -> Result<Self> {
        Self::new(vec![w; n])
    }

    pub fn dim(&self) -> usize {
        self.halfwidths.len()
    }

    /// Smallest `lambda` with `v in lambda D`.
    pub fn gauge(&self, v: &[i64]) -> f64 {
        v.iter()
            .zip(&self.halfwidths)
            .map(|(&x, &w)| x.unsigned_abs() as f64 / w)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.halfwidths.iter().map(|w| w * t).collect())
    }

    pub fn volume(&self) -> f64 {
        self.halfwidths.iter().map(|w| 2.0 * w).product()
    }
}

fn check_dims(l: &CongruenceLattice, d: &ConvexBox) -> Result<()> {
    if l.dim() != d.dim() {
        return Err(Error::param(
            "halfwidths",
            format!("lattice has dimension {}, body {}", l.dim(), d.dim()),
        ));
    }
    Ok(())
}

/// Walks `Γ ∩ scale·D`: free coordinates by odometer, the solved coordinate
/// through its residue class. Parallel over the first free coordinate.
fn fold_points<T, I, F, R>(
    l: &CongruenceLattice,
    d: &ConvexBox,
    scale: f64,
    init: I,
    fold: F,
    reduce: R,
) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, &[i64]) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    check_dims(l, d)?;
    let n = l.dim();
    let m = l.modulus();
    let p = l.p as i64;
    let c = l.residues();
    let bounds: Vec<i64> = d
        .halfwidths
        .iter()
        .map(|w| (w * scale).floor().min(i64::MAX as f64 / 4.0) as i64)
        .collect();
    let k = (0..n)
        .filter(|&i| c[i] != 0)
        .max_by(|&a, &b| d.halfwidths[a].total_cmp(&d.halfwidths[b]).then(b.cmp(&a)))
        .ok_or_else(|| Error::param("coeffs", "every coefficient is divisible by p"))?;
    let free: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let volume: f64 = free.iter().map(|&j| (2 * bounds[j] + 1) as f64).product();
    if volume > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded {
            what: "lattice enumeration",
            needed: volume,
            limit: ENUMERATION_LIMIT,
        });
    }
    let neg_inv_ck = m.neg(m.inv(c[k]).expect("nonzero"));
    let bk = bounds[k];
    let lead = free[0];
    let result = (-bounds[lead]..=bounds[lead])
        .into_par_iter()
        .fold(&init, |mut acc, x_lead| {
            let mut x = vec![0i64; n];
            x[lead] = x_lead;
            for &j in &free[1..] {
                x[j] = -bounds[j];
            }
            let mut sum = free.iter().fold(0u64, |s, &j| {
                m.add(s, m.mul(c[j], m.elem_signed(x[j]).value()))
            });
            loop {
                let r = m.mul(neg_inv_ck, sum) as i64;
                // smallest value >= -bk congruent to r
                let mut xk = -bk + (r + bk).rem_euclid(p);
                while xk <= bk {
                    x[k] = xk;
                    acc = fold(acc, &x);
                    xk += p;
                }
                let mut t = free.len();
                loop {
                    if t == 1 {
                        return acc;
                    }
                    t -= 1;
                    let j = free[t];
                    if x[j] < bounds[j] {
                        x[j] += 1;
                        sum = m.add(sum, c[j]);
                        break;
                    }
                    let span = m.elem((2 * bounds[j]) as u64).value();
                    sum = m.sub(sum, m.mul(c[j], span));
                    x[j] = -bounds[j];
                }
            }
        })
        .reduce(&init, &reduce);
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePoints {
    pub count: u64,
    pub points: Option<Vec<Vec<i64>>>,
}

/// `#(Γ ∩ scale·D)`, origin included.
pub fn lattice_points_in_box(
    l: &CongruenceLattice,
    d: &ConvexBox,
    scale: f64,
    collect: bool,
) -> Result<LatticePoints> {
    if collect {
        let mut pts = fold_points(
            l,
            d,
            scale,
            Vec::new,
            |mut acc: Vec<Vec<i64>>, x| {
                acc.push(x.to_vec());
                acc
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        pts.sort_unstable();
        Ok(LatticePoints {
            count: pts.len() as u64,
            points: Some(pts),
        })
    } else {
        let count = fold_points(l, d, scale, || 0u64, |a, _| a + 1, |a, b| a + b)?;
        Ok(LatticePoints {
            count,
            points: None,
        })
    }
}

/// Rank over Q by fraction-free elimination; errors instead of overflowing.
pub fn rank(rows: &[Vec<i64>]) -> Result<usize> {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..nrows {
            for cc in col + 1..ncols {
                let v = a[rank][col]
                    .checked_mul(a[r][cc])
                    .and_then(|x| x.checked_sub(a[r][col].checked_mul(a[rank][cc])?))
                    .ok_or(Error::Overflow("rank elimination"))?;
                a[r][cc] = v / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    Ok(rank)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaReport {
    pub lambdas: Vec<f64>,
    pub witnesses: Vec<Vec<i64>>,
}

/// Minimum-gauge basis of the vectors seen so far. Ties are broken
/// lexicographically, which makes the basis independent of visit order.
#[derive(Debug)]
struct MinBasis {
    n: usize,
    items: Vec<(f64, Vec<i64>)>,
    err: Option<Error>,
}

fn key_cmp(a: &(f64, Vec<i64>), b: &(f64, Vec<i64>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

impl MinBasis {
    fn new(n: usize) -> Self {
        Self {
            n,
            items: Vec::with_capacity(n),
            err: None,
        }
    }

    fn place(&mut self, item: (f64, Vec<i64>)) {
        let pos = self
            .items
            .partition_point(|x| key_cmp(x, &item) == Ordering::Less);
        self.items.insert(pos, item);
    }

    fn rank_with(&self, skip: Option<usize>, v: &[i64]) -> Result<usize> {
        let mut rows: Vec<Vec<i64>> = self
            .items
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, x)| x.1.clone())
            .collect();
        rows.push(v.to_vec());
        rank(&rows)
    }

    fn offer(&mut self, gauge: f64, v: &[i64]) {
        if self.err.is_some() || v.iter().all(|&x| x == 0) {
            return;
        }
        let mut v = v.to_vec();
        if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let item = (gauge, v);
        if self.items.len() == self.n
            && key_cmp(&item, self.items.last().expect("full")) != Ordering::Less
        {
            return;
        }
        if let Err(e) = self.try_offer(item) {
            self.err = Some(e);
        }
    }

    fn try_offer(&mut self, item: (f64, Vec<i64>)) -> Result<()> {
        let r = self.items.len();
        if self.rank_with(None, &item.1)? == r + 1 {
            self.place(item);
            return Ok(());
        }
        // exchange with the heaviest circuit element that outweighs the newcomer
        for j in (0..r).rev() {
            if key_cmp(&self.items[j], &item) != Ordering::Greater {
                break;
            }
            if self.rank_with(Some(j), &item.1)? == r {
                self.items.remove(j);
                self.place(item);
                return Ok(());
            }
        }
        Ok(())
    }

    fn merge(mut self, other: MinBasis) -> MinBasis {
        if self.err.is_some() {
            return self;
        }
        if let Some(e) = other.err {
            self.err = Some(e);
            return self;
        }
        for (g, v) in other.items {
            self.offer(g, &v);
        }
        self
    }
}

/// Exact successive minima of D with respect to Γ, with witnesses.
pub fn successive_minima(l: &CongruenceLattice, d: &ConvexBox) -> Result<MinimaReport> {
    check_dims(l, d)?;
    let n = l.dim();
    let det = l.determinant() as f64;
    let wmax = d.halfwidths.iter().copied().fold(0.0, f64::max);
    let prod_w: f64 = d.halfwidths.iter().product();
    // p e_i lies in Γ, so lambda_n never exceeds this
    let ceiling = d.halfwidths.iter().map(|w| det / w).fold(0.0, f64::max);
    let mut scale = (1.0 / wmax).max((det / prod_w).powf(1.0 / n as f64));
    loop {
        let s = scale.min(ceiling);
        let basis = fold_points(
            l,
            d,
            s,
            || MinBasis::new(n),
            |mut b, x| {
                b.offer(d.gauge(x), x);
                b
            },
            MinBasis::merge,
        )?;
        if let Some(e) = basis.err {
            return Err(e);
        }
        if basis.items.len() == n {
            return Ok(MinimaReport {
                lambdas: basis.items.iter().map(|x| x.0).collect(),
                witnesses: basis.items.into_iter().map(|x| x.1).collect(),
            });
        }
        if s >= ceiling {
            return Err(Error::CrossCheck(format!(
                "only {} independent vectors at scale {s}",
                basis.items.len()
            )));
        }
        scale *= 2.0;
    }
}

/// `(2n+1)!! = 3 * 5 * ... * (2n+1)`.
pub fn odd_double_factorial(n: u32) -> u128 {
    (1..=n as u128).map(|i| 2 * i + 1).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cor7Report {
    pub product: f64,
    pub bound: f64,
    pub count: u64,
    pub pass: bool,
}

/// `prod min{lambda_i, 1} <= (2n+1)!! / #(D ∩ Γ)`.
pub fn cor7_check(l: &CongruenceLattice, d: &ConvexBox) -> Result<Cor7Report> {
    let minima = successive_minima(l, d)?;
    let count = lattice_points_in_box(l, d, 1.0, false)?.count;
    let product: f64 = minima.lambdas.iter().map(|&x| x.min(1.0)).product();
    let bound = odd_double_factorial(l.dim() as u32) as f64 / count as f64;
    Ok(Cor7Report {
        product,
        bound,
        count,
        pass: product <= bound * (1.0 + 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm2Lattice {
    /// Coordinates `(X_2, X_3, X~_2, X_1, X~_1)`.
    pub lattice: CongruenceLattice,
    pub body: ConvexBox,
    /// Set when `8 M^3 >= p`.
    pub wide_box: bool,
    /// Solutions of `y^2 - c_0 y = c_3 x^3 + c_2 x^2 + c_1 x` with `|x|, |y| <= M`.
    pub shifted_count: u64,
    /// Distinct x among those solutions.
    pub shifted_xs: u64,
}

/// `y^2 - c_0 y = c_3 x^3 + c_2 x^2 + c_1 x (mod p)` over `|x|, |y| <= M`.
pub fn shifted_elliptic_count(c: [u64; 4], m: u64, modulus: PrimeModulus) -> (u64, u64) {
    let md = &modulus;
    let c: Vec<u64> = c.iter().map(|&x| x % md.value()).collect();
    let mi = m as i64;
    let (mut total, mut xs) = (0u64, 0u64);
    for x in -mi..=mi {
        let xv = md.elem_signed(x).value();
        let rhs = md.mul(xv, md.add(c[1], md.mul(xv, md.add(c[2], md.mul(xv, c[3])))));
        let hits = (-mi..=mi)
            .filter(|&y| {
                let yv = md.elem_signed(y).value();
                md.sub(md.mul(yv, yv), md.mul(c[0], yv)) == rhs
            })
            .count() as u64;
        total += hits;
        xs += (hits > 0) as u64;
    }
    (total, xs)
}

/// The lattice `X_2 + c_3 X_3 + c_2 X~_2 + c_1 X_1 + c_0 X~_1 = 0 (mod p)` and
/// body `|X_2|, |X~_2| <= 8M^2`, `|X_3| <= 8M^3`, `|X_1|, |X~_1| <= 8M`.
pub fn build_thm2_lattice(c: [u64; 4], m: u64, modulus: PrimeModulus) -> Result<Thm2Lattice> {
    if m == 0 {
        return Err(Error::param("M", "need M >= 1"));
    }
    let p = modulus.value();
    let r = |x: u64| (x % p) as i64;
    let lattice = CongruenceLattice::new(vec![1, r(c[3]), r(c[2]), r(c[1]), r(c[0])], p)?;
    let (m1, m2, m3) = (m as f64, (m * m) as f64, (m as f64).powi(3));
    let f = THM2_FACTOR as f64;
    let body = ConvexBox::new(vec![f * m2, f * m3, f * m2, f * m1, f * m1])?;
    let (shifted_count, shifted_xs) = shifted_elliptic_count(c, m, modulus);
    Ok(Thm2Lattice {
        lattice,
        body,
        wide_box: f * m3 >= p as f64,
        shifted_count,
        shifted_xs,
    })
}

/// Determinant of a square matrix over F_p.
pub fn det_mod(rows: &[Vec<u64>], modulus: PrimeModulus) -> u64 {
    let m = &modulus;
    let n = rows.len();
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % m.value()).collect())
        .collect();
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            det = m.neg(det);
        }
        det = m.mul(det, a[col][col]);
        let inv = m.inv(a[col][col]).expect("nonzero pivot");
        for r in col + 1..n {
            let f = m.mul(a[r][col], inv);
            if f == 0 {
                continue;
            }
            for cc in col..n {
                a[r][cc] = m.sub(a[r][cc], m.mul(f, a[col][cc]));
            }
        }
    }
    det
}

/// Row `[x^n, ..., x, y]` of the determinant.
pub fn lemma6_row(modulus: PrimeModulus, n: usize, x: u64, y: u64) -> Vec<u64> {
    let mut row: Vec<u64> = (1..=n as u64).rev().map(|e| modulus.pow(x, e)).collect();
    row.push(y);
    row
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma6Report {
    pub count: u64,
    pub bound: u64,
    /// `y = h(x)` on the determinant locus.
    pub h: FpPolynomial,
    pub pass: bool,
}

fn lemma6_validate(
    f: &FpPolynomial,
    g: &FpPolynomial,
    xs: &[FpElement],
    ys: &[FpElement],
) -> Result<(usize, usize)> {
    let modulus = f.modulus();
    if g.modulus() != modulus || xs.iter().chain(ys).any(|e| e.modulus() != modulus) {
        return Err(Error::ModulusMismatch {
            left: modulus.value(),
            right: g.modulus().value(),
        });
    }
    let n = f
        .degree()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::InvalidPolynomial("f must have degree at least 1".into()))?;
    let m = g
        .degree()
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::InvalidPolynomial("g must have degree at least 1".into()))?;
    if n % m == 0 {
        return Err(Error::param(
            "g",
            format!("deg g = {m} divides deg f = {n}"),
        ));
    }
    if xs.len() != n || ys.len() != n {
        return Err(Error::param(
            "xs",
            format!("need exactly {n} nodes and values"),
        ));
    }
    let mut seen: Vec<u64> = xs.iter().map(|e| e.value()).collect();
    if seen.contains(&0) {
        return Err(Error::param("xs", "nodes must be nonzero mod p"));
    }
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != n {
        return Err(Error::param("xs", "nodes must be pairwise distinct mod p"));
    }
    Ok((n, m))
}

/// Solutions of `f(x) = g(y)` on the locus where the `(n+1) x (n+1)`
/// determinant vanishes. The locus is the graph of one polynomial h, so
/// the count is `#{x : f(x) = g(h(x))}`.
pub fn lemma6_count(
    f: &FpPolynomial,
    g: &FpPolynomial,
    xs: &[FpElement],
    ys: &[FpElement],
) -> Result<Lemma6Report> {
    let (n, m) = lemma6_validate(f, g, xs, ys)?;
    let modulus = f.modulus();
    let md = &modulus;
    let nodes: Vec<Vec<u64>> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| lemma6_row(modulus, n, x.value(), y.value()))
        .collect();
    // first-row cofactors
    let cof: Vec<u64> = (0..=n)
        .map(|j| {
            let minor: Vec<Vec<u64>> = nodes
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let d = det_mod(&minor, modulus);
            if j % 2 == 1 {
                md.neg(d)
            } else {
                d
            }
        })
        .collect();
    let b = cof[n];
    let neg_inv_b = md.neg(md.inv(b).ok_or_else(|| {
        Error::CrossCheck("node minor vanishes for distinct nonzero nodes".into())
    })?);
    let mut h_coeffs = vec![0u64; n + 1];
    for j in 0..n {
        h_coeffs[n - j] = md.mul(neg_inv_b, cof[j]);
    }
    let h = FpPolynomial::new(modulus, h_coeffs);

    let interp = interpolate_through_origin(modulus, xs, ys);
    if interp != h {
        return Err(Error::CrossCheck(format!(
            "cofactor h = {h} but interpolant = {interp}"
        )));
    }
    let count = (0..md.value())
        .filter(|&x| f.eval_raw(x) == g.eval_raw(h.eval_raw(x)))
        .count() as u64;
    let bound = (m * n) as u64;
    Ok(Lemma6Report {
        count,
        bound,
        h,
        pass: count <= bound,
    })
}

/// Lagrange interpolant through `(0, 0)` and `(x_i, y_i)`.
fn interpolate_through_origin(
    modulus: PrimeModulus,
    xs: &[FpElement],
    ys: &[FpElement],
) -> FpPolynomial {
    let md = &modulus;
    let mut nodes: Vec<u64> = vec![0];
    nodes.extend(xs.iter().map(|e| e.value()));
    let mut vals: Vec<u64> = vec![0];
    vals.extend(ys.iter().map(|e| e.value()));
    let mut acc = FpPolynomial::zero(modulus);
    for (i, (&xi, &yi)) in nodes.iter().zip(&vals).enumerate() {
        if yi == 0 {
            continue;
        }
        let mut basis = FpPolynomial::constant(modulus, 1);
        let mut denom = 1u64;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                basis = basis.mul(&FpPolynomial::new(modulus, vec![md.neg(xj), 1]));
                denom = md.mul(denom, md.sub(xi, xj));
            }
        }
        let s = md.mul(yi, md.inv(denom).expect("distinct nodes"));
        acc = acc.add(&basis.scale(s));
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxCurveCounts {
    /// z -> number of `(x, y)` with `|x|, |y| <= M` on the curve.
    pub per_z: BTreeMap<i128, u64>,
    pub total: u64,
    pub max_per_z: u64,
    /// `max_per_z / (H^{1/d} exp(12 sqrt(d log H log log H)))`, `H = max(M, 16)`.
    pub bombieri_pila_ratio: f64,
}

/// Integer points of `D_1 x^h + ... + D_h x + D_{h+1} y - Delta y^2 = p z`
/// with `|x|, |y| <= M`, grouped by z.
pub fn integer_points_on_aux_curve(
    delta: i64,
    ds: &[i64],
    m: u64,
    p: u64,
) -> Result<AuxCurveCounts> {
    let modulus = PrimeModulus::new(p)?;
    let md = &modulus;
    if delta == 0 {
        return Err(Error::param("Delta", "must be nonzero"));
    }
    if ds.len() < 2 {
        return Err(Error::param("D", "need D_1, ..., D_{h+1} with h >= 1"));
    }
    if m > AUX_M_LIMIT {
        return Err(Error::GuardExceeded {
            what: "aux curve enumeration",
            needed: m as f64,
            limit: AUX_M_LIMIT as f64,
        });
    }
    let h = ds.len() - 1;
    let ylin = ds[h];
    let mi = m as i64;
    let pi = p as i128;
    let a = md.elem_signed(delta).value();
    let b = md.neg(md.elem_signed(ylin).value());
    let inv_2a = md.inv(md.mul(2, a));
    let px = |x: i64| -> Result<i128> {
        ds[..h]
            .iter()
            .try_fold(0i128, |acc, &d| {
                acc.checked_mul(x as i128)
                    .and_then(|v| v.checked_add(d as i128))
                    .ok_or(Error::Overflow("aux curve polynomial"))
            })
            .and_then(|v| {
                v.checked_mul(x as i128)
                    .ok_or(Error::Overflow("aux curve polynomial"))
            })
    };
    let mut per_z: BTreeMap<i128, u64> = BTreeMap::new();
    for x in -mi..=mi {
        let poly = px(x)?;
        // Delta y^2 - D_{h+1} y - P(x) = 0 (mod p)
        let c = md.neg(md.reduce_i128(poly));
        let roots: Vec<u64> = match inv_2a {
            Some(inv) => {
                let disc = md.sub(md.mul(b, b), md.mul(4, md.mul(a, c)));
                match md.sqrt(disc) {
                    None => vec![],
                    Some(s) => {
                        let mut r =
                            vec![md.mul(md.sub(s, b), inv), md.mul(md.sub(md.neg(s), b), inv)];
                        r.sort_unstable();
                        r.dedup();
                        r
                    }
                }
            }
            None if b != 0 => vec![md.mul(md.neg(c), md.inv(b).expect("nonzero"))],
            None if c == 0 && p <= 2 * m + 1 => (0..p).collect(),
            None if c == 0 => (-mi..=mi).map(|y| y.rem_euclid(p as i64) as u64).collect(),
            None => vec![],
        };
        for r in roots {
            let mut y = -mi + (r as i64 + mi).rem_euclid(p as i64);
            while y <= mi {
                let yy = y as i128;
                let lhs = (ylin as i128)
                    .checked_mul(yy)
                    .and_then(|t| poly.checked_add(t))
                    .and_then(|t| t.checked_sub((delta as i128).checked_mul(yy * yy)?))
                    .ok_or(Error::Overflow("aux curve value"))?;
                debug_assert_eq!(lhs.rem_euclid(pi), 0);
                *per_z.entry(lhs.div_euclid(pi)).or_insert(0) += 1;
                y += p as i64;
            }
        }
    }
    let total = per_z.values().sum();
    let max_per_z = per_z.values().copied().max().unwrap_or(0);
    let d = h.max(2) as f64;
    let big_h = (m as f64).max(16.0);
    let bp = big_h.powf(1.0 / d) * (12.0 * (d * big_h.ln() * big_h.ln().ln()).sqrt()).exp();
    Ok(AuxCurveCounts {
        per_z,
        total,
        max_per_z,
        bombieri_pila_ratio: max_per_z as f64 / bp,
    })
}
