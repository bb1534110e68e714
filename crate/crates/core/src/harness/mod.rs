//! Experiment specs, dispatch to the math modules, and result records.

pub mod cache;
pub mod config;
pub mod emit;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acceptance::{self, AcceptanceOptions};
use crate::analytic::{
    count_vinogradov_with_limit, exp_sum_mod, weyl_constant, weyl_majorant, weyl_square_identity,
    VinogradovInstance, VINOGRADOV_STATE_LIMIT,
};
use crate::boxcount::{
    bound_i, bound_j, count_curve_points_with, count_graph_points_with, weil_error, Box2,
    CountMethod, WEIL_CONSTANT,
};
use crate::dynsys::{
    bound_diameter, iterate, trajectory_length_brent, trajectory_length_seen_set, SEEN_SET_LIMIT,
};
use crate::error::{Error, Result};
use crate::ffield::{FpElement, FpPolynomial, PrimeModulus};
use crate::hyperelliptic::{
    canonical_representative, class_census_with, count_isomorphic_in_box, isomorphism_scalars,
    sharpness_witness, CensusOptions, CubeBox, CurveVector, CENSUS_CELL_LIMIT,
};
use crate::lattice::{
    build_thm2_lattice, cor7_check, lattice_points_in_box, lemma6_count, successive_minima,
    CongruenceLattice, ConvexBox,
};
use crate::oracle;

pub use cache::{cache_key, Cache};
pub use emit::{emit, OutputFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CountCurve,
    CountGraph,
    Weil,
    Census,
    Sharpness,
    Dynsys,
    Vinogradov,
    Lattice,
    Lemma6,
    Acceptance,
    CurveIso,
    Expsum,
    Thm2Lattice,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 13] = [
        Self::CountCurve,
        Self::CountGraph,
        Self::Weil,
        Self::Census,
        Self::Sharpness,
        Self::Dynsys,
        Self::Vinogradov,
        Self::Lattice,
        Self::Lemma6,
        Self::Acceptance,
        Self::CurveIso,
        Self::Expsum,
        Self::Thm2Lattice,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CountCurve => "count_curve",
            Self::CountGraph => "count_graph",
            Self::Weil => "weil",
            Self::Census => "census",
            Self::Sharpness => "sharpness",
            Self::Dynsys => "dynsys",
            Self::Vinogradov => "vinogradov",
            Self::Lattice => "lattice",
            Self::Lemma6 => "lemma6",
            Self::Acceptance => "acceptance",
            Self::CurveIso => "curve_iso",
            Self::Expsum => "expsum",
            Self::Thm2Lattice => "thm2_lattice",
        }
    }

    /// Keys accepted in `params`; the first group is required.
    pub fn keys(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Self::CountCurve | Self::CountGraph => {
                (&["p", "f", "box"], &["method", "eps", "oracle_limit"])
            }
            Self::Weil => (&["p", "f", "box"], &["c"]),
            Self::Census => (&["p", "g", "M"], &["box", "max_cells", "oracle_limit"]),
            Self::Sharpness => (&["p", "g", "M"], &["oracle_limit"]),
            Self::Dynsys => (&["p", "f", "u0"], &["N", "eps"]),
            Self::Vinogradov => (&["k", "m", "H"], &["state_limit", "oracle_limit"]),
            Self::Lattice => (&["coeffs", "p", "halfwidths"], &["n", "oracle_limit"]),
            Self::Lemma6 => (&["p", "f", "g", "xs", "ys"], &["oracle_limit"]),
            Self::Acceptance => (&[], &["quick", "only"]),
            Self::CurveIso => (&["p", "g", "a", "b"], &["box", "M", "oracle_limit"]),
            Self::Expsum => (&["p", "f", "k", "M"], &[]),
            Self::Thm2Lattice => (&["p", "c", "M"], &["minima"]),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param("kind", format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    /// Worker threads; 0 means rayon's default.
    pub threads: usize,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            seed: acceptance::DEFAULT_SEED,
            threads: 0,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// `k=v;k=v` in key order.
    pub fn canonical_params(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn validate(&self) -> Result<()> {
        let (required, optional) = self.kind.keys();
        for key in required {
            if !self.params.contains_key(*key) {
                return Err(Error::param(*key, format!("required for {}", self.kind)));
            }
        }
        for key in self.params.keys() {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(Error::param(
                    key,
                    format!("not a parameter of {}", self.kind),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub kind: String,
    pub params: String,
    pub value: f64,
    pub bound_value: Option<f64>,
    pub ratio: Option<f64>,
    pub oracle_value: Option<f64>,
    pub pass: bool,
    pub runtime_ms: u64,
}

impl ResultRecord {
    /// The same record with `runtime_ms` zeroed, for determinism checks.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

struct Row {
    label: String,
    value: f64,
    bound: Option<f64>,
    oracle: Option<f64>,
    pass: bool,
}

impl Row {
    fn new(label: impl Into<String>, value: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: None,
            oracle: None,
            pass: true,
        }
    }
    fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }
    fn oracle(mut self, o: Option<f64>) -> Self {
        self.oracle = o;
        self
    }
    fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn raw(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::param(key, "missing"))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.trim()
            .parse()
            .map_err(|_| Error::param(key, format!("cannot parse `{raw}`")))
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        if self.0.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.raw(key)?;
        raw.split(',')
            .map(|t| t.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::param(key, format!("cannot parse list `{raw}`")))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.0.get(key).map(|s| s.trim().to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if ["1", "true", "yes", ""].contains(&v.as_str()) => Ok(true),
            Some(v) if ["0", "false", "no"].contains(&v.as_str()) => Ok(false),
            Some(v) => Err(Error::param(key, format!("expected a boolean, got `{v}`"))),
        }
    }

    fn modulus(&self) -> Result<PrimeModulus> {
        let p: u64 = self.get("p")?;
        PrimeModulus::new(p).map_err(|e| Error::param("p", e.to_string()))
    }

    fn poly(&self, key: &str, md: PrimeModulus) -> Result<FpPolynomial> {
        FpPolynomial::parse(md, self.raw(key)?).map_err(|e| Error::param(key, e.to_string()))
    }
}

/// Runs one experiment inside a pool of `spec.threads` workers.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    let start = Instant::now();
    let rows = pool.install(|| dispatch(spec))?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    let key = cache_key(spec);
    let params = spec.canonical_params();
    Ok(rows
        .into_iter()
        .map(|r| ResultRecord {
            experiment_id: format!("{}:{}", &key[..12], r.label),
            kind: spec.kind.to_string(),
            params: params.clone(),
            value: r.value,
            bound_value: r.bound,
            ratio: r.bound.filter(|&b| b > 0.0).map(|b| r.value / b),
            oracle_value: r.oracle,
            pass: r.pass,
            runtime_ms,
        })
        .collect())
}

/// Looks the spec up in `cache` first and stores fresh results.
pub fn run_cached(spec: &ExperimentSpec, cache: Option<&Cache>) -> Result<Vec<ResultRecord>> {
    if let Some(hit) = cache.and_then(|c| c.lookup(spec)) {
        return Ok(hit);
    }
    let records = run(spec)?;
    if let Some(c) = cache {
        c.store(spec, &records)?;
    }
    Ok(records)
}

fn dispatch(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    let p = Params(&spec.params);
    match spec.kind {
        ExperimentKind::CountCurve | ExperimentKind::CountGraph => run_count(spec.kind, &p),
        ExperimentKind::Weil => run_weil(&p),
        ExperimentKind::Census => run_census(&p),
        ExperimentKind::Sharpness => run_sharpness(&p),
        ExperimentKind::Dynsys => run_dynsys(&p),
        ExperimentKind::Vinogradov => run_vinogradov(&p),
        ExperimentKind::Lattice => run_lattice(&p),
        ExperimentKind::Lemma6 => run_lemma6(&p),
        ExperimentKind::Acceptance => run_acceptance(&p, spec.seed),
        ExperimentKind::CurveIso => run_curve_iso(&p),
        ExperimentKind::Expsum => run_expsum(&p),
        ExperimentKind::Thm2Lattice => run_thm2(&p),
    }
}

/// pass: the requested method agrees with the double loop (when it ran).
fn run_count(kind: ExperimentKind, p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let f = p.poly("f", md)?;
    let bx = Box2::parse(p.raw("box")?)?;
    let method = match p.get_or("method", "sqrt_scan".to_string())?.as_str() {
        "naive" => CountMethod::Naive,
        "sqrt_scan" | "sqrt" => CountMethod::SqrtScan,
        other => {
            return Err(Error::param(
                "method",
                format!("expected naive or sqrt_scan, got `{other}`"),
            ))
        }
    };
    let eps: Option<f64> = p.0.contains_key("eps").then(|| p.get("eps")).transpose()?;
    let oracle_limit: f64 = p.get_or("oracle_limit", 1e8)?;
    let cells = (bx.m as f64).powi(2);
    let deg = f.degree().unwrap_or(0);
    let (report, oracle, bound) = if kind == ExperimentKind::CountCurve {
        let r = count_curve_points_with(&f, &bx, method)?;
        let o = (cells <= oracle_limit).then(|| oracle::curve_count_scan(&f, &bx));
        let b = match eps {
            Some(e) if deg >= 3 => bound_i(bx.m, md.value(), deg, e)?.value,
            _ => r.bound_value,
        };
        (r, o, b)
    } else {
        let r = count_graph_points_with(&f, &bx, method)?;
        let o = (cells <= oracle_limit).then(|| oracle::graph_count_scan(&f, &bx));
        let b = match eps {
            Some(e) if deg >= 2 => bound_j(bx.m, md.value(), deg, e)?,
            _ => r.bound_value,
        };
        (r, o, b)
    };
    Ok(vec![
        Row::new("count", report.count as f64)
            .bound(bound)
            .oracle(oracle.map(|o| o as f64))
            .pass(oracle.is_none_or(|o| o == report.count)),
        Row::new("main_term", report.main_term),
    ])
}

/// pass: `|I - M^2/p| <= c sqrt(p) (log p)^2`.
fn run_weil(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let f = p.poly("f", md)?;
    let bx = Box2::parse(p.raw("box")?)?;
    let c: f64 = p.get_or("c", WEIL_CONSTANT)?;
    let w = weil_error(&f, &bx)?;
    Ok(vec![
        Row::new("deviation", w.deviation)
            .bound(c * w.weil_budget)
            .pass(w.within(c)),
        Row::new("count", w.count as f64).oracle(Some(w.main_term)),
    ])
}

fn parse_cube(p: &Params, g: usize) -> Result<CubeBox> {
    let m: u64 = p.get("M")?;
    let r: Vec<u64> = if p.0.contains_key("box") {
        p.list("box")?
    } else {
        vec![0; 2 * g]
    };
    CubeBox::new(g, r, m).map_err(|e| Error::param("box", e.to_string()))
}

/// classes pass: at least `total^2 / T` classes; moments pass: oracle match;
/// max_class_size pass: at most 2M.
fn run_census(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let g: usize = p.get("g")?;
    let cube = parse_cube(p, g)?;
    let opts = CensusOptions {
        max_cells: p.get_or("max_cells", CENSUS_CELL_LIMIT)?,
    };
    let oracle_limit: f64 = p.get_or("oracle_limit", 2000.0)?;
    let c = class_census_with(md, &cube, &opts)?;
    let pf = md.value() as f64;
    let mf = cube.m as f64;
    let shape = pf.powi(2 * g as i32 - 1).min(mf.powi(2 * g as i32));
    let (ns, pairs) = if (cube.volume() as f64) <= oracle_limit {
        let (n, t) = oracle::pair_count(md, &cube);
        (Some(n as f64), Some(t as f64))
    } else {
        (None, None)
    };
    Ok(vec![
        Row::new("classes", c.class_count as f64)
            .bound(shape)
            .oracle(Some(c.cauchy_schwarz_lower_bound()))
            .pass(c.class_count as f64 + 1e-9 >= c.cauchy_schwarz_lower_bound()),
        Row::new("nonsingular", c.total_nonsingular as f64)
            .bound(c.cube_volume as f64)
            .oracle(ns)
            .pass(ns.is_none_or(|n| n == c.total_nonsingular as f64)),
        Row::new("second_moment", c.second_moment as f64)
            .oracle(pairs)
            .pass(pairs.is_none_or(|t| t == c.second_moment as f64)),
        Row::new("max_class_size", c.max_class_size as f64)
            .bound(2.0 * mf)
            .pass(c.max_class_size <= 2 * cube.m),
    ])
}

/// pass: `N >= #A` (and the box scan agrees with the orbit walk).
fn run_sharpness(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let g: usize = p.get("g")?;
    let m: u64 = p.get("M")?;
    let oracle_limit: f64 = p.get_or("oracle_limit", 1e5)?;
    let w = sharpness_witness(md, m, g)?;
    let cube = CubeBox::origin(g, m)?;
    let scan = ((cube.volume() as f64) <= oracle_limit)
        .then(|| oracle::class_size_scan(md, w.curve.coeffs(), &cube));
    Ok(vec![
        Row::new("class_size", w.class_size as f64)
            .bound(w.witness_count as f64)
            .oracle(scan.map(|s| s as f64))
            .pass(w.holds && scan.is_none_or(|s| s == w.class_size)),
        Row::new("distinct_witness_vectors", w.witness_vectors as f64)
            .bound(w.residues.len() as f64)
            .pass(w.class_size >= w.witness_vectors),
    ])
}

/// trajectory rows pass when Brent and the seen-set agree; diameter passes
/// when max - min equals the pairwise maximum.
fn run_dynsys(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let f = p.poly("f", md)?;
    let u0 = md.elem_signed(p.get("u0")?);
    let eps: f64 = p.get_or("eps", crate::boxcount::DEFAULT_EPS)?;
    let brent = trajectory_length_brent(&f, u0)?;
    let seen = (md.value() <= SEEN_SET_LIMIT)
        .then(|| trajectory_length_seen_set(&f, u0))
        .transpose()?;
    let n: usize = p.get_or("N", brent.total as usize)?;
    let vals = iterate(&f, u0, n)?.values;
    let d = crate::dynsys::diameter_of(&vals);
    let pairwise = (n <= 5000).then(|| oracle::diameter_pairwise(&vals));
    let deg = f.degree().unwrap_or(0) as u32;
    let agree = |a: u64, b: Option<u64>| b.is_none_or(|b| a == b);
    let mut diam = Row::new("diameter", d as f64)
        .oracle(pairwise.map(|x| x as f64))
        .pass(agree(d, pairwise));
    if deg >= 2 {
        diam = diam.bound(bound_diameter(n as u64, md.value(), deg, eps)?);
    }
    Ok(vec![
        Row::new("trajectory_length", brent.total as f64)
            .oracle(seen.map(|s| s.total as f64))
            .pass(agree(brent.total, seen.map(|s| s.total))),
        Row::new("tail", brent.tail as f64)
            .oracle(seen.map(|s| s.tail as f64))
            .pass(agree(brent.tail, seen.map(|s| s.tail))),
        Row::new("cycle", brent.cycle as f64)
            .oracle(seen.map(|s| s.cycle as f64))
            .pass(agree(brent.cycle, seen.map(|s| s.cycle))),
        diam,
    ])
}

/// bound is `H^k + H^{2k - m(m+1)/2}`; pass: exhaustive count agrees when run.
fn run_vinogradov(p: &Params) -> Result<Vec<Row>> {
    let inst = VinogradovInstance::new(p.get("k")?, p.get("m")?, p.get("H")?)?;
    let limit: usize = p.get_or("state_limit", VINOGRADOV_STATE_LIMIT)?;
    let oracle_limit: f64 = p.get_or("oracle_limit", 1e7)?;
    let j = count_vinogradov_with_limit(&inst, limit)?;
    let hf = inst.h as f64;
    let (k, m) = (inst.k as i32, inst.m as i32);
    let bound = hf.powi(k) + hf.powi(2 * k - m * (m + 1) / 2);
    let brute = (hf.powi(2 * k) <= oracle_limit)
        .then(|| oracle::vinogradov_exhaustive(inst.k, inst.m, inst.h));
    Ok(vec![Row::new("J", j as f64)
        .bound(bound)
        .oracle(brute.map(|b| b as f64))
        .pass(brute.is_none_or(|b| b == j))])
}

/// points pass on oracle agreement, minima on witness validity, cor7 on the
/// inequality itself.
fn run_lattice(p: &Params) -> Result<Vec<Row>> {
    let coeffs: Vec<i64> = p.list("coeffs")?;
    if p.0.contains_key("n") && p.get::<usize>("n")? != coeffs.len() {
        return Err(Error::param(
            "n",
            "does not match the number of coefficients",
        ));
    }
    let l = CongruenceLattice::new(coeffs, p.get("p")?)?;
    let d = ConvexBox::new(p.list("halfwidths")?)?;
    let oracle_limit: f64 = p.get_or("oracle_limit", 1e6)?;
    let pts = lattice_points_in_box(&l, &d, 1.0, false)?;
    let naive_cells: f64 = d.halfwidths.iter().map(|w| 2.0 * w.floor() + 1.0).product();
    let naive = (naive_cells <= oracle_limit)
        .then(|| oracle::lattice_points_naive(&l, &d, 1.0).len() as u64);
    let minima = successive_minima(&l, &d)?;
    let witnesses_ok = crate::lattice::rank(&minima.witnesses)? == l.dim()
        && minima
            .witnesses
            .iter()
            .zip(&minima.lambdas)
            .all(|(v, &lam)| l.contains(v) && d.gauge(v) == lam);
    let cor7 = cor7_check(&l, &d)?;
    let mut rows = vec![Row::new("points", pts.count as f64)
        .oracle(naive.map(|n| n as f64))
        .pass(naive.is_none_or(|n| n == pts.count))];
    for (i, lam) in minima.lambdas.iter().enumerate() {
        rows.push(Row::new(format!("lambda{}", i + 1), *lam).pass(witnesses_ok));
    }
    rows.push(
        Row::new("cor7", cor7.product)
            .bound(cor7.bound)
            .pass(cor7.pass),
    );
    Ok(rows)
}

/// pass: count at most mn and equal to the exhaustive scan when run.
fn run_lemma6(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let f = p.poly("f", md)?;
    let g = p.poly("g", md)?;
    let xs: Vec<i64> = p.list("xs")?;
    let ys: Vec<i64> = p.list("ys")?;
    let xe: Vec<FpElement> = xs.iter().map(|&x| md.elem_signed(x)).collect();
    let ye: Vec<FpElement> = ys.iter().map(|&y| md.elem_signed(y)).collect();
    let oracle_limit: f64 = p.get_or("oracle_limit", 1e6)?;
    let r = lemma6_count(&f, &g, &xe, &ye)?;
    let pf = md.value() as f64;
    let brute = (pf * pf <= oracle_limit).then(|| {
        let xv: Vec<u64> = xe.iter().map(|e| e.value()).collect();
        let yv: Vec<u64> = ye.iter().map(|e| e.value()).collect();
        oracle::lemma6_exhaustive(&f, &g, &xv, &yv)
    });
    Ok(vec![Row::new("count", r.count as f64)
        .bound(r.bound as f64)
        .oracle(brute.map(|b| b as f64))
        .pass(r.pass && brute.is_none_or(|b| b == r.count))])
}

fn run_acceptance(p: &Params, seed: u64) -> Result<Vec<Row>> {
    let opts = AcceptanceOptions {
        seed,
        quick: p.flag("quick")?,
    };
    let ids: Vec<u32> = if p.0.contains_key("only") {
        p.list("only")?
    } else {
        acceptance::CRITERIA.iter().map(|c| c.0).collect()
    };
    ids.into_iter()
        .map(|id| {
            let o = acceptance::run_criterion(id, &opts)?;
            Ok(Row {
                label: format!("c{id:02}"),
                value: o.value,
                bound: o.bound,
                oracle: o.oracle,
                pass: o.pass,
            })
        })
        .collect()
}

/// scalars pass when the scalar search and canonical forms agree; class_size
/// passes at most 2M and on box-scan agreement.
fn run_curve_iso(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let g: usize = p.get("g")?;
    let a = CurveVector::parse(md, g, p.raw("a")?)?;
    let b = CurveVector::parse(md, g, p.raw("b")?)?;
    let scalars = isomorphism_scalars(&a, &b)?;
    let same_class = canonical_representative(&a) == canonical_representative(&b);
    let mut rows = vec![Row::new("scalars", scalars.len() as f64)
        .oracle(Some(same_class as u8 as f64))
        .pass(scalars.is_empty() != same_class)];
    if p.0.contains_key("M") {
        let cube = parse_cube(p, g)?;
        let oracle_limit: f64 = p.get_or("oracle_limit", 1e5)?;
        let n = count_isomorphic_in_box(&b, &cube)?;
        let scan = ((cube.volume() as f64) <= oracle_limit)
            .then(|| oracle::class_size_scan(md, b.coeffs(), &cube));
        rows.push(
            Row::new("class_size", n as f64)
                .bound(2.0 * cube.m as f64)
                .oracle(scan.map(|s| s as f64))
                .pass(n <= 2 * cube.m && scan.is_none_or(|s| s == n)),
        );
    }
    Ok(rows)
}

/// abs_sum bound is `C_W` times the Weyl majorant (degree >= 2); identity
/// compares `|S|^2` with the differenced double sum.
fn run_expsum(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let f = p.poly("f", md)?;
    let k: i64 = p.get("k")?;
    let m: u64 = p.get("M")?;
    let s = exp_sum_mod(&f, k, m).norm();
    let deg = f.degree().unwrap_or(0) as u32;
    let mut abs = Row::new("abs_sum", s);
    if deg >= 2 && m >= 1 {
        let num = md.mul(md.elem_signed(k).value(), f.leading_coefficient());
        let maj = weyl_constant(deg) * weyl_majorant(num, md.value(), deg, m)?;
        abs = abs.bound(maj).pass(s <= maj);
    }
    let id = weyl_square_identity(&f, k, m);
    Ok(vec![
        abs,
        Row::new("square_identity", id.lhs)
            .oracle(Some(id.rhs_re))
            .pass(id.pass),
    ])
}

/// Diagnostics only: lambda3 is compared with 1 but never fails the run.
fn run_thm2(p: &Params) -> Result<Vec<Row>> {
    let md = p.modulus()?;
    let c: Vec<u64> = p.list("c")?;
    let c: [u64; 4] = c
        .try_into()
        .map_err(|_| Error::param("c", "expected c0,c1,c2,c3"))?;
    let m: u64 = p.get("M")?;
    let t = build_thm2_lattice(c, m, md)?;
    let mut rows = vec![
        Row::new("shifted_count", t.shifted_count as f64).bound((2 * m + 1) as f64 * 2.0),
        Row::new("shifted_xs", t.shifted_xs as f64).bound((2 * m + 1) as f64),
        Row::new("wide_box", t.wide_box as u8 as f64),
    ];
    if p.get_or("minima", true)? {
        let minima = successive_minima(&t.lattice, &t.body)?;
        for (i, lam) in minima.lambdas.iter().enumerate() {
            let row = Row::new(format!("lambda{}", i + 1), *lam);
            rows.push(if i == 2 { row.bound(1.0) } else { row });
        }
    }
    Ok(rows)
}
