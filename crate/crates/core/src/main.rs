use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smallbox::acceptance::{self, AcceptanceOptions};
use smallbox::harness::{
    self, config::load_config, Cache, ExperimentKind, ExperimentSpec, OutputFormat,
};

#[derive(Parser)]
#[command(
    name = "smallbox",
    version,
    about = "Point counts in small boxes modulo p"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long, global = true, default_value_t = acceptance::DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// key=value file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for cached results.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Extra parameter, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Points on y^2 = f(x) in a box.
    CountCurve(CountArgs),
    /// Points on y = f(x) in a box.
    CountGraph(CountArgs),
    /// Deviation of a full-box count from M^2/p.
    Weil {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long = "box")]
        bx: Option<String>,
        #[arg(long)]
        c: Option<String>,
    },
    /// Isomorphism test between two curve vectors, optionally counting the class in a cube.
    CurveIso {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
        #[arg(long = "box")]
        bx: Option<String>,
    },
    /// Isomorphism classes among nonsingular vectors in a cube.
    CurveClasses {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
        #[arg(long = "box")]
        bx: Option<String>,
        #[arg(long)]
        max_cells: Option<String>,
    },
    /// Class of x^{2g+1} + x against its witness count.
    Sharpness {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
    },
    /// Trajectory length and diameter of u -> f(u).
    Dynsys {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u0: Option<String>,
        #[arg(long = "N")]
        n: Option<String>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Solutions of the Vinogradov system.
    Vinogradov {
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long = "H")]
        h: Option<String>,
        #[arg(long)]
        state_limit: Option<String>,
    },
    /// |sum e(k f(x)/p)| over x in [1, M] against the Weyl majorant.
    Expsum {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
    },
    /// Lattice points, successive minima and the volume inequality.
    LatticeCheck {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        halfwidths: Option<String>,
    },
    /// Minima of the lattice attached to a shifted elliptic count.
    Thm2Lattice {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        c: Option<String>,
        #[arg(long = "M")]
        m: Option<String>,
    },
    /// Common points of y = f(x) and x = g(y) on a determinant locus.
    Lemma6 {
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        xs: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        ys: Option<String>,
    },
    /// Any experiment kind, parameters from --config and --set.
    Run {
        #[arg(long)]
        kind: ExperimentKind,
    },
    /// Acceptance criteria, one line each on stderr.
    Acceptance {
        /// A tenth of the trials.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    f: Option<String>,
    /// r,s,M
    #[arg(long = "box")]
    bx: Option<String>,
    /// naive or sqrt_scan
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    eps: Option<String>,
}

type Pairs = Vec<(&'static str, Option<String>)>;

impl Cmd {
    fn kind(&self) -> ExperimentKind {
        match self {
            Cmd::CountCurve(_) => ExperimentKind::CountCurve,
            Cmd::CountGraph(_) => ExperimentKind::CountGraph,
            Cmd::Weil { .. } => ExperimentKind::Weil,
            Cmd::CurveIso { .. } => ExperimentKind::CurveIso,
            Cmd::CurveClasses { .. } => ExperimentKind::Census,
            Cmd::Sharpness { .. } => ExperimentKind::Sharpness,
            Cmd::Dynsys { .. } => ExperimentKind::Dynsys,
            Cmd::Vinogradov { .. } => ExperimentKind::Vinogradov,
            Cmd::Expsum { .. } => ExperimentKind::Expsum,
            Cmd::LatticeCheck { .. } => ExperimentKind::Lattice,
            Cmd::Thm2Lattice { .. } => ExperimentKind::Thm2Lattice,
            Cmd::Lemma6 { .. } => ExperimentKind::Lemma6,
            Cmd::Run { kind } => *kind,
            Cmd::Acceptance { .. } => ExperimentKind::Acceptance,
        }
    }

    fn flags(&self) -> Pairs {
        let c = Clone::clone;
        match self {
            Cmd::CountCurve(a) | Cmd::CountGraph(a) => vec![
                ("p", c(&a.p)),
                ("f", c(&a.f)),
                ("box", c(&a.bx)),
                ("method", c(&a.method)),
                ("eps", c(&a.eps)),
            ],
            Cmd::Weil { p, f, bx, c: k } => {
                vec![("p", c(p)), ("f", c(f)), ("box", c(bx)), ("c", c(k))]
            }
            Cmd::CurveIso { p, g, a, b, m, bx } => vec![
                ("p", c(p)),
                ("g", c(g)),
                ("a", c(a)),
                ("b", c(b)),
                ("M", c(m)),
                ("box", c(bx)),
            ],
            Cmd::CurveClasses {
                p,
                g,
                m,
                bx,
                max_cells,
            } => vec![
                ("p", c(p)),
                ("g", c(g)),
                ("M", c(m)),
                ("box", c(bx)),
                ("max_cells", c(max_cells)),
            ],
            Cmd::Sharpness { p, g, m } => vec![("p", c(p)), ("g", c(g)), ("M", c(m))],
            Cmd::Dynsys { p, f, u0, n, eps } => vec![
                ("p", c(p)),
                ("f", c(f)),
                ("u0", c(u0)),
                ("N", c(n)),
                ("eps", c(eps)),
            ],
            Cmd::Vinogradov {
                k,
                m,
                h,
                state_limit,
            } => vec![
                ("k", c(k)),
                ("m", c(m)),
                ("H", c(h)),
                ("state_limit", c(state_limit)),
            ],
            Cmd::Expsum { p, f, k, m } => {
                vec![("p", c(p)), ("f", c(f)), ("k", c(k)), ("M", c(m))]
            }
            Cmd::LatticeCheck {
                coeffs,
                p,
                halfwidths,
            } => vec![
                ("coeffs", c(coeffs)),
                ("p", c(p)),
                ("halfwidths", c(halfwidths)),
            ],
            Cmd::Thm2Lattice { p, c: cs, m } => vec![("p", c(p)), ("c", c(cs)), ("M", c(m))],
            Cmd::Lemma6 { p, f, g, xs, ys } => vec![
                ("p", c(p)),
                ("f", c(f)),
                ("g", c(g)),
                ("xs", c(xs)),
                ("ys", c(ys)),
            ],
            Cmd::Run { .. } => vec![],
            Cmd::Acceptance { quick, only } => vec![
                ("quick", quick.then(|| "true".to_string())),
                ("only", c(only)),
            ],
        }
    }
}

fn build_spec(cli: &Cli) -> Result<ExperimentSpec, String> {
    let mut params = BTreeMap::new();
    if let Some(path) = &cli.global.config {
        params = load_config(path).map_err(|e| e.to_string())?;
    }
    for item in &cli.global.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
        params.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    for (k, v) in cli.cmd.flags() {
        if let Some(v) = v {
            params.insert(k.to_string(), v);
        }
    }
    Ok(ExperimentSpec {
        kind: cli.cmd.kind(),
        params,
        seed: cli.global.seed,
        threads: cli.global.threads,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: &Cli) -> Result<bool, String> {
    let spec = build_spec(cli)?;
    spec.validate().map_err(|e| e.to_string())?;
    if spec.kind == ExperimentKind::Acceptance {
        return run_acceptance(cli, &spec);
    }
    let cache = cli
        .global
        .cache
        .as_ref()
        .map(Cache::open)
        .transpose()
        .map_err(|e| e.to_string())?;
    let records = harness::run_cached(&spec, cache.as_ref()).map_err(|e| e.to_string())?;
    harness::emit(&records, cli.global.format, cli.global.out.as_deref())
        .map_err(|e| e.to_string())?;
    Ok(records.iter().all(|r| r.pass))
}

/// Streams one line per criterion to stderr as each finishes, then emits
/// the records.
fn run_acceptance(cli: &Cli, spec: &ExperimentSpec) -> Result<bool, String> {
    let opts = AcceptanceOptions {
        seed: spec.seed,
        quick: spec
            .params
            .get("quick")
            .is_some_and(|v| v != "false" && v != "0"),
    };
    let ids: Vec<u32> = match spec.params.get("only") {
        Some(list) => list
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| format!("bad criterion `{t}`")))
            .collect::<Result<_, _>>()?,
        None => acceptance::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| e.to_string())?;
    let mut records = Vec::new();
    let key = harness::cache_key(spec);
    for id in ids {
        let o = pool
            .install(|| acceptance::run_criterion(id, &opts))
            .map_err(|e| e.to_string())?;
        eprintln!("{}", o.line());
        records.push(harness::ResultRecord {
            experiment_id: format!("{}:c{:02}", &key[..12], id),
            kind: "acceptance".into(),
            params: spec.canonical_params(),
            value: o.value,
            bound_value: o.bound,
            ratio: o.bound.filter(|&b| b > 0.0).map(|b| o.value / b),
            oracle_value: o.oracle,
            pass: o.pass,
            runtime_ms: o.runtime_ms,
        });
    }
    harness::emit(&records, cli.global.format, cli.global.out.as_deref())
        .map_err(|e| e.to_string())?;
    Ok(records.iter().all(|r| r.pass))
}
