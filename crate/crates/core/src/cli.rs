//! The `gwt` command-line front end.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approx::{
    image_graph, nearest_circulant_detailed, rcm_relabel, sort_relabel, DenseGraph, ImageMode,
    Relabelling,
};
use crate::circulant::{CirculantGraph, ExponentParam, Generator};
use crate::error::{GwtError, Result};
use crate::filterbank::Transform;
use crate::invertibility::check_invertibility;
use crate::io;
use crate::multiscale::{
    nla, pyramid_synthesize, BankKind, BankSpec, CoarseningStrategy, Pyramid, PyramidPlan,
};
use crate::pattern::SamplingPattern;
use crate::products::{lexicographic_circulant, ProductGraph, ProductKind};
use crate::signal::{exp_poly_signal, GraphSignal};

/// HP coefficients at or below this magnitude count as annihilated.
const ZERO_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "gwt",
    version,
    about = "Graph wavelet filterbanks on circulant graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build, approximate, combine or coarsen graphs.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Forward or inverse (multilevel) wavelet transform.
    Transform(TransformArgs),
    /// Non-linear approximation curve.
    Nla(NlaArgs),
    /// Invertibility and moment report for a bank.
    Check(CheckArgs),
    /// Generate a test signal.
    Signal(SignalArgs),
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Circulant graph from `s:w` generators.
    Make {
        #[arg(long)]
        n: usize,
        /// Comma-separated `s` or `s:w`, e.g. `1:1,2:0.5`.
        #[arg(long)]
        gens: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest circulant of a dense adjacency matrix.
    Approx {
        /// CSV or Matrix Market adjacency.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Relabel::Rcm)]
        relabel: Relabel,
        /// Signal used by `--relabel sort`.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the relabelling; defaults next to `--out`.
        #[arg(long)]
        perm_out: Option<PathBuf>,
    },
    /// Product of two circulant graphs.
    Product {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Circulant form and relabelling for lexicographic products.
        #[arg(long)]
        perm_out: Option<PathBuf>,
    },
    /// One coarsening step.
    Coarsen {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::PreserveSet)]
        strategy: Strategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pixel graph of a PGM or CSV image, written as a dense CSV adjacency.
    Image {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma_p: f64,
        /// Defaults to 10% of the intensity range.
        #[arg(long)]
        sigma_i: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Bilateral)]
        mode: Mode,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Relabel {
    Rcm,
    Sort,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Kronecker,
    Cartesian,
    Strong,
    Lexicographic,
}

impl From<Kind> for ProductKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Kronecker => ProductKind::Kronecker,
            Kind::Cartesian => ProductKind::Cartesian,
            Kind::Strong => ProductKind::Strong,
            Kind::Lexicographic => ProductKind::Lexicographic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Strategy {
    KeepExisting,
    PreserveSet,
    KronReduce,
}

impl From<Strategy> for CoarseningStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::KeepExisting => CoarseningStrategy::KeepExisting,
            Strategy::PreserveSet => CoarseningStrategy::PreserveSet,
            Strategy::KronReduce => CoarseningStrategy::KronReduce,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Bilateral,
    IntensityOnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Bank {
    Hgswt,
    Hgeswt,
    Hcgswt,
    Hcgeswt,
}

#[derive(Args, Debug, Clone)]
pub struct BankArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Bank::Hgswt)]
    pub bank: Bank,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Comma-separated exponents; prefix `h:` for hyperbolic.
    #[arg(long, default_value = "")]
    pub alphas: String,
    /// Also impose moments on the complementary low-pass.
    #[arg(long)]
    pub dual_moments: bool,
}

impl BankArgs {
    fn spec(&self) -> Result<BankSpec> {
        let kind = match self.bank {
            Bank::Hgswt => BankKind::Hgswt,
            Bank::Hgeswt => BankKind::Hgeswt,
            Bank::Hcgswt => BankKind::Hcgswt,
            Bank::Hcgeswt => BankKind::Hcgeswt,
        };
        let alphas = parse_alphas(&self.alphas)?;
        if matches!(kind, BankKind::Hgeswt | BankKind::Hcgeswt) && alphas.is_empty() {
            return Err(GwtError::InvalidArgument(
                "exponential banks need --alphas".into(),
            ));
        }
        Ok(BankSpec {
            kind,
            k: self.k,
            alphas,
            dual_moments: self.dual_moments,
        })
    }

    fn params(&self) -> Value {
        json!({
            "bank": format!("{:?}", self.bank).to_lowercase(),
            "k": self.k,
            "alphas": self.alphas,
            "dual_moments": self.dual_moments,
        })
    }
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[command(flatten)]
    pub bank: BankArgs,
    /// Input signal, or coefficients with `--inverse`.
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = Strategy::PreserveSet)]
    pub strategy: Strategy,
    /// Low-pass mask such as `1010...`; single level only.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub inverse: bool,
    /// Proceed even if the invertibility check fails.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for a per-level pyramid dump.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NlaArgs {
    #[command(flatten)]
    pub bank: BankArgs,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = Strategy::PreserveSet)]
    pub strategy: Strategy,
    /// Largest K; defaults to the signal length.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Second exponent set whose curve is written alongside for comparison.
    #[arg(long)]
    pub compare_alphas: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub bank: BankArgs,
    /// Defaults to the alternating pattern.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SignalKind {
    Constant,
    Poly,
    Sinusoid,
    Exp,
    Random,
}

#[derive(Args, Debug)]
pub struct SignalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub kind: SignalKind,
    /// Polynomial coefficients in ascending degree (poly, exp).
    #[arg(long, default_value = "1")]
    pub coeffs: String,
    /// Integer frequencies `f` giving `cos(2 pi f t / n)` terms (sinusoid).
    #[arg(long, default_value = "1")]
    pub freqs: String,
    /// Exponent for `--kind exp`; prefix `h:` for hyperbolic.
    #[arg(long, default_value = "0")]
    pub alpha: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn num(t: &str) -> Result<f64> {
    t.parse::<f64>()
        .map_err(|_| GwtError::Parse(format!("'{t}' is not a number")))
}

pub fn parse_alphas(s: &str) -> Result<Vec<ExponentParam>> {
    parse_list(s)
        .map(|t| match t.strip_prefix("h:") {
            Some(h) => num(h).map(ExponentParam::hyperbolic),
            None => num(t.strip_prefix("t:").unwrap_or(t)).map(ExponentParam::trig),
        })
        .collect()
}

pub fn parse_gens(s: &str) -> Result<Vec<Generator>> {
    parse_list(s)
        .map(|t| {
            let (a, b) = t.split_once(':').unwrap_or((t, "1"));
            let hop = a
                .parse::<usize>()
                .map_err(|_| GwtError::Parse(format!("'{a}' is not a hop")))?;
            Ok(Generator { s: hop, w: num(b)? })
        })
        .collect()
}

/// Collects outputs so one manifest can describe the run.
struct Run {
    command: String,
    inputs: Vec<String>,
    params: Value,
    outputs: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    inputs: &'a [String],
    parameters: &'a Value,
    outputs: &'a [String],
    version: &'static str,
    wall_clock_ms: f64,
}

impl Run {
    fn new(command: &str, inputs: &[&Path], params: Value) -> Self {
        Self {
            command: command.into(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            params,
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Writes `text` to `out`, or to stdout when no path is given.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => {
                std::fs::write(p, text)?;
                self.outputs.push(p.display().to_string());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn finish(self, primary: Option<&Path>) -> Result<()> {
        let Some(p) = primary else {
            return Ok(());
        };
        let mut name = p.as_os_str().to_owned();
        name.push(".manifest.json");
        let m = RunManifest {
            command: &self.command,
            inputs: &self.inputs,
            parameters: &self.params,
            outputs: &self.outputs,
            version: env!("CARGO_PKG_VERSION"),
            wall_clock_ms: self.started.elapsed().as_secs_f64() * 1e3,
        };
        io::write_json(Path::new(&name), &m)
    }
}

fn sibling(out: Option<&Path>, explicit: Option<&Path>, suffix: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let stem = o.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
            o.with_file_name(format!("{stem}.{suffix}"))
        })
    })
}

/// Caps rayon's pool at `GWT_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("GWT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph(g) => graph(g),
        Command::Transform(a) => transform(a),
        Command::Nla(a) => nla_cmd(a),
        Command::Check(a) => check(a),
        Command::Signal(a) => signal(a),
    }
}

fn graph(cmd: GraphCmd) -> Result<()> {
    match cmd {
        GraphCmd::Make { n, gens, out } => {
            let g = CirculantGraph::new(n, parse_gens(&gens)?)?;
            let mut run = Run::new("graph make", &[], json!({"n": n, "gens": gens}));
            run.emit(out.as_deref(), &io::to_json(&g)?)?;
            run.finish(out.as_deref())
        }
        GraphCmd::Approx {
            input,
            relabel,
            signal,
            out,
            perm_out,
        } => {
            let m = io::read_matrix(&input)?;
            let dg = DenseGraph::new(m.clone())?;
            let r = match relabel {
                Relabel::Rcm => rcm_relabel(&dg),
                Relabel::Identity => Relabelling::identity(dg.n()),
                Relabel::Sort => {
                    let p = signal.as_ref().ok_or_else(|| {
                        GwtError::InvalidArgument("--relabel sort needs --signal".into())
                    })?;
                    sort_relabel(&io::read_signal(p)?)?
                }
            };
            let nc = nearest_circulant_detailed(&m, &r)?;
            let mut inputs = vec![input.as_path()];
            inputs.extend(signal.as_deref());
            let mut run = Run::new(
                "graph approx",
                &inputs,
                json!({"relabel": format!("{relabel:?}").to_lowercase()}),
            );
            run.emit(out.as_deref(), &io::to_json(&nc.graph)?)?;
            let perm = json!({"perm": r.perm, "clamped": nc.clamped, "row": nc.row});
            match sibling(out.as_deref(), perm_out.as_deref(), "perm.json") {
                Some(p) => run.emit(Some(&p), &io::to_json(&perm)?)?,
                None => eprintln!("{}", serde_json::to_string(&perm)?),
            }
            run.finish(out.as_deref())
        }
        GraphCmd::Product {
            kind,
            g1,
            g2,
            out,
            perm_out,
        } => {
            let a = io::read_graph(&g1)?;
            let b = io::read_graph(&g2)?;
            let pg = ProductGraph::new(kind.into(), a.clone(), b.clone());
            let mut run = Run::new(
                "graph product",
                &[&g1, &g2],
                json!({"kind": format!("{kind:?}").to_lowercase()}),
            );
            run.emit(out.as_deref(), &io::to_json(&pg)?)?;
            if matches!(kind, Kind::Lexicographic) {
                let (c, perm) = lexicographic_circulant(&a, &b)?;
                let iso = json!({"circulant": c, "perm": perm});
                match sibling(out.as_deref(), perm_out.as_deref(), "perm.json") {
                    Some(p) => run.emit(Some(&p), &io::to_json(&iso)?)?,
                    None => eprintln!("{}", serde_json::to_string(&iso)?),
                }
            }
            run.finish(out.as_deref())
        }
        GraphCmd::Coarsen {
            graph,
            strategy,
            out,
        } => {
            let g = io::read_graph(&graph)?;
            let c = crate::multiscale::coarsen_circulant(&g, strategy.into())?;
            let mut run = Run::new(
                "graph coarsen",
                &[&graph],
                json!({"strategy": CoarseningStrategy::from(strategy)}),
            );
            run.emit(out.as_deref(), &io::to_json(&c)?)?;
            run.finish(out.as_deref())
        }
        GraphCmd::Image {
            input,
            sigma_p,
            sigma_i,
            mode,
            threshold,
            out,
        } => {
            let (v, grid) = io::read_image(&input)?;
            let m = match mode {
                Mode::Bilateral => ImageMode::Bilateral,
                Mode::IntensityOnly => ImageMode::IntensityOnly,
            };
            let g = image_graph(&v, grid, sigma_p, sigma_i, m, threshold)?;
            let mut run = Run::new(
                "graph image",
                &[&input],
                json!({"sigma_p": sigma_p, "sigma_i": sigma_i, "mode": format!("{mode:?}"), "threshold": threshold}),
            );
            run.emit(out.as_deref(), &io::matrix_to_csv(g.adjacency()))?;
            run.finish(out.as_deref())
        }
    }
}

fn single_level(a: &TransformArgs, g: &CirculantGraph, spec: &BankSpec) -> Result<Transform> {
    let bank = spec.build(g, 0)?;
    let sp = match &a.pattern {
        Some(p) => SamplingPattern::parse(p)?,
        None => SamplingPattern::alternating(g.n())?,
    };
    if sp.len() != g.n() {
        return Err(GwtError::SizeMismatch {
            expected: g.n(),
            got: sp.len(),
        });
    }
    let rep = check_invertibility(&bank, &sp);
    if !rep.invertible {
        if !a.force {
            return Err(GwtError::NotInvertible(rep.detail));
        }
        eprintln!("warning: {}", rep.detail);
    }
    Transform::new(bank, sp)
}

fn plan(
    g: &CirculantGraph,
    spec: &BankSpec,
    strategy: Strategy,
    levels: usize,
    force: bool,
) -> Result<PyramidPlan> {
    if force {
        PyramidPlan::new_unchecked(g, spec, strategy.into(), levels)
    } else {
        PyramidPlan::new(g, spec, strategy.into(), levels)
    }
}

fn hp_report(p: &Pyramid) -> Value {
    let levels: Vec<Value> = p
        .levels
        .iter()
        .map(|l| {
            let zeros: Vec<usize> = l
                .hp_coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() <= ZERO_TOL)
                .map(|(i, _)| 2 * i + 1)
                .collect();
            json!({"hp_nodes": l.hp_coeffs.len(), "hp_zeros": zeros.len(), "zero_nodes": zeros})
        })
        .collect();
    json!(levels)
}

fn transform(a: TransformArgs) -> Result<()> {
    let g = io::read_graph(&a.bank.graph)?;
    let spec = a.bank.spec()?;
    let x = io::read_signal(&a.signal)?;
    x.check_len(g.n())?;
    if a.pattern.is_some() && a.levels != 1 {
        return Err(GwtError::InvalidArgument(
            "--pattern applies to single-level transforms".into(),
        ));
    }
    let mut params = a.bank.params();
    params["levels"] = json!(a.levels);
    params["strategy"] = json!(CoarseningStrategy::from(a.strategy));
    params["pattern"] = json!(a.pattern);
    params["inverse"] = json!(a.inverse);
    params["force"] = json!(a.force);
    let mut run = Run::new("transform", &[&a.bank.graph, &a.signal], params);

    let custom = a.pattern.is_some();
    let y = if custom {
        let t = single_level(&a, &g, &spec)?;
        if a.inverse {
            t.invert(&x)?
        } else {
            let w = t.analyze(&x)?;
            let hp = t.pattern().highpass_nodes();
            let zeros = hp
                .iter()
                .filter(|&&i| w.values()[i].norm() <= ZERO_TOL)
                .count();
            run.params["report"] = json!({"hp_nodes": hp.len(), "hp_zeros": zeros});
            eprintln!("high-pass zeros: {zeros} of {}", hp.len());
            w
        }
    } else {
        let p = plan(&g, &spec, a.strategy, a.levels, a.force)?;
        if a.inverse {
            let skeleton = p.analyze(&GraphSignal::zeros(g.n()))?;
            pyramid_synthesize(&skeleton.with_coefficients(x.values())?)?
        } else {
            let pyr = p.analyze(&x)?;
            let rep = hp_report(&pyr);
            if let Some(l0) = rep.get(0) {
                eprintln!(
                    "level 0 high-pass zeros: {} of {}",
                    l0["hp_zeros"], l0["hp_nodes"]
                );
            }
            run.params["report"] = rep;
            if let Some(d) = &a.dump {
                for f in io::write_pyramid(d, &pyr)? {
                    run.outputs.push(d.join(f).display().to_string());
                }
            }
            GraphSignal::new(pyr.coefficients(), x.label())
        }
    };
    run.emit(a.out.as_deref(), &io::signal_to_csv(&y))?;
    run.finish(a.out.as_deref())
}

fn k_list(n: usize, kmax: Option<usize>, step: usize) -> Vec<usize> {
    let kmax = kmax.unwrap_or(n).min(n);
    (1..=kmax).step_by(step.max(1)).collect()
}

fn nla_cmd(a: NlaArgs) -> Result<()> {
    let g = io::read_graph(&a.bank.graph)?;
    let spec = a.bank.spec()?;
    let x = io::read_signal(&a.signal)?;
    x.check_len(g.n())?;
    let ks = k_list(g.n(), a.kmax, a.step);
    let p = PyramidPlan::new(&g, &spec, a.strategy.into(), a.levels)?.analyze(&x)?;
    let r = nla(&x, &p, &ks)?;
    let mut text = io::nla_to_csv(&r);
    let mut params = a.bank.params();
    params["levels"] = json!(a.levels);
    params["kmax"] = json!(a.kmax);
    params["step"] = json!(a.step);
    params["compare_alphas"] = json!(a.compare_alphas);
    if let Some(c) = &a.compare_alphas {
        let other = BankSpec {
            alphas: parse_alphas(c)?,
            ..spec.clone()
        };
        let q = PyramidPlan::new(&g, &other, a.strategy.into(), a.levels)?.analyze(&x)?;
        let r2 = nla(&x, &q, &ks)?;
        text = String::from("k,snr_db,snr_db_compare\n");
        for (p1, p2) in r.curve.iter().zip(&r2.curve) {
            text.push_str(&format!(
                "{},{},{}\n",
                p1.k,
                io::fmt_f64(p1.snr_db),
                io::fmt_f64(p2.snr_db)
            ));
        }
    }
    let mut run = Run::new("nla", &[&a.bank.graph, &a.signal], params);
    run.emit(a.out.as_deref(), &text)?;
    run.finish(a.out.as_deref())
}

#[derive(Serialize)]
struct Root {
    root: Complex64,
    multiplicity: usize,
}

fn check(a: CheckArgs) -> Result<()> {
    let g = io::read_graph(&a.bank.graph)?;
    let bank = a.bank.spec()?.build(&g, 0)?;
    let sp = match &a.pattern {
        Some(p) => SamplingPattern::parse(p)?,
        None => SamplingPattern::alternating(g.n())?,
    };
    let roots = |v: Vec<(Complex64, usize)>| -> Vec<Root> {
        v.into_iter()
            .map(|(root, multiplicity)| Root { root, multiplicity })
            .collect()
    };
    let report = json!({
        "invertibility": check_invertibility(&bank, &sp),
        "strang_fix": roots(bank.strang_fix_multiplicity()),
        "vanishing_moments": roots(bank.vanishing_moments()),
        "bank": bank,
    });
    let mut params = a.bank.params();
    params["pattern"] = json!(sp.to_bit_string());
    let mut run = Run::new("check", &[&a.bank.graph], params);
    run.emit(a.out.as_deref(), &io::to_json(&report)?)?;
    run.finish(a.out.as_deref())
}

fn signal(a: SignalArgs) -> Result<()> {
    let n = a.n;
    if n == 0 {
        return Err(GwtError::InvalidArgument(
            "signal length must be positive".into(),
        ));
    }
    let coeffs = parse_list(&a.coeffs).map(num).collect::<Result<Vec<_>>>()?;
    let x = match a.kind {
        SignalKind::Constant => {
            GraphSignal::from_real(&vec![coeffs.first().copied().unwrap_or(1.0); n], "constant")
        }
        SignalKind::Poly => {
            exp_poly_signal(n, &ExponentParam::trig(0.0), &coeffs).with_label("poly")
        }
        SignalKind::Exp => {
            let p = parse_alphas(&a.alpha)?
                .into_iter()
                .next()
                .ok_or_else(|| GwtError::InvalidArgument("--alpha is empty".into()))?;
            exp_poly_signal(n, &p, &coeffs)
        }
        SignalKind::Sinusoid => {
            let freqs = parse_list(&a.freqs).map(num).collect::<Result<Vec<_>>>()?;
            let v: Vec<f64> = (0..n)
                .map(|t| {
                    freqs
                        .iter()
                        .map(|f| (2.0 * PI * f * t as f64 / n as f64).cos())
                        .sum()
                })
                .collect();
            GraphSignal::from_real(&v, "sinusoid")
        }
        SignalKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            GraphSignal::from_real(&v, "random")
        }
    };
    let mut run = Run::new(
        "signal",
        &[],
        json!({"n": n, "kind": format!("{:?}", a.kind).to_lowercase(), "coeffs": a.coeffs,
               "freqs": a.freqs, "alpha": a.alpha, "seed": a.seed}),
    );
    run.emit(a.out.as_deref(), &io::signal_to_csv(&x))?;
    run.finish(a.out.as_deref())
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
