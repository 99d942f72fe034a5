//! `bowtie`: bow-tie decomposition and damping-factor analyses of PageRank.
//!
//! Exit status is 0 on success, 1 on bad input or arguments and 2 when an
//! iterative method fails to converge.

mod output;

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use bowtie_core::bowtie::BowtieAnalysis;
use bowtie_core::escc::{EsccBlock, EsccScope, SeedMode};
use bowtie_core::experiment::{load_clicks, run_link_experiment};
use bowtie_core::graph::{load_edge_list, GraphHandle};
use bowtie_core::grid::{parse_damping_list, DampingGrid};
use bowtie_core::inscc::{three_block_view, ThreeBlockOptions, ThreeBlockView};
use bowtie_core::limit::limit_vector;
use bowtie_core::pagerank::{damping_sweep, pagerank, PageRankConfig};
use bowtie_core::Error;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use output::{graph_hash, num, CsvSink, Provenance};

const THREADS_VAR: &str = "BOWTIE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "bowtie",
    version,
    about = "Bow-tie structure and PageRank damping-factor analysis"
)]
#[command(after_help = "Set BOWTIE_THREADS to cap the worker threads used by sweeps.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Label every node IN/SCC/OUT/OTHER and mark ESCC, Pure OUT and recurrent blocks.
    Decompose {
        #[command(flatten)]
        io: GraphOut,
        /// Write the component counts here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// PageRank at one damping factor.
    Pagerank {
        #[command(flatten)]
        io: GraphOut,
        /// Damping factor in [0, 1); use `limit` for c = 1.
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[command(flatten)]
        solver: Solver,
        /// Iteration cap [default: 10 * ceil(ln tol / ln c), at least 1000].
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// PageRank mass per component over a damping grid.
    Sweep {
        #[command(flatten)]
        io: GraphOut,
        /// Damping grid START:STOP:STEP.
        #[arg(long, default_value = "0:0.95:0.05")]
        grid: DampingGrid,
        #[command(flatten)]
        solver: Solver,
    },
    /// The c -> 1 limit: per-block shares and absorption weights.
    Limit {
        #[command(flatten)]
        io: GraphOut,
        /// Also write the full limit vector (node_id,limit).
        #[arg(long)]
        vector_out: Option<PathBuf>,
    },
    /// IN+SCC mass, its main term and correction, and derivative estimates.
    InsccCurve {
        #[command(flatten)]
        io: GraphOut,
        /// Damping grid START:STOP:STEP.
        #[arg(long, default_value = "0:0.99:0.01")]
        grid: DampingGrid,
        #[command(flatten)]
        view: ViewFlags,
    },
    /// Derivatives of the IN+SCC mass at c = 0 and c = 1 and the shape of the curve.
    InsccDerivatives {
        #[command(flatten)]
        io: GraphOut,
        /// Damping factor at which the main term and correction are split.
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[command(flatten)]
        view: ViewFlags,
    },
    /// Transient-block mass with its lower and upper bounds over a grid.
    EsccBounds {
        #[command(flatten)]
        io: GraphOut,
        /// Damping grid START:STOP:STEP.
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: DampingGrid,
        #[command(flatten)]
        scope: ScopeFlag,
    },
    /// Damping factor where the block keeps the mass its seed distribution retains.
    Cstar {
        #[command(flatten)]
        io: GraphOut,
        /// Seed distribution: quasi, uniform or self.
        #[arg(long, default_value = "uniform")]
        mode: SeedMode,
        /// Bisection bracket width.
        #[arg(long, default_value_t = 1e-10)]
        width: f64,
        /// Also write the r-curve samples (c,r,mass).
        #[arg(long)]
        curve_out: Option<PathBuf>,
        #[command(flatten)]
        scope: ScopeFlag,
    },
    /// Add a link from a dead-end node into the giant SCC and compare ranks.
    LinkExperiment {
        #[command(flatten)]
        io: GraphOut,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        target: usize,
        /// Comma-separated damping factors.
        #[arg(long, default_value = "0.5,0.85,0.95")]
        damping_list: DampingList,
        /// Optional `node_id,clicks` CSV; adds the source's click rank column.
        #[arg(long)]
        clicks: Option<PathBuf>,
        #[command(flatten)]
        solver: Solver,
    },
}

#[derive(Args, Debug)]
struct GraphOut {
    /// Edge-list file: `u v` per line, optional `n <count>` header.
    #[arg(long)]
    graph: PathBuf,
    /// Output CSV [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Solver {
    /// L1 stopping tolerance of the power iteration.
    #[arg(long, default_value_t = PageRankConfig::DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ViewFlags {
    /// Keep dangling nodes linked from OUT in DN instead of refusing.
    #[arg(long)]
    force_dn_merge: bool,
    /// Treat non-dangling OTHER nodes as OUT.
    #[arg(long)]
    fold_other: bool,
}

#[derive(Args, Debug)]
struct ScopeFlag {
    /// Restrict the block to the extended SCC instead of every transient node.
    #[arg(long)]
    exclude_pureout_transients: bool,
}

impl ScopeFlag {
    fn scope(&self) -> EsccScope {
        if self.exclude_pureout_transients {
            EsccScope::EsccOnly
        } else {
            EsccScope::FullTransient
        }
    }
}

/// Comma-separated damping factors, parsed as one argument.
#[derive(Debug, Clone)]
struct DampingList(Vec<f64>);

impl FromStr for DampingList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        parse_damping_list(s).map(DampingList)
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

struct Loaded {
    graph: GraphHandle,
    analysis: BowtieAnalysis,
    hash: String,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let bytes = fs::read(path)?;
    let graph = load_edge_list(bytes.as_slice())?;
    if graph.node_count() == 0 {
        return Err(Error::InvalidParameter(format!("{} holds no nodes", path.display())).into());
    }
    let analysis = BowtieAnalysis::new(&graph);
    Ok(Loaded {
        graph,
        analysis,
        hash: graph_hash(&bytes),
    })
}

fn view(l: &Loaded, flags: &ViewFlags) -> Result<ThreeBlockView, Failure> {
    let opts = ThreeBlockOptions {
        force_dn_merge: flags.force_dn_merge,
        fold_other: flags.fold_other,
    };
    let v = three_block_view(&l.graph, &l.analysis, opts)?;
    if !v.violations.is_empty() {
        eprintln!(
            "warning: dangling nodes {:?} are linked from OUT and were kept in DN; block equations hold only approximately",
            v.violations
        );
    }
    Ok(v)
}

fn flag(b: bool) -> String {
    b.to_string()
}

fn decompose(io: &GraphOut, summary: Option<&Path>) -> Outcome {
    let l = load(&io.graph)?;
    let a = &l.analysis;
    let prov = Provenance::new("decompose", &l.hash, &[]);
    let mut sink = CsvSink::open(
        io.out.as_deref(),
        &prov,
        &[
            "node_id",
            "bowtie_label",
            "in_escc",
            "in_pure_out",
            "recurrent_block_id",
            "mixed",
        ],
    )?;
    for v in 0..l.graph.node_count() {
        let block = a.blocks.block_of[v].map_or("-1".to_string(), |b| b.to_string());
        sink.row(&[
            v.to_string(),
            a.labeling.labels[v].to_string(),
            flag(a.escc[v]),
            flag(a.pure_out[v]),
            block,
            flag(a.mixed[v]),
        ])?;
    }
    sink.finish()?;

    let s = a.summary();
    let fields = [
        ("total_nodes", s.total_nodes),
        ("scc", s.scc),
        ("in", s.in_),
        ("out", s.out),
        ("other", s.other),
        ("escc", s.escc),
        ("pure_out", s.pure_out),
        ("sccs_in_out", s.sccs_in_out),
        ("sccs_in_pure_out", s.sccs_in_pure_out),
        ("recurrent_blocks", s.recurrent_blocks),
    ];
    match summary {
        Some(path) => {
            let mut sink = CsvSink::open(Some(path), &prov, &["quantity", "value"])?;
            for (k, v) in fields {
                sink.row(&[k.to_string(), v.to_string()])?;
            }
            sink.finish()?;
        }
        None => {
            let mut err = io::stderr().lock();
            for (k, v) in fields {
                writeln!(err, "{k}: {v}")?;
            }
        }
    }
    Ok(())
}

fn run_pagerank(io: &GraphOut, damping: f64, tol: f64, max_iter: Option<usize>) -> Outcome {
    let l = load(&io.graph)?;
    let mut cfg = PageRankConfig::with_tolerance(damping, tol);
    if let Some(k) = max_iter {
        cfg.max_iterations = k;
    }
    let pi = pagerank(&l.graph, &cfg)?;
    let prov = Provenance::new(
        "pagerank",
        &l.hash,
        &[
            ("damping", num(damping)),
            ("tol", num(tol)),
            ("max_iter", cfg.max_iterations.to_string()),
        ],
    );
    let mut sink = CsvSink::open(io.out.as_deref(), &prov, &["node_id", "score"])?;
    for (v, x) in pi.values.iter().enumerate() {
        sink.row(&[v.to_string(), num(*x)])?;
    }
    sink.finish()?;
    Ok(())
}

fn sweep(io: &GraphOut, grid: &DampingGrid, tol: f64) -> Outcome {
    let l = load(&io.graph)?;
    let rows = damping_sweep(&l.graph, &l.analysis, &grid.points(), tol)?;
    let prov = Provenance::new("sweep", &l.hash, &[("grid", grid.to_string()), ("tol", num(tol))]);
    let mut sink = CsvSink::open(
        io.out.as_deref(),
        &prov,
        &[
            "c",
            "mass_IN",
            "mass_SCC",
            "mass_INSCC",
            "mass_ESCC",
            "mass_PUREOUT",
            "mass_DN",
            "mass_OTHER",
        ],
    )?;
    for (c, m) in rows {
        sink.row(&[
            num(c),
            num(m.in_),
            num(m.scc),
            num(m.in_scc),
            num(m.escc),
            num(m.pure_out),
            num(m.dangling),
            num(m.other),
        ])?;
    }
    sink.finish()?;
    Ok(())
}

fn limit(io: &GraphOut, vector_out: Option<&Path>) -> Outcome {
    let l = load(&io.graph)?;
    let rep = limit_vector(&l.graph, &l.analysis.blocks)?;
    let prov = Provenance::new("limit", &l.hash, &[]);
    let mut sink = CsvSink::open(
        io.out.as_deref(),
        &prov,
        &["block_id", "size", "fair_share", "absorption_weight", "limit_mass"],
    )?;
    for b in 0..rep.block_sizes.len() {
        sink.row(&[
            b.to_string(),
            rep.block_sizes[b].to_string(),
            num(rep.fair_shares[b]),
            num(rep.absorption_weights[b]),
            num(rep.block_masses[b]),
        ])?;
    }
    sink.finish()?;
    if let Some(path) = vector_out {
        let mut sink = CsvSink::open(Some(path), &prov, &["node_id", "limit"])?;
        for (v, x) in rep.vector.iter().enumerate() {
            sink.row(&[v.to_string(), num(*x)])?;
        }
        sink.finish()?;
    }
    Ok(())
}

fn view_params(flags: &ViewFlags) -> Vec<(&'static str, String)> {
    vec![
        ("force_dn_merge", flag(flags.force_dn_merge)),
        ("fold_other", flag(flags.fold_other)),
    ]
}

fn inscc_curve(io: &GraphOut, grid: &DampingGrid, flags: &ViewFlags) -> Outcome {
    let l = load(&io.graph)?;
    let v = view(&l, flags)?;
    let mut params = vec![("grid", grid.to_string())];
    params.extend(view_params(flags));
    let prov = Provenance::new("inscc-curve", &l.hash, &params);
    let mut sink = CsvSink::open(
        io.out.as_deref(),
        &prov,
        &["c", "mass", "main_term", "correction", "d1_estimate", "d2_estimate"],
    )?;
    for c in grid.points() {
        let p = v.curve_point(c)?;
        sink.row(&[
            num(p.c),
            num(p.mass),
            num(p.main_term),
            num(p.correction),
            num(p.d1),
            num(p.d2),
        ])?;
    }
    sink.finish()?;
    Ok(())
}

fn inscc_derivatives(io: &GraphOut, damping: f64, flags: &ViewFlags) -> Outcome {
    let l = load(&io.graph)?;
    let v = view(&l, flags)?;
    let zero = v.derivative_at_zero();
    let split = v.sherman_morrison_split(damping)?;
    let grid = DampingGrid::new(0.0, 0.99, 0.01)?.points();
    let shape = v.unimodality_scan(&grid)?;

    let mut rows: Vec<(&str, String)> = vec![
        ("alpha", num(v.alpha)),
        ("beta", num(v.beta)),
        ("p1", num(zero.p1)),
        ("slope_at_0", num(zero.total)),
        ("increasing_at_0", flag(zero.increasing)),
    ];
    // the c = 1 quantities need every core node to reach a leaking node
    match v.exact_derivative_at_one() {
        Ok((_, total)) => rows.push(("slope_at_1", num(total))),
        Err(e) => {
            eprintln!("slope at c = 1 unavailable: {e}");
            rows.push(("slope_at_1", "NA".into()));
        }
    }
    match v.derivative_at_one() {
        Ok(one) => {
            rows.push(("leakage", num(one.leakage)));
            rows.push(("slope_at_1_leading_term", num(one.approximation)));
        }
        Err(e) => {
            eprintln!("leading-term approximation unavailable: {e}");
            rows.push(("leakage", "NA".into()));
            rows.push(("slope_at_1_leading_term", "NA".into()));
        }
    }
    rows.extend([
        ("split_damping", num(damping)),
        ("main_term_mass", num(split.main_mass())),
        ("correction_mass", num(split.correction_mass())),
        ("c0", num(shape.c0)),
        ("sign_changes", shape.sign_changes.to_string()),
        ("shape_violations", shape.violations.len().to_string()),
    ]);
    for msg in &shape.violations {
        eprintln!("shape violation: {msg}");
    }

    let mut params = vec![("damping", num(damping))];
    params.extend(view_params(flags));
    let prov = Provenance::new("inscc-derivatives", &l.hash, &params);
    let mut sink = CsvSink::open(io.out.as_deref(), &prov, &["quantity", "value"])?;
    for (k, val) in rows {
        sink.row(&[k.to_string(), val])?;
    }
    sink.finish()?;
    Ok(())
}

fn escc_bounds(io: &GraphOut, grid: &DampingGrid, scope: &ScopeFlag) -> Outcome {
    let l = load(&io.graph)?;
    let b = EsccBlock::new(&l.graph, &l.analysis, scope.scope())?;
    let s = b.spectral_summary()?;
    let table = b.prop3_bounds(&s, &grid.points())?;
    eprintln!(
        "block size {}, gamma {}, p1 {}, lambda1 {}",
        b.size(),
        num(b.gamma),
        num(s.p1),
        num(s.lambda1)
    );
    let fails = table.failures();
    if !fails.is_empty() && table.cond_i && table.cond_ii {
        eprintln!("warning: bounds fail at c = {fails:?} although both conditions hold");
    }
    let prov = Provenance::new(
        "escc-bounds",
        &l.hash,
        &[
            ("grid", grid.to_string()),
            ("exclude_pureout_transients", flag(scope.exclude_pureout_transients)),
        ],
    );
    let mut sink = CsvSink::open(
        io.out.as_deref(),
        &prov,
        &["c", "mass", "lower_bound", "upper_bound", "cond_i", "cond_ii"],
    )?;
    for r in &table.rows {
        sink.row(&[
            num(r.c),
            num(r.mass),
            num(r.lower),
            num(r.upper),
            flag(table.cond_i),
            flag(table.cond_ii),
        ])?;
    }
    sink.finish()?;
    Ok(())
}

fn cstar(io: &GraphOut, mode: SeedMode, width: f64, curve_out: Option<&Path>, scope: &ScopeFlag) -> Outcome {
    let l = load(&io.graph)?;
    let b = EsccBlock::new(&l.graph, &l.analysis, scope.scope())?;
    let s = b.spectral_summary()?;
    let rep = b.cstar_solve(&s, mode, width)?;
    let prov = Provenance::new(
        "cstar",
        &l.hash,
        &[
            ("mode", mode.as_str().to_string()),
            ("width", num(width)),
            ("exclude_pureout_transients", flag(scope.exclude_pureout_transients)),
        ],
    );
    let mut sink = CsvSink::open(io.out.as_deref(), &prov, &["quantity", "value"])?;
    let rows = [
        ("mode", mode.as_str().to_string()),
        ("gamma", num(b.gamma)),
        ("p1", num(s.p1)),
        ("lambda1", num(s.lambda1)),
        ("vt_norm", num(rep.vt_norm)),
        ("c1", num(rep.c1)),
        ("c2", num(rep.c2)),
        ("c_star", rep.c_star.map_or("NA".to_string(), num)),
        ("residual", num(rep.residual)),
        ("cond_i", flag(rep.cond_i)),
        ("cond_ii", flag(rep.cond_ii)),
    ];
    for (k, v) in rows {
        sink.row(&[k.to_string(), v])?;
    }
    sink.finish()?;
    if let Some(path) = curve_out {
        let mut sink = CsvSink::open(Some(path), &prov, &["c", "r", "mass"])?;
        for r in &rep.r_samples {
            sink.row(&[num(r.c), num(r.r), num(r.mass)])?;
        }
        sink.finish()?;
    }
    Ok(())
}

fn link_experiment(
    io: &GraphOut,
    source: usize,
    target: usize,
    dampings: &[f64],
    clicks: Option<&Path>,
    tol: f64,
) -> Outcome {
    let l = load(&io.graph)?;
    let counts: Option<HashMap<usize, f64>> = match clicks {
        Some(p) => Some(load_clicks(BufReader::new(File::open(p)?))?),
        None => None,
    };
    let rep = run_link_experiment(&l.graph, &l.analysis, source, target, dampings, tol, counts.as_ref())?;
    let list: Vec<String> = dampings.iter().map(|&c| num(c)).collect();
    let prov = Provenance::new(
        "link-experiment",
        &l.hash,
        &[
            ("source", source.to_string()),
            ("target", target.to_string()),
            ("damping_list", list.join(";")),
            ("tol", num(tol)),
        ],
    );
    let mut columns = vec![
        "c",
        "source_rank_without_link",
        "source_rank_with_link",
        "target_rank_without_link",
        "target_rank_with_link",
        "block_mass_without_link",
        "block_mass_with_link",
    ];
    if rep.click_rank.is_some() {
        columns.push("source_click_rank");
    }
    let mut sink = CsvSink::open(io.out.as_deref(), &prov, &columns)?;
    for r in &rep.rows {
        let mut fields = vec![
            num(r.damping),
            r.source_rank_before.to_string(),
            r.source_rank_after.to_string(),
            r.target_rank_before.to_string(),
            r.target_rank_after.to_string(),
            num(r.block_mass_before),
            num(r.block_mass_after),
        ];
        if let Some(k) = rep.click_rank {
            fields.push(k.to_string());
        }
        sink.row(&fields)?;
    }
    sink.finish()?;
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("cannot size the thread pool: {e}")))?;
    Ok(())
}

fn dispatch(cmd: &Command) -> Outcome {
    configure_threads()?;
    match cmd {
        Command::Decompose { io, summary } => decompose(io, summary.as_deref()),
        Command::Pagerank {
            io,
            damping,
            solver,
            max_iter,
        } => run_pagerank(io, *damping, solver.tol, *max_iter),
        Command::Sweep { io, grid, solver } => sweep(io, grid, solver.tol),
        Command::Limit { io, vector_out } => limit(io, vector_out.as_deref()),
        Command::InsccCurve { io, grid, view } => inscc_curve(io, grid, view),
        Command::InsccDerivatives { io, damping, view } => inscc_derivatives(io, *damping, view),
        Command::EsccBounds { io, grid, scope } => escc_bounds(io, grid, scope),
        Command::Cstar {
            io,
            mode,
            width,
            curve_out,
            scope,
        } => cstar(io, *mode, *width, curve_out.as_deref(), scope),
        Command::LinkExperiment {
            io,
            source,
            target,
            damping_list,
            clicks,
            solver,
        } => link_experiment(io, *source, *target, &damping_list.0, clicks.as_deref(), solver.tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
