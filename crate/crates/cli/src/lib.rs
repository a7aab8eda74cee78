//! Batch driver for the `mrball` experiments.
//!
//! Every subcommand writes one or more tables. Without `--out-dir` the
//! primary table goes to standard output; with it, every table is written
//! to `<out-dir>/<name>.<csv|json>`. Exit codes: 0 success, 1 invalid
//! input, 2 precision failure, 3 a unicity finding (a Markoff fiber with
//! more than six classes).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use mrball_core::counting::{
    active_gaps, boundary_lattice_scan, jarnik_arc_check, multiplicity, unicity_scan, LevelLabel,
};
use mrball_core::farey::{enumerate_classes, height_angle_cmp, primitive_of, PrimitiveClass};
use mrball_core::flatness::{
    construct_nonflat, flatness_profile, monte_carlo_omega, omega_hat, ContinuedFraction, ContinuedFractionRow,
    DirectionTarget, Rate,
};
use mrball_core::markoff::{
    bowditch_sink, large_root_scan, make_surface, resolve_cache_dir, SurfaceContext, SurfaceSpec,
};
use mrball_core::normball::{corner_atoms, gap_records, length, polygon_sandwich, tail_turn_scan};
use mrball_core::precision::PrecisionPolicy;
use mrball_core::report::{
    histogram_rows, monte_carlo_rows, polygon_rows, profile_rows, write_csv, write_document, write_json, write_rows,
    ActiveGapRow, AtomRow, FiberRow, GapRow, OmegaRow, OutputFormat, TailTurnRow,
};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid input or configuration.
pub const EXIT_INVALID: i32 = 1;
/// Exit code when precision or a computation budget ran out.
pub const EXIT_PRECISION: i32 = 2;
/// Exit code signalling a Markoff fiber larger than six.
pub const EXIT_UNICITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mrball",
    version,
    about = "Experiments on the stable-norm unit ball of one-holed tori"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// `modular` or `triple` (with --x/--y/--z).
    #[arg(long, global = true)]
    pub surface: Option<String>,
    /// Trace of (1,0) as a decimal string.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Trace of (0,1) as a decimal string.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Trace of (1,1) as a decimal string.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Height bound H.
    #[arg(long, global = true)]
    pub height: Option<u64>,
    /// Base working precision in bits.
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    /// `csv` or `json`.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Persistent trace cache directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Seed for randomized runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory receiving one file per table.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Validate the surface and print its basis traces.
    Validate,
    /// Trace of one class.
    Trace(ClassArgs),
    /// Length of one class.
    Length(ClassArgs),
    /// Inner and outer polygons around the unit ball at --height.
    Ball {
        /// Scale both polygons by this factor.
        #[arg(long, default_value_t = 1.0)]
        dilate: f64,
    },
    /// Corner atoms of every class up to --height.
    Atoms,
    /// Tail turn for H = 1..=hmax, from atoms and from gaps.
    Tailturn {
        #[arg(long)]
        hmax: u64,
    },
    /// Turn and endpoint defect of every gap at --height.
    Gaps {
        /// Also check the large-root property for every H up to --height.
        #[arg(long)]
        verify_large_root: bool,
    },
    /// Markoff fibers up to a bound (modular only).
    Fibers {
        #[arg(long)]
        max_markoff: String,
    },
    /// Multiplicity of one class, or the level histogram up to --height.
    Multiplicity {
        #[arg(long, allow_hyphen_values = true, requires = "q")]
        p: Option<i64>,
        #[arg(long, allow_hyphen_values = true, requires = "p")]
        q: Option<i64>,
    },
    /// Active gaps of one level for H = 1..=height.
    ActiveGaps {
        /// Markoff label m (modular only).
        #[arg(long, conflicts_with = "length")]
        markoff: Option<String>,
        /// Length window `lo,hi`.
        #[arg(long)]
        length: Option<String>,
    },
    /// Lattice points per gap arc on the level through a class.
    Jarnik(ClassArgs),
    /// Continued-fraction flatness diagnostics.
    #[command(subcommand)]
    Flatness(FlatnessCommand),
    /// The Bowditch sink triangle of the surface.
    Sink,
}

#[derive(Debug, Clone, Args)]
pub struct ClassArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub q: i64,
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// `golden`, `silver`, `cf:A0;A1,A2,...`, `angle:THETA` or `nonflat`.
    #[arg(long, default_value = "golden")]
    pub target: String,
    /// Growth rate for `nonflat`: a positive rational or `j`.
    #[arg(long, default_value = "1")]
    pub rate: String,
    /// Constructed levels for `nonflat`.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Prefix `A0;A1,A2,...` for `nonflat`.
    #[arg(long, default_value = "0;1")]
    pub prefix: String,
}

#[derive(Debug, Clone, Subcommand)]
pub enum FlatnessCommand {
    /// Graph-coordinate profile around the target direction.
    Profile {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Windowed approximation exponent at each height.
    Omega {
        #[command(flatten)]
        target: TargetArgs,
        /// Comma-separated window heights; defaults to --height.
        #[arg(long)]
        heights: Option<String>,
    },
    /// Extend a prefix so that q_{j+1} >= e^{A q_j}.
    Construct {
        #[arg(long, default_value = "1")]
        rate: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "0;1")]
        prefix: String,
    },
    /// Fraction of random directions with a large exponent.
    Montecarlo {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Comma-separated window heights; defaults to --height.
        #[arg(long)]
        heights: Option<String>,
    },
}

/// Effective settings after merging the configuration file and flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub precision: PrecisionPolicy,
    pub height: u64,
    pub output_format: OutputFormat,
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: SurfaceSpec::Modular,
            precision: PrecisionPolicy::default(),
            height: 8,
            output_format: OutputFormat::Csv,
            cache_dir: None,
            seed: 0,
            workers: None,
            out_dir: None,
        }
    }
}

impl RunConfig {
    /// Reads the optional configuration file, then applies flag overrides.
    pub fn resolve(g: &GlobalArgs) -> Result<Self> {
        let mut cfg = match &g.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        let triple = g.x.is_some() || g.y.is_some() || g.z.is_some();
        match g.surface.as_deref() {
            Some("modular") if triple => bail!("--x/--y/--z need --surface triple"),
            Some("modular") => cfg.surface = SurfaceSpec::Modular,
            Some("triple") | None if triple => {
                let (Some(x), Some(y), Some(z)) = (&g.x, &g.y, &g.z) else {
                    bail!("a triple surface needs all of --x, --y and --z");
                };
                cfg.surface = SurfaceSpec::Triple {
                    x: x.clone(),
                    y: y.clone(),
                    z: z.clone(),
                };
            }
            Some("triple") => {
                if !matches!(cfg.surface, SurfaceSpec::Triple { .. }) {
                    bail!("--surface triple needs --x, --y and --z");
                }
            }
            Some(other) => bail!("unknown surface {other:?}"),
            None => {}
        }
        if let Some(h) = g.height {
            cfg.height = h;
        }
        if let Some(bits) = g.precision_bits {
            cfg.precision = PrecisionPolicy {
                base_bits: bits,
                max_bits: cfg.precision.max_bits.max(bits),
                ..cfg.precision
            };
        }
        if let Some(f) = &g.format {
            cfg.output_format = f.parse()?;
        }
        // An explicit flag wins; otherwise the environment overrides the file.
        cfg.cache_dir = match &g.cache_dir {
            Some(d) => Some(d.clone()),
            None => resolve_cache_dir(cfg.cache_dir.as_deref()),
        };
        if let Some(s) = g.seed {
            cfg.seed = s;
        }
        if g.workers.is_some() {
            cfg.workers = g.workers;
        }
        if g.out_dir.is_some() {
            cfg.out_dir = g.out_dir.clone();
        }
        if cfg.height == 0 {
            bail!("height must be at least 1");
        }
        if cfg.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        cfg.precision.validate()?;
        Ok(cfg)
    }
}

/// Where tables go.
struct Sink<'a> {
    out_dir: Option<&'a Path>,
    format: OutputFormat,
    stdout: &'a mut (dyn Write + Send),
}

impl Sink<'_> {
    /// The primary table of a command.
    fn primary<T: Serialize + Default>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        match self.out_dir {
            Some(dir) => {
                write_rows(dir, name, self.format, rows)?;
            }
            None => match self.format {
                OutputFormat::Csv => write_csv(&mut *self.stdout, rows)?,
                OutputFormat::Json => write_json(&mut *self.stdout, rows)?,
            },
        }
        Ok(())
    }

    /// A secondary table, written only with an output directory.
    fn secondary<T: Serialize + Default>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        if let Some(dir) = self.out_dir {
            write_rows(dir, name, self.format, rows)?;
        }
        Ok(())
    }

    /// A JSON document: primary output on stdout, or a file.
    fn document<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        match self.out_dir {
            Some(dir) => {
                write_document(dir, name, value)?;
            }
            None => write_json(&mut *self.stdout, value)?,
        }
        Ok(())
    }
}

#[derive(Default, Serialize)]
struct SurfaceRow {
    kind: String,
    x: f64,
    y: f64,
    z: f64,
    fingerprint: String,
}

#[derive(Default, Serialize)]
struct TraceRow {
    p: i64,
    q: i64,
    trace: String,
    exact: bool,
}

#[derive(Default, Serialize)]
struct LengthRow {
    p: i64,
    q: i64,
    length: f64,
    precision_bits: u32,
}

#[derive(Default, Serialize)]
struct LargeRootRow {
    #[serde(rename = "H")]
    h: u64,
    gaps: usize,
    violations: usize,
    undecided: usize,
}

#[derive(Default, Serialize)]
struct MultiplicityRow {
    p: i64,
    q: i64,
    trace: String,
    count: usize,
    exact: bool,
    witnesses: String,
}

#[derive(Default, Serialize)]
struct JarnikRow {
    gap_index: usize,
    orientation: i8,
    u_p: i64,
    u_q: i64,
    v_p: i64,
    v_q: i64,
    count: usize,
    arc_length: f64,
    turn: f64,
    ratio: f64,
}

#[derive(Default, Serialize)]
struct SinkRow {
    p: i64,
    q: i64,
    trace: String,
    h0: u64,
    steps: u64,
}

#[derive(Default, Serialize)]
struct CertificateRow {
    j: usize,
    rate: String,
    s_j: String,
    quotient: String,
    s_next: String,
}

#[derive(Serialize)]
struct ConstructionDocument {
    rate: String,
    prefix_len: usize,
    direction: ContinuedFractionRow,
    certificates: Vec<CertificateRow>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_output(args, &mut std::io::stdout())
}

/// As [`run`], writing the primary table to `out`.
pub fn run_with_output<I, T>(args: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

/// Maps an error to its exit code.
pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<mrball_core::Error>() {
        Some(c) if c.is_precision_failure() => EXIT_PRECISION,
        _ => EXIT_INVALID,
    }
}

/// Runs a parsed command; returns the exit code for findings.
pub fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<i32> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let mut work = || -> Result<i32> {
        let mut ctx = make_surface(&cfg.surface, cfg.precision.clone())?;
        if let Some(dir) = &cfg.cache_dir {
            ctx.attach_store(dir)?;
        }
        let mut sink = Sink {
            out_dir: cfg.out_dir.as_deref(),
            format: cfg.output_format,
            stdout: out,
        };
        let code = dispatch(&cli.command, &cfg, &ctx, &mut sink)?;
        ctx.persist()?;
        Ok(code)
    };
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(work),
        None => work(),
    }
}

fn class(p: i64, q: i64) -> Result<PrimitiveClass> {
    Ok(primitive_of(p, q)?)
}

fn dispatch(cmd: &Command, cfg: &RunConfig, ctx: &SurfaceContext, sink: &mut Sink) -> Result<i32> {
    let h = cfg.height;
    match cmd {
        Command::Validate => {
            let [x, y, z] = ctx.basis_f64();
            let row = SurfaceRow {
                kind: format!("{:?}", ctx.kind()).to_lowercase(),
                x,
                y,
                z,
                fingerprint: ctx.fingerprint().to_string(),
            };
            sink.primary("validate", &[row])?;
        }
        Command::Trace(a) => {
            let c = class(a.p, a.q)?;
            let t = ctx.trace(&c)?;
            let row = TraceRow {
                p: c.p(),
                q: c.q(),
                trace: t.to_decimal_string(),
                exact: t.exact.is_some(),
            };
            sink.primary("trace", &[row])?;
        }
        Command::Length(a) => {
            let c = class(a.p, a.q)?;
            let l = length(ctx, &c)?;
            let row = LengthRow {
                p: c.p(),
                q: c.q(),
                length: l.to_f64(),
                precision_bits: l.precision_bits,
            };
            sink.primary("length", &[row])?;
        }
        Command::Ball { dilate } => {
            if !(dilate.is_finite() && *dilate > 0.0) {
                bail!("--dilate must be positive");
            }
            let s = polygon_sandwich(ctx, h, *dilate)?;
            sink.primary("ball_inner", &polygon_rows(&s, false))?;
            sink.secondary("ball_outer", &polygon_rows(&s, true))?;
        }
        Command::Atoms => {
            let mut classes = enumerate_classes(h)?.classes;
            classes.sort_by(height_angle_cmp);
            let atoms = corner_atoms(ctx, &classes)?;
            let rows: Vec<AtomRow> = atoms.iter().map(AtomRow::from).collect();
            sink.primary("atoms", &rows)?;
        }
        Command::Tailturn { hmax } => {
            if *hmax == 0 {
                bail!("--hmax must be at least 1");
            }
            let rows: Vec<TailTurnRow> = tail_turn_scan(ctx, *hmax)?.iter().map(TailTurnRow::from).collect();
            sink.primary("tailturn", &rows)?;
        }
        Command::Gaps { verify_large_root } => {
            let table = enumerate_classes(h)?;
            let rows: Vec<GapRow> = gap_records(ctx, &table)?.iter().map(GapRow::from).collect();
            sink.primary("gaps", &rows)?;
            if *verify_large_root {
                let h0 = bowditch_sink(ctx)?.h0.max(1);
                let mut rows = Vec::new();
                for hh in h0..=h.max(h0) {
                    let s = large_root_scan(ctx, hh)?;
                    for (u, v) in &s.violations {
                        eprintln!("large-root violation at H={hh}: {u:?}, {v:?}");
                    }
                    rows.push(LargeRootRow {
                        h: hh,
                        gaps: s.gaps,
                        violations: s.violations.len(),
                        undecided: s.undecided,
                    });
                }
                let bad: usize = rows.iter().map(|r| r.violations + r.undecided).sum();
                eprintln!("large root checked from H={h0} to H={}: {bad} failures", h.max(h0));
                sink.secondary("large_root", &rows)?;
            }
        }
        Command::Fibers { max_markoff } => {
            let m: Integer = max_markoff
                .parse()
                .map_err(|_| anyhow!("--max-markoff {max_markoff:?} is not an integer"))?;
            let scan = unicity_scan(ctx, &m)?;
            let rows: Vec<FiberRow> = scan.fibers.iter().map(FiberRow::from).collect();
            sink.primary("fibers", &rows)?;
            eprintln!(
                "fibers: {} up to m={m}, max size {}, max bound ratio {}",
                rows.len(),
                scan.max_size,
                scan.max_bound_ratio
            );
            if scan.unicity_violation {
                eprintln!("finding: a fiber has more than 6 classes");
                return Ok(EXIT_UNICITY);
            }
        }
        Command::Multiplicity { p, q } => match (p, q) {
            (Some(p), Some(q)) => {
                let m = multiplicity(ctx, &class(*p, *q)?)?;
                let witnesses: Vec<String> = m.witnesses.iter().map(|c| c.to_string()).collect();
                let row = MultiplicityRow {
                    p: m.target.p(),
                    q: m.target.q(),
                    trace: m.trace.to_decimal_string(),
                    count: m.count,
                    exact: m.exact,
                    witnesses: witnesses.join(" "),
                };
                sink.primary("multiplicity", &[row])?;
            }
            _ => {
                let scan = boundary_lattice_scan(ctx, h)?;
                sink.primary("histogram", &histogram_rows(&scan, ctx.is_modular()))?;
                eprintln!(
                    "levels: {}, max multiplicity {}, overlap clusters {}, histogram {:?}",
                    scan.levels.len(),
                    scan.max_multiplicity,
                    scan.overlap_clusters.len(),
                    scan.histogram
                );
                if scan.unicity_violation {
                    eprintln!("finding: a level has more than 6 classes");
                    return Ok(EXIT_UNICITY);
                }
            }
        },
        Command::ActiveGaps { markoff, length } => {
            let label = match (markoff, length) {
                (Some(m), None) => {
                    LevelLabel::Markoff(m.parse().map_err(|_| anyhow!("--markoff {m:?} is not an integer"))?)
                }
                (None, Some(w)) => {
                    let v = parse_list::<f64>(w)?;
                    let [lo, hi] = v[..] else {
                        bail!("--length takes lo,hi");
                    };
                    LevelLabel::Length { lo, hi }
                }
                _ => bail!("give exactly one of --markoff or --length"),
            };
            let rows = (1..=h)
                .map(|hh| active_gaps(ctx, hh, &label).map(|r| ActiveGapRow::from(&r)))
                .collect::<mrball_core::Result<Vec<_>>>()?;
            sink.primary("active_gaps", &rows)?;
        }
        Command::Jarnik(a) => {
            let r = jarnik_arc_check(ctx, &class(a.p, a.q)?, h)?;
            let rows: Vec<JarnikRow> = r
                .arcs
                .iter()
                .map(|a| JarnikRow {
                    gap_index: a.gap_index,
                    orientation: a.orientation,
                    u_p: a.u.0,
                    u_q: a.u.1,
                    v_p: a.v.0,
                    v_q: a.v.1,
                    count: a.count,
                    arc_length: a.arc_length,
                    turn: a.turn,
                    ratio: a.ratio,
                })
                .collect();
            sink.primary("jarnik", &rows)?;
            eprintln!(
                "jarnik: {} points, max ratio {}, violations {}",
                r.total_points, r.max_ratio, r.violations
            );
        }
        Command::Flatness(f) => flatness(f, cfg, ctx, sink)?,
        Command::Sink => {
            let s = bowditch_sink(ctx)?;
            let rows: Vec<SinkRow> = s
                .labels
                .iter()
                .zip(&s.traces)
                .map(|(c, t)| SinkRow {
                    p: c.p(),
                    q: c.q(),
                    trace: t.to_decimal_string(),
                    h0: s.h0,
                    steps: s.steps,
                })
                .collect();
            sink.primary("sink", &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn flatness(cmd: &FlatnessCommand, cfg: &RunConfig, ctx: &SurfaceContext, sink: &mut Sink) -> Result<()> {
    match cmd {
        FlatnessCommand::Profile { target, depth } => {
            let beta = parse_target(target)?;
            let p = flatness_profile(ctx, &beta, *depth)?;
            match cfg.output_format {
                OutputFormat::Csv => sink.primary("profile", &profile_rows(&p))?,
                OutputFormat::Json => sink.document("profile", &p)?,
            }
        }
        FlatnessCommand::Omega { target, heights } => {
            let beta = parse_target(target)?;
            let rows = heights_or(heights, cfg.height)?
                .into_iter()
                .map(|h| omega_hat(&beta, h).map(|o| OmegaRow::from(&o)))
                .collect::<mrball_core::Result<Vec<_>>>()?;
            sink.primary("omega", &rows)?;
        }
        FlatnessCommand::Construct { rate, levels, prefix } => {
            let rate = parse_rate(rate)?;
            let c = construct_nonflat(&rate, *levels, &parse_cf(prefix)?)?;
            let doc = ConstructionDocument {
                rate: rate.to_string(),
                prefix_len: c.prefix_len,
                direction: c.cf.row(),
                certificates: c
                    .certificates
                    .iter()
                    .map(|l| CertificateRow {
                        j: l.j,
                        rate: l.rate.to_string(),
                        s_j: l.s_j.to_string(),
                        quotient: l.quotient.to_string(),
                        s_next: l.s_next.to_string(),
                    })
                    .collect(),
            };
            sink.document("construct", &doc)?;
        }
        FlatnessCommand::Montecarlo { samples, heights } => {
            let mut rows = Vec::new();
            for h in heights_or(heights, cfg.height)? {
                rows.extend(monte_carlo_rows(&monte_carlo_omega(*samples, h, cfg.seed)?));
            }
            sink.primary("montecarlo", &rows)?;
        }
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| anyhow!("cannot parse {x:?} in {s:?}"))
        })
        .collect()
}

fn heights_or(list: &Option<String>, default: u64) -> Result<Vec<u64>> {
    match list {
        Some(s) => parse_list(s),
        None => Ok(vec![default]),
    }
}

/// Parses `A0;A1,A2,...` (the part after `;` may be empty).
pub fn parse_cf(s: &str) -> Result<ContinuedFraction> {
    let (a0, rest) = s.split_once(';').unwrap_or((s, ""));
    let a0: Integer = a0.trim().parse().map_err(|_| anyhow!("bad integer part in {s:?}"))?;
    let qs: Vec<Integer> = if rest.trim().is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .map(|x| x.trim().parse().map_err(|_| anyhow!("bad quotient {x:?} in {s:?}")))
            .collect::<Result<_>>()?
    };
    Ok(ContinuedFraction::new(a0, qs)?)
}

/// Parses a growth rate: a positive rational such as `1` or `3/2`, or `j`.
pub fn parse_rate(s: &str) -> Result<Rate> {
    if s == "j" {
        return Ok(Rate::Growing);
    }
    let r: Rational = s.parse().map_err(|_| anyhow!("bad rate {s:?}"))?;
    Ok(Rate::Fixed(r))
}

/// Parses a direction specification.
pub fn parse_target(t: &TargetArgs) -> Result<DirectionTarget> {
    let spec = t.target.as_str();
    Ok(match spec {
        "golden" => DirectionTarget::golden(),
        "silver" => DirectionTarget::silver(),
        "nonflat" => {
            let c = construct_nonflat(&parse_rate(&t.rate)?, t.levels, &parse_cf(&t.prefix)?)?;
            DirectionTarget::constructed(&format!("nonflat rate {}", t.rate), &c)
        }
        _ => {
            if let Some(cf) = spec.strip_prefix("cf:") {
                DirectionTarget::prefix(spec, &parse_cf(cf)?)
            } else if let Some(a) = spec.strip_prefix("angle:") {
                let theta: Rational = mrball_core::precision::parse_decimal(a)?;
                DirectionTarget::from_angle(&theta, 256)?
            } else {
                bail!("unknown target {spec:?}");
            }
        }
    })
}
