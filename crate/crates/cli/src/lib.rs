//! Flag parsing, single layout runs and the benchmark table behind the
//! `mblayout` binary.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use mblayout::graph::parse_mtx;
use mblayout::init::initialize;
use mblayout::metrics::DEFAULT_PAIR_BUDGET;
use mblayout::model::ConvergenceMode;
use mblayout::output::{render_svg, write_layout, SvgSpec};
use mblayout::{
    generators, layout_bh, layout_exact, random_init, BatchConfig, BhConfig, ConvergenceTracker, CsrGraph,
    EnergyModel, InitConfig, InitMode, LayoutRun, MetricReport, ModelVariant, PairBudget, StepScheduler,
};

pub const DEFAULT_ITERATIONS: usize = 600;
pub const DEFAULT_BENCH_ITERATIONS: usize = 10;

/// Engine and starting layout selected by an algo code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    BarnesHut,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exact => "exact",
            Engine::BarnesHut => "bh",
        })
    }
}

/// What an algo code 0..=6 stands for. This numbering is ours:
///
/// | code | engine | init | model |
/// |------|--------|------|-------|
/// | 0 | exact | random | 2,-1 |
/// | 1 | exact | greedy | 2,-1 |
/// | 2 | bh | greedy | 2,-1 |
/// | 3 | bh | random | 2,-1 |
/// | 4 | bh | greedy | 1,-1 |
/// | 5 | bh | greedy | 0,-1 |
/// | 6 | bh | greedy | 1,1 |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Algo {
    pub code: u8,
    pub engine: Engine,
    pub init: InitMode,
    pub model: ModelVariant,
}

impl Algo {
    pub fn from_code(code: u8) -> Option<Algo> {
        use Engine::*;
        use InitMode::*;
        use ModelVariant::*;
        let (engine, init, model) = match code {
            0 => (Exact, Random, FruchtermanReingold),
            1 => (Exact, Greedy, FruchtermanReingold),
            2 => (BarnesHut, Greedy, FruchtermanReingold),
            3 => (BarnesHut, Random, FruchtermanReingold),
            4 => (BarnesHut, Greedy, ForceAtlas),
            5 => (BarnesHut, Greedy, LinLog),
            6 => (BarnesHut, Greedy, LinearRepulsion),
            _ => return None,
        };
        Some(Algo {
            code,
            engine,
            init,
            model,
        })
    }
}

fn parse_algo(s: &str) -> std::result::Result<u8, String> {
    s.parse::<u8>()
        .ok()
        .filter(|c| *c <= 6)
        .ok_or_else(|| "algo must be 0..6".to_string())
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "mblayout",
    version,
    about = "Minibatch force-directed graph layout",
    allow_negative_numbers = true
)]
pub struct CliConfig {
    /// Matrix Market graph file
    #[arg(long, required_unless_present = "bench")]
    pub input: Option<PathBuf>,
    /// Directory for the layout, summary and optional SVG / metric files
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Iteration cap [default: 600, or 10 with -bench]
    #[arg(long)]
    pub iter: Option<usize>,
    /// Minibatch size
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    /// Worker threads [default: all available]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Algorithm variant 0..6 (engine, init and model; see the README)
    #[arg(long, default_value_t = 2, value_parser = parse_algo)]
    pub algo: u8,
    /// Override the initialisation chosen by -algo: random or greedy
    #[arg(long)]
    pub init: Option<InitMode>,
    /// Override the energy model chosen by -algo, as "a,r"
    #[arg(long)]
    pub model: Option<ModelVariant>,
    /// Barnes-Hut opening threshold
    #[arg(long, default_value_t = 1.2)]
    pub theta: f64,
    /// Stop when the energy changes by less than this; 0 runs every iteration
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    /// Compare energy changes relative to the previous energy
    #[arg(long)]
    pub relative: bool,
    /// Seed for random initialisation and metric sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write an SVG drawing
    #[arg(long)]
    pub svg: bool,
    /// Also write stress, edge uniformity and neighborhood preservation
    #[arg(long)]
    pub metrics: bool,
    /// Print a timing table instead of laying out -input
    #[arg(long)]
    pub bench: bool,
    /// Graph sizes for -bench, comma separated
    #[arg(long, value_delimiter = ',', default_value = "4096,8192", value_parser = clap::value_parser!(u64).range(1..))]
    pub sizes: Vec<u64>,
    /// Thread counts for -bench, comma separated [default: 1 and -threads]
    #[arg(long = "bench-threads", value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub bench_threads: Option<Vec<u64>>,
}

/// Accepts the single-dash long flags of the original tool (`-iter 600`) as
/// well as `--iter 600`.
pub fn normalize_args<I, S>(argv: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    argv.into_iter()
        .enumerate()
        .map(|(k, a)| {
            let a = a.into();
            let single_dash_word = a.len() > 2
                && a.starts_with('-')
                && !a.starts_with("--")
                && a[1..].starts_with(|c: char| c.is_ascii_alphabetic());
            if k > 0 && single_dash_word {
                format!("-{a}")
            } else {
                a
            }
        })
        .collect()
}

/// Parses a full argv, program name first.
pub fn parse_flags<I, S>(argv: I) -> std::result::Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let cfg = CliConfig::try_parse_from(normalize_args(argv))?;
    let bad = |msg: String| clap::Error::raw(clap::error::ErrorKind::ValueValidation, msg);
    if !(cfg.theta >= 0.0 && cfg.theta.is_finite()) {
        return Err(bad(format!("theta must be a finite non-negative number, got {}\n", cfg.theta)));
    }
    if !(cfg.threshold >= 0.0 && cfg.threshold.is_finite()) {
        return Err(bad(format!("threshold must be a finite non-negative number, got {}\n", cfg.threshold)));
    }
    Ok(cfg)
}

impl CliConfig {
    pub fn algo(&self) -> Algo {
        Algo::from_code(self.algo).expect("validated by the parser")
    }

    pub fn iterations(&self) -> usize {
        self.iter.unwrap_or(if self.bench {
            DEFAULT_BENCH_ITERATIONS
        } else {
            DEFAULT_ITERATIONS
        })
    }

    pub fn threads(&self) -> usize {
        self.threads
            .map(|t| t as usize)
            .unwrap_or_else(|| BatchConfig::default().threads)
    }

    pub fn init_mode(&self) -> InitMode {
        self.init.unwrap_or(self.algo().init)
    }

    pub fn model(&self) -> EnergyModel {
        EnergyModel::with_variant(self.model.unwrap_or(self.algo().model))
    }

    pub fn batch_config(&self) -> BatchConfig {
        BatchConfig::with_batch(self.batch as usize).threads(self.threads())
    }

    pub fn bh_config(&self) -> BhConfig {
        BhConfig::with_theta(self.theta)
    }

    pub fn tracker(&self) -> Result<ConvergenceTracker> {
        let mode = if self.relative {
            ConvergenceMode::Relative
        } else {
            ConvergenceMode::Absolute
        };
        Ok(ConvergenceTracker::new(self.threshold, self.iterations())?.with_mode(mode))
    }

    pub fn init_config(&self) -> InitConfig {
        InitConfig {
            mode: self.init_mode(),
            maxmin: None,
            seed: self.seed,
        }
    }
}

/// Lays out `g` with the engine, init and model selected by `cfg`.
pub fn layout(g: &CsrGraph, cfg: &CliConfig) -> Result<LayoutRun> {
    let init = initialize(g, &cfg.init_config())?;
    let model = cfg.model();
    let batch = cfg.batch_config();
    let run = match cfg.algo().engine {
        Engine::Exact => layout_exact(g, &init, &model, &batch, StepScheduler::default(), cfg.tracker()?)?,
        Engine::BarnesHut => layout_bh(
            g,
            &init,
            &model,
            &batch,
            &cfg.bh_config(),
            StepScheduler::default(),
            cfg.tracker()?,
        )?,
    };
    Ok(run)
}

/// What a run reports and writes to `<stem>_summary.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub iterations: usize,
    pub energy: f64,
    pub seconds: f64,
    pub algo: u8,
    pub batch: u64,
    pub threads: usize,
    pub theta: f64,
    pub engine: Engine,
    pub init: InitMode,
    pub model: ModelVariant,
    pub converged: bool,
    pub layout_path: PathBuf,
    pub svg_path: Option<PathBuf>,
    pub metrics_path: Option<PathBuf>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "iterations={}", self.iterations)?;
        writeln!(f, "energy={}", self.energy)?;
        writeln!(f, "seconds={}", self.seconds)?;
        writeln!(f, "algo={}", self.algo)?;
        writeln!(f, "batch={}", self.batch)?;
        writeln!(f, "threads={}", self.threads)?;
        writeln!(f, "theta={}", self.theta)?;
        writeln!(f, "engine={}", self.engine)?;
        writeln!(f, "init={}", self.init)?;
        writeln!(f, "model={}", self.model)?;
        writeln!(f, "converged={}", self.converged)
    }
}

/// Output file paths for an input graph.
pub fn artifact_paths(cfg: &CliConfig, input: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let out = &cfg.output;
    (
        out.join(format!("{stem}_layout.txt")),
        out.join(format!("{stem}.svg")),
        out.join(format!("{stem}_metrics.txt")),
        out.join(format!("{stem}_summary.txt")),
    )
}

/// Reads the graph, lays it out and writes every requested artifact.
pub fn run(cfg: &CliConfig) -> Result<RunSummary> {
    let Some(input) = cfg.input.as_deref() else {
        bail!("-input is required");
    };
    let (g, _meta) = parse_mtx(input)?;
    fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let (layout_path, svg_path, metrics_path, summary_path) = artifact_paths(cfg, input);

    let started = Instant::now();
    let run = layout(&g, cfg)?;
    let seconds = started.elapsed().as_secs_f64();

    write_layout(&run.layout, &layout_path)?;
    let svg_path = if cfg.svg {
        render_svg(&g, &run.layout, &SvgSpec::default(), &svg_path)?;
        Some(svg_path)
    } else {
        None
    };
    let metrics_path = if cfg.metrics {
        let budget = PairBudget::Sampled {
            pairs: DEFAULT_PAIR_BUDGET,
            seed: cfg.seed,
        };
        let report = MetricReport::compute(&g, &run.layout, budget)?;
        fs::write(&metrics_path, report.to_string()).with_context(|| format!("writing {}", metrics_path.display()))?;
        Some(metrics_path)
    } else {
        None
    };

    let algo = cfg.algo();
    let summary = RunSummary {
        iterations: run.iterations,
        energy: run.energy,
        seconds,
        algo: algo.code,
        batch: cfg.batch,
        threads: cfg.threads(),
        theta: cfg.theta,
        engine: algo.engine,
        init: cfg.init_mode(),
        model: cfg.model().variant(),
        converged: run.iterations < cfg.iterations(),
        layout_path,
        svg_path,
        metrics_path,
    };
    fs::write(&summary_path, summary.to_string()).with_context(|| format!("writing {}", summary_path.display()))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub engine: Engine,
    pub threads: usize,
    pub seconds: f64,
    pub energy: f64,
}

/// Graph used for a benchmark size: connected, average degree about six.
pub fn bench_graph(n: usize, seed: u64) -> CsrGraph {
    generators::random_connected(n, 2 * n, seed)
}

/// Times both engines on generated graphs for every size and thread count
/// and writes a whitespace-separated table to `out`.
pub fn bench(cfg: &CliConfig, out: &mut impl Write) -> Result<Vec<BenchRow>> {
    let threads: Vec<usize> = match &cfg.bench_threads {
        Some(t) => t.iter().map(|&t| t as usize).collect(),
        None => {
            let mut t = vec![1, cfg.threads()];
            t.dedup();
            t
        }
    };
    let model = cfg.model();
    writeln!(out, "size algo threads seconds energy")?;
    let mut rows = Vec::new();
    for size in cfg.sizes.iter().map(|&s| s as usize) {
        let g = bench_graph(size, cfg.seed);
        let init = random_init(&g, &InitConfig::random(cfg.seed))?;
        for engine in [Engine::Exact, Engine::BarnesHut] {
            for &t in &threads {
                let batch = BatchConfig::with_batch(cfg.batch as usize).threads(t);
                let tracker = ConvergenceTracker::fixed(cfg.iterations());
                let started = Instant::now();
                let run = match engine {
                    Engine::Exact => layout_exact(&g, &init, &model, &batch, StepScheduler::default(), tracker)?,
                    Engine::BarnesHut => {
                        layout_bh(&g, &init, &model, &batch, &cfg.bh_config(), StepScheduler::default(), tracker)?
                    }
                };
                let row = BenchRow {
                    size,
                    engine,
                    threads: t,
                    seconds: started.elapsed().as_secs_f64(),
                    energy: run.energy,
                };
                writeln!(out, "{} {} {} {:.6} {}", row.size, row.engine, row.threads, row.seconds, row.energy)?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
