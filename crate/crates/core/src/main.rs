use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polysample::analysis::{chi_square_bins_with, chi_square_membership};
use polysample::bench::{
    self, compare_samplers, fit_log_linear, run_bench, BenchConfig, CompareOptions, Family,
};
use polysample::exec::{with_thread_cap, Execution};
use polysample::io::{
    read_polytope_file, write_decomposition, write_polytope_file, write_samples_csv, PolytopeFile,
};
use polysample::sampler::{
    self, draw_streams, Dbsop, HitAndRun, Rejection, SampleBatch, SamplerId,
};
use polysample::triangulation::{polytope_volume, triangulate_with};
use polysample::vertex::{
    default_facet_incidence, enumerate_vertices_with, VertexMethod, DEFAULT_EPS,
};
use polysample::{Error, Polytope, Result};

const THREADS_ENV: &str = "POLYSAMPLE_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "polysample",
    version,
    about = "Uniform sampling from convex polytopes"
)]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate vertices of an H-rep polytope.
    Vertices {
        #[command(flatten)]
        io: InOut,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Triangulate into simplices and write the decomposition as JSON.
    Triangulate {
        #[command(flatten)]
        io: InOut,
    },
    /// Print the exact volume.
    Volume {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Draw samples and write them as CSV.
    Sample {
        #[command(flatten)]
        io: InOut,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = SamplerArg::Dbsop)]
        sampler: SamplerArg,
        /// Also run a chi-square bin test on a g^n grid (report on stderr).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Time the full pipeline over a polytope family.
    Bench {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-phase timing CSV.
        #[arg(long)]
        phases_out: Option<PathBuf>,
        /// Largest dimension allowed.
        #[arg(long, default_value_t = bench::DEFAULT_DIM_GUARD)]
        guard: usize,
        /// Print a log-linear extrapolation of t(n) up to this dimension.
        #[arg(long)]
        extrapolate_to: Option<usize>,
    },
    /// Time all three samplers on one polytope.
    Compare {
        #[command(flatten)]
        io: InOut,
        #[command(flatten)]
        run: RunArgs,
        /// Also run a chi-square bin test on each batch (report on stderr).
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 10_000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = sampler::DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long, default_value_t = sampler::DEFAULT_THIN)]
    thin: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Auto,
    Basis,
    Dd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Dbsop,
    Hitandrun,
    Rejection,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Hypercube,
    Simplex,
    Crosspolytope,
}

impl From<Method> for VertexMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => Self::Auto,
            Method::Basis => Self::BasisEnumeration,
            Method::Dd => Self::DoubleDescription,
        }
    }
}

impl From<SamplerArg> for SamplerId {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Dbsop => Self::Dbsop,
            SamplerArg::Hitandrun => Self::HitAndRun,
            SamplerArg::Rejection => Self::Rejection,
        }
    }
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Hypercube => Self::Hypercube,
            FamilyArg::Simplex => Self::Simplex,
            FamilyArg::Crosspolytope => Self::Crosspolytope,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(t) if t > 0 => Some(t),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {s:?}");
                return ExitCode::from(1);
            }
        },
        Err(_) => None,
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match with_thread_cap(threads, || run(cli.command, exec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() || matches!(e, Error::InvalidArgument(_)) {
        1
    } else {
        2
    }
}

fn load(path: &Path) -> Result<Polytope> {
    read_polytope_file(io::BufReader::new(File::open(path)?))?.to_polytope()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn run(cmd: Command, exec: Execution) -> Result<()> {
    match cmd {
        Command::Vertices { io, method } => {
            let p = load(&io.input)?;
            let v = enumerate_vertices_with(&p, DEFAULT_EPS, method.into(), exec)?;
            eprintln!("{} vertices", v.len());
            let mut w = output(io.out.as_deref())?;
            write_polytope_file(&mut w, &PolytopeFile::from_vertices(&v))?;
            writeln!(w)?;
            finish(w)
        }
        Command::Triangulate { io } => {
            let p = load(&io.input)?;
            let v = enumerate_vertices_with(&p, DEFAULT_EPS, VertexMethod::Auto, exec)?;
            let d = triangulate_with(&p, &v, &default_facet_incidence(&p, &v), exec)?;
            eprintln!(
                "{} vertices, {} simplices, {} dropped",
                v.len(),
                d.len(),
                d.dropped()
            );
            let mut w = output(io.out.as_deref())?;
            write_decomposition(&mut w, &d)?;
            writeln!(w)?;
            finish(w)
        }
        Command::Volume { input } => {
            let p = load(&input)?;
            let v = enumerate_vertices_with(&p, DEFAULT_EPS, VertexMethod::Auto, exec)?;
            let d = triangulate_with(&p, &v, &default_facet_incidence(&p, &v), exec)?;
            println!("{}", polytope_volume(&d));
            Ok(())
        }
        Command::Sample {
            io,
            run,
            sampler,
            grid,
        } => {
            let p = load(&io.input)?;
            let batch = sample(&p, sampler.into(), &run, grid.is_some(), exec)?;
            if let Some(g) = grid {
                let r = chi_square_bins_with(&batch, &p, g, exec)?;
                eprintln!(
                    "chi-square bins: statistic {:.3}, dof {}, critical {:.3}, {}",
                    r.statistic,
                    r.dof,
                    r.critical_value_001,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            let mut w = output(io.out.as_deref())?;
            write_samples_csv(&mut w, &batch)?;
            finish(w)
        }
        Command::Bench {
            family,
            n_min,
            n_max,
            n_samples,
            seed,
            out,
            phases_out,
            guard,
            extrapolate_to,
        } => {
            let cfg = BenchConfig {
                n_samples,
                seed,
                dim_guard: guard,
                exec,
                ..BenchConfig::new(family.into(), n_min, n_max)
            };
            let (records, phases) = run_bench(&cfg)?;
            for (r, ph) in records.iter().zip(&phases) {
                eprintln!(
                    "n={} t={:.6}s v={} K={} triangulation share {:.3}",
                    r.n, r.t_seconds, r.v, r.k, ph.triangulate_share
                );
            }
            let mut w = output(out.as_deref())?;
            bench::write_bench_csv(&mut w, &records)?;
            finish(w)?;
            if let Some(path) = phases_out {
                let mut w = output(Some(&path))?;
                bench::write_bench_csv(&mut w, &phases)?;
                finish(w)?;
            }
            if let Some(to) = extrapolate_to {
                let fit = fit_log_linear(&records)?;
                for n in n_max + 1..=to {
                    eprintln!(
                        "extrapolation (not measured): n={n} t~{:.3}s",
                        bench::extrapolate_seconds(fit, n)
                    );
                }
            }
            Ok(())
        }
        Command::Compare { io, run, grid } => {
            let p = load(&io.input)?;
            let opts = CompareOptions {
                burn_in: run.burn_in,
                thin: run.thin,
                exec,
            };
            let runs = compare_samplers(&p, run.n_samples, run.seed, &opts)?;
            if let Some(g) = grid {
                for c in &runs {
                    let r = chi_square_bins_with(&c.batch, &p, g, exec)?;
                    eprintln!(
                        "{}: chi-square {:.3} on {} dof (critical {:.3}) {}",
                        c.row.sampler,
                        r.statistic,
                        r.dof,
                        r.critical_value_001,
                        if r.pass { "pass" } else { "FAIL" }
                    );
                }
            }
            let rows: Vec<_> = runs.into_iter().map(|c| c.row).collect();
            let mut w = output(io.out.as_deref())?;
            bench::write_compare_csv(&mut w, &rows)?;
            finish(w)
        }
    }
}

fn sample(
    p: &Polytope,
    id: SamplerId,
    run: &RunArgs,
    check: bool,
    exec: Execution,
) -> Result<SampleBatch> {
    let v = enumerate_vertices_with(p, DEFAULT_EPS, VertexMethod::Auto, exec)?;
    let streams = bench::stream_count(run.n_samples);
    match id {
        SamplerId::Dbsop => {
            let d = triangulate_with(p, &v, &default_facet_incidence(p, &v), exec)?;
            let batch = draw_streams(&Dbsop::new(&d)?, run.n_samples, run.seed, streams, exec)?;
            if check {
                let r = chi_square_membership(&batch, &d)?;
                eprintln!(
                    "chi-square membership: statistic {:.3}, dof {}, critical {:.3}, {}",
                    r.statistic,
                    r.dof,
                    r.critical_value_001,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(batch)
        }
        SamplerId::HitAndRun => {
            let hr = HitAndRun::new(p, v.interior_point()?.into_inner(), run.burn_in, run.thin)?;
            draw_streams(&hr, run.n_samples, run.seed, streams, exec)
        }
        SamplerId::Rejection => {
            let (lo, hi) = v.bounding_box()?;
            draw_streams(
                &Rejection::new(p, lo, hi)?,
                run.n_samples,
                run.seed,
                streams,
                exec,
            )
        }
    }
}
