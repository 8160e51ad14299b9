//! Benchmark and comparison harness.
//!
//! [`run_bench`] times the full pipeline (vertex enumeration, triangulation,
//! sampling) per dimension for a polytope family and reports one record per
//! dimension plus a per-phase breakdown. [`compare_samplers`] runs the three
//! samplers on one polytope with the same seed.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Polytope;
use crate::sampler::{draw_streams, Dbsop, HitAndRun, Rejection, SampleBatch, Sampler, SamplerId};
use crate::triangulation::triangulate_with;
use crate::vertex::{
    default_facet_incidence, enumerate_vertices_with, VertexMethod, VertexSet, DEFAULT_EPS,
};

/// Points per substream; batches are split into `ceil(N / SAMPLE_CHUNK)`
/// substreams so output does not depend on the thread count.
pub const SAMPLE_CHUNK: usize = 16_384;
pub const DEFAULT_DIM_GUARD: usize = 8;
const REPETITIONS: usize = 3;

pub fn stream_count(n_samples: usize) -> usize {
    n_samples.div_ceil(SAMPLE_CHUNK).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hypercube,
    Simplex,
    Crosspolytope,
}

impl Family {
    pub fn polytope(self, n: usize) -> Result<Polytope> {
        match self {
            Self::Hypercube => Polytope::hypercube(n),
            Self::Simplex => Polytope::standard_simplex(n),
            Self::Crosspolytope => Polytope::cross_polytope(n),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hypercube => "hypercube",
            Self::Simplex => "simplex",
            Self::Crosspolytope => "crosspolytope",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hypercube" | "cube" => Ok(Self::Hypercube),
            "simplex" => Ok(Self::Simplex),
            "crosspolytope" | "cross" => Ok(Self::Crosspolytope),
            other => Err(Error::invalid(format!("unknown polytope family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub dim_guard: usize,
    pub exec: Execution,
}

impl BenchConfig {
    pub fn new(family: Family, n_min: usize, n_max: usize) -> Self {
        Self {
            family,
            n_min,
            n_max,
            n_samples: 10_000,
            seed: 0,
            dim_guard: DEFAULT_DIM_GUARD,
            exec: Execution::default(),
        }
    }
}

/// One row of the timing table: dimension, time, vertex and simplex counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub family: Family,
    pub n: usize,
    pub t_seconds: f64,
    pub v: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub sampler: String,
    pub seed: u64,
    pub threads: usize,
}

/// Median phase timings for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub family: Family,
    pub n: usize,
    pub vertex_s: f64,
    pub triangulate_s: f64,
    pub sample_s: f64,
    pub triangulate_share: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn secs(d: Duration) -> f64 {
    // keep records strictly positive even on coarse clocks
    d.as_secs_f64().max(1e-9)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<(Vec<BenchRecord>, Vec<PhaseRecord>)> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(Error::invalid(format!(
            "dimension range {}..={} is empty or starts at 0",
            cfg.n_min, cfg.n_max
        )));
    }
    if cfg.n_max > cfg.dim_guard {
        return Err(Error::TooLarge(format!(
            "n_max = {} exceeds the dimension guard {}: triangulation size grows like n! and \
             can exhaust memory; raise the guard explicitly to proceed",
            cfg.n_max, cfg.dim_guard
        )));
    }
    let mut records = Vec::new();
    let mut phases = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let p = cfg.family.polytope(n)?;
        let mut totals = Vec::with_capacity(REPETITIONS);
        let mut vt = Vec::with_capacity(REPETITIONS);
        let mut tt = Vec::with_capacity(REPETITIONS);
        let mut st = Vec::with_capacity(REPETITIONS);
        let mut counts = (0, 0);
        for _ in 0..REPETITIONS {
            let t0 = Instant::now();
            let v = enumerate_vertices_with(&p, DEFAULT_EPS, VertexMethod::Auto, cfg.exec)?;
            let inc = default_facet_incidence(&p, &v);
            let t1 = Instant::now();
            let d = triangulate_with(&p, &v, &inc, cfg.exec)?;
            let t2 = Instant::now();
            let sampler = Dbsop::new(&d)?;
            let batch = draw_streams(
                &sampler,
                cfg.n_samples,
                cfg.seed,
                stream_count(cfg.n_samples),
                cfg.exec,
            )?;
            let t3 = Instant::now();
            debug_assert_eq!(batch.len(), cfg.n_samples);
            vt.push(secs(t1 - t0));
            tt.push(secs(t2 - t1));
            st.push(secs(t3 - t2));
            totals.push(secs(t3 - t0));
            counts = (v.len(), d.len());
        }
        let (vertex_s, triangulate_s, sample_s) = (median(vt), median(tt), median(st));
        records.push(BenchRecord {
            family: cfg.family,
            n,
            t_seconds: median(totals),
            v: counts.0,
            k: counts.1,
            n_samples: cfg.n_samples,
            sampler: SamplerId::Dbsop.to_string(),
            seed: cfg.seed,
            threads: if cfg.exec.is_parallel() {
                exec::current_num_threads()
            } else {
                1
            },
        });
        phases.push(PhaseRecord {
            family: cfg.family,
            n,
            vertex_s,
            triangulate_s,
            sample_s,
            triangulate_share: triangulate_s / (vertex_s + triangulate_s + sample_s),
        });
    }
    Ok((records, phases))
}

/// Least-squares fit of `ln t = a + b n`; returns `(a, b)`.
pub fn fit_log_linear(records: &[BenchRecord]) -> Result<(f64, f64)> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two records to fit".into(),
        ));
    }
    let m = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.t_seconds.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "records share one dimension".into(),
        ));
    }
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Extrapolated `t(n)` from [`fit_log_linear`]; not a measurement.
pub fn extrapolate_seconds(fit: (f64, f64), n: usize) -> f64 {
    (fit.0 + fit.1 * n as f64).exp()
}

pub const COMPARE_HEADER: [&str; 7] = [
    "sampler",
    "n",
    "n_samples",
    "setup_s",
    "sample_s",
    "per_sample_us",
    "acceptance",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub sampler: SamplerId,
    pub n: usize,
    pub n_samples: usize,
    pub setup_s: f64,
    pub sample_s: f64,
    pub per_sample_us: f64,
    pub acceptance: Option<f64>,
}

impl CompareRow {
    fn record(&self) -> [String; 7] {
        [
            self.sampler.to_string(),
            self.n.to_string(),
            self.n_samples.to_string(),
            self.setup_s.to_string(),
            self.sample_s.to_string(),
            self.per_sample_us.to_string(),
            self.acceptance.map(|a| a.to_string()).unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct CompareOptions {
    pub burn_in: usize,
    pub thin: usize,
    pub exec: Execution,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            burn_in: crate::sampler::DEFAULT_BURN_IN,
            thin: crate::sampler::DEFAULT_THIN,
            exec: Execution::default(),
        }
    }
}

/// Timing row plus the batch it was measured on.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub row: CompareRow,
    pub batch: SampleBatch,
}

/// Run DBSOP, hit-and-run and rejection on `p` with the same seed.
///
/// Setup time is reported separately: triangulation for DBSOP, vertex
/// enumeration (for the start point or proposal box) for the baselines.
pub fn compare_samplers(
    p: &Polytope,
    n_samples: usize,
    seed: u64,
    opts: &CompareOptions,
) -> Result<Vec<Comparison>> {
    let streams = stream_count(n_samples);
    let mut out = Vec::with_capacity(3);

    let t0 = Instant::now();
    let vertices = enumerate_vertices_with(p, DEFAULT_EPS, VertexMethod::Auto, opts.exec)?;
    let vertex_s = secs(t0.elapsed());

    let t0 = Instant::now();
    let inc = default_facet_incidence(p, &vertices);
    let d = triangulate_with(p, &vertices, &inc, opts.exec)?;
    let dbsop = Dbsop::new(&d)?;
    let setup = vertex_s + secs(t0.elapsed());
    out.push(time_sampler(
        &dbsop, setup, n_samples, seed, streams, opts.exec,
    )?);

    let (hr, setup) = timed(vertex_s, || {
        HitAndRun::new(p, start_point(&vertices)?, opts.burn_in, opts.thin)
    })?;
    out.push(time_sampler(
        &hr, setup, n_samples, seed, streams, opts.exec,
    )?);

    let (rej, setup) = timed(vertex_s, || {
        let (lo, hi) = vertices.bounding_box()?;
        Rejection::new(p, lo, hi)
    })?;
    out.push(time_sampler(
        &rej, setup, n_samples, seed, streams, opts.exec,
    )?);
    Ok(out)
}

fn start_point(v: &VertexSet) -> Result<Vec<f64>> {
    Ok(v.interior_point()?.into_inner())
}

fn timed<T>(base: f64, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t0 = Instant::now();
    let value = f()?;
    Ok((value, base + secs(t0.elapsed())))
}

fn time_sampler(
    sampler: &dyn Sampler,
    setup_s: f64,
    n_samples: usize,
    seed: u64,
    streams: usize,
    exec: Execution,
) -> Result<Comparison> {
    let t0 = Instant::now();
    let batch = draw_streams(sampler, n_samples, seed, streams, exec)?;
    let sample_s = secs(t0.elapsed());
    let row = CompareRow {
        sampler: sampler.id(),
        n: sampler.dim(),
        n_samples,
        setup_s,
        sample_s,
        per_sample_us: 1e6 * sample_s / n_samples.max(1) as f64,
        acceptance: batch.acceptance_rate(),
    };
    Ok(Comparison { row, batch })
}

pub fn write_compare_csv<W: std::io::Write>(w: W, rows: &[CompareRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COMPARE_HEADER)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_compare_csv<R: std::io::Read>(r: R) -> Result<Vec<CompareRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(COMPARE_HEADER) {
        return Err(Error::invalid("unexpected comparison CSV header"));
    }
    let bad = |what: &str| Error::invalid(format!("bad {what} in comparison CSV"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(COMPARE_HEADER[i]));
        rows.push(CompareRow {
            sampler: rec[0].parse()?,
            n: rec[1].parse().map_err(|_| bad("n"))?,
            n_samples: rec[2].parse().map_err(|_| bad("n_samples"))?,
            setup_s: f(3)?,
            sample_s: f(4)?,
            per_sample_us: f(5)?,
            acceptance: if rec[6].is_empty() { None } else { Some(f(6)?) },
        });
    }
    Ok(rows)
}

pub fn write_bench_csv<W: std::io::Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: std::io::Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
