//! The decomposition sampler and the two baselines.
//!
//! Every sampler implements [`Sampler`], which fills a chunk of points from a
//! single [`RngStream`]. [`draw`] runs one stream; [`draw_streams`] splits the
//! request over several substreams and concatenates them in stream order, so
//! the result depends on `(seed, streams)` but never on thread scheduling.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Polytope;
use crate::linalg::dot;
use crate::rng::RngStream;
use crate::triangulation::Decomposition;

/// Containment tolerance every emitted point must satisfy.
pub const CONTAINMENT_EPS: f64 = 1e-8;
pub const DEFAULT_BURN_IN: usize = 1_000;
pub const DEFAULT_THIN: usize = 5;
const MIN_CHORD: f64 = 1e-14;
const REJECTION_MIN_RATE: f64 = 1e-9;
const REJECTION_CHECK_AFTER: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerId {
    Dbsop,
    HitAndRun,
    Rejection,
}

impl SamplerId {
    pub const ALL: [SamplerId; 3] = [SamplerId::Dbsop, SamplerId::HitAndRun, SamplerId::Rejection];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dbsop => "dbsop",
            Self::HitAndRun => "hitandrun",
            Self::Rejection => "rejection",
        }
    }
}

impl fmt::Display for SamplerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dbsop" => Ok(Self::Dbsop),
            "hitandrun" => Ok(Self::HitAndRun),
            "rejection" => Ok(Self::Rejection),
            other => Err(Error::invalid(format!("unknown sampler {other:?}"))),
        }
    }
}

/// `N` points in ℝⁿ, stored row-major, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    n: usize,
    points: Vec<f64>,
    /// Simplex each point was drawn from, `-1` when the sampler has none.
    simplex_index: Vec<i64>,
    seed: u64,
    sampler: SamplerId,
    proposals: u64,
}

impl SampleBatch {
    pub fn new(
        n: usize,
        points: Vec<f64>,
        simplex_index: Vec<i64>,
        seed: u64,
        sampler: SamplerId,
    ) -> Result<Self> {
        if n == 0 || !points.len().is_multiple_of(n) || points.len() / n != simplex_index.len() {
            return Err(Error::invalid(format!(
                "{} coordinates and {} indices do not form a batch in dimension {n}",
                points.len(),
                simplex_index.len()
            )));
        }
        let proposals = simplex_index.len() as u64;
        Ok(Self {
            n,
            points,
            simplex_index,
            seed,
            sampler,
            proposals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.simplex_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplex_index.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.n)
    }

    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn simplex_index(&self) -> &[i64] {
        &self.simplex_index
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> SamplerId {
        self.sampler
    }

    /// Proposals drawn to produce the batch (equals `len()` except for rejection).
    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// Accepted / proposed, reported for rejection sampling only.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.sampler == SamplerId::Rejection && self.proposals > 0)
            .then(|| self.len() as f64 / self.proposals as f64)
    }

    /// Fraction of points inside `p` within `eps`.
    pub fn containment_fraction(&self, p: &Polytope, eps: f64) -> f64 {
        if self.is_empty() {
            return 1.0;
        }
        let inside = self
            .points()
            .filter(|x| p.contains_unchecked(x, eps))
            .count();
        inside as f64 / self.len() as f64
    }
}

/// Output buffer for one stream.
#[derive(Clone, Debug, Default)]
pub struct Chunk {
    pub points: Vec<f64>,
    pub simplex_index: Vec<i64>,
    pub proposals: u64,
}

/// A uniform sampler over a fixed polytope.
pub trait Sampler: Sync {
    fn id(&self) -> SamplerId;

    fn dim(&self) -> usize;

    /// Append `count` points drawn from `rng` to `out`.
    fn fill(&self, count: usize, rng: &mut RngStream, out: &mut Chunk) -> Result<()>;
}

/// Draw `count` points from a single stream seeded with `seed`.
pub fn draw(sampler: &dyn Sampler, count: usize, seed: u64) -> Result<SampleBatch> {
    let mut rng = RngStream::new(seed);
    let mut chunk = Chunk::default();
    sampler.fill(count, &mut rng, &mut chunk)?;
    into_batch(sampler, vec![chunk], seed)
}

/// Split `count` over `streams` substreams (`seed + i`) and concatenate in order.
///
/// Stream `i` receives `count / streams` points plus one if `i < count % streams`.
pub fn draw_streams(
    sampler: &dyn Sampler,
    count: usize,
    seed: u64,
    streams: usize,
    exec: Execution,
) -> Result<SampleBatch> {
    let streams = streams.max(1);
    let chunks = exec.map_range(streams, |i| {
        let share = count / streams + usize::from(i < count % streams);
        let mut rng = RngStream::substream(seed, i as u64);
        let mut chunk = Chunk::default();
        sampler.fill(share, &mut rng, &mut chunk).map(|_| chunk)
    });
    let chunks = chunks.into_iter().collect::<Result<Vec<_>>>()?;
    into_batch(sampler, chunks, seed)
}

fn into_batch(sampler: &dyn Sampler, chunks: Vec<Chunk>, seed: u64) -> Result<SampleBatch> {
    let mut points = Vec::with_capacity(chunks.iter().map(|c| c.points.len()).sum());
    let mut simplex_index = Vec::with_capacity(chunks.iter().map(|c| c.simplex_index.len()).sum());
    let mut proposals = 0;
    for c in chunks {
        points.extend(c.points);
        simplex_index.extend(c.simplex_index);
        proposals += c.proposals;
    }
    let mut batch = SampleBatch::new(sampler.dim(), points, simplex_index, seed, sampler.id())?;
    batch.proposals = proposals;
    Ok(batch)
}

/// Flat Dirichlet on the unit simplex `{w ≥ 0, Σ w ≤ 1}` written into `w`.
///
/// Draws n+1 standard exponentials `e₀..e_n` and sets `w_i = e_i / Σ e`,
/// dropping `e₀`. The result always satisfies `Σ w ≤ 1` in floating point.
pub fn sample_unit_simplex_into(rng: &mut RngStream, w: &mut [f64]) {
    let e0 = rng.exp1();
    let mut total = e0;
    for x in w.iter_mut() {
        *x = rng.exp1();
        total += *x;
    }
    w.iter_mut().for_each(|x| *x /= total);
    let mut s: f64 = w.iter().sum();
    while s > 1.0 {
        w.iter_mut().for_each(|x| *x /= s);
        s = w.iter().sum();
    }
}

pub fn sample_unit_simplex(rng: &mut RngStream, n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    sample_unit_simplex_into(rng, &mut w);
    w
}

/// Cumulative-sum table for categorical draws.
#[derive(Clone, Debug)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(q: &[f64]) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if q.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::invalid("probabilities must be positive and finite"));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = q
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {acc}, not 1")));
        }
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.uniform() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

pub fn sample_categorical(rng: &mut RngStream, q: &[f64]) -> Result<usize> {
    Ok(Categorical::new(q)?.sample(rng))
}

/// Mixture sampler: pick a simplex with probability `q_k`, then map a flat
/// Dirichlet draw through its affine map.
#[derive(Clone, Debug)]
pub struct Dbsop<'a> {
    decomposition: &'a Decomposition,
    categorical: Categorical,
}

impl<'a> Dbsop<'a> {
    pub fn new(decomposition: &'a Decomposition) -> Result<Self> {
        Ok(Self {
            decomposition,
            categorical: Categorical::new(decomposition.weights())?,
        })
    }
}

impl Sampler for Dbsop<'_> {
    fn id(&self) -> SamplerId {
        SamplerId::Dbsop
    }

    fn dim(&self) -> usize {
        self.decomposition.dim()
    }

    fn fill(&self, count: usize, rng: &mut RngStream, out: &mut Chunk) -> Result<()> {
        let n = self.dim();
        let simplices = self.decomposition.simplices();
        let mut w = vec![0.0; n];
        let start = out.points.len();
        out.points.resize(start + count * n, 0.0);
        out.simplex_index.reserve(count);
        for dst in out.points[start..].chunks_exact_mut(n) {
            sample_unit_simplex_into(rng, &mut w);
            let k = self.categorical.sample(rng);
            simplices[k].map_into(&w, dst);
            out.simplex_index.push(k as i64);
        }
        out.proposals += count as u64;
        Ok(())
    }
}

/// Hit-and-run random walk with uniform directions and uniform chord steps.
#[derive(Clone, Debug)]
pub struct HitAndRun<'a> {
    polytope: &'a Polytope,
    start: Vec<f64>,
    burn_in: usize,
    thin: usize,
}

impl<'a> HitAndRun<'a> {
    pub fn new(
        polytope: &'a Polytope,
        start: Vec<f64>,
        burn_in: usize,
        thin: usize,
    ) -> Result<Self> {
        if start.len() != polytope.dim() {
            return Err(Error::invalid(
                "start point dimension differs from polytope",
            ));
        }
        if !polytope.contains(&start, 0.0)? {
            return Err(Error::invalid("hit-and-run start point is infeasible"));
        }
        if thin == 0 {
            return Err(Error::invalid("thinning interval must be at least 1"));
        }
        Ok(Self {
            polytope,
            start,
            burn_in,
            thin,
        })
    }

    /// Feasible step range `[t⁻, t⁺]` along `d` from `x`.
    fn chord(&self, x: &[f64], d: &[f64]) -> Result<(f64, f64)> {
        let p = self.polytope;
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..p.num_constraints() {
            let row = p.row(i);
            let ad = dot(row, d);
            let slack = (p.b()[i] - dot(row, x)).max(0.0);
            if ad > 0.0 {
                hi = hi.min(slack / ad);
            } else if ad < 0.0 {
                lo = lo.max(slack / ad);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NotBounded("hit-and-run chord is unbounded".into()));
        }
        if hi - lo < MIN_CHORD {
            return Err(Error::NumericalDegeneracy(format!(
                "hit-and-run chord of length {:e}",
                hi - lo
            )));
        }
        Ok((lo, hi))
    }
}

impl Sampler for HitAndRun<'_> {
    fn id(&self) -> SamplerId {
        SamplerId::HitAndRun
    }

    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn fill(&self, count: usize, rng: &mut RngStream, out: &mut Chunk) -> Result<()> {
        let n = self.dim();
        let mut x = self.start.clone();
        let mut d = vec![0.0; n];
        let steps = self.burn_in + count * self.thin;
        out.points.reserve(count * n);
        for step in 1..=steps {
            let norm = loop {
                d.iter_mut().for_each(|v| *v = rng.std_normal());
                let norm = dot(&d, &d).sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            d.iter_mut().for_each(|v| *v /= norm);
            let (lo, hi) = self.chord(&x, &d)?;
            let t = lo + rng.uniform() * (hi - lo);
            x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += t * di);
            if step > self.burn_in && (step - self.burn_in).is_multiple_of(self.thin) {
                out.points.extend_from_slice(&x);
                out.simplex_index.push(-1);
            }
        }
        out.proposals += count as u64;
        Ok(())
    }
}

/// Uniform proposals in an axis-aligned box, kept when inside the polytope.
#[derive(Clone, Debug)]
pub struct Rejection<'a> {
    polytope: &'a Polytope,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> Rejection<'a> {
    pub fn new(polytope: &'a Polytope, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = polytope.dim();
        if lower.len() != n || upper.len() != n {
            return Err(Error::invalid("box dimension differs from polytope"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !l.is_finite() || !u.is_finite() || l >= u)
        {
            return Err(Error::invalid(
                "box bounds must be finite with lower < upper",
            ));
        }
        Ok(Self {
            polytope,
            lower,
            upper,
        })
    }
}

impl Sampler for Rejection<'_> {
    fn id(&self) -> SamplerId {
        SamplerId::Rejection
    }

    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn fill(&self, count: usize, rng: &mut RngStream, out: &mut Chunk) -> Result<()> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        let mut accepted = 0usize;
        let mut proposals = 0u64;
        out.points.reserve(count * n);
        while accepted < count {
            for (xj, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
                *xj = l + rng.uniform() * (u - l);
            }
            proposals += 1;
            if self.polytope.contains_unchecked(&x, 0.0) {
                out.points.extend_from_slice(&x);
                out.simplex_index.push(-1);
                accepted += 1;
            } else if proposals >= REJECTION_CHECK_AFTER
                && (accepted as f64) < REJECTION_MIN_RATE * proposals as f64
            {
                return Err(Error::TooThin {
                    accepted: accepted as u64,
                    proposals,
                });
            }
        }
        out.proposals += proposals;
        Ok(())
    }
}

fn check_dims(p: &Polytope, n: usize) -> Result<()> {
    if p.dim() != n {
        return Err(Error::invalid(format!(
            "polytope has dimension {}, decomposition {n}",
            p.dim()
        )));
    }
    Ok(())
}

pub fn dbsop_sample(
    p: &Polytope,
    d: &Decomposition,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    check_dims(p, d.dim())?;
    draw(&Dbsop::new(d)?, count, seed)
}

pub fn hit_and_run_sample(
    p: &Polytope,
    count: usize,
    burn_in: usize,
    thin: usize,
    x0: &[f64],
    seed: u64,
) -> Result<SampleBatch> {
    draw(&HitAndRun::new(p, x0.to_vec(), burn_in, thin)?, count, seed)
}

pub fn rejection_sample(
    p: &Polytope,
    bounds: (&[f64], &[f64]),
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    draw(
        &Rejection::new(p, bounds.0.to_vec(), bounds.1.to_vec())?,
        count,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::decompose;

    fn square() -> (Polytope, Decomposition) {
        let p = Polytope::hypercube(2).unwrap();
        let (_, d) = decompose(&p, Execution::Sequential).unwrap();
        (p, d)
    }

    fn triangle() -> (Polytope, Decomposition) {
        let p = Polytope::standard_simplex(2).unwrap();
        let (_, d) = decompose(&p, Execution::Sequential).unwrap();
        (p, d)
    }

    fn mean(xs: impl Iterator<Item = f64>) -> f64 {
        let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
        s / c as f64
    }

    #[test]
    fn unit_simplex_draws() {
        let mut rng = RngStream::new(1);
        let m = mean((0..100_000).map(|_| sample_unit_simplex(&mut rng, 1)[0]));
        assert!((m - 0.5).abs() < 0.005);
        for n in 1..8 {
            for _ in 0..1000 {
                let w = sample_unit_simplex(&mut rng, n);
                assert!(w.iter().all(|&x| x >= 0.0));
                assert!(w.iter().sum::<f64>() <= 1.0);
            }
        }
        // E[w_i] = 1/(n+1), Var = n / ((n+1)^2 (n+2))
        let draws: Vec<Vec<f64>> = (0..100_000)
            .map(|_| sample_unit_simplex(&mut rng, 3))
            .collect();
        let se = (3.0 / (16.0 * 5.0) / 100_000.0_f64).sqrt();
        for i in 0..3 {
            let m = mean(draws.iter().map(|w| w[i]));
            assert!((m - 0.25).abs() < 3.0 * se, "coordinate {i}: {m}");
        }
    }

    #[test]
    fn categorical_draws() {
        let mut rng = RngStream::new(2);
        assert!((0..1000).all(|_| sample_categorical(&mut rng, &[1.0]).unwrap() == 0));
        let cat = Categorical::new(&[0.5, 0.5]).unwrap();
        let zeros = (0..100_000).filter(|_| cat.sample(&mut rng) == 0).count();
        let f = zeros as f64 / 100_000.0;
        assert!((0.49..=0.51).contains(&f));
        assert!(sample_categorical(&mut rng, &[0.5, 0.6]).is_err());
        assert!(sample_categorical(&mut rng, &[1.5, -0.5]).is_err());
        assert!(sample_categorical(&mut rng, &[]).is_err());
    }

    #[test]
    fn dbsop_square_moments() {
        let (p, d) = square();
        let b = dbsop_sample(&p, &d, 100_000, 3).unwrap();
        assert_eq!(b.len(), 100_000);
        assert_eq!(b.containment_fraction(&p, CONTAINMENT_EPS), 1.0);
        for j in 0..2 {
            let m = mean(b.points().map(|x| x[j]));
            assert!((m - 0.5).abs() < 0.005);
        }
        assert!(b.simplex_index().iter().all(|&k| k == 0 || k == 1));
    }

    #[test]
    fn dbsop_triangle_corner_mass() {
        let (p, d) = triangle();
        let b = dbsop_sample(&p, &d, 100_000, 4).unwrap();
        let f = b.points().filter(|x| x[0] + x[1] <= 0.5).count() as f64 / 1e5;
        assert!((f - 0.25).abs() < 0.006, "{f}");
    }

    #[test]
    fn hit_and_run_examples() {
        let (p, _) = square();
        let b = hit_and_run_sample(&p, 100_000, 1000, 5, &[0.5, 0.5], 5).unwrap();
        assert_eq!(b.containment_fraction(&p, CONTAINMENT_EPS), 1.0);
        for j in 0..2 {
            let m = mean(b.points().map(|x| x[j]));
            assert!((m - 0.5).abs() < 0.01, "{m}");
        }
        let (t, _) = triangle();
        let b = hit_and_run_sample(&t, 100_000, 1000, 5, &[1.0 / 3.0, 1.0 / 3.0], 6).unwrap();
        let f = b.points().filter(|x| x[0] + x[1] <= 0.5).count() as f64 / 1e5;
        assert!((f - 0.25).abs() < 0.01, "{f}");
        assert!(b.simplex_index().iter().all(|&k| k == -1));
    }

    #[test]
    fn hit_and_run_rejects_bad_start() {
        let (p, _) = square();
        assert!(matches!(
            hit_and_run_sample(&p, 10, 0, 1, &[2.0, 0.5], 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(hit_and_run_sample(&p, 10, 0, 0, &[0.5, 0.5], 0).is_err());
    }

    #[test]
    fn rejection_rates() {
        let (p, _) = square();
        let b = rejection_sample(&p, (&[0.0, 0.0], &[1.0, 1.0]), 1000, 7).unwrap();
        assert_eq!(b.acceptance_rate(), Some(1.0));
        let (t, _) = triangle();
        let b = rejection_sample(&t, (&[0.0, 0.0], &[1.0, 1.0]), 50_000, 8).unwrap();
        let rate = b.acceptance_rate().unwrap();
        assert!((rate - 0.5).abs() < 0.005, "{rate}");
        let s4 = Polytope::standard_simplex(4).unwrap();
        let b = rejection_sample(&s4, (&[0.0; 4], &[1.0; 4]), 5_000, 9).unwrap();
        let rate = b.acceptance_rate().unwrap();
        let want = 1.0 / 24.0;
        let se = (want * (1.0 - want) / b.proposals() as f64).sqrt();
        assert!((rate - want).abs() < 3.0 * se, "{rate}");
    }

    #[test]
    fn rejection_too_thin() {
        // the triangle lies far outside the proposal box
        let (t, _) = triangle();
        let r = rejection_sample(&t, (&[5.0, 5.0], &[6.0, 6.0]), 1, 0);
        assert!(matches!(r, Err(Error::TooThin { accepted: 0, .. })));
    }

    #[test]
    fn seeds_are_deterministic() {
        let (p, d) = square();
        let a = dbsop_sample(&p, &d, 1000, 11).unwrap();
        let b = dbsop_sample(&p, &d, 1000, 11).unwrap();
        assert_eq!(a, b);
        let c = dbsop_sample(&p, &d, 1000, 12).unwrap();
        assert_ne!(a.coords(), c.coords());
        let dbsop = Dbsop::new(&d).unwrap();
        let s = draw_streams(&dbsop, 1001, 5, 4, Execution::Sequential).unwrap();
        let par = draw_streams(&dbsop, 1001, 5, 4, Execution::Parallel).unwrap();
        assert_eq!(s, par);
        assert_eq!(s.len(), 1001);
    }

    #[test]
    fn sampler_ids_round_trip() {
        for id in SamplerId::ALL {
            assert_eq!(id.as_str().parse::<SamplerId>().unwrap(), id);
        }
        assert!("bench".parse::<SamplerId>().is_err());
    }
}
