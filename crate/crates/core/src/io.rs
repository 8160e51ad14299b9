//! File formats: polytopes and decompositions as JSON, samples as CSV.
//!
//! Polytope JSON is either `{"n": 2, "A": [[...], ...], "b": [...]}` (H-rep)
//! or `{"n": 2, "vertices": [[...], ...]}` (V-rep). Sample CSV has header
//! `x1,...,xn,simplex_index`; floats are written in Rust's shortest
//! round-trip form, so reading a file back reproduces every bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polytope, Simplex};
use crate::sampler::{SampleBatch, SamplerId};
use crate::triangulation::Decomposition;
use crate::vertex::VertexSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolytopeFile {
    H {
        n: usize,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    V {
        n: usize,
        vertices: Vec<Vec<f64>>,
    },
}

impl PolytopeFile {
    pub fn from_polytope(p: &Polytope) -> Self {
        Self::H {
            n: p.dim(),
            a: (0..p.num_constraints())
                .map(|i| p.row(i).to_vec())
                .collect(),
            b: p.b().to_vec(),
        }
    }

    pub fn from_vertices(v: &VertexSet) -> Self {
        Self::V {
            n: v.dim(),
            vertices: v.vertices().iter().map(|p| p.to_vec()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::H { n, .. } | Self::V { n, .. } => *n,
        }
    }

    /// The H-representation; V-rep files are rejected since this crate does
    /// not convert vertices to facets.
    pub fn to_polytope(&self) -> Result<Polytope> {
        match self {
            Self::H { n, a, b } => {
                if let Some(row) = a.iter().find(|r| r.len() != *n) {
                    return Err(Error::invalid(format!(
                        "constraint row of length {} in a file declaring n = {n}",
                        row.len()
                    )));
                }
                Polytope::from_rows(a, b.clone())
            }
            Self::V { .. } => Err(Error::invalid(
                "this operation needs an H-representation ({\"n\", \"A\", \"b\"}), got a vertex list",
            )),
        }
    }

    pub fn to_vertex_set(&self) -> Result<VertexSet> {
        match self {
            Self::V { n, vertices } => {
                let pts = vertices
                    .iter()
                    .map(|v| Point::new(v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                VertexSet::from_points(*n, pts, crate::vertex::DEDUP_RTOL)
            }
            Self::H { .. } => Err(Error::invalid(
                "file holds an H-representation, not vertices",
            )),
        }
    }
}

pub fn read_polytope_file<R: Read>(r: R) -> Result<PolytopeFile> {
    Ok(serde_json::from_reader(r)?)
}

pub fn write_polytope_file<W: Write>(w: W, f: &PolytopeFile) -> Result<()> {
    serde_json::to_writer_pretty(w, f)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub vertex_indices: Vec<usize>,
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub n: usize,
    pub total_volume: f64,
    pub dropped: usize,
    pub simplices: Vec<SimplexRecord>,
}

impl DecompositionFile {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        let simplices = d
            .simplices()
            .iter()
            .zip(d.vertex_indices())
            .zip(d.volumes().iter().zip(d.weights()))
            .map(|((s, idx), (&volume, &weight))| SimplexRecord {
                vertex_indices: idx.clone(),
                vertices: s.vertices().iter().map(|v| v.to_vec()).collect(),
                volume,
                weight,
            })
            .collect();
        Self {
            n: d.dim(),
            total_volume: d.total_volume(),
            dropped: d.dropped(),
            simplices,
        }
    }

    /// Rebuild the decomposition; volumes and weights are recomputed.
    pub fn to_decomposition(&self) -> Result<Decomposition> {
        let simplices = self
            .simplices
            .iter()
            .map(|s| Simplex::from_coords(&s.vertices))
            .collect::<Result<Vec<_>>>()?;
        let indices = self
            .simplices
            .iter()
            .map(|s| s.vertex_indices.clone())
            .collect();
        Decomposition::from_simplices(simplices, indices, self.dropped)
    }
}

pub fn read_decomposition<R: Read>(r: R) -> Result<Decomposition> {
    let f: DecompositionFile = serde_json::from_reader(r)?;
    f.to_decomposition()
}

pub fn write_decomposition<W: Write>(w: W, d: &Decomposition) -> Result<()> {
    serde_json::to_writer_pretty(w, &DecompositionFile::from_decomposition(d))?;
    Ok(())
}

/// Points and provenance read back from a sample CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTable {
    pub n: usize,
    pub points: Vec<f64>,
    pub simplex_index: Vec<i64>,
}

impl SampleTable {
    pub fn into_batch(self, seed: u64, sampler: SamplerId) -> Result<SampleBatch> {
        SampleBatch::new(self.n, self.points, self.simplex_index, seed, sampler)
    }
}

pub fn write_samples_csv<W: Write>(w: W, batch: &SampleBatch) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=batch.dim()).map(|j| format!("x{j}")).collect();
    header.push("simplex_index".into());
    out.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(batch.dim() + 1);
    for (x, k) in batch.points().zip(batch.simplex_index()) {
        record.clear();
        record.extend(x.iter().map(|v| v.to_string()));
        record.push(k.to_string());
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<SampleTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let n = headers.len().saturating_sub(1);
    let well_formed = n > 0
        && headers.get(n) == Some("simplex_index")
        && (0..n).all(|j| headers.get(j) == Some(format!("x{}", j + 1).as_str()));
    if !well_formed {
        return Err(Error::invalid(format!(
            "unexpected sample header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut points = Vec::new();
    let mut simplex_index = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        for j in 0..n {
            let v: f64 = rec[j]
                .parse()
                .map_err(|_| Error::invalid(format!("bad coordinate {:?}", &rec[j])))?;
            points.push(v);
        }
        let k: i64 = rec[n]
            .parse()
            .map_err(|_| Error::invalid(format!("bad simplex index {:?}", &rec[n])))?;
        simplex_index.push(k);
    }
    Ok(SampleTable {
        n,
        points,
        simplex_index,
    })
}
