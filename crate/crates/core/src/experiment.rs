//! Declarative experiment descriptors and the artifact runner.
//!
//! A descriptor fixes the whole generation pipeline (basis graphs, edge
//! deletions, coupling, product, disorder) plus ensemble size and master
//! seed. [`run`] renders every artifact in memory and then moves the files
//! into the output directory, so a failed run leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency, apply_diagonal_disorder, complete_graph, cycle_graph, d_regular_random, delete_random_edges, AdjacencyMatrix, Graph};
use crate::product::{compose_spectra, ComposedSpectrum};
use crate::projection::{project_factored, ProjectionReport};
use crate::qlbit::{couple, predict_splitting, resolve_emergent_pair, CouplingSign, EmergentPair, IsolationCriterion, QLBit, SplittingPrediction};
use crate::rng::{stream, RngSeed};
use crate::spectral::{self, classify_states, eigendecompose, run_ensemble, sample_seed, spectral_gap, Spectrum, StateLabel};

/// Largest composed spectrum a descriptor may request.
pub const MAX_COMPOSED_DIM: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    SingleGraph,
    DRegularProduct,
    QlbitProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasisSpec {
    Cycle { n: usize },
    Complete { n: usize },
    DRegular {
        n: usize,
        d: usize,
        #[serde(default)]
        deletions: usize,
    },
}

impl BasisSpec {
    pub fn n_vertices(&self) -> usize {
        match *self {
            BasisSpec::Cycle { n } | BasisSpec::Complete { n } | BasisSpec::DRegular { n, .. } => n,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BasisSpec::Cycle { n } if n < 3 => Err(Error::param(format!("cycle needs n >= 3, got {n}"))),
            BasisSpec::Complete { n } if n == 0 => Err(Error::param("complete graph needs n >= 1")),
            BasisSpec::DRegular { n, d, deletions } => {
                if d == 0 || n <= d {
                    return Err(Error::param(format!("d-regular basis needs 1 <= d < n, got n={n}, d={d}")));
                }
                if (n * d) % 2 != 0 {
                    return Err(Error::param(format!("n·d must be even, got n={n}, d={d}")));
                }
                if deletions > n * d / 2 {
                    return Err(Error::param(format!("cannot delete {deletions} of {} edges", n * d / 2)));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn realize(&self, seed: RngSeed, graph_stream: u64, delete_stream: u64, factor: usize) -> Result<Graph> {
        match *self {
            BasisSpec::Cycle { n } => cycle_graph(n),
            BasisSpec::Complete { n } => complete_graph(n),
            BasisSpec::DRegular { n, d, deletions } => {
                let g = d_regular_random(n, d, seed.for_factor(factor, graph_stream))?;
                delete_random_edges(&g, deletions, seed.for_factor(factor, delete_stream))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub p: f64,
    #[serde(default = "positive")]
    pub sign: CouplingSign,
}

fn positive() -> CouplingSign {
    CouplingSign::Positive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub basis: BasisSpec,
    /// Present for QL-bit factors: a second basis graph of the same kind is coupled in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSpec>,
}

impl FactorSpec {
    pub fn dim(&self) -> usize {
        let n = self.basis.n_vertices();
        if self.coupling.is_some() {
            2 * n
        } else {
            n
        }
    }
}

fn default_bins() -> usize {
    spectral::DEFAULT_BINS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDescriptor {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub pipeline: Pipeline,
    pub factors: Vec<FactorSpec>,
    /// Every factor reuses factor 0's random draw.
    #[serde(default)]
    pub identical_factors: bool,
    /// Diagonal disorder applied to each factor adjacency.
    #[serde(default)]
    pub sigma: f64,
    pub n_samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentDescriptor {
    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn composed_dim(&self) -> usize {
        self.factors.iter().map(FactorSpec::dim).fold(1usize, |a, d| a.saturating_mul(d))
    }

    /// Checks every module precondition before anything is computed.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::param(format!("invalid experiment name {:?}", self.name)));
        }
        if self.factors.is_empty() {
            return Err(Error::param("descriptor lists no factors"));
        }
        match self.pipeline {
            Pipeline::SingleGraph if self.factors.len() != 1 => {
                return Err(Error::param("single-graph pipeline takes exactly one factor"));
            }
            Pipeline::DRegularProduct if self.factors.len() < 2 => {
                return Err(Error::param("d-regular-product pipeline needs at least two factors"));
            }
            _ => {}
        }
        for (k, f) in self.factors.iter().enumerate() {
            f.basis.validate().map_err(|e| Error::param(format!("factor {k}: {e}")))?;
            match (self.pipeline, &f.coupling) {
                (Pipeline::QlbitProduct, None) => {
                    return Err(Error::param(format!("factor {k}: qlbit-product factors need a coupling")));
                }
                (Pipeline::QlbitProduct, Some(c)) if !(0.0..=1.0).contains(&c.p) => {
                    return Err(Error::param(format!("factor {k}: coupling probability {} outside [0, 1]", c.p)));
                }
                (Pipeline::SingleGraph | Pipeline::DRegularProduct, Some(_)) => {
                    return Err(Error::param(format!("factor {k}: coupling only allowed in qlbit-product")));
                }
                _ => {}
            }
        }
        if self.identical_factors && self.factors.iter().any(|f| f != &self.factors[0]) {
            return Err(Error::param("identical_factors requires all factor specs to be equal"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::param(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.n_samples == 0 {
            return Err(Error::param("n_samples must be at least 1"));
        }
        if self.bins == 0 {
            return Err(Error::param("bins must be at least 1"));
        }
        let dim = self.composed_dim();
        if dim > MAX_COMPOSED_DIM {
            return Err(Error::SizeCap { dim, cap: MAX_COMPOSED_DIM });
        }
        Ok(())
    }
}

/// Names of the bundled descriptors, one per reproduced figure.
pub const BUNDLED: [&str; 10] = ["fig2a", "fig2b", "fig2c", "fig3", "fig4a", "fig4b", "fig4c", "fig4d", "fig4e", "fig4f"];

fn bundled_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2a" => include_str!("../experiments/fig2a.json"),
        "fig2b" => include_str!("../experiments/fig2b.json"),
        "fig2c" => include_str!("../experiments/fig2c.json"),
        "fig3" => include_str!("../experiments/fig3.json"),
        "fig4a" => include_str!("../experiments/fig4a.json"),
        "fig4b" => include_str!("../experiments/fig4b.json"),
        "fig4c" => include_str!("../experiments/fig4c.json"),
        "fig4d" => include_str!("../experiments/fig4d.json"),
        "fig4e" => include_str!("../experiments/fig4e.json"),
        "fig4f" => include_str!("../experiments/fig4f.json"),
        _ => return None,
    })
}

pub fn bundled(name: &str) -> Option<ExperimentDescriptor> {
    bundled_json(name).map(|s| ExperimentDescriptor::from_json(s).expect("bundled descriptors are valid"))
}

/// One realized factor of a sample.
#[derive(Debug, Clone)]
pub enum FactorGraph {
    Basis(Graph),
    QLBit(QLBit),
}

#[derive(Debug, Clone)]
pub struct FactorRealization {
    pub graph: FactorGraph,
    pub adjacency: AdjacencyMatrix,
    pub spectrum: Spectrum,
    pub emergent_indices: Vec<usize>,
    pub prediction: Option<SplittingPrediction>,
    pub emergent_pair: Option<EmergentPair>,
}

/// Everything one pass of the pipeline produces.
#[derive(Debug, Clone)]
pub struct Sample {
    pub seed: RngSeed,
    pub factors: Vec<FactorRealization>,
    pub composed: ComposedSpectrum,
    pub labels: Vec<StateLabel>,
}

fn realize_factor(spec: &FactorSpec, sigma: f64, seed: RngSeed, k: usize) -> Result<FactorRealization> {
    let basis_1 = spec.basis.realize(seed, stream::GRAPH, stream::DELETE, k)?;
    let graph = match &spec.coupling {
        None => FactorGraph::Basis(basis_1),
        Some(c) => {
            let basis_2 = spec.basis.realize(seed, stream::GRAPH_2, stream::DELETE_2, k)?;
            FactorGraph::QLBit(couple(&basis_1, &basis_2, c.p, c.sign, seed.for_factor(k, stream::COUPLE))?)
        }
    };
    let clean = match &graph {
        FactorGraph::Basis(g) => adjacency(g),
        FactorGraph::QLBit(q) => q.adjacency(),
    };
    let adjacency = apply_diagonal_disorder(&clean, sigma, seed.for_factor(k, stream::DISORDER))?;
    let mut spectrum = eigendecompose(&adjacency, true)?;
    let (emergent_indices, prediction, emergent_pair) = match &graph {
        FactorGraph::Basis(_) => (vec![0], None, None),
        FactorGraph::QLBit(q) => {
            let pair = resolve_emergent_pair(q, &mut spectrum, IsolationCriterion::default())?;
            (vec![0, 1], Some(predict_splitting(q)?), Some(pair))
        }
    };
    Ok(FactorRealization { graph, adjacency, spectrum, emergent_indices, prediction, emergent_pair })
}

/// Runs the generation pipeline once under `seed`.
pub fn realize_sample(desc: &ExperimentDescriptor, seed: RngSeed) -> Result<Sample> {
    let mut factors: Vec<FactorRealization> = Vec::with_capacity(desc.factors.len());
    for (k, spec) in desc.factors.iter().enumerate() {
        let f = if desc.identical_factors && k > 0 {
            factors[0].clone()
        } else {
            realize_factor(spec, desc.sigma, seed, k)?
        };
        factors.push(f);
    }
    let spectra: Vec<Spectrum> = factors.iter().map(|f| f.spectrum.clone()).collect();
    let composed = compose_spectra(&spectra)?;
    let emergent: Vec<Vec<usize>> = factors.iter().map(|f| f.emergent_indices.clone()).collect();
    let labels = classify_states(&composed, &emergent)?;
    Ok(Sample { seed, factors, composed, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmergentValue {
    pub labels: Vec<usize>,
    pub value: f64,
    /// `Σ_k d_k ± Δ_k` for QL-bit products (`+` for label 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSummary {
    pub dim: usize,
    pub largest: f64,
    pub gap: f64,
    pub connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<SplittingPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degraded_isolation: Option<bool>,
}

/// Per-sample numbers kept by ensemble runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub seed: u64,
    pub top_eigenvalues: Vec<f64>,
    pub gap: f64,
    pub emergent: Vec<EmergentValue>,
    pub factors: Vec<FactorSummary>,
}

impl Sample {
    pub fn emergent_indices(&self) -> Vec<Vec<usize>> {
        self.factors.iter().map(|f| f.emergent_indices.clone()).collect()
    }

    pub fn qlbits(&self) -> Option<Vec<QLBit>> {
        self.factors
            .iter()
            .map(|f| match &f.graph {
                FactorGraph::QLBit(q) => Some(q.clone()),
                FactorGraph::Basis(_) => None,
            })
            .collect()
    }

    /// All-emergent composed eigenvalues in spectrum order.
    pub fn emergent_values(&self) -> Vec<EmergentValue> {
        self.composed
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| **l == StateLabel::Emergent)
            .map(|(e, _)| {
                let predicted = self
                    .factors
                    .iter()
                    .zip(&e.labels)
                    .map(|(f, &l)| f.prediction.map(|p| if l == 0 { p.predicted_pair.0 } else { p.predicted_pair.1 }))
                    .sum::<Option<f64>>();
                EmergentValue { labels: e.labels.clone(), value: e.value, predicted }
            })
            .collect()
    }

    pub fn summary(&self) -> SampleSummary {
        let values = self.composed.value_slice();
        SampleSummary {
            seed: self.seed.seed,
            top_eigenvalues: values.iter().take(4).copied().collect(),
            gap: if values.len() > 1 { values[0] - values[1] } else { 0.0 },
            emergent: self.emergent_values(),
            factors: self
                .factors
                .iter()
                .map(|f| FactorSummary {
                    dim: f.spectrum.source_dim(),
                    largest: f.spectrum.largest(),
                    gap: spectral_gap(&f.spectrum).unwrap_or(0.0),
                    connected: match &f.graph {
                        FactorGraph::Basis(g) => g.is_connected(),
                        FactorGraph::QLBit(q) => q.composite().is_connected(),
                    },
                    prediction: f.prediction,
                    degraded_isolation: f.emergent_pair.as_ref().map(|p| p.isolation.degraded),
                })
                .collect(),
        }
    }

    /// Projection reports of every all-emergent state (QL-bit products only).
    pub fn projections(&self) -> Result<Vec<ProjectionReport>> {
        let Some(qlbits) = self.qlbits() else {
            return Ok(Vec::new());
        };
        self.emergent_values()
            .into_iter()
            .map(|ev| {
                let vectors = self.composed.factor_vectors(&ev.labels)?;
                let mut r = project_factored(&vectors, &qlbits)?;
                r.eigenvalue = Some(ev.value);
                r.labels = Some(ev.labels);
                Ok(r)
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
struct HistogramMetadata<'a> {
    descriptor: &'a ExperimentDescriptor,
    master_seed: u64,
    n_samples: usize,
    bins: usize,
    dim_per_sample: usize,
    total_count: u64,
    sample_seeds: &'a [u64],
}

/// File name → contents, in write order.
pub type Artifacts = Vec<(String, Vec<u8>)>;

/// Computes every artifact of `desc` in memory.
pub fn render(desc: &ExperimentDescriptor) -> Result<Artifacts> {
    desc.validate()?;
    let master = RngSeed::new(desc.master_seed);
    let first = realize_sample(desc, sample_seed(master, 0))?;
    let ensemble = run_ensemble(desc, desc.n_samples, desc.bins, master)?;
    let emergent = first.emergent_indices();

    let mut out: Artifacts = Vec::new();
    out.push(("spectrum.csv".into(), first.composed.spectrum_csv(&first.labels).into_bytes()));
    out.push(("composed_spectrum.csv".into(), first.composed.to_csv(&emergent).into_bytes()));
    out.push(("histogram.csv".into(), ensemble.histogram.to_csv().into_bytes()));
    let meta = HistogramMetadata {
        descriptor: desc,
        master_seed: desc.master_seed,
        n_samples: desc.n_samples,
        bins: desc.bins,
        dim_per_sample: ensemble.histogram.dim_per_sample,
        total_count: ensemble.histogram.total(),
        sample_seeds: &ensemble.sample_seeds,
    };
    out.push(("histogram.json".into(), pretty(&meta)?));
    out.push(("samples.json".into(), pretty(&ensemble.samples)?));
    let factor_json: Vec<serde_json::Value> = first
        .factors
        .iter()
        .map(|f| match &f.graph {
            FactorGraph::Basis(g) => serde_json::to_value(g),
            FactorGraph::QLBit(q) => serde_json::to_value(q),
        })
        .collect::<std::result::Result<_, _>>()?;
    out.push(("factors.json".into(), pretty(&factor_json)?));
    if desc.pipeline == Pipeline::QlbitProduct {
        out.push(("projection.json".into(), pretty(&first.projections()?)?));
    }
    Ok(out)
}

fn pretty<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Renders `desc` and writes its artifacts into `out_dir`. Files are staged in
/// a temporary directory inside `out_dir` and renamed only once all succeed.
pub fn run(desc: &ExperimentDescriptor, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let artifacts = render(desc)?;
    fs::create_dir_all(out_dir)?;
    let staging = tempfile::Builder::new().prefix(".qlgraph-staging-").tempdir_in(out_dir)?;
    for (name, bytes) in &artifacts {
        fs::write(staging.path().join(name), bytes)?;
    }
    let mut written = Vec::with_capacity(artifacts.len());
    for (name, _) in &artifacts {
        let dest = out_dir.join(name);
        fs::rename(staging.path().join(name), &dest)?;
        written.push(dest);
    }
    Ok(written)
}
