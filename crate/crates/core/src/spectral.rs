//! Dense symmetric eigendecomposition, gap checks, state classification and
//! ensemble histograms.

use std::fmt;

use nalgebra::{DMatrix, DVector, DVectorView, SymmetricEigen};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentDescriptor, SampleSummary};
use crate::graph::AdjacencyMatrix;
use crate::product::ComposedSpectrum;
use crate::rng::RngSeed;

/// Relative symmetry tolerance accepted by [`eigendecompose`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default slack on the Alon-Boppana bound at finite n.
pub const ALON_BOPPANA_SLACK: f64 = 0.5;

/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 200;

/// Eigenvalues in descending order, optionally with aligned orthonormal
/// eigenvectors stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    /// Builds a spectrum from unsorted eigenpairs.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Option<DMatrix<f64>>) -> Result<Self> {
        if let Some(v) = &eigenvectors {
            if v.ncols() != eigenvalues.len() {
                return Err(Error::InvalidInput(format!(
                    "{} eigenvectors for {} eigenvalues",
                    v.ncols(),
                    eigenvalues.len()
                )));
            }
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));
        let values = order.iter().map(|&i| eigenvalues[i]).collect();
        let vectors = eigenvectors.map(|v| {
            let mut out = DMatrix::zeros(v.nrows(), v.ncols());
            for (k, &i) in order.iter().enumerate() {
                let mut col = v.column(i).clone_owned();
                fix_sign(&mut col);
                out.set_column(k, &col);
            }
            out
        });
        Ok(Self { eigenvalues: values, eigenvectors: vectors })
    }

    /// Spectrum from eigenvalues only.
    pub fn from_values(eigenvalues: Vec<f64>) -> Self {
        Self::from_parts(eigenvalues, None).expect("no eigenvectors to mismatch")
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn source_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvectors(&self) -> Option<&DMatrix<f64>> {
        self.eigenvectors.as_ref()
    }

    pub fn has_vectors(&self) -> bool {
        self.eigenvectors.is_some()
    }

    pub fn eigenvector(&self, i: usize) -> Option<DVectorView<'_, f64>> {
        self.eigenvectors.as_ref().filter(|v| i < v.ncols()).map(|v| v.column(i))
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Drops the eigenvectors.
    pub fn values_only(&self) -> Spectrum {
        Spectrum { eigenvalues: self.eigenvalues.clone(), eigenvectors: None }
    }

    /// Replaces the eigenvectors of `indices` by `vectors` (same span expected).
    pub(crate) fn replace_vectors(&mut self, indices: &[usize], vectors: &[DVector<f64>]) {
        if let Some(m) = &mut self.eigenvectors {
            for (&i, v) in indices.iter().zip(vectors) {
                m.set_column(i, v);
            }
        }
    }
}

/// Largest-magnitude component made positive; the earliest index wins ties.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.len() > 0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Full spectrum of a symmetric adjacency matrix.
pub fn eigendecompose(a: &AdjacencyMatrix, want_vectors: bool) -> Result<Spectrum> {
    eigendecompose_matrix(a.entries(), want_vectors)
}

pub fn eigendecompose_matrix(m: &DMatrix<f64>, want_vectors: bool) -> Result<Spectrum> {
    let n = m.nrows();
    if n == 0 || !m.is_square() {
        return Err(Error::InvalidInput(format!("cannot decompose a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix asymmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    if want_vectors {
        let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::NumericalFailure(format!("symmetric eigensolver on {n}x{n} matrix did not converge")))?;
        Spectrum::from_parts(eig.eigenvalues.iter().copied().collect(), Some(eig.eigenvectors))
    } else {
        let values = m.clone().symmetric_eigenvalues();
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure(format!("non-finite eigenvalue for {n}x{n} matrix")));
        }
        Ok(Spectrum::from_values(values.iter().copied().collect()))
    }
}

/// `λ0 − λ1`.
pub fn spectral_gap(s: &Spectrum) -> Result<f64> {
    match s.eigenvalues() {
        [a, b, ..] => Ok(a - b),
        _ => Err(Error::param("spectral gap needs at least two eigenvalues")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlonBoppanaReport {
    pub bound: f64,
    pub lambda_1: f64,
    pub slack: f64,
    pub satisfied: bool,
}

pub fn alon_boppana_check(s: &Spectrum, d: usize) -> AlonBoppanaReport {
    alon_boppana_check_with_slack(s, d, ALON_BOPPANA_SLACK)
}

/// Compares λ1 with `2√(d−1)`; report only.
pub fn alon_boppana_check_with_slack(s: &Spectrum, d: usize, slack: f64) -> AlonBoppanaReport {
    let bound = 2.0 * (d.saturating_sub(1) as f64).sqrt();
    let lambda_1 = s.eigenvalues().get(1).copied().unwrap_or(f64::NEG_INFINITY);
    AlonBoppanaReport { bound, lambda_1, slack, satisfied: lambda_1 <= bound + slack }
}

/// Provenance of a composed eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    Emergent,
    /// `k` of the factor components are emergent, `0 < k < N`.
    Hybrid(usize),
    Random,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Emergent => f.write_str("emergent"),
            StateLabel::Hybrid(k) => write!(f, "hybrid({k})"),
            StateLabel::Random => f.write_str("random"),
        }
    }
}

impl Serialize for StateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Labels every composed eigenvalue by how many of its factor components are
/// declared emergent.
pub fn classify_states(c: &ComposedSpectrum, factor_emergent_indices: &[Vec<usize>]) -> Result<Vec<StateLabel>> {
    let n = c.n_factors();
    if factor_emergent_indices.len() != n {
        return Err(Error::param(format!(
            "{} emergent index sets for {n} factors",
            factor_emergent_indices.len()
        )));
    }
    for (k, set) in factor_emergent_indices.iter().enumerate() {
        let dim = c.factor_dims()[k];
        if let Some(&bad) = set.iter().find(|&&i| i >= dim) {
            return Err(Error::param(format!("emergent index {bad} out of range for factor {k} of size {dim}")));
        }
    }
    Ok(c.iter()
        .map(|e| {
            let k = e
                .labels
                .iter()
                .zip(factor_emergent_indices)
                .filter(|(l, set)| set.contains(l))
                .count();
            match k {
                0 => StateLabel::Random,
                k if k == n => StateLabel::Emergent,
                k => StateLabel::Hybrid(k),
            }
        })
        .collect())
}

/// Eigenvalue histogram aggregated over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: usize,
    pub dim_per_sample: usize,
    pub parameters: ExperimentDescriptor,
}

impl EnsembleHistogram {
    /// Uniform bins over `[min − 0.5, max + 0.5]`.
    pub fn from_values(values: &[f64], bins: usize, n_samples: usize, parameters: ExperimentDescriptor) -> Result<Self> {
        if bins == 0 {
            return Err(Error::param("histogram needs at least one bin"));
        }
        if values.is_empty() {
            return Err(Error::param("histogram needs at least one value"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 0.5;
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 0.5;
        let width = (hi - lo) / bins as f64;
        let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(Self { bin_edges, counts, n_samples, dim_per_sample: values.len() / n_samples.max(1), parameters })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Rows `bin_left,bin_right,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", self.bin_edges[i], self.bin_edges[i + 1], c));
        }
        out
    }

    /// Count of eigenvalues falling in `[lo, hi)` by bin centre.
    pub fn count_between(&self, lo: f64, hi: f64) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let c = 0.5 * (self.bin_edges[*i] + self.bin_edges[*i + 1]);
                c >= lo && c < hi
            })
            .map(|(_, c)| c)
            .sum()
    }
}

/// Histogram plus per-sample summaries of an ensemble run.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub histogram: EnsembleHistogram,
    pub samples: Vec<SampleSummary>,
    pub sample_seeds: Vec<u64>,
}

/// Seed of sample `index` under `master_seed`.
pub fn sample_seed(master_seed: RngSeed, index: usize) -> RngSeed {
    master_seed.derive(index as u64)
}

/// Repeats the descriptor's pipeline `n_samples` times and bins every eigenvalue.
pub fn ensemble_spectrum(
    descriptor: &ExperimentDescriptor,
    n_samples: usize,
    bins: usize,
    master_seed: RngSeed,
) -> Result<EnsembleHistogram> {
    Ok(run_ensemble(descriptor, n_samples, bins, master_seed)?.histogram)
}

pub fn run_ensemble(
    descriptor: &ExperimentDescriptor,
    n_samples: usize,
    bins: usize,
    master_seed: RngSeed,
) -> Result<EnsembleRun> {
    if n_samples == 0 {
        return Err(Error::param("ensemble needs at least one sample"));
    }
    descriptor.validate()?;
    let results: Vec<Result<(Vec<f64>, SampleSummary)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let sample = experiment::realize_sample(descriptor, sample_seed(master_seed, i))
                .map_err(|e| Error::Sample { index: i, source: Box::new(e) })?;
            let values = sample.composed.values();
            Ok((values, sample.summary()))
        })
        .collect();
    let mut all = Vec::new();
    let mut samples = Vec::with_capacity(n_samples);
    for r in results {
        let (values, summary) = r?;
        all.extend(values);
        samples.push(summary);
    }
    let histogram = EnsembleHistogram::from_values(&all, bins, n_samples, descriptor.clone())?;
    let sample_seeds = (0..n_samples).map(|i| sample_seed(master_seed, i).seed).collect();
    Ok(EnsembleRun { histogram, samples, sample_seeds })
}
