//! QL bits: two basis graphs joined by random coupling edges.
//!
//! The composite graph lists the vertices of `basis_1` first, then those of
//! `basis_2`. Its two emergent states are the in-phase (`a1 + a2`) and
//! out-of-phase (`a1 − a2`) combinations of the basis emergent states, split
//! by roughly `2Δ` with `Δ = n_c / n`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency, AdjacencyMatrix, Edge, Graph};
use crate::rng::RngSeed;
use crate::spectral::{eigendecompose, fix_sign, Spectrum};

/// Relative tolerance under which the top two eigenvalues count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Sign of the coupling-edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingSign {
    Positive,
    Negative,
}

impl CouplingSign {
    pub fn weight(self) -> f64 {
        match self {
            CouplingSign::Positive => 1.0,
            CouplingSign::Negative => -1.0,
        }
    }

    pub fn from_int(s: i64) -> Result<Self> {
        match s {
            1 => Ok(CouplingSign::Positive),
            -1 => Ok(CouplingSign::Negative),
            _ => Err(Error::param(format!("coupling sign must be +1 or -1, got {s}"))),
        }
    }
}

impl Serialize for CouplingSign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.weight() as i64)
    }
}

impl<'de> Deserialize<'de> for CouplingSign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CouplingSign::from_int(i64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A coupling edge from vertex `u` of `basis_1` to vertex `v` of `basis_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEdge(pub usize, pub usize, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QLBit {
    basis_1: Graph,
    basis_2: Graph,
    coupling: Vec<CouplingEdge>,
    sign: CouplingSign,
    #[serde(skip)]
    composite: Graph,
}

#[derive(Deserialize)]
struct QLBitJson {
    basis_1: Graph,
    basis_2: Graph,
    coupling: Vec<CouplingEdge>,
    sign: CouplingSign,
}

impl<'de> Deserialize<'de> for QLBit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = QLBitJson::deserialize(d)?;
        QLBit::from_parts(raw.basis_1, raw.basis_2, raw.coupling, raw.sign).map_err(serde::de::Error::custom)
    }
}

impl QLBit {
    /// Assembles the composite from explicit coupling edges.
    pub fn from_parts(basis_1: Graph, basis_2: Graph, mut coupling: Vec<CouplingEdge>, sign: CouplingSign) -> Result<Self> {
        let n1 = basis_1.n_vertices();
        let n2 = basis_2.n_vertices();
        coupling.sort_by_key(|c| (c.0, c.1));
        for c in &coupling {
            if c.0 >= n1 || c.1 >= n2 {
                return Err(Error::InvalidInput(format!("coupling edge ({}, {}) out of range", c.0, c.1)));
            }
        }
        if let Some(w) = coupling.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidInput(format!("duplicate coupling edge ({}, {})", w[0].0, w[0].1)));
        }
        let edges = basis_1
            .edges()
            .iter()
            .copied()
            .chain(basis_2.edges().iter().map(|e| Edge::new(e.u + n1, e.v + n1, e.weight)))
            .chain(coupling.iter().map(|c| Edge::new(c.0, c.1 + n1, c.2)));
        let composite = Graph::new(n1 + n2, edges)?;
        Ok(Self { basis_1, basis_2, coupling, sign, composite })
    }

    pub fn basis_1(&self) -> &Graph {
        &self.basis_1
    }

    pub fn basis_2(&self) -> &Graph {
        &self.basis_2
    }

    pub fn coupling_edges(&self) -> &[CouplingEdge] {
        &self.coupling
    }

    pub fn sign(&self) -> CouplingSign {
        self.sign
    }

    pub fn composite(&self) -> &Graph {
        &self.composite
    }

    /// Vertex counts of the two blocks.
    pub fn block_sizes(&self) -> (usize, usize) {
        (self.basis_1.n_vertices(), self.basis_2.n_vertices())
    }

    pub fn adjacency(&self) -> AdjacencyMatrix {
        adjacency(&self.composite)
    }

    /// Largest basis degree; sets the random-band edge `2√(d−1)`.
    pub fn basis_degree(&self) -> usize {
        self.basis_1.max_degree().max(self.basis_2.max_degree())
    }

    /// The same QL bit with every coupling weight negated.
    pub fn with_flipped_sign(&self) -> QLBit {
        let sign = match self.sign {
            CouplingSign::Positive => CouplingSign::Negative,
            CouplingSign::Negative => CouplingSign::Positive,
        };
        let coupling = self.coupling.iter().map(|c| CouplingEdge(c.0, c.1, -c.2)).collect();
        QLBit::from_parts(self.basis_1.clone(), self.basis_2.clone(), coupling, sign).expect("same structure")
    }
}

/// Couples every cross pair independently with probability `p`.
pub fn couple(basis_1: &Graph, basis_2: &Graph, p: f64, sign: CouplingSign, seed: RngSeed) -> Result<QLBit> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("coupling probability must lie in [0, 1], got {p}")));
    }
    let mut rng = seed.rng();
    let w = sign.weight();
    let mut coupling = Vec::new();
    for u in 0..basis_1.n_vertices() {
        for v in 0..basis_2.n_vertices() {
            if rng.random_bool(p) {
                coupling.push(CouplingEdge(u, v, w));
            }
        }
    }
    QLBit::from_parts(basis_1.clone(), basis_2.clone(), coupling, sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingPrediction {
    /// Measured largest eigenvalue of `basis_1`.
    pub d_eff: f64,
    /// `n_c / n` with `n = |basis_1|`.
    pub delta: f64,
    pub n_coupling: usize,
    /// `(d_eff + Δ, d_eff − Δ)`.
    pub predicted_pair: (f64, f64),
    /// Set when the basis graphs differ in size; `n = |basis_1|` is used.
    pub unequal_sizes: bool,
}

pub fn predict_splitting(q: &QLBit) -> Result<SplittingPrediction> {
    let (n1, n2) = q.block_sizes();
    let d_eff = eigendecompose(&adjacency(&q.basis_1), false)?.largest();
    let n_coupling = q.coupling.len();
    let delta = n_coupling as f64 / n1 as f64;
    Ok(SplittingPrediction {
        d_eff,
        delta,
        n_coupling,
        predicted_pair: (d_eff + delta, d_eff - delta),
        unequal_sizes: n1 != n2,
    })
}

/// Relative phase of the two block restrictions of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// `a1 + a2`: block means share a sign.
    InPhase,
    /// `a1 − a2`.
    OutOfPhase,
}

impl Phase {
    pub fn sign(self) -> f64 {
        match self {
            Phase::InPhase => 1.0,
            Phase::OutOfPhase => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmergentState {
    pub eigenvalue: f64,
    pub eigenvector: DVector<f64>,
    pub block_means: (f64, f64),
    pub phase: Phase,
}

/// Thresholds deciding whether the emergent pair is isolated from the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolationCriterion {
    /// Minimum `λ1 − λ2`.
    pub min_gap: f64,
    /// Margin above `2√(d−1)` that `λ1` must clear.
    pub band_margin: f64,
}

impl Default for IsolationCriterion {
    fn default() -> Self {
        Self { min_gap: 0.5, band_margin: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsolationReport {
    pub gap_to_band: f64,
    pub band_edge: f64,
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmergentPair {
    pub states: [EmergentState; 2],
    pub isolation: IsolationReport,
    /// True when the pair was degenerate and resolved against block-uniform vectors.
    pub resolved_degenerate: bool,
}

impl EmergentPair {
    pub fn splitting(&self) -> f64 {
        self.states[0].eigenvalue - self.states[1].eigenvalue
    }

    pub fn state(&self, phase: Phase) -> &EmergentState {
        self.states.iter().find(|s| s.phase == phase).unwrap_or(&self.states[0])
    }
}

/// Block-uniform unit vectors `(J_1, J_2)` on the composite vertex space.
pub fn j_vectors(n1: usize, n2: usize) -> (DVector<f64>, DVector<f64>) {
    let mut j1 = DVector::zeros(n1 + n2);
    let mut j2 = DVector::zeros(n1 + n2);
    j1.rows_mut(0, n1).fill(1.0 / (n1 as f64).sqrt());
    j2.rows_mut(n1, n2).fill(1.0 / (n2 as f64).sqrt());
    (j1, j2)
}

fn block_means(v: &DVector<f64>, n1: usize) -> (f64, f64) {
    let n2 = v.len() - n1;
    (v.rows(0, n1).sum() / n1 as f64, v.rows(n1, n2).sum() / n2 as f64)
}

/// Eigendecomposes the composite and extracts its top two states.
pub fn emergent_pair(q: &QLBit) -> Result<EmergentPair> {
    emergent_pair_with(q, &eigendecompose(&q.adjacency(), true)?, IsolationCriterion::default())
}

/// [`emergent_pair`] on a precomputed composite spectrum (which may carry
/// diagonal disorder); degenerate top eigenvectors in `spectrum` are rotated
/// onto the resolved in-/out-of-phase pair.
pub fn emergent_pair_with(q: &QLBit, spectrum: &Spectrum, criterion: IsolationCriterion) -> Result<EmergentPair> {
    let (mut pair, resolved) = top_pair(q, spectrum)?;
    let vals = spectrum.eigenvalues();
    let band_edge = 2.0 * (q.basis_degree().saturating_sub(1) as f64).sqrt();
    let gap_to_band = vals.get(2).map_or(f64::INFINITY, |&l2| vals[1] - l2);
    let degraded = gap_to_band < criterion.min_gap || vals[1] <= band_edge + criterion.band_margin;
    if resolved {
        pair.sort_by_key(|s| s.phase != Phase::InPhase);
    }
    Ok(EmergentPair {
        states: pair,
        isolation: IsolationReport { gap_to_band, band_edge, degraded },
        resolved_degenerate: resolved,
    })
}

/// Same as [`emergent_pair_with`] but also writes any degenerate resolution
/// back into the spectrum, so product eigenvectors use the resolved states.
pub fn resolve_emergent_pair(q: &QLBit, spectrum: &mut Spectrum, criterion: IsolationCriterion) -> Result<EmergentPair> {
    let pair = emergent_pair_with(q, spectrum, criterion)?;
    if pair.resolved_degenerate {
        spectrum.replace_vectors(&[0, 1], &[pair.states[0].eigenvector.clone(), pair.states[1].eigenvector.clone()]);
    }
    Ok(pair)
}

fn top_pair(q: &QLBit, spectrum: &Spectrum) -> Result<([EmergentState; 2], bool)> {
    let (n1, n2) = q.block_sizes();
    let vals = spectrum.eigenvalues();
    if vals.len() != n1 + n2 || vals.len() < 2 {
        return Err(Error::param("spectrum does not match the QL-bit composite"));
    }
    let vecs = spectrum
        .eigenvectors()
        .ok_or_else(|| Error::param("emergent pair needs eigenvectors"))?;
    let tol = DEGENERACY_TOL * vals[0].abs().max(1.0);
    let cluster = vals.iter().take_while(|&&x| vals[0] - x <= tol).count();
    let make = |eigenvalue: f64, v: DVector<f64>| {
        let means = block_means(&v, n1);
        let phase = if means.0 * means.1 >= 0.0 { Phase::InPhase } else { Phase::OutOfPhase };
        EmergentState { eigenvalue, eigenvector: v, block_means: means, phase }
    };
    if cluster < 2 {
        return Ok((
            [
                make(vals[0], vecs.column(0).clone_owned()),
                make(vals[1], vecs.column(1).clone_owned()),
            ],
            false,
        ));
    }
    // Degenerate top eigenspace: project (J1 ± J2)/√2 into it and orthogonalize.
    let basis: DMatrix<f64> = vecs.columns(0, cluster).clone_owned();
    let (j1, j2) = j_vectors(n1, n2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let project = |t: DVector<f64>| &basis * (basis.transpose() * t);
    let mut plus = project((&j1 + &j2) * s);
    let mut minus = project((&j1 - &j2) * s);
    let pn = plus.norm();
    if pn < 1e-12 {
        return Err(Error::NumericalFailure("degenerate emergent pair has no in-phase component".into()));
    }
    plus /= pn;
    minus -= &plus * plus.dot(&minus);
    let mn = minus.norm();
    if mn < 1e-12 {
        return Err(Error::NumericalFailure("degenerate emergent pair has no out-of-phase component".into()));
    }
    minus /= mn;
    fix_sign(&mut plus);
    fix_sign(&mut minus);
    Ok(([make(vals[0], plus), make(vals[1], minus)], true))
}
