//! Basis graphs and their adjacency matrices.
//!
//! A [`Graph`] is a vertex count plus a canonical (sorted, `u < v`) list of
//! weighted undirected edges. [`AdjacencyMatrix`] is its dense symmetric
//! realization, optionally with diagonal ("frequency") disorder.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Restart budget for [`d_regular_random`].
pub const MAX_RESTARTS: usize = 10_000;

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Self { u, v, weight }
    }

    pub fn unit(a: usize, b: usize) -> Self {
        Self::new(a, b, 1.0)
    }
}

// JSON form: [u, v] for unit weight, [u, v, w] otherwise.
impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let unit = self.weight == 1.0;
        let mut seq = s.serialize_seq(Some(if unit { 2 } else { 3 }))?;
        seq.serialize_element(&self.u)?;
        seq.serialize_element(&self.v)?;
        if !unit {
            seq.serialize_element(&self.weight)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct EdgeVisitor;
        impl<'de> Visitor<'de> for EdgeVisitor {
            type Value = Edge;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an edge [u, v] or [u, v, weight]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Edge, A::Error> {
                let u: usize = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let v: usize = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                let w: Option<f64> = seq.next_element()?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(4, &self));
                }
                Ok(Edge::new(u, v, w.unwrap_or(1.0)))
            }
        }
        d.deserialize_seq(EdgeVisitor)
    }
}

/// Simple undirected weighted graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Graph {
    #[serde(rename = "n")]
    n_vertices: usize,
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex_labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<Edge>,
    #[serde(default)]
    vertex_labels: Option<Vec<String>>,
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        let g = Graph::new(raw.n, raw.edges).map_err(de::Error::custom)?;
        match raw.vertex_labels {
            Some(labels) => g.with_labels(labels).map_err(de::Error::custom),
            None => Ok(g),
        }
    }
}

impl Graph {
    /// Validates and canonicalizes the edge list.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::param("graph must have at least one vertex"));
        }
        let mut edges: Vec<Edge> = edges.into_iter().map(|e| Edge::new(e.u, e.v, e.weight)).collect();
        for e in &edges {
            if e.u == e.v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {}", e.u)));
            }
            if e.v >= n_vertices {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    e.u, e.v, n_vertices
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::InvalidInput(format!("edge ({}, {}) has non-finite weight", e.u, e.v)));
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(w) = edges.windows(2).find(|w| (w[0].u, w[0].v) == (w[1].u, w[1].v)) {
            return Err(Error::InvalidInput(format!("duplicate edge ({}, {})", w[0].u, w[0].v)));
        }
        Ok(Self { n_vertices, edges, vertex_labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_vertices {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n_vertices
            )));
        }
        self.vertex_labels = Some(labels);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_labels(&self) -> Option<&[String]> {
        self.vertex_labels.as_deref()
    }

    /// Unweighted degree of each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let deg = self.degrees();
        let d = deg[0];
        deg.iter().all(|&x| x == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n_vertices);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        uf.components() == 1
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search_by_key(&(u, v), |e| (e.u, e.v)).is_ok()
    }

    /// Unit-weight complement.
    pub fn complement(&self) -> Graph {
        let n = self.n_vertices;
        let mut edges = Vec::with_capacity(n * (n - 1) / 2 - self.edges.len());
        for u in 0..n {
            for v in (u + 1)..n {
                if !self.has_edge(u, v) {
                    edges.push(Edge::unit(u, v));
                }
            }
        }
        Graph { n_vertices: n, edges, vertex_labels: None }
    }

    /// Recovers the edge set from the nonzero off-diagonal entries.
    pub fn from_adjacency(a: &AdjacencyMatrix) -> Result<Graph> {
        let m = a.entries();
        let mut edges = Vec::new();
        for i in 0..a.dim() {
            for j in (i + 1)..a.dim() {
                if m[(i, j)] != 0.0 {
                    edges.push(Edge::new(i, j, m[(i, j)]));
                }
            }
        }
        Graph::new(a.dim(), edges)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    pub(crate) fn components(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Dense symmetric realization of a [`Graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: DMatrix<f64>,
    diagonal_disorder: Option<Vec<f64>>,
}

impl AdjacencyMatrix {
    /// Wraps a matrix after checking it is square and exactly symmetric.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "adjacency must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidInput(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let diag: Vec<f64> = entries.diagonal().iter().copied().collect();
        let diagonal_disorder = diag.iter().any(|&x| x != 0.0).then_some(diag);
        Ok(Self { entries, diagonal_disorder })
    }

    pub(crate) fn from_parts(entries: DMatrix<f64>, diagonal_disorder: Option<Vec<f64>>) -> Self {
        Self { entries, diagonal_disorder }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn diagonal_disorder(&self) -> Option<&[f64]> {
        self.diagonal_disorder.as_deref()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }
}

/// The n-cycle `C_n`.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::param(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::new(n, (0..n).map(|i| Edge::unit(i, (i + 1) % n)))
}

/// The complete graph `K_n`.
pub fn complete_graph(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("complete graph needs n >= 1"));
    }
    Graph::new(n, (0..n).flat_map(|u| ((u + 1)..n).map(move |v| Edge::unit(u, v))))
}

/// Random simple d-regular graph on `n` vertices.
///
/// Points of the configuration model are paired one at a time, rejecting
/// pairs that would create a loop or a repeated edge; a dead end restarts the
/// pairing. Dense requests (`d > (n-1)/2`) sample the sparser complement.
pub fn d_regular_random(n: usize, d: usize, seed: RngSeed) -> Result<Graph> {
    if n == 0 || d == 0 {
        return Err(Error::param(format!("need n >= 1 and d >= 1, got n={n}, d={d}")));
    }
    if n <= d {
        return Err(Error::param(format!("need n > d, got n={n}, d={d}")));
    }
    if (n * d) % 2 != 0 {
        return Err(Error::param(format!("n·d must be even, got n={n}, d={d}")));
    }
    let comp = n - 1 - d;
    if comp < d {
        let sparse = if comp == 0 {
            Graph::new(n, std::iter::empty())?
        } else {
            pairing_model(n, comp, seed)?
        };
        return Ok(sparse.complement());
    }
    pairing_model(n, d, seed)
}

fn pairing_model(n: usize, d: usize, seed: RngSeed) -> Result<Graph> {
    let mut rng = seed.rng();
    let mut points: Vec<usize> = Vec::with_capacity(n * d);
    let mut adj: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    'restart: for _ in 0..MAX_RESTARTS {
        points.clear();
        points.extend((0..n).flat_map(|v| std::iter::repeat_n(v, d)));
        points.shuffle(&mut rng);
        adj.clear();
        while let Some(a) = points.pop() {
            let key = |b: usize| if a < b { (a, b) } else { (b, a) };
            let ok = |b: usize| b != a && !adj.contains(&key(b));
            let mut chosen = None;
            for _ in 0..32 {
                let i = rng.random_range(0..points.len());
                if ok(points[i]) {
                    chosen = Some(i);
                    break;
                }
            }
            if chosen.is_none() {
                let suitable: Vec<usize> = (0..points.len()).filter(|&i| ok(points[i])).collect();
                if suitable.is_empty() {
                    continue 'restart;
                }
                chosen = Some(suitable[rng.random_range(0..suitable.len())]);
            }
            let b = points.swap_remove(chosen.unwrap_or_default());
            adj.insert(key(b));
        }
        return Graph::new(n, adj.iter().map(|&(u, v)| Edge::unit(u, v)));
    }
    Err(Error::GenerationFailure {
        retries: MAX_RESTARTS,
        reason: format!("no simple {d}-regular pairing found on {n} vertices"),
    })
}

/// Copy of `g` with `count` distinct edges removed uniformly at random.
pub fn delete_random_edges(g: &Graph, count: usize, seed: RngSeed) -> Result<Graph> {
    if count > g.n_edges() {
        return Err(Error::param(format!(
            "cannot delete {count} edges from a graph with {}",
            g.n_edges()
        )));
    }
    if count == 0 {
        return Ok(g.clone());
    }
    let mut rng = seed.rng();
    let removed: HashSet<usize> = rand::seq::index::sample(&mut rng, g.n_edges(), count).into_iter().collect();
    let edges = g
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, e)| *e);
    let mut out = Graph::new(g.n_vertices, edges)?;
    out.vertex_labels = g.vertex_labels.clone();
    Ok(out)
}

pub fn adjacency(g: &Graph) -> AdjacencyMatrix {
    let n = g.n_vertices();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.u, e.v)] = e.weight;
        m[(e.v, e.u)] = e.weight;
    }
    AdjacencyMatrix { entries: m, diagonal_disorder: None }
}

/// Adds independent N(0, sigma²) draws to the diagonal.
pub fn apply_diagonal_disorder(a: &AdjacencyMatrix, sigma: f64, seed: RngSeed) -> Result<AdjacencyMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("disorder sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(a.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = seed.rng();
    let mut m = a.entries.clone();
    let mut disorder = a.diagonal_disorder.clone().unwrap_or_else(|| vec![0.0; a.dim()]);
    for (i, slot) in disorder.iter_mut().enumerate() {
        let x = normal.sample(&mut rng);
        m[(i, i)] += x;
        *slot = m[(i, i)];
    }
    Ok(AdjacencyMatrix { entries: m, diagonal_disorder: Some(disorder) })
}
