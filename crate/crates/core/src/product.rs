//! Cartesian products of graphs.
//!
//! Products can be built explicitly (edge construction or Kronecker sum of
//! adjacencies) or, for spectra, composed from the factor spectra: the
//! eigenvalues of `G□H` are all sums `λ_i + μ_j` with eigenvectors `X_i ⊗ Y_j`.
//! All paths share the mixed-radix vertex convention of [`MixedRadix`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, Edge, Graph};
use crate::spectral::{Spectrum, StateLabel};

/// Default cap on the dimension of an explicitly built product.
pub const DEFAULT_SIZE_CAP: usize = 100_000;

/// Flat index ↔ per-factor tuple, first factor slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadix {
    dims: Vec<usize>,
}

impl MixedRadix {
    pub fn new(dims: Vec<usize>) -> Self {
        Self { dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for k in (0..self.dims.len()).rev() {
            out[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
    }
}

/// An explicitly constructed Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph {
    factors: Vec<Graph>,
    composite: Graph,
}

impl ProductGraph {
    pub fn factors(&self) -> &[Graph] {
        &self.factors
    }

    pub fn composite(&self) -> &Graph {
        &self.composite
    }

    pub fn index_map(&self) -> MixedRadix {
        MixedRadix::new(self.factors.iter().map(Graph::n_vertices).collect())
    }

    pub fn into_composite(self) -> Graph {
        self.composite
    }
}

/// `G□H`: `(u,x)~(v,y)` when `u~v, x=y` or `x~y, u=v`.
pub fn cartesian_product(g: &Graph, h: &Graph) -> ProductGraph {
    let composite = product_edges(g, h);
    ProductGraph { factors: vec![g.clone(), h.clone()], composite }
}

/// Left-associated product of all `factors`.
pub fn cartesian_product_all(factors: &[Graph]) -> Result<ProductGraph> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::param("product of no factors"))?;
    let composite = rest.iter().fold(first.clone(), |acc, h| product_edges(&acc, h));
    Ok(ProductGraph { factors: factors.to_vec(), composite })
}

fn product_edges(g: &Graph, h: &Graph) -> Graph {
    let (ng, nh) = (g.n_vertices(), h.n_vertices());
    let idx = |u: usize, x: usize| u * nh + x;
    let mut edges = Vec::with_capacity(g.n_edges() * nh + ng * h.n_edges());
    for e in g.edges() {
        for x in 0..nh {
            edges.push(Edge::new(idx(e.u, x), idx(e.v, x), e.weight));
        }
    }
    for e in h.edges() {
        for u in 0..ng {
            edges.push(Edge::new(idx(u, e.u), idx(u, e.v), e.weight));
        }
    }
    Graph::new(ng * nh, edges).expect("product of valid graphs is valid")
}

/// `A_G ⊗ I_{|H|} + I_{|G|} ⊗ A_H`, capped at [`DEFAULT_SIZE_CAP`].
pub fn kronecker_sum_adjacency(a_g: &AdjacencyMatrix, a_h: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
    kronecker_sum_adjacency_with_cap(a_g, a_h, DEFAULT_SIZE_CAP)
}

pub fn kronecker_sum_adjacency_with_cap(a_g: &AdjacencyMatrix, a_h: &AdjacencyMatrix, cap: usize) -> Result<AdjacencyMatrix> {
    let (ng, nh) = (a_g.dim(), a_h.dim());
    let dim = ng.checked_mul(nh).unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::SizeCap { dim, cap });
    }
    let (g, h) = (a_g.entries(), a_h.entries());
    let mut m = DMatrix::zeros(dim, dim);
    for u in 0..ng {
        for v in 0..ng {
            let w = g[(u, v)];
            if w != 0.0 {
                for x in 0..nh {
                    m[(u * nh + x, v * nh + x)] += w;
                }
            }
        }
    }
    for x in 0..nh {
        for y in 0..nh {
            let w = h[(x, y)];
            if w != 0.0 {
                for u in 0..ng {
                    m[(u * nh + x, u * nh + y)] += w;
                }
            }
        }
    }
    let disorder = match (a_g.diagonal_disorder(), a_h.diagonal_disorder()) {
        (None, None) => None,
        _ => Some(m.diagonal().iter().copied().collect()),
    };
    Ok(AdjacencyMatrix::from_parts(m, disorder))
}

/// One composed eigenvalue with the factor eigen-indices it sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedEigenvalue {
    pub value: f64,
    pub labels: Vec<usize>,
}

/// Spectrum of a product assembled from factor spectra, sorted descending
/// (ties broken by label tuple). Labels are kept as flat mixed-radix indices.
#[derive(Debug, Clone)]
pub struct ComposedSpectrum {
    values: Vec<f64>,
    flat: Vec<usize>,
    radix: MixedRadix,
    factors: Vec<Spectrum>,
}

/// All `∏ n_k` label tuples with their eigenvalue sums; never forms a product matrix.
pub fn compose_spectra(factor_spectra: &[Spectrum]) -> Result<ComposedSpectrum> {
    if factor_spectra.is_empty() {
        return Err(Error::param("compose_spectra needs at least one factor"));
    }
    let radix = MixedRadix::new(factor_spectra.iter().map(Spectrum::source_dim).collect());
    let total = radix.total();
    let mut sums = Vec::with_capacity(total);
    let mut digits = vec![0; factor_spectra.len()];
    for flat in 0..total {
        radix.decode(flat, &mut digits);
        let value = digits
            .iter()
            .zip(factor_spectra)
            .fold(0.0, |acc, (&i, s)| acc + s.eigenvalues()[i]);
        sums.push(value);
    }
    // flat order is lexicographic in the labels, so a stable sort breaks ties by label
    let mut flat: Vec<usize> = (0..total).collect();
    flat.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]));
    let values = flat.iter().map(|&i| sums[i]).collect();
    Ok(ComposedSpectrum { values, flat, radix, factors: factor_spectra.to_vec() })
}

impl ComposedSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.radix.dims().to_vec()
    }

    pub fn factors(&self) -> &[Spectrum] {
        &self.factors
    }

    /// Sorted eigenvalues.
    pub fn value_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn labels_at(&self, i: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factors.len()];
        self.radix.decode(self.flat[i], &mut digits);
        digits
    }

    pub fn get(&self, i: usize) -> ComposedEigenvalue {
        ComposedEigenvalue { value: self.values[i], labels: self.labels_at(i) }
    }

    pub fn iter(&self) -> impl Iterator<Item = ComposedEigenvalue> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Eigenvalue with the given factor labels.
    pub fn value_of(&self, labels: &[usize]) -> Result<f64> {
        self.check_labels(labels)?;
        Ok(labels.iter().zip(&self.factors).fold(0.0, |acc, (&i, s)| acc + s.eigenvalues()[i]))
    }

    fn check_labels(&self, labels: &[usize]) -> Result<()> {
        if labels.len() != self.factors.len() {
            return Err(Error::param(format!("{} labels for {} factors", labels.len(), self.factors.len())));
        }
        for (k, (&i, s)) in labels.iter().zip(&self.factors).enumerate() {
            if i >= s.source_dim() {
                return Err(Error::param(format!("label {i} out of range for factor {k} of size {}", s.source_dim())));
            }
        }
        Ok(())
    }

    /// Factor eigenvectors selected by `labels`.
    pub fn factor_vectors(&self, labels: &[usize]) -> Result<Vec<DVector<f64>>> {
        self.check_labels(labels)?;
        labels
            .iter()
            .zip(&self.factors)
            .enumerate()
            .map(|(k, (&i, s))| {
                s.eigenvector(i)
                    .map(|v| v.clone_owned())
                    .ok_or_else(|| Error::param(format!("factor {k} has no eigenvectors")))
            })
            .collect()
    }

    /// `⊗_k X^{(k)}_{labels_k}` under the product index convention.
    pub fn product_eigenvector(&self, labels: &[usize]) -> Result<DVector<f64>> {
        Ok(tensor_product(&self.factor_vectors(labels)?))
    }

    /// Rows `value,label_1,...,label_N,n_emergent_factors`.
    pub fn to_csv(&self, factor_emergent_indices: &[Vec<usize>]) -> String {
        let n = self.factors.len();
        let mut out = String::from("value");
        for k in 1..=n {
            out.push_str(&format!(",label_{k}"));
        }
        out.push_str(",n_emergent_factors\n");
        for e in self.iter() {
            out.push_str(&e.value.to_string());
            for l in &e.labels {
                out.push_str(&format!(",{l}"));
            }
            let k = e
                .labels
                .iter()
                .zip(factor_emergent_indices)
                .filter(|(l, set)| set.contains(l))
                .count();
            out.push_str(&format!(",{k}\n"));
        }
        out
    }

    /// Rows `index,eigenvalue,label`.
    pub fn spectrum_csv(&self, labels: &[StateLabel]) -> String {
        let mut out = String::from("index,eigenvalue,label\n");
        for (i, (v, l)) in self.values.iter().zip(labels).enumerate() {
            out.push_str(&format!("{i},{v},{l}\n"));
        }
        out
    }
}

/// Kronecker product of vectors, first factor slowest.
pub fn tensor_product(vectors: &[DVector<f64>]) -> DVector<f64> {
    vectors.iter().fold(DVector::from_element(1, 1.0), |acc, v| acc.kronecker(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{adjacency, apply_diagonal_disorder, complete_graph, cycle_graph, d_regular_random};
    use crate::rng::RngSeed;
    use crate::spectral::{eigendecompose, eigendecompose_matrix};
    use proptest::prelude::*;

    fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Brute-force oracle: every pair sum, computed independently of compose_spectra.
    fn pairwise_sums(a: &[f64], b: &[f64]) -> Vec<f64> {
        sorted_desc(a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect())
    }

    #[test]
    fn k2_square_is_c4() {
        let k2 = complete_graph(2).unwrap();
        let p = cartesian_product(&k2, &k2);
        assert_eq!(p.composite().n_vertices(), 4);
        assert_eq!(p.composite().n_edges(), 4);
        assert_eq!(p.composite().regular_degree(), Some(2));
        let s = eigendecompose(&adjacency(p.composite()), false).unwrap();
        for (x, y) in s.eigenvalues().iter().zip([2.0, 0.0, 0.0, -2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn c5_square_sizes() {
        let c5 = cycle_graph(5).unwrap();
        let p = cartesian_product(&c5, &c5);
        assert_eq!(p.composite().n_vertices(), 25);
        assert_eq!(p.composite().n_edges(), 5 * 5 + 5 * 5);
        let s = eigendecompose(&adjacency(p.composite()), false).unwrap();
        assert!((s.largest() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn kronecker_sum_matches_explicit() {
        let c5 = cycle_graph(5).unwrap();
        let a = adjacency(&c5);
        let ks = kronecker_sum_adjacency(&a, &a).unwrap();
        assert_eq!(ks, adjacency(cartesian_product(&c5, &c5).composite()));

        let one = adjacency(&complete_graph(1).unwrap());
        assert_eq!(kronecker_sum_adjacency(&one, &a).unwrap().entries(), a.entries());
        assert_eq!(kronecker_sum_adjacency(&a, &one).unwrap().entries(), a.entries());
    }

    #[test]
    fn size_cap() {
        let a = adjacency(&cycle_graph(10).unwrap());
        assert!(matches!(
            kronecker_sum_adjacency_with_cap(&a, &a, 99),
            Err(Error::SizeCap { dim: 100, cap: 99 })
        ));
    }

    #[test]
    fn disordered_kronecker_sum_spectrum() {
        let g = apply_diagonal_disorder(&adjacency(&d_regular_random(10, 3, RngSeed::new(1)).unwrap()), 2.0, RngSeed::new(2)).unwrap();
        let h = apply_diagonal_disorder(&adjacency(&cycle_graph(7).unwrap()), 1.0, RngSeed::new(3)).unwrap();
        let ks = kronecker_sum_adjacency(&g, &h).unwrap();
        assert!(ks.diagonal_disorder().is_some());
        let sg = eigendecompose(&g, false).unwrap();
        let sh = eigendecompose(&h, false).unwrap();
        let explicit = eigendecompose(&ks, false).unwrap();
        for (x, y) in explicit.eigenvalues().iter().zip(pairwise_sums(sg.eigenvalues(), sh.eigenvalues())) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn composition_basics() {
        assert!(compose_spectra(&[]).is_err());
        let c5 = eigendecompose(&adjacency(&cycle_graph(5).unwrap()), true).unwrap();
        let single = compose_spectra(std::slice::from_ref(&c5)).unwrap();
        assert_eq!(single.values(), c5.eigenvalues());
        let c = compose_spectra(&[c5.clone(), c5.clone()]).unwrap();
        assert_eq!(c.len(), 25);
        for e in c.iter() {
            assert_eq!(e.value, c5.eigenvalues()[e.labels[0]] + c5.eigenvalues()[e.labels[1]]);
        }
        assert!((c.get(0).value - c.get(1).value - 1.381966).abs() < 1e-6);
        assert!(c.product_eigenvector(&[5, 0]).is_err());
        let values_only = compose_spectra(&[c5.values_only(), c5]).unwrap();
        assert!(values_only.product_eigenvector(&[0, 0]).is_err());
    }

    #[test]
    fn product_eigenvectors() {
        let g = d_regular_random(12, 4, RngSeed::new(8)).unwrap();
        let h = d_regular_random(10, 3, RngSeed::new(9)).unwrap();
        let sg = eigendecompose(&adjacency(&g), true).unwrap();
        let sh = eigendecompose(&adjacency(&h), true).unwrap();
        let c = compose_spectra(&[sg, sh]).unwrap();
        let uniform = c.product_eigenvector(&[0, 0]).unwrap();
        let u = 1.0 / 120f64.sqrt();
        assert!(uniform.iter().all(|x| (x - u).abs() < 1e-9));

        let a = adjacency(cartesian_product(&g, &h).composite());
        for labels in [[3, 7], [11, 0], [5, 5], [0, 9]] {
            let v = c.product_eigenvector(&labels).unwrap();
            let lam = c.value_of(&labels).unwrap();
            assert!((a.entries() * &v - &v * lam).amax() < 1e-8);
            assert!((v.norm() - 1.0).abs() < 1e-10);
        }
        let v1 = c.product_eigenvector(&[3, 7]).unwrap();
        let v2 = c.product_eigenvector(&[3, 6]).unwrap();
        assert!(v1.dot(&v2).abs() < 1e-8);
    }

    #[test]
    fn connectivity_follows_factors() {
        let c4 = cycle_graph(4).unwrap();
        let split = Graph::new(4, [Edge::unit(0, 1), Edge::unit(2, 3)]).unwrap();
        assert!(cartesian_product(&c4, &c4).composite().is_connected());
        assert!(!cartesian_product(&c4, &split).composite().is_connected());
        assert!(!cartesian_product(&split, &c4).composite().is_connected());
    }

    #[test]
    fn mixed_radix_round_trip() {
        let r = MixedRadix::new(vec![3, 4, 5]);
        let mut digits = [0; 3];
        for flat in 0..r.total() {
            r.decode(flat, &mut digits);
            assert_eq!(r.encode(&digits), flat);
        }
        r.decode(1 * 20 + 2 * 5 + 3, &mut digits);
        assert_eq!(digits, [1, 2, 3]);
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (2usize..8, any::<u64>()).prop_map(|(n, seed)| {
            // random simple graph with roughly half the pairs present
            use rand::Rng;
            let mut rng = RngSeed::new(seed).rng();
            let edges: Vec<Edge> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .filter(|_| rng.random_bool(0.5))
                .map(|(u, v)| Edge::unit(u, v))
                .collect();
            Graph::new(n, edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn explicit_matches_composed(g in small_graph(), h in small_graph()) {
            let p = cartesian_product(&g, &h);
            let e = p.composite().n_edges();
            prop_assert_eq!(e, g.n_edges() * h.n_vertices() + g.n_vertices() * h.n_edges());
            prop_assert_eq!(p.composite().is_connected(), g.is_connected() && h.is_connected());
            let explicit = eigendecompose(&adjacency(p.composite()), false).unwrap();
            let sg = eigendecompose(&adjacency(&g), false).unwrap();
            let sh = eigendecompose(&adjacency(&h), false).unwrap();
            let composed = compose_spectra(&[sg, sh]).unwrap();
            for (x, y) in explicit.eigenvalues().iter().zip(composed.values()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }

        #[test]
        fn associativity(g in small_graph(), h in small_graph(), k in small_graph()) {
            let left = cartesian_product(cartesian_product(&g, &h).composite(), &k);
            let right = cartesian_product(&g, cartesian_product(&h, &k).composite());
            prop_assert_eq!(left.composite(), right.composite());
            let all = cartesian_product_all(&[g, h, k]).unwrap();
            prop_assert_eq!(all.composite(), left.composite());
            let a = eigendecompose_matrix(adjacency(left.composite()).entries(), false).unwrap();
            let b = eigendecompose_matrix(adjacency(right.composite()).entries(), false).unwrap();
            for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
                prop_assert!((x - y).abs() < 1e-8);
            }
        }
    }
}
