//! Projection of QL-bit product eigenvectors onto the qubit product basis.
//!
//! Each QL bit contributes two block-uniform unit vectors: `J_{k,0}` on its
//! first basis graph (state |0⟩) and `J_{k,1}` on its second (state |1⟩).
//! The coefficient of bit string `b_1…b_N` is `⟨v, J_{1,b_1} ⊗ … ⊗ J_{N,b_N}⟩`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::product::MixedRadix;
use crate::qlbit::{emergent_pair, EmergentPair, Phase, QLBit};

/// J vectors of one QL bit on its composite vertex space.
#[derive(Debug, Clone, PartialEq)]
pub struct JBasis {
    pub j0: DVector<f64>,
    pub j1: DVector<f64>,
    pub block_sizes: (usize, usize),
}

impl JBasis {
    pub fn new(q: &QLBit) -> Self {
        let (n1, n2) = q.block_sizes();
        let (j0, j1) = crate::qlbit::j_vectors(n1, n2);
        Self { j0, j1, block_sizes: (n1, n2) }
    }

    fn dim(&self) -> usize {
        self.block_sizes.0 + self.block_sizes.1
    }

    /// Block (0 or 1) holding composite vertex `i`.
    fn block_of(&self, i: usize) -> usize {
        usize::from(i >= self.block_sizes.0)
    }

    fn weight(&self, block: usize) -> f64 {
        let n = if block == 0 { self.block_sizes.0 } else { self.block_sizes.1 };
        1.0 / (n as f64).sqrt()
    }

    /// `(⟨U_1, J_0⟩, ⟨X_2, J_1⟩)` for a composite vector.
    pub fn amplitudes(&self, v: &DVector<f64>) -> (f64, f64) {
        (v.dot(&self.j0), v.dot(&self.j1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub eigenvalue: Option<f64>,
    pub alphas: BTreeMap<String, f64>,
    pub residual: f64,
    #[serde(skip)]
    pub labels: Option<Vec<usize>>,
}

impl ProjectionReport {
    pub fn alpha(&self, bits: &str) -> Option<f64> {
        self.alphas.get(bits).copied()
    }

    /// Σ α².
    pub fn captured_norm_sq(&self) -> f64 {
        self.alphas.values().map(|a| a * a).sum()
    }
}

/// Restrictions of `v` to the two blocks, zero-padded to full length.
pub fn block_split(v: &DVector<f64>, q: &QLBit) -> Result<(DVector<f64>, DVector<f64>)> {
    let (n1, n2) = q.block_sizes();
    if v.len() != n1 + n2 {
        return Err(Error::param(format!("vector of length {} for a QL bit with {} vertices", v.len(), n1 + n2)));
    }
    let mut u = v.clone();
    let mut x = v.clone();
    u.rows_mut(n1, n2).fill(0.0);
    x.rows_mut(0, n1).fill(0.0);
    Ok((u, x))
}

fn bit_string(bits: usize, n: usize) -> String {
    (0..n).map(|k| if (bits >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// α coefficients from per-factor eigenvectors (the product vector is their tensor product).
pub fn project_factored(factor_vectors: &[DVector<f64>], qlbits: &[QLBit]) -> Result<ProjectionReport> {
    if factor_vectors.len() != qlbits.len() || qlbits.is_empty() {
        return Err(Error::param(format!(
            "{} factor eigenvectors for {} QL bits",
            factor_vectors.len(),
            qlbits.len()
        )));
    }
    let mut amps = Vec::with_capacity(qlbits.len());
    let mut norm_sq = 1.0;
    for (v, q) in factor_vectors.iter().zip(qlbits) {
        let (u, x) = block_split(v, q)?;
        let jb = JBasis::new(q);
        amps.push([u.dot(&jb.j0), x.dot(&jb.j1)]);
        norm_sq *= v.norm_squared();
    }
    let n = qlbits.len();
    let mut alphas = BTreeMap::new();
    let mut captured = 0.0;
    for bits in 0..(1usize << n) {
        let a: f64 = (0..n).map(|k| amps[k][(bits >> (n - 1 - k)) & 1]).product();
        captured += a * a;
        alphas.insert(bit_string(bits, n), a);
    }
    Ok(ProjectionReport { eigenvalue: None, alphas, residual: (norm_sq - captured).max(0.0).sqrt(), labels: None })
}

/// α coefficients of an arbitrary vector on the product space, by direct inner
/// products with the J-product vectors. The residual is the norm of what the
/// J-products do not span.
pub fn project_direct(v: &DVector<f64>, qlbits: &[QLBit]) -> Result<ProjectionReport> {
    if qlbits.is_empty() {
        return Err(Error::param("projection needs at least one QL bit"));
    }
    let bases: Vec<JBasis> = qlbits.iter().map(JBasis::new).collect();
    let radix = MixedRadix::new(bases.iter().map(JBasis::dim).collect());
    if v.len() != radix.total() {
        return Err(Error::param(format!("vector of length {} for a product of dimension {}", v.len(), radix.total())));
    }
    let n = bases.len();
    let mut digits = vec![0; n];
    let mut sums = vec![0.0; 1 << n];
    let bits_of = |digits: &[usize]| -> (usize, f64) {
        digits.iter().zip(&bases).fold((0usize, 1.0), |(bits, w), (&i, jb)| {
            let b = jb.block_of(i);
            ((bits << 1) | b, w * jb.weight(b))
        })
    };
    for flat in 0..v.len() {
        radix.decode(flat, &mut digits);
        let (bits, w) = bits_of(&digits);
        sums[bits] += v[flat] * w;
    }
    let mut residual_sq = 0.0;
    for flat in 0..v.len() {
        radix.decode(flat, &mut digits);
        let (bits, w) = bits_of(&digits);
        let r = v[flat] - sums[bits] * w;
        residual_sq += r * r;
    }
    let alphas = sums.iter().enumerate().map(|(b, &a)| (bit_string(b, n), a)).collect();
    Ok(ProjectionReport { eigenvalue: None, alphas, residual: residual_sq.sqrt(), labels: None })
}

/// One product of emergent states in a Bell-state check.
#[derive(Debug, Clone, Serialize)]
pub struct BellCombination {
    pub phase_a: Phase,
    pub phase_b: Phase,
    pub eigenvalue: f64,
    pub alphas: BTreeMap<String, f64>,
    pub residual: f64,
    /// Expected signs on `00, 01, 10, 11`.
    pub expected_signs: [i8; 4],
    pub signs_match: bool,
    /// `max_b ||α_b| − 1/2|`.
    pub magnitude_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellReport {
    pub combinations: Vec<BellCombination>,
    pub all_patterns_match: bool,
    pub max_magnitude_deviation: f64,
    pub warnings: Vec<String>,
}

/// Projects the four products of the two QL bits' emergent states and
/// compares their sign patterns with `(1, s_b, s_a, s_a·s_b)`, up to global sign.
pub fn bell_state_check(qlbit_a: &QLBit, qlbit_b: &QLBit) -> Result<BellReport> {
    let pa = emergent_pair(qlbit_a)?;
    let pb = emergent_pair(qlbit_b)?;
    bell_state_check_with(qlbit_a, &pa, qlbit_b, &pb)
}

pub fn bell_state_check_with(qlbit_a: &QLBit, pa: &EmergentPair, qlbit_b: &QLBit, pb: &EmergentPair) -> Result<BellReport> {
    let mut warnings = Vec::new();
    if pa.isolation.degraded {
        warnings.push(format!("QL bit A: degraded isolation (gap to band {:.4})", pa.isolation.gap_to_band));
    }
    if pb.isolation.degraded {
        warnings.push(format!("QL bit B: degraded isolation (gap to band {:.4})", pb.isolation.gap_to_band));
    }
    let qlbits = [qlbit_a.clone(), qlbit_b.clone()];
    let mut combinations = Vec::with_capacity(4);
    for phase_a in [Phase::InPhase, Phase::OutOfPhase] {
        for phase_b in [Phase::InPhase, Phase::OutOfPhase] {
            let sa = pa.state(phase_a);
            let sb = pb.state(phase_b);
            if sa.phase != phase_a || sb.phase != phase_b {
                warnings.push(format!("no {phase_a:?} state for A or no {phase_b:?} state for B"));
            }
            let report = project_factored(&[sa.eigenvector.clone(), sb.eigenvector.clone()], &qlbits)?;
            let (ya, yb) = (phase_a.sign(), phase_b.sign());
            let expected = [1.0, yb, ya, ya * yb];
            let got: Vec<f64> = ["00", "01", "10", "11"].iter().map(|k| report.alphas[*k]).collect();
            let global = got[0].signum();
            let signs_match = got.iter().zip(&expected).all(|(a, e)| a * global * e > 0.0);
            let magnitude_deviation = got.iter().map(|a| (a.abs() - 0.5).abs()).fold(0.0, f64::max);
            combinations.push(BellCombination {
                phase_a,
                phase_b,
                eigenvalue: sa.eigenvalue + sb.eigenvalue,
                alphas: report.alphas,
                residual: report.residual,
                expected_signs: expected.map(|x| x as i8),
                signs_match,
                magnitude_deviation,
            });
        }
    }
    let all_patterns_match = combinations.iter().all(|c| c.signs_match);
    let max_magnitude_deviation = combinations.iter().map(|c| c.magnitude_deviation).fold(0.0, f64::max);
    Ok(BellReport { combinations, all_patterns_match, max_magnitude_deviation, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{d_regular_random, delete_random_edges, Graph};
    use crate::product::{compose_spectra, tensor_product};
    use crate::qlbit::{couple, CouplingSign};
    use crate::rng::RngSeed;
    use crate::spectral::eigendecompose;
    use proptest::prelude::*;

    fn qlbit(n: usize, d: usize, p: f64, seed: u64) -> QLBit {
        let a = d_regular_random(n, d, RngSeed::new(seed)).unwrap();
        let b = d_regular_random(n, d, RngSeed::new(seed).with_stream(1)).unwrap();
        couple(&a, &b, p, CouplingSign::Positive, RngSeed::new(seed).with_stream(2)).unwrap()
    }

    #[test]
    fn split_of_uniform_vector() {
        let q = qlbit(10, 3, 0.1, 1);
        let v = DVector::from_element(20, 1.0 / 20f64.sqrt());
        let (u, x) = block_split(&v, &q).unwrap();
        assert_eq!(&u + &x, v);
        assert_eq!(u.dot(&x), 0.0);
        assert!((u.norm_squared() - 0.5).abs() < 1e-12);
        assert!((x.norm_squared() - 0.5).abs() < 1e-12);
        assert!(block_split(&DVector::zeros(3), &q).is_err());
    }

    #[test]
    fn localized_uncoupled_vector() {
        let q = qlbit(10, 3, 0.0, 2);
        let s = eigendecompose(&q.adjacency(), true).unwrap();
        // raw solver output on a degenerate pair; any localized combination works
        let mut v = DVector::zeros(20);
        v.rows_mut(0, 10).fill(1.0 / 10f64.sqrt());
        assert!((q.adjacency().entries() * &v - &v * s.largest()).amax() < 1e-9);
        let (_, x) = block_split(&v, &q).unwrap();
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn in_phase_amplitudes_share_sign() {
        let q = qlbit(20, 15, 0.2, 3);
        let pair = emergent_pair(&q).unwrap();
        let jb = JBasis::new(&q);
        let (a0, a1) = jb.amplitudes(&pair.states[0].eigenvector);
        assert!(a0 > 0.0 && a1 > 0.0);
        let (b0, b1) = jb.amplitudes(&pair.states[1].eigenvector);
        assert!(b0 * b1 < 0.0);
        assert_eq!(jb.j0.dot(&jb.j1), 0.0);
        assert!((jb.j0.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_regular_emergent_product() {
        let qa = qlbit(12, 5 + 1, 0.0, 4);
        let qb = qlbit(10, 3, 0.0, 5);
        let mut va = DVector::zeros(24);
        va.rows_mut(0, 12).fill(1.0 / 12f64.sqrt());
        let mut vb = DVector::zeros(20);
        vb.rows_mut(0, 10).fill(1.0 / 10f64.sqrt());
        let r = project_factored(&[va.clone(), vb.clone()], &[qa.clone(), qb.clone()]).unwrap();
        assert!((r.alphas["00"] - 1.0).abs() < 1e-9);
        for k in ["01", "10", "11"] {
            assert!(r.alphas[k].abs() < 1e-9);
        }
        assert!(r.residual < 1e-9);
        let direct = project_direct(&tensor_product(&[va, vb]), &[qa, qb]).unwrap();
        assert!((direct.alphas["00"] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bell_patterns_intact_bases() {
        let qa = qlbit(20, 15, 0.1, 6);
        let qb = qlbit(20, 15, 0.1, 7);
        let r = bell_state_check(&qa, &qb).unwrap();
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        assert!(r.all_patterns_match);
        let patterns: Vec<[i8; 4]> = r.combinations.iter().map(|c| c.expected_signs).collect();
        assert_eq!(patterns, vec![[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]);
    }

    #[test]
    fn bell_exact_when_uncoupled() {
        let qa = qlbit(20, 15, 0.0, 8);
        let qb = qlbit(12, 7 + 1, 0.0, 9);
        let r = bell_state_check(&qa, &qb).unwrap();
        assert!(r.all_patterns_match);
        assert!(r.max_magnitude_deviation < 1e-9);
        for c in &r.combinations {
            assert!(c.residual < 1e-9);
        }
    }

    #[test]
    fn deleted_edge_bases_deviate() {
        let mk = |seed: u64| {
            let a = delete_random_edges(&d_regular_random(12, 8, RngSeed::new(seed)).unwrap(), 4, RngSeed::new(seed).with_stream(1)).unwrap();
            let b = delete_random_edges(&d_regular_random(12, 8, RngSeed::new(seed).with_stream(2)).unwrap(), 4, RngSeed::new(seed).with_stream(3)).unwrap();
            couple(&a, &b, 0.2, CouplingSign::Positive, RngSeed::new(seed).with_stream(4)).unwrap()
        };
        let r = bell_state_check(&mk(10), &mk(11)).unwrap();
        assert!(r.max_magnitude_deviation > 0.0);
        assert!(r.combinations.iter().all(|c| c.residual > 0.0));
    }

    #[test]
    fn product_sign_patterns_via_composition() {
        let qa = qlbit(20, 15, 0.2, 12);
        let qb = qlbit(20, 15, 0.2, 13);
        let pa = emergent_pair(&qa).unwrap();
        let pb = emergent_pair(&qb).unwrap();
        let va = pa.state(Phase::OutOfPhase).eigenvector.clone();
        let vb = pb.state(Phase::InPhase).eigenvector.clone();
        // (a1 − a2) ⊗ (b1 + b2) → (+, +, −, −) up to global sign
        let r = project_direct(&tensor_product(&[va, vb]), &[qa, qb]).unwrap();
        let s = r.alphas["00"].signum();
        assert!(s * r.alphas["01"] > 0.0);
        assert!(s * r.alphas["10"] < 0.0);
        assert!(s * r.alphas["11"] < 0.0);
    }

    #[test]
    fn argument_errors() {
        let q = qlbit(10, 3, 0.1, 14);
        assert!(project_factored(&[], &[]).is_err());
        assert!(project_factored(&[DVector::zeros(20)], &[q.clone(), q.clone()]).is_err());
        assert!(project_direct(&DVector::zeros(7), &[q]).is_err());
        let _ = Graph::new(1, []).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn parseval_and_path_equivalence(seed in any::<u64>(), la in 0usize..20, lb in 0usize..16) {
            let qa = qlbit(10, 3, 0.2, seed);
            let qb = qlbit(8, 3, 0.3, seed ^ 0xabcd);
            let sa = eigendecompose(&qa.adjacency(), true).unwrap();
            let sb = eigendecompose(&qb.adjacency(), true).unwrap();
            let c = compose_spectra(&[sa, sb]).unwrap();
            let labels = [la, lb];
            let v = c.product_eigenvector(&labels).unwrap();
            let direct = project_direct(&v, &[qa.clone(), qb.clone()]).unwrap();
            let factored = project_factored(&c.factor_vectors(&labels).unwrap(), &[qa.clone(), qb.clone()]).unwrap();
            prop_assert!((direct.captured_norm_sq() + direct.residual.powi(2) - v.norm_squared()).abs() < 1e-8);
            for (k, a) in &direct.alphas {
                prop_assert!((a - factored.alphas[k]).abs() < 1e-8);
            }
            prop_assert!((direct.residual - factored.residual).abs() < 1e-6);

            // an arbitrary (non-eigen) vector on the product space
            let mut rng = RngSeed::new(seed).rng();
            use rand::Rng;
            let w = DVector::from_fn(v.len(), |_, _| rng.random_range(-1.0..1.0));
            let r = project_direct(&w, &[qa, qb]).unwrap();
            prop_assert!((r.captured_norm_sq() + r.residual.powi(2) - w.norm_squared()).abs() < 1e-8 * w.norm_squared().max(1.0));
        }
    }
}
