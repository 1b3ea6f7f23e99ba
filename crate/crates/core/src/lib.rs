//! Quantum-like (QL) bit graphs built from coupled d-regular random graphs.
//!
//! The crate covers the whole pipeline:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | cycles, d-regular random graphs, edge deletion, adjacency matrices, diagonal disorder |
//! | [`qlbit`] | coupling two basis graphs into a QL bit, splitting prediction, emergent pair |
//! | [`product`] | Cartesian products, Kronecker sums, spectrum composition |
//! | [`spectral`] | dense symmetric eigendecomposition, gaps, state classification, ensembles |
//! | [`projection`] | J-vector projection of eigenvectors onto the qubit product basis |
//! | [`experiment`] | declarative experiment descriptors and the artifact runner |
//!
//! Index convention for products: the flat index of a vertex tuple
//! `(i_1, ..., i_N)` is `i_1·(n_2···n_N) + ... + i_N`, first factor slowest.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod product;
pub mod projection;
pub mod qlbit;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, Edge, Graph};
pub use product::{ComposedSpectrum, ProductGraph};
pub use projection::ProjectionReport;
pub use qlbit::{QLBit, SplittingPrediction};
pub use rng::RngSeed;
pub use spectral::{Spectrum, StateLabel};
