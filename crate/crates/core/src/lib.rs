//! # foldgft-core
//!
//! Irregularity-aware graph Fourier transforms built on the spectral-folding
//! inner product, and the closed-form bandlimited interpolator they enable.
//!
//! Given a weighted graph with combinatorial Laplacian `L` and a vertex
//! partition `S ∪ Sᶜ`, the transform solves the generalized eigenproblem
//! `L u = λ Q u` with `Q = blockdiag(L_SS, L_ScSc)`. With this choice the
//! spectrum folds about 1: `(u, λ)` is an eigenpair iff `(J u, 2 − λ)` is,
//! where `J` negates the entries on `Sᶜ`. Signals bandlimited to the
//! eigenvalues below 1 can then be interpolated from their samples on `S`
//! without any matrix inverse:
//!
//! ```text
//! y = 2 · U_VR · U_SRᵀ · Q_S · x_S
//! ```
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`linalg`] | Dense row-major matrix, Jacobi SVD, pseudo-inverse solves |
//! | [`graph`] | Graphs, KNN construction, Laplacian, partitions |
//! | [`spectral`] | Cholesky, symmetric and generalized-symmetric eigensolvers |
//! | [`gft`] | The spectral-folding `(L, Q)` transform |
//! | [`interp`] | Closed-form interpolation, least-squares baselines, oracle |
//! | [`sensor`] | Sensor fields, test signals, noise, sampling sets, SNR |
//! | [`seed`] | Deterministic seed derivation for Monte Carlo trials |
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! get `std::error::Error` for [`Error`] through the standard library.
//!
//! ## Quick start
//!
//! ```
//! use foldgft_core::graph::{build_knn_graph, VertexPartition};
//! use foldgft_core::gft::SpectralFoldingGft;
//! use foldgft_core::interp::{interpolate_sf, SampledSignal};
//!
//! let points = [[0.0, 0.0], [0.3, 0.0], [0.6, 0.1], [0.2, 0.4], [0.7, 0.6]];
//! let graph = build_knn_graph(&points, 2, 0.3).unwrap();
//! let partition = VertexPartition::new(5, vec![0, 4]).unwrap();
//! let gft = SpectralFoldingGft::build(&graph, &partition).unwrap();
//!
//! let samples = SampledSignal::new(partition, vec![1.5, 1.5]).unwrap();
//! let y = interpolate_sf(&gft, &samples).unwrap();
//! assert!(y.iter().all(|v| (v - 1.5).abs() < 1e-9));
//! ```

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

mod error;
mod math;

pub mod gft;
pub mod graph;
pub mod interp;
pub mod linalg;
pub mod seed;
pub mod sensor;
pub mod spectral;

pub use error::{Block, Error, Result};
pub use linalg::Matrix;
