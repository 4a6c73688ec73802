//! Stateless lossy compression of high-dimensional vectors as low-degree
//! polynomials, with distance computation and linear algebra directly on the
//! compressed records.
//!
//! The pipeline: a vector of length `n` becomes the `m` coefficients of its
//! least-squares polynomial over fixed sample points (`m << n`). Because the
//! basis depends only on the shape of the data, compression needs no
//! dictionary, projection matrix, or dataset statistics — a record plus its
//! header is enough to decompress. Fitting is linear in the input, so sums
//! and scalings of vectors can be carried out on coefficients alone, with
//! per-record residual bounds composed alongside.

pub mod baselines;
pub mod codec;
pub mod fit;
pub mod homomorphic;
pub mod ingest;
mod linalg;
pub mod metric;
mod roots;

pub use fit::{
    build_basis, compress_batch, fit, reconstruct, reconstruct_batch, BasisContext, DomainScaling,
    DomainSpec, FitError, PolyRecord, SolverKind, VectorRecord,
};
