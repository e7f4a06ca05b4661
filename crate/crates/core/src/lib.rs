//! Exact search for canonical polyadic decompositions (CPDs) of tensors over
//! prime fields.
//!
//! Given a tensor `T` over GF(p) and a threshold `R`, the search either
//! returns a CPD of rank at most `R` or proves that none exists. The crate is
//! organised bottom-up:
//!
//! - [`gf`]: prime field arithmetic
//! - [`linalg`]: dense matrices, row reduction and factorization streams
//! - [`tensor`]: dense tensors, contraction, unfolding, CPD evaluation
//! - [`preprocess`]: reduction to a concise tensor and lifting back
//! - [`search_general`]: the partial-factor search valid for any number of axes
//! - [`search_3d`]: the factorization-driven search for 3-axis tensors
//! - [`oracle`]: an independent brute-force reference used by the tests
//! - [`instances`]: benchmark tensors, published CPDs, random scrambles
//! - [`cli`]: file formats, orchestration and the command-line front end

pub mod cli;
mod error;
pub mod gf;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod preprocess;
pub mod search_3d;
pub mod search_general;
pub mod tensor;

pub use error::{Error, Result};
pub use gf::{Elem, Field};
pub use linalg::Mat;
pub use search_general::{SearchConfig, SearchOutcome, SearchStats};
pub use tensor::{Cpd, Tensor};
