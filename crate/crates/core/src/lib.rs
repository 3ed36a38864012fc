//! Multi-user point function sharing over finite fields.
//!
//! A master holds one point function per user and stores linear shares of all
//! of them on `N` servers. User `k` reads only the servers in its access set
//! `A_k`; it can evaluate its own function at any point, and the shares it
//! sees reveal nothing about any other user's function.
//!
//! - [`field`]: `GF(q^m)` arithmetic.
//! - [`linalg`]: elimination, nullspaces and Vandermonde inverses.
//! - [`pointfn`]: point functions and their vector embedding.
//! - [`dmuss`]: the per-coordinate secret sharing layer.
//! - [`protocol`]: placement, demand, evaluation and retrieval.
//! - [`analysis`]: rate bounds and exhaustive correctness/privacy checks.

pub mod analysis;
pub mod dmuss;
pub mod error;
pub mod field;
pub mod linalg;
pub mod pointfn;
pub mod protocol;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement};
