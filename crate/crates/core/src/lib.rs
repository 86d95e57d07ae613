//! Desk-scale numerical engine for linear-attention video diffusion.
//!
//! The crate implements the full inference-side machinery of a
//! linear-attention video DiT in plain Rust, small enough to verify
//! exhaustively against brute-force oracles:
//!
//! - ReLU linear attention with 3D rotary position embeddings applied after
//!   the kernel feature map, and a rotation-free denominator that keeps the
//!   normalizer strictly positive ([`attention`]).
//! - Causal linear attention as a recurrence over a constant-size state,
//!   giving an O(D^2) KV cache that never grows with sequence length
//!   ([`causal`]).
//! - A toy linear DiT with a gated Mix-FFN and a causal temporal
//!   convolution shortcut, runnable full-sequence or block-by-block against
//!   the cache ([`model`]).
//! - Rectified-flow scheduling, a logit-normal timestep sampler, and the
//!   monotonically increasing per-block schedule used for block
//!   autoregressive training ([`sched`]).
//! - Block-autoregressive diffusion inference with per-block cache commits
//!   and full observability traces ([`engine`]).
//! - Instrumented complexity benchmarks comparing causal full, local, and
//!   linear attention ([`bench`]), plus a self-contained oracle runner
//!   ([`oracle`]).
//!
//! Everything on the correctness path is double precision with pinned
//! accumulation order, so test expectations are bit-reproducible.

pub mod attention;
pub mod bench;
pub mod causal;
pub mod engine;
mod error;
pub mod flops;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod rope;
pub mod sched;
pub mod stats;
pub mod tape;
pub mod tensor;

pub use error::{Error, Result};
pub use rng::Rng;
pub use tensor::Tensor;
