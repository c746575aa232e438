//! Fractional Hermite–Hadamard toolkit.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod fracint;
pub mod invexity;
pub mod verify;
pub mod explorer;
pub mod report;

/// Seed used when a run does not supply one: the bytes of `"HH"` followed by `2012`.
pub const DEFAULT_SEED: u64 = 0x4848_2012;
