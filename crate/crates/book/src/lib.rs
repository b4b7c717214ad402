//! The guide's chapters, included so their code samples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/wavelets.md")]
pub mod wavelets {}

#[doc = include_str!("../../../book/src/masking.md")]
pub mod masking {}

#[doc = include_str!("../../../book/src/aggregation.md")]
pub mod aggregation {}

#[doc = include_str!("../../../book/src/amplitude_bound.md")]
pub mod amplitude_bound {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
