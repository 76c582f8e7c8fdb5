//! Doc-test shims: each chapter of the guide is included verbatim so its
//! code blocks compile and run under `cargo test`. A snippet that drifts
//! from the library API fails here before it misleads a reader.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grids.md")]
pub mod grids {}

#[doc = include_str!("../../../book/src/construction.md")]
pub mod construction {}

#[doc = include_str!("../../../book/src/sbp-identity.md")]
pub mod sbp_identity {}

#[doc = include_str!("../../../book/src/optimization.md")]
pub mod optimization {}

#[doc = include_str!("../../../book/src/wave-tests.md")]
pub mod wave_tests {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
