//! Scaled traveling-wave physics-informed networks for reaction-diffusion.

pub mod baseline;
pub mod checkpoint;
pub mod equations;
pub mod error;
pub mod gtw;
pub mod harness;
pub mod math;
pub mod pipeline;
pub mod reference;
pub mod training;
pub mod wavenet;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/general-ic.md")]
    mod general_ic {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
