// parameter checks use negated comparisons so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod partition;

pub use error::{Error, Result};
pub use partition::{FrobeniusSet, Partition};
pub mod sampler;
pub use sampler::{SampleBatch, SamplerKind, SeededStream};
pub mod bessel;
pub mod fluctuation;
pub mod kerov;
pub mod limit_shape;
pub mod quadrature;
pub mod stats;
