// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod family;
pub mod quadrature;
pub mod special;
pub mod posterior;
pub mod bounds;
pub mod testing;
pub mod report;
pub mod experiments;
