#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod channel;
pub mod diagnostics;
pub mod error;
pub mod metrology;
pub mod opalg;
pub mod scan;
pub mod selftest;
pub mod states;

pub use error::{Error, Result};
