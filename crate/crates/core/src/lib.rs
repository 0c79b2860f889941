//! Exact arithmetic for weight-0 weak Jacobi forms: truncated q-series, the
//! generators of the weight-0 ring, polar-term statistics, the coefficient sums
//! `f_{a,b}(n, l)` and their growth, and theta quotients.

pub mod arith;
pub mod cache;
pub mod cli;
pub mod error;
pub mod exactla;
pub mod forms;
mod ntt;
pub mod polarity;
pub mod qseries;
pub mod slowgrowth;
pub mod thetaquot;

pub use error::{Error, Result};
