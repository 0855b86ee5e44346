//! Extreme waiting times in fork-join queues with heavy-tailed, dependent
//! service.
//!
//! `N` servers each take one subtask of every job. The subtask of job `j` at
//! server `i` needs `A_{i,j} B_j` time units, where `B_j` is regularly varying
//! and shared by all servers and `A_{i,j}` is an i.i.d. Weibull-tailed
//! factor. After scaling time and space by `c_N`, the largest of the `N`
//! waiting times approaches the supremum of a Frechet extremal process with
//! linear drift. This crate simulates both sides of that statement and
//! evaluates the limiting laws in closed form.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod exec;
pub mod forkjoin_sim;
pub mod limit_process;
mod numeric;
pub mod rng;
pub mod scaling;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
pub use exec::Exec;
