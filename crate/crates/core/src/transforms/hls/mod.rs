//! Device-side lowering: OpenMP loop annotations to `hls` structure, then
//! `hls` ops to plain calls.

mod calls;
mod canonicalize;
mod loops;
mod ports;
mod reduction;
mod unroll;

pub use calls::lower_hls_to_calls;
pub use canonicalize::{check_unroll_dependencies, forward_stores, AccessForm};
pub use loops::{lower_omp_loops_to_hls, HlsOptions, LoopParts};
pub use ports::{assign_ports, PortAssignment};
pub use reduction::{apply_reduction_split, identity, ReductionPlan};
pub use unroll::{apply_unroll, UnrollPlan};
