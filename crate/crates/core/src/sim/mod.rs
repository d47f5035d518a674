//! Executable semantics for host and device modules.
//!
//! The interpreter walks the IR directly. A simulated device keeps named
//! buffers per memory space with acquire counts, performs DMA copies, and
//! tracks kernels through create → launch → wait. Every device interaction
//! is recorded as a [`TraceEvent`].

mod interp;
mod trace;
mod value;

pub use interp::{
    interpret, reduction_op_name, select_entry, run_reference, ExecMode, Inputs, SimError, SimOptions, SimResult,
};
pub use trace::{buffer_key, check_trace_legality, TraceEvent, TraceKind};
pub use value::{ArrayData, HostArray, HostValue};
