//! Command-line driver for the omp2hls pipeline: pass selection, output
//! files, the host-source listing and simulator input/output formats.

pub mod driver;
pub mod host_src;
pub mod trace_io;
pub mod vectors;
