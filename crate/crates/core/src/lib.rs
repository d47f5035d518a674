//! Lowering of OpenMP target-offload IR into a host module driving a device
//! through the `device` dialect and an extracted device module annotated for
//! high-level synthesis, plus an interpreter that runs both halves together.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod dialects;
pub mod ir;
pub mod pipeline;
pub mod sim;
pub mod transforms;
