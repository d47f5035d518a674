//! Module-to-module rewrites, in pipeline order.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ir::{Attribute, Operation, Type, ValueId, ValueTable};

mod data_mapping;
pub mod hls;
mod presence;
mod split;
mod target;

pub use data_mapping::{lower_mapped_data, plan_transfers, EntryAction, ExitAction, TransferPlan};
pub use presence::materialize_presence_counters;
pub use split::{split_modules, SplitResult};
pub use target::lower_target_regions;

/// Memory space of device global memory. Space 0 is the host.
pub const DEVICE_SPACE: u32 = 1;

/// A diagnostic raised by a pass; the input is left unusable.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pass}: {message}")]
pub struct PassError {
    pub pass: &'static str,
    pub message: String,
}

impl PassError {
    pub(crate) fn new(pass: &'static str, message: impl Into<String>) -> Self {
        PassError {
            pass,
            message: message.into(),
        }
    }
}

/// Appends freshly built ops to a list, creating result values as it goes.
pub(crate) struct Builder<'v> {
    pub values: &'v mut ValueTable,
    pub ops: Vec<Operation>,
}

impl<'v> Builder<'v> {
    pub fn new(values: &'v mut ValueTable) -> Self {
        Builder {
            values,
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, op: Operation) {
        self.ops.push(op);
    }

    /// Pushes `op` with a single new result of type `ty`.
    pub fn value(&mut self, op: Operation, ty: Type) -> ValueId {
        let v = self.values.create(ty);
        self.ops.push(op.with_results([v]));
        v
    }

    pub fn constant(&mut self, attr: Attribute, ty: Type) -> ValueId {
        self.value(Operation::new("arith.constant").with_attr("value", attr), ty)
    }

    pub fn index(&mut self, v: i64) -> ValueId {
        self.constant(Attribute::index(v), Type::INDEX)
    }

    /// Two-operand op whose result has the type of `a`.
    pub fn binary(&mut self, name: &str, a: ValueId, b: ValueId) -> ValueId {
        let ty = self.values.ty(a).clone();
        self.value(Operation::new(name).with_operands([a, b]), ty)
    }

    pub fn load(&mut self, mem: ValueId, indices: &[ValueId]) -> ValueId {
        let elem = self
            .values
            .ty(mem)
            .as_memref()
            .map(|m| Type::Scalar(m.element))
            .expect("load from a non-memref value");
        let operands = core::iter::once(mem).chain(indices.iter().copied());
        self.value(Operation::new("memref.load").with_operands(operands), elem)
    }

    pub fn store(&mut self, v: ValueId, mem: ValueId, indices: &[ValueId]) {
        let operands = [v, mem].into_iter().chain(indices.iter().copied());
        self.push(Operation::new("memref.store").with_operands(operands));
    }

    pub fn finish(self) -> Vec<Operation> {
        self.ops
    }
}
