use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{is_index, is_memref, Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type};

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("memref.alloc", verify_alloc)?;
    reg.register("memref.alloca", verify_alloc)?;
    reg.register("memref.load", verify_load)?;
    reg.register("memref.store", verify_store)?;
    reg.register("memref.dma_start", verify_dma_start)?;
    reg.register("memref.wait", verify_wait)?;
    Ok(())
}

/// One index operand per dynamic dimension of the result.
fn verify_alloc(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.results(1) {
        match c.result_ty(0).as_memref() {
            None => c.fail("result must be a memref"),
            Some(m) => {
                if op.operands.len() != m.dynamic_dims() {
                    c.fail(format!(
                        "expected {} dynamic size operand(s), found {}",
                        m.dynamic_dims(),
                        op.operands.len()
                    ));
                }
                for i in 0..op.operands.len() {
                    c.operand_is(i, is_index, "index");
                }
            }
        }
    }
    c.finish()
}

fn check_indices(c: &mut Checks<'_, '_>, memref_pos: usize) {
    let Some(m) = c.operand_ty(memref_pos).as_memref() else {
        c.fail(format!("operand #{memref_pos} must be a memref"));
        return;
    };
    let given = c.op.operands.len() - memref_pos - 1;
    if given != m.rank() {
        c.fail(format!("expected {} indices, found {given}", m.rank()));
    }
    for i in memref_pos + 1..c.op.operands.len() {
        c.operand_is(i, is_index, "index");
    }
}

fn verify_load(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if op.operands.is_empty() {
        c.fail("missing memref operand");
        return c.finish();
    }
    check_indices(&mut c, 0);
    if c.results(1) {
        if let Some(m) = c.operand_ty(0).as_memref() {
            if *c.result_ty(0) != Type::Scalar(m.element) {
                c.fail("result type must equal the memref element type");
            }
        }
    }
    c.finish()
}

fn verify_store(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    if op.operands.len() < 2 {
        c.fail("expected a value and a memref operand");
        return c.finish();
    }
    check_indices(&mut c, 1);
    if let Some(m) = c.operand_ty(1).as_memref() {
        if *c.operand_ty(0) != Type::Scalar(m.element) {
            c.fail("stored value type must equal the memref element type");
        }
    }
    c.finish()
}

/// `memref.dma_start(%src, %dst)` copies the whole source buffer into the
/// destination; source and destination live in different memory spaces.
fn verify_dma_start(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(2) {
        c.operand_is(0, is_memref, "a memref");
        c.operand_is(1, is_memref, "a memref");
        if let (Some(s), Some(d)) = (c.operand_ty(0).as_memref(), c.operand_ty(1).as_memref()) {
            if s.element != d.element || s.rank() != d.rank() {
                c.fail("source and destination must have equal element type and rank");
            }
            if s.memory_space == d.memory_space {
                c.fail("transfer must cross memory spaces");
            }
        }
    }
    if c.results(1) {
        c.result_is(0, |t| *t == Type::DmaToken, "!memref.dma_token");
    }
    c.finish()
}

fn verify_wait(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    if c.operands(1) {
        c.operand_is(0, |t| *t == Type::DmaToken, "!memref.dma_token");
    }
    c.finish()
}
