//! Host-side device management: named buffers per memory space, presence
//! tracking and kernel create/launch/wait.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{is_index, Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type};

pub const OPS: &[&str] = &[
    "device.alloc",
    "device.lookup",
    "device.data_check_exists",
    "device.data_acquire",
    "device.data_release",
    "device.kernel_create",
    "device.kernel_launch",
    "device.kernel_wait",
];

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    for name in OPS {
        reg.register(name, verify_device_op)?;
    }
    Ok(())
}

/// Dispatches to the contract of the given `device.*` op.
pub fn verify_device_op(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    match op.name.as_str() {
        "device.alloc" => {
            let space = buffer_key(&mut c);
            if c.results(1) {
                match c.result_ty(0).as_memref() {
                    None => c.fail("result must be a memref"),
                    Some(m) => {
                        if space.is_some_and(|s| s != m.memory_space as i64) {
                            c.fail(format!(
                                "result memory space {} differs from attribute memory_space",
                                m.memory_space
                            ));
                        }
                        if op.operands.len() != m.dynamic_dims() {
                            c.fail(format!(
                                "expected {} dynamic size operand(s), found {}",
                                m.dynamic_dims(),
                                op.operands.len()
                            ));
                        }
                    }
                }
            }
            for i in 0..op.operands.len() {
                c.operand_is(i, is_index, "index");
            }
        }
        "device.lookup" => {
            let space = buffer_key(&mut c);
            c.operands(0);
            if c.results(1) {
                match c.result_ty(0).as_memref() {
                    None => c.fail("result must be a memref"),
                    Some(m) if space.is_some_and(|s| s != m.memory_space as i64) => c.fail(format!(
                        "result memory space {} differs from attribute memory_space",
                        m.memory_space
                    )),
                    Some(_) => {}
                }
            }
        }
        "device.data_check_exists" => {
            buffer_key(&mut c);
            c.operands(0);
            if c.results(1) {
                c.result_is(0, |t| *t == Type::I1, "i1");
            }
        }
        "device.data_acquire" | "device.data_release" => {
            buffer_key(&mut c);
            c.operands(0);
            c.results(0);
        }
        "device.kernel_create" => verify_kernel_create(&mut c),
        "device.kernel_launch" | "device.kernel_wait" => {
            c.results(0);
            if c.operands(1) {
                if *c.operand_ty(0) != Type::KernelHandle {
                    c.operand_is(0, |t| *t == Type::KernelHandle, "!device.kernelhandle");
                } else if !ctx.def(op.operands[0]).is_some_and(|d| d.is("device.kernel_create")) {
                    c.fail("operand must be produced by device.kernel_create");
                }
            }
        }
        other => c.fail(format!("unknown device operation '{other}'")),
    }
    c.finish()
}

/// Checks `name` and `memory_space`; returns the space when well formed.
fn buffer_key(c: &mut Checks<'_, '_>) -> Option<i64> {
    c.str_attr("name");
    let space = c.int_attr("memory_space")?;
    if space < 0 {
        c.fail("memory_space must be non-negative");
        return None;
    }
    Some(space)
}

fn verify_kernel_create(c: &mut Checks<'_, '_>) {
    let op = c.op;
    if c.results(1) {
        c.result_is(0, |t| *t == Type::KernelHandle, "!device.kernelhandle");
    }
    for (i, v) in op.operands.iter().enumerate() {
        if let Some(m) = c.ctx.ty(*v).as_memref() {
            if m.memory_space == 0 {
                c.fail(format!("memref argument #{i} must live in device memory"));
            }
        }
    }
    if !c.regions(1) {
        return;
    }
    let body = &op.regions[0];
    if body.ops.is_empty() {
        if !body.args.is_empty() {
            c.fail("extracted kernel region must be empty");
        }
        if op.symbol_attr("device_function").is_none() {
            c.fail("extracted kernel requires symbol attribute 'device_function'");
        }
        return;
    }
    if body.args.len() != op.operands.len() {
        c.fail("kernel region must take one argument per kernel operand");
    } else {
        for (i, (a, o)) in body.args.iter().zip(&op.operands).enumerate() {
            if c.ctx.ty(*a) != c.ctx.ty(*o) {
                c.fail(format!("kernel region argument #{i} type differs from its operand"));
            }
        }
    }
    c.region_ends_with(0, "func.return");
}
