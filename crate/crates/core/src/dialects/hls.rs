//! HLS structure: AXI port interfaces for kernel arguments and loop pipelining.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{is_memref, Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type};

/// The only protocol modelled: AXI memory-mapped master.
pub const M_AXI: &str = "m_axi";

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("hls.axi_protocol", verify_hls_op)?;
    reg.register("hls.interface", verify_hls_op)?;
    reg.register("hls.pipeline", verify_hls_op)?;
    Ok(())
}

pub fn verify_hls_op(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    match op.name.as_str() {
        "hls.axi_protocol" => {
            c.operands(0);
            if c.results(1) {
                c.result_is(0, |t| *t == Type::AxiProtocol, "!hls.axi_protocol");
            }
            if let Some(k) = op.str_attr("kind") {
                if k != M_AXI {
                    c.fail(format!("unsupported protocol '{k}'"));
                }
            }
        }
        "hls.interface" => verify_interface(&mut c),
        "hls.pipeline" => {
            c.results(0);
            if c.operands(1) {
                c.operand_is(
                    0,
                    |t| t.as_scalar().is_some_and(|s| s.is_integer_like()),
                    "an integer",
                );
                match ctx.const_int(op.operands[0]) {
                    Some(ii) if ii < 1 => {
                        c.fail(format!("initiation interval must be >= 1, found {ii}"))
                    }
                    Some(_) => {}
                    None => c.fail("initiation interval must be a constant"),
                }
            }
            if !ctx.parent().is_some_and(|p| p.is("scf.for")) {
                c.fail("hls.pipeline must be placed directly inside a loop body");
            }
        }
        other => c.fail(format!("unknown hls operation '{other}'")),
    }
    c.finish()
}

fn verify_interface(c: &mut Checks<'_, '_>) {
    let op = c.op;
    c.results(0);
    if !c.operands(2) {
        return;
    }
    c.operand_is(0, is_memref, "a memref");
    c.operand_is(1, |t| *t == Type::AxiProtocol, "!hls.axi_protocol");
    let Some(port) = c.str_attr("port") else {
        return;
    };
    let bundled = op.bool_attr("bundle");
    for prev in &c.ctx.siblings[..c.ctx.index] {
        if !prev.is("hls.interface") {
            continue;
        }
        if prev.operands.first() == op.operands.first() {
            c.fail("argument already has an interface");
        }
        if prev.str_attr("port") == Some(port) && !(bundled && prev.bool_attr("bundle")) {
            c.fail(format!("port '{port}' is already assigned"));
        }
    }
}
