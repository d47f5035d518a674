use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type};

/// Callee names the HLS call lowering emits; they have no body in the module.
pub const HLS_INTERFACE_CALL: &str = "_hls_interface";
pub const HLS_PIPELINE_CALL: &str = "_hls_pipeline";

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("func.func", verify_func)?;
    reg.register("func.return", verify_return)?;
    reg.register("func.call", verify_call)?;
    Ok(())
}

fn verify_func(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if op.sym_name().is_none() {
        c.fail("missing symbol attribute 'sym_name'");
    }
    c.operands(0);
    c.results(0);
    if c.regions(1) {
        c.region_ends_with(0, "func.return");
    }
    if !ctx.ancestors.is_empty() {
        c.fail("functions must be defined at module level");
    }
    c.finish()
}

fn verify_return(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.operands(0);
    c.results(0);
    c.parent_is(&["func.func", "device.kernel_create"]);
    c.terminator();
    c.finish()
}

fn verify_call(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    let Some(callee) = op.symbol_attr("callee") else {
        c.fail("missing symbol attribute 'callee'");
        return c.finish();
    };
    match callee {
        HLS_INTERFACE_CALL => {
            if c.operands(1) {
                c.operand_is(0, Type::is_memref, "a memref");
            }
            c.str_attr("port");
            c.str_attr("protocol");
        }
        HLS_PIPELINE_CALL => {
            if c.operands(1) {
                c.operand_is(0, |t| t.as_scalar().is_some_and(|s| s.is_integer_like()), "an integer");
            }
            if let Some(ii) = c.int_attr("ii") {
                if ii < 1 {
                    c.fail(format!("initiation interval must be >= 1, found {ii}"));
                }
            }
        }
        name => match ctx.module.function(name) {
            None => c.fail(format!("call to unknown function @{name}")),
            Some(f) => {
                let params = &f.body().args;
                if params.len() != op.operands.len() {
                    c.fail(format!(
                        "@{name} takes {} argument(s), call passes {}",
                        params.len(),
                        op.operands.len()
                    ));
                } else {
                    for (i, (p, a)) in params.iter().zip(&op.operands).enumerate() {
                        if ctx.ty(*p) != ctx.ty(*a) {
                            c.fail(format!(
                                "argument #{i} has type {}, @{name} expects {}",
                                ctx.ty(*a),
                                ctx.ty(*p)
                            ));
                        }
                    }
                }
            }
        },
    }
    c.finish()
}
