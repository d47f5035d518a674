use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{is_index, Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type};

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("scf.for", verify_for)?;
    reg.register("scf.if", verify_if)?;
    reg.register("scf.yield", verify_yield)?;
    Ok(())
}

/// `scf.for(%lb, %ub, %step)` over the half-open range `[lb, ub)`; the body's
/// single argument is the induction variable.
fn verify_for(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    if c.operands(3) {
        for i in 0..3 {
            c.operand_is(i, is_index, "index");
        }
    }
    if let Some(s) = op.operands.get(2).and_then(|v| ctx.const_int(*v)) {
        if s <= 0 {
            c.fail(format!("loop step must be positive, found {s}"));
        }
    }
    if c.regions(1) {
        let body = &op.regions[0];
        if body.args.len() != 1 || !ctx.ty(body.args[0]).is_index() {
            c.fail("body must take exactly one index argument");
        }
        c.region_ends_with(0, "scf.yield");
        if let Some(y) = body.ops.last().filter(|y| y.is("scf.yield")) {
            if !y.operands.is_empty() {
                c.fail("scf.for body yields no values");
            }
        }
    }
    c.finish()
}

fn verify_if(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(1) {
        c.operand_is(0, |t| *t == Type::I1, "i1");
    }
    if c.regions(2) {
        for r in 0..2 {
            let block = &op.regions[r];
            if !block.args.is_empty() {
                c.fail(format!("region #{r} must not take arguments"));
            }
            c.region_ends_with(r, "scf.yield");
            if let Some(y) = block.ops.last().filter(|y| y.is("scf.yield")) {
                let yielded: Vec<&Type> = y.operands.iter().map(|v| ctx.ty(*v)).collect();
                let results: Vec<&Type> = op.results.iter().map(|v| ctx.ty(*v)).collect();
                if yielded != results {
                    c.fail(format!("region #{r} yields types that differ from the results"));
                }
            }
        }
    }
    c.finish()
}

fn verify_yield(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    c.parent_is(&["scf.for", "scf.if"]);
    c.terminator();
    c.finish()
}
