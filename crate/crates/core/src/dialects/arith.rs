use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Checks, OpContext, Registry, RegistryError};
use crate::ir::{Attribute, Operation, ScalarType, Type};

pub const INT_BINARY: &[&str] = &[
    "arith.addi",
    "arith.subi",
    "arith.muli",
    "arith.divsi",
    "arith.divui",
    "arith.remsi",
    "arith.remui",
    "arith.minsi",
    "arith.maxsi",
    "arith.andi",
    "arith.ori",
    "arith.xori",
];

pub const FLOAT_BINARY: &[&str] = &[
    "arith.addf",
    "arith.subf",
    "arith.mulf",
    "arith.divf",
    "arith.minimumf",
    "arith.maximumf",
];

pub const CMPI_PREDICATES: &[&str] = &[
    "eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge",
];
pub const CMPF_PREDICATES: &[&str] = &["oeq", "one", "olt", "ole", "ogt", "oge"];

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("arith.constant", verify_constant)?;
    for name in INT_BINARY {
        reg.register(name, verify_int_binary)?;
    }
    for name in FLOAT_BINARY {
        reg.register(name, verify_float_binary)?;
    }
    reg.register("arith.negf", verify_negf)?;
    reg.register("arith.cmpi", verify_cmpi)?;
    reg.register("arith.cmpf", verify_cmpf)?;
    reg.register("arith.select", verify_select)?;
    reg.register("arith.index_cast", verify_index_cast)?;
    reg.register("arith.sitofp", verify_sitofp)?;
    reg.register("arith.fptosi", verify_fptosi)?;
    Ok(())
}

fn int_like(t: &Type) -> bool {
    t.as_scalar().is_some_and(ScalarType::is_integer_like)
}

fn float(t: &Type) -> bool {
    t.as_scalar().is_some_and(ScalarType::is_float)
}

fn verify_constant(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.operands(0);
    if !c.results(1) {
        return c.finish();
    }
    let ty = c.result_ty(0);
    match (op.attr("value"), ty) {
        (Some(Attribute::Int(v, at)), Type::Scalar(rt)) if at == rt && rt.is_integer_like() => {
            if *rt == ScalarType::I1 && !(*v == 0 || *v == 1) {
                c.fail("i1 constant must be 0 or 1");
            }
        }
        (Some(Attribute::Float(_, at)), Type::Scalar(rt)) if at == rt && rt.is_float() => {}
        (Some(Attribute::Bool(_)), Type::Scalar(ScalarType::Int(1))) => {}
        (Some(a), t) => c.fail(format!("constant value {a} does not match result type {t}")),
        (None, _) => c.fail("missing attribute 'value'"),
    }
    c.finish()
}

fn same_type_binary(op: &Operation, ctx: &OpContext<'_>, pred: fn(&Type) -> bool, what: &str) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(2) && c.results(1) {
        c.operand_is(0, pred, what);
        let (a, b, r) = (c.operand_ty(0), c.operand_ty(1), c.result_ty(0));
        if a != b || a != r {
            c.fail(format!("operand and result types must match, found {a}, {b} -> {r}"));
        }
    }
    c.finish()
}

fn verify_int_binary(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    same_type_binary(op, ctx, int_like, "integer or index")
}

fn verify_float_binary(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    same_type_binary(op, ctx, float, "a float")
}

fn verify_negf(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(1) && c.results(1) {
        c.operand_is(0, float, "a float");
        if c.operand_ty(0) != c.result_ty(0) {
            c.fail("result type must match operand type");
        }
    }
    c.finish()
}

fn verify_cmp(
    op: &Operation,
    ctx: &OpContext<'_>,
    preds: &[&str],
    pred: fn(&Type) -> bool,
    what: &str,
) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if let Some(p) = c.str_attr("predicate") {
        if !preds.contains(&p) {
            c.fail(format!("unknown predicate '{p}'"));
        }
    }
    if c.operands(2) && c.results(1) {
        c.operand_is(0, pred, what);
        if c.operand_ty(0) != c.operand_ty(1) {
            c.fail("compared operands must have the same type");
        }
        c.result_is(0, |t| *t == Type::I1, "i1");
    }
    c.finish()
}

fn verify_cmpi(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    verify_cmp(op, ctx, CMPI_PREDICATES, int_like, "integer or index")
}

fn verify_cmpf(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    verify_cmp(op, ctx, CMPF_PREDICATES, float, "a float")
}

fn verify_select(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(3) && c.results(1) {
        c.operand_is(0, |t| *t == Type::I1, "i1");
        let (a, b, r) = (c.operand_ty(1), c.operand_ty(2), c.result_ty(0));
        if a != b || a != r {
            c.fail("select arms and result must share a type");
        }
    }
    c.finish()
}

fn cast(op: &Operation, ctx: &OpContext<'_>, from: fn(&Type) -> bool, to: fn(&Type) -> bool) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(1) && c.results(1) {
        c.operand_is(0, from, "a valid source type");
        c.result_is(0, to, "a valid target type");
    }
    c.finish()
}

fn verify_index_cast(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    cast(op, ctx, int_like, int_like)
}

fn verify_sitofp(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    cast(op, ctx, int_like, float)
}

fn verify_fptosi(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    cast(op, ctx, float, int_like)
}
