use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::loops::{const_index, emit_unrolled, Accumulator, Emit, LoopParts};
use super::unroll::UnrollPlan;
use crate::dialects::ReductionKind;
use crate::ir::{Attribute, Operation, ScalarType, Type, ValueId, ValueTable};
use crate::sim::reduction_op_name;
use crate::transforms::{Builder, PassError};

/// Round-robin privatisation of a reduction variable into `copies`
/// accumulators, combined left to right after the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionPlan {
    pub kind: ReductionKind,
    pub copies: u32,
}

impl ReductionPlan {
    pub fn new(operator: &str, copies: u32) -> Result<ReductionPlan, PassError> {
        let kind = operator.parse().map_err(|_| {
            PassError::new(
                "lower-omp-loops-to-hls",
                format!("unsupported reduction operator '{operator}'"),
            )
        })?;
        if copies < 1 {
            return Err(PassError::new(
                "lower-omp-loops-to-hls",
                "a reduction needs at least one copy",
            ));
        }
        Ok(ReductionPlan { kind, copies })
    }
}

/// Neutral element of `kind` over `ty`.
pub fn identity(kind: ReductionKind, ty: ScalarType) -> Attribute {
    if ty.is_float() {
        let v = match kind {
            ReductionKind::Add => 0.0,
            ReductionKind::Mul => 1.0,
            ReductionKind::Min => f64::INFINITY,
            ReductionKind::Max => f64::NEG_INFINITY,
        };
        return Attribute::Float(v, ty);
    }
    let bits = match ty {
        ScalarType::Int(w) => w,
        _ => 64,
    };
    let v = match (kind, bits) {
        (ReductionKind::Add, _) => 0,
        (ReductionKind::Mul, _) => 1,
        // i1 is unsigned 0/1 here.
        (ReductionKind::Min, 1) => 1,
        (ReductionKind::Max, 1) => 0,
        (ReductionKind::Min, w) => (i64::MAX as u64 >> (64 - w)) as i64,
        (ReductionKind::Max, w) => i64::MIN >> (64 - w),
    };
    Attribute::Int(v, ty)
}

/// Emits the accumulator array, the (possibly unrolled) loop updating copy
/// `((iv - lb) / step) mod copies` on each iteration, and the final combine
/// into the rank-0 reduction variable `var`.
#[allow(clippy::too_many_arguments)]
pub fn apply_reduction_split(
    values: &mut ValueTable,
    parts: &LoopParts,
    plan: &ReductionPlan,
    var: ValueId,
    unroll: &UnrollPlan,
    ii: Option<ValueId>,
    consts: &mut BTreeMap<ValueId, i64>,
) -> Result<Vec<Operation>, PassError> {
    let elem = values
        .ty(var)
        .as_memref()
        .filter(|m| m.rank() == 0)
        .map(|m| m.element)
        .ok_or_else(|| {
            PassError::new("lower-omp-loops-to-hls", "reduction variable must be a rank-0 memref")
        })?;
    if parts.yielded.len() != 1 {
        return Err(PassError::new(
            "lower-omp-loops-to-hls",
            "reduction loop must yield exactly one contribution",
        ));
    }
    let op = reduction_op_name(plan.kind, elem);
    let mut b = Builder::new(values);
    let buf = b.value(
        Operation::new("memref.alloca"),
        Type::memref(Vec::from([Some(plan.copies as u64)]), elem, 0),
    );
    let id = b.constant(identity(plan.kind, elem), Type::Scalar(elem));
    for k in 0..plan.copies {
        let kc = const_index(&mut b, consts, k as i64);
        b.store(id, buf, &[kc]);
    }

    let mut cx = Emit {
        consts,
        ii,
        acc: Some(Accumulator {
            op,
            buf,
            copies: plan.copies,
        }),
    };
    emit_unrolled(&mut b, parts, unroll.factor, &mut cx)?;

    let c0 = const_index(&mut b, consts, 0);
    let mut r = b.load(buf, &[c0]);
    for k in 1..plan.copies {
        let kc = const_index(&mut b, consts, k as i64);
        let x = b.load(buf, &[kc]);
        r = b.binary(op, r, x);
    }
    let orig = b.load(var, &[]);
    let fin = b.binary(op, orig, r);
    b.store(fin, var, &[]);
    Ok(b.finish())
}
