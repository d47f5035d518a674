use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::loops::{emit_unrolled, Emit, LoopParts};
use crate::transforms::{Builder, PassError};
use crate::ir::{Operation, ValueId, ValueTable};

/// Partial unrolling by `factor`: a main loop running `factor` iterations
/// per trip and a serial epilogue for the remainder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnrollPlan {
    pub factor: u32,
}

impl UnrollPlan {
    pub fn new(factor: u32) -> Result<UnrollPlan, PassError> {
        if factor < 1 {
            return Err(PassError::new(
                "lower-omp-loops-to-hls",
                format!("unroll factor must be >= 1, found {factor}"),
            ));
        }
        Ok(UnrollPlan { factor })
    }

    pub fn main_trips(&self, n: u64) -> u64 {
        n / self.factor as u64
    }

    pub fn epilogue_trips(&self, n: u64) -> u64 {
        n % self.factor as u64
    }
}

/// Emits the unrolled loop nest for `parts`. `consts` maps known integer
/// constants and is extended with the ones created here.
pub fn apply_unroll(
    values: &mut ValueTable,
    parts: &LoopParts,
    plan: &UnrollPlan,
    consts: &mut BTreeMap<ValueId, i64>,
) -> Result<Vec<Operation>, PassError> {
    let mut b = Builder::new(values);
    let mut cx = Emit {
        consts,
        ii: None,
        acc: None,
    };
    emit_unrolled(&mut b, parts, plan.factor, &mut cx)?;
    Ok(b.finish())
}
