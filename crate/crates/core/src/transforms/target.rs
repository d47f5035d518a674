//! Rewrites each `omp.target` into `device.kernel_create` (still holding the
//! body), `device.kernel_launch` and `device.kernel_wait`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::mem;

use log::debug;

use super::PassError;
use crate::ir::{function_arg_names, Attribute, Module, Operation, Type, ValueId, ValueTable};

const PASS: &str = "lower-target-regions";

pub fn lower_target_regions(m: &mut Module) -> Result<(), PassError> {
    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        let mut constants = BTreeSet::new();
        f.body().walk(&mut |op| {
            if op.is("arith.constant") {
                constants.extend(op.results.iter().copied());
            }
        });
        let params: BTreeMap<ValueId, String> = f
            .body()
            .args
            .iter()
            .copied()
            .zip(function_arg_names(f))
            .collect();
        let mut cx = Lowering {
            values: &mut m.values,
            constants,
            params,
        };
        let body = f.body_mut();
        let ops = mem::take(&mut body.ops);
        body.ops = cx.rewrite(ops)?;
    }
    Ok(())
}

struct Lowering<'a> {
    values: &'a mut ValueTable,
    constants: BTreeSet<ValueId>,
    params: BTreeMap<ValueId, String>,
}

impl Lowering<'_> {
    fn rewrite(&mut self, ops: Vec<Operation>) -> Result<Vec<Operation>, PassError> {
        let mut out = Vec::with_capacity(ops.len());
        for mut op in ops {
            if op.is("omp.target") {
                self.lower(op, &mut out)?;
                continue;
            }
            for r in &mut op.regions {
                let ops = mem::take(&mut r.ops);
                r.ops = self.rewrite(ops)?;
            }
            out.push(op);
        }
        Ok(out)
    }

    fn lower(&mut self, mut op: Operation, out: &mut Vec<Operation>) -> Result<(), PassError> {
        for (i, o) in op.operands.iter().enumerate() {
            match self.values.ty(*o).as_memref() {
                Some(m) if m.memory_space != 0 => {}
                _ => {
                    return Err(PassError::new(
                        PASS,
                        format!("omp.target operand #{i} is not a device buffer; lower the mapped data first"),
                    ))
                }
            }
        }
        let mut body = mem::take(&mut op.regions[0]);
        let mut captured = Vec::new();
        for v in body.free_values() {
            let ty = self.values.ty(v);
            if ty.is_memref() {
                return Err(PassError::new(
                    PASS,
                    format!("target region uses buffer {v} that is not mapped"),
                ));
            }
            if self.constants.contains(&v) {
                continue;
            }
            if !matches!(ty, Type::Scalar(_)) {
                return Err(PassError::new(
                    PASS,
                    format!("value {v} of type {ty} cannot be passed to a kernel"),
                ));
            }
            captured.push(v);
        }

        let mut names: Vec<Attribute> = match op.attr("map_names").and_then(Attribute::as_array) {
            Some(a) if a.len() == op.operands.len() => a.to_vec(),
            _ => (0..op.operands.len())
                .map(|i| Attribute::str(format!("arg{i}")))
                .collect(),
        };
        let mut remap = BTreeMap::new();
        for v in &captured {
            let a = self.values.create(self.values.ty(*v).clone());
            remap.insert(*v, a);
            body.args.push(a);
            let name = self
                .params
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("arg{}", names.len()));
            names.push(Attribute::Str(name));
        }
        body.replace_uses_map(&remap);
        match body.ops.last_mut() {
            Some(t) if t.is("omp.terminator") => *t = Operation::new("func.return"),
            _ => body.ops.push(Operation::new("func.return")),
        }

        let h = self.values.create(Type::KernelHandle);
        let mut create = Operation::new("device.kernel_create")
            .with_operands(op.operands.iter().copied().chain(captured.iter().copied()))
            .with_results([h])
            .with_attr("arg_names", Attribute::Array(names))
            .with_region(body);
        if let Some(k) = op.str_attr("kernel_name") {
            create = create.with_attr("device_function", Attribute::symbol(k));
        }
        debug!(
            "{PASS}: kernel with {} buffer and {} scalar argument(s)",
            op.operands.len(),
            captured.len()
        );
        out.push(create);
        out.push(Operation::new("device.kernel_launch").with_operands([h]));
        out.push(Operation::new("device.kernel_wait").with_operands([h]));
        Ok(())
    }
}
