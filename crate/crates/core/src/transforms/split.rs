//! Moves kernel bodies out of `device.kernel_create` into functions of a
//! separate device module.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::mem;

use super::PassError;
use crate::ir::{import_op, Attribute, Block, Module, Operation, ValueId, ValueTable};

const PASS: &str = "split-modules";

/// Host module plus the device module holding one function per kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub host: Module,
    pub device: Module,
}

pub fn split_modules(mut m: Module) -> Result<SplitResult, PassError> {
    let mut device = Module::new();
    device
        .attributes
        .insert("target".into(), Attribute::str("fpga"));

    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        let fname = f.sym_name().unwrap_or_default().to_string();
        let mut constants = BTreeMap::new();
        f.body().walk(&mut |op| {
            if op.is("arith.constant") {
                constants.insert(op.results[0], op.clone());
            }
        });
        let mut cx = Splitter {
            host_values: &m.values,
            device: &mut device,
            constants,
            fname,
            count: 0,
        };
        cx.visit(f.body_mut())?;
    }
    Ok(SplitResult { host: m, device })
}

struct Splitter<'a> {
    host_values: &'a ValueTable,
    device: &'a mut Module,
    constants: BTreeMap<ValueId, Operation>,
    fname: String,
    count: usize,
}

impl Splitter<'_> {
    fn visit(&mut self, block: &mut Block) -> Result<(), PassError> {
        for op in &mut block.ops {
            if op.is("device.kernel_create") && !op.regions.first().is_some_and(|r| r.ops.is_empty()) {
                self.extract(op)?;
                continue;
            }
            for r in &mut op.regions {
                self.visit(r)?;
            }
        }
        Ok(())
    }

    fn extract(&mut self, op: &mut Operation) -> Result<(), PassError> {
        let name = match op.symbol_attr("device_function") {
            Some(n) => n.to_string(),
            None => format!("{}_kernel{}", self.fname, self.count),
        };
        self.count += 1;
        if self.device.function(&name).is_some() {
            return Err(PassError::new(
                PASS,
                format!("device function @{name} is defined twice"),
            ));
        }
        let region = mem::take(&mut op.regions[0]);
        let mut map = BTreeMap::new();
        let dv = &mut self.device.values;
        let args: Vec<ValueId> = region
            .args
            .iter()
            .map(|a| {
                let n = dv.create(self.host_values.ty(*a).clone());
                map.insert(*a, n);
                n
            })
            .collect();
        let mut ops = Vec::new();
        for v in region.free_values() {
            let Some(c) = self.constants.get(&v) else {
                return Err(PassError::new(
                    PASS,
                    format!("kernel @{name} uses {v}, which is neither an argument nor a constant"),
                ));
            };
            ops.push(import_op(c, self.host_values, dv, &mut map));
        }
        for o in &region.ops {
            ops.push(import_op(o, self.host_values, dv, &mut map));
        }
        let mut func = Operation::new("func.func")
            .with_attr("sym_name", Attribute::symbol(name.as_str()))
            .with_region(Block { args, ops });
        if let Some(n) = op.attr("arg_names") {
            func = func.with_attr("arg_names", n.clone());
        }
        self.device.body.push(func);
        op.attributes
            .insert("device_function".into(), Attribute::symbol(name));
        Ok(())
    }
}
