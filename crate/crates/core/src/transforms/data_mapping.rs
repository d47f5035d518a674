//! Lowers OpenMP map clauses to device buffer management.
//!
//! Every mapped variable becomes an entry sequence (alloc or lookup,
//! acquire, optional host→device copy) before the construct and an exit
//! sequence (optional device→host copy, release) after it. Implicit maps
//! are guarded by a presence check so that a variable already resident on
//! the device is neither reallocated nor copied.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::mem;

use log::debug;

use super::{Builder, PassError, DEVICE_SPACE};
use crate::dialects::omp::MapInfo;
use crate::dialects::MapKind;
use crate::ir::{Attribute, Block, MemRefType, Module, Operation, Type, ValueId, ValueTable};

const PASS: &str = "lower-mapped-data";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryAction {
    Alloc,
    CopyToDevice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitAction {
    CopyToHost,
    Release,
}

/// What happens to one mapped variable around its construct. Acquire and
/// release always bracket the construct; `entry` and `exit` list the
/// remaining actions in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferPlan {
    pub entry: Vec<EntryAction>,
    pub exit: Vec<ExitAction>,
    /// Entry allocation and both copies are skipped when the variable is
    /// already present.
    pub guarded: bool,
}

impl TransferPlan {
    pub fn copies_in(&self) -> bool {
        self.entry.contains(&EntryAction::CopyToDevice)
    }

    pub fn copies_out(&self) -> bool {
        self.exit.contains(&ExitAction::CopyToHost)
    }
}

pub fn plan_transfers(info: &MapInfo) -> TransferPlan {
    let mut entry = Vec::from([EntryAction::Alloc]);
    if info.kind.copies_in() {
        entry.push(EntryAction::CopyToDevice);
    }
    let mut exit = Vec::new();
    if info.kind.copies_out() {
        exit.push(ExitAction::CopyToHost);
    }
    exit.push(ExitAction::Release);
    TransferPlan {
        entry,
        exit,
        guarded: info.kind == MapKind::ToFromImplicit,
    }
}

pub fn lower_mapped_data(m: &mut Module) -> Result<(), PassError> {
    // Identifiers mapped in more than one function are qualified.
    let mut owners: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for f in m.functions() {
        let fname = f.sym_name().unwrap_or_default().to_string();
        f.walk(&mut |op| {
            if let Some(n) = op.is("omp.map_info").then(|| op.str_attr("name")).flatten() {
                owners.entry(n.into()).or_default().insert(fname.clone());
            }
        });
    }
    let shared: BTreeSet<String> = owners
        .into_iter()
        .filter(|(_, fs)| fs.len() > 1)
        .map(|(n, _)| n)
        .collect();

    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        let fname = f.sym_name().unwrap_or_default().to_string();
        let mut cx = Lowering {
            values: &mut m.values,
            func: fname,
            shared: &shared,
            bounds: BTreeMap::new(),
            maps: BTreeMap::new(),
            shapes: BTreeMap::new(),
            forward: BTreeMap::new(),
            live: Vec::new(),
        };
        let body = f.body_mut();
        let ops = mem::take(&mut body.ops);
        body.ops = cx.lower_ops(ops)?;
        let forward = mem::take(&mut cx.forward);
        body.replace_uses_map(&forward);
    }
    Ok(())
}

/// A variable made available on the device for the duration of a construct.
struct Mapped {
    name: String,
    buf: ValueId,
    var: ValueId,
    plan: TransferPlan,
    /// Presence flag for guarded maps.
    present: Option<ValueId>,
    /// Already mapped by an enclosing construct: no copies at all.
    nested: bool,
}

struct Lowering<'a> {
    values: &'a mut ValueTable,
    func: String,
    shared: &'a BTreeSet<String>,
    bounds: BTreeMap<ValueId, (ValueId, ValueId)>,
    maps: BTreeMap<ValueId, MapInfo>,
    shapes: BTreeMap<String, MemRefType>,
    /// Map results still referenced outside offload constructs resolve to
    /// the host variable.
    forward: BTreeMap<ValueId, ValueId>,
    /// Identifiers mapped by enclosing data regions.
    live: Vec<String>,
}

fn err(message: impl Into<String>) -> PassError {
    PassError::new(PASS, message)
}

impl Lowering<'_> {
    fn lower_ops(&mut self, ops: Vec<Operation>) -> Result<Vec<Operation>, PassError> {
        let mut out = Vec::with_capacity(ops.len());
        for mut op in ops {
            match op.name.as_str() {
                "omp.bounds_info" => {
                    self.bounds
                        .insert(op.results[0], (op.operands[0], op.operands[1]));
                }
                "omp.map_info" => {
                    let info = MapInfo::from_op(&op)
                        .ok_or_else(|| err("malformed omp.map_info"))?;
                    self.check_shape(&info)?;
                    self.forward.insert(op.results[0], info.var);
                    self.maps.insert(op.results[0], info);
                }
                "omp.target_data" => {
                    let mapped = self.enter_all(&op.operands, &mut out)?;
                    let n_live = self.live.len();
                    self.live.extend(mapped.iter().map(|m| m.name.clone()));
                    let region = mem::take(&mut op.regions[0].ops);
                    let inner = self.lower_ops(region)?;
                    self.live.truncate(n_live);
                    out.extend(inner.into_iter().filter(|o| !o.is("omp.terminator")));
                    self.exit_all(mapped, &mut out);
                }
                "omp.target" => {
                    let mapped = self.enter_all(&op.operands, &mut out)?;
                    if !mapped.is_empty() || op.operands.is_empty() {
                        op.operands = mapped.iter().map(|m| m.buf).collect();
                        for (a, m) in op.regions[0].args.iter().zip(&mapped) {
                            let t = self.values.ty(m.buf).clone();
                            self.values.set_ty(*a, t);
                        }
                        let names = mapped.iter().map(|m| Attribute::str(m.name.as_str()));
                        op.attributes
                            .insert("map_names".into(), Attribute::Array(names.collect()));
                    }
                    let body = mem::take(&mut op.regions[0].ops);
                    op.regions[0].ops = self.lower_ops(body)?;
                    self.check_target_body(&op.regions[0])?;
                    out.push(op);
                    self.exit_all(mapped, &mut out);
                }
                _ => {
                    for r in &mut op.regions {
                        let ops = mem::take(&mut r.ops);
                        r.ops = self.lower_ops(ops)?;
                    }
                    out.push(op);
                }
            }
        }
        Ok(out)
    }

    fn check_shape(&mut self, info: &MapInfo) -> Result<(), PassError> {
        let ty = self
            .values
            .ty(info.var)
            .as_memref()
            .cloned()
            .ok_or_else(|| err(format!("mapped variable '{}' is not a memref", info.identifier)))?;
        match self.shapes.get(&info.identifier) {
            Some(prev) if prev.shape != ty.shape || prev.element != ty.element => Err(err(format!(
                "'{}' is mapped as {} but was mapped earlier as {}",
                info.identifier,
                Type::MemRef(ty),
                Type::MemRef(prev.clone())
            ))),
            Some(_) => Ok(()),
            None => {
                self.shapes.insert(info.identifier.clone(), ty);
                Ok(())
            }
        }
    }

    fn check_target_body(&self, body: &Block) -> Result<(), PassError> {
        for v in body.free_values() {
            if let Some(m) = self.values.ty(v).as_memref() {
                if m.memory_space == 0 {
                    return Err(err(format!(
                        "target region uses host buffer {v} that is not mapped"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Emits entry sequences for every map operand of a construct. Returns
    /// an empty list when the construct was already lowered.
    fn enter_all(
        &mut self,
        operands: &[ValueId],
        out: &mut Vec<Operation>,
    ) -> Result<Vec<Mapped>, PassError> {
        let mut infos = Vec::new();
        for (i, o) in operands.iter().enumerate() {
            match self.maps.get(o) {
                Some(info) => infos.push(info.clone()),
                None => {
                    let on_device = self
                        .values
                        .ty(*o)
                        .as_memref()
                        .is_some_and(|m| m.memory_space != 0);
                    if on_device && infos.is_empty() {
                        continue;
                    }
                    return Err(err(format!(
                        "operand #{i} is neither an omp.map_info result nor a device buffer"
                    )));
                }
            }
        }
        if !infos.is_empty() && infos.len() != operands.len() {
            return Err(err("construct mixes mapped and already lowered operands"));
        }
        let mut mapped = Vec::with_capacity(infos.len());
        for info in infos {
            mapped.push(self.enter(info, out)?);
        }
        Ok(mapped)
    }

    fn qualified(&self, name: &str) -> String {
        if self.shared.contains(name) {
            format!("@{}.{name}", self.func)
        } else {
            name.into()
        }
    }

    fn enter(&mut self, info: MapInfo, out: &mut Vec<Operation>) -> Result<Mapped, PassError> {
        let name = self.qualified(&info.identifier);
        let plan = plan_transfers(&info);
        let host_ty = self.values.ty(info.var).as_memref().cloned().unwrap();
        let dev_ty = Type::MemRef(host_ty.to_dynamic_in(DEVICE_SPACE));
        let mut sizes_src = Vec::with_capacity(info.bounds.len());
        for b in &info.bounds {
            let pair = self.bounds.get(b).copied().ok_or_else(|| {
                err(format!("bounds of '{name}' are not produced by omp.bounds_info"))
            })?;
            sizes_src.push(pair);
        }
        debug!("{PASS}: @{} maps '{name}' as {}", self.func, info.kind);

        let nested = self.live.contains(&name);
        let mut b = Builder::new(self.values);
        let mut present = None;
        let buf = if plan.guarded {
            let p = b.value(keyed("device.data_check_exists", &name), Type::I1);
            present = Some(p);

            let mut then_b = Builder::new(b.values);
            let l = then_b.value(keyed("device.lookup", &name), dev_ty.clone());
            then_b.push(Operation::new("scf.yield").with_operands([l]));
            let then_ops = then_b.finish();

            let mut else_b = Builder::new(b.values);
            let a = alloc(&mut else_b, &name, &sizes_src, &dev_ty);
            else_b.push(Operation::new("scf.yield").with_operands([a]));
            let else_ops = else_b.finish();

            b.value(
                Operation::new("scf.if")
                    .with_operands([p])
                    .with_region(Block::with_ops(then_ops))
                    .with_region(Block::with_ops(else_ops)),
                dev_ty.clone(),
            )
        } else if nested {
            b.value(keyed("device.lookup", &name), dev_ty.clone())
        } else {
            alloc(&mut b, &name, &sizes_src, &dev_ty)
        };
        b.push(keyed("device.data_acquire", &name));
        if plan.copies_in() && !nested {
            let copy = dma(b.values, info.var, buf);
            guarded(&mut b, present, copy);
        }
        out.extend(b.finish());
        Ok(Mapped {
            name,
            buf,
            var: info.var,
            plan,
            present,
            nested,
        })
    }

    fn exit_all(&mut self, mapped: Vec<Mapped>, out: &mut Vec<Operation>) {
        let mut b = Builder::new(self.values);
        for m in mapped {
            if m.plan.copies_out() && !m.nested {
                let copy = dma(b.values, m.buf, m.var);
                guarded(&mut b, m.present, copy);
            }
            b.push(keyed("device.data_release", &m.name));
        }
        out.extend(b.finish());
    }
}

fn keyed(op: &str, name: &str) -> Operation {
    Operation::new(op)
        .with_attr("name", Attribute::str(name))
        .with_attr("memory_space", Attribute::i32(DEVICE_SPACE as i64))
}

fn alloc(b: &mut Builder<'_>, name: &str, bounds: &[(ValueId, ValueId)], ty: &Type) -> ValueId {
    let sizes: Vec<ValueId> = bounds
        .iter()
        .map(|(lb, ub)| b.binary("arith.subi", *ub, *lb))
        .collect();
    b.value(keyed("device.alloc", name).with_operands(sizes), ty.clone())
}

/// A synchronous copy: `dma_start` immediately followed by its `wait`.
fn dma(values: &mut ValueTable, src: ValueId, dst: ValueId) -> Vec<Operation> {
    let mut b = Builder::new(values);
    let t = b.value(
        Operation::new("memref.dma_start").with_operands([src, dst]),
        Type::DmaToken,
    );
    b.push(Operation::new("memref.wait").with_operands([t]));
    b.finish()
}

/// Emits `ops` directly, or only when the variable was not present.
fn guarded(b: &mut Builder<'_>, present: Option<ValueId>, mut ops: Vec<Operation>) {
    match present {
        None => b.ops.extend(ops),
        Some(p) => {
            ops.push(Operation::new("scf.yield"));
            b.push(
                Operation::new("scf.if")
                    .with_operands([p])
                    .with_region(Block::with_ops(Vec::from([Operation::new("scf.yield")])))
                    .with_region(Block::with_ops(ops)),
            );
        }
    }
}
