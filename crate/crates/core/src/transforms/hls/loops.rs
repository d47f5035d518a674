use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::mem;

use log::debug;

use super::canonicalize::{check_unroll_dependencies, forward_stores};
use super::ports::assign_ports;
use super::reduction::{apply_reduction_split, ReductionPlan};
use super::unroll::UnrollPlan;
use crate::dialects::omp::LoopAnnotations;
use crate::ir::{clone_op, Attribute, Block, Module, Operation, Type, ValueId, ValueTable};
use crate::transforms::{Builder, PassError};

const PASS: &str = "lower-omp-loops-to-hls";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HlsOptions {
    /// Accumulator copies for reductions; by default `simdlen` for simd
    /// loops and 4 otherwise.
    pub reduction_copies: Option<u32>,
}

/// An `omp.loop` taken apart: bounds, body without its terminator, and the
/// values the terminator yielded.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopParts {
    pub lb: ValueId,
    pub ub: ValueId,
    pub step: ValueId,
    pub body: Block,
    pub yielded: Vec<ValueId>,
}

impl LoopParts {
    pub fn from_omp_loop(op: &mut Operation) -> LoopParts {
        let mut body = mem::take(&mut op.regions[0]);
        let yielded = match body.ops.last() {
            Some(y) if y.is("omp.yield") || y.is("scf.yield") => body.ops.pop().unwrap().operands,
            _ => Vec::new(),
        };
        LoopParts {
            lb: op.operands[0],
            ub: op.operands[1],
            step: op.operands[2],
            body,
            yielded,
        }
    }
}

pub(crate) struct Accumulator {
    pub op: &'static str,
    pub buf: ValueId,
    pub copies: u32,
}

pub(crate) struct Emit<'c> {
    pub consts: &'c mut BTreeMap<ValueId, i64>,
    /// Initiation interval operand; loops are pipelined when set.
    pub ii: Option<ValueId>,
    pub acc: Option<Accumulator>,
}

pub(crate) fn const_index(b: &mut Builder<'_>, consts: &mut BTreeMap<ValueId, i64>, v: i64) -> ValueId {
    let id = b.index(v);
    consts.insert(id, v);
    id
}

/// Main loop over whole groups of `factor` iterations plus a serial
/// epilogue. With constant bounds the split point is folded and loops
/// that would run zero times are omitted.
pub(crate) fn emit_unrolled(
    b: &mut Builder<'_>,
    parts: &LoopParts,
    factor: u32,
    cx: &mut Emit<'_>,
) -> Result<(), PassError> {
    if factor == 1 {
        emit_loop(b, parts, cx, parts.lb, parts.ub, 1);
        return Ok(());
    }
    let f = factor as i64;
    let known = |v: &ValueId| cx.consts.get(v).copied();
    match (known(&parts.lb), known(&parts.ub), known(&parts.step)) {
        (_, _, Some(s)) if s <= 0 => Err(PassError::new(PASS, format!("loop step must be positive, found {s}"))),
        (Some(l), Some(u), Some(s)) => {
            let trips = if u > l { ((u - l) + s - 1) / s } else { 0 } as u64;
            let plan = UnrollPlan::new(factor)?;
            let main = plan.main_trips(trips) as i64;
            let split = l + main * f * s;
            if main > 0 {
                let ub = const_index(b, cx.consts, split);
                emit_loop(b, parts, cx, parts.lb, ub, factor);
            }
            if plan.epilogue_trips(trips) > 0 {
                let lb = if main > 0 {
                    const_index(b, cx.consts, split)
                } else {
                    parts.lb
                };
                emit_loop(b, parts, cx, lb, parts.ub, 1);
            }
            Ok(())
        }
        (_, _, step) => {
            let span = b.binary("arith.subi", parts.ub, parts.lb);
            let (trips, group) = match step {
                Some(1) => (span, const_index(b, cx.consts, f)),
                Some(s) => {
                    let sm1 = const_index(b, cx.consts, s - 1);
                    let t = b.binary("arith.addi", span, sm1);
                    let sc = const_index(b, cx.consts, s);
                    (b.binary("arith.divsi", t, sc), const_index(b, cx.consts, f * s))
                }
                None => {
                    let one = const_index(b, cx.consts, 1);
                    let sm1 = b.binary("arith.subi", parts.step, one);
                    let t = b.binary("arith.addi", span, sm1);
                    let fc = const_index(b, cx.consts, f);
                    (b.binary("arith.divsi", t, parts.step), b.binary("arith.muli", parts.step, fc))
                }
            };
            let zero = const_index(b, cx.consts, 0);
            let trips = b.binary("arith.maxsi", trips, zero);
            let fc = const_index(b, cx.consts, f);
            let groups = b.binary("arith.divsi", trips, fc);
            let main_span = b.binary("arith.muli", groups, group);
            let split = b.binary("arith.addi", parts.lb, main_span);
            emit_loop(b, parts, cx, parts.lb, split, factor);
            emit_loop(b, parts, cx, split, parts.ub, 1);
            Ok(())
        }
    }
}

/// One `scf.for` over `[lb, ub)` whose body holds `factor` copies of the
/// original body at offsets `0..factor` steps.
fn emit_loop(b: &mut Builder<'_>, parts: &LoopParts, cx: &mut Emit<'_>, lb: ValueId, ub: ValueId, factor: u32) {
    let step_c = cx.consts.get(&parts.step).copied();
    let step = match (factor, step_c) {
        (1, _) => parts.step,
        (_, Some(s)) => const_index(b, cx.consts, s * factor as i64),
        (_, None) => {
            let fc = const_index(b, cx.consts, factor as i64);
            b.binary("arith.muli", parts.step, fc)
        }
    };
    let iv = b.values.create(Type::INDEX);
    let mut inner = Builder::new(b.values);
    if let Some(ii) = cx.ii {
        inner.push(Operation::new("hls.pipeline").with_operands([ii]));
    }
    for k in 0..factor as i64 {
        let iv_k = if k == 0 {
            iv
        } else {
            let off = match step_c {
                Some(s) => const_index(&mut inner, cx.consts, s * k),
                None => {
                    let kc = const_index(&mut inner, cx.consts, k);
                    inner.binary("arith.muli", parts.step, kc)
                }
            };
            inner.binary("arith.addi", iv, off)
        };
        let mut map = BTreeMap::from([(parts.body.args[0], iv_k)]);
        for op in &parts.body.ops {
            let c = clone_op(op, inner.values, &mut map);
            inner.push(c);
        }
        if let Some(acc) = cx.acc.as_ref() {
            let y = parts.yielded[0];
            let contrib = map.get(&y).copied().unwrap_or(y);
            let slot = if factor.is_multiple_of(acc.copies) {
                const_index(&mut inner, cx.consts, k % acc.copies as i64)
            } else {
                slot_of(&mut inner, cx.consts, parts, iv_k, acc.copies)
            };
            let old = inner.load(acc.buf, &[slot]);
            let new = inner.binary(acc.op, old, contrib);
            inner.store(new, acc.buf, &[slot]);
        }
    }
    inner.push(Operation::new("scf.yield"));
    let ops = inner.finish();
    b.push(
        Operation::new("scf.for")
            .with_operands([lb, ub, step])
            .with_region(Block { args: Vec::from([iv]), ops }),
    );
}

/// `((iv - lb) / step) mod copies`, the round-robin copy of an iteration.
fn slot_of(b: &mut Builder<'_>, consts: &mut BTreeMap<ValueId, i64>, parts: &LoopParts, iv: ValueId, copies: u32) -> ValueId {
    let d = if consts.get(&parts.lb) == Some(&0) {
        iv
    } else {
        b.binary("arith.subi", iv, parts.lb)
    };
    let t = if consts.get(&parts.step) == Some(&1) {
        d
    } else {
        b.binary("arith.divsi", d, parts.step)
    };
    let n = const_index(b, consts, copies as i64);
    b.binary("arith.remsi", t, n)
}

/// Integer constants defined anywhere in `block`.
pub(crate) fn integer_constants(block: &Block) -> BTreeMap<ValueId, i64> {
    let mut consts = BTreeMap::new();
    block.walk(&mut |op| {
        if let (true, Some(Attribute::Int(v, _))) = (op.is("arith.constant"), op.attr("value")) {
            consts.insert(op.results[0], *v);
        }
    });
    consts
}

/// Adds port interfaces to every kernel and rewrites annotated loops into
/// `scf.for` with pipelining, unrolling and reduction splitting.
pub fn lower_omp_loops_to_hls(m: &mut Module, opts: &HlsOptions) -> Result<(), PassError> {
    if m.target().is_none() {
        return Err(PassError::new(PASS, "expected a device module with a 'target' attribute"));
    }
    if opts.reduction_copies == Some(0) {
        return Err(PassError::new(PASS, "a reduction needs at least one copy"));
    }
    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        let name = f.sym_name().unwrap_or_default().to_string();
        let mut consts = integer_constants(f.body());
        let mut cx = LoopLowering {
            values: &mut m.values,
            consts: &mut consts,
            opts,
            func: name,
        };
        let ops = mem::take(&mut f.body_mut().ops);
        let mut lowered = cx.lower_ops(ops)?;

        let has_ports = lowered
            .iter()
            .any(|op| op.is("hls.interface") || op.is("hls.axi_protocol"));
        let ports = assign_ports(f, &m.values);
        if !has_ports && !ports.ports.is_empty() {
            let mut b = Builder::new(&mut m.values);
            let proto = b.value(
                Operation::new("hls.axi_protocol").with_attr("kind", Attribute::str(ports.protocol)),
                Type::AxiProtocol,
            );
            for (i, port) in &ports.ports {
                let arg = f.body().args[*i];
                b.push(
                    Operation::new("hls.interface")
                        .with_operands([arg, proto])
                        .with_attr("port", Attribute::str(port.as_str())),
                );
            }
            let mut ops = b.finish();
            ops.append(&mut lowered);
            lowered = ops;
        }
        f.body_mut().ops = lowered;
    }
    Ok(())
}

struct LoopLowering<'a> {
    values: &'a mut ValueTable,
    consts: &'a mut BTreeMap<ValueId, i64>,
    opts: &'a HlsOptions,
    func: String,
}

impl LoopLowering<'_> {
    fn lower_ops(&mut self, ops: Vec<Operation>) -> Result<Vec<Operation>, PassError> {
        let mut out = Vec::with_capacity(ops.len());
        for mut op in ops {
            if op.is("omp.loop") {
                out.extend(self.lower_loop(op)?);
                continue;
            }
            for r in &mut op.regions {
                let ops = mem::take(&mut r.ops);
                r.ops = self.lower_ops(ops)?;
            }
            out.push(op);
        }
        Ok(out)
    }

    fn lower_loop(&mut self, mut op: Operation) -> Result<Vec<Operation>, PassError> {
        let ann = LoopAnnotations::from_op(&op).map_err(|e| PassError::new(PASS, e))?;
        let var = op.operands.get(3).copied();
        let mut parts = LoopParts::from_omp_loop(&mut op);
        let inner = mem::take(&mut parts.body.ops);
        parts.body.ops = self.lower_ops(inner)?;
        let replaced = forward_stores(&mut parts.body, self.consts);
        for y in &mut parts.yielded {
            *y = *replaced.get(y).unwrap_or(y);
        }

        let factor = ann.simdlen.unwrap_or(1);
        if factor > 1 {
            check_unroll_dependencies(&parts.body, self.consts).map_err(|e| {
                PassError::new(PASS, format!("@{}: cannot unroll by {factor}: {e}", self.func))
            })?;
        }
        let unroll = UnrollPlan::new(factor)?;
        debug!(
            "{PASS}: @{} loop: pipelined={} unroll={} reduction={:?}",
            self.func, ann.parallel_do, factor, ann.reduction
        );

        let mut b = Builder::new(self.values);
        let ii = ann
            .parallel_do
            .then(|| b.constant(Attribute::i32(ann.ii.unwrap_or(1) as i64), Type::I32));
        let mut out = b.finish();
        match (ann.reduction, var) {
            (Some(kind), Some(var)) => {
                let copies = self
                    .opts
                    .reduction_copies
                    .unwrap_or(if ann.simdlen.is_some() { factor } else { 4 });
                let plan = ReductionPlan::new(kind.as_str(), copies)?;
                out.extend(apply_reduction_split(
                    self.values,
                    &parts,
                    &plan,
                    var,
                    &unroll,
                    ii,
                    self.consts,
                )?);
            }
            (Some(_), None) => {
                return Err(PassError::new(PASS, "reduction loop without a reduction variable"))
            }
            (None, _) => {
                let mut b = Builder::new(self.values);
                let mut cx = Emit {
                    consts: self.consts,
                    ii,
                    acc: None,
                };
                emit_unrolled(&mut b, &parts, factor, &mut cx)?;
                out.extend(b.finish());
            }
        }
        Ok(out)
    }
}
