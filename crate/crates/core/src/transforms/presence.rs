//! Host-side presence counters behind `data_acquire`, `data_release` and
//! `data_check_exists`.
//!
//! Each buffer key gets an `i64` counter in a rank-0 host memref. Acquire
//! and release update it and keep the device op; a presence check becomes
//! `counter > 0`. When the number of acquires that dominate a check is
//! statically at least one, the check folds to `true` and the `scf.if`
//! guards built on it are inlined.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::mem;

use super::{Builder, PassError};
use crate::ir::{Attribute, Block, Module, Operation, ScalarType, Type, ValueId, ValueTable};

const PASS: &str = "materialize-presence-counters";

type Key = (String, i64);

/// Statically known minimum counter value per key.
type Bounds = BTreeMap<Key, u64>;

fn key_of(op: &Operation) -> Option<Key> {
    Some((op.str_attr("name")?.to_string(), op.int_attr("memory_space")?))
}

fn is_presence_op(op: &Operation) -> bool {
    matches!(
        op.name.as_str(),
        "device.data_acquire" | "device.data_release" | "device.data_check_exists"
    )
}

pub fn materialize_presence_counters(m: &mut Module) -> Result<(), PassError> {
    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        let mut keys: Vec<Key> = Vec::new();
        f.body().walk(&mut |op| {
            if is_presence_op(op) {
                if let Some(k) = key_of(op) {
                    if !keys.contains(&k) {
                        keys.push(k);
                    }
                }
            }
        });
        if keys.is_empty() {
            continue;
        }

        let mut pro = Builder::new(&mut m.values);
        let zero = pro.constant(Attribute::i64(0), Type::I64);
        let mut counters = BTreeMap::new();
        for k in keys {
            let c = pro.value(
                Operation::new("memref.alloca"),
                Type::memref(Vec::new(), ScalarType::I64, 0),
            );
            pro.store(zero, c, &[]);
            counters.insert(k, c);
        }
        let prologue = pro.finish();

        let mut cx = Counters {
            values: &mut m.values,
            counters,
            known_true: BTreeSet::new(),
            forward: BTreeMap::new(),
        };
        let body = f.body_mut();
        let ops = mem::take(&mut body.ops);
        let mut state = Bounds::new();
        let rewritten = cx.rewrite(ops, &mut state)?;
        body.ops = prologue;
        body.ops.extend(rewritten);
        body.replace_uses_map(&cx.forward);

        // Folded checks whose guards were all inlined leave dead constants.
        let dead: Vec<ValueId> = cx
            .known_true
            .iter()
            .copied()
            .filter(|v| !body.uses(*v))
            .collect();
        drop_constants(body, &dead);
    }
    Ok(())
}

fn drop_constants(block: &mut Block, dead: &[ValueId]) {
    block
        .ops
        .retain(|op| !(op.is("arith.constant") && op.results.iter().any(|r| dead.contains(r))));
    for op in &mut block.ops {
        for r in &mut op.regions {
            drop_constants(r, dead);
        }
    }
}

struct Counters<'a> {
    values: &'a mut ValueTable,
    counters: BTreeMap<Key, ValueId>,
    known_true: BTreeSet<ValueId>,
    forward: BTreeMap<ValueId, ValueId>,
}

impl Counters<'_> {
    fn resolve(&self, v: ValueId) -> ValueId {
        let mut v = v;
        while let Some(n) = self.forward.get(&v) {
            v = *n;
        }
        v
    }

    fn rewrite(&mut self, ops: Vec<Operation>, state: &mut Bounds) -> Result<Vec<Operation>, PassError> {
        let mut out = Vec::with_capacity(ops.len());
        for mut op in ops {
            match op.name.as_str() {
                "device.data_acquire" | "device.data_release" => {
                    let key = key_of(&op).ok_or_else(|| PassError::new(PASS, "malformed buffer key"))?;
                    let acquire = op.is("device.data_acquire");
                    let lb = state.entry(key.clone()).or_insert(0);
                    if acquire {
                        *lb += 1;
                    } else if *lb == 0 {
                        return Err(PassError::new(
                            PASS,
                            format!("release of '{}' without a dominating acquire", key.0),
                        ));
                    } else {
                        *lb -= 1;
                    }
                    let c = self.counters[&key];
                    let mut b = Builder::new(self.values);
                    let old = b.load(c, &[]);
                    let one = b.constant(Attribute::i64(1), Type::I64);
                    let new = b.binary(if acquire { "arith.addi" } else { "arith.subi" }, old, one);
                    b.store(new, c, &[]);
                    out.extend(b.finish());
                    out.push(op);
                }
                "device.data_check_exists" => {
                    let key = key_of(&op).ok_or_else(|| PassError::new(PASS, "malformed buffer key"))?;
                    let r = op.results[0];
                    if state.get(&key).copied().unwrap_or(0) > 0 {
                        out.push(
                            Operation::new("arith.constant")
                                .with_attr("value", Attribute::Bool(true))
                                .with_results([r]),
                        );
                        self.known_true.insert(r);
                    } else {
                        let c = self.counters[&key];
                        let mut b = Builder::new(self.values);
                        let v = b.load(c, &[]);
                        let z = b.constant(Attribute::i64(0), Type::I64);
                        b.push(
                            Operation::new("arith.cmpi")
                                .with_operands([v, z])
                                .with_attr("predicate", Attribute::str("sgt"))
                                .with_results([r]),
                        );
                        out.extend(b.finish());
                    }
                }
                "scf.if" if self.known_true.contains(&self.resolve(op.operands[0])) => {
                    let mut then = mem::take(&mut op.regions[0]);
                    let yielded = match then.ops.pop() {
                        Some(y) if y.is("scf.yield") => y.operands,
                        Some(other) => {
                            then.ops.push(other);
                            Vec::new()
                        }
                        None => Vec::new(),
                    };
                    let inlined = self.rewrite(then.ops, state)?;
                    out.extend(inlined);
                    for (r, y) in op.results.iter().zip(yielded) {
                        let y = self.resolve(y);
                        self.forward.insert(*r, y);
                    }
                }
                "scf.if" => {
                    let mut ends = Vec::new();
                    for r in &mut op.regions {
                        let mut s = state.clone();
                        let ops = mem::take(&mut r.ops);
                        r.ops = self.rewrite(ops, &mut s)?;
                        ends.push(s);
                    }
                    *state = meet(state, &ends);
                    out.push(op);
                }
                _ if !op.regions.is_empty() => {
                    // Loops may run zero or many times: keep a key's bound
                    // only if one pass through the body cannot lower it.
                    let mut ends = Vec::new();
                    for r in &mut op.regions {
                        let mut s = state.clone();
                        let ops = mem::take(&mut r.ops);
                        r.ops = self.rewrite(ops, &mut s)?;
                        ends.push(s);
                    }
                    let before = state.clone();
                    for (k, v) in state.iter_mut() {
                        let lowered = ends
                            .iter()
                            .any(|e| e.get(k).copied().unwrap_or(0) < before[k]);
                        if lowered {
                            *v = 0;
                        }
                    }
                    out.push(op);
                }
                _ => out.push(op),
            }
        }
        Ok(out)
    }
}

/// Per-key minimum over the end states of alternative regions.
fn meet(before: &Bounds, ends: &[Bounds]) -> Bounds {
    let mut keys: BTreeSet<&Key> = before.keys().collect();
    for e in ends {
        keys.extend(e.keys());
    }
    keys.into_iter()
        .map(|k| {
            let v = ends
                .iter()
                .map(|e| e.get(k).copied().unwrap_or(0))
                .min()
                .unwrap_or_else(|| before.get(k).copied().unwrap_or(0));
            (k.clone(), v)
        })
        .collect()
}
