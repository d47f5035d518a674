//! Loop-body canonicalisation: store-to-load forwarding within one
//! iteration, and the dependency test that guards unrolling.
//!
//! Indices are classified as `iv + c`, a constant, or an opaque value.
//! Two accesses with equal classifications touch the same cell; `iv + c1`
//! and `iv + c2` (or two distinct constants) never do.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ir::{Block, ValueId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessForm {
    /// Induction variable plus a constant offset.
    Iv(i64),
    Const(i64),
    /// Anything else; equal only to the same SSA value.
    Opaque(ValueId),
}

impl AccessForm {
    fn distinct(self, other: AccessForm) -> bool {
        match (self, other) {
            (AccessForm::Iv(a), AccessForm::Iv(b)) => a != b,
            (AccessForm::Const(a), AccessForm::Const(b)) => a != b,
            _ => false,
        }
    }
}

/// Never the same cell when some dimension is provably different.
fn disjoint(a: &[AccessForm], b: &[AccessForm]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.distinct(*y))
}

pub(crate) struct Forms<'c> {
    iv: ValueId,
    consts: &'c BTreeMap<ValueId, i64>,
    derived: BTreeMap<ValueId, AccessForm>,
}

impl<'c> Forms<'c> {
    pub fn new(iv: ValueId, consts: &'c BTreeMap<ValueId, i64>) -> Self {
        Forms {
            iv,
            consts,
            derived: BTreeMap::new(),
        }
    }

    pub fn of(&self, v: ValueId) -> AccessForm {
        if v == self.iv {
            return AccessForm::Iv(0);
        }
        if let Some(c) = self.consts.get(&v) {
            return AccessForm::Const(*c);
        }
        self.derived.get(&v).copied().unwrap_or(AccessForm::Opaque(v))
    }

    /// Records the form of an index computed by `addi`/`subi`.
    pub fn note(&mut self, name: &str, operands: &[ValueId], result: ValueId) {
        let (a, b) = match operands {
            [a, b] => (self.of(*a), self.of(*b)),
            _ => return,
        };
        let f = match (name, a, b) {
            ("arith.addi", AccessForm::Iv(x), AccessForm::Const(c))
            | ("arith.addi", AccessForm::Const(c), AccessForm::Iv(x)) => AccessForm::Iv(x.wrapping_add(c)),
            ("arith.subi", AccessForm::Iv(x), AccessForm::Const(c)) => AccessForm::Iv(x.wrapping_sub(c)),
            ("arith.addi", AccessForm::Const(x), AccessForm::Const(y)) => AccessForm::Const(x.wrapping_add(y)),
            ("arith.subi", AccessForm::Const(x), AccessForm::Const(y)) => AccessForm::Const(x.wrapping_sub(y)),
            _ => return,
        };
        self.derived.insert(result, f);
    }

    fn index(&self, idx: &[ValueId]) -> Vec<AccessForm> {
        idx.iter().map(|v| self.of(*v)).collect()
    }
}

/// Replaces loads of a cell stored earlier in the same iteration by the
/// stored value. Only top-level ops of `body` are considered; any op with
/// regions ends the forwarding window. Returns the replacements made, which
/// the caller applies to values yielded from the body.
pub fn forward_stores(
    body: &mut Block,
    consts: &BTreeMap<ValueId, i64>,
) -> BTreeMap<ValueId, ValueId> {
    let Some(&iv) = body.args.first() else {
        return BTreeMap::new();
    };
    let mut forms = Forms::new(iv, consts);
    let mut known: Vec<(ValueId, Vec<AccessForm>, ValueId)> = Vec::new();
    let mut replaced = BTreeMap::new();
    let resolve = |r: &BTreeMap<ValueId, ValueId>, v: ValueId| *r.get(&v).unwrap_or(&v);
    let ops = core::mem::take(&mut body.ops);
    for mut op in ops {
        for o in &mut op.operands {
            *o = resolve(&replaced, *o);
        }
        match op.name.as_str() {
            "arith.addi" | "arith.subi" => {
                forms.note(&op.name, &op.operands, op.results[0]);
            }
            "memref.store" => {
                let (v, mem) = (op.operands[0], op.operands[1]);
                let idx = forms.index(&op.operands[2..]);
                known.retain(|(m, i, _)| *m != mem || disjoint(i, &idx));
                known.push((mem, idx, v));
            }
            "memref.load" => {
                let mem = op.operands[0];
                let idx = forms.index(&op.operands[1..]);
                if let Some((_, _, v)) = known.iter().find(|(m, i, _)| *m == mem && *i == idx) {
                    replaced.insert(op.results[0], *v);
                    continue;
                }
            }
            _ if !op.regions.is_empty() || op.is("func.call") => known.clear(),
            _ => {}
        }
        body.ops.push(op);
    }
    if !replaced.is_empty() {
        body.replace_uses_map(&replaced);
    }
    replaced
}

/// Refuses to unroll when the body writes an induction-indexed cell of an
/// array that it also reads at a different or unknown index.
pub fn check_unroll_dependencies(
    body: &Block,
    consts: &BTreeMap<ValueId, i64>,
) -> Result<(), String> {
    let Some(&iv) = body.args.first() else {
        return Ok(());
    };
    let mut forms = Forms::new(iv, consts);
    let mut stores = Vec::new();
    let mut loads = Vec::new();
    for op in &body.ops {
        match op.name.as_str() {
            "arith.addi" | "arith.subi" => forms.note(&op.name, &op.operands, op.results[0]),
            "memref.store" => stores.push((op.operands[1], forms.index(&op.operands[2..]))),
            "memref.load" => loads.push((op.operands[0], forms.index(&op.operands[1..]))),
            _ => {}
        }
        // Accesses inside nested regions have unknown indices.
        for r in &op.regions {
            r.walk(&mut |inner| match inner.name.as_str() {
                "memref.store" => stores.push((
                    inner.operands[1],
                    inner.operands[2..].iter().map(|v| AccessForm::Opaque(*v)).collect(),
                )),
                "memref.load" => loads.push((
                    inner.operands[0],
                    inner.operands[1..].iter().map(|v| AccessForm::Opaque(*v)).collect(),
                )),
                _ => {}
            });
        }
    }
    for (mem, sidx) in &stores {
        if !sidx.iter().any(|f| matches!(f, AccessForm::Iv(_))) {
            continue;
        }
        for (lmem, lidx) in &loads {
            if lmem == mem && lidx != sidx {
                return Err(format!(
                    "buffer {mem} is written at {} and read at {}; iterations are not independent",
                    describe(sidx),
                    describe(lidx)
                ));
            }
        }
    }
    Ok(())
}

fn describe(idx: &[AccessForm]) -> String {
    let parts: Vec<String> = idx
        .iter()
        .map(|f| match f {
            AccessForm::Iv(0) => "iv".into(),
            AccessForm::Iv(c) => format!("iv{c:+}"),
            AccessForm::Const(c) => format!("{c}"),
            AccessForm::Opaque(v) => format!("{v}"),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}
