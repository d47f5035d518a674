//! Structural comparison of modules, independent of value numbering.

use alloc::collections::BTreeMap;

use super::module::{Block, Module, Operation, ValueId};

/// True iff `a` and `b` have the same attributes, ops, types and use-def
/// structure, up to a consistent renaming of values.
pub fn structurally_equal(a: &Module, b: &Module) -> bool {
    if a.attributes != b.attributes {
        return false;
    }
    let mut cmp = Comparator {
        a,
        b,
        map: BTreeMap::new(),
    };
    cmp.block(&a.body, &b.body)
}

struct Comparator<'m> {
    a: &'m Module,
    b: &'m Module,
    map: BTreeMap<ValueId, ValueId>,
}

impl Comparator<'_> {
    fn bind(&mut self, x: ValueId, y: ValueId) -> bool {
        if self.a.value_type(x) != self.b.value_type(y) {
            return false;
        }
        match self.map.insert(x, y) {
            Some(prev) => prev == y,
            None => true,
        }
    }

    fn block(&mut self, x: &Block, y: &Block) -> bool {
        if x.args.len() != y.args.len() || x.ops.len() != y.ops.len() {
            return false;
        }
        for (p, q) in x.args.iter().zip(&y.args) {
            if !self.bind(*p, *q) {
                return false;
            }
        }
        x.ops.iter().zip(&y.ops).all(|(p, q)| self.op(p, q))
    }

    fn op(&mut self, x: &Operation, y: &Operation) -> bool {
        if x.name != y.name
            || x.attributes != y.attributes
            || x.operands.len() != y.operands.len()
            || x.results.len() != y.results.len()
            || x.regions.len() != y.regions.len()
        {
            return false;
        }
        for (p, q) in x.operands.iter().zip(&y.operands) {
            if self.map.get(p) != Some(q) {
                return false;
            }
        }
        for (p, q) in x.regions.iter().zip(&y.regions) {
            if !self.block(p, q) {
                return false;
            }
        }
        x.results
            .iter()
            .zip(&y.results)
            .all(|(p, q)| self.bind(*p, *q))
    }
}
