use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::attr::Attribute;
use super::types::Type;

/// Handle of an SSA value inside one module's [`ValueTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(pub u32);

impl ValueId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Type of every value ever created in a module. Values are never removed;
/// entries for erased ops simply become unreachable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValueTable {
    types: Vec<Type>,
}

impl ValueTable {
    pub fn new() -> Self {
        ValueTable::default()
    }

    pub fn create(&mut self, ty: Type) -> ValueId {
        let id = ValueId(self.types.len() as u32);
        self.types.push(ty);
        id
    }

    pub fn ty(&self, v: ValueId) -> &Type {
        &self.types[v.index()]
    }

    pub fn set_ty(&mut self, v: ValueId, ty: Type) {
        self.types[v.index()] = ty;
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

pub type AttrMap = BTreeMap<String, Attribute>;

/// The single block of a region. Regions in this IR never hold more than
/// one block, so a region is represented directly by its block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Block {
    pub args: Vec<ValueId>,
    pub ops: Vec<Operation>,
}

impl Block {
    pub fn new() -> Self {
        Block::default()
    }

    pub fn with_args(args: Vec<ValueId>) -> Self {
        Block {
            args,
            ops: Vec::new(),
        }
    }

    pub fn with_ops(ops: Vec<Operation>) -> Self {
        Block {
            args: Vec::new(),
            ops,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty() && self.ops.is_empty()
    }

    pub fn push(&mut self, op: Operation) {
        self.ops.push(op);
    }
}

/// Generic operation: `dialect.op` name plus operands, results, attributes
/// and regions. Dialect semantics live in the registered verifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct Operation {
    pub name: String,
    pub operands: Vec<ValueId>,
    pub results: Vec<ValueId>,
    pub attributes: AttrMap,
    pub regions: Vec<Block>,
}

impl Operation {
    pub fn new(name: impl Into<String>) -> Self {
        Operation {
            name: name.into(),
            operands: Vec::new(),
            results: Vec::new(),
            attributes: AttrMap::new(),
            regions: Vec::new(),
        }
    }

    pub fn with_operands(mut self, operands: impl IntoIterator<Item = ValueId>) -> Self {
        self.operands.extend(operands);
        self
    }

    pub fn with_results(mut self, results: impl IntoIterator<Item = ValueId>) -> Self {
        self.results.extend(results);
        self
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: Attribute) -> Self {
        self.attributes.insert(key.into(), value);
        self
    }

    pub fn with_region(mut self, block: Block) -> Self {
        self.regions.push(block);
        self
    }

    pub fn dialect(&self) -> &str {
        self.name.split('.').next().unwrap_or("")
    }

    pub fn is(&self, name: &str) -> bool {
        self.name == name
    }

    pub fn attr(&self, key: &str) -> Option<&Attribute> {
        self.attributes.get(key)
    }

    pub fn str_attr(&self, key: &str) -> Option<&str> {
        self.attr(key).and_then(Attribute::as_str)
    }

    pub fn int_attr(&self, key: &str) -> Option<i64> {
        self.attr(key).and_then(Attribute::as_int)
    }

    pub fn bool_attr(&self, key: &str) -> bool {
        self.attr(key).and_then(Attribute::as_bool).unwrap_or(false)
    }

    pub fn symbol_attr(&self, key: &str) -> Option<&str> {
        self.attr(key).and_then(Attribute::as_symbol)
    }

    pub fn result(&self) -> ValueId {
        self.results[0]
    }

    /// Name of a `func.func`.
    pub fn sym_name(&self) -> Option<&str> {
        self.symbol_attr("sym_name")
    }

    pub fn body(&self) -> &Block {
        &self.regions[0]
    }

    pub fn body_mut(&mut self) -> &mut Block {
        &mut self.regions[0]
    }

    /// Pre-order walk over this op and everything nested in it.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Operation)) {
        f(self);
        for r in &self.regions {
            r.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Operation)) {
        f(self);
        for r in &mut self.regions {
            r.walk_mut(f);
        }
    }
}

impl Block {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Operation)) {
        for op in &self.ops {
            op.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Operation)) {
        for op in &mut self.ops {
            op.walk_mut(f);
        }
    }

    /// Rewrites every operand use of `from` to `to` in this block and below.
    pub fn replace_uses(&mut self, from: ValueId, to: ValueId) {
        self.walk_mut(&mut |op| {
            for o in &mut op.operands {
                if *o == from {
                    *o = to;
                }
            }
        });
    }

    pub fn replace_uses_map(&mut self, map: &BTreeMap<ValueId, ValueId>) {
        if map.is_empty() {
            return;
        }
        self.walk_mut(&mut |op| {
            for o in &mut op.operands {
                if let Some(n) = map.get(o) {
                    *o = *n;
                }
            }
        });
    }

    /// Values used inside this block but defined outside of it, in first-use order.
    pub fn free_values(&self) -> Vec<ValueId> {
        let mut defined = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        collect_free(self, &mut defined, &mut seen, &mut out);
        out
    }

    pub fn uses(&self, v: ValueId) -> bool {
        let mut found = false;
        self.walk(&mut |op| {
            if op.operands.contains(&v) {
                found = true;
            }
        });
        found
    }
}

fn collect_free(
    block: &Block,
    defined: &mut BTreeSet<ValueId>,
    seen: &mut BTreeSet<ValueId>,
    out: &mut Vec<ValueId>,
) {
    defined.extend(block.args.iter().copied());
    for op in &block.ops {
        for o in &op.operands {
            if !defined.contains(o) && seen.insert(*o) {
                out.push(*o);
            }
        }
        for r in &op.regions {
            collect_free(r, defined, seen, out);
        }
        defined.extend(op.results.iter().copied());
    }
}

/// Deep-copies `op`, giving every result and block argument a fresh value.
/// Operands found in `map` are remapped; `map` is extended with the new
/// definitions so later clones can refer to them.
pub fn clone_op(
    op: &Operation,
    values: &mut ValueTable,
    map: &mut BTreeMap<ValueId, ValueId>,
) -> Operation {
    copy_op(op, &mut |v| {
        let t = values.ty(v).clone();
        values.create(t)
    }, map)
}

pub fn clone_block(
    block: &Block,
    values: &mut ValueTable,
    map: &mut BTreeMap<ValueId, ValueId>,
) -> Block {
    copy_block(block, &mut |v| {
        let t = values.ty(v).clone();
        values.create(t)
    }, map)
}

/// Like [`clone_op`], but copies from a module whose values live in `from`
/// into one whose values live in `to`. Every operand defined outside `op`
/// must already be present in `map`.
pub fn import_op(
    op: &Operation,
    from: &ValueTable,
    to: &mut ValueTable,
    map: &mut BTreeMap<ValueId, ValueId>,
) -> Operation {
    copy_op(op, &mut |v| to.create(from.ty(v).clone()), map)
}

fn copy_op(
    op: &Operation,
    fresh: &mut dyn FnMut(ValueId) -> ValueId,
    map: &mut BTreeMap<ValueId, ValueId>,
) -> Operation {
    let operands = op
        .operands
        .iter()
        .map(|o| *map.get(o).unwrap_or(o))
        .collect();
    let regions = op
        .regions
        .iter()
        .map(|r| copy_block(r, fresh, map))
        .collect();
    let results = op
        .results
        .iter()
        .map(|r| {
            let n = fresh(*r);
            map.insert(*r, n);
            n
        })
        .collect();
    Operation {
        name: op.name.clone(),
        operands,
        results,
        attributes: op.attributes.clone(),
        regions,
    }
}

fn copy_block(
    block: &Block,
    fresh: &mut dyn FnMut(ValueId) -> ValueId,
    map: &mut BTreeMap<ValueId, ValueId>,
) -> Block {
    let args = block
        .args
        .iter()
        .map(|a| {
            let n = fresh(*a);
            map.insert(*a, n);
            n
        })
        .collect();
    let ops = block.ops.iter().map(|op| copy_op(op, fresh, map)).collect();
    Block { args, ops }
}

/// Top-level container: attributes plus one body block of functions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Module {
    pub attributes: AttrMap,
    pub body: Block,
    pub values: ValueTable,
}

impl Module {
    pub fn new() -> Self {
        Module::default()
    }

    pub fn target(&self) -> Option<&str> {
        self.attributes.get("target").and_then(Attribute::as_str)
    }

    pub fn value_type(&self, v: ValueId) -> &Type {
        self.values.ty(v)
    }

    pub fn functions(&self) -> impl Iterator<Item = &Operation> {
        self.body.ops.iter().filter(|op| op.is("func.func"))
    }

    pub fn function(&self, name: &str) -> Option<&Operation> {
        self.functions().find(|f| f.sym_name() == Some(name))
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Operation)) {
        self.body.walk(f);
    }

    /// Number of ops (at any depth) with the given name.
    pub fn count_ops(&self, name: &str) -> usize {
        let mut n = 0;
        self.walk(&mut |op| {
            if op.name == name {
                n += 1;
            }
        });
        n
    }

    /// Number of ops (at any depth) belonging to `dialect`.
    pub fn count_dialect(&self, dialect: &str) -> usize {
        let mut n = 0;
        self.walk(&mut |op| {
            if op.dialect() == dialect {
                n += 1;
            }
        });
        n
    }
}

/// Map from each result value to the op that defines it.
pub fn defining_ops(block: &Block) -> BTreeMap<ValueId, &Operation> {
    let mut map = BTreeMap::new();
    block.walk(&mut |op| {
        for r in &op.results {
            map.insert(*r, op);
        }
    });
    map
}

/// Argument names of a function, from its `arg_names` attribute when present.
pub fn function_arg_names(func: &Operation) -> Vec<String> {
    use alloc::format;
    let given: Vec<String> = func
        .attr("arg_names")
        .and_then(Attribute::as_array)
        .map(|a| {
            a.iter()
                .filter_map(|x| x.as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default();
    (0..func.body().args.len())
        .map(|i| given.get(i).cloned().unwrap_or_else(|| format!("arg{i}")))
        .collect()
}
