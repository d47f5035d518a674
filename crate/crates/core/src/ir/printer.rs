//! Deterministic textual form of a [`Module`].
//!
//! Values are renamed `%0, %1, ...` in definition order, restarting at every
//! `func.func` since functions are isolated from the enclosing module.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt::Write;

use super::module::{AttrMap, Block, Module, Operation, ValueId};

pub fn print_module(m: &Module) -> String {
    let mut p = Printer {
        module: m,
        out: String::new(),
        names: BTreeMap::new(),
        next: 0,
    };
    p.module();
    p.out
}

/// Prints a single operation (with nested regions) at indentation 0, using
/// fresh numbering. Handy for diagnostics.
pub fn print_op(m: &Module, op: &Operation) -> String {
    let mut p = Printer {
        module: m,
        out: String::new(),
        names: BTreeMap::new(),
        next: 0,
    };
    p.op(op, 0);
    p.out
}

struct Printer<'a> {
    module: &'a Module,
    out: String,
    names: BTreeMap<ValueId, u32>,
    next: u32,
}

impl Printer<'_> {
    fn module(&mut self) {
        self.out.push_str("module");
        if !self.module.attributes.is_empty() {
            self.out.push_str(" attributes ");
            self.attr_dict(&self.module.attributes, &[]);
        }
        self.out.push_str(" {\n");
        for op in &self.module.body.ops {
            self.op(op, 2);
        }
        self.out.push_str("}\n");
    }

    fn define(&mut self, v: ValueId) -> u32 {
        let n = self.next;
        self.next += 1;
        self.names.insert(v, n);
        n
    }

    fn value(&mut self, v: ValueId) {
        match self.names.get(&v) {
            Some(n) => {
                let _ = write!(self.out, "%{n}");
            }
            // Only reachable for unverified modules.
            None => {
                let _ = write!(self.out, "%<undef:{}>", v.0);
            }
        }
    }

    fn indent(&mut self, n: usize) {
        for _ in 0..n {
            self.out.push(' ');
        }
    }

    fn attr_dict(&mut self, attrs: &AttrMap, skip: &[&str]) {
        self.out.push('{');
        let mut first = true;
        for (k, v) in attrs {
            if skip.contains(&k.as_str()) {
                continue;
            }
            if !first {
                self.out.push_str(", ");
            }
            first = false;
            let _ = write!(self.out, "{k} = {v}");
        }
        self.out.push('}');
    }

    fn ty_of(&self, v: ValueId) -> String {
        alloc::format!("{}", self.module.value_type(v))
    }

    fn op(&mut self, op: &Operation, indent: usize) {
        if op.is("func.func") && op.regions.len() == 1 && op.sym_name().is_some() {
            self.func(op, indent);
            return;
        }
        self.indent(indent);
        if !op.results.is_empty() {
            for (i, r) in op.results.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                let n = self.define(*r);
                let _ = write!(self.out, "%{n}");
            }
            self.out.push_str(" = ");
        }
        self.out.push_str(&op.name);
        let bare = op.operands.is_empty()
            && op.results.is_empty()
            && op.attributes.is_empty()
            && op.regions.is_empty();
        if bare {
            self.out.push('\n');
            return;
        }
        self.out.push('(');
        for (i, o) in op.operands.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.value(*o);
        }
        self.out.push(')');
        if !op.attributes.is_empty() {
            self.out.push_str(" <");
            self.attr_dict(&op.attributes, &[]);
            self.out.push('>');
        }
        if !op.regions.is_empty() {
            self.out.push_str(" (");
            for (i, r) in op.regions.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                self.region(r, indent);
            }
            self.out.push(')');
        }
        self.out.push_str(" : (");
        for (i, o) in op.operands.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            let t = self.ty_of(*o);
            self.out.push_str(&t);
        }
        self.out.push_str(") -> ");
        match op.results.len() {
            0 => self.out.push_str("()"),
            1 => {
                let t = self.ty_of(op.results[0]);
                self.out.push_str(&t);
            }
            _ => {
                self.out.push('(');
                for (i, r) in op.results.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    let t = self.ty_of(*r);
                    self.out.push_str(&t);
                }
                self.out.push(')');
            }
        }
        self.out.push('\n');
    }

    fn region(&mut self, block: &Block, indent: usize) {
        self.out.push_str("{\n");
        if !block.args.is_empty() {
            self.indent(indent);
            self.out.push_str("^bb0(");
            for (i, a) in block.args.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                let n = self.define(*a);
                let t = self.ty_of(*a);
                let _ = write!(self.out, "%{n}: {t}");
            }
            self.out.push_str("):\n");
        }
        for op in &block.ops {
            self.op(op, indent + 2);
        }
        self.indent(indent);
        self.out.push('}');
    }

    fn func(&mut self, op: &Operation, indent: usize) {
        let saved_names = core::mem::take(&mut self.names);
        let saved_next = self.next;
        self.next = 0;

        self.indent(indent);
        let name = op.sym_name().unwrap_or_default();
        let _ = write!(self.out, "func.func @{name}(");
        let body = op.body();
        for (i, a) in body.args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            let n = self.define(*a);
            let t = self.ty_of(*a);
            let _ = write!(self.out, "%{n}: {t}");
        }
        self.out.push(')');
        if op.attributes.keys().any(|k| k != "sym_name") {
            self.out.push_str(" attributes ");
            self.attr_dict(&op.attributes, &["sym_name"]);
        }
        self.out.push_str(" {\n");
        for inner in &body.ops {
            self.op(inner, indent + 2);
        }
        self.indent(indent);
        self.out.push_str("}\n");

        self.names = saved_names;
        self.next = saved_next;
    }
}

impl core::fmt::Display for Module {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&print_module(self))
    }
}
