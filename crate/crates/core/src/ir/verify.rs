use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::module::{defining_ops, Block, Module, Operation, ValueId};
use super::types::{MemRefType, Type};
use crate::dialects::{OpContext, Registry};

/// One failed structural or dialect rule, located by op path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Checks SSA dominance, type sanity and every op's dialect verifier.
/// Returns an empty list iff the module is valid.
pub fn verify_module(m: &Module) -> Vec<Violation> {
    verify_module_with(m, &crate::dialects::standard_registry())
}

pub fn verify_module_with(m: &Module, registry: &Registry) -> Vec<Violation> {
    let mut v = Verifier {
        module: m,
        registry,
        defs: defining_ops(&m.body),
        scopes: Vec::new(),
        defined_ever: BTreeSet::new(),
        out: Vec::new(),
    };
    if let Some(t) = m.attributes.get("target") {
        match t.as_str() {
            Some(s) if !s.is_empty() => {}
            _ => v.out.push(Violation {
                path: "module".into(),
                message: "attribute 'target' must be a non-empty string".into(),
            }),
        }
    }
    let mut ancestors = Vec::new();
    v.scopes.push((BTreeSet::new(), true));
    v.block(&m.body, &mut ancestors, "module");
    v.out
}

struct Verifier<'m> {
    module: &'m Module,
    registry: &'m Registry,
    defs: BTreeMap<ValueId, &'m Operation>,
    scopes: Vec<(BTreeSet<ValueId>, bool)>,
    defined_ever: BTreeSet<ValueId>,
    out: Vec<Violation>,
}

fn op_label(op: &Operation, index: usize) -> String {
    match op.sym_name() {
        Some(s) if op.is("func.func") => format!("func.func @{s}"),
        _ => format!("{}#{index}", op.name),
    }
}

fn type_ok(t: &Type) -> bool {
    match t {
        Type::Scalar(s) => s.is_valid(),
        Type::MemRef(MemRefType { shape, element, .. }) => {
            element.is_valid() && shape.iter().all(|d| d.is_none_or(|n| n > 0))
        }
        _ => true,
    }
}

impl<'m> Verifier<'m> {
    fn visible(&self, v: ValueId) -> bool {
        for (set, isolated) in self.scopes.iter().rev() {
            if set.contains(&v) {
                return true;
            }
            if *isolated {
                break;
            }
        }
        false
    }

    fn define(&mut self, v: ValueId, path: &str) {
        if !self.defined_ever.insert(v) {
            self.out.push(Violation {
                path: path.into(),
                message: format!("value {v} is defined more than once"),
            });
        }
        if v.index() >= self.module.values.len() {
            self.out.push(Violation {
                path: path.into(),
                message: format!("value {v} has no entry in the value table"),
            });
            return;
        }
        if !type_ok(self.module.value_type(v)) {
            self.out.push(Violation {
                path: path.into(),
                message: format!("value {v} has malformed type {}", self.module.value_type(v)),
            });
        }
        self.scopes
            .last_mut()
            .expect("verifier scope stack is never empty")
            .0
            .insert(v);
    }

    fn block(&mut self, block: &'m Block, ancestors: &mut Vec<&'m Operation>, path: &str) {
        for a in &block.args {
            self.define(*a, path);
        }
        for (i, op) in block.ops.iter().enumerate() {
            let op_path = format!("{path} > {}", op_label(op, i));
            for (k, o) in op.operands.iter().enumerate() {
                if !self.visible(*o) {
                    self.out.push(Violation {
                        path: op_path.clone(),
                        message: format!("operand #{k} ({o}) does not dominate this use"),
                    });
                }
            }
            match self.registry.get(&op.name) {
                None => self.out.push(Violation {
                    path: op_path.clone(),
                    message: format!("unregistered operation '{}'", op.name),
                }),
                Some(check) => {
                    let ctx = OpContext {
                        module: self.module,
                        ancestors,
                        siblings: &block.ops,
                        index: i,
                        defs: &self.defs,
                    };
                    for message in check(op, &ctx) {
                        self.out.push(Violation {
                            path: op_path.clone(),
                            message,
                        });
                    }
                }
            }
            let isolated = op.is("func.func");
            ancestors.push(op);
            for r in &op.regions {
                self.scopes.push((BTreeSet::new(), isolated));
                self.block(r, ancestors, &op_path);
                self.scopes.pop();
            }
            ancestors.pop();
            for r in &op.results {
                self.define(*r, &op_path);
            }
        }
    }
}
