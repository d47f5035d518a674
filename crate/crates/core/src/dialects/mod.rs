//! Op definitions and verifiers for `func`, `arith`, `scf`, `memref`, the
//! OpenMP offload subset (`omp`), the host/device management dialect
//! (`device`) and the HLS structure dialect (`hls`).
//!
//! Ops are stored generically; each dialect contributes one verifier
//! callback per op name to a [`Registry`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ir::{Module, Operation, Type, ValueId};

pub mod arith;
pub mod device;
pub mod func;
pub mod hls;
pub mod memref;
pub mod omp;
pub mod scf;

pub use device::verify_device_op;
pub use hls::verify_hls_op;
pub use omp::{MapKind, ReductionKind};

/// What a verifier callback can see about an op's surroundings.
pub struct OpContext<'a> {
    pub module: &'a Module,
    /// Enclosing ops, outermost first.
    pub ancestors: &'a [&'a Operation],
    /// All ops of the block containing the op.
    pub siblings: &'a [Operation],
    /// Position of the op within `siblings`.
    pub index: usize,
    pub defs: &'a BTreeMap<ValueId, &'a Operation>,
}

impl<'a> OpContext<'a> {
    pub fn ty(&self, v: ValueId) -> &'a Type {
        self.module.value_type(v)
    }

    pub fn def(&self, v: ValueId) -> Option<&'a Operation> {
        self.defs.get(&v).copied()
    }

    pub fn parent(&self) -> Option<&'a Operation> {
        self.ancestors.last().copied()
    }

    pub fn is_last_in_block(&self) -> bool {
        self.index + 1 == self.siblings.len()
    }

    /// Constant integer value of `v` if it is produced by `arith.constant`.
    pub fn const_int(&self, v: ValueId) -> Option<i64> {
        let d = self.def(v)?;
        if d.is("arith.constant") {
            d.int_attr("value")
        } else {
            None
        }
    }
}

pub type VerifyFn = fn(&Operation, &OpContext<'_>) -> Vec<String>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("operation '{0}' is already registered")]
    Duplicate(String),
}

/// Op name → verifier. Immutable once built; share it by reference.
#[derive(Clone, Default)]
pub struct Registry {
    ops: BTreeMap<String, VerifyFn>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn register(&mut self, name: &str, verify: VerifyFn) -> Result<(), RegistryError> {
        if self.ops.contains_key(name) {
            return Err(RegistryError::Duplicate(name.into()));
        }
        self.ops.insert(name.into(), verify);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.ops.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<VerifyFn> {
        self.ops.get(name).copied()
    }

    pub fn op_names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }
}

/// Adds every dialect of this crate to `registry`.
pub fn register_dialects(mut registry: Registry) -> Result<Registry, RegistryError> {
    func::register(&mut registry)?;
    arith::register(&mut registry)?;
    scf::register(&mut registry)?;
    memref::register(&mut registry)?;
    omp::register(&mut registry)?;
    device::register(&mut registry)?;
    hls::register(&mut registry)?;
    Ok(registry)
}

/// A fresh registry holding all dialects.
pub fn standard_registry() -> Registry {
    register_dialects(Registry::new()).expect("built-in dialects have unique op names")
}

// ---- helpers shared by the dialect verifiers ----

pub(crate) struct Checks<'c, 'a> {
    pub op: &'c Operation,
    pub ctx: &'c OpContext<'a>,
    pub errs: Vec<String>,
}

impl<'c, 'a> Checks<'c, 'a> {
    pub fn new(op: &'c Operation, ctx: &'c OpContext<'a>) -> Self {
        Checks {
            op,
            ctx,
            errs: Vec::new(),
        }
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.errs.push(msg.into());
    }

    pub fn operands(&mut self, n: usize) -> bool {
        if self.op.operands.len() != n {
            self.fail(format!(
                "expected {n} operand(s), found {}",
                self.op.operands.len()
            ));
            return false;
        }
        true
    }

    pub fn results(&mut self, n: usize) -> bool {
        if self.op.results.len() != n {
            self.fail(format!(
                "expected {n} result(s), found {}",
                self.op.results.len()
            ));
            return false;
        }
        true
    }

    pub fn regions(&mut self, n: usize) -> bool {
        if self.op.regions.len() != n {
            self.fail(format!(
                "expected {n} region(s), found {}",
                self.op.regions.len()
            ));
            return false;
        }
        true
    }

    pub fn operand_ty(&self, i: usize) -> &'a Type {
        self.ctx.ty(self.op.operands[i])
    }

    pub fn result_ty(&self, i: usize) -> &'a Type {
        self.ctx.ty(self.op.results[i])
    }

    pub fn operand_is(&mut self, i: usize, pred: impl Fn(&Type) -> bool, what: &str) {
        let t = self.operand_ty(i);
        if !pred(t) {
            self.fail(format!("operand #{i} must be {what}, found {t}"));
        }
    }

    pub fn result_is(&mut self, i: usize, pred: impl Fn(&Type) -> bool, what: &str) {
        let t = self.result_ty(i);
        if !pred(t) {
            self.fail(format!("result #{i} must be {what}, found {t}"));
        }
    }

    pub fn str_attr(&mut self, key: &str) -> Option<&'c str> {
        match self.op.str_attr(key) {
            Some(s) if !s.is_empty() => Some(s),
            Some(_) => {
                self.fail(format!("attribute '{key}' must be a non-empty string"));
                None
            }
            None => {
                self.fail(format!("missing string attribute '{key}'"));
                None
            }
        }
    }

    pub fn int_attr(&mut self, key: &str) -> Option<i64> {
        let v = self.op.int_attr(key);
        if v.is_none() {
            self.fail(format!("missing integer attribute '{key}'"));
        }
        v
    }

    pub fn parent_is(&mut self, allowed: &[&str]) {
        match self.ctx.parent() {
            Some(p) if allowed.contains(&p.name.as_str()) => {}
            Some(p) => self.fail(format!(
                "must be nested directly in one of {allowed:?}, found in '{}'",
                p.name
            )),
            None => self.fail(format!(
                "must be nested directly in one of {allowed:?}, found at module level"
            )),
        }
    }

    pub fn terminator(&mut self) {
        if !self.ctx.is_last_in_block() {
            self.fail("terminator must be the last operation of its block");
        }
    }

    /// Region `r` ends with an op named `term`.
    pub fn region_ends_with(&mut self, r: usize, term: &str) {
        match self.op.regions.get(r).and_then(|b| b.ops.last()) {
            Some(last) if last.is(term) => {}
            _ => self.fail(format!("region #{r} must end with '{term}'")),
        }
    }

    pub fn finish(self) -> Vec<String> {
        self.errs
    }
}

pub(crate) fn is_index(t: &Type) -> bool {
    t.is_index()
}

pub(crate) fn is_memref(t: &Type) -> bool {
    t.is_memref()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_registry_resolves_device_alloc() {
        let reg = register_dialects(Registry::new()).unwrap();
        assert!(reg.contains("device.alloc"));
        assert!(reg.contains("hls.pipeline"));
        assert!(reg.contains("omp.map_info"));
        assert!(!reg.contains("device.teleport"));
    }

    #[test]
    fn double_registration_is_rejected() {
        let mut reg = Registry::new();
        hls::register(&mut reg).unwrap();
        let err = reg.register("hls.pipeline", |_, _| Vec::new()).unwrap_err();
        assert_eq!(err, RegistryError::Duplicate("hls.pipeline".into()));
        assert!(register_dialects(reg).is_err());
    }
}
