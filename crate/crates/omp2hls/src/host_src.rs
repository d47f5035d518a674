//! Renders a lowered host module as an OpenCL-flavoured C++ listing.
//!
//! The listing is for reading, not compiling. Each line ends with
//! `// op N`, the pre-order index of the host op it came from (the
//! function op is `op 0` of the first function). Closing braces carry the
//! index of the op that opened them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use omp2hls_core::ir::{function_arg_names, Attribute, Module, Operation, ScalarType, Type, ValueId};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HostSourceError {
    #[error("op {index}: '{name}' has no host-source rendering")]
    Unsupported { index: usize, name: String },
}

pub const HEADER: &str = "\
// host driver emitted by omp2hls
#include <CL/opencl.hpp>
#include <algorithm>
#include <cstdint>
#include <vector>
#include \"omp2hls_runtime.hpp\"

using omp2hls::context;
using omp2hls::program;
using omp2hls::queue;
";

pub fn emit_host_source(host: &Module) -> Result<String, HostSourceError> {
    let mut e = Emitter {
        m: host,
        out: String::from(HEADER),
        next: 0,
        depth: 0,
        names: BTreeMap::new(),
    };
    for f in host.functions() {
        e.out.push('\n');
        e.func(f)?;
    }
    Ok(e.out)
}

struct Emitter<'m> {
    m: &'m Module,
    out: String,
    next: usize,
    depth: usize,
    names: BTreeMap<ValueId, String>,
}

fn c_scalar(t: ScalarType) -> &'static str {
    match t {
        ScalarType::Int(1) => "bool",
        ScalarType::Int(8) => "int8_t",
        ScalarType::Int(16) => "int16_t",
        ScalarType::Int(32) => "int32_t",
        ScalarType::Int(_) | ScalarType::Index => "int64_t",
        ScalarType::Float(32) => "float",
        ScalarType::Float(_) => "double",
    }
}

fn c_type(t: &Type) -> String {
    match t {
        Type::Scalar(s) => c_scalar(*s).into(),
        Type::MemRef(m) if m.memory_space == 0 => format!("{}*", c_scalar(m.element)),
        Type::MemRef(_) => "cl::Buffer".into(),
        Type::KernelHandle => "cl::Kernel".into(),
        Type::DmaToken => "cl::Event".into(),
        Type::AxiProtocol | Type::Bounds => "void*".into(),
    }
}

fn binary_operator(name: &str) -> Option<&'static str> {
    Some(match name {
        "arith.addi" | "arith.addf" => "+",
        "arith.subi" | "arith.subf" => "-",
        "arith.muli" | "arith.mulf" => "*",
        "arith.divsi" | "arith.divui" | "arith.divf" => "/",
        "arith.remsi" | "arith.remui" => "%",
        "arith.andi" => "&",
        "arith.ori" => "|",
        "arith.xori" => "^",
        _ => return None,
    })
}

fn compare_operator(predicate: &str) -> &'static str {
    match predicate {
        "eq" | "oeq" => "==",
        "ne" | "one" => "!=",
        "slt" | "ult" | "olt" => "<",
        "sle" | "ule" | "ole" => "<=",
        "sgt" | "ugt" | "ogt" => ">",
        _ => ">=",
    }
}

fn literal(a: &Attribute) -> String {
    match a {
        Attribute::Int(v, ScalarType::Int(1)) => (if *v != 0 { "true" } else { "false" }).into(),
        Attribute::Bool(b) => b.to_string(),
        Attribute::Int(v, _) => v.to_string(),
        Attribute::Float(v, ScalarType::Float(32)) => float_literal(*v, "f"),
        Attribute::Float(v, _) => float_literal(*v, ""),
        Attribute::Str(s) | Attribute::Symbol(s) => format!("{s:?}"),
        Attribute::Array(_) => "{}".into(),
    }
}

fn float_literal(v: f64, suffix: &str) -> String {
    if v.is_infinite() {
        let s = if v > 0.0 { "" } else { "-" };
        return format!("{s}INFINITY");
    }
    if v.is_nan() {
        return "NAN".into();
    }
    format!("{v:?}{suffix}")
}

impl Emitter<'_> {
    fn name(&self, v: ValueId) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.index()))
    }

    fn names(&self, vs: &[ValueId]) -> Vec<String> {
        vs.iter().map(|v| self.name(*v)).collect()
    }

    fn ty(&self, v: ValueId) -> String {
        c_type(self.m.value_type(v))
    }

    fn line(&mut self, index: usize, text: &str) {
        let _ = writeln!(self.out, "{:w$}{text} // op {index}", "", w = 2 * self.depth);
    }

    fn func(&mut self, f: &Operation) -> Result<(), HostSourceError> {
        let index = self.take_index();
        let body = f.body();
        for (a, n) in body.args.iter().zip(function_arg_names(f)) {
            self.names.insert(*a, n);
        }
        let params: Vec<String> = body.args.iter().map(|a| format!("{} {}", self.ty(*a), self.name(*a))).collect();
        let name = f.sym_name().unwrap_or("anonymous");
        self.line(index, &format!("void {name}({}) {{", params.join(", ")));
        self.block(&body.ops, &[])?;
        self.line(index, "}");
        Ok(())
    }

    fn take_index(&mut self) -> usize {
        let i = self.next;
        self.next += 1;
        i
    }

    /// `targets` receive the operands of a trailing `scf.yield`.
    fn block(&mut self, ops: &[Operation], targets: &[String]) -> Result<(), HostSourceError> {
        self.depth += 1;
        for op in ops {
            self.op(op, targets)?;
        }
        self.depth -= 1;
        Ok(())
    }

    fn op(&mut self, op: &Operation, targets: &[String]) -> Result<(), HostSourceError> {
        let index = self.take_index();
        let r = op.results.first().map(|v| (self.ty(*v), self.name(*v)));
        let o = self.names(&op.operands);
        let key = || {
            format!(
                "{:?}, {}",
                op.str_attr("name").unwrap_or_default(),
                op.int_attr("memory_space").unwrap_or(0)
            )
        };
        let name = op.name.as_str();
        let text = match name {
            "arith.constant" => {
                let (t, n) = r.unwrap();
                let v = op.attr("value").map(literal).unwrap_or_default();
                format!("const {t} {n} = {v};")
            }
            "arith.negf" => {
                let (t, n) = r.unwrap();
                format!("const {t} {n} = -{};", o[0])
            }
            "arith.minsi" | "arith.minimumf" | "arith.maxsi" | "arith.maximumf" => {
                let (t, n) = r.unwrap();
                let f = if name.contains("min") { "min" } else { "max" };
                format!("const {t} {n} = std::{f}({}, {});", o[0], o[1])
            }
            "arith.cmpi" | "arith.cmpf" => {
                let (t, n) = r.unwrap();
                let p = compare_operator(op.str_attr("predicate").unwrap_or_default());
                format!("const {t} {n} = {} {p} {};", o[0], o[1])
            }
            "arith.select" => {
                let (t, n) = r.unwrap();
                format!("const {t} {n} = {} ? {} : {};", o[0], o[1], o[2])
            }
            "arith.index_cast" | "arith.sitofp" | "arith.fptosi" => {
                let (t, n) = r.unwrap();
                format!("const {t} {n} = static_cast<{t}>({});", o[0])
            }
            _ if binary_operator(name).is_some() => {
                let (t, n) = r.unwrap();
                format!("const {t} {n} = {} {} {};", o[0], binary_operator(name).unwrap(), o[1])
            }
            "memref.alloc" | "memref.alloca" => {
                let m = self.m.value_type(op.results[0]).as_memref().unwrap();
                let mut dyns = o.iter();
                let dims: Vec<String> = m
                    .shape
                    .iter()
                    .map(|d| d.map(|n| n.to_string()).unwrap_or_else(|| dyns.next().cloned().unwrap_or_default()))
                    .collect();
                let size = if dims.is_empty() { "1".into() } else { dims.join(" * ") };
                let n = self.name(op.results[0]);
                let t = c_scalar(m.element);
                format!("std::vector<{t}> {n}_storage({size}); {t}* {n} = {n}_storage.data();")
            }
            "memref.load" => {
                let (t, n) = r.unwrap();
                format!("const {t} {n} = {};", subscript(&o[0], &o[1..]))
            }
            "memref.store" => format!("{} = {};", subscript(&o[1], &o[2..]), o[0]),
            "memref.dma_start" => {
                let n = self.name(op.results[0]);
                let to_device = self
                    .m
                    .value_type(op.operands[0])
                    .as_memref()
                    .is_some_and(|m| m.memory_space == 0);
                if to_device {
                    format!(
                        "cl::Event {n}; queue.enqueueWriteBuffer({d}, CL_FALSE, 0, {d}.getInfo<CL_MEM_SIZE>(), {s}, nullptr, &{n});",
                        s = o[0],
                        d = o[1]
                    )
                } else {
                    format!(
                        "cl::Event {n}; queue.enqueueReadBuffer({s}, CL_FALSE, 0, {s}.getInfo<CL_MEM_SIZE>(), {d}, nullptr, &{n});",
                        s = o[0],
                        d = o[1]
                    )
                }
            }
            "memref.wait" => format!("{}.wait();", o[0]),
            "device.alloc" => {
                let m = self.m.value_type(op.results[0]).as_memref().unwrap();
                let mut dyns = o.iter();
                let mut dims: Vec<String> = m
                    .shape
                    .iter()
                    .map(|d| d.map(|n| n.to_string()).unwrap_or_else(|| dyns.next().cloned().unwrap_or_default()))
                    .collect();
                dims.push(format!("sizeof({})", c_scalar(m.element)));
                let n = self.name(op.results[0]);
                format!(
                    "cl::Buffer {n} = omp2hls::create_buffer(context, {}, {});",
                    key(),
                    dims.join(" * ")
                )
            }
            "device.lookup" => {
                let (_, n) = r.unwrap();
                format!("cl::Buffer {n} = omp2hls::lookup_buffer({});", key())
            }
            "device.data_check_exists" => {
                let (_, n) = r.unwrap();
                format!("const bool {n} = omp2hls::buffer_exists({});", key())
            }
            "device.data_acquire" => format!("omp2hls::acquire({});", key()),
            "device.data_release" => format!("omp2hls::release({});", key()),
            "device.kernel_create" => {
                let (_, n) = r.unwrap();
                let f = op.symbol_attr("device_function").unwrap_or("kernel");
                let mut s = format!("cl::Kernel {n}(program, {f:?});");
                for (i, a) in o.iter().enumerate() {
                    let _ = write!(s, " {n}.setArg({i}, {a});");
                }
                s
            }
            "device.kernel_launch" => format!("queue.enqueueTask({});", o[0]),
            "device.kernel_wait" => "queue.finish();".into(),
            "func.call" => {
                let callee = op.symbol_attr("callee").unwrap_or("unknown");
                let call = format!("{callee}({})", o.join(", "));
                match r {
                    Some((t, n)) => format!("const {t} {n} = {call};"),
                    None => format!("{call};"),
                }
            }
            "func.return" => match o.first() {
                Some(v) => format!("return {v};"),
                None => "return;".into(),
            },
            "scf.yield" => {
                if o.is_empty() {
                    return Ok(());
                }
                let assigns: Vec<String> = targets.iter().zip(&o).map(|(t, v)| format!("{t} = {v};")).collect();
                assigns.join(" ")
            }
            "scf.for" => {
                let iv = op.regions[0].args[0];
                let i = self.name(iv);
                self.line(
                    index,
                    &format!("for (int64_t {i} = {}; {i} < {}; {i} += {}) {{", o[0], o[1], o[2]),
                );
                self.block(&op.regions[0].ops, &[])?;
                self.line(index, "}");
                return Ok(());
            }
            "scf.if" => {
                let results = self.names(&op.results);
                let decls: String = op
                    .results
                    .iter()
                    .zip(&results)
                    .map(|(v, n)| format!("{} {n}; ", self.ty(*v)))
                    .collect();
                self.line(index, &format!("{decls}if ({}) {{", o[0]));
                self.block(&op.regions[0].ops, &results)?;
                if let Some(e) = op.regions.get(1).filter(|e| !e.ops.is_empty()) {
                    self.line(index, "} else {");
                    self.block(&e.ops, &results)?;
                }
                self.line(index, "}");
                return Ok(());
            }
            _ => {
                return Err(HostSourceError::Unsupported {
                    index,
                    name: op.name.clone(),
                })
            }
        };
        self.line(index, &text);
        Ok(())
    }
}

fn subscript(mem: &str, idx: &[String]) -> String {
    if idx.is_empty() {
        return format!("{mem}[0]");
    }
    let mut s = mem.to_string();
    for i in idx {
        let _ = write!(s, "[{i}]");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use omp2hls_core::ir::parse_module;

    fn render(text: &str) -> String {
        emit_host_source(&parse_module(text).unwrap()).unwrap()
    }

    fn body(s: &str) -> Vec<&str> {
        s.strip_prefix(HEADER).unwrap().lines().filter(|l| !l.is_empty()).collect()
    }

    #[test]
    fn empty_function_has_only_signature_and_return() {
        let s = render("module {\n  func.func @main() {\n    func.return\n  }\n}\n");
        assert_eq!(body(&s), ["void main() { // op 0", "  return; // op 1", "} // op 0"]);
    }

    #[test]
    fn device_alloc_creates_one_named_buffer() {
        let s = render(
            "module {\n  func.func @main(%n: index) attributes {arg_names = [\"n\"]} {\n    \
             %b = device.alloc(%n) <{memory_space = 1 : i32, name = \"a\"}> : (index) -> memref<?xf32, 1 : i32>\n    \
             func.return\n  }\n}\n",
        );
        let lines: Vec<&str> = body(&s).into_iter().filter(|l| l.contains("create_buffer")).collect();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].contains("\"a\", 1, n * sizeof(float)"), "{}", lines[0]);
        assert!(lines[0].ends_with("// op 1"));
    }

    #[test]
    fn omp_ops_are_rejected() {
        let m = parse_module(
            "module {\n  func.func @main() {\n    omp.target() ({\n      omp.terminator\n    }) : () -> ()\n    func.return\n  }\n}\n",
        )
        .unwrap();
        assert_eq!(
            emit_host_source(&m).unwrap_err(),
            HostSourceError::Unsupported {
                index: 1,
                name: "omp.target".into()
            }
        );
    }
}
