use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use log::trace;
use thiserror::Error;

use super::trace::{buffer_key, TraceEvent, TraceKind};
use super::value::{as_unsigned, wrap_int, ArrayData, BufferId, HostArray, HostValue, KernelId, RtVal};
use crate::dialects::func::{HLS_INTERFACE_CALL, HLS_PIPELINE_CALL};
use crate::dialects::ReductionKind;
use crate::ir::{function_arg_names, Attribute, Block, Module, Operation, ScalarType, Type, ValueId};

/// When a launched kernel actually runs. Any point between launch and the
/// matching wait is allowed; both extremes are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExecMode {
    Eager,
    #[default]
    Deferred,
}

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    pub mode: ExecMode,
    /// Entry function; defaults to `main`, or the only function present.
    pub entry: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("trap at {path}: {message}")]
    Trap { path: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("entry function: {0}")]
    Entry(String),
}

/// Outputs of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    /// Final contents of every buffer argument of the entry function.
    pub outputs: BTreeMap<String, HostArray>,
    pub trace: Vec<TraceEvent>,
    /// Device buffers still registered at exit as `(key, acquire_count)`.
    pub resident: Vec<(String, u64)>,
}

pub type Inputs = BTreeMap<String, HostValue>;

/// Runs `host` (and the kernels it launches from `device`) on `inputs`.
pub fn interpret(
    host: &Module,
    device: Option<&Module>,
    inputs: &Inputs,
    options: &SimOptions,
) -> Result<SimResult, SimError> {
    let entry = select_entry(host, options.entry.as_deref())?;
    let mut it = Interp {
        device,
        mode: options.mode,
        buffers: Vec::new(),
        registry: BTreeMap::new(),
        kernels: Vec::new(),
        tokens: Vec::new(),
        trace: Vec::new(),
        path: Vec::new(),
    };
    let names = function_arg_names(entry);
    let params = &entry.body().args;
    let mut args = Vec::with_capacity(params.len());
    for (name, p) in names.iter().zip(params) {
        let input = inputs
            .get(name)
            .ok_or_else(|| SimError::Input(format!("missing input '{name}'")))?;
        args.push(it.bind_input(name, host.value_type(*p), input)?);
    }
    it.call(host, entry, &args)?;

    let mut outputs = BTreeMap::new();
    for (name, (p, a)) in names.iter().zip(params.iter().zip(&args)) {
        if let (Type::MemRef(_), RtVal::MemRef(b)) = (host.value_type(*p), a) {
            let buf = &it.buffers[b.0];
            if let Some(data) = &buf.data {
                outputs.insert(
                    name.clone(),
                    HostArray {
                        shape: buf.shape.clone(),
                        data: data.clone(),
                    },
                );
            }
        }
    }
    let resident = it
        .registry
        .iter()
        .map(|((n, s), e)| (buffer_key(n, *s), e.acquire_count))
        .collect();
    Ok(SimResult {
        outputs,
        trace: it.trace,
        resident,
    })
}

/// Plain serial evaluation of the first function in `module`: OpenMP
/// constructs execute inline on host memory and HLS markers are no-ops.
pub fn run_reference(
    module: &Module,
    inputs: &Inputs,
) -> Result<BTreeMap<String, HostArray>, SimError> {
    let entry = module
        .functions()
        .next()
        .and_then(|f| f.sym_name())
        .ok_or_else(|| SimError::Entry("module has no functions".into()))?;
    let opts = SimOptions {
        mode: ExecMode::Deferred,
        entry: Some(entry.into()),
    };
    interpret(module, None, inputs, &opts).map(|r| r.outputs)
}

/// The function `interpret` starts in: `name`, else `main`, else the only
/// function of the module.
pub fn select_entry<'m>(m: &'m Module, name: Option<&str>) -> Result<&'m Operation, SimError> {
    if let Some(n) = name {
        return m
            .function(n)
            .ok_or_else(|| SimError::Entry(format!("no function @{n}")));
    }
    if let Some(f) = m.function("main") {
        return Ok(f);
    }
    let mut fs = m.functions();
    match (fs.next(), fs.next()) {
        (Some(f), None) => Ok(f),
        (None, _) => Err(SimError::Entry("module has no functions".into())),
        _ => Err(SimError::Entry(
            "several functions and none named @main; pass an entry name".into(),
        )),
    }
}

struct Buffer {
    element: ScalarType,
    shape: Vec<usize>,
    /// `None` once freed.
    data: Option<ArrayData>,
    space: u32,
    key: Option<(String, u32)>,
}

struct RegistryEntry {
    buffer: BufferId,
    acquire_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KernelStatus {
    Created,
    Launched,
    Completed,
}

enum KernelTarget<'m> {
    Device(String),
    /// Kernel body still attached to its `device.kernel_create`.
    Inline(&'m Block),
}

struct KernelRecord<'m> {
    target: KernelTarget<'m>,
    args: Vec<RtVal>,
    status: KernelStatus,
    label: String,
}

struct Frame<'m> {
    module: &'m Module,
    env: Vec<Option<RtVal>>,
}

enum Flow {
    Next,
    Yield(Vec<RtVal>),
    Return,
}

struct Interp<'m> {
    device: Option<&'m Module>,
    mode: ExecMode,
    buffers: Vec<Buffer>,
    registry: BTreeMap<(String, u32), RegistryEntry>,
    kernels: Vec<KernelRecord<'m>>,
    /// Completion flag per DMA token.
    tokens: Vec<bool>,
    trace: Vec<TraceEvent>,
    /// Currently executing op stack, for trap messages.
    path: Vec<(&'m str, usize)>,
}

type R<T> = Result<T, SimError>;

impl<'m> Interp<'m> {
    fn trap(&self, message: impl Into<String>) -> SimError {
        let mut path = String::new();
        for (i, (name, idx)) in self.path.iter().enumerate() {
            if i > 0 {
                path.push_str(" > ");
            }
            path.push_str(&format!("{name}#{idx}"));
        }
        if path.is_empty() {
            path.push_str("entry");
        }
        SimError::Trap {
            path,
            message: message.into(),
        }
    }

    fn emit(&mut self, kind: TraceKind, key: String, bytes: u64) {
        let seq = self.trace.len() as u64;
        trace!("sim: {seq} {kind} {key} {bytes}");
        self.trace.push(TraceEvent {
            seq,
            kind,
            key,
            bytes,
        });
    }

    fn new_buffer(&mut self, element: ScalarType, shape: Vec<usize>, space: u32, key: Option<(String, u32)>) -> BufferId {
        let len = shape.iter().product();
        self.buffers.push(Buffer {
            element,
            shape,
            data: Some(ArrayData::zeros(element, len)),
            space,
            key,
        });
        BufferId(self.buffers.len() - 1)
    }

    fn bind_input(&mut self, name: &str, ty: &Type, input: &HostValue) -> R<RtVal> {
        let bad = |what: &str| SimError::Input(format!("'{name}' expects {ty}, got {what}"));
        match (ty, input) {
            (Type::MemRef(m), HostValue::Array(a)) => {
                if !a.data.holds(m.element) {
                    return Err(bad("an array of another element type"));
                }
                if a.shape.len() != m.rank() {
                    return Err(bad("an array of another rank"));
                }
                for (d, (want, got)) in m.shape.iter().zip(&a.shape).enumerate() {
                    if want.is_some_and(|w| w as usize != *got) {
                        return Err(bad(&format!("extent {got} in dimension {d}")));
                    }
                }
                if a.shape.iter().product::<usize>() != a.data.len() {
                    return Err(SimError::Input(format!(
                        "'{name}' has shape {:?} but {} elements",
                        a.shape,
                        a.data.len()
                    )));
                }
                let id = self.new_buffer(m.element, a.shape.clone(), m.memory_space, None);
                self.buffers[id.0].data = Some(a.data.clone());
                Ok(RtVal::MemRef(id))
            }
            (Type::Scalar(s), HostValue::Int(v)) if s.is_integer_like() => Ok(RtVal::Int(wrap_int(*v, *s))),
            (Type::Scalar(ScalarType::Float(32)), HostValue::F32(v)) => Ok(RtVal::F32(*v)),
            (Type::Scalar(ScalarType::Float(64)), HostValue::F64(v)) => Ok(RtVal::F64(*v)),
            (Type::Scalar(ScalarType::Float(32)), HostValue::Int(v)) => Ok(RtVal::F32(*v as f32)),
            (Type::Scalar(ScalarType::Float(64)), HostValue::Int(v)) => Ok(RtVal::F64(*v as f64)),
            (_, HostValue::Array(_)) => Err(bad("an array")),
            _ => Err(bad("a scalar of another type")),
        }
    }

    // ---- frames and values ----

    fn get(&self, frame: &Frame<'m>, v: ValueId) -> R<RtVal> {
        frame.env[v.index()].ok_or_else(|| self.trap(format!("use of undefined value {v}")))
    }

    fn int(&self, frame: &Frame<'m>, v: ValueId) -> R<i64> {
        match self.get(frame, v)? {
            RtVal::Int(i) => Ok(i),
            other => Err(self.trap(format!("expected an integer, found {other:?}"))),
        }
    }

    fn buffer_of(&self, frame: &Frame<'m>, v: ValueId) -> R<BufferId> {
        match self.get(frame, v)? {
            RtVal::MemRef(b) => Ok(b),
            other => Err(self.trap(format!("expected a memref, found {other:?}"))),
        }
    }

    fn set(frame: &mut Frame<'m>, v: ValueId, x: RtVal) {
        frame.env[v.index()] = Some(x);
    }

    fn call(&mut self, module: &'m Module, func: &'m Operation, args: &[RtVal]) -> R<()> {
        let body = func.body();
        if body.args.len() != args.len() {
            return Err(self.trap(format!(
                "@{} takes {} arguments, got {}",
                func.sym_name().unwrap_or("?"),
                body.args.len(),
                args.len()
            )));
        }
        let mut frame = Frame {
            module,
            env: vec![None; module.values.len()],
        };
        for (p, a) in body.args.iter().zip(args) {
            Self::set(&mut frame, *p, *a);
        }
        self.path.push(("func.func", 0));
        self.exec_block(&mut frame, body)?;
        self.path.pop();
        Ok(())
    }

    fn exec_block(&mut self, frame: &mut Frame<'m>, block: &'m Block) -> R<Flow> {
        for (i, op) in block.ops.iter().enumerate() {
            self.path.push((op.name.as_str(), i));
            let flow = self.exec_op(frame, op)?;
            self.path.pop();
            if !matches!(flow, Flow::Next) {
                return Ok(flow);
            }
        }
        Ok(Flow::Next)
    }

    fn result_scalar(&self, frame: &Frame<'m>, op: &Operation) -> R<ScalarType> {
        frame
            .module
            .value_type(op.results[0])
            .as_scalar()
            .ok_or_else(|| self.trap("result must be a scalar"))
    }

    fn exec_op(&mut self, frame: &mut Frame<'m>, op: &'m Operation) -> R<Flow> {
        let name = op.name.as_str();
        match name {
            "func.return" => return Ok(Flow::Return),
            "scf.yield" | "omp.yield" => {
                let vals = op
                    .operands
                    .iter()
                    .map(|v| self.get(frame, *v))
                    .collect::<R<Vec<_>>>()?;
                return Ok(Flow::Yield(vals));
            }
            "omp.terminator" => return Ok(Flow::Yield(Vec::new())),
            "func.call" => self.exec_call(frame, op)?,

            "arith.constant" => {
                let v = match op.attr("value") {
                    Some(Attribute::Int(v, t)) => RtVal::Int(wrap_int(*v, *t)),
                    Some(Attribute::Float(v, ScalarType::Float(32))) => RtVal::F32(*v as f32),
                    Some(Attribute::Float(v, _)) => RtVal::F64(*v),
                    Some(Attribute::Bool(b)) => RtVal::Int(*b as i64),
                    _ => return Err(self.trap("malformed constant")),
                };
                Self::set(frame, op.results[0], v);
            }
            "arith.negf" => {
                let v = match self.get(frame, op.operands[0])? {
                    RtVal::F32(x) => RtVal::F32(-x),
                    RtVal::F64(x) => RtVal::F64(-x),
                    _ => return Err(self.trap("negf expects a float")),
                };
                Self::set(frame, op.results[0], v);
            }
            "arith.cmpi" => {
                let ty = frame
                    .module
                    .value_type(op.operands[0])
                    .as_scalar()
                    .unwrap_or(ScalarType::I64);
                let a = self.int(frame, op.operands[0])?;
                let b = self.int(frame, op.operands[1])?;
                let (ua, ub) = (as_unsigned(a, ty), as_unsigned(b, ty));
                let r = match op.str_attr("predicate").unwrap_or("") {
                    "eq" => a == b,
                    "ne" => a != b,
                    "slt" => a < b,
                    "sle" => a <= b,
                    "sgt" => a > b,
                    "sge" => a >= b,
                    "ult" => ua < ub,
                    "ule" => ua <= ub,
                    "ugt" => ua > ub,
                    "uge" => ua >= ub,
                    p => return Err(self.trap(format!("unknown predicate '{p}'"))),
                };
                Self::set(frame, op.results[0], RtVal::Int(r as i64));
            }
            "arith.cmpf" => {
                let (a, b) = match (self.get(frame, op.operands[0])?, self.get(frame, op.operands[1])?) {
                    (RtVal::F32(a), RtVal::F32(b)) => (a as f64, b as f64),
                    (RtVal::F64(a), RtVal::F64(b)) => (a, b),
                    _ => return Err(self.trap("cmpf expects floats")),
                };
                let r = match op.str_attr("predicate").unwrap_or("") {
                    "oeq" => a == b,
                    "one" => a != b && !a.is_nan() && !b.is_nan(),
                    "olt" => a < b,
                    "ole" => a <= b,
                    "ogt" => a > b,
                    "oge" => a >= b,
                    p => return Err(self.trap(format!("unknown predicate '{p}'"))),
                };
                Self::set(frame, op.results[0], RtVal::Int(r as i64));
            }
            "arith.select" => {
                let c = self.int(frame, op.operands[0])?;
                let v = self.get(frame, op.operands[if c != 0 { 1 } else { 2 }])?;
                Self::set(frame, op.results[0], v);
            }
            "arith.index_cast" => {
                let ty = self.result_scalar(frame, op)?;
                let v = self.int(frame, op.operands[0])?;
                Self::set(frame, op.results[0], RtVal::Int(wrap_int(v, ty)));
            }
            "arith.sitofp" => {
                let ty = self.result_scalar(frame, op)?;
                let v = self.int(frame, op.operands[0])?;
                let r = if ty == ScalarType::F32 {
                    RtVal::F32(v as f32)
                } else {
                    RtVal::F64(v as f64)
                };
                Self::set(frame, op.results[0], r);
            }
            "arith.fptosi" => {
                let ty = self.result_scalar(frame, op)?;
                let v = match self.get(frame, op.operands[0])? {
                    RtVal::F32(x) => x as i64,
                    RtVal::F64(x) => x as i64,
                    _ => return Err(self.trap("fptosi expects a float")),
                };
                Self::set(frame, op.results[0], RtVal::Int(wrap_int(v, ty)));
            }
            n if n.starts_with("arith.") => {
                let ty = self.result_scalar(frame, op)?;
                let a = self.get(frame, op.operands[0])?;
                let b = self.get(frame, op.operands[1])?;
                let r = eval_binary(n, a, b, ty).map_err(|e| self.trap(e))?;
                Self::set(frame, op.results[0], r);
            }

            "scf.for" => {
                let lb = self.int(frame, op.operands[0])?;
                let ub = self.int(frame, op.operands[1])?;
                let step = self.int(frame, op.operands[2])?;
                if step <= 0 {
                    return Err(self.trap(format!("loop step must be positive, found {step}")));
                }
                let body = &op.regions[0];
                let mut iv = lb;
                while iv < ub {
                    Self::set(frame, body.args[0], RtVal::Int(iv));
                    self.exec_block(frame, body)?;
                    iv += step;
                }
            }
            "scf.if" => {
                let c = self.int(frame, op.operands[0])?;
                let region = &op.regions[if c != 0 { 0 } else { 1 }];
                match self.exec_block(frame, region)? {
                    Flow::Yield(vals) if vals.len() == op.results.len() => {
                        for (r, v) in op.results.iter().zip(vals) {
                            Self::set(frame, *r, v);
                        }
                    }
                    _ => return Err(self.trap("scf.if region did not yield its results")),
                }
            }

            "memref.alloc" | "memref.alloca" => {
                let m = frame.module.value_type(op.results[0]).as_memref().cloned();
                let m = m.ok_or_else(|| self.trap("alloc must produce a memref"))?;
                let shape = self.shape_from(frame, &m.shape, &op.operands)?;
                let id = self.new_buffer(m.element, shape, m.memory_space, None);
                Self::set(frame, op.results[0], RtVal::MemRef(id));
            }
            "memref.load" => {
                let b = self.buffer_of(frame, op.operands[0])?;
                let flat = self.flat_index(frame, b, &op.operands[1..])?;
                let v = self.buffers[b.0].data.as_ref().map(|d| d.get(flat));
                let v = v.ok_or_else(|| self.trap("load from a freed buffer"))?;
                Self::set(frame, op.results[0], v);
            }
            "memref.store" => {
                let v = self.get(frame, op.operands[0])?;
                let b = self.buffer_of(frame, op.operands[1])?;
                let flat = self.flat_index(frame, b, &op.operands[2..])?;
                let ok = self.buffers[b.0].data.as_mut().map(|d| d.set(flat, v));
                match ok {
                    Some(true) => {}
                    Some(false) => return Err(self.trap("stored value does not match element type")),
                    None => return Err(self.trap("store to a freed buffer")),
                }
            }
            "memref.dma_start" => {
                let src = self.buffer_of(frame, op.operands[0])?;
                let dst = self.buffer_of(frame, op.operands[1])?;
                self.dma(src, dst)?;
                self.tokens.push(false);
                Self::set(frame, op.results[0], RtVal::Token(self.tokens.len() - 1));
            }
            "memref.wait" => match self.get(frame, op.operands[0])? {
                RtVal::Token(t) if t < self.tokens.len() => self.tokens[t] = true,
                _ => return Err(self.trap("wait on an unknown transfer")),
            },

            "omp.bounds_info" => {
                let lb = self.int(frame, op.operands[0])?;
                let ub = self.int(frame, op.operands[1])?;
                Self::set(frame, op.results[0], RtVal::Bounds(lb, ub));
            }
            "omp.map_info" => {
                let v = self.get(frame, op.operands[0])?;
                Self::set(frame, op.results[0], v);
            }
            "omp.target" => {
                let body = &op.regions[0];
                for (a, o) in body.args.iter().zip(&op.operands) {
                    let v = self.get(frame, *o)?;
                    Self::set(frame, *a, v);
                }
                self.exec_block(frame, body)?;
            }
            "omp.target_data" => {
                self.exec_block(frame, &op.regions[0])?;
            }
            "omp.loop" => self.exec_omp_loop(frame, op)?,

            "hls.axi_protocol" => Self::set(frame, op.results[0], RtVal::Protocol),
            "hls.interface" | "hls.pipeline" => {}

            n if n.starts_with("device.") => self.exec_device(frame, op)?,
            other => return Err(self.trap(format!("no semantics for '{other}'"))),
        }
        Ok(Flow::Next)
    }

    fn exec_call(&mut self, frame: &mut Frame<'m>, op: &'m Operation) -> R<()> {
        let callee = op
            .symbol_attr("callee")
            .ok_or_else(|| self.trap("call without callee"))?;
        if callee == HLS_INTERFACE_CALL || callee == HLS_PIPELINE_CALL {
            return Ok(());
        }
        let module = frame.module;
        let f = module
            .function(callee)
            .ok_or_else(|| self.trap(format!("call to unknown function @{callee}")))?;
        let args = op
            .operands
            .iter()
            .map(|v| self.get(frame, *v))
            .collect::<R<Vec<_>>>()?;
        self.call(module, f, &args)
    }

    fn exec_omp_loop(&mut self, frame: &mut Frame<'m>, op: &'m Operation) -> R<()> {
        let lb = self.int(frame, op.operands[0])?;
        let ub = self.int(frame, op.operands[1])?;
        let step = self.int(frame, op.operands[2])?;
        if step <= 0 {
            return Err(self.trap(format!("loop step must be positive, found {step}")));
        }
        let reduction = match op.str_attr("reduction") {
            None => None,
            Some(s) => {
                let kind: ReductionKind = s
                    .parse()
                    .map_err(|_| self.trap(format!("unsupported reduction '{s}'")))?;
                let b = self.buffer_of(frame, op.operands[3])?;
                Some((kind, b))
            }
        };
        let mut acc = match reduction {
            Some((_, b)) => Some(self.read_scalar(b)?),
            None => None,
        };
        let body = &op.regions[0];
        let mut iv = lb;
        while iv < ub {
            Self::set(frame, body.args[0], RtVal::Int(iv));
            let flow = self.exec_block(frame, body)?;
            if let (Some((kind, b)), Some(a)) = (reduction, acc) {
                let contrib = match flow {
                    Flow::Yield(v) if v.len() == 1 => v[0],
                    _ => return Err(self.trap("reduction loop body must yield one value")),
                };
                let ty = self.buffers[b.0].element;
                acc = Some(combine(kind, a, contrib, ty).map_err(|e| self.trap(e))?);
            }
            iv += step;
        }
        if let (Some((_, b)), Some(a)) = (reduction, acc) {
            self.write_scalar(b, a)?;
        }
        Ok(())
    }

    fn read_scalar(&self, b: BufferId) -> R<RtVal> {
        let buf = &self.buffers[b.0];
        match &buf.data {
            Some(d) if d.len() == 1 => Ok(d.get(0)),
            Some(_) => Err(self.trap("reduction variable must hold exactly one element")),
            None => Err(self.trap("use of a freed buffer")),
        }
    }

    fn write_scalar(&mut self, b: BufferId, v: RtVal) -> R<()> {
        let ok = self.buffers[b.0].data.as_mut().is_some_and(|d| d.set(0, v));
        if ok {
            Ok(())
        } else {
            Err(self.trap("cannot write reduction result"))
        }
    }

    fn shape_from(&self, frame: &Frame<'m>, dims: &[Option<u64>], sizes: &[ValueId]) -> R<Vec<usize>> {
        let mut dyn_sizes = sizes.iter();
        let mut shape = Vec::with_capacity(dims.len());
        for d in dims {
            let n = match d {
                Some(n) => *n as i64,
                None => {
                    let v = dyn_sizes
                        .next()
                        .ok_or_else(|| self.trap("missing dynamic size operand"))?;
                    self.int(frame, *v)?
                }
            };
            if n < 0 {
                return Err(self.trap(format!("negative allocation size {n}")));
            }
            shape.push(n as usize);
        }
        Ok(shape)
    }

    fn flat_index(&self, frame: &Frame<'m>, b: BufferId, idx: &[ValueId]) -> R<usize> {
        let shape = &self.buffers[b.0].shape;
        if idx.len() != shape.len() {
            return Err(self.trap("index count differs from buffer rank"));
        }
        let mut flat = 0usize;
        for (d, (v, extent)) in idx.iter().zip(shape).enumerate() {
            let i = self.int(frame, *v)?;
            if i < 0 || i as usize >= *extent {
                return Err(self.trap(format!(
                    "index {i} out of bounds for dimension {d} of extent {extent}"
                )));
            }
            flat = flat * extent + i as usize;
        }
        Ok(flat)
    }

    fn device_key(&self, b: BufferId) -> Option<String> {
        self.buffers[b.0].key.as_ref().map(|(n, s)| buffer_key(n, *s))
    }

    fn acquired(&self, b: BufferId) -> bool {
        match &self.buffers[b.0].key {
            None => true,
            Some(k) => self.registry.get(k).is_some_and(|e| e.acquire_count > 0),
        }
    }

    fn dma(&mut self, src: BufferId, dst: BufferId) -> R<()> {
        let (s_space, d_space) = (self.buffers[src.0].space, self.buffers[dst.0].space);
        let (kind, dev) = match (s_space, d_space) {
            (0, d) if d != 0 => (TraceKind::DmaH2D, dst),
            (s, 0) if s != 0 => (TraceKind::DmaD2H, src),
            _ => return Err(self.trap(format!("unsupported transfer from space {s_space} to {d_space}"))),
        };
        if !self.acquired(dev) {
            return Err(self.trap("transfer touches a device buffer that is not acquired"));
        }
        let data = self.buffers[src.0]
            .data
            .clone()
            .ok_or_else(|| self.trap("transfer from a freed buffer"))?;
        let elem = self.buffers[src.0].element;
        let dst_buf = &mut self.buffers[dst.0];
        match &dst_buf.data {
            None => return Err(self.trap("transfer into a freed buffer")),
            Some(d) if d.len() != data.len() || dst_buf.element != elem => {
                let msg = format!(
                    "transfer size mismatch: {} elements into {}",
                    data.len(),
                    d.len()
                );
                return Err(self.trap(msg));
            }
            Some(_) => {}
        }
        let bytes = (data.len() * elem.byte_width()) as u64;
        self.buffers[dst.0].data = Some(data);
        let key = self.device_key(dev).unwrap_or_else(|| "anonymous".into());
        self.emit(kind, key, bytes);
        Ok(())
    }

    fn key_attrs(&self, op: &Operation) -> R<(String, u32)> {
        let name = op
            .str_attr("name")
            .ok_or_else(|| self.trap("missing 'name'"))?;
        let space = op
            .int_attr("memory_space")
            .ok_or_else(|| self.trap("missing 'memory_space'"))?;
        Ok((name.to_string(), space as u32))
    }

    fn exec_device(&mut self, frame: &mut Frame<'m>, op: &'m Operation) -> R<()> {
        match op.name.as_str() {
            "device.alloc" => {
                let key = self.key_attrs(op)?;
                if self.registry.contains_key(&key) {
                    return Err(self.trap(format!("buffer {} is already allocated", buffer_key(&key.0, key.1))));
                }
                let m = frame
                    .module
                    .value_type(op.results[0])
                    .as_memref()
                    .cloned()
                    .ok_or_else(|| self.trap("alloc must produce a memref"))?;
                let shape = self.shape_from(frame, &m.shape, &op.operands)?;
                let bytes = (shape.iter().product::<usize>() * m.element.byte_width()) as u64;
                let id = self.new_buffer(m.element, shape, key.1, Some(key.clone()));
                self.registry.insert(
                    key.clone(),
                    RegistryEntry {
                        buffer: id,
                        acquire_count: 0,
                    },
                );
                self.emit(TraceKind::Alloc, buffer_key(&key.0, key.1), bytes);
                Self::set(frame, op.results[0], RtVal::MemRef(id));
            }
            "device.lookup" => {
                let key = self.key_attrs(op)?;
                let id = match self.registry.get(&key) {
                    Some(e) => e.buffer,
                    None => {
                        return Err(self.trap(format!(
                            "lookup of unallocated buffer {}",
                            buffer_key(&key.0, key.1)
                        )))
                    }
                };
                self.emit(TraceKind::Lookup, buffer_key(&key.0, key.1), 0);
                Self::set(frame, op.results[0], RtVal::MemRef(id));
            }
            "device.data_check_exists" => {
                let key = self.key_attrs(op)?;
                let present = self.registry.get(&key).is_some_and(|e| e.acquire_count > 0);
                Self::set(frame, op.results[0], RtVal::Int(present as i64));
            }
            "device.data_acquire" => {
                let key = self.key_attrs(op)?;
                match self.registry.get_mut(&key) {
                    Some(e) => e.acquire_count += 1,
                    None => {
                        return Err(self.trap(format!(
                            "acquire of unallocated buffer {}",
                            buffer_key(&key.0, key.1)
                        )))
                    }
                }
                self.emit(TraceKind::Acquire, buffer_key(&key.0, key.1), 0);
            }
            "device.data_release" => {
                let key = self.key_attrs(op)?;
                let label = buffer_key(&key.0, key.1);
                let freed = match self.registry.get_mut(&key) {
                    Some(e) if e.acquire_count > 0 => {
                        e.acquire_count -= 1;
                        (e.acquire_count == 0).then_some(e.buffer)
                    }
                    _ => return Err(self.trap(format!("release of {label} below zero"))),
                };
                self.emit(TraceKind::Release, label, 0);
                if let Some(b) = freed {
                    self.registry.remove(&key);
                    self.buffers[b.0].data = None;
                }
            }
            "device.kernel_create" => {
                let args = op
                    .operands
                    .iter()
                    .map(|v| self.get(frame, *v))
                    .collect::<R<Vec<_>>>()?;
                let body = &op.regions[0];
                let target = if body.ops.is_empty() {
                    let f = op
                        .symbol_attr("device_function")
                        .ok_or_else(|| self.trap("extracted kernel without device_function"))?;
                    KernelTarget::Device(f.to_string())
                } else {
                    KernelTarget::Inline(body)
                };
                let id = self.kernels.len();
                let label = match &target {
                    KernelTarget::Device(f) => format!("@{f}#{id}"),
                    KernelTarget::Inline(_) => format!("inline#{id}"),
                };
                self.emit(TraceKind::KernelCreate, label.clone(), 0);
                self.kernels.push(KernelRecord {
                    target,
                    args,
                    status: KernelStatus::Created,
                    label,
                });
                Self::set(frame, op.results[0], RtVal::Kernel(KernelId(id)));
            }
            "device.kernel_launch" => {
                let k = self.kernel_of(frame, op.operands[0])?;
                if self.kernels[k.0].status != KernelStatus::Created {
                    return Err(self.trap("kernel launched twice"));
                }
                self.kernels[k.0].status = KernelStatus::Launched;
                let label = self.kernels[k.0].label.clone();
                self.emit(TraceKind::KernelLaunch, label, 0);
                if self.mode == ExecMode::Eager {
                    self.run_kernel(frame, k)?;
                }
            }
            "device.kernel_wait" => {
                let k = self.kernel_of(frame, op.operands[0])?;
                match self.kernels[k.0].status {
                    KernelStatus::Created => {
                        return Err(self.trap("wait on a kernel that was never launched"))
                    }
                    KernelStatus::Launched => self.run_kernel(frame, k)?,
                    KernelStatus::Completed => {}
                }
                let label = self.kernels[k.0].label.clone();
                self.emit(TraceKind::KernelWait, label, 0);
            }
            other => return Err(self.trap(format!("no semantics for '{other}'"))),
        }
        Ok(())
    }

    fn kernel_of(&self, frame: &Frame<'m>, v: ValueId) -> R<KernelId> {
        match self.get(frame, v)? {
            RtVal::Kernel(k) => Ok(k),
            other => Err(self.trap(format!("expected a kernel handle, found {other:?}"))),
        }
    }

    fn run_kernel(&mut self, frame: &mut Frame<'m>, k: KernelId) -> R<()> {
        let args = self.kernels[k.0].args.clone();
        for a in &args {
            if let RtVal::MemRef(b) = a {
                if !self.acquired(*b) {
                    let key = self.device_key(*b).unwrap_or_default();
                    return Err(self.trap(format!("kernel argument {key} is not acquired")));
                }
                if self.buffers[b.0].data.is_none() {
                    return Err(self.trap("kernel argument was freed"));
                }
            }
        }
        match &self.kernels[k.0].target {
            KernelTarget::Inline(body) => {
                let body: &'m Block = body;
                for (p, a) in body.args.iter().zip(&args) {
                    Self::set(frame, *p, *a);
                }
                self.path.push(("kernel", k.0));
                self.exec_block(frame, body)?;
                self.path.pop();
            }
            KernelTarget::Device(name) => {
                let device = self
                    .device
                    .ok_or_else(|| self.trap("kernel launched without a device module"))?;
                let f = device
                    .function(name)
                    .ok_or_else(|| self.trap(format!("device module has no function @{name}")))?;
                self.call(device, f, &args)?;
            }
        }
        self.kernels[k.0].status = KernelStatus::Completed;
        Ok(())
    }
}

/// Applies a two-operand `arith` op.
pub(crate) fn eval_binary(name: &str, a: RtVal, b: RtVal, ty: ScalarType) -> Result<RtVal, String> {
    match (a, b) {
        (RtVal::Int(x), RtVal::Int(y)) => {
            let (ux, uy) = (as_unsigned(x, ty), as_unsigned(y, ty));
            let r = match name {
                "arith.addi" => x.wrapping_add(y),
                "arith.subi" => x.wrapping_sub(y),
                "arith.muli" => x.wrapping_mul(y),
                "arith.divsi" | "arith.remsi" => {
                    if y == 0 {
                        return Err("integer division by zero".into());
                    }
                    if name == "arith.divsi" {
                        x.wrapping_div(y)
                    } else {
                        x.wrapping_rem(y)
                    }
                }
                "arith.divui" | "arith.remui" => {
                    if uy == 0 {
                        return Err("integer division by zero".into());
                    }
                    if name == "arith.divui" {
                        (ux / uy) as i64
                    } else {
                        (ux % uy) as i64
                    }
                }
                "arith.minsi" => x.min(y),
                "arith.maxsi" => x.max(y),
                "arith.andi" => x & y,
                "arith.ori" => x | y,
                "arith.xori" => x ^ y,
                _ => return Err(format!("'{name}' does not apply to integers")),
            };
            Ok(RtVal::Int(wrap_int(r, ty)))
        }
        (RtVal::F32(x), RtVal::F32(y)) => Ok(RtVal::F32(match name {
            "arith.addf" => x + y,
            "arith.subf" => x - y,
            "arith.mulf" => x * y,
            "arith.divf" => x / y,
            "arith.minimumf" => nan_min(x, y),
            "arith.maximumf" => nan_max(x, y),
            _ => return Err(format!("'{name}' does not apply to f32")),
        })),
        (RtVal::F64(x), RtVal::F64(y)) => Ok(RtVal::F64(match name {
            "arith.addf" => x + y,
            "arith.subf" => x - y,
            "arith.mulf" => x * y,
            "arith.divf" => x / y,
            "arith.minimumf" => nan_min(x, y),
            "arith.maximumf" => nan_max(x, y),
            _ => return Err(format!("'{name}' does not apply to f64")),
        })),
        _ => Err(format!("'{name}' applied to mismatched operands")),
    }
}

fn is_nan<T: PartialOrd>(x: &T) -> bool {
    x.partial_cmp(x).is_none()
}

fn nan_min<T: PartialOrd + Copy>(x: T, y: T) -> T {
    // NaN is unordered even with itself; propagate it.
    if is_nan(&x) {
        x
    } else if is_nan(&y) || y < x {
        y
    } else {
        x
    }
}

fn nan_max<T: PartialOrd + Copy>(x: T, y: T) -> T {
    if is_nan(&x) {
        x
    } else if is_nan(&y) || y > x {
        y
    } else {
        x
    }
}

/// `arith` op implementing a reduction operator for elements of type `ty`.
pub fn reduction_op_name(kind: ReductionKind, ty: ScalarType) -> &'static str {
    let float = ty.is_float();
    match (kind, float) {
        (ReductionKind::Add, false) => "arith.addi",
        (ReductionKind::Add, true) => "arith.addf",
        (ReductionKind::Mul, false) => "arith.muli",
        (ReductionKind::Mul, true) => "arith.mulf",
        (ReductionKind::Min, false) => "arith.minsi",
        (ReductionKind::Min, true) => "arith.minimumf",
        (ReductionKind::Max, false) => "arith.maxsi",
        (ReductionKind::Max, true) => "arith.maximumf",
    }
}

pub(crate) fn combine(kind: ReductionKind, acc: RtVal, x: RtVal, ty: ScalarType) -> Result<RtVal, String> {
    eval_binary(reduction_op_name(kind, ty), acc, x, ty)
}
