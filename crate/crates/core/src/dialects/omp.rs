//! OpenMP offload subset.
//!
//! * `omp.bounds_info(%lb, %ub)` describes one dimension `[lb, ub)` of a mapping.
//! * `omp.map_info(%var, %bounds...) <{name, map_type}>` names a host buffer
//!   and how it moves; its result is what `omp.target`/`omp.target_data` take.
//! * `omp.target(%maps...)` offloads its region; the region's arguments are
//!   the mapped buffers as seen on the device.
//! * `omp.target_data(%maps...)` keeps buffers resident across its region.
//! * `omp.loop(%lb, %ub, %step [, %red])` is a worksharing loop carrying the
//!   `parallel_do`, `simd`, `simdlen`, `reduction` and `ii` annotations.
//!   With a reduction the body yields its per-iteration contribution.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{is_index, is_memref, Checks, OpContext, Registry, RegistryError};
use crate::ir::{Operation, Type, ValueId};

pub fn register(reg: &mut Registry) -> Result<(), RegistryError> {
    reg.register("omp.bounds_info", verify_bounds)?;
    reg.register("omp.map_info", verify_map_info)?;
    reg.register("omp.target", verify_target)?;
    reg.register("omp.target_data", verify_target_data)?;
    reg.register("omp.loop", verify_loop)?;
    reg.register("omp.yield", verify_yield)?;
    reg.register("omp.terminator", verify_terminator)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MapKind {
    To,
    From,
    ToFrom,
    /// Synthesized `tofrom` for a variable the target region uses without an
    /// explicit clause.
    ToFromImplicit,
}

impl MapKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::To => "to",
            MapKind::From => "from",
            MapKind::ToFrom => "tofrom",
            MapKind::ToFromImplicit => "tofrom_implicit",
        }
    }

    pub fn copies_in(self) -> bool {
        !matches!(self, MapKind::From)
    }

    pub fn copies_out(self) -> bool {
        !matches!(self, MapKind::To)
    }
}

impl FromStr for MapKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "to" => Ok(MapKind::To),
            "from" => Ok(MapKind::From),
            "tofrom" => Ok(MapKind::ToFrom),
            "tofrom_implicit" => Ok(MapKind::ToFromImplicit),
            _ => Err(()),
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReductionKind {
    Add,
    Mul,
    Min,
    Max,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 4] = [
        ReductionKind::Add,
        ReductionKind::Mul,
        ReductionKind::Min,
        ReductionKind::Max,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionKind::Add => "add",
            ReductionKind::Mul => "mul",
            ReductionKind::Min => "min",
            ReductionKind::Max => "max",
        }
    }
}

impl FromStr for ReductionKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "add" => Ok(ReductionKind::Add),
            "mul" => Ok(ReductionKind::Mul),
            "min" => Ok(ReductionKind::Min),
            "max" => Ok(ReductionKind::Max),
            _ => Err(()),
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Typed view of an `omp.map_info` op.
#[derive(Clone, Debug, PartialEq)]
pub struct MapInfo {
    pub identifier: String,
    pub kind: MapKind,
    /// One `!omp.bounds` value per dimension.
    pub bounds: Vec<ValueId>,
    pub var: ValueId,
}

impl MapInfo {
    pub fn from_op(op: &Operation) -> Option<MapInfo> {
        if !op.is("omp.map_info") || op.operands.is_empty() {
            return None;
        }
        Some(MapInfo {
            identifier: op.str_attr("name")?.into(),
            kind: op.str_attr("map_type")?.parse().ok()?,
            bounds: op.operands[1..].to_vec(),
            var: op.operands[0],
        })
    }
}

/// Annotations of an `omp.loop`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopAnnotations {
    pub parallel_do: bool,
    /// `Some(simdlen)` iff the `simd` clause is present.
    pub simdlen: Option<u32>,
    pub reduction: Option<ReductionKind>,
    /// Explicit initiation interval, if given.
    pub ii: Option<u32>,
}

impl LoopAnnotations {
    pub fn from_op(op: &Operation) -> Result<LoopAnnotations, String> {
        let simd = op.bool_attr("simd");
        let simdlen = match (simd, op.int_attr("simdlen")) {
            (true, Some(n)) if n >= 1 => Some(n as u32),
            (true, Some(n)) => return Err(format!("simdlen must be >= 1, found {n}")),
            (true, None) => return Err("simd requires a simdlen".into()),
            (false, Some(_)) => return Err("simdlen given without simd".into()),
            (false, None) => None,
        };
        let reduction = match op.attr("reduction") {
            None => None,
            Some(a) => {
                let s = a.as_str().ok_or("reduction must be a string")?;
                Some(
                    s.parse()
                        .map_err(|_| format!("unsupported reduction operator '{s}'"))?,
                )
            }
        };
        let ii = match op.int_attr("ii") {
            None => None,
            Some(n) if n >= 1 => Some(n as u32),
            Some(n) => return Err(format!("initiation interval must be >= 1, found {n}")),
        };
        Ok(LoopAnnotations {
            parallel_do: op.bool_attr("parallel_do"),
            simdlen,
            reduction,
            ii,
        })
    }
}

fn verify_bounds(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    if c.operands(2) {
        c.operand_is(0, is_index, "index");
        c.operand_is(1, is_index, "index");
    }
    if c.results(1) {
        c.result_is(0, |t| *t == Type::Bounds, "!omp.bounds");
    }
    c.finish()
}

fn verify_map_info(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.str_attr("name");
    if let Some(k) = c.str_attr("map_type") {
        if k.parse::<MapKind>().is_err() {
            c.fail(format!("unknown map_type '{k}'"));
        }
    }
    if op.operands.is_empty() {
        c.fail("missing mapped variable operand");
        return c.finish();
    }
    c.operand_is(0, is_memref, "a memref");
    if let Some(m) = c.operand_ty(0).as_memref() {
        let nb = op.operands.len() - 1;
        if nb != m.rank() {
            c.fail(format!("bounds rank {nb} differs from memref rank {}", m.rank()));
        }
    }
    for i in 1..op.operands.len() {
        c.operand_is(i, |t| *t == Type::Bounds, "!omp.bounds");
    }
    if c.results(1) && c.result_ty(0) != c.operand_ty(0) {
        c.fail("result type must equal the mapped variable type");
    }
    c.finish()
}

fn check_map_operands(c: &mut Checks<'_, '_>) {
    let mut names = BTreeSet::new();
    for i in 0..c.op.operands.len() {
        c.operand_is(i, is_memref, "a memref");
        if let Some(d) = c.ctx.def(c.op.operands[i]) {
            if let Some(info) = MapInfo::from_op(d) {
                if !names.insert(info.identifier.clone()) {
                    c.fail(format!("variable '{}' is mapped twice", info.identifier));
                }
            }
        }
    }
}

fn verify_target(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    check_map_operands(&mut c);
    if c.regions(1) {
        let body = &op.regions[0];
        if body.args.len() != op.operands.len() {
            c.fail("region must take one argument per mapped operand");
        } else {
            for (i, (a, o)) in body.args.iter().zip(&op.operands).enumerate() {
                if ctx.ty(*a) != ctx.ty(*o) {
                    c.fail(format!("region argument #{i} type differs from its operand"));
                }
            }
        }
        c.region_ends_with(0, "omp.terminator");
        for v in body.free_values() {
            if ctx.ty(v).is_memref() {
                c.fail(format!("region uses buffer {v} that is not mapped"));
            }
        }
    }
    c.finish()
}

fn verify_target_data(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    check_map_operands(&mut c);
    for &o in &op.operands {
        if ctx.def(o).is_some_and(|d| !d.is("omp.map_info")) {
            c.fail("operands must be produced by omp.map_info");
            break;
        }
    }
    if c.regions(1) {
        if !op.regions[0].args.is_empty() {
            c.fail("region takes no arguments");
        }
        c.region_ends_with(0, "omp.terminator");
    }
    c.finish()
}

fn verify_loop(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    let ann = match LoopAnnotations::from_op(op) {
        Ok(a) => Some(a),
        Err(e) => {
            c.fail(e);
            None
        }
    };
    let has_red = ann.is_some_and(|a| a.reduction.is_some());
    let expected = if has_red { 4 } else { 3 };
    if c.operands(expected) {
        for i in 0..3 {
            c.operand_is(i, is_index, "index");
        }
        if has_red {
            c.operand_is(3, |t| t.as_memref().is_some_and(|m| m.rank() == 0), "a rank-0 memref");
        }
    }
    if c.regions(1) {
        let body = &op.regions[0];
        if body.args.len() != 1 || !ctx.ty(body.args[0]).is_index() {
            c.fail("body must take exactly one index argument");
        }
        c.region_ends_with(0, "omp.yield");
        if let Some(y) = body.ops.last().filter(|y| y.is("omp.yield")) {
            if has_red {
                let elem = op
                    .operands
                    .get(3)
                    .and_then(|v| ctx.ty(*v).as_memref())
                    .map(|m| Type::Scalar(m.element));
                if y.operands.len() != 1 || elem.as_ref() != Some(ctx.ty(y.operands[0])) {
                    c.fail("reduction body must yield one value of the reduction element type");
                }
            } else if !y.operands.is_empty() {
                c.fail("loop without reduction yields nothing");
            }
        }
    }
    c.finish()
}

fn verify_yield(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.results(0);
    c.parent_is(&["omp.loop"]);
    c.terminator();
    c.finish()
}

fn verify_terminator(op: &Operation, ctx: &OpContext<'_>) -> Vec<String> {
    let mut c = Checks::new(op, ctx);
    c.operands(0);
    c.results(0);
    c.parent_is(&["omp.target", "omp.target_data"]);
    c.terminator();
    c.finish()
}
