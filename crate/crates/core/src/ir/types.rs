use alloc::vec::Vec;
use core::fmt;

/// Scalar element types usable both as SSA value types and memref elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarType {
    /// Signless integer of the given bit width (1, 8, 16, 32 or 64).
    Int(u32),
    /// IEEE float of the given width (32 or 64).
    Float(u32),
    Index,
}

impl ScalarType {
    pub const I1: ScalarType = ScalarType::Int(1);
    pub const I32: ScalarType = ScalarType::Int(32);
    pub const I64: ScalarType = ScalarType::Int(64);
    pub const F32: ScalarType = ScalarType::Float(32);
    pub const F64: ScalarType = ScalarType::Float(64);

    pub fn is_float(self) -> bool {
        matches!(self, ScalarType::Float(_))
    }

    pub fn is_integer_like(self) -> bool {
        matches!(self, ScalarType::Int(_) | ScalarType::Index)
    }

    /// Storage size in bytes of one element.
    pub fn byte_width(self) -> usize {
        match self {
            ScalarType::Int(1) => 1,
            ScalarType::Int(w) => (w as usize).div_ceil(8),
            ScalarType::Float(w) => w as usize / 8,
            ScalarType::Index => 8,
        }
    }

    pub(crate) fn is_valid(self) -> bool {
        match self {
            ScalarType::Int(w) => matches!(w, 1 | 8 | 16 | 32 | 64),
            ScalarType::Float(w) => matches!(w, 32 | 64),
            ScalarType::Index => true,
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarType::Int(w) => write!(f, "i{w}"),
            ScalarType::Float(w) => write!(f, "f{w}"),
            ScalarType::Index => f.write_str("index"),
        }
    }
}

/// Shaped reference to memory. `None` dims are dynamic (`?`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemRefType {
    pub shape: Vec<Option<u64>>,
    pub element: ScalarType,
    pub memory_space: u32,
}

impl MemRefType {
    pub fn new(shape: Vec<Option<u64>>, element: ScalarType, memory_space: u32) -> Self {
        MemRefType {
            shape,
            element,
            memory_space,
        }
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn dynamic_dims(&self) -> usize {
        self.shape.iter().filter(|d| d.is_none()).count()
    }

    /// Same rank and element type, every dim dynamic, placed in `space`.
    pub fn to_dynamic_in(&self, space: u32) -> MemRefType {
        MemRefType {
            shape: self.shape.iter().map(|_| None).collect(),
            element: self.element,
            memory_space: space,
        }
    }
}

impl fmt::Display for MemRefType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("memref<")?;
        for d in &self.shape {
            match d {
                Some(n) => write!(f, "{n}x")?,
                None => f.write_str("?x")?,
            }
        }
        write!(f, "{}", self.element)?;
        if self.memory_space != 0 {
            write!(f, ", {} : i32", self.memory_space)?;
        }
        f.write_str(">")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Scalar(ScalarType),
    MemRef(MemRefType),
    /// `!device.kernelhandle`
    KernelHandle,
    /// `!hls.axi_protocol`
    AxiProtocol,
    /// `!omp.bounds`, one (lower, upper) pair for a single dimension.
    Bounds,
    /// `!memref.dma_token`, links a `memref.dma_start` to its `memref.wait`.
    DmaToken,
}

impl Type {
    pub const I1: Type = Type::Scalar(ScalarType::I1);
    pub const I32: Type = Type::Scalar(ScalarType::I32);
    pub const I64: Type = Type::Scalar(ScalarType::I64);
    pub const F32: Type = Type::Scalar(ScalarType::F32);
    pub const F64: Type = Type::Scalar(ScalarType::F64);
    pub const INDEX: Type = Type::Scalar(ScalarType::Index);

    pub fn memref(shape: Vec<Option<u64>>, element: ScalarType, memory_space: u32) -> Type {
        Type::MemRef(MemRefType::new(shape, element, memory_space))
    }

    pub fn as_memref(&self) -> Option<&MemRefType> {
        match self {
            Type::MemRef(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<ScalarType> {
        match self {
            Type::Scalar(s) => Some(*s),
            _ => None,
        }
    }

    pub fn is_memref(&self) -> bool {
        matches!(self, Type::MemRef(_))
    }

    pub fn is_index(&self) -> bool {
        matches!(self, Type::Scalar(ScalarType::Index))
    }
}

impl From<ScalarType> for Type {
    fn from(s: ScalarType) -> Self {
        Type::Scalar(s)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Scalar(s) => s.fmt(f),
            Type::MemRef(m) => m.fmt(f),
            Type::KernelHandle => f.write_str("!device.kernelhandle"),
            Type::AxiProtocol => f.write_str("!hls.axi_protocol"),
            Type::Bounds => f.write_str("!omp.bounds"),
            Type::DmaToken => f.write_str("!memref.dma_token"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn memref_display_omits_host_space() {
        let host = Type::memref(vec![Some(100)], ScalarType::F64, 0);
        assert_eq!(host.to_string(), "memref<100xf64>");
        let dev = Type::memref(vec![Some(100)], ScalarType::F64, 1);
        assert_eq!(dev.to_string(), "memref<100xf64, 1 : i32>");
        let scalar = Type::memref(vec![], ScalarType::I64, 0);
        assert_eq!(scalar.to_string(), "memref<i64>");
        let dynamic = Type::memref(vec![None, Some(4)], ScalarType::F32, 1);
        assert_eq!(dynamic.to_string(), "memref<?x4xf32, 1 : i32>");
    }

    #[test]
    fn byte_widths() {
        assert_eq!(ScalarType::F32.byte_width(), 4);
        assert_eq!(ScalarType::F64.byte_width(), 8);
        assert_eq!(ScalarType::I1.byte_width(), 1);
        assert_eq!(ScalarType::Index.byte_width(), 8);
    }
}
