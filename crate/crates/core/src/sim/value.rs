use alloc::vec;
use alloc::vec::Vec;

use crate::ir::ScalarType;

/// Flat, row-major element storage.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayData {
    /// Integer-like elements (any width, index, i1), stored sign-extended.
    Int(Vec<i64>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl ArrayData {
    pub fn zeros(element: ScalarType, len: usize) -> ArrayData {
        match element {
            ScalarType::Float(32) => ArrayData::F32(vec![0.0; len]),
            ScalarType::Float(_) => ArrayData::F64(vec![0.0; len]),
            _ => ArrayData::Int(vec![0; len]),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayData::Int(v) => v.len(),
            ArrayData::F32(v) => v.len(),
            ArrayData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether elements of type `t` can be stored here.
    pub fn holds(&self, t: ScalarType) -> bool {
        matches!(
            (self, t),
            (ArrayData::Int(_), ScalarType::Int(_) | ScalarType::Index)
                | (ArrayData::F32(_), ScalarType::Float(32))
                | (ArrayData::F64(_), ScalarType::Float(64))
        )
    }

    pub(crate) fn get(&self, i: usize) -> RtVal {
        match self {
            ArrayData::Int(v) => RtVal::Int(v[i]),
            ArrayData::F32(v) => RtVal::F32(v[i]),
            ArrayData::F64(v) => RtVal::F64(v[i]),
        }
    }

    pub(crate) fn set(&mut self, i: usize, x: RtVal) -> bool {
        match (self, x) {
            (ArrayData::Int(v), RtVal::Int(x)) => v[i] = x,
            (ArrayData::F32(v), RtVal::F32(x)) => v[i] = x,
            (ArrayData::F64(v), RtVal::F64(x)) => v[i] = x,
            _ => return false,
        }
        true
    }
}

/// A shaped array handed to or returned from a simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct HostArray {
    pub shape: Vec<usize>,
    pub data: ArrayData,
}

impl HostArray {
    pub fn f32(data: Vec<f32>) -> Self {
        HostArray {
            shape: vec![data.len()],
            data: ArrayData::F32(data),
        }
    }

    pub fn f64(data: Vec<f64>) -> Self {
        HostArray {
            shape: vec![data.len()],
            data: ArrayData::F64(data),
        }
    }

    pub fn int(data: Vec<i64>) -> Self {
        HostArray {
            shape: vec![data.len()],
            data: ArrayData::Int(data),
        }
    }

    pub fn with_shape(mut self, shape: Vec<usize>) -> Self {
        self.shape = shape;
        self
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            ArrayData::F32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<&[f64]> {
        match &self.data {
            ArrayData::F64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&[i64]> {
        match &self.data {
            ArrayData::Int(v) => Some(v),
            _ => None,
        }
    }
}

/// Named argument for the entry function.
#[derive(Clone, Debug, PartialEq)]
pub enum HostValue {
    Array(HostArray),
    Int(i64),
    F32(f32),
    F64(f64),
}

impl From<HostArray> for HostValue {
    fn from(a: HostArray) -> Self {
        HostValue::Array(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BufferId(pub(crate) usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelId(pub(crate) usize);

/// Runtime value of an SSA value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RtVal {
    /// Any integer-like scalar, already wrapped to its type's width.
    Int(i64),
    F32(f32),
    F64(f64),
    MemRef(BufferId),
    Kernel(KernelId),
    Bounds(i64, i64),
    Token(usize),
    Protocol,
}

/// Truncates `v` to `width` bits and sign-extends it back (i1 is kept as 0/1).
pub(crate) fn wrap_int(v: i64, ty: ScalarType) -> i64 {
    match ty {
        ScalarType::Int(1) => v & 1,
        ScalarType::Int(w) if w < 64 => {
            let shift = 64 - w;
            (v << shift) >> shift
        }
        _ => v,
    }
}

/// Zero-extended view of a `width`-bit value, for unsigned ops.
pub(crate) fn as_unsigned(v: i64, ty: ScalarType) -> u64 {
    match ty {
        ScalarType::Int(w) if w < 64 => (v as u64) & ((1u64 << w) - 1),
        _ => v as u64,
    }
}
