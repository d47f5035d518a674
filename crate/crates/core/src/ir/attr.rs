use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::types::ScalarType;

/// Compile-time constant attached to an operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Attribute {
    Str(String),
    Int(i64, ScalarType),
    Float(f64, ScalarType),
    Bool(bool),
    /// `@name` reference to a symbol (function).
    Symbol(String),
    Array(Vec<Attribute>),
}

impl Attribute {
    pub fn str(s: impl Into<String>) -> Self {
        Attribute::Str(s.into())
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        Attribute::Symbol(s.into())
    }

    pub fn i32(v: i64) -> Self {
        Attribute::Int(v, ScalarType::I32)
    }

    pub fn i64(v: i64) -> Self {
        Attribute::Int(v, ScalarType::I64)
    }

    pub fn index(v: i64) -> Self {
        Attribute::Int(v, ScalarType::Index)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Attribute::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Attribute::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Attribute::Int(v, _) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Attribute::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Attribute]> {
        match self {
            Attribute::Array(a) => Some(a),
            _ => None,
        }
    }
}

pub(crate) fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribute::Str(s) => write_escaped(f, s),
            Attribute::Int(v, ty) => write!(f, "{v} : {ty}"),
            // Debug formatting of f64 is shortest-round-trip and always keeps a
            // fractional part or exponent.
            Attribute::Float(v, ty) => write!(f, "{v:?} : {ty}"),
            Attribute::Bool(b) => write!(f, "{b}"),
            Attribute::Symbol(s) => write!(f, "@{s}"),
            Attribute::Array(items) => {
                f.write_str("[")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str("]")
            }
        }
    }
}
