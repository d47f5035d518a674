//! Simulation inputs and outputs as decimal text.
//!
//! A binding is `name=v0,v1,...`. Several bindings may share one argument
//! (`x=1,2,y=3,4,a=2`): a token containing `=` starts a new binding. A
//! shape prefix `RxC:` gives the dimensions of a multi-dimensional array,
//! and `name=@path` reads the values from a file. Files hold decimal values
//! separated by commas or whitespace, or raw little-endian elements when
//! the path ends in `.bin`.
//!
//! Values are typed by the entry function's parameters: a scalar parameter
//! takes exactly one value, a memref parameter takes an array whose length
//! matches its static dimensions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use omp2hls_core::ir::{function_arg_names, Module, Operation, ScalarType, Type};
use omp2hls_core::sim::{ArrayData, HostArray, HostValue, Inputs};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("malformed binding '{0}': expected name=values")]
    Binding(String),
    #[error("'{name}': bad shape '{shape}'")]
    Shape { name: String, shape: String },
    #[error("'{name}': cannot parse '{text}' as {ty}")]
    Value { name: String, text: String, ty: ScalarType },
    #[error("'{name}': {message}")]
    Mismatch { name: String, message: String },
    #[error("no parameter named '{0}'")]
    UnknownName(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Text(Vec<String>),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: String,
    pub shape: Option<Vec<usize>>,
    pub values: Values,
}

/// Splits command-line bindings; see the module docs for the syntax.
pub fn parse_bindings<S: AsRef<str>>(args: &[S]) -> Result<Vec<Binding>, VectorError> {
    let mut out: Vec<Binding> = Vec::new();
    for arg in args {
        for tok in arg.as_ref().split(',').map(str::trim) {
            if let Some((name, rest)) = tok.split_once('=') {
                let name = name.trim();
                if name.is_empty() {
                    return Err(VectorError::Binding(arg.as_ref().into()));
                }
                let (shape, rest) = split_shape(name, rest)?;
                let values = match rest.strip_prefix('@') {
                    Some(p) => Values::File(PathBuf::from(p)),
                    None if rest.is_empty() => Values::Text(Vec::new()),
                    None => Values::Text(vec![rest.to_string()]),
                };
                out.push(Binding {
                    name: name.into(),
                    shape,
                    values,
                });
            } else {
                match out.last_mut() {
                    Some(Binding {
                        values: Values::Text(v),
                        ..
                    }) => {
                        if !tok.is_empty() {
                            v.push(tok.to_string())
                        }
                    }
                    _ => return Err(VectorError::Binding(arg.as_ref().into())),
                }
            }
        }
    }
    Ok(out)
}

fn split_shape<'a>(name: &str, rest: &'a str) -> Result<(Option<Vec<usize>>, &'a str), VectorError> {
    let Some((shape, tail)) = rest.split_once(':') else {
        return Ok((None, rest));
    };
    let dims = shape
        .split('x')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| VectorError::Shape {
            name: name.into(),
            shape: shape.into(),
        })?;
    Ok((Some(dims), tail))
}

fn parse_elem(name: &str, text: &str, ty: ScalarType) -> Result<Element, VectorError> {
    let err = || VectorError::Value {
        name: name.into(),
        text: text.into(),
        ty,
    };
    Ok(match ty {
        ScalarType::Float(32) => Element::F32(text.parse().map_err(|_| err())?),
        ScalarType::Float(_) => Element::F64(text.parse().map_err(|_| err())?),
        ScalarType::Int(1) => Element::Int(match text {
            "true" => 1,
            "false" => 0,
            _ => text.parse().map_err(|_| err())?,
        }),
        _ => Element::Int(text.parse().map_err(|_| err())?),
    })
}

enum Element {
    Int(i64),
    F32(f32),
    F64(f64),
}

fn read_values(name: &str, path: &Path, ty: ScalarType) -> Result<Vec<Element>, VectorError> {
    let io = |source| VectorError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.extension().is_some_and(|e| e == "bin") {
        let bytes = std::fs::read(path).map_err(io)?;
        let w = ty.byte_width();
        if bytes.len() % w != 0 {
            return Err(VectorError::Mismatch {
                name: name.into(),
                message: format!("{} bytes is not a whole number of {ty} elements", bytes.len()),
            });
        }
        return Ok(bytes.chunks_exact(w).map(|c| decode(c, ty)).collect());
    }
    let text = std::fs::read_to_string(path).map_err(io)?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_elem(name, t, ty))
        .collect()
}

fn decode(c: &[u8], ty: ScalarType) -> Element {
    match ty {
        ScalarType::Float(32) => Element::F32(f32::from_le_bytes(c.try_into().unwrap())),
        ScalarType::Float(_) => Element::F64(f64::from_le_bytes(c.try_into().unwrap())),
        _ => {
            let mut b = [0u8; 8];
            b[..c.len()].copy_from_slice(c);
            let shift = 64 - 8 * c.len() as u32;
            Element::Int(i64::from_le_bytes(b) << shift >> shift)
        }
    }
}

/// Types `bindings` against the parameters of `entry` in `module`.
pub fn bind_inputs(module: &Module, entry: &Operation, bindings: &[Binding]) -> Result<Inputs, VectorError> {
    let params: BTreeMap<String, &Type> = function_arg_names(entry)
        .into_iter()
        .zip(entry.body().args.iter().map(|a| module.value_type(*a)))
        .collect();
    let mut inputs = Inputs::new();
    for b in bindings {
        let ty = *params.get(&b.name).ok_or_else(|| VectorError::UnknownName(b.name.clone()))?;
        let elem = match ty {
            Type::Scalar(s) => *s,
            Type::MemRef(m) => m.element,
            other => {
                return Err(VectorError::Mismatch {
                    name: b.name.clone(),
                    message: format!("parameter of type {other:?} cannot be given on the command line"),
                })
            }
        };
        let values = match &b.values {
            Values::Text(v) => v.iter().map(|t| parse_elem(&b.name, t, elem)).collect::<Result<Vec<_>, _>>()?,
            Values::File(p) => read_values(&b.name, p, elem)?,
        };
        let mismatch = |message: String| VectorError::Mismatch {
            name: b.name.clone(),
            message,
        };
        let value = match ty {
            Type::Scalar(_) => {
                let [v] = <[Element; 1]>::try_from(values)
                    .map_err(|v| mismatch(format!("scalar parameter needs one value, got {}", v.len())))?;
                match v {
                    Element::Int(i) => HostValue::Int(i),
                    Element::F32(f) => HostValue::F32(f),
                    Element::F64(f) => HostValue::F64(f),
                }
            }
            Type::MemRef(m) => {
                let shape = match &b.shape {
                    Some(s) => s.clone(),
                    None if m.rank() == 0 => Vec::new(),
                    None if m.rank() == 1 => vec![values.len()],
                    None => m.shape.iter().map(|d| d.unwrap_or(0) as usize).collect(),
                };
                if shape.len() != m.rank() {
                    return Err(mismatch(format!("expected rank {}, got shape {shape:?}", m.rank())));
                }
                for (d, s) in m.shape.iter().zip(&shape) {
                    if d.is_some_and(|d| d as usize != *s) {
                        return Err(mismatch(format!("shape {shape:?} does not match {m}")));
                    }
                }
                let n: usize = shape.iter().product();
                if n != values.len() {
                    return Err(mismatch(format!("shape {shape:?} needs {n} values, got {}", values.len())));
                }
                let data = match elem {
                    ScalarType::Float(32) => ArrayData::F32(values.into_iter().map(|e| as_f64(e) as f32).collect()),
                    ScalarType::Float(_) => ArrayData::F64(values.into_iter().map(as_f64).collect()),
                    _ => ArrayData::Int(values.into_iter().map(as_i64).collect()),
                };
                HostValue::Array(HostArray { shape, data })
            }
            _ => unreachable!(),
        };
        inputs.insert(b.name.clone(), value);
    }
    Ok(inputs)
}

fn as_f64(e: Element) -> f64 {
    match e {
        Element::Int(i) => i as f64,
        Element::F32(f) => f as f64,
        Element::F64(f) => f,
    }
}

fn as_i64(e: Element) -> i64 {
    match e {
        Element::Int(i) => i,
        Element::F32(f) => f as i64,
        Element::F64(f) => f as i64,
    }
}

/// One `name=values` line per array, with a shape prefix unless the
/// array is one-dimensional. The result parses back with `parse_bindings`.
pub fn format_outputs(outputs: &BTreeMap<String, HostArray>) -> String {
    let mut s = String::new();
    for (name, a) in outputs {
        let _ = write!(s, "{name}=");
        if a.shape.len() != 1 {
            let dims: Vec<String> = a.shape.iter().map(usize::to_string).collect();
            let _ = write!(s, "{}:", dims.join("x"));
        }
        let items: Vec<String> = match &a.data {
            ArrayData::Int(v) => v.iter().map(i64::to_string).collect(),
            ArrayData::F32(v) => v.iter().map(f32::to_string).collect(),
            ArrayData::F64(v) => v.iter().map(f64::to_string).collect(),
        };
        s.push_str(&items.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use omp2hls_core::ir::parse_module;

    const SIG: &str = "module {\n  func.func @main(%n: index, %a: f32, %x: memref<?xf32>, %m: memref<2x3xi32>, %s: memref<i64>) \
        attributes {arg_names = [\"n\", \"a\", \"x\", \"m\", \"s\"]} {\n    func.return\n  }\n}\n";

    fn bind(args: &[&str]) -> Result<Inputs, VectorError> {
        let m = parse_module(SIG).unwrap();
        let f = m.function("main").unwrap();
        bind_inputs(&m, f, &parse_bindings(args)?)
    }

    #[test]
    fn bindings_share_one_argument() {
        let b = parse_bindings(&["x=1,2,3,a=2", "n=3"]).unwrap();
        let names: Vec<&str> = b.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, ["x", "a", "n"]);
        assert_eq!(b[0].values, Values::Text(vec!["1".into(), "2".into(), "3".into()]));
    }

    #[test]
    fn values_follow_parameter_types() {
        let i = bind(&["n=3,a=2.5,x=1,2,3,m=2x3:1,2,3,4,5,6,s=7"]).unwrap();
        assert_eq!(i["n"], HostValue::Int(3));
        assert_eq!(i["a"], HostValue::F32(2.5));
        assert_eq!(i["x"], HostValue::Array(HostArray::f32(vec![1.0, 2.0, 3.0])));
        assert_eq!(
            i["m"],
            HostValue::Array(HostArray::int(vec![1, 2, 3, 4, 5, 6]).with_shape(vec![2, 3]))
        );
        assert_eq!(i["s"], HostValue::Array(HostArray::int(vec![7]).with_shape(vec![])));
    }

    #[test]
    fn static_shape_is_implied() {
        let i = bind(&["m=1,2,3,4,5,6"]).unwrap();
        let HostValue::Array(a) = &i["m"] else { panic!() };
        assert_eq!(a.shape, [2, 3]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(bind(&["q=1"]), Err(VectorError::UnknownName(_))));
        assert!(matches!(bind(&["n=1,2"]), Err(VectorError::Mismatch { .. })));
        assert!(matches!(bind(&["m=1,2"]), Err(VectorError::Mismatch { .. })));
        assert!(matches!(bind(&["a=x"]), Err(VectorError::Value { .. })));
        assert!(matches!(parse_bindings(&["1,2"]), Err(VectorError::Binding(_))));
    }

    #[test]
    fn files_are_read_as_text_or_binary() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("x.txt");
        std::fs::write(&t, "1.5 2.5\n3.5,").unwrap();
        let b = dir.path().join("x.bin");
        let bytes: Vec<u8> = [4.0f32, 5.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(&b, bytes).unwrap();
        let i = bind(&[&format!("x=@{}", t.display())]).unwrap();
        assert_eq!(i["x"], HostValue::Array(HostArray::f32(vec![1.5, 2.5, 3.5])));
        let i = bind(&[&format!("x=@{}", b.display())]).unwrap();
        assert_eq!(i["x"], HostValue::Array(HostArray::f32(vec![4.0, 5.0])));
    }

    #[test]
    fn outputs_parse_back() {
        let mut o = BTreeMap::new();
        o.insert("m".to_string(), HostArray::int(vec![1, 2, 3, 4, 5, 6]).with_shape(vec![2, 3]));
        o.insert("x".to_string(), HostArray::f32(vec![0.1, 2.0]));
        let text = format_outputs(&o);
        assert_eq!(text, "m=2x3:1,2,3,4,5,6\nx=0.1,2\n");
        let lines: Vec<&str> = text.lines().collect();
        let i = bind(&lines).unwrap();
        assert_eq!(i["x"], HostValue::Array(o["x"].clone()));
        assert_eq!(i["m"], HostValue::Array(o["m"].clone()));
    }
}
