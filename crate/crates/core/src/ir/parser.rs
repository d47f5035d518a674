//! Recursive-descent parser for the textual IR.
//!
//! Accepted syntax, informally:
//!
//! ```text
//! module    ::= `module` (`attributes` dict)? `{` op* `}`
//! op        ::= (value (`,` value)* `=`)? name operands? (`<` dict `>`)? regions? (`:` sig)?
//! func      ::= `func.func` `@`name `(` (value `:` type),* `)` (`attributes` dict)? `{` op* `}`
//! region    ::= `{` (`^`label `(` (value `:` type),* `)` `:`)? op* `}`
//! sig       ::= `(` type,* `)` `->` (type | `(` type,* `)`)
//! ```
//!
//! `//` starts a line comment.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::attr::Attribute;
use super::module::{AttrMap, Block, Module, Operation, ValueId, ValueTable};
use super::types::{MemRefType, ScalarType, Type};
use crate::dialects::Registry;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndefinedValue(String),
    Redefinition(String),
    UnknownOp(String),
    TypeMismatch(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(m) => format!("syntax error: {m}"),
        ParseErrorKind::UndefinedValue(v) => format!("undefined value %{v}"),
        ParseErrorKind::Redefinition(v) => format!("redefinition of value %{v}"),
        ParseErrorKind::UnknownOp(n) => format!("unknown operation '{n}'"),
        ParseErrorKind::TypeMismatch(m) => format!("type mismatch: {m}"),
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses with the full set of dialects known to this crate.
pub fn parse_module(text: &str) -> PResult<Module> {
    parse_module_with(text, &crate::dialects::standard_registry())
}

pub fn parse_module_with(text: &str, registry: &Registry) -> PResult<Module> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        registry,
        values: ValueTable::new(),
        scopes: Vec::new(),
    };
    let m = p.module()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err_syntax("trailing input after module"));
    }
    Ok(m)
}

struct Scope {
    names: BTreeMap<String, ValueId>,
    isolated: bool,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    registry: &'a Registry,
    values: ValueTable,
    scopes: Vec<Scope>,
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'$'
}

impl Parser<'_> {
    // ---- lexical helpers ----

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'/' && self.src.get(self.pos + 1) == Some(&b'/') {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            line: self.line,
            column: self.col,
        }
    }

    fn err_syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.into()))
    }

    /// Skips whitespace, then consumes `s` if it is next.
    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            for _ in 0..s.len() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = self.describe_next();
            Err(self.err_syntax(format!("expected '{s}', found {found}")))
        }
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(_) => {
                let end = (self.pos + 12).min(self.src.len());
                let snippet = String::from_utf8_lossy(&self.src[self.pos..end]);
                let snippet = snippet.split('\n').next().unwrap_or("");
                format!("'{snippet}'")
            }
        }
    }

    fn peek_after_ws(&mut self) -> Option<u8> {
        self.skip_ws();
        self.peek()
    }

    fn ident(&mut self) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_ident_char(c) {
                self.bump();
            } else {
                break;
            }
        }
        if start == self.pos {
            let found = self.describe_next();
            return Err(self.err_syntax(format!("expected identifier, found {found}")));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    /// Peeks the identifier at the cursor without consuming it.
    fn peek_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        rest.starts_with(kw.as_bytes())
            && rest
                .get(kw.len())
                .is_none_or(|c| !is_ident_char(*c))
    }

    fn value_name(&mut self) -> PResult<String> {
        self.expect("%")?;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err_syntax("expected value name after '%'"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn string_lit(&mut self) -> PResult<String> {
        self.expect("\"")?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err_syntax("unterminated string")),
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push('"'),
                    Some(b'\\') => out.push('\\'),
                    Some(b'n') => out.push('\n'),
                    Some(b't') => out.push('\t'),
                    _ => return Err(self.err_syntax("invalid escape in string")),
                },
                Some(c) if c < 0x80 => out.push(c as char),
                Some(_) => {
                    // Multi-byte UTF-8: copy the whole sequence.
                    let start = self.pos - 1;
                    while let Some(c) = self.peek() {
                        if c & 0xC0 == 0x80 {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push_str(&String::from_utf8_lossy(&self.src[start..self.pos]));
                }
            }
        }
        Ok(out)
    }

    fn number_token(&mut self) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.bump();
        }
        while let Some(c) = self.peek() {
            let prev = self.src.get(self.pos.wrapping_sub(1)).copied();
            let sign_in_exp = (c == b'-' || c == b'+') && matches!(prev, Some(b'e') | Some(b'E'));
            if c.is_ascii_alphanumeric() || c == b'.' || sign_in_exp {
                self.bump();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err_syntax("expected number"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn uint(&mut self) -> PResult<u64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.bump();
            } else {
                break;
            }
        }
        core::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err_syntax("expected unsigned integer"))
    }

    // ---- scopes ----

    fn push_scope(&mut self, isolated: bool) {
        self.scopes.push(Scope {
            names: BTreeMap::new(),
            isolated,
        });
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    fn lookup(&self, name: &str) -> Option<ValueId> {
        for s in self.scopes.iter().rev() {
            if let Some(v) = s.names.get(name) {
                return Some(*v);
            }
            if s.isolated {
                break;
            }
        }
        None
    }

    fn define(&mut self, name: String, ty: Type) -> PResult<ValueId> {
        if self.lookup(&name).is_some() {
            return Err(self.err(ParseErrorKind::Redefinition(name)));
        }
        let id = self.values.create(ty);
        self.scopes
            .last_mut()
            .expect("scope stack is never empty while parsing ops")
            .names
            .insert(name, id);
        Ok(id)
    }

    fn use_value(&mut self) -> PResult<ValueId> {
        self.skip_ws();
        let (line, column) = (self.line, self.col);
        let name = self.value_name()?;
        self.lookup(&name).ok_or(ParseError {
            kind: ParseErrorKind::UndefinedValue(name),
            line,
            column,
        })
    }

    // ---- types and attributes ----

    fn scalar_type(&mut self) -> PResult<ScalarType> {
        let id = self.ident()?;
        parse_scalar(&id).ok_or_else(|| self.err_syntax(format!("unknown scalar type '{id}'")))
    }

    fn ty(&mut self) -> PResult<Type> {
        self.skip_ws();
        if self.eat("!") {
            let id = self.ident()?;
            return match id.as_str() {
                "device.kernelhandle" => Ok(Type::KernelHandle),
                "hls.axi_protocol" => Ok(Type::AxiProtocol),
                "omp.bounds" => Ok(Type::Bounds),
                "memref.dma_token" => Ok(Type::DmaToken),
                _ => Err(self.err_syntax(format!("unknown type '!{id}'"))),
            };
        }
        if self.peek_keyword("memref") {
            self.ident()?;
            return self.memref_body().map(Type::MemRef);
        }
        Ok(Type::Scalar(self.scalar_type()?))
    }

    fn memref_body(&mut self) -> PResult<MemRefType> {
        self.expect("<")?;
        let mut shape = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'?') => {
                    self.bump();
                    shape.push(None);
                }
                Some(c) if c.is_ascii_digit() => {
                    let n = self.uint()?;
                    if n == 0 {
                        return Err(self.err_syntax("memref dimensions must be positive"));
                    }
                    shape.push(Some(n));
                }
                _ => break,
            }
            if self.peek() != Some(b'x') {
                return Err(self.err_syntax("expected 'x' after memref dimension"));
            }
            self.bump();
        }
        let element = self.scalar_type()?;
        let mut memory_space = 0;
        if self.eat(",") {
            self.skip_ws();
            if self.peek() == Some(b'-') {
                return Err(self.err_syntax("memory space must be non-negative"));
            }
            let n = self.uint()?;
            memory_space =
                u32::try_from(n).map_err(|_| self.err_syntax("memory space out of range"))?;
            if self.eat(":") {
                let t = self.scalar_type()?;
                if !t.is_integer_like() {
                    return Err(self.err_syntax("memory space must be an integer"));
                }
            }
        }
        self.expect(">")?;
        Ok(MemRefType {
            shape,
            element,
            memory_space,
        })
    }

    fn attr(&mut self) -> PResult<Attribute> {
        match self.peek_after_ws() {
            Some(b'"') => Ok(Attribute::Str(self.string_lit()?)),
            Some(b'@') => {
                self.bump();
                Ok(Attribute::Symbol(self.ident()?))
            }
            Some(b'[') => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat("]") {
                    loop {
                        items.push(self.attr()?);
                        if self.eat("]") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                Ok(Attribute::Array(items))
            }
            _ if self.peek_keyword("true") => {
                self.ident()?;
                Ok(Attribute::Bool(true))
            }
            _ if self.peek_keyword("false") => {
                self.ident()?;
                Ok(Attribute::Bool(false))
            }
            _ => {
                let tok = self.number_token()?;
                let ty = if self.eat(":") {
                    self.scalar_type()?
                } else {
                    ScalarType::I64
                };
                if ty.is_float() {
                    let v = parse_float(&tok)
                        .ok_or_else(|| self.err_syntax(format!("invalid float literal '{tok}'")))?;
                    Ok(Attribute::Float(v, ty))
                } else {
                    let v: i64 = tok
                        .parse()
                        .map_err(|_| self.err_syntax(format!("invalid integer literal '{tok}'")))?;
                    Ok(Attribute::Int(v, ty))
                }
            }
        }
    }

    fn attr_dict(&mut self) -> PResult<AttrMap> {
        self.expect("{")?;
        let mut map = AttrMap::new();
        if self.eat("}") {
            return Ok(map);
        }
        loop {
            let key = self.ident()?;
            self.expect("=")?;
            let value = self.attr()?;
            if map.insert(key.clone(), value).is_some() {
                return Err(self.err_syntax(format!("duplicate attribute '{key}'")));
            }
            if self.eat("}") {
                break;
            }
            self.expect(",")?;
        }
        Ok(map)
    }

    // ---- structure ----

    fn module(&mut self) -> PResult<Module> {
        self.skip_ws();
        if !self.peek_keyword("module") && !self.peek_keyword("builtin.module") {
            return Err(self.err_syntax("expected 'module'"));
        }
        self.ident()?;
        let attributes = if self.peek_keyword("attributes") {
            self.ident()?;
            self.attr_dict()?
        } else {
            AttrMap::new()
        };
        self.expect("{")?;
        self.push_scope(true);
        let ops = self.ops_until_brace()?;
        self.pop_scope();
        Ok(Module {
            attributes,
            body: Block {
                args: Vec::new(),
                ops,
            },
            values: core::mem::take(&mut self.values),
        })
    }

    /// Parses ops until the closing `}` (consumed).
    fn ops_until_brace(&mut self) -> PResult<Vec<Operation>> {
        let mut ops = Vec::new();
        loop {
            match self.peek_after_ws() {
                Some(b'}') => {
                    self.bump();
                    return Ok(ops);
                }
                None => return Err(self.err_syntax("unexpected end of input, expected '}'")),
                _ => ops.push(self.op()?),
            }
        }
    }

    fn region(&mut self) -> PResult<Block> {
        self.expect("{")?;
        self.push_scope(false);
        let mut args = Vec::new();
        if self.peek_after_ws() == Some(b'^') {
            self.bump();
            self.ident()?;
            self.expect("(")?;
            if !self.eat(")") {
                loop {
                    self.skip_ws();
                    let name = self.value_name()?;
                    self.expect(":")?;
                    let ty = self.ty()?;
                    args.push(self.define(name, ty)?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect(":")?;
        }
        let ops = self.ops_until_brace()?;
        self.pop_scope();
        Ok(Block { args, ops })
    }

    fn op(&mut self) -> PResult<Operation> {
        let mut result_names = Vec::new();
        if self.peek_after_ws() == Some(b'%') {
            loop {
                self.skip_ws();
                let (line, column) = (self.line, self.col);
                result_names.push((self.value_name()?, line, column));
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("=")?;
        }
        self.skip_ws();
        let (line, column) = (self.line, self.col);
        let name = self.ident()?;
        if !self.registry.contains(&name) {
            return Err(ParseError {
                kind: ParseErrorKind::UnknownOp(name),
                line,
                column,
            });
        }
        if name == "func.func" && self.peek_after_ws() == Some(b'@') {
            if !result_names.is_empty() {
                return Err(self.err_syntax("func.func has no results"));
            }
            return self.func();
        }

        let mut op = Operation::new(name);
        if self.peek_after_ws() == Some(b'(') && !self.paren_opens_region() {
            self.bump();
            if !self.eat(")") {
                loop {
                    op.operands.push(self.use_value()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
        }
        if self.peek_after_ws() == Some(b'<') {
            self.bump();
            op.attributes = self.attr_dict()?;
            self.expect(">")?;
        }
        if self.peek_after_ws() == Some(b'(') {
            self.bump();
            loop {
                op.regions.push(self.region()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let mut result_types = Vec::new();
        if self.eat(":") {
            self.expect("(")?;
            let mut operand_types = Vec::new();
            if !self.eat(")") {
                loop {
                    operand_types.push(self.ty()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect("->")?;
            if self.eat("(") {
                if !self.eat(")") {
                    loop {
                        result_types.push(self.ty()?);
                        if self.eat(")") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
            } else {
                result_types.push(self.ty()?);
            }
            if operand_types.len() != op.operands.len() {
                return Err(self.err(ParseErrorKind::TypeMismatch(format!(
                    "'{}' has {} operands but signature lists {} types",
                    op.name,
                    op.operands.len(),
                    operand_types.len()
                ))));
            }
            for (i, (v, t)) in op.operands.iter().zip(&operand_types).enumerate() {
                let actual = self.values.ty(*v);
                if actual != t {
                    return Err(self.err(ParseErrorKind::TypeMismatch(format!(
                        "operand #{i} of '{}' has type {actual}, signature says {t}",
                        op.name
                    ))));
                }
            }
        } else if !op.operands.is_empty() || !result_names.is_empty() {
            return Err(self.err_syntax(format!("'{}' requires a type signature", op.name)));
        }
        if result_types.len() != result_names.len() {
            return Err(ParseError {
                kind: ParseErrorKind::TypeMismatch(format!(
                    "'{}' defines {} results but signature lists {} result types",
                    op.name,
                    result_names.len(),
                    result_types.len()
                )),
                line,
                column,
            });
        }
        for ((rname, rline, rcol), ty) in result_names.into_iter().zip(result_types) {
            let id = self.define(rname, ty).map_err(|mut e| {
                e.line = rline;
                e.column = rcol;
                e
            })?;
            op.results.push(id);
        }
        Ok(op)
    }

    /// True when the `(` at the cursor starts a region list `({`.
    fn paren_opens_region(&self) -> bool {
        let mut i = self.pos + 1;
        while let Some(c) = self.src.get(i) {
            if c.is_ascii_whitespace() {
                i += 1;
            } else {
                return *c == b'{';
            }
        }
        false
    }

    fn func(&mut self) -> PResult<Operation> {
        self.expect("@")?;
        let sym = self.ident()?;
        self.push_scope(true);
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                self.skip_ws();
                let name = self.value_name()?;
                self.expect(":")?;
                let ty = self.ty()?;
                args.push(self.define(name, ty)?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let mut attributes = if self.peek_keyword("attributes") {
            self.ident()?;
            self.attr_dict()?
        } else {
            AttrMap::new()
        };
        attributes.insert("sym_name".into(), Attribute::Symbol(sym));
        self.expect("{")?;
        let ops = self.ops_until_brace()?;
        self.pop_scope();
        let mut op = Operation::new("func.func");
        op.attributes = attributes;
        op.regions.push(Block { args, ops });
        Ok(op)
    }
}

pub(crate) fn parse_scalar(s: &str) -> Option<ScalarType> {
    let t = match s {
        "index" => ScalarType::Index,
        _ => {
            let (kind, width) = s.split_at(1);
            let w: u32 = width.parse().ok()?;
            match kind {
                "i" => ScalarType::Int(w),
                "f" => ScalarType::Float(w),
                _ => return None,
            }
        }
    };
    t.is_valid().then_some(t)
}

fn parse_float(tok: &str) -> Option<f64> {
    match tok {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "NaN" | "nan" => Some(f64::NAN),
        _ => tok.parse().ok(),
    }
}
