//! Generic SSA IR: modules of operations with single-block regions.

mod attr;
mod equiv;
mod module;
mod parser;
mod printer;
mod types;
mod verify;

pub use attr::Attribute;
pub use equiv::structurally_equal;
pub use module::{
    clone_block, clone_op, defining_ops, function_arg_names, import_op, AttrMap, Block, Module, Operation,
    ValueId, ValueTable,
};
pub use parser::{parse_module, parse_module_with, ParseError, ParseErrorKind};
pub use printer::{print_module, print_op};
pub use types::{MemRefType, ScalarType, Type};
pub use verify::{verify_module, verify_module_with, Violation};

