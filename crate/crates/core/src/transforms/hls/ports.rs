use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dialects::hls::M_AXI;
use crate::ir::{Operation, ValueTable};

/// Kernel argument index to AXI port name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortAssignment {
    pub ports: Vec<(usize, String)>,
    pub protocol: &'static str,
}

/// Gives each memref parameter of `kernel` its own `gmemK` port, in
/// parameter order. Scalars get no port.
pub fn assign_ports(kernel: &Operation, values: &ValueTable) -> PortAssignment {
    let ports = kernel
        .body()
        .args
        .iter()
        .enumerate()
        .filter(|(_, a)| values.ty(**a).is_memref())
        .enumerate()
        .map(|(k, (i, _))| (i, format!("gmem{k}")))
        .collect();
    PortAssignment {
        ports,
        protocol: M_AXI,
    }
}
