use alloc::collections::BTreeMap;
use alloc::format;
use core::mem;

use crate::dialects::func::{HLS_INTERFACE_CALL, HLS_PIPELINE_CALL};
use crate::dialects::hls::M_AXI;
use crate::ir::{Attribute, Block, Module, Operation, ValueId};
use crate::transforms::PassError;

const PASS: &str = "lower-hls-to-calls";

/// Replaces `hls.interface` and `hls.pipeline` with calls to the
/// `_hls_interface` / `_hls_pipeline` markers and drops the protocol values.
pub fn lower_hls_to_calls(m: &mut Module) -> Result<(), PassError> {
    let mut ii_values = BTreeMap::new();
    m.walk(&mut |op| {
        if let (true, Some(v)) = (op.is("arith.constant"), op.attr("value").and_then(Attribute::as_int)) {
            ii_values.insert(op.results[0], v);
        }
    });
    for f in m.body.ops.iter_mut().filter(|op| op.is("func.func")) {
        rewrite(f.body_mut(), &ii_values)?;
    }
    Ok(())
}

fn rewrite(block: &mut Block, consts: &BTreeMap<ValueId, i64>) -> Result<(), PassError> {
    let ops = mem::take(&mut block.ops);
    for mut op in ops {
        match op.name.as_str() {
            "hls.axi_protocol" => continue,
            "hls.interface" => {
                let port = op.attr("port").cloned().unwrap_or(Attribute::str(""));
                let mut call = Operation::new("func.call")
                    .with_operands([op.operands[0]])
                    .with_attr("callee", Attribute::symbol(HLS_INTERFACE_CALL))
                    .with_attr("port", port)
                    .with_attr("protocol", Attribute::str(M_AXI));
                if op.bool_attr("bundle") {
                    call = call.with_attr("bundle", Attribute::Bool(true));
                }
                block.ops.push(call);
            }
            "hls.pipeline" => {
                let ii = consts.get(&op.operands[0]).copied().ok_or_else(|| {
                    PassError::new(PASS, "initiation interval must be a constant")
                })?;
                block.ops.push(
                    Operation::new("func.call")
                        .with_operands([op.operands[0]])
                        .with_attr("callee", Attribute::symbol(HLS_PIPELINE_CALL))
                        .with_attr("ii", Attribute::i32(ii)),
                );
            }
            n if n.starts_with("hls.") => {
                return Err(PassError::new(PASS, format!("cannot lower '{n}'")));
            }
            _ => {
                for r in &mut op.regions {
                    rewrite(r, consts)?;
                }
                block.ops.push(op);
            }
        }
    }
    Ok(())
}
