mod common;

use std::collections::BTreeMap;

use common::*;
use omp2hls_core::ir::parse_module;
use omp2hls_core::pipeline::{compile, PipelineOptions};
use omp2hls_core::sim::{
    check_trace_legality, interpret, run_reference, select_entry, ExecMode, HostValue, SimError, SimOptions,
    TraceEvent, TraceKind,
};

fn trap(body: &str, sig: &str, inputs: BTreeMap<String, HostValue>) -> (String, String) {
    let names: Vec<String> = inputs.keys().map(|k| format!("\"{k}\"")).collect();
    let text = format!(
        "module {{\n  func.func @main({sig}) attributes {{arg_names = [{}]}} {{\n    \
         %c0 = arith.constant <{{value = 0 : index}}> : () -> index\n    \
         %c4 = arith.constant <{{value = 4 : index}}> : () -> index\n{body}\n    func.return\n  }}\n}}\n",
        names.join(", ")
    );
    let m = parse_module(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    match interpret(&m, None, &inputs, &SimOptions::default()) {
        Err(SimError::Trap { path, message }) => (path, message),
        other => panic!("expected a trap, got {other:?}"),
    }
}

#[test]
fn lookup_of_missing_buffer_traps() {
    let (path, msg) = trap(
        "    %b = device.lookup() <{memory_space = 1 : i32, name = \"a\"}> : () -> memref<?xf32, 1 : i32>",
        "",
        BTreeMap::new(),
    );
    assert!(msg.contains("a@1"), "{msg}");
    assert!(path.contains("device.lookup"), "{path}");
}

#[test]
fn wait_without_launch_traps() {
    let (_, msg) = trap(
        "    %h = device.kernel_create() ({\n      func.return\n    }) : () -> !device.kernelhandle\n    \
         device.kernel_wait(%h) : (!device.kernelhandle) -> ()",
        "",
        BTreeMap::new(),
    );
    assert!(msg.contains("never launched"), "{msg}");
}

#[test]
fn release_below_zero_traps() {
    let (_, msg) = trap(
        "    %b = device.alloc(%c4) <{memory_space = 1 : i32, name = \"a\"}> : (index) -> memref<?xf32, 1 : i32>\n    \
         device.data_release() <{memory_space = 1 : i32, name = \"a\"}> : () -> ()",
        "",
        BTreeMap::new(),
    );
    assert!(msg.contains("below zero"), "{msg}");
}

#[test]
fn out_of_bounds_access_traps_with_its_path() {
    let mut i = BTreeMap::new();
    i.insert("x".to_string(), f32s(vec![0.0; 4]));
    let (path, msg) = trap("    %v = memref.load(%x, %c4) : (memref<4xf32>, index) -> f32", "%x: memref<4xf32>", i);
    assert!(msg.contains("out of bounds"), "{msg}");
    assert_eq!(path, "func.func#0 > memref.load#2");
}

#[test]
fn entry_selection() {
    let m = parse_module(
        "module {\n  func.func @a() {\n    func.return\n  }\n  func.func @main() {\n    func.return\n  }\n}\n",
    )
    .unwrap();
    assert_eq!(select_entry(&m, None).unwrap().sym_name(), Some("main"));
    assert_eq!(select_entry(&m, Some("a")).unwrap().sym_name(), Some("a"));
    assert!(select_entry(&m, Some("b")).is_err());
}

#[test]
fn compiled_saxpy_example() {
    let state = compile(&corpus("saxpy.ir"), &PipelineOptions::default()).unwrap();
    let mut i = BTreeMap::new();
    i.insert("n".to_string(), HostValue::Int(8));
    i.insert("a".to_string(), HostValue::F32(2.0));
    i.insert("x".to_string(), f32s((1..=8).map(|v| v as f32).collect()));
    i.insert("y".to_string(), f32s((1..=8).map(|v| v as f32).collect()));
    let r = interpret(state.host(), state.device(), &i, &SimOptions::default()).unwrap();
    let want = [3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0, 24.0];
    assert_eq!(r.outputs["y"].as_f32().unwrap(), &want);
    assert_eq!(run_reference(&module("saxpy.ir"), &i).unwrap()["y"].as_f32().unwrap(), &want);
}

#[test]
fn eager_and_deferred_agree_on_every_program() {
    for name in corpus_names() {
        let state = compile(&corpus(&name), &PipelineOptions::default()).unwrap();
        for seed in 0..4 {
            let inputs = sample_inputs(&name, seed);
            let run = |mode| {
                interpret(state.host(), state.device(), &inputs, &SimOptions { mode, entry: None }).unwrap()
            };
            let (e, d) = (run(ExecMode::Eager), run(ExecMode::Deferred));
            assert_eq!(e.outputs, d.outputs, "{name}");
            assert_eq!(e.trace, d.trace, "{name}");
            check_trace_legality(&e.trace).unwrap();
        }
    }
}

#[test]
fn legality_rejects_transfers_to_released_buffers() {
    let ev = |seq, kind, key: &str| TraceEvent { seq, kind, key: key.into(), bytes: 0 };
    let ok = [
        ev(0, TraceKind::Alloc, "a@1"),
        ev(1, TraceKind::Acquire, "a@1"),
        ev(2, TraceKind::DmaH2D, "a@1"),
        ev(3, TraceKind::Release, "a@1"),
    ];
    check_trace_legality(&ok).unwrap();
    let mut bad = ok.to_vec();
    bad.push(ev(4, TraceKind::DmaD2H, "a@1"));
    assert_eq!(check_trace_legality(&bad).unwrap_err().seq, 4);
    let mut bad = ok.to_vec();
    bad.push(ev(4, TraceKind::Release, "a@1"));
    assert!(check_trace_legality(&bad).is_err());
}

#[test]
fn kernel_effects_are_visible_after_wait() {
    let state = compile(&corpus("vector_add.ir"), &PipelineOptions::default()).unwrap();
    let inputs = sample_inputs("vector_add.ir", 9);
    let r = interpret(state.host(), state.device(), &inputs, &SimOptions::default()).unwrap();
    let kinds: Vec<_> = r.trace.iter().map(|e| e.kind).collect();
    let wait = kinds.iter().position(|k| *k == TraceKind::KernelWait).unwrap();
    let d2h = kinds.iter().position(|k| *k == TraceKind::DmaD2H).unwrap();
    assert!(wait < d2h);
    let a = inputs["a"].clone();
    let b = inputs["b"].clone();
    let (HostValue::Array(a), HostValue::Array(b)) = (a, b) else { panic!() };
    let sum: Vec<f64> = a.as_f64().unwrap().iter().zip(b.as_f64().unwrap()).map(|(x, y)| x + y).collect();
    assert_eq!(r.outputs["c"].as_f64().unwrap(), &sum[..]);
}
