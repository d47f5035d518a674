use omp2hls_core::dialects::{standard_registry, MapKind, ReductionKind, RegistryError};
use omp2hls_core::ir::{parse_module, verify_module, Violation};

fn violations(body: &str, sig: &str) -> Vec<Violation> {
    let text = format!("module attributes {{target = \"fpga\"}} {{\n  func.func @f({sig}) {{\n{body}\n    func.return\n  }}\n}}\n");
    let m = parse_module(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    verify_module(&m)
}

const BUF: &str = "memref<?xf32, 1 : i32>";

#[test]
fn registry_knows_every_dialect_op() {
    let r = standard_registry();
    for op in [
        "device.alloc",
        "device.lookup",
        "device.data_check_exists",
        "device.data_acquire",
        "device.data_release",
        "device.kernel_create",
        "device.kernel_launch",
        "device.kernel_wait",
        "hls.interface",
        "hls.pipeline",
        "hls.axi_protocol",
        "omp.target",
        "omp.target_data",
        "omp.map_info",
        "omp.bounds_info",
        "omp.loop",
        "scf.for",
        "memref.dma_start",
    ] {
        assert!(r.contains(op), "{op}");
    }
    assert!(!r.contains("device.frobnicate"));
}

#[test]
fn double_registration_is_an_error() {
    let mut r = standard_registry();
    let f = r.get("hls.pipeline").unwrap();
    assert_eq!(
        r.register("hls.pipeline", f),
        Err(RegistryError::Duplicate("hls.pipeline".into()))
    );
}

#[test]
fn alloc_with_dynamic_size_is_valid() {
    let v = violations(
        &format!("    %b = device.alloc(%n) <{{memory_space = 1 : i32, name = \"a\"}}> : (index) -> {BUF}"),
        "%n: index",
    );
    assert_eq!(v, []);
}

#[test]
fn alloc_space_must_match_its_type() {
    let v = violations(
        "    %b = device.alloc(%n) <{memory_space = 2 : i32, name = \"a\"}> : (index) -> memref<?xf32, 1 : i32>",
        "%n: index",
    );
    assert_eq!(v.len(), 1, "{v:?}");
}

#[test]
fn check_exists_must_return_i1() {
    let v = violations(
        "    %p = device.data_check_exists() <{memory_space = 1 : i32, name = \"a\"}> : () -> f32",
        "",
    );
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].message.contains("i1"));
}

#[test]
fn wait_needs_a_created_handle() {
    let v = violations("    device.kernel_wait(%h) : (!device.kernelhandle) -> ()", "%h: !device.kernelhandle");
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].message.contains("kernel_create"));
}

#[test]
fn extracted_kernel_needs_device_function() {
    let body = format!(
        "    %h = device.kernel_create(%a) ({{\n    }}) : ({BUF}) -> !device.kernelhandle"
    );
    let v = violations(&body, &format!("%a: {BUF}"));
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].message.contains("device_function"));

    let body = format!(
        "    %h = device.kernel_create(%a) <{{device_function = @my_kernel}}> ({{\n    }}) : ({BUF}) -> !device.kernelhandle"
    );
    assert_eq!(violations(&body, &format!("%a: {BUF}")), []);
}

#[test]
fn kernel_args_must_be_device_buffers() {
    let body = "    %h = device.kernel_create(%a) <{device_function = @k}> ({\n    }) : (memref<?xf32>) -> !device.kernelhandle";
    let v = violations(body, "%a: memref<?xf32>");
    assert_eq!(v.len(), 1, "{v:?}");
}

fn hls(extra: &str) -> String {
    format!(
        "    %p = hls.axi_protocol() <{{kind = \"m_axi\"}}> : () -> !hls.axi_protocol\n{extra}"
    )
}

#[test]
fn interface_on_memref_is_valid() {
    let body = hls(&format!(
        "    hls.interface(%a, %p) <{{port = \"gmem0\"}}> : ({BUF}, !hls.axi_protocol) -> ()"
    ));
    assert_eq!(violations(&body, &format!("%a: {BUF}")), []);
}

#[test]
fn two_interfaces_on_one_argument() {
    let body = hls(&format!(
        "    hls.interface(%a, %p) <{{port = \"gmem0\"}}> : ({BUF}, !hls.axi_protocol) -> ()\n    \
         hls.interface(%a, %p) <{{port = \"gmem1\"}}> : ({BUF}, !hls.axi_protocol) -> ()"
    ));
    let v = violations(&body, &format!("%a: {BUF}"));
    assert_eq!(v.len(), 1, "{v:?}");
}

#[test]
fn shared_port_needs_bundle() {
    let iface = |arg: &str, extra: &str| {
        format!("    hls.interface(%{arg}, %p) <{{port = \"gmem0\"{extra}}}> : ({BUF}, !hls.axi_protocol) -> ()\n")
    };
    let sig = format!("%a: {BUF}, %b: {BUF}");
    let v = violations(&hls(&(iface("a", "") + &iface("b", ""))), &sig);
    assert_eq!(v.len(), 1, "{v:?}");
    let v = violations(&hls(&(iface("a", ", bundle = true") + &iface("b", ", bundle = true"))), &sig);
    assert_eq!(v, []);
}

#[test]
fn pipeline_interval_must_be_positive() {
    let body = "    %lo = arith.constant() <{value = 0 : index}> : () -> index\n    \
                %st = arith.constant() <{value = 1 : index}> : () -> index\n    \
                %ii = arith.constant() <{value = 0 : i32}> : () -> i32\n    \
                scf.for(%lo, %lo, %st) ({\n    ^bb0(%i: index):\n      hls.pipeline(%ii) : (i32) -> ()\n      scf.yield\n    }) : (index, index, index) -> ()";
    let v = violations(body, "");
    assert_eq!(v.len(), 1, "{v:?}");
}

#[test]
fn map_and_reduction_kinds_parse() {
    for (s, k) in [
        ("to", MapKind::To),
        ("from", MapKind::From),
        ("tofrom", MapKind::ToFrom),
        ("tofrom_implicit", MapKind::ToFromImplicit),
    ] {
        assert_eq!(s.parse::<MapKind>().unwrap(), k);
    }
    assert!("alloc".parse::<MapKind>().is_err());
    for (s, k) in [
        ("add", ReductionKind::Add),
        ("mul", ReductionKind::Mul),
        ("min", ReductionKind::Min),
        ("max", ReductionKind::Max),
    ] {
        assert_eq!(s.parse::<ReductionKind>().unwrap(), k);
        assert_eq!(k.as_str(), s);
    }
    assert!("xor".parse::<ReductionKind>().is_err());
}

#[test]
fn map_info_bounds_rank_must_match() {
    let body = "    %c0 = arith.constant() <{value = 0 : index}> : () -> index\n    \
                %bnd = omp.bounds_info(%c0, %c0) : (index, index) -> !omp.bounds\n    \
                %m = omp.map_info(%a, %bnd) <{map_type = \"to\", name = \"a\"}> : (memref<4x4xf32>, !omp.bounds) -> memref<4x4xf32>";
    let v = violations(body, "%a: memref<4x4xf32>");
    assert_eq!(v.len(), 1, "{v:?}");
}

#[test]
fn simdlen_requires_simd_and_is_positive() {
    let lp = |attrs: &str| {
        format!(
            "    %c0 = arith.constant() <{{value = 0 : index}}> : () -> index\n    \
             omp.loop(%c0, %c0, %c0) <{{{attrs}}}> ({{\n    ^bb0(%i: index):\n      omp.yield\n    }}) : (index, index, index) -> ()"
        )
    };
    assert_eq!(violations(&lp("simd = true, simdlen = 4 : i64"), ""), []);
    assert_eq!(violations(&lp("simd = true, simdlen = 0 : i64"), "").len(), 1);
    assert_eq!(violations(&lp("simdlen = 4 : i64"), "").len(), 1);
}
