use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use omp2hls::trace_io::parse_trace;
use omp2hls_core::ir::{parse_module, verify_module};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn omp2hls(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omp2hls"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn input(name: &str) -> String {
    format!("--input={}", corpus(name).display())
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn default_pipeline_writes_verified_modules() {
    let dir = tempfile::tempdir().unwrap();
    let o = omp2hls(&[&input("saxpy.ir")], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["saxpy.host.ir", "saxpy.device.ir"] {
        let m = parse_module(&read(dir.path(), f)).unwrap();
        assert_eq!(verify_module(&m), [], "{f}");
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn partial_pipeline_keeps_target_regions() {
    let dir = tempfile::tempdir().unwrap();
    let o = omp2hls(&[&input("saxpy.ir"), "--passes=lower-mapped-data", "--emit=host-ir,device-ir"], dir.path());
    assert!(o.status.success());
    let host = read(dir.path(), "saxpy.host.ir");
    assert!(host.contains("omp.target"));
    assert!(!host.contains("device.kernel_"));
    assert!(!dir.path().join("saxpy.device.ir").exists());
}

#[test]
fn trace_and_outputs_for_small_saxpy() {
    let dir = tempfile::tempdir().unwrap();
    let o = omp2hls(
        &[
            &input("saxpy.ir"),
            "--emit=trace",
            "--sim-input",
            "x=1,2,3,4,5,6,7,8,y=1,2,3,4,5,6,7,8,a=2",
            "--n=8",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = read(dir.path(), "saxpy.out.txt");
    assert!(out.lines().any(|l| l == "y=3,6,9,12,15,18,21,24"), "{out}");
    let trace = parse_trace(&read(dir.path(), "saxpy.trace")).unwrap();
    let line: Vec<String> = trace.iter().map(|e| format!("{} {}", e.kind, e.key)).collect();
    assert_eq!(
        line,
        [
            "alloc x@1",
            "acquire x@1",
            "dma_h2d x@1",
            "alloc y@1",
            "acquire y@1",
            "dma_h2d y@1",
            "kernel_create @saxpy_kernel0#0",
            "kernel_launch @saxpy_kernel0#0",
            "kernel_wait @saxpy_kernel0#0",
            "release x@1",
            "dma_d2h y@1",
            "release y@1",
        ]
    );
    assert_eq!(trace[2].bytes, 32);
}

#[test]
fn host_source_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    for prog in ["vector_add", "copy"] {
        let o = omp2hls(&[&input(&format!("{prog}.ir")), "--emit=host-ir,device-ir,host-src"], dir.path());
        assert!(o.status.success());
        for ext in ["host.ir", "device.ir", "host.cpp"] {
            let f = format!("{prog}.{ext}");
            assert_eq!(read(dir.path(), &f), golden(&f), "{f}");
        }
    }
}

#[test]
fn parse_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ir");
    std::fs::write(&bad, "module { func.func @f() { %x = arith.addi(%y, %y) : (i32, i32) -> i32 } }").unwrap();
    let o = omp2hls(&[&format!("--input={}", bad.display())], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("undefined value"));
}

#[test]
fn verification_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ir");
    std::fs::write(
        &bad,
        "module {\n  func.func @f(%x: i32) {\n    device.kernel_launch(%x) : (i32) -> ()\n    func.return\n  }\n}\n",
    )
    .unwrap();
    let o = omp2hls(&[&format!("--input={}", bad.display())], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pass_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = omp2hls(&[&input("saxpy.ir"), "--passes=split-modules,lower-mapped-data"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = omp2hls(&[&input("saxpy.ir"), "--passes=frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = omp2hls(&["--input=/nonexistent/x.ir"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.ir");
    std::fs::write(
        &bad,
        "module {\n  func.func @main() {\n    device.data_release() <{memory_space = 1 : i32, name = \"v\"}> : () -> ()\n    func.return\n  }\n}\n",
    )
    .unwrap();
    let o = omp2hls(&[&format!("--input={}", bad.display())], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = omp2hls(&[&input("saxpy.ir"), "--emit=trace", "--sim-input", "x=1,2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn artifacts_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [&input("sgesl.ir") as &str, "--emit=host-ir,device-ir,host-src"];
    assert!(omp2hls(&args, a.path()).status.success());
    assert!(omp2hls(&args, b.path()).status.success());
    for f in ["sgesl.host.ir", "sgesl.device.ir", "sgesl.host.cpp"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
}

#[test]
fn reduction_copies_flag_changes_the_accumulator() {
    let dir = tempfile::tempdir().unwrap();
    let o = omp2hls(&[&input("reduction_sum.ir"), "--reduction-copies=8", "--emit=device-ir"], dir.path());
    assert!(o.status.success());
    assert!(read(dir.path(), "reduction_sum.device.ir").contains("memref<8xi64>"));
}
