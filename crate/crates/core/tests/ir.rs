use omp2hls_core::ir::{
    parse_module, print_module, structurally_equal, verify_module, Module, ParseErrorKind,
};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn corpus() -> Vec<(String, String)> {
    let mut v: Vec<_> = std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ir"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn assert_round_trip(m: &Module) {
    let printed = print_module(m);
    let again = parse_module(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert!(structurally_equal(m, &again), "{printed}");
    assert_eq!(print_module(&again), printed);
}

#[test]
fn minimal_module_has_one_empty_function() {
    let m = parse_module("module { func.func @main() { func.return } }").unwrap();
    let fs: Vec<_> = m.functions().collect();
    assert_eq!(fs.len(), 1);
    assert_eq!(fs[0].sym_name(), Some("main"));
    assert_eq!(fs[0].body().ops.len(), 1);
    assert!(verify_module(&m).is_empty());
}

#[test]
fn split_host_counts() {
    let m = parse_module(&fixture("split_host.ir")).unwrap();
    assert_eq!(m.count_ops("device.alloc"), 2);
    assert_eq!(m.count_ops("device.data_acquire"), 2);
    assert_eq!(m.count_ops("device.kernel_create"), 1);
    assert_eq!(m.count_ops("device.kernel_launch"), 1);
    assert_eq!(m.count_ops("device.kernel_wait"), 1);
    assert_eq!(m.count_ops("device.data_release"), 2);
    assert_eq!(verify_module(&m), []);
}

#[test]
fn undefined_value_is_reported_with_position() {
    let e = parse_module("module {\n  func.func @f() {\n    %x = arith.addi(%undef, %undef) : (i32, i32) -> i32\n  }\n}").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UndefinedValue("undef".into()));
    assert_eq!(e.line, 3);
    assert!(e.to_string().contains("undefined value"));
}

#[test]
fn unknown_op_is_a_parse_error() {
    let e = parse_module("module { func.func @f() { foo.bar() : () -> () func.return } }").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::UnknownOp(_)), "{e}");
}

#[test]
fn empty_module_prints_braces() {
    assert_eq!(print_module(&Module::new()), "module {\n}\n");
}

#[test]
fn target_attribute_is_printed() {
    let m = parse_module(&fixture("vector_add_hls.ir")).unwrap();
    assert!(print_module(&m).contains("attributes {target = \"fpga\"}"));
}

#[test]
fn fixtures_and_corpus_round_trip() {
    for name in ["split_host.ir", "split_device.ir", "vector_add_hls.ir"] {
        let m = parse_module(&fixture(name)).unwrap();
        assert_eq!(verify_module(&m), [], "{name}");
        assert_round_trip(&m);
    }
    for (name, text) in corpus() {
        let m = parse_module(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(verify_module(&m), [], "{name}");
        assert_round_trip(&m);
    }
}

#[test]
fn launch_of_non_handle_is_one_violation() {
    let m = parse_module(
        "module {\n  func.func @f(%x: i32) {\n    device.kernel_launch(%x) : (i32) -> ()\n    func.return\n  }\n}",
    )
    .unwrap();
    let v = verify_module(&m);
    assert_eq!(v.len(), 1, "{v:?}");
}

#[test]
fn pipeline_outside_loop_is_one_violation() {
    let m = parse_module(
        "module attributes {target = \"fpga\"} {\n  func.func @k() {\n    %ii = arith.constant() <{value = 1 : i32}> : () -> i32\n    \
         hls.pipeline(%ii) : (i32) -> ()\n    func.return\n  }\n}",
    )
    .unwrap();
    let v = verify_module(&m);
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].message.contains("loop"), "{}", v[0]);
}

#[test]
fn use_before_definition_is_rejected() {
    // The printer never emits this, so the check must come from the parser
    // or the verifier; either is fine.
    let text = "module {\n  func.func @f() {\n    %a = arith.addi(%b, %b) : (i32, i32) -> i32\n    \
                %b = arith.constant() <{value = 1 : i32}> : () -> i32\n    func.return\n  }\n}";
    match parse_module(text) {
        Err(_) => {}
        Ok(m) => assert!(!verify_module(&m).is_empty()),
    }
}

#[derive(Clone, Debug)]
enum Stmt {
    ConstI(i64),
    ConstF32(f32),
    ConstF64(f64),
    Bin(&'static str, usize, usize),
    Store(usize, u8),
    Loop(Vec<Stmt>),
    If(usize, Vec<Stmt>),
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let leaf = prop_oneof![
        any::<i32>().prop_map(|v| Stmt::ConstI(v as i64)),
        any::<f32>().prop_filter("finite", |v| v.is_finite()).prop_map(Stmt::ConstF32),
        any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Stmt::ConstF64),
        (prop::sample::select(&["arith.addi", "arith.muli", "arith.subi", "arith.xori"][..]), any::<usize>(), any::<usize>())
            .prop_map(|(n, a, b)| Stmt::Bin(n, a, b)),
        (any::<usize>(), any::<u8>()).prop_map(|(v, i)| Stmt::Store(v, i)),
    ];
    leaf.prop_recursive(3, 24, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..5).prop_map(Stmt::Loop),
            (any::<usize>(), prop::collection::vec(inner, 0..5)).prop_map(|(c, b)| Stmt::If(c, b)),
        ]
    })
}

/// Renders statements as generic IR. Integer values are tracked so that
/// operands always refer to a dominating i32 definition.
struct Render {
    out: String,
    next: usize,
}

impl Render {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("%v{}", self.next)
    }

    fn block(&mut self, stmts: &[Stmt], ints: &mut Vec<String>, depth: usize) {
        let pad = "  ".repeat(depth);
        let scope = ints.len();
        for s in stmts {
            match s {
                Stmt::ConstI(v) => {
                    let r = self.fresh();
                    self.out += &format!("{pad}{r} = arith.constant() <{{value = {v} : i32}}> : () -> i32\n");
                    ints.push(r);
                }
                Stmt::ConstF32(v) => {
                    let r = self.fresh();
                    self.out += &format!("{pad}{r} = arith.constant() <{{value = {v:?} : f32}}> : () -> f32\n");
                }
                Stmt::ConstF64(v) => {
                    let r = self.fresh();
                    self.out += &format!("{pad}{r} = arith.constant() <{{value = {v:?} : f64}}> : () -> f64\n");
                }
                Stmt::Bin(n, a, b) => {
                    let (a, b) = (ints[a % ints.len()].clone(), ints[b % ints.len()].clone());
                    let r = self.fresh();
                    self.out += &format!("{pad}{r} = {n}({a}, {b}) : (i32, i32) -> i32\n");
                    ints.push(r);
                }
                Stmt::Store(v, i) => {
                    let v = ints[v % ints.len()].clone();
                    let c = self.fresh();
                    self.out += &format!("{pad}{c} = arith.constant() <{{value = {} : index}}> : () -> index\n", i % 8);
                    self.out += &format!("{pad}memref.store({v}, %m, {c}) : (i32, memref<8xi32>, index) -> ()\n");
                }
                Stmt::Loop(body) => {
                    let iv = self.fresh();
                    self.out += &format!("{pad}scf.for(%lo, %hi, %st) ({{\n{pad}^bb0({iv}: index):\n");
                    self.block(body, ints, depth + 1);
                    self.out += &format!("{pad}  scf.yield\n{pad}}}) : (index, index, index) -> ()\n");
                }
                Stmt::If(c, body) => {
                    let a = ints[c % ints.len()].clone();
                    let p = self.fresh();
                    self.out += &format!(
                        "{pad}{p} = arith.cmpi({a}, {a}) <{{predicate = \"slt\"}}> : (i32, i32) -> i1\n"
                    );
                    self.out += &format!("{pad}scf.if({p}) ({{\n");
                    self.block(body, ints, depth + 1);
                    self.out += &format!("{pad}  scf.yield\n{pad}}}, {{\n{pad}  scf.yield\n{pad}}}) : (i1) -> ()\n");
                }
            }
        }
        ints.truncate(scope);
    }
}

fn render(stmts: &[Stmt]) -> String {
    let mut r = Render {
        out: String::new(),
        next: 0,
    };
    r.out += "module {\n  func.func @f(%m: memref<8xi32>, %seed: i32) attributes {arg_names = [\"m\", \"seed\"]} {\n";
    r.out += "    %lo = arith.constant() <{value = 0 : index}> : () -> index\n";
    r.out += "    %hi = arith.constant() <{value = 2 : index}> : () -> index\n";
    r.out += "    %st = arith.constant() <{value = 1 : index}> : () -> index\n";
    let mut ints = vec!["%seed".to_string()];
    r.block(stmts, &mut ints, 2);
    r.out += "    func.return\n  }\n}\n";
    r.out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn generated_modules_round_trip(stmts in prop::collection::vec(stmt(), 0..12)) {
        let text = render(&stmts);
        let m = parse_module(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(verify_module(&m), vec![], "{}", text);
        assert_round_trip(&m);
    }
}
