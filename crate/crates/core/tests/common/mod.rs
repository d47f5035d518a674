//! Shared by the integration tests of both crates.
#![allow(dead_code)]

use std::collections::BTreeMap;

use omp2hls_core::ir::{parse_module, print_module, verify_module, Module};
use omp2hls_core::transforms::hls::{lower_omp_loops_to_hls, HlsOptions};
use omp2hls_core::sim::{HostArray, HostValue, Inputs, TraceEvent, TraceKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core");

pub fn corpus_names() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(format!("{CORE_DIR}/tests/corpus"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ir"))
        .collect();
    v.sort();
    v
}

pub fn corpus_path(name: &str) -> String {
    format!("{CORE_DIR}/tests/corpus/{name}")
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{CORE_DIR}/tests/fixtures/{name}")).unwrap()
}

pub fn module(name: &str) -> Module {
    parse_module(&corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_f32(r: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    (0..n).map(|_| r.gen_range(-1.0f32..1.0)).collect()
}

pub fn random_int(r: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Vec<i64> {
    (0..n).map(|_| r.gen_range(lo..=hi)).collect()
}

pub fn f32s(v: Vec<f32>) -> HostValue {
    HostArray::f32(v).into()
}

pub fn f64s(v: Vec<f64>) -> HostValue {
    HostArray::f64(v).into()
}

pub fn ints(v: Vec<i64>) -> HostValue {
    HostArray::int(v).into()
}

pub fn scalar_int(v: i64) -> HostValue {
    HostArray::int(vec![v]).with_shape(vec![]).into()
}

/// Deterministic inputs for every corpus program.
pub fn sample_inputs(name: &str, seed: u64) -> Inputs {
    let mut r = rng(seed);
    let mut i = BTreeMap::new();
    match name {
        "nested_data.ir" => {
            i.insert("a".into(), f32s(random_f32(&mut r, 100)));
            i.insert("b".into(), f32s(random_f32(&mut r, 100)));
        }
        "copy.ir" => {
            i.insert("a".into(), f64s((0..100).map(|_| r.gen_range(-1e3..1e3)).collect()));
            i.insert("b".into(), f64s(vec![0.0; 100]));
        }
        "vector_add.ir" => {
            for n in ["a", "b", "c"] {
                i.insert(n.into(), f64s((0..100).map(|_| r.gen_range(-1e3..1e3)).collect()));
            }
        }
        "saxpy.ir" => {
            let n = 37;
            i.insert("n".into(), HostValue::Int(n as i64));
            i.insert("a".into(), HostValue::F32(r.gen_range(-2.0..2.0)));
            i.insert("x".into(), f32s(random_f32(&mut r, n)));
            i.insert("y".into(), f32s(random_f32(&mut r, n)));
        }
        "two_targets.ir" => {
            i.insert("a".into(), ints(random_int(&mut r, 64, -1000, 1000)));
            i.insert("b".into(), ints(random_int(&mut r, 64, -1000, 1000)));
        }
        "reduction_sum.ir" => {
            let n = 103;
            i.insert("n".into(), HostValue::Int(n as i64));
            i.insert("x".into(), ints(random_int(&mut r, n, -1 << 40, 1 << 40)));
            i.insert("s".into(), scalar_int(r.gen_range(-100..100)));
        }
        "sgesl.ir" => return sgesl_problem(12, seed).inputs(),
        other => panic!("no inputs for {other}"),
    }
    i
}

/// A random system `A x = b` together with its SGEFA factorisation.
pub struct SgeslProblem {
    pub n: usize,
    /// Original matrix, row-major, f64.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// LU factors as SGEFA leaves them, rounded to f32.
    pub lu: Vec<f32>,
    pub ipvt: Vec<i64>,
}

impl SgeslProblem {
    pub fn inputs(&self) -> Inputs {
        let mut i = BTreeMap::new();
        i.insert("n".into(), HostValue::Int(self.n as i64));
        i.insert("a".into(), HostArray::f32(self.lu.clone()).with_shape(vec![self.n, self.n]).into());
        i.insert("ipvt".into(), ints(self.ipvt.clone()));
        i.insert("b".into(), f32s(self.b.iter().map(|v| *v as f32).collect()));
        i
    }

    /// `max_i |(A x)_i - b_i|`, accumulated in f64.
    pub fn residual(&self, x: &[f32]) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                let ax: f64 = (0..n).map(|j| self.a[i * n + j] * x[j] as f64).sum();
                (ax - self.b[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `A` is a random orthogonal matrix: Gram-Schmidt applied twice to uniform
/// columns. Its condition number is 1, so the f32 residual reflects the
/// solver rather than the draw, while partial pivoting still swaps rows.
pub fn sgesl_problem(n: usize, seed: u64) -> SgeslProblem {
    let mut r = rng(seed);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let ck = cols[k].clone();
                let d: f64 = cols[j].iter().zip(&ck).map(|(u, v)| u * v).sum();
                for (u, v) in cols[j].iter_mut().zip(&ck) {
                    *u -= d * v;
                }
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|v| *v /= norm);
    }
    let a: Vec<f64> = (0..n * n).map(|k| cols[k % n][k / n]).collect();
    let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let mut lu = a.clone();
    let ipvt = sgefa(&mut lu, n);
    SgeslProblem {
        n,
        a,
        b,
        lu: lu.iter().map(|v| *v as f32).collect(),
        ipvt,
    }
}

/// LINPACK SGEFA with 0-based indices on a row-major matrix: partial
/// pivoting, negated multipliers stored below the diagonal.
pub fn sgefa(a: &mut [f64], n: usize) -> Vec<i64> {
    let at = |r: usize, c: usize| r * n + c;
    let mut ipvt = vec![0i64; n];
    for k in 0..n.saturating_sub(1) {
        let l = (k..n)
            .max_by(|&i, &j| a[at(i, k)].abs().total_cmp(&a[at(j, k)].abs()))
            .unwrap();
        ipvt[k] = l as i64;
        assert!(a[at(l, k)] != 0.0, "singular matrix");
        a.swap(at(l, k), at(k, k));
        let t = -1.0 / a[at(k, k)];
        for i in k + 1..n {
            a[at(i, k)] *= t;
        }
        for j in k + 1..n {
            let t = a[at(l, j)];
            if l != k {
                a[at(l, j)] = a[at(k, j)];
                a[at(k, j)] = t;
            }
            for i in k + 1..n {
                a[at(i, j)] += t * a[at(i, k)];
            }
        }
    }
    if n > 0 {
        ipvt[n - 1] = n as i64 - 1;
    }
    ipvt
}

/// Gauss-Jordan elimination with full pivoting in f64; shares no code or
/// conventions with `sgefa`.
pub fn dense_solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i * n..(i + 1) * n].to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    let mut cols: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc) = (k, k);
        for i in k..n {
            for j in k..n {
                if m[i][j].abs() > m[pr][pc].abs() {
                    (pr, pc) = (i, j);
                }
            }
        }
        m.swap(k, pr);
        for row in m.iter_mut() {
            row.swap(k, pc);
        }
        cols.swap(k, pc);
        let p = m[k][k];
        for v in m[k].iter_mut() {
            *v /= p;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != k && row[k] != 0.0 {
                let f = row[k];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[cols[k]] = m[k][n];
    }
    x
}

/// Acquire count of `key` after each acquire or release event.
pub fn acquire_history(trace: &[TraceEvent], key: &str) -> Vec<i64> {
    let mut c = 0;
    let mut out = Vec::new();
    for e in trace.iter().filter(|e| e.key == key) {
        match e.kind {
            TraceKind::Acquire => c += 1,
            TraceKind::Release => c -= 1,
            _ => continue,
        }
        out.push(c);
    }
    out
}

pub fn count(trace: &[TraceEvent], kind: TraceKind, key: &str) -> usize {
    trace.iter().filter(|e| e.kind == kind && e.key == key).count()
}

pub fn count_kind(trace: &[TraceEvent], kind: TraceKind) -> usize {
    trace.iter().filter(|e| e.kind == kind).count()
}

pub const DEV: &str = "memref<?xi64, 1 : i32>";

/// `b[i] = a[i] * 3 + i` over `[0, n)`, with `n` either a constant or an
/// argument.
pub fn elementwise(attrs: &str, n: Option<usize>) -> String {
    let (sig, bound) = match n {
        Some(n) => (String::new(), format!("    %n = arith.constant <{{value = {n} : index}}> : () -> index\n")),
        None => (", %n: index".to_string(), String::new()),
    };
    format!(
        "module attributes {{target = \"fpga\"}} {{\n  func.func @k(%a: {DEV}, %b: {DEV}{sig}) attributes {{arg_names = [\"a\", \"b\", \"n\"]}} {{\n\
         {bound}    %c0 = arith.constant <{{value = 0 : index}}> : () -> index\n    \
         %c1 = arith.constant <{{value = 1 : index}}> : () -> index\n    \
         %c3 = arith.constant <{{value = 3 : i64}}> : () -> i64\n    \
         omp.loop(%c0, %n, %c1) <{{{attrs}}}> ({{\n    ^bb0(%i: index):\n      \
         %v = memref.load(%a, %i) : ({DEV}, index) -> i64\n      \
         %w = arith.muli(%v, %c3) : (i64, i64) -> i64\n      \
         %ii = arith.index_cast(%i) : (index) -> i64\n      \
         %s = arith.addi(%w, %ii) : (i64, i64) -> i64\n      \
         memref.store(%s, %b, %i) : (i64, {DEV}, index) -> ()\n      \
         omp.yield\n    }}) : (index, index, index) -> ()\n    func.return\n  }}\n}}\n"
    )
}

/// `s = s <op> sum(x)` over `[0, n)` as a kernel with a rank-0 result.
pub fn reduction_kernel(op: &str, elem: &str, attrs: &str) -> String {
    let dev = format!("memref<?x{elem}, 1 : i32>");
    let acc = format!("memref<{elem}, 1 : i32>");
    format!(
        "module attributes {{target = \"fpga\"}} {{\n  func.func @k(%n: index, %x: {dev}, %s: {acc}) attributes {{arg_names = [\"n\", \"x\", \"s\"]}} {{\n    \
         %c0 = arith.constant <{{value = 0 : index}}> : () -> index\n    \
         %c1 = arith.constant <{{value = 1 : index}}> : () -> index\n    \
         omp.loop(%c0, %n, %c1, %s) <{{parallel_do = true, reduction = \"{op}\"{attrs}}}> ({{\n    ^bb0(%i: index):\n      \
         %v = memref.load(%x, %i) : ({dev}, index) -> {elem}\n      \
         omp.yield(%v) : ({elem}) -> ()\n    }}) : (index, index, index, {acc}) -> ()\n    func.return\n  }}\n}}\n"
    )
}

/// Runs the loop lowering alone on a kernel module and verifies the result.
pub fn lowered(text: &str, opts: &HlsOptions) -> Module {
    let mut m = parse_module(text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    lower_omp_loops_to_hls(&mut m, opts).unwrap();
    let v = verify_module(&m);
    assert!(v.is_empty(), "{v:?}\n{}", print_module(&m));
    m
}


pub fn elementwise_inputs(n: usize, seed: u64, dynamic: bool) -> Inputs {
    let mut r = rng(seed);
    let mut i = BTreeMap::new();
    i.insert("a".to_string(), ints(random_int(&mut r, n, -1 << 30, 1 << 30)));
    i.insert("b".to_string(), ints(vec![-7; n]));
    if dynamic {
        i.insert("n".to_string(), HostValue::Int(n as i64));
    }
    i
}

pub fn reduction_inputs(x: HostValue, n: usize, s: HostValue) -> Inputs {
    let mut i = BTreeMap::new();
    i.insert("n".to_string(), HostValue::Int(n as i64));
    i.insert("x".to_string(), x);
    i.insert("s".to_string(), s);
    i
}
