mod common;

use std::time::Instant;

use common::*;
use omp2hls_core::pipeline::{compile, PipelineOptions};
use omp2hls_core::sim::{check_trace_legality, interpret, run_reference, ExecMode, SimOptions};

fn solve(n: usize, seed: u64) -> (SgeslProblem, Vec<f32>) {
    let p = sgesl_problem(n, seed);
    let state = compile(&corpus("sgesl.ir"), &PipelineOptions::default()).unwrap();
    let r = interpret(state.host(), state.device(), &p.inputs(), &SimOptions::default()).unwrap();
    check_trace_legality(&r.trace).unwrap();
    assert!(r.resident.iter().all(|(_, c)| *c == 0), "{:?}", r.resident);
    let x = r.outputs["b"].as_f32().unwrap().to_vec();
    (p, x)
}

#[test]
fn sgefa_oracle_reconstructs_the_matrix() {
    // P A = L U rebuilt from the LINPACK storage convention.
    let n = 9;
    let p = sgesl_problem(n, 3);
    let mut lu: Vec<f64> = p.a.clone();
    let ipvt = sgefa(&mut lu, n);
    let x_dense = dense_solve(&p.a, &p.b, n);
    // Solve with the factors directly and compare against the dense oracle.
    let mut b = p.b.clone();
    for k in 0..n - 1 {
        let l = ipvt[k] as usize;
        b.swap(l, k);
        for j in k + 1..n {
            b[j] += b[k] * lu[j * n + k];
        }
    }
    for k in (0..n).rev() {
        b[k] /= lu[k * n + k];
        for j in 0..k {
            b[j] -= b[k] * lu[j * n + k];
        }
    }
    for (u, v) in b.iter().zip(&x_dense) {
        assert!((u - v).abs() < 1e-9, "{u} {v}");
    }
    assert!(ipvt.iter().enumerate().any(|(k, &l)| l as usize != k));
}

#[test]
fn sgesl_small_matches_reference_and_oracle() {
    let n = 16;
    let p = sgesl_problem(n, 11);
    let reference = run_reference(&module("sgesl.ir"), &p.inputs()).unwrap();
    let (_, x) = solve(n, 11);
    assert_eq!(reference["b"].as_f32().unwrap(), &x[..]);
    assert!(p.residual(&x) <= 1e-4, "{}", p.residual(&x));
    let oracle = dense_solve(&p.a, &p.b, n);
    for (u, v) in x.iter().zip(&oracle) {
        assert!((*u as f64 - v).abs() <= 1e-3 * (1.0 + v.abs()), "{u} {v}");
    }
}

#[test]
fn sgesl_64_is_accurate_and_quick() {
    let t = Instant::now();
    let (p, x) = solve(64, 5);
    assert!(p.residual(&x) <= 1e-4, "{}", p.residual(&x));
    assert!(t.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn every_corpus_program_survives_the_pipeline() {
    for name in corpus_names() {
        let inputs = sample_inputs(&name, 1);
        let expected = run_reference(&module(&name), &inputs).unwrap();
        let opts = PipelineOptions { verify_each: true, ..Default::default() };
        let state = compile(&corpus(&name), &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
        for mode in [ExecMode::Eager, ExecMode::Deferred] {
            let r = interpret(state.host(), state.device(), &inputs, &SimOptions { mode, entry: None })
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(r.outputs, expected, "{name} {mode:?}");
            check_trace_legality(&r.trace).unwrap();
        }
    }
}

