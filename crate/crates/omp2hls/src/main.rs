use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use omp2hls::driver::{run_pipeline, EmitTarget, PipelineConfig};
use omp2hls_core::pipeline::parse_pass_list;
use omp2hls_core::sim::ExecMode;
use omp2hls_core::transforms::hls::HlsOptions;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    HostIr,
    DeviceIr,
    HostSrc,
    Trace,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Eager,
    Deferred,
}

/// Compile OpenMP target-offload IR into a host module and an HLS device
/// module, and optionally simulate the pair.
///
/// Simulation inputs are `name=v0,v1,...` bindings; several may share one
/// argument (`x=1,2,y=3,4,a=2`). `name=RxC:...` gives a shape and
/// `name=@file` reads decimal text, or little-endian binary for `.bin`
/// files. Results are written to `<stem>.out.txt` in the same syntax.
#[derive(Debug, Parser)]
#[command(name = "omp2hls", version)]
struct Cli {
    #[arg(long)]
    input: PathBuf,
    /// Comma separated pass names, or "default" for the full pipeline.
    #[arg(long, default_value = "default")]
    passes: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["host-ir", "device-ir"])]
    emit: Vec<Emit>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long = "sim-input", num_args = 1..)]
    sim_input: Vec<String>,
    /// Shorthand for `--sim-input n=<N>`.
    #[arg(long)]
    n: Option<i64>,
    #[arg(long, value_enum, default_value = "deferred")]
    sim_mode: Mode,
    /// Entry function for simulation; defaults to main or the only function.
    #[arg(long)]
    entry: Option<String>,
    /// Verify the IR after every pass.
    #[arg(long)]
    verify_each: bool,
    /// Override the accumulator count used for reductions.
    #[arg(long)]
    reduction_copies: Option<u32>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("OMP2HLS_LOG")).init();
    let cli = Cli::parse();
    let passes = match parse_pass_list(&cli.passes) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let mut sim_inputs = cli.sim_input;
    if let Some(n) = cli.n {
        sim_inputs.push(format!("n={n}"));
    }
    let cfg = PipelineConfig {
        input: cli.input,
        passes,
        emit: cli
            .emit
            .iter()
            .map(|e| match e {
                Emit::HostIr => EmitTarget::HostIr,
                Emit::DeviceIr => EmitTarget::DeviceIr,
                Emit::HostSrc => EmitTarget::HostSrc,
                Emit::Trace => EmitTarget::Trace,
            })
            .collect(),
        out_dir: cli.out_dir,
        sim_inputs,
        sim_mode: match cli.sim_mode {
            Mode::Eager => ExecMode::Eager,
            Mode::Deferred => ExecMode::Deferred,
        },
        entry: cli.entry,
        verify_each: cli.verify_each,
        hls: HlsOptions {
            reduction_copies: cli.reduction_copies,
        },
    };
    match run_pipeline(&cfg) {
        Ok(a) => {
            for p in &a.written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
