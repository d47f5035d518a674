use std::path::{Path, PathBuf};

use log::{info, warn};
use omp2hls_core::ir::{parse_module, print_module};
use omp2hls_core::pipeline::{run_passes, Pass, PipelineError, PipelineOptions, PipelineState};
use omp2hls_core::sim::{interpret, select_entry, ExecMode, SimError, SimOptions, SimResult};
use omp2hls_core::transforms::hls::HlsOptions;
use thiserror::Error;

use crate::host_src::{emit_host_source, HostSourceError};
use crate::trace_io::write_trace;
use crate::vectors::{bind_inputs, format_outputs, parse_bindings, VectorError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EmitTarget {
    HostIr,
    DeviceIr,
    HostSrc,
    Trace,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub passes: Vec<Pass>,
    pub emit: Vec<EmitTarget>,
    pub out_dir: PathBuf,
    /// Raw `name=values` bindings, see [`crate::vectors`].
    pub sim_inputs: Vec<String>,
    pub sim_mode: ExecMode,
    pub entry: Option<String>,
    pub verify_each: bool,
    pub hls: HlsOptions,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            passes: Pass::ALL.to_vec(),
            emit: vec![EmitTarget::HostIr, EmitTarget::DeviceIr],
            out_dir: PathBuf::from("."),
            sim_inputs: Vec::new(),
            sim_mode: ExecMode::Deferred,
            entry: None,
            verify_each: false,
            hls: HlsOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation input: {0}")]
    Inputs(#[from] VectorError),
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("host source: {0}")]
    HostSource(#[from] HostSourceError),
}

impl DriverError {
    /// 0 is success; 1 means the IR failed to parse or verify; 2 covers
    /// pass diagnostics and everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Pipeline(e) => e.exit_code(),
            _ => 2,
        }
    }
}

#[derive(Debug)]
pub struct Artifacts {
    pub written: Vec<PathBuf>,
    pub state: PipelineState,
    pub sim: Option<SimResult>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |source| DriverError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads, compiles and optionally simulates `cfg.input`, writing every
/// requested artifact as `<out_dir>/<stem>.<ext>`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Artifacts, DriverError> {
    let text = std::fs::read_to_string(&cfg.input).map_err(io_err(&cfg.input))?;
    let module = parse_module(&text).map_err(|e| PipelineError::Parse(e.to_string()))?;
    let opts = PipelineOptions {
        verify_each: cfg.verify_each,
        hls: cfg.hls,
    };
    let state = run_passes(module, &cfg.passes, &opts)?;

    let stem = cfg
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    std::fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let mut written = Vec::new();
    let mut write = |ext: &str, body: &str| -> Result<(), DriverError> {
        let p = cfg.out_dir.join(format!("{stem}.{ext}"));
        std::fs::write(&p, body).map_err(io_err(&p))?;
        info!("wrote {}", p.display());
        written.push(p);
        Ok(())
    };

    let mut emit = cfg.emit.clone();
    emit.sort();
    emit.dedup();
    let mut sim = None;
    for target in emit {
        match target {
            EmitTarget::HostIr => write("host.ir", &print_module(state.host()))?,
            EmitTarget::DeviceIr => match state.device() {
                Some(d) => write("device.ir", &print_module(d))?,
                None => warn!("no device module before split-modules; skipping device-ir"),
            },
            EmitTarget::HostSrc => write("host.cpp", &emit_host_source(state.host())?)?,
            EmitTarget::Trace => {
                let host = state.host();
                let entry = select_entry(host, cfg.entry.as_deref())?;
                let inputs = bind_inputs(host, entry, &parse_bindings(&cfg.sim_inputs)?)?;
                let r = interpret(
                    host,
                    state.device(),
                    &inputs,
                    &SimOptions {
                        mode: cfg.sim_mode,
                        entry: cfg.entry.clone(),
                    },
                )?;
                write("trace", &write_trace(&r.trace))?;
                write("out.txt", &format_outputs(&r.outputs))?;
                sim = Some(r);
            }
        }
    }
    Ok(Artifacts { written, state, sim })
}
