//! Pass registry, ordering rules and the pass runner shared by the CLI and
//! the tests.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use log::info;
use thiserror::Error;

use crate::ir::{parse_module, verify_module, Module, Violation};
use crate::transforms::hls::{lower_hls_to_calls, lower_omp_loops_to_hls, HlsOptions};
use crate::transforms::{
    lower_mapped_data, lower_target_regions, materialize_presence_counters, split_modules, PassError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pass {
    LowerMappedData,
    MaterializePresenceCounters,
    LowerTargetRegions,
    SplitModules,
    LowerOmpLoopsToHls,
    LowerHlsToCalls,
}

impl Pass {
    pub const ALL: [Pass; 6] = [
        Pass::LowerMappedData,
        Pass::MaterializePresenceCounters,
        Pass::LowerTargetRegions,
        Pass::SplitModules,
        Pass::LowerOmpLoopsToHls,
        Pass::LowerHlsToCalls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pass::LowerMappedData => "lower-mapped-data",
            Pass::MaterializePresenceCounters => "materialize-presence-counters",
            Pass::LowerTargetRegions => "lower-target-regions",
            Pass::SplitModules => "split-modules",
            Pass::LowerOmpLoopsToHls => "lower-omp-loops-to-hls",
            Pass::LowerHlsToCalls => "lower-hls-to-calls",
        }
    }

    /// Whether the pass rewrites the device module once modules are split.
    pub fn on_device(self) -> bool {
        matches!(self, Pass::LowerOmpLoopsToHls | Pass::LowerHlsToCalls)
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Pass, PipelineError> {
        Pass::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PipelineError::UnknownPass(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("unknown pass '{0}'")]
    UnknownPass(String),
    #[error("pass '{later}' must not run before '{earlier}'")]
    Order { earlier: Pass, later: Pass },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("verification failed {stage}:\n{}", join(.violations))]
    Verification { stage: String, violations: Vec<Violation> },
    #[error(transparent)]
    Pass(#[from] PassError),
}

fn join(v: &[Violation]) -> String {
    let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
    lines.join("\n")
}

impl PipelineError {
    /// 1 for invalid IR, 2 for a pass diagnostic or a bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) | PipelineError::Verification { .. } => 1,
            _ => 2,
        }
    }
}

/// Parses `"default"` or a comma separated list of pass names and checks
/// that they appear in dependency order without repetition.
pub fn parse_pass_list(spec: &str) -> Result<Vec<Pass>, PipelineError> {
    let spec = spec.trim();
    let passes = if spec == "default" {
        Pass::ALL.to_vec()
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Pass::from_str)
            .collect::<Result<Vec<_>, _>>()?
    };
    check_order(&passes)?;
    Ok(passes)
}

pub fn check_order(passes: &[Pass]) -> Result<(), PipelineError> {
    for w in passes.windows(2) {
        if w[1] <= w[0] {
            return Err(PipelineError::Order {
                earlier: w[1],
                later: w[0],
            });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PipelineOptions {
    pub verify_each: bool,
    pub hls: HlsOptions,
}

/// A module before splitting, or the host/device pair after it.
#[derive(Clone, Debug)]
pub enum PipelineState {
    Single(Module),
    Split { host: Module, device: Module },
}

impl PipelineState {
    pub fn host(&self) -> &Module {
        match self {
            PipelineState::Single(m) => m,
            PipelineState::Split { host, .. } => host,
        }
    }

    pub fn device(&self) -> Option<&Module> {
        match self {
            PipelineState::Single(_) => None,
            PipelineState::Split { device, .. } => Some(device),
        }
    }

    fn verify(&self, stage: &str) -> Result<(), PipelineError> {
        let mut violations = verify_module(self.host());
        if let Some(d) = self.device() {
            violations.extend(verify_module(d));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Verification {
                stage: stage.to_string(),
                violations,
            })
        }
    }
}

/// Runs `passes` in order. The input and the final result are always
/// verified; intermediate results only with `verify_each`.
pub fn run_passes(
    module: Module,
    passes: &[Pass],
    opts: &PipelineOptions,
) -> Result<PipelineState, PipelineError> {
    check_order(passes)?;
    let mut state = PipelineState::Single(module);
    state.verify("on input")?;
    for (i, &pass) in passes.iter().enumerate() {
        info!("running {pass}");
        state = run_pass(state, pass, opts)?;
        if opts.verify_each || i + 1 == passes.len() {
            state.verify(&format!("after {pass}"))?;
        }
    }
    Ok(state)
}

fn run_pass(state: PipelineState, pass: Pass, opts: &PipelineOptions) -> Result<PipelineState, PipelineError> {
    match (pass, state) {
        (Pass::SplitModules, PipelineState::Single(m)) => {
            let s = split_modules(m)?;
            Ok(PipelineState::Split {
                host: s.host,
                device: s.device,
            })
        }
        (Pass::SplitModules, split) => Ok(split),
        (p, PipelineState::Split { mut host, mut device }) => {
            let m = if p.on_device() { &mut device } else { &mut host };
            apply(p, m, opts)?;
            Ok(PipelineState::Split { host, device })
        }
        (p, PipelineState::Single(mut m)) => {
            apply(p, &mut m, opts)?;
            Ok(PipelineState::Single(m))
        }
    }
}

fn apply(pass: Pass, m: &mut Module, opts: &PipelineOptions) -> Result<(), PassError> {
    match pass {
        Pass::LowerMappedData => lower_mapped_data(m),
        Pass::MaterializePresenceCounters => materialize_presence_counters(m),
        Pass::LowerTargetRegions => lower_target_regions(m),
        Pass::LowerOmpLoopsToHls => lower_omp_loops_to_hls(m, &opts.hls),
        Pass::LowerHlsToCalls => lower_hls_to_calls(m),
        Pass::SplitModules => unreachable!("handled by run_pass"),
    }
}

/// Parses `text` and runs the full default pipeline.
pub fn compile(text: &str, opts: &PipelineOptions) -> Result<PipelineState, PipelineError> {
    let m = parse_module(text).map_err(|e| PipelineError::Parse(e.to_string()))?;
    run_passes(m, &Pass::ALL, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_expands_to_every_pass() {
        assert_eq!(parse_pass_list("default").unwrap(), Pass::ALL.to_vec());
    }

    #[test]
    fn names_round_trip() {
        for p in Pass::ALL {
            assert_eq!(p.name().parse::<Pass>().unwrap(), p);
        }
    }

    #[test]
    fn rejects_unknown_and_misordered() {
        assert_eq!(
            parse_pass_list("lower-mapped-data,bogus").unwrap_err(),
            PipelineError::UnknownPass("bogus".into())
        );
        let e = parse_pass_list("split-modules,lower-target-regions").unwrap_err();
        assert!(matches!(e, PipelineError::Order { .. }));
        assert_eq!(e.exit_code(), 2);
        assert!(parse_pass_list("lower-mapped-data,lower-mapped-data").is_err());
    }

    #[test]
    fn subsets_in_order_are_accepted() {
        let p = parse_pass_list("lower-mapped-data, lower-target-regions").unwrap();
        assert_eq!(p, [Pass::LowerMappedData, Pass::LowerTargetRegions]);
    }

    #[test]
    fn parse_errors_count_as_invalid_ir() {
        let e = compile("func.func @f( {", &PipelineOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
