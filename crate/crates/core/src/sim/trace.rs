use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceKind {
    Alloc,
    Lookup,
    Acquire,
    Release,
    DmaH2D,
    DmaD2H,
    KernelCreate,
    KernelLaunch,
    KernelWait,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Alloc => "alloc",
            TraceKind::Lookup => "lookup",
            TraceKind::Acquire => "acquire",
            TraceKind::Release => "release",
            TraceKind::DmaH2D => "dma_h2d",
            TraceKind::DmaD2H => "dma_d2h",
            TraceKind::KernelCreate => "kernel_create",
            TraceKind::KernelLaunch => "kernel_launch",
            TraceKind::KernelWait => "kernel_wait",
        }
    }

    pub fn parse(s: &str) -> Option<TraceKind> {
        Some(match s {
            "alloc" => TraceKind::Alloc,
            "lookup" => TraceKind::Lookup,
            "acquire" => TraceKind::Acquire,
            "release" => TraceKind::Release,
            "dma_h2d" => TraceKind::DmaH2D,
            "dma_d2h" => TraceKind::DmaD2H,
            "kernel_create" => TraceKind::KernelCreate,
            "kernel_launch" => TraceKind::KernelLaunch,
            "kernel_wait" => TraceKind::KernelWait,
            _ => return None,
        })
    }

    pub fn is_dma(self) -> bool {
        matches!(self, TraceKind::DmaH2D | TraceKind::DmaD2H)
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One observable device interaction.
///
/// `key` is `name@space` for buffer events and `@function#id` for kernel
/// events. `bytes` is the transfer or allocation size, 0 otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub kind: TraceKind,
    pub key: String,
    pub bytes: u64,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.seq, self.kind, self.key, self.bytes)
    }
}

pub fn buffer_key(name: &str, space: u32) -> String {
    format!("{name}@{space}")
}

/// Replays acquire/release events and checks that every transfer touches a
/// buffer with a positive acquire count at that point. Returns the first
/// offending event.
pub fn check_trace_legality(trace: &[TraceEvent]) -> Result<(), TraceEvent> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut last_seq = None;
    for ev in trace {
        if last_seq.is_some_and(|s| ev.seq <= s) {
            return Err(ev.clone());
        }
        last_seq = Some(ev.seq);
        match ev.kind {
            TraceKind::Alloc => {
                counts.insert(&ev.key, 0);
            }
            TraceKind::Acquire => *counts.entry(&ev.key).or_insert(0) += 1,
            TraceKind::Release => match counts.get_mut(ev.key.as_str()) {
                Some(c) if *c > 0 => *c -= 1,
                _ => return Err(ev.clone()),
            },
            k if k.is_dma() && counts.get(ev.key.as_str()).copied().unwrap_or(0) == 0 => {
                return Err(ev.clone());
            }
            _ => {}
        }
    }
    Ok(())
}
