//! Run manifests and deterministic output serialization. Primary outputs
//! (summaries and traces) are byte-identical across reruns of the same
//! manifest; wall-clock time lives only in the side manifest file.

use crate::CliError;
use netform_core::game::{PeriodRecord, SimTrace};
use netform_core::graph::{Network, NetworkStats};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Round to six significant digits for summary output.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub output_paths: Vec<String>,
}

impl RunManifest {
    pub fn new(seed: Option<u64>, config: serde_json::Value) -> Self {
        let command = std::env::args().collect::<Vec<_>>().join(" ");
        RunManifest {
            command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            output_paths: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    manifest: &'a RunManifest,
    wall_clock_ms: u128,
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest, wall_clock_ms: u128) -> Result<(), CliError> {
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&ManifestFile { manifest, wall_clock_ms })
        .map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(&path, body + "\n")
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let body =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(path, body + "\n")
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let body =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    println!("{body}");
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Internal(format!("creating {}: {e}", dir.display())))
}

/// Trace CSV: one row per period with the selected pair, the public signal,
/// and the link delta ("+i-j" formed, "-i-j" severed, ";"-separated).
pub fn trace_csv(records: &[PeriodRecord]) -> String {
    let mut out = String::from("t,pair,signal,edge_delta\n");
    for rec in records {
        let mut delta = String::new();
        for &(a, b) in &rec.added {
            if !delta.is_empty() {
                delta.push(';');
            }
            delta.push_str(&format!("+{a}-{b}"));
        }
        for &(a, b) in &rec.removed {
            if !delta.is_empty() {
                delta.push(';');
            }
            delta.push_str(&format!("-{a}-{b}"));
        }
        out.push_str(&format!(
            "{},{}-{},{},{}\n",
            rec.t,
            rec.pair.0,
            rec.pair.1,
            rec.signal.label(),
            delta
        ));
    }
    out
}

#[derive(Serialize)]
pub struct NetworkStatsReport {
    pub alcc: f64,
    pub gcc: f64,
    pub diameter: u32,
    pub p90_distance: f64,
}

impl From<&NetworkStats> for NetworkStatsReport {
    fn from(s: &NetworkStats) -> Self {
        NetworkStatsReport {
            alcc: sig6(s.alcc),
            gcc: sig6(s.gcc),
            diameter: s.diameter,
            p90_distance: sig6(s.p90_distance),
        }
    }
}

#[derive(Serialize)]
pub struct SimSummary {
    pub manifest: RunManifest,
    pub seed: u64,
    pub periods: usize,
    pub converged: bool,
    pub convergence_period: Option<usize>,
    pub occupancy: f64,
    pub post_convergence_occupancy: Option<f64>,
    pub final_signal: String,
    pub final_link_count: usize,
    pub final_links: Vec<(usize, usize)>,
}

pub fn sim_summary(manifest: RunManifest, seed: u64, trace: &SimTrace) -> SimSummary {
    SimSummary {
        manifest,
        seed,
        periods: trace.periods,
        converged: trace.convergence.is_some(),
        convergence_period: trace.convergence.as_ref().map(|c| c.period),
        occupancy: sig6(trace.occupancy),
        post_convergence_occupancy: trace.post_convergence_occupancy.map(sig6),
        final_signal: trace
            .signals
            .last()
            .map(|s| s.label().to_string())
            .unwrap_or_else(|| "C".into()),
        final_link_count: trace.final_network.link_count(),
        final_links: trace.final_network.links(),
    }
}

pub fn edge_list_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.edges"))
}

pub fn write_edge_list(path: &Path, g: &Network) -> Result<(), CliError> {
    std::fs::write(path, g.to_edge_list_string())
        .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))
}
