//! Orchestration of both phases, run reports and the benchmark matrix.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bottomup::{bottom_up, Limits, ModelTable, Verdict};
use crate::generalize::GenOp;
use crate::model::SystemSpec;
use crate::parse::{parse_spec, SpecError};
use crate::specialize::{render_program, specialize, Deadline, SpecConfig, SpecProgram, SpecializeError};
use crate::wqo::FiringRelation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub firing: FiringRelation,
    pub genop: GenOp,
    pub timeout_ms: u64,
    pub max_bottomup_iters: usize,
    pub ancestor_includes_self: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            firing: FiringRelation::Always,
            genop: GenOp::WidenMax,
            timeout_ms: 100_000,
            max_bottomup_iters: 1000,
            ancestor_includes_self: true,
        }
    }
}

impl RunConfig {
    pub fn with(firing: FiringRelation, genop: GenOp) -> Self {
        RunConfig { firing, genop, ..RunConfig::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSteps {
    pub reuse: u64,
    pub generalize: u64,
    pub fresh: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub specialize_ms: u64,
    pub bottomup_ms: u64,
    pub total_ms: u64,
    pub definitions: usize,
    pub clauses: usize,
    pub facts: usize,
    pub gen_steps: GenSteps,
}

impl RunReport {
    pub fn timed_out(&self) -> bool {
        self.reason.as_deref() == Some("timeout")
    }
}

/// The report plus whatever artifacts were produced before any failure.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub program: Option<SpecProgram>,
    pub model: Option<ModelTable>,
}

/// 0 verified, 1 violated, 2 unknown. Input errors use 3.
pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Verified => 0,
        Verdict::Violated => 1,
        Verdict::Unknown => 2,
    }
}

pub const INPUT_ERROR_EXIT: i32 = 3;

fn millis(d: Duration) -> u64 {
    d.as_millis().min(u64::MAX as u128) as u64
}

fn specialize_reason(e: &SpecializeError) -> &'static str {
    match e {
        SpecializeError::TimeLimit => "timeout",
        SpecializeError::StepLimit(_) => "step-limit",
        SpecializeError::Ts(_) => "size-limit",
    }
}

/// Specialization followed by bottom-up evaluation under one shared budget.
pub fn run(spec: &SystemSpec, config: &RunConfig) -> RunOutput {
    let start = Instant::now();
    let deadline = Deadline::after(Duration::from_millis(config.timeout_ms));
    let sc = SpecConfig {
        firing: config.firing,
        genop: config.genop,
        ancestor_includes_self: config.ancestor_includes_self,
        ..SpecConfig::default()
    };
    let spec_result = specialize(spec, &sc, deadline);
    let specialize_ms = millis(start.elapsed());
    let (program, stats) = match spec_result {
        Ok(x) => x,
        Err(e) => {
            return RunOutput {
                report: RunReport {
                    verdict: Verdict::Unknown,
                    reason: Some(specialize_reason(&e).to_string()),
                    specialize_ms,
                    bottomup_ms: 0,
                    total_ms: millis(start.elapsed()),
                    definitions: 0,
                    clauses: 0,
                    facts: 0,
                    gen_steps: GenSteps::default(),
                },
                program: None,
                model: None,
            }
        }
    };
    let bu_start = Instant::now();
    let limits = Limits { max_iterations: config.max_bottomup_iters, deadline, ..Limits::default() };
    let outcome = bottom_up(&program, &limits);
    let bottomup_ms = millis(bu_start.elapsed());
    RunOutput {
        report: RunReport {
            verdict: outcome.verdict,
            reason: outcome.reason,
            specialize_ms,
            bottomup_ms,
            total_ms: millis(start.elapsed()),
            definitions: program.definitions.len(),
            clauses: program.clauses.len(),
            facts: outcome.model.fact_count(),
            gen_steps: GenSteps { reuse: stats.reuse, generalize: stats.generalize, fresh: stats.fresh },
        },
        program: Some(program),
        model: Some(outcome.model),
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchCell {
    /// `VERIFIED`, `VIOLATED`, `UNKNOWN` or `input-error`.
    pub verdict: String,
    pub reason: Option<String>,
    pub total_ms: Option<u64>,
    pub specialize_ms: Option<u64>,
    #[serde(skip)]
    pub specialized: Option<String>,
}

impl BenchCell {
    /// Total time, `∞` for a timeout, `-` when nothing ran.
    pub fn time_text(&self) -> String {
        match (self.reason.as_deref(), self.total_ms) {
            (Some("timeout"), _) => "∞".into(),
            (_, Some(ms)) => ms.to_string(),
            _ => "-".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub cells: Vec<BenchCell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchMatrix {
    /// Column groups as `firing/genop`.
    pub configs: Vec<String>,
    pub rows: Vec<BenchRow>,
}

/// The `.spec` files of a directory, sorted by name.
pub fn spec_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io_err = |source| BenchError::Io { path: dir.to_path_buf(), source };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    files.sort();
    Ok(files)
}

fn input_error(message: String) -> BenchCell {
    BenchCell { verdict: "input-error".into(), reason: Some(message), total_ms: None, specialize_ms: None, specialized: None }
}

/// Runs every model of `dir` under every configuration.
pub fn bench(dir: &Path, configs: &[RunConfig]) -> Result<BenchMatrix, BenchError> {
    let mut rows = Vec::new();
    for path in spec_files(dir)? {
        let model = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let parsed: Result<SystemSpec, String> = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_spec(&text).map_err(|e: SpecError| e.to_string()));
        let cells = configs
            .iter()
            .map(|cfg| match &parsed {
                Err(msg) => input_error(msg.clone()),
                Ok(spec) => {
                    let out = run(spec, cfg);
                    BenchCell {
                        verdict: out.report.verdict.to_string(),
                        reason: out.report.reason.clone(),
                        total_ms: Some(out.report.total_ms),
                        specialize_ms: Some(out.report.specialize_ms),
                        specialized: out.program.as_ref().map(render_program),
                    }
                }
            })
            .collect();
        rows.push(BenchRow { model, cells });
    }
    Ok(BenchMatrix {
        configs: configs.iter().map(|c| format!("{}/{}", c.firing, c.genop)).collect(),
        rows,
    })
}

impl BenchMatrix {
    /// One row per model; a verdict and a time column per configuration.
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model".to_string()];
        for c in &self.configs {
            header.push(format!("{c} verdict"));
            header.push(format!("{c} ms"));
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.model.clone()];
            for cell in &r.cells {
                rec.push(cell.verdict.clone());
                rec.push(cell.time_text());
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}
