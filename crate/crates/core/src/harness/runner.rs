//! Matrix execution with per-repetition persistence.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OptimizerConfig, OptimizerKind};
use super::report::{load_results, CellResult};
use super::seed::derive_seed;
use super::HarnessError;
use crate::optim::{
    run_hcr, run_pibo, run_random, run_turbo, run_vanilla_bo, EvalRecord, FalsificationProblem, FalsificationResult,
    Objective,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub optimizer: String,
    pub repetition: usize,
    pub seed: u64,
    pub success: bool,
    pub simulations: usize,
    pub gp_fits: usize,
    pub aborted: bool,
    pub failed_simulations: usize,
    pub best: Option<f64>,
    pub falsifying_x: Option<Vec<f64>>,
    pub evaluations: Vec<EvalRecord>,
}

impl RunRecord {
    fn new(label: &str, optimizer: &str, repetition: usize, seed: u64, r: FalsificationResult) -> Self {
        let falsifying_x = r.records.iter().find(|e| e.falsified).map(|e| e.x.clone());
        Self {
            label: label.to_string(),
            optimizer: optimizer.to_string(),
            repetition,
            seed,
            success: r.success,
            simulations: r.simulations,
            gp_fits: r.gp_fits,
            aborted: r.aborted,
            failed_simulations: r.failures(),
            best: r.best(),
            falsifying_x,
            evaluations: r.records,
        }
    }
}

/// Row and column order for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub benchmarks: Vec<String>,
    pub optimizers: Vec<String>,
    pub repetitions: usize,
}

#[derive(Debug, Clone)]
pub struct MatrixSummary {
    /// Repetitions simulated by this invocation.
    pub executed: usize,
    /// Repetitions found on disk and left alone.
    pub skipped: usize,
    pub cells: Vec<CellResult>,
}

/// File stem of a run record.
pub fn record_key(label: &str, optimizer: &str, repetition: usize) -> String {
    format!("{label}__{optimizer}__{repetition}")
}

pub(crate) fn runs_dir(out: &Path) -> PathBuf {
    out.join("runs")
}

/// Writes via a temporary file in the same directory and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(HarnessError::io(dir))?;
    tmp.write_all(bytes).map_err(HarnessError::io(path))?;
    tmp.persist(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn complete(path: &Path) -> bool {
    std::fs::read(path)
        .ok()
        .and_then(|b| serde_json::from_slice::<RunRecord>(&b).ok())
        .is_some()
}

pub fn run_matrix(cfg: &ExperimentConfig) -> Result<MatrixSummary, HarnessError> {
    run_matrix_with(cfg, cfg.parallelism)
}

/// Runs every missing (benchmark, optimizer, repetition) of the matrix on
/// at most `parallelism` threads, then aggregates everything on disk.
pub fn run_matrix_with(cfg: &ExperimentConfig, parallelism: usize) -> Result<MatrixSummary, HarnessError> {
    cfg.validate()?;
    let problems = cfg
        .benchmarks
        .iter()
        .map(|b| b.build())
        .collect::<Result<Vec<_>, _>>()?;
    let out = &cfg.output_dir;
    let runs = runs_dir(out);
    std::fs::create_dir_all(&runs).map_err(HarnessError::io(&runs))?;
    let manifest = Manifest {
        benchmarks: cfg.benchmarks.iter().map(|b| b.label.clone()).collect(),
        optimizers: cfg.optimizers.iter().map(|o| o.id.clone()).collect(),
        repetitions: cfg.repetitions,
    };
    let manifest_json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out.join("manifest.json"), &manifest_json)?;

    let mut jobs = Vec::new();
    let mut skipped = 0;
    for (bi, b) in cfg.benchmarks.iter().enumerate() {
        for o in &cfg.optimizers {
            for rep in 0..cfg.repetitions {
                let path = runs.join(format!("{}.json", record_key(&b.label, &o.id, rep)));
                if complete(&path) {
                    skipped += 1;
                } else {
                    jobs.push((bi, o, rep, path));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter().try_for_each(|(bi, o, rep, path)| {
            let b = &cfg.benchmarks[*bi];
            let seed = derive_seed(cfg.master_seed, &format!("{}__{}", b.label, o.id), *rep);
            let started = Instant::now();
            let result = run_one(cfg, &problems[*bi], o, seed)?;
            let wall = started.elapsed().as_secs_f64();
            let record = RunRecord::new(&b.label, &o.id, *rep, seed, result);
            let json = serde_json::to_vec_pretty(&record).expect("record serializes");
            write_atomic(path, &json)?;
            write_atomic(&path.with_extension("wall"), format!("{wall}\n").as_bytes())
        })
    })?;

    Ok(MatrixSummary {
        executed: jobs.len(),
        skipped,
        cells: load_results(out)?,
    })
}

fn run_one(
    cfg: &ExperimentConfig,
    problem: &FalsificationProblem,
    o: &OptimizerConfig,
    seed: u64,
) -> Result<FalsificationResult, HarnessError> {
    let budget = cfg.budget_for(problem.dim())?;
    let fit = o.fit.unwrap_or_default();
    let acq = o.acquisition();
    Ok(match o.kind {
        OptimizerKind::Vanilla => run_vanilla_bo(problem, acq, budget, &fit, seed),
        OptimizerKind::Turbo => run_turbo(problem, acq, budget, &o.trust_region.unwrap_or_default(), &fit, seed),
        OptimizerKind::Pibo => run_pibo(problem, acq, &o.pibo_options(cfg.max_simulations), budget, &fit, seed),
        OptimizerKind::Hcr => run_hcr(problem, budget, seed),
        OptimizerKind::Random => run_random(problem, budget, seed),
    })
}
