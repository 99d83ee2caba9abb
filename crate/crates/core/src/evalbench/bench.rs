use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::Task;
use super::metrics::{score_code, Accuracy, MetricError, Score};
use crate::interpreter::{run_source, transitions_match, Tolerance};
use crate::pipeline::{observe, run_task, LoopStatus, MethodConfig};
use crate::prompts::{build_simulator_prompt, Ablation, PromptError};
use crate::roles::{evaluate, RoleError, Verdict};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
    #[error("no tasks to run")]
    NoTasks,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// A method under a report label.
#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub label: String,
    pub config: MethodConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub repetitions: usize,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub tolerance: Tolerance,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { repetitions: 3, jobs: 0, tolerance: Tolerance::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task_id: String,
    pub method: String,
    pub repetition: usize,
    pub completeness: f64,
    pub success: bool,
    pub iterations_used: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: String,
    pub runs: usize,
    pub mean_completeness: f64,
    /// Percentage of runs with success.
    pub success_rate: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<MethodAggregate>,
}

/// Per-method means over `rows`, in order of first appearance.
pub fn aggregate(rows: &[ReportRow]) -> Vec<MethodAggregate> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        if !groups.contains_key(r.method.as_str()) {
            order.push(&r.method);
        }
        groups.entry(&r.method).or_default().push(r);
    }
    order
        .into_iter()
        .map(|m| {
            let g = &groups[m];
            let n = g.len() as f64;
            MethodAggregate {
                method: m.to_string(),
                runs: g.len(),
                mean_completeness: g.iter().map(|r| r.completeness).sum::<f64>() / n,
                success_rate: g.iter().filter(|r| r.success).count() as f64 / n * 100.0,
                mean_iterations: g.iter().map(|r| r.iterations_used as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

impl MetricsReport {
    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        let aggregates = aggregate(&rows);
        Self { rows, aggregates }
    }

    /// Columns: task_id, method, repetition, completeness, success, iterations_used.
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| BenchError::Csv(e.to_string());
        w.write_record(["task_id", "method", "repetition", "completeness", "success", "iterations_used"]).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.task_id.clone(),
                r.method.clone(),
                r.repetition.to_string(),
                r.completeness.to_string(),
                u8::from(r.success).to_string(),
                r.iterations_used.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render_table(&self) -> String {
        let width = self.aggregates.iter().map(|a| a.method.len()).max().unwrap_or(6).max(6);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>5}  {:>12}  {:>7}  {:>10}", "Method", "Runs", "Completeness", "SR", "Iterations");
        let _ = writeln!(out, "{}", "-".repeat(width + 44));
        for a in &self.aggregates {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>11.1}%  {:>6.1}%  {:>10.2}",
                a.method,
                a.runs,
                a.mean_completeness * 100.0,
                a.success_rate,
                a.mean_iterations
            );
        }
        out
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| BenchError::Pool(e.to_string()))
}

fn run_cell(task: &Task, method: &MethodSpec, repetition: usize, tol: &Tolerance) -> ReportRow {
    let (score, iterations_used, status) = match run_task(task, &method.config) {
        Ok(result) => {
            let exec = method.config.exec.with_takeoff_altitude(task.h_takeoff);
            let score = if result.final_code.trim().is_empty() {
                Score::ZERO
            } else {
                score_code(&result.final_code, &task.ground_truth, &exec, tol).unwrap_or(Score::ZERO)
            };
            (score, result.iterations_used, result.status.to_string())
        }
        Err(_) => (Score::ZERO, 0, LoopStatus::Faulted.to_string()),
    };
    ReportRow {
        task_id: task.id.clone(),
        method: method.label.clone(),
        repetition,
        completeness: score.completeness,
        success: score.success,
        iterations_used,
        status,
    }
}

/// Run every (task, method, repetition) cell and score the final code of each.
///
/// Rows come back ordered by method, then repetition, then task, whatever the
/// scheduling. A failing cell scores zero and the sweep continues.
pub fn run_benchmark(tasks: &[Task], methods: &[MethodSpec], options: &BenchOptions) -> Result<MetricsReport, BenchError> {
    if options.repetitions == 0 {
        return Err(BenchError::ZeroRepetitions);
    }
    if tasks.is_empty() {
        return Err(BenchError::NoTasks);
    }
    let cells: Vec<(usize, usize, usize)> = (0..methods.len())
        .flat_map(|m| (1..=options.repetitions).flat_map(move |r| (0..tasks.len()).map(move |t| (m, r, t))))
        .collect();
    let rows = pool(options.jobs)?.install(|| {
        cells.par_iter().map(|&(m, r, t)| run_cell(&tasks[t], &methods[m], r, &options.tolerance)).collect::<Vec<_>>()
    });
    Ok(MetricsReport::from_rows(rows))
}

/// One configuration of the prompt ablation study.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub label: &'static str,
    pub ablation: Ablation,
    pub simulator_prompt: String,
    pub aggregate: MethodAggregate,
}

/// Run `base` once per simulator-prompt mask.
pub fn run_ablation(tasks: &[Task], base: &MethodConfig, options: &BenchOptions) -> Result<Vec<AblationRun>, BenchError> {
    let mut specs = Vec::new();
    let mut prompts = Vec::new();
    for (label, ablation) in Ablation::study() {
        let mut config = base.clone();
        config.prompts.simulator = config.prompts.simulator.clone().with_ablation(ablation.clone());
        prompts.push((label, ablation, build_simulator_prompt(&config.prompts.simulator)?));
        specs.push(MethodSpec { label: label.to_string(), config });
    }
    let report = run_benchmark(tasks, &specs, options)?;
    Ok(prompts
        .into_iter()
        .zip(report.aggregates)
        .map(|((label, ablation, simulator_prompt), aggregate)| AblationRun { label, ablation, simulator_prompt, aggregate })
        .collect())
}

pub fn render_ablation_table(runs: &[AblationRun]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24}  {:>12}  {:>7}", "Prompt", "Completeness", "SR");
    let _ = writeln!(out, "{}", "-".repeat(47));
    for r in runs {
        let _ = writeln!(out, "{:<24}  {:>11.1}%  {:>6.1}%", r.label, r.aggregate.mean_completeness * 100.0, r.aggregate.success_rate);
    }
    out
}

/// Share of codes whose observation carries the oracle's exact transition list (within `tol`).
///
/// Observations without a structured block, and backend errors, count as misses.
pub fn observation_accuracy(codes: &[String], config: &MethodConfig, tol: &Tolerance) -> Result<Accuracy, MetricError> {
    let mut hits = 0;
    let mut errors = 0;
    for code in codes {
        let Ok(oracle) = run_source(code, config.initial_state, &config.exec) else {
            errors += 1;
            continue;
        };
        match observe(code, config) {
            Ok(obs) => {
                if obs.structured.is_some_and(|s| transitions_match(&s, &oracle.transitions, tol)) {
                    hits += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    Accuracy::new(hits, codes.len(), errors)
}

/// A code paired with the task it is judged against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCase {
    pub task: String,
    pub code: String,
}

fn judge(case: &EvalCase, config: &MethodConfig) -> Result<Verdict, RoleError> {
    let obs = observe(&case.code, config)?;
    match evaluate(&case.task, &obs, &config.prompts.evaluator, &config.prompts.direct_evaluator, &config.llm.evaluator) {
        Err(RoleError::MalformedVerdict { raw }) => Ok(Verdict::malformed(&raw)),
        other => other,
    }
}

/// (MATCH on correct codes + MISMATCH on incorrect codes) / all codes.
pub fn evaluation_accuracy(correct: &[EvalCase], incorrect: &[EvalCase], config: &MethodConfig) -> Result<Accuracy, MetricError> {
    let mut hits = 0;
    let mut errors = 0;
    for (cases, want_match) in [(correct, true), (incorrect, false)] {
        for case in cases {
            match judge(case, config) {
                Ok(v) if v.is_match == want_match => hits += 1,
                Ok(_) => {}
                Err(_) => errors += 1,
            }
        }
    }
    Accuracy::new(hits, correct.len() + incorrect.len(), errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, c: f64, s: bool, it: usize) -> ReportRow {
        ReportRow {
            task_id: "t".into(),
            method: method.into(),
            repetition: 1,
            completeness: c,
            success: s,
            iterations_used: it,
            status: "accepted".into(),
        }
    }

    #[test]
    fn aggregates_by_hand() {
        let rows = vec![row("B", 1.0, true, 1), row("A", 0.5, false, 5), row("B", 0.25, false, 3)];
        let agg = aggregate(&rows);
        assert_eq!(agg[0].method, "B");
        assert_eq!(agg[0].runs, 2);
        assert_eq!(agg[0].mean_completeness, 0.625);
        assert_eq!(agg[0].success_rate, 50.0);
        assert_eq!(agg[0].mean_iterations, 2.0);
        assert_eq!(agg[1].success_rate, 0.0);
    }

    #[test]
    fn csv_layout() {
        let report = MetricsReport::from_rows(vec![row("Ours", 0.6, false, 2)]);
        assert_eq!(
            report.to_csv().unwrap(),
            "task_id,method,repetition,completeness,success,iterations_used\nt,Ours,1,0.6,0,2\n"
        );
        assert!(report.render_table().contains("Ours"));
    }
}
