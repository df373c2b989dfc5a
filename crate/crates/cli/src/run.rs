use std::path::{Path, PathBuf};

use active_altruism::{run_episode, Episode, ExplorationStrategy, Scenario, StrategyKind};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::trace::write_run;
use crate::{plot, RunArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    /// Runs finished, but this many steps reset a contradicted belief.
    Contradictions(usize),
}

/// One scenario variant and where its artifacts go.
#[derive(Debug, Clone)]
pub struct Job {
    pub dir: PathBuf,
    pub scenario: Scenario,
}

/// Expands the flags into one job per (strategy, α) pair. A single pair
/// writes straight into `out`; a sweep uses `{strategy}_alpha{α}` subdirectories.
pub fn plan_jobs(args: &RunArgs, base: &Scenario) -> CliResult<Vec<Job>> {
    let mut base = base.clone();
    if let Some(steps) = args.steps {
        base.steps = steps;
    }
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    if args.conflict_aware {
        base.strategy.conflict_aware = true;
    }
    if let Some(lambda) = args.lambda {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(CliError::Invalid(format!(
                "--lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        base.strategy.lambda = lambda;
    }
    for &alpha in &args.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::Invalid(format!("--alpha {alpha} outside [0, 1]")));
        }
    }

    let kinds = if args.strategy.is_empty() {
        vec![base.strategy.kind]
    } else {
        dedup(&args.strategy)
    };
    let alphas = if args.alpha.is_empty() {
        vec![base.true_alpha]
    } else {
        dedup(&args.alpha)
    };
    let sweep = kinds.len() * alphas.len() > 1;

    let mut jobs = Vec::with_capacity(kinds.len() * alphas.len());
    for &kind in &kinds {
        for &alpha in &alphas {
            let mut scenario = base.clone();
            scenario.strategy = ExplorationStrategy {
                kind,
                ..base.strategy
            };
            scenario.true_alpha = alpha;
            scenario.validate()?;
            let dir = if sweep {
                args.out.join(run_name(kind, alpha))
            } else {
                args.out.clone()
            };
            jobs.push(Job { dir, scenario });
        }
    }
    Ok(jobs)
}

fn dedup<T: PartialEq + Copy>(values: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for v in values {
        if !out.contains(v) {
            out.push(*v);
        }
    }
    out
}

pub fn run_name(kind: StrategyKind, alpha: f64) -> String {
    format!("{kind}_alpha{alpha}")
}

fn run_job(job: &Job, plots: bool) -> CliResult<Episode> {
    log::info!(
        "running {} into {}",
        job.scenario.strategy.kind,
        job.dir.display()
    );
    let episode = run_episode(&job.scenario)?;
    write_run(&job.dir, &job.scenario, &episode)?;
    if plots {
        plot::render_dir(&job.dir)?;
    }
    Ok(episode)
}

pub fn execute(args: &RunArgs) -> CliResult<Status> {
    let scenario = Scenario::load(&args.scenario)?;
    let jobs = plan_jobs(args, &scenario)?;
    let episodes: Vec<Episode> = jobs
        .par_iter()
        .map(|job| run_job(job, args.plots))
        .collect::<CliResult<_>>()?;
    for (job, episode) in jobs.iter().zip(&episodes) {
        report(&job.dir, episode);
    }
    let warnings: usize = episodes.iter().map(|e| e.summary.warnings).sum();
    Ok(if warnings == 0 {
        Status::Clean
    } else {
        Status::Contradictions(warnings)
    })
}

fn report(dir: &Path, episode: &Episode) {
    let s = &episode.summary;
    println!(
        "{}: {} alpha={} -> {:?} by {:.2} m, cells {}",
        dir.display(),
        s.strategy.kind,
        s.true_alpha,
        s.outcome,
        s.final_relative_position,
        s.chosen_actions.concat()
    );
}
