//! `train` and `baseline single-rl`.

use std::path::Path;
use std::sync::Arc;

use chiplet_place::agents::{ActMode, Episode, TrainConfig, Trainer, UpdateReport};
use chiplet_place::analysis::{ParetoPoint, POINTS_FILE};
use chiplet_place::env::EnvMode;
use chiplet_place::io::{append_csv, write_csv};
use chiplet_place::model::BenchmarkConfig;
use chiplet_place::thermal::thermal_field;
use serde::Serialize;

use super::render::thermal_grid_text;
use super::{create_dir, write_file, Written};
use crate::error::{CliError, CliResult};

pub const TRAINING_LOG: &str = "training_log.csv";
pub const LOSSES: &str = "losses.csv";
pub const EPISODES: &str = "episodes.csv";
pub const EVALUATION: &str = "evaluation.csv";

#[derive(Serialize)]
struct LogRow {
    update: usize,
    episodes: usize,
    deadlocks: usize,
    mean_wl: f64,
    mean_temp: f64,
    mean_raw_wire_return: f64,
    mean_raw_thermal_return: f64,
    mean_reward_return: f64,
}

#[derive(Serialize)]
struct LossRow {
    update: usize,
    agent: &'static str,
    policy_loss: f64,
    value_loss: f64,
    entropy: f64,
    clip_fraction: f64,
    approx_kl: f64,
}

#[derive(Serialize)]
struct EvalRow {
    checkpoint: usize,
    kind: &'static str,
    index: usize,
    wl: f64,
    temp: f64,
    reward_return: f64,
    deadlock: bool,
}

/// Seed for the evaluation episodes of one checkpoint.
pub fn eval_seed(train_seed: u64, update: usize) -> u64 {
    train_seed.wrapping_mul(1_000_003).wrapping_add(update as u64)
}

fn log_update(dir: &Path, r: &UpdateReport) -> CliResult<()> {
    append_csv(
        &dir.join(TRAINING_LOG),
        &[LogRow {
            update: r.update,
            episodes: r.episodes.len(),
            deadlocks: r.deadlocks,
            mean_wl: r.mean_wl,
            mean_temp: r.mean_temp,
            mean_raw_wire_return: r.mean_raw_wire_return,
            mean_raw_thermal_return: r.mean_raw_thermal_return,
            mean_reward_return: r.mean_reward_return,
        }],
    )?;
    let losses: Vec<LossRow> = r
        .losses
        .iter()
        .map(|(role, l)| LossRow {
            update: r.update,
            agent: role.as_str(),
            policy_loss: l.policy_loss,
            value_loss: l.value_loss,
            entropy: l.entropy,
            clip_fraction: l.clip_fraction,
            approx_kl: l.approx_kl,
        })
        .collect();
    append_csv(&dir.join(LOSSES), &losses)?;
    append_csv(&dir.join(EPISODES), &r.episodes)?;
    Ok(())
}

fn eval_rows(update: usize, kind: &'static str, eps: &[Episode]) -> Vec<EvalRow> {
    eps.iter()
        .enumerate()
        .map(|(i, e)| EvalRow {
            checkpoint: update,
            kind,
            index: i,
            wl: e.summary.wl,
            temp: e.summary.temp,
            reward_return: e.summary.reward_return,
            deadlock: e.summary.deadlock,
        })
        .collect()
}

/// Trains, checkpoints and evaluates one seed. Each checkpoint contributes
/// `eval_episodes` sampled layouts and one greedy layout to the point cloud.
pub fn run(
    dir: &Path,
    config: &BenchmarkConfig,
    tc: &TrainConfig,
    mode: EnvMode,
    eval_episodes: usize,
    method: &str,
) -> CliResult<Written> {
    let mut trainer = Trainer::new(Arc::new(config.clone()), tc.clone(), mode)?;
    let mut w = Written::default();
    create_dir(&dir.join("checkpoints"))?;
    create_dir(&dir.join("layouts"))?;
    let mut last_greedy: Option<Episode> = None;

    while trainer.updates_done() < tc.total_updates {
        let report = trainer.update()?;
        log_update(dir, &report)?;
        if report.deadlocks == report.episodes.len() {
            return Err(CliError::Deadlock(format!(
                "every episode of update {} deadlocked",
                report.update
            )));
        }
        let done = trainer.updates_done();
        if done % tc.checkpoint_interval != 0 && done != tc.total_updates {
            continue;
        }
        let ckpt_rel = format!("checkpoints/ckpt-{done:06}.bin");
        trainer.checkpoint().save(&dir.join(&ckpt_rel))?;
        w.artifact(ckpt_rel);

        let seed = eval_seed(tc.seed, done);
        let sampled = trainer.evaluate(eval_episodes, ActMode::Sample, seed)?;
        let greedy = trainer.evaluate(1, ActMode::Greedy, seed)?;
        let mut rows = eval_rows(done, "sample", &sampled);
        rows.extend(eval_rows(done, "greedy", &greedy));
        append_csv(&dir.join(EVALUATION), &rows)?;

        let mut points = Vec::new();
        for (i, e) in sampled.iter().enumerate().filter(|(_, e)| !e.summary.deadlock) {
            points.push(ParetoPoint::new(
                method,
                tc.seed,
                format!("ckpt-{done}/sample-{i}"),
                e.summary.wl,
                e.summary.temp,
            ));
        }
        let g = greedy.into_iter().next().expect("one greedy episode");
        if let Some(layout) = g.layout(config) {
            points.push(ParetoPoint::new(method, tc.seed, format!("ckpt-{done}/greedy"), g.summary.wl, g.summary.temp));
            let rel = format!("layouts/ckpt-{done:06}-greedy.json");
            write_file(&dir.join(&rel), layout.to_json())?;
            w.metric(rel);
        }
        if !points.is_empty() {
            append_csv(&dir.join(POINTS_FILE), &points)?;
        }
        last_greedy = Some(g);
        eprintln!(
            "[{method} seed {}] update {done}/{}: mean wl {:.1} mm, mean hotspot {:.2} C",
            tc.seed, tc.total_updates, report.mean_wl, report.mean_temp
        );
    }

    for f in [TRAINING_LOG, LOSSES, EPISODES, EVALUATION, POINTS_FILE] {
        if dir.join(f).exists() {
            w.metric(f);
        }
    }
    if let Some(g) = last_greedy {
        create_dir(&dir.join("traces"))?;
        write_csv(&dir.join("traces/greedy-final.csv"), &g.trace)?;
        w.metric("traces/greedy-final.csv");
        if !g.summary.deadlock {
            let field = thermal_field(&g.state, config)?;
            write_file(&dir.join("thermal/final.txt"), thermal_grid_text(config, &field))?;
            w.metric("thermal/final.txt");
        }
    }
    Ok(w)
}
