use std::path::{Path, PathBuf};

use rand::SeedableRng;

use super::config::{PolicyKind, RunConfig};
use super::report::{write_episode_csv, EpisodeRecord, StatsTable};
use super::{csv_err, io_err, HarnessError};
use crate::altimeter::{characterize_error, ErrorRow, TerrainMap};
use crate::drdv::{DrdvConfig, DrdvController};
use crate::envs::{scenario_terrain, EnvConfig, Environment, LandingEnv, PointMassEnv, SimRng, Termination};
use crate::nets::Checkpoint;
use crate::ppo::{run_episode, ActionMode, Agent, Trainer, TrainerConfig, UpdateConfig, UpdateStats};
use crate::seeding::{derive_seed, stream_rng, streams};

pub const LEARNING_CURVE_FILE: &str = "learning_curve.csv";
pub const CHECKPOINT_FILE: &str = "policy.ckpt";
pub const EVAL_FILE: &str = "eval.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const ALTIMETER_ELEVATIONS: [f64; 5] = [400.0, 500.0, 600.0, 700.0, 800.0];

/// Output directory of one scenario/policy pair.
pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join(&cfg.scenario).join(cfg.policy.key())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub curve: Vec<UpdateStats>,
    pub checkpoints: Vec<PathBuf>,
    pub final_checkpoint: Checkpoint,
}

fn write_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), HarnessError> {
    std::fs::write(path, ckpt.encode()).map_err(io_err(path))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, HarnessError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Checkpoint::decode(&bytes).map_err(|source| HarnessError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })
}

fn trainer_config(cfg: &RunConfig) -> TrainerConfig {
    let mut update = UpdateConfig {
        episodes_per_update: cfg.episodes_per_update,
        ..UpdateConfig::default()
    };
    if let Some(env) = &cfg.env {
        update.gamma1 = env.discount.gamma1;
        update.gamma2 = env.discount.gamma2;
    }
    let (recurrent, unroll) = match cfg.policy {
        PolicyKind::Rnn(t) => (true, t),
        _ => (false, 1),
    };
    TrainerConfig {
        update,
        recurrent,
        unroll,
        seed: cfg.seed,
        warmup_episodes: cfg.warmup_episodes,
    }
}

fn landing_env(env: &EnvConfig) -> Result<LandingEnv, HarnessError> {
    let terrain = scenario_terrain(env)?;
    Ok(LandingEnv::new(env.clone(), terrain)?)
}

/// Trains for the configured budget, writing the learning curve, periodic
/// checkpoints (including the initial networks) and the final checkpoint.
pub fn train(cfg: &RunConfig) -> Result<TrainReport, HarnessError> {
    if cfg.policy == PolicyKind::Drdv {
        return Err(HarnessError::NotTrainable(cfg.policy.label()));
    }
    let tc = trainer_config(cfg);
    match &cfg.env {
        Some(env) => train_with(Trainer::new(landing_env(env)?, tc), cfg),
        None => train_with(Trainer::new(PointMassEnv::default(), tc), cfg),
    }
}

fn train_with<E: Environment>(mut trainer: Trainer<E>, cfg: &RunConfig) -> Result<TrainReport, HarnessError> {
    let dir = run_dir(cfg);
    let ckpt_dir = dir.join("checkpoints");
    std::fs::create_dir_all(&ckpt_dir).map_err(io_err(&ckpt_dir))?;
    let curve_path = dir.join(LEARNING_CURVE_FILE);
    let mut curve_csv = csv::Writer::from_path(&curve_path).map_err(csv_err(&curve_path))?;
    curve_csv.write_record(UpdateStats::CSV_HEADER).map_err(csv_err(&curve_path))?;

    let mut checkpoints = Vec::new();
    let save = |t: &Trainer<E>, checkpoints: &mut Vec<PathBuf>| -> Result<Checkpoint, HarnessError> {
        let ckpt = t.checkpoint(&cfg.scenario);
        let path = ckpt_dir.join(format!("update_{:05}.ckpt", t.updates_done));
        write_checkpoint(&path, &ckpt)?;
        write_checkpoint(&dir.join(CHECKPOINT_FILE), &ckpt)?;
        checkpoints.push(path);
        Ok(ckpt)
    };
    let mut last = save(&trainer, &mut checkpoints)?;
    let mut curve = Vec::with_capacity(cfg.updates);
    for _ in 0..cfg.updates {
        let stats = match trainer.update() {
            Ok(s) => s,
            Err(source) => {
                curve_csv.flush().map_err(io_err(&curve_path))?;
                write_checkpoint(&dir.join(CHECKPOINT_FILE), &last)?;
                return Err(HarnessError::Diverged {
                    updates: trainer.updates_done,
                    source,
                });
            }
        };
        curve_csv.write_record(stats.csv_record()).map_err(csv_err(&curve_path))?;
        curve.push(stats);
        if trainer.updates_done % cfg.checkpoint_every == 0 || trainer.updates_done == cfg.updates {
            last = save(&trainer, &mut checkpoints)?;
        }
    }
    curve_csv.flush().map_err(io_err(&curve_path))?;
    Ok(TrainReport {
        curve,
        checkpoints,
        final_checkpoint: last,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub table: StatsTable,
    pub records: Vec<EpisodeRecord>,
}

fn eval_env_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, &[streams::EVAL_ENV, k as u64])
}

fn record(k: usize, env_seed: u64, info: &crate::envs::StepInfo, cause: Option<Termination>) -> EpisodeRecord {
    EpisodeRecord {
        episode: k,
        env_seed,
        r_f: info.position.norm(),
        v_f: info.velocity.norm(),
        glideslope: info.glideslope,
        fuel: info.fuel_used,
        cause: cause.map_or("none", |c| c.as_str()).to_string(),
    }
}

/// Runs `n` episodes with the policy mean as the action.
pub fn evaluate_policy<E: Environment + ?Sized>(env: &mut E, agent: &Agent, seed: u64, n: usize) -> Vec<EpisodeRecord> {
    (0..n)
        .map(|k| {
            let s = eval_env_seed(seed, k);
            let mut env_rng = SimRng::seed_from_u64(s);
            let mut act_rng = stream_rng(seed, &[streams::EVAL_ENV, k as u64, 1]);
            let ep = run_episode(env, agent, ActionMode::Mean, &mut env_rng, &mut act_rng);
            record(k, s, &ep.terminal, ep.cause)
        })
        .collect()
}

/// Runs `n` DR/DV episodes on the same environment draws as
/// [`evaluate_policy`].
pub fn evaluate_drdv(env: &mut LandingEnv, drdv: DrdvConfig, seed: u64, n: usize) -> Vec<EpisodeRecord> {
    let cfg = env.config().clone();
    (0..n)
        .map(|k| {
            let s = eval_env_seed(seed, k);
            let mut rng = SimRng::seed_from_u64(s);
            env.reset(&mut rng);
            let mut ctl = DrdvController::new(drdv, &cfg, env.state(), env.body());
            loop {
                let thrust = ctl.act(env.state(), &cfg, env.failure());
                let out = env.step_thrust(&thrust, &mut rng);
                if out.done {
                    return record(k, s, &out.info, out.cause);
                }
            }
        })
        .collect()
}

fn drdv_config(cfg: &RunConfig, env: &EnvConfig) -> DrdvConfig {
    match cfg.drdv_gravity {
        Some(g) => DrdvConfig::asteroid(g),
        None => DrdvConfig::for_scenario(env),
    }
}

/// Evaluates the configured policy (the trained checkpoint in the run
/// directory, or DR/DV) and writes the per-episode and statistics CSVs.
pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport, HarnessError> {
    let dir = run_dir(cfg);
    let records = match (&cfg.env, cfg.policy) {
        (Some(env), PolicyKind::Drdv) => evaluate_drdv(&mut landing_env(env)?, drdv_config(cfg, env), cfg.seed, cfg.eval_episodes),
        (None, PolicyKind::Drdv) => return Err(HarnessError::Config("DR/DV needs a lander scenario".into())),
        (env, _) => {
            let path = dir.join(CHECKPOINT_FILE);
            let ckpt = load_checkpoint(&path)?;
            if ckpt.scenario != cfg.scenario {
                return Err(HarnessError::Config(format!(
                    "{} was trained on `{}`, not `{}`",
                    path.display(),
                    ckpt.scenario,
                    cfg.scenario
                )));
            }
            let agent = Agent {
                policy: ckpt.policy,
                value: ckpt.value,
                scaler: ckpt.scaler,
            };
            match env {
                Some(env) => evaluate_policy(&mut landing_env(env)?, &agent, cfg.seed, cfg.eval_episodes),
                None => evaluate_policy(&mut PointMassEnv::default(), &agent, cfg.seed, cfg.eval_episodes),
            }
        }
    };
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_episode_csv(&dir.join(EVAL_FILE), &records)?;
    let table = StatsTable::from_records(&records);
    table.write_csv(&dir.join(STATS_FILE))?;
    Ok(EvalReport { table, records })
}

/// Range-error statistics of the altimeter over the scenario's terrain at
/// the standard elevations; `eval_episodes` sets the samples per elevation.
/// Writes `altimeter_error.csv` under the output directory.
pub fn characterize_altimeter(cfg: &RunConfig) -> Result<Vec<ErrorRow>, HarnessError> {
    let default_env;
    let env = match &cfg.env {
        Some(e) => e,
        None => {
            default_env = EnvConfig::preset("mars-altimeter")?;
            &default_env
        }
    };
    let o = &env.observation;
    let map = if o.terrain == "synthetic" {
        TerrainMap::synthetic(o.terrain_seed)
    } else {
        TerrainMap::load(Path::new(&o.terrain))?
    };
    let map = if o.mirror { map.mirror() } else { map };
    let mut rng = stream_rng(cfg.seed, &[streams::EVAL_ENV, u64::MAX]);
    let rows = characterize_error(&map, &mut rng, &ALTIMETER_ELEVATIONS, cfg.eval_episodes, 1000.0);
    std::fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let path = cfg.out_dir.join("altimeter_error.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(["elevation_m", "mean_abs_error_m", "std_abs_error_m", "max_abs_error_m", "mean_error_m", "miss_percent", "samples"])
        .map_err(csv_err(&path))?;
    for r in &rows {
        w.write_record([
            r.elevation.to_string(),
            r.mean_abs_error.to_string(),
            r.std_abs_error.to_string(),
            r.max_abs_error.to_string(),
            r.mean_error.to_string(),
            r.miss_percent.to_string(),
            r.samples.to_string(),
        ])
        .map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(rows)
}
