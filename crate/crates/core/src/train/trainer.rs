use std::collections::BTreeMap;

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{Dataset, Interactions, Split};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalOptions, Scorer};
use crate::graph::{OverlapWeights, TripartiteGraph};
use crate::model::{
    bgcn_loss_and_grad, forward, mf_bpr_loss_and_grad, BgcnParams, DropoutMasks, MfParams,
    Parameters, PropagatedEmbeddings, PropagationGraph, TrainedModel,
};
use crate::numeric::{adam_step, AdamConfig, AdamState};

use super::{
    sample_hard, sample_positive, sample_uniform_negative, HardCandidateIndex, HardFamilies,
    ModelKind, TrainConfig, TrainTriple,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Uniform,
    Hard,
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogRecord {
    /// Resolved configuration, always the first record.
    Config {
        config: BTreeMap<String, String>,
    },
    Epoch {
        epoch: usize,
        phase: Phase,
        mean_loss: f64,
        hard_fraction: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        val: Option<BTreeMap<String, f64>>,
    },
    PhaseSwitch {
        epoch: usize,
    },
    Stop {
        epoch: usize,
        reason: String,
        best_epoch: Option<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<LogRecord>,
}

impl TrainingLog {
    fn push(&mut self, r: LogRecord) {
        self.records.push(r);
    }

    /// JSON lines, one record each.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("log records serialize"));
            s.push('\n');
        }
        s
    }

    pub fn switch_epoch(&self) -> Option<usize> {
        self.records.iter().find_map(|r| match r {
            LogRecord::PhaseSwitch { epoch } => Some(*epoch),
            _ => None,
        })
    }

    pub fn epochs_run(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Epoch { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainStatus {
    /// Ran to `max_epochs`.
    Completed,
    /// Stopped after convergence in the final phase.
    Converged,
    /// Non-finite loss or gradient; the returned model is the last good one.
    Diverged { epoch: usize, msg: String },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the best validation Recall@`select_k`.
    pub model: TrainedModel,
    pub best_epoch: Option<usize>,
    pub best_val_recall: Option<f64>,
    pub log: TrainingLog,
    pub status: TrainStatus,
}

/// Graph over training user–bundle pairs and the full item relations.
pub fn train_graph(ds: &Dataset, train: &Interactions) -> Result<TripartiteGraph> {
    TripartiteGraph::build(
        train.pairs(),
        &ds.user_item,
        &ds.bundle_item,
        ds.num_users,
        ds.num_bundles,
        ds.num_items,
    )
}

/// Inference-time view of a trained model.
pub enum FrozenModel {
    Bgcn(PropagatedEmbeddings),
    Mf(MfParams),
}

impl Scorer for FrozenModel {
    fn num_users(&self) -> usize {
        match self {
            FrozenModel::Bgcn(e) => e.num_users(),
            FrozenModel::Mf(p) => p.num_users(),
        }
    }
    fn num_bundles(&self) -> usize {
        match self {
            FrozenModel::Bgcn(e) => e.num_bundles(),
            FrozenModel::Mf(p) => p.num_bundles(),
        }
    }
    fn score_user(&self, u: usize, out: &mut [f64]) {
        match self {
            FrozenModel::Bgcn(e) => e.score_user(u, out),
            FrozenModel::Mf(p) => Scorer::score_user(p, u, out),
        }
    }
}

/// Propagates a BGCN over `graph` without dropout; MF passes through.
pub fn freeze(
    model: &TrainedModel,
    graph: &TripartiteGraph,
    config: &TrainConfig,
) -> Result<FrozenModel> {
    match model {
        TrainedModel::Bgcn(p) => {
            let overlap = config
                .switches
                .uses_b2b()
                .then(|| OverlapWeights::build_with(graph, config.overlap));
            let adj = PropagationGraph::new(graph, overlap.as_ref(), &config.switches)?;
            Ok(FrozenModel::Bgcn(forward(
                p,
                &adj,
                &config.switches,
                None,
                config.leaky_slope,
            )?))
        }
        TrainedModel::Mf(p) => {
            if p.num_users() != graph.num_users() || p.num_bundles() != graph.num_bundles() {
                return Err(Error::shape(
                    "freeze",
                    format!(
                        "mf_users/mf_bundles {}x{} vs dataset {}x{}",
                        p.num_users(),
                        p.num_bundles(),
                        graph.num_users(),
                        graph.num_bundles()
                    ),
                ));
            }
            Ok(FrozenModel::Mf(p.clone()))
        }
    }
}

/// Initial parameters for `config.model`.
pub fn init_model(ds: &Dataset, config: &TrainConfig) -> TrainedModel {
    match config.model {
        ModelKind::Bgcn => TrainedModel::Bgcn(BgcnParams::init(
            ds.num_users,
            ds.num_bundles,
            ds.num_items,
            config.dim,
            config.layers,
            config.seed,
        )),
        ModelKind::MfBpr => TrainedModel::Mf(MfParams::init(
            ds.num_users,
            ds.num_bundles,
            config.dim,
            config.seed,
        )),
    }
}

struct Optimizer {
    names: Vec<String>,
    states: Vec<AdamState>,
}

impl Optimizer {
    fn new<P: Parameters>(params: &P, lr: f64) -> Self {
        let cfg = AdamConfig {
            lr,
            ..Default::default()
        };
        Self {
            names: params.tensor_names(),
            states: params
                .tensors()
                .into_iter()
                .map(|t| AdamState::for_param(t, cfg))
                .collect(),
        }
    }

    fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        for (((name, p), g), s) in self
            .names
            .iter()
            .zip(params.tensors_mut())
            .zip(grads.tensors())
            .zip(self.states.iter_mut())
        {
            adam_step(name, p, g, s)?;
        }
        Ok(())
    }
}

enum Working {
    Bgcn(BgcnParams, Optimizer),
    Mf(MfParams, Optimizer),
}

impl Working {
    fn snapshot(&self) -> TrainedModel {
        match self {
            Working::Bgcn(p, _) => TrainedModel::Bgcn(p.clone()),
            Working::Mf(p, _) => TrainedModel::Mf(p.clone()),
        }
    }
}

fn is_divergence(e: &Error) -> bool {
    matches!(e, Error::NonFinite(_))
}

/// Two-phase BPR training with early stopping on validation Recall@`select_k`.
///
/// Phase one draws uniform negatives. When validation stops improving for
/// `patience` evaluations the run switches to hard negatives (if enabled)
/// and the patience counter resets; a second stall ends the run.
pub fn train(config: &TrainConfig, ds: &Dataset, split: &Split) -> Result<TrainOutcome> {
    config.validate()?;
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::config("data", "training split is empty"));
    }
    let graph = train_graph(ds, train)?;
    let switches = config.switches;
    let overlap = OverlapWeights::build_with(&graph, config.overlap);
    let base_adj =
        PropagationGraph::new(&graph, switches.uses_b2b().then_some(&overlap), &switches)?;
    let hard_enabled =
        config.model == ModelKind::Bgcn && config.hard != HardFamilies::None && config.p_hard > 0.0;
    let hard_index = hard_enabled.then(|| {
        HardCandidateIndex::build(&graph, &overlap, train, config.tau, config.min_overlap)
    });

    let mut work = match init_model(ds, config) {
        TrainedModel::Bgcn(p) => {
            let opt = Optimizer::new(&p, config.lr);
            Working::Bgcn(p, opt)
        }
        TrainedModel::Mf(p) => {
            let opt = Optimizer::new(&p, config.lr);
            Working::Mf(p, opt)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let val_ks = config.validation_ks();
    let exclude = train;

    let mut log = TrainingLog::default();
    log.push(LogRecord::Config {
        config: config
            .to_kv_text()
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
    });
    let mut phase = Phase::Uniform;
    let mut best: Option<(usize, f64, TrainedModel)> = None;
    let mut stale = 0usize;
    let mut warned = false;
    let mut status = TrainStatus::Completed;

    'epochs: for epoch in 1..=config.max_epochs {
        let mut remaining = train.len();
        let mut loss_sum = 0.0;
        let mut n_triples = 0usize;
        let mut n_hard = 0usize;
        while remaining > 0 {
            let size = remaining.min(config.batch_size);
            remaining -= size;
            let mut batch = Vec::with_capacity(size);
            for _ in 0..size {
                let Some((u, b)) = sample_positive(train, &mut rng, &mut warned) else {
                    break;
                };
                let (c, hard) = match (&hard_index, phase) {
                    (Some(idx), Phase::Hard) => sample_hard(
                        u as usize,
                        b as usize,
                        idx,
                        config.hard,
                        config.p_hard,
                        train,
                        &mut rng,
                    ),
                    _ => sample_uniform_negative(train, u as usize, &mut rng).map(|c| (c, false)),
                }
                .expect("sample_positive guarantees a negative exists");
                n_hard += hard as usize;
                batch.push(TrainTriple::new(u, b, c, hard));
            }
            if batch.is_empty() {
                break;
            }
            let before = work.snapshot();
            let step = match &mut work {
                Working::Bgcn(p, opt) => {
                    let node_adj;
                    let adj = if config.node_dropout > 0.0 {
                        node_adj = PropagationGraph::with_node_dropout(
                            &graph,
                            switches.uses_b2b().then_some(&overlap),
                            &switches,
                            config.node_dropout,
                            &mut rng,
                        )?;
                        &node_adj
                    } else {
                        &base_adj
                    };
                    let masks = (config.message_dropout > 0.0).then(|| {
                        DropoutMasks::sample(
                            p.num_users(),
                            p.num_items(),
                            p.num_bundles(),
                            p.dim(),
                            p.num_layers(),
                            config.message_dropout,
                            &mut rng,
                        )
                    });
                    bgcn_loss_and_grad(
                        p,
                        adj,
                        &switches,
                        masks.as_ref(),
                        &batch,
                        config.lambda,
                        config.leaky_slope,
                    )
                    .and_then(|(loss, g)| {
                        let l = finite_loss(loss)?;
                        opt.step(p, &g)?;
                        finite_params(p).map(|_| l)
                    })
                }
                Working::Mf(p, opt) => {
                    mf_bpr_loss_and_grad(p, &batch, config.lambda).and_then(|(loss, g)| {
                        let l = finite_loss(loss)?;
                        opt.step(p, &g)?;
                        finite_params(p).map(|_| l)
                    })
                }
            };
            match step {
                Ok(loss) => {
                    loss_sum += loss;
                    n_triples += batch.len();
                }
                Err(e) if is_divergence(&e) => {
                    let msg = e.to_string();
                    log.push(LogRecord::Stop {
                        epoch,
                        reason: format!("diverged: {msg}"),
                        best_epoch: best.as_ref().map(|b| b.0),
                    });
                    status = TrainStatus::Diverged { epoch, msg };
                    if best.is_none() {
                        best = Some((epoch - 1, f64::NAN, before));
                    }
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }

        let mean_loss = loss_sum / n_triples.max(1) as f64;
        let mut val = None;
        if epoch % config.eval_every == 0 {
            let snapshot = work.snapshot();
            let frozen = freeze(&snapshot, &graph, config)?;
            let report = evaluate(
                &frozen,
                &split.val,
                exclude,
                EvalOptions {
                    ks: &val_ks,
                    ..Default::default()
                },
            )?;
            let recall = report.recall(config.select_k).unwrap_or(0.0);
            debug!(
                "epoch {epoch}: loss {mean_loss:.5} val recall@{} {recall:.4}",
                config.select_k
            );
            if best.as_ref().map_or(true, |b| recall > b.1) {
                best = Some((epoch, recall, snapshot));
                stale = 0;
            } else {
                stale += 1;
            }
            val = Some(report.to_map());
        }
        log.push(LogRecord::Epoch {
            epoch,
            phase,
            mean_loss,
            hard_fraction: n_hard as f64 / n_triples.max(1) as f64,
            val,
        });
        if stale >= config.patience {
            stale = 0;
            if phase == Phase::Uniform && hard_enabled {
                info!("epoch {epoch}: switching to hard negatives");
                phase = Phase::Hard;
                log.push(LogRecord::PhaseSwitch { epoch });
            } else {
                status = TrainStatus::Converged;
                log.push(LogRecord::Stop {
                    epoch,
                    reason: "converged".into(),
                    best_epoch: best.as_ref().map(|b| b.0),
                });
                break;
            }
        }
    }
    if status == TrainStatus::Completed {
        log.push(LogRecord::Stop {
            epoch: log.epochs_run(),
            reason: "max_epochs".into(),
            best_epoch: best.as_ref().map(|b| b.0),
        });
    }
    let (best_epoch, best_val_recall, model) = match best {
        Some((e, r, m)) => (Some(e), r.is_finite().then_some(r), m),
        None => (None, None, work.snapshot()),
    };
    Ok(TrainOutcome {
        model,
        best_epoch,
        best_val_recall,
        log,
        status,
    })
}

fn finite_params<P: Parameters>(p: &P) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("parameters after update".into()))
    }
}

fn finite_loss(loss: f64) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::NonFinite("training loss".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_generate, SplitSpec, SynthSpec};

    fn setup() -> (Dataset, Split) {
        let spec = SynthSpec {
            users: 40,
            bundles: 25,
            items: 80,
            items_per_bundle: (3, 6),
            items_per_user: (6, 12),
            bundles_per_user: (4, 8),
            ..Default::default()
        };
        let ds = synth_generate(&spec).unwrap().dataset;
        let sp = split(&ds);
        (ds, sp)
    }

    fn split(ds: &Dataset) -> Split {
        crate::data::split(ds, &SplitSpec::default()).unwrap()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 8,
            batch_size: 64,
            max_epochs: 6,
            patience: 2,
            lr: 5e-3,
            eval_ks: vec![5],
            select_k: 5,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (ds, sp) = setup();
        let cfg = TrainConfig {
            max_epochs: 0,
            ..small_config()
        };
        let out = train(&cfg, &ds, &sp).unwrap();
        assert_eq!(out.model, init_model(&ds, &cfg));
        assert_eq!(out.best_epoch, None);
    }

    #[test]
    fn runs_are_deterministic() {
        let (ds, sp) = setup();
        let cfg = TrainConfig {
            message_dropout: 0.1,
            node_dropout: 0.1,
            ..small_config()
        };
        let a = train(&cfg, &ds, &sp).unwrap();
        let b = train(&cfg, &ds, &sp).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.log.to_json_lines(), b.log.to_json_lines());
    }

    #[test]
    fn huge_lr_diverges_with_last_good_model() {
        let (ds, sp) = setup();
        let cfg = TrainConfig {
            lr: 1e300,
            lambda: 1e300,
            ..small_config()
        };
        let out = train(&cfg, &ds, &sp).unwrap();
        assert!(matches!(out.status, TrainStatus::Diverged { .. }));
        assert!(out.model.tensors().iter().all(|t| t.is_finite()));
    }
}
