use bgcn::data::{split, synth_generate, SplitSpec, SynthSpec};
use bgcn::train::{train, LogRecord, Phase, TrainConfig, TrainStatus};

fn config(extra: &[&str]) -> TrainConfig {
    let mut cfg = TrainConfig {
        dim: 16,
        lr: 5e-3,
        batch_size: 128,
        patience: 3,
        max_epochs: 60,
        eval_ks: vec![20],
        ..Default::default()
    };
    for a in extra {
        cfg.apply_ablation(a).unwrap();
    }
    cfg
}

#[test]
fn hard_phase_never_loses_best_validation() {
    let ds = synth_generate(&SynthSpec {
        users: 120,
        bundles: 60,
        items: 300,
        ..Default::default()
    })
    .unwrap()
    .dataset;
    let sp = split(&ds, &SplitSpec::default()).unwrap();
    let two_phase = train(&config(&[]), &ds, &sp).unwrap();
    let uniform = train(&config(&["no-hard"]), &ds, &sp).unwrap();
    assert!(two_phase.best_val_recall >= uniform.best_val_recall);
    let switch = two_phase.log.switch_epoch().expect("phase switch happened");
    assert!(two_phase.log.records.iter().any(
        |r| matches!(r, LogRecord::Epoch { phase: Phase::Hard, epoch, .. } if *epoch > switch)
    ));
    assert!(matches!(
        two_phase.status,
        TrainStatus::Converged | TrainStatus::Completed
    ));
    assert!(uniform.log.switch_epoch().is_none());
}
